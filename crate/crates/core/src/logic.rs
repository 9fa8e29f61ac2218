//! Constraints, clauses and specifications, with document satisfaction,
//! literal equality, simplification and subsumption.

use std::collections::HashSet;
use std::fmt;
use std::ops::ControlFlow;

use crate::morphism::{self, exists_monomorphism, MorphismKind, NodeMap};
use crate::pattern::{canonical_form, canonical_order, marked_canonical_form, CanonicalKey, Document, Pattern};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClauseId(String);

impl ClauseId {
    pub fn new(id: impl Into<String>) -> ClauseId {
        ClauseId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Numeric suffix of ids shaped like `c<digits>`.
    pub fn number(&self) -> Option<u64> {
        self.0.strip_prefix('c').and_then(|d| d.parse().ok())
    }
}

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ClauseId {
    fn from(s: &str) -> ClauseId {
        ClauseId::new(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{prefix} is not a prefix function from the premise into the conclusion")]
pub struct InvalidPrefix {
    pub prefix: NodeMap,
}

/// `∀(c: premise → conclusion)`: every embedding of the premise extends
/// along `c` to an embedding of the conclusion.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Conditional {
    premise: Pattern,
    conclusion: Pattern,
    prefix: NodeMap,
}

impl Conditional {
    pub fn new(premise: Pattern, conclusion: Pattern, prefix: NodeMap) -> Result<Conditional, InvalidPrefix> {
        if morphism::is_prefix_function(&premise, &conclusion, &prefix) {
            Ok(Conditional {
                premise,
                conclusion,
                prefix,
            })
        } else {
            Err(InvalidPrefix { prefix })
        }
    }

    pub fn premise(&self) -> &Pattern {
        &self.premise
    }

    pub fn conclusion(&self) -> &Pattern {
        &self.conclusion
    }

    pub fn prefix(&self) -> &NodeMap {
        &self.prefix
    }

    /// Conclusion nodes in the image of the prefix function.
    pub fn shared_marks(&self) -> Vec<bool> {
        let mut marks = vec![false; self.conclusion.len()];
        for (_, y) in self.prefix.pairs() {
            marks[y] = true;
        }
        marks
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    Positive(Pattern),
    Negative(Pattern),
    Conditional(Conditional),
}

/// Isomorphism-invariant identity of a constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintKey(u8, CanonicalKey);

impl Constraint {
    /// A conditional is determined up to isomorphism by its conclusion with
    /// the prefix image marked, since the prefix function embeds the
    /// premise as an exact rooted sub-tree.
    pub fn key(&self) -> ConstraintKey {
        match self {
            Constraint::Positive(p) => ConstraintKey(b'P', canonical_form(p)),
            Constraint::Negative(p) => ConstraintKey(b'N', canonical_form(p)),
            Constraint::Conditional(c) => {
                ConstraintKey(b'C', marked_canonical_form(&c.conclusion, &c.shared_marks()))
            }
        }
    }

    pub fn patterns(&self) -> Vec<&Pattern> {
        match self {
            Constraint::Positive(p) | Constraint::Negative(p) => vec![p],
            Constraint::Conditional(c) => vec![&c.premise, &c.conclusion],
        }
    }

    pub fn is_positive(&self) -> bool {
        matches!(self, Constraint::Positive(_))
    }

    /// The same constraint with every pattern renumbered into printed order.
    pub fn canonical(&self) -> Constraint {
        match self {
            Constraint::Positive(p) => Constraint::Positive(canonical_order(p).0),
            Constraint::Negative(p) => Constraint::Negative(canonical_order(p).0),
            Constraint::Conditional(c) => {
                let (premise, pid) = canonical_order(&c.premise);
                let (conclusion, cid) = canonical_order(&c.conclusion);
                let mut images = vec![0; premise.len()];
                for (x, y) in c.prefix.pairs() {
                    images[pid[x]] = cid[y];
                }
                Constraint::Conditional(Conditional {
                    premise,
                    conclusion,
                    prefix: NodeMap::new(images),
                })
            }
        }
    }
}

pub fn constraint_equal(x: &Constraint, y: &Constraint) -> bool {
    x.key() == y.key()
}

/// A disjunction of constraints; no literals means FALSE.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub id: ClauseId,
    pub literals: Vec<Constraint>,
}

impl Clause {
    pub fn new(id: impl Into<ClauseId>, literals: Vec<Constraint>) -> Clause {
        Clause {
            id: id.into(),
            literals,
        }
    }

    pub fn is_false(&self) -> bool {
        self.literals.is_empty()
    }

    /// All literals except the one at `index`.
    pub fn without(&self, index: usize) -> Vec<Constraint> {
        self.literals
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != index)
            .map(|(_, l)| l.clone())
            .collect()
    }

    fn keys(&self) -> HashSet<ConstraintKey> {
        self.literals.iter().map(Constraint::key).collect()
    }
}

impl From<String> for ClauseId {
    fn from(s: String) -> ClauseId {
        ClauseId(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("duplicate clause id {0}")]
pub struct DuplicateClauseId(pub ClauseId);

/// A conjunction of clauses with unique ids, kept in input order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Specification {
    clauses: Vec<Clause>,
}

impl Specification {
    pub fn new(clauses: Vec<Clause>) -> Result<Specification, DuplicateClauseId> {
        let mut seen = HashSet::new();
        for c in &clauses {
            if !seen.insert(c.id.clone()) {
                return Err(DuplicateClauseId(c.id.clone()));
            }
        }
        Ok(Specification { clauses })
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn into_clauses(self) -> Vec<Clause> {
        self.clauses
    }

    pub fn get(&self, id: &ClauseId) -> Option<&Clause> {
        self.clauses.iter().find(|c| &c.id == id)
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn contains_false(&self) -> bool {
        self.clauses.iter().any(Clause::is_false)
    }

    /// Every concrete label mentioned by any pattern, sorted and unique.
    pub fn label_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .clauses
            .iter()
            .flat_map(|c| c.literals.iter())
            .flat_map(|l| l.patterns())
            .flat_map(|p| p.label_names().map(str::to_owned).collect::<Vec<_>>())
            .collect();
        names.sort();
        names.dedup();
        names
    }
}

/// Satisfaction of a constraint by a tree read as a document. `t` must be
/// wildcard- and descendant-free for the result to mean anything.
pub(crate) fn tree_satisfies(t: &Pattern, k: &Constraint) -> bool {
    match k {
        Constraint::Positive(p) => exists_monomorphism(p, t),
        Constraint::Negative(p) => !exists_monomorphism(p, t),
        Constraint::Conditional(c) => {
            let flow = morphism::for_each_map(&c.premise, t, MorphismKind::Monomorphism, None, |h| {
                let h = NodeMap::new(h.to_vec());
                if morphism::extension_exists(&c.prefix, &h, &c.conclusion, t) {
                    ControlFlow::Continue(())
                } else {
                    ControlFlow::Break(())
                }
            });
            flow.is_continue()
        }
    }
}

pub(crate) fn tree_satisfies_clause(t: &Pattern, cl: &Clause) -> bool {
    cl.literals.iter().any(|k| tree_satisfies(t, k))
}

pub fn doc_satisfies_constraint(t: &Document, k: &Constraint) -> bool {
    tree_satisfies(t, k)
}

pub fn doc_satisfies_clause(t: &Document, cl: &Clause) -> bool {
    tree_satisfies_clause(t, cl)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub overall: bool,
    pub per_clause: Vec<(ClauseId, bool)>,
}

pub fn check_document(t: &Document, s: &Specification) -> CheckReport {
    let per_clause: Vec<(ClauseId, bool)> = s
        .clauses()
        .iter()
        .map(|c| (c.id.clone(), doc_satisfies_clause(t, c)))
        .collect();
    CheckReport {
        overall: per_clause.iter().all(|(_, ok)| *ok),
        per_clause,
    }
}

/// Drops literals equal to an earlier literal.
pub fn simplify(cl: &Clause) -> Clause {
    let mut seen = HashSet::new();
    Clause {
        id: cl.id.clone(),
        literals: cl
            .literals
            .iter()
            .filter(|l| seen.insert(l.key()))
            .cloned()
            .collect(),
    }
}

/// Literal-set inclusion up to constraint equality. Both clauses are
/// expected to be simplified, so inclusion of key sets is an injective
/// matching.
pub fn subsumes(c1: &Clause, c2: &Clause) -> bool {
    if c1.literals.len() > c2.literals.len() {
        return false;
    }
    let keys = c2.keys();
    c1.literals.iter().all(|l| keys.contains(&l.key()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::{parse_document_native, parse_pattern};

    fn p(s: &str) -> Pattern {
        parse_pattern(s).unwrap()
    }

    fn pos(s: &str) -> Constraint {
        Constraint::Positive(p(s))
    }

    fn neg(s: &str) -> Constraint {
        Constraint::Negative(p(s))
    }

    fn cond(prem: &str, concl: &str, map: &[usize]) -> Constraint {
        Constraint::Conditional(Conditional::new(p(prem), p(concl), NodeMap::new(map.to_vec())).unwrap())
    }

    fn sample_t() -> Document {
        parse_document_native("/a[b[g]][e[f[e][d]]]").unwrap()
    }

    #[test]
    fn equality_is_structural() {
        assert!(constraint_equal(&pos("/a[b][c]"), &pos("/a[c][b]")));
        assert!(!constraint_equal(&pos("/a[b]"), &neg("/a[b]")));
        // b is shared; conclusion written with branches permuted
        let x = cond("/a[b]", "/a[b][c]", &[0, 1]);
        let y = cond("/a[b]", "/a[c][b]", &[0, 2]);
        assert!(constraint_equal(&x, &y));
        // sharing c's sibling instead changes the constraint
        let z = cond("/a[*]", "/a[*][b]", &[0, 1]);
        let w = cond("/a[b]", "/a[*][b]", &[0, 2]);
        assert!(!constraint_equal(&z, &w));
    }

    #[test]
    fn invalid_prefix_is_rejected() {
        assert!(Conditional::new(p("/a[b]"), p("/a[.//b]"), NodeMap::new(vec![0, 1])).is_err());
    }

    #[test]
    fn sample_and_conditional_satisfaction() {
        let t = sample_t();
        assert!(doc_satisfies_constraint(&t, &pos("/a[b][.//*[e][d]]")));
        assert!(!doc_satisfies_constraint(&t, &cond("/a[.//e]", "/a[.//e[f]]", &[0, 1])));
        assert!(doc_satisfies_constraint(&t, &pos("/a[.//e[f]]")));
        // vacuous universal
        assert!(doc_satisfies_constraint(&t, &cond("/a[.//z]", "/a[.//z[f]]", &[0, 1])));
    }

    #[test]
    fn clause_satisfaction() {
        let t = sample_t();
        assert!(!doc_satisfies_clause(&t, &Clause::new("c0", vec![])));
        assert!(doc_satisfies_clause(&t, &Clause::new("c1", vec![pos("/b"), pos("/a")])));
        assert!(!doc_satisfies_clause(&t, &Clause::new("c2", vec![neg("/a")])));
    }

    #[test]
    fn check_reports_each_clause() {
        let t = sample_t();
        assert!(check_document(&t, &Specification::default()).overall);
        let spec = Specification::new(vec![
            Clause::new("c1", vec![pos("/a[b][.//*[e][d]]")]),
            Clause::new("c2", vec![cond("/a[.//e]", "/a[.//e[f]]", &[0, 1])]),
        ])
        .unwrap();
        let report = check_document(&t, &spec);
        assert!(!report.overall);
        assert_eq!(
            report.per_clause,
            vec![(ClauseId::new("c1"), true), (ClauseId::new("c2"), false)]
        );
        let single = Specification::new(vec![Clause::new("c1", vec![pos("/a")])]).unwrap();
        assert!(check_document(&t, &single).overall);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let dup = vec![Clause::new("c1", vec![]), Clause::new("c1", vec![pos("/a")])];
        assert_eq!(Specification::new(dup), Err(DuplicateClauseId(ClauseId::new("c1"))));
    }

    #[test]
    fn simplify_drops_equal_literals_only() {
        let c = Clause::new("c1", vec![pos("/a[b][c]"), pos("/a[c][b]")]);
        assert_eq!(simplify(&c).literals, vec![pos("/a[b][c]")]);
        let mixed = Clause::new("c2", vec![pos("/a"), neg("/a")]);
        assert_eq!(simplify(&mixed), mixed);
        let f = Clause::new("c3", vec![]);
        assert_eq!(simplify(&f), f);
        assert_eq!(simplify(&simplify(&c)), simplify(&c));
    }

    #[test]
    fn subsumption_is_literal_inclusion() {
        let g1 = Clause::new("c1", vec![pos("/a[b]")]);
        let g12 = Clause::new("c2", vec![neg("/x"), pos("/a[b]")]);
        assert!(subsumes(&g1, &g12));
        assert!(!subsumes(&g12, &g1));
        assert!(subsumes(&Clause::new("f", vec![]), &g1));
        assert!(!subsumes(&g1, &Clause::new("c3", vec![pos("/a")])));
        assert!(subsumes(&g12, &g12));
    }
}
