//! The three inference rules.

use crate::algebra::{self, AlgebraError};
use crate::logic::{simplify, Clause, ClauseId, Constraint};
use crate::morphism::{enumerate_monomorphisms, extension_exists, first_monomorphism, NodeMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    R1,
    R2,
    R3,
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Rule::R1 => "R1",
            Rule::R2 => "R2",
            Rule::R3 => "R3",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("both premises are clause {0}")]
    SameClause(ClauseId),
    #[error("literal {index} of clause {clause} does not exist")]
    NoSuchLiteral { clause: ClauseId, index: usize },
    #[error("literal {index} of clause {clause} must be {expected}")]
    WrongLiteral {
        clause: ClauseId,
        index: usize,
        expected: &'static str,
    },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// One conclusion of a rule, already simplified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inference {
    pub literals: Vec<Constraint>,
    /// Monomorphism witnessing the side condition (R1, R3).
    pub mono: Option<NodeMap>,
}

impl Inference {
    pub fn into_clause(self, id: ClauseId) -> Clause {
        Clause::new(id, self.literals)
    }
}

fn literal<'c>(c: &'c Clause, i: usize) -> Result<&'c Constraint, RuleError> {
    c.literals.get(i).ok_or_else(|| RuleError::NoSuchLiteral {
        clause: c.id.clone(),
        index: i,
    })
}

fn wrong(c: &Clause, i: usize, expected: &'static str) -> RuleError {
    RuleError::WrongLiteral {
        clause: c.id.clone(),
        index: i,
        expected,
    }
}

fn distinct(c1: &Clause, c2: &Clause) -> Result<(), RuleError> {
    if c1.id == c2.id {
        Err(RuleError::SameClause(c1.id.clone()))
    } else {
        Ok(())
    }
}

fn conclude(head: Vec<Constraint>, c1: &Clause, i: usize, c2: &Clause, j: usize, mono: Option<NodeMap>) -> Inference {
    let mut literals: Vec<Constraint> = head.iter().map(Constraint::canonical).collect();
    literals.extend(c1.without(i));
    literals.extend(c2.without(j));
    let literals = simplify(&Clause::new("_", literals)).literals;
    Inference { literals, mono }
}

/// `∃p1 ∨ Γ1` and `¬∃p2 ∨ Γ2` give `Γ1 ∨ Γ2` when `p2` embeds into `p1`.
pub fn apply_r1(c1: &Clause, i: usize, c2: &Clause, j: usize) -> Result<Vec<Inference>, RuleError> {
    distinct(c1, c2)?;
    let Constraint::Positive(p1) = literal(c1, i)? else {
        return Err(wrong(c1, i, "positive"));
    };
    let Constraint::Negative(p2) = literal(c2, j)? else {
        return Err(wrong(c2, j, "negative"));
    };
    Ok(first_monomorphism(p2, p1)
        .map(|m| conclude(Vec::new(), c1, i, c2, j, Some(m)))
        .into_iter()
        .collect())
}

/// `∃p1 ∨ Γ1` and `∃p2 ∨ Γ2` give `⋁_{s ∈ p1 ⊗ p2} ∃s ∨ Γ1 ∨ Γ2`.
pub fn apply_r2(c1: &Clause, i: usize, c2: &Clause, j: usize) -> Result<Vec<Inference>, RuleError> {
    distinct(c1, c2)?;
    let Constraint::Positive(p1) = literal(c1, i)? else {
        return Err(wrong(c1, i, "positive"));
    };
    let Constraint::Positive(p2) = literal(c2, j)? else {
        return Err(wrong(c2, j, "positive"));
    };
    let head = algebra::join(p1, p2)?
        .into_iter()
        .map(|r| Constraint::Positive(r.pattern))
        .collect();
    Ok(vec![conclude(head, c1, i, c2, j, None)])
}

/// Monomorphisms from the premise of a conditional into `p1` that do not
/// extend to its conclusion.
pub fn r3_candidates(c1: &Clause, i: usize, c2: &Clause, j: usize) -> Result<Vec<NodeMap>, RuleError> {
    distinct(c1, c2)?;
    let Constraint::Positive(p1) = literal(c1, i)? else {
        return Err(wrong(c1, i, "positive"));
    };
    let Constraint::Conditional(k) = literal(c2, j)? else {
        return Err(wrong(c2, j, "conditional"));
    };
    Ok(enumerate_monomorphisms(k.premise(), p1)
        .into_iter()
        .filter(|m| !extension_exists(k.prefix(), m, k.conclusion(), p1))
        .collect())
}

/// R3 for one qualifying monomorphism `m`.
pub fn apply_r3_with(c1: &Clause, i: usize, c2: &Clause, j: usize, m: &NodeMap) -> Result<Inference, RuleError> {
    let (Constraint::Positive(p1), Constraint::Conditional(k)) = (literal(c1, i)?, literal(c2, j)?) else {
        return Err(wrong(c2, j, "conditional"));
    };
    let head = algebra::shared_join(p1, k.conclusion(), k.premise(), k.prefix(), m)?
        .into_iter()
        .map(|r| Constraint::Positive(r.pattern))
        .collect();
    Ok(conclude(head, c1, i, c2, j, Some(m.clone())))
}

/// `∃p1 ∨ Γ1` and `∀(c: p2 → q) ∨ Γ2` give, for every embedding `m` of
/// `p2` into `p1` that does not extend along `c`,
/// `⋁_{s ∈ p1 ⊗_{c,m} q} ∃s ∨ Γ1 ∨ Γ2`.
pub fn apply_r3(c1: &Clause, i: usize, c2: &Clause, j: usize) -> Result<Vec<Inference>, RuleError> {
    r3_candidates(c1, i, c2, j)?
        .iter()
        .map(|m| apply_r3_with(c1, i, c2, j, m))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::{format_clause_body, parse_spec};

    fn clauses(text: &str) -> Vec<Clause> {
        parse_spec(text).unwrap().into_clauses()
    }

    fn bodies(infs: &[Inference]) -> Vec<String> {
        infs.iter()
            .map(|i| format_clause_body(&Clause::new("x", i.literals.clone())))
            .collect()
    }

    #[test]
    fn r1_examples() {
        let c = clauses("clause c1 : exists /a[b]\nclause c2 : not exists /a[b]");
        assert_eq!(bodies(&apply_r1(&c[0], 0, &c[1], 0).unwrap()), vec!["false"]);
        let c = clauses("clause c1 : exists /a[b]\nclause c2 : not exists /a[.//b]");
        assert_eq!(bodies(&apply_r1(&c[0], 0, &c[1], 0).unwrap()), vec!["false"]);
        let c = clauses("clause c1 : exists /a\nclause c2 : not exists /a[b]");
        assert!(apply_r1(&c[0], 0, &c[1], 0).unwrap().is_empty());
    }

    #[test]
    fn r1_keeps_side_literals() {
        let c = clauses("clause c1 : exists /a | exists /z\nclause c2 : not exists /a | exists /y");
        assert_eq!(bodies(&apply_r1(&c[0], 0, &c[1], 0).unwrap()), vec!["exists /z | exists /y"]);
    }

    #[test]
    fn rule_preconditions() {
        let c = clauses("clause c1 : exists /a\nclause c2 : exists /b");
        assert!(matches!(apply_r1(&c[0], 0, &c[1], 0), Err(RuleError::WrongLiteral { .. })));
        assert!(matches!(apply_r2(&c[0], 0, &c[0], 0), Err(RuleError::SameClause(_))));
        assert!(matches!(apply_r2(&c[0], 3, &c[1], 0), Err(RuleError::NoSuchLiteral { .. })));
        assert!(matches!(apply_r3(&c[0], 0, &c[1], 0), Err(RuleError::WrongLiteral { .. })));
    }

    #[test]
    fn r2_examples() {
        let c = clauses("clause c1 : exists /a\nclause c2 : exists /b");
        assert_eq!(bodies(&apply_r2(&c[0], 0, &c[1], 0).unwrap()), vec!["false"]);
        let c = clauses("clause c1 : exists /a[b]\nclause c2 : exists /a[c]");
        assert_eq!(bodies(&apply_r2(&c[0], 0, &c[1], 0).unwrap()), vec!["exists /a[b][c]"]);
        let c = clauses("clause c1 : exists /a | not exists /x\nclause c2 : exists /a");
        assert_eq!(bodies(&apply_r2(&c[0], 0, &c[1], 0).unwrap()), vec!["exists /a | not exists /x"]);
    }

    #[test]
    fn r3_examples() {
        let cond = "clause c2 : forall /a[.//e] => /a[.//e[f]]";
        let c = clauses(&format!("clause c1 : exists /a[.//e]\n{cond}"));
        let out = apply_r3(&c[0], 0, &c[1], 0).unwrap();
        assert_eq!(bodies(&out), vec!["exists /a[.//e[f]]"]);
        assert_eq!(out[0].mono, Some(NodeMap::new(vec![0, 1])));
        let c = clauses(&format!("clause c1 : exists /a[.//e[f]]\n{cond}"));
        assert!(apply_r3(&c[0], 0, &c[1], 0).unwrap().is_empty());
        let c = clauses(&format!("clause c1 : exists /a\n{cond}"));
        assert!(apply_r3(&c[0], 0, &c[1], 0).unwrap().is_empty());
    }

    #[test]
    fn r3_emits_one_clause_per_blocked_embedding() {
        let c = clauses("clause c1 : exists /a[b][b[c]]\nclause c2 : forall /a[b] => /a[b[c]]");
        // b(1) lacks a c child, b(2) has one
        let out = apply_r3(&c[0], 0, &c[1], 0).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].mono, Some(NodeMap::new(vec![0, 1])));
        assert_eq!(bodies(&out), vec!["exists /a[b[c]][b[c]]"]);
    }
}
