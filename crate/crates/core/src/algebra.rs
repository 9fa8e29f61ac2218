//! Pattern combination: join, shared join and descendant-edge unfolding.
//!
//! Every operator here goes through one merge pipeline:
//!
//! 1. enumerate correspondences, i.e. partial bijections between the two
//!    operands that pair the roots, contain the seed pairs and only pair
//!    label-compatible nodes; two merged nodes that both hang off child
//!    edges force their parents to be merged too;
//! 2. quotient the disjoint union by the correspondence, giving each merged
//!    node the concrete label among its sources (else `*`) and collecting
//!    the forced child edges and the required strict-ancestor pairs;
//! 3. enumerate the tree arrangements of the merged nodes in which every
//!    node without a forced parent hangs off a descendant edge, keeping
//!    only those whose ancestor relation is minimal;
//! 4. deduplicate by canonical form and drop every result into which
//!    another retained result embeds.
//!
//! The retained set covers exactly the documents that embed both operands
//! (with the seeds identified), while staying finite.

use std::collections::HashSet;

use crate::morphism::{exists_monomorphism, is_monomorphism, is_prefix_function, NodeMap};
use crate::pattern::{canonical_form, Axis, CanonicalKey, Label, NodeId, Pattern, RawNode};

/// Merged patterns are limited to this many nodes (one bit per node).
pub const MAX_MERGE_NODES: usize = 128;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("merge of {nodes} nodes exceeds the limit of {MAX_MERGE_NODES}")]
    TooLarge { nodes: usize },
    #[error("the prefix map is not a prefix function")]
    NotAPrefix,
    #[error("the shared map is not a monomorphism")]
    NotAMonomorphism,
    #[error("node {node} is not reached by a descendant edge")]
    NotADescendantEdge { node: NodeId },
}

/// A combined pattern with the embeddings of both operands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeResult {
    pub pattern: Pattern,
    pub inc1: NodeMap,
    pub inc2: NodeMap,
}

type Bits = u128;

fn bit(i: usize) -> Bits {
    1 << i
}

fn has(set: Bits, i: usize) -> bool {
    set & bit(i) != 0
}

/// Quotient of the two operands by one correspondence.
struct Quotient {
    labels: Vec<Label>,
    forced: Vec<Option<usize>>,
    /// Required strict ancestors of each class, transitively closed.
    required: Vec<Bits>,
    class1: Vec<usize>,
    class2: Vec<usize>,
}

impl Quotient {
    fn build(p1: &Pattern, p2: &Pattern, match1: &[Option<NodeId>]) -> Option<Quotient> {
        let class1: Vec<usize> = p1.nodes().collect();
        let mut class2 = vec![usize::MAX; p2.len()];
        let mut labels: Vec<Label> = p1.nodes().map(|x| p1.label(x).clone()).collect();
        for (x, m) in match1.iter().enumerate() {
            if let Some(y) = m {
                class2[*y] = x;
                if labels[x].is_wildcard() {
                    labels[x] = p2.label(*y).clone();
                }
            }
        }
        for y in p2.nodes() {
            if class2[y] == usize::MAX {
                class2[y] = labels.len();
                labels.push(p2.label(y).clone());
            }
        }
        let n = labels.len();
        let mut forced: Vec<Option<usize>> = vec![None; n];
        let mut direct: Vec<Bits> = vec![0; n];
        let edges = p1
            .edges()
            .map(|(u, v, a)| (class1[u], class1[v], a))
            .chain(p2.edges().map(|(u, v, a)| (class2[u], class2[v], a)));
        for (u, v, axis) in edges {
            if axis == Axis::Child {
                match forced[v] {
                    Some(f) if f != u => return None,
                    _ => forced[v] = Some(u),
                }
            }
            direct[v] |= bit(u);
        }
        // transitive closure in a fixpoint; n is small
        let mut required = direct;
        loop {
            let mut changed = false;
            for v in 0..n {
                let mut acc = required[v];
                for u in 0..n {
                    if has(required[v], u) {
                        acc |= required[u];
                    }
                }
                if acc != required[v] {
                    required[v] = acc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if (0..n).any(|v| has(required[v], v)) {
            return None;
        }
        Some(Quotient {
            labels,
            forced,
            required,
            class1,
            class2,
        })
    }

    fn len(&self) -> usize {
        self.labels.len()
    }

    /// Parent arrays of the arrangements with a minimal ancestor relation.
    ///
    /// Built top-down: below a placed node `r`, the unplaced nodes split
    /// into components of nodes that must be comparable (one is a required
    /// ancestor of the other). Each component becomes its own subtree of
    /// `r`, topped by one of its nodes without an unplaced required
    /// ancestor.
    fn minimal_arrangements(&self) -> Vec<Vec<Option<usize>>> {
        let n = self.len();
        let rest: Bits = (1..n).fold(0, |acc, v| acc | bit(v));
        let mut tasks = vec![(0, rest)];
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut out = Vec::new();
        self.arrange(&mut tasks, &mut parent, &mut out);
        out
    }

    fn arrange(&self, tasks: &mut Vec<(usize, Bits)>, parent: &mut Vec<Option<usize>>, out: &mut Vec<Vec<Option<usize>>>) {
        let Some((r, below)) = tasks.pop() else {
            out.push(parent.clone());
            return;
        };
        let comps = self.components(below);
        self.choose_tops(r, &comps, 0, tasks, parent, out);
        tasks.push((r, below));
    }

    fn choose_tops(
        &self,
        r: usize,
        comps: &[Bits],
        i: usize,
        tasks: &mut Vec<(usize, Bits)>,
        parent: &mut Vec<Option<usize>>,
        out: &mut Vec<Vec<Option<usize>>>,
    ) {
        if i == comps.len() {
            self.arrange(tasks, parent, out);
            return;
        }
        let comp = comps[i];
        let members = || (0..self.len()).filter(move |&v| has(comp, v));
        let pinned: Vec<usize> = members().filter(|&v| self.forced[v] == Some(r)).collect();
        let tops: Vec<usize> = match pinned.len() {
            0 => members()
                .filter(|&v| self.forced[v].is_none() && self.required[v] & comp == 0)
                .collect(),
            1 if self.required[pinned[0]] & comp == 0 => pinned,
            _ => return,
        };
        for c in tops {
            parent[c] = Some(r);
            tasks.push((c, comp & !bit(c)));
            self.choose_tops(r, comps, i + 1, tasks, parent, out);
            tasks.pop();
            parent[c] = None;
        }
    }

    /// Splits `set` into classes connected by the required-ancestor
    /// relation.
    fn components(&self, set: Bits) -> Vec<Bits> {
        let mut left = set;
        let mut comps = Vec::new();
        while left != 0 {
            let start = left.trailing_zeros() as usize;
            let mut comp = bit(start);
            loop {
                let mut grown = comp;
                for v in (0..self.len()).filter(|&v| has(set, v)) {
                    if has(comp, v) {
                        grown |= self.required[v] & set;
                    } else if self.required[v] & comp != 0 {
                        grown |= bit(v);
                    }
                }
                if grown == comp {
                    break;
                }
                comp = grown;
            }
            comps.push(comp);
            left &= !comp;
        }
        comps
    }

    fn realize(&self, parent: &[Option<usize>]) -> MergeResult {
        let raw: Vec<RawNode> = (0..self.len())
            .map(|v| RawNode {
                label: self.labels[v].clone(),
                parent: parent[v],
                axis: if self.forced[v].is_some() {
                    Axis::Child
                } else {
                    Axis::Descendant
                },
            })
            .collect();
        let (pattern, ids) = Pattern::from_raw_with_ids(&raw).expect("arrangement is a tree");
        MergeResult {
            pattern,
            inc1: NodeMap::new(self.class1.iter().map(|&c| ids[c]).collect()),
            inc2: NodeMap::new(self.class2.iter().map(|&c| ids[c]).collect()),
        }
    }
}

struct Correspondences<'a> {
    p1: &'a Pattern,
    p2: &'a Pattern,
    seeded1: Vec<bool>,
    match1: Vec<Option<NodeId>>,
    used2: Vec<bool>,
    out: Vec<Vec<Option<NodeId>>>,
}

impl Correspondences<'_> {
    /// Both child-edge nodes merged forces their parents to be merged.
    fn closed(&self, x: NodeId, y: NodeId) -> bool {
        match (self.p1.parent_edge(x), self.p2.parent_edge(y)) {
            (Some((px, Axis::Child)), Some((py, Axis::Child))) => self.match1[px] == Some(py),
            _ => true,
        }
    }

    fn run(&mut self, x: NodeId) {
        if x == self.p1.len() {
            self.out.push(self.match1.clone());
            return;
        }
        if self.seeded1[x] {
            let y = self.match1[x].unwrap();
            if self.closed(x, y) {
                self.run(x + 1);
            }
            return;
        }
        self.run(x + 1);
        for y in 1..self.p2.len() {
            if self.used2[y] || !self.p1.label(x).compatible(self.p2.label(y)) || !self.closed(x, y) {
                continue;
            }
            self.match1[x] = Some(y);
            self.used2[y] = true;
            self.run(x + 1);
            self.used2[y] = false;
            self.match1[x] = None;
        }
    }
}

fn merge(p1: &Pattern, p2: &Pattern, seeds: &[(NodeId, NodeId)]) -> Result<Vec<MergeResult>, AlgebraError> {
    let nodes = p1.len() + p2.len() - 1;
    if nodes > MAX_MERGE_NODES {
        return Err(AlgebraError::TooLarge { nodes });
    }
    if !p1.label(0).compatible(p2.label(0)) {
        return Ok(Vec::new());
    }
    let mut match1 = vec![None; p1.len()];
    let mut used2 = vec![false; p2.len()];
    let mut seeded1 = vec![false; p1.len()];
    match1[0] = Some(0);
    used2[0] = true;
    seeded1[0] = true;
    for &(x, y) in seeds {
        if match1[x] == Some(y) {
            continue;
        }
        if match1[x].is_some() || used2[y] || !p1.label(x).compatible(p2.label(y)) {
            return Ok(Vec::new());
        }
        match1[x] = Some(y);
        used2[y] = true;
        seeded1[x] = true;
    }
    let mut search = Correspondences {
        p1,
        p2,
        seeded1,
        match1,
        used2,
        out: Vec::new(),
    };
    search.run(1);

    let mut seen: HashSet<CanonicalKey> = HashSet::new();
    let mut candidates: Vec<(CanonicalKey, MergeResult)> = Vec::new();
    for corr in &search.out {
        let Some(quotient) = Quotient::build(p1, p2, corr) else {
            continue;
        };
        for parents in quotient.minimal_arrangements() {
            let result = quotient.realize(&parents);
            let key = canonical_form(&result.pattern);
            if seen.insert(key.clone()) {
                candidates.push((key, result));
            }
        }
    }
    candidates.sort_by(|a, b| (a.1.pattern.len(), &a.0).cmp(&(b.1.pattern.len(), &b.0)));
    let mut kept: Vec<MergeResult> = Vec::new();
    for (_, cand) in candidates {
        if kept.iter().any(|k| exists_monomorphism(&k.pattern, &cand.pattern)) {
            continue;
        }
        kept.retain(|k| !exists_monomorphism(&cand.pattern, &k.pattern));
        kept.push(cand);
    }
    Ok(kept)
}

/// All ways of combining `p1` and `p2` into one pattern, up to
/// isomorphism and redundancy.
pub fn join(p1: &Pattern, p2: &Pattern) -> Result<Vec<MergeResult>, AlgebraError> {
    merge(p1, p2, &[])
}

/// Combines `p1` and `q` keeping a shared sub-pattern identified: for every
/// node `x` of the shared pattern, `m(x)` in `p1` and `prefix(x)` in `q`
/// become the same node, so `inc1 ∘ m = inc2 ∘ prefix` for every result.
pub fn shared_join(
    p1: &Pattern,
    q: &Pattern,
    shared: &Pattern,
    prefix: &NodeMap,
    m: &NodeMap,
) -> Result<Vec<MergeResult>, AlgebraError> {
    if !is_prefix_function(shared, q, prefix) {
        return Err(AlgebraError::NotAPrefix);
    }
    if !is_monomorphism(shared, p1, m) {
        return Err(AlgebraError::NotAMonomorphism);
    }
    let seeds: Vec<(NodeId, NodeId)> = shared.nodes().map(|x| (m.get(x), prefix.get(x))).collect();
    merge(p1, q, &seeds)
}

/// The two ways a descendant edge can be realised: as a single child edge
/// (`step`), or through a first intermediate node (`skip`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unfolding {
    pub step: Pattern,
    /// The pattern with a fresh `*` child inserted above the edge's lower
    /// end, together with the variants in which that intermediate node
    /// coincides with another node of the pattern.
    pub skip: Vec<Pattern>,
}

impl Unfolding {
    pub fn disjuncts(&self) -> impl Iterator<Item = &Pattern> {
        std::iter::once(&self.step).chain(self.skip.iter())
    }
}

/// Unfolds the descendant edge entering `v`.
pub fn unfold_edge(p: &Pattern, v: NodeId) -> Result<Unfolding, AlgebraError> {
    let Some((u, Axis::Descendant)) = (v < p.len()).then(|| p.parent_edge(v)).flatten() else {
        return Err(AlgebraError::NotADescendantEdge { node: v });
    };
    let mut raw = p.to_raw();
    raw[v].axis = Axis::Child;
    let step = Pattern::from_raw(&raw).expect("same shape");

    // The path from the root to `u`, then a fresh `*` child of `u` with `v`
    // strictly below it. Merging this with `p` along the path and `v` lets
    // the intermediate node be new or coincide with a node of `p`.
    let mut path = p.strict_ancestors(u);
    path.reverse();
    path.push(u);
    let mut raw: Vec<RawNode> = Vec::with_capacity(path.len() + 2);
    for (i, &x) in path.iter().enumerate() {
        raw.push(match i {
            0 => RawNode::root(p.label(x).clone()),
            _ => RawNode::child_of(i - 1, p.axis(x).expect("non-root"), p.label(x).clone()),
        });
    }
    let w = raw.len();
    raw.push(RawNode::child_of(w - 1, Axis::Child, Label::Wildcard));
    raw.push(RawNode::child_of(w, Axis::Descendant, p.label(v).clone()));
    let frame = Pattern::from_raw(&raw).expect("a path is a tree");
    let mut seeds: Vec<(NodeId, NodeId)> = path.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    seeds.push((v, w + 1));
    let mut skip: Vec<Pattern> = merge(p, &frame, &seeds)?
        .into_iter()
        .map(|r| r.pattern)
        .collect();
    let mut raw = p.to_raw();
    let w = raw.len();
    raw.push(RawNode::child_of(u, Axis::Child, Label::Wildcard));
    raw[v].parent = Some(w);
    raw[v].axis = Axis::Descendant;
    let inserted = Pattern::from_raw(&raw).expect("insertion keeps a tree");
    // list the plain insertion first when it survives
    if let Some(i) = skip.iter().position(|s| canonical_form(s) == canonical_form(&inserted)) {
        let plain = skip.remove(i);
        skip.insert(0, plain);
    }
    Ok(Unfolding { step, skip })
}

pub fn descendant_edges(p: &Pattern) -> Vec<NodeId> {
    p.descendant_edges()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::is_isomorphic;
    use crate::textio::{parse_pattern, print_pattern};

    fn p(s: &str) -> Pattern {
        parse_pattern(s).unwrap()
    }

    fn printed(results: &[MergeResult]) -> Vec<String> {
        results.iter().map(|r| print_pattern(&r.pattern)).collect()
    }

    fn assert_members(p1: &Pattern, p2: &Pattern, results: &[MergeResult]) {
        for r in results {
            assert!(is_monomorphism(p1, &r.pattern, &r.inc1));
            assert!(is_monomorphism(p2, &r.pattern, &r.inc2));
            let mut covered = vec![false; r.pattern.len()];
            for x in r.inc1.as_slice().iter().chain(r.inc2.as_slice()) {
                covered[*x] = true;
            }
            assert!(covered.iter().all(|c| *c), "not jointly surjective");
        }
    }

    #[test]
    fn incompatible_roots_give_nothing() {
        assert!(join(&p("/a"), &p("/b")).unwrap().is_empty());
    }

    #[test]
    fn child_branches_become_siblings() {
        let (a, b) = (p("/a[b]"), p("/a[c]"));
        let r = join(&a, &b).unwrap();
        assert_eq!(printed(&r), vec!["/a[b][c]"]);
        assert_members(&a, &b, &r);
    }

    #[test]
    fn equal_descendant_patterns_collapse() {
        // the merged /a[.//b] embeds into the sibling and chain arrangements
        let x = p("/a[.//b]");
        let r = join(&x, &x).unwrap();
        assert_eq!(printed(&r), vec!["/a[.//b]"]);
    }

    #[test]
    fn incomparable_ancestors_yield_both_chain_orders() {
        let p1 = p("/r[.//x[.//m]]");
        let p2 = p("/r[.//y[.//m]]");
        let r = join(&p1, &p2).unwrap();
        let texts = printed(&r);
        assert!(texts.contains(&"/r[.//x[.//y[.//m]]]".to_string()), "{texts:?}");
        assert!(texts.contains(&"/r[.//y[.//x[.//m]]]".to_string()), "{texts:?}");
        assert!(texts.contains(&"/r[.//x[.//m]][.//y[.//m]]".to_string()), "{texts:?}");
        assert_members(&p1, &p2, &r);
    }

    #[test]
    fn wildcards_take_the_concrete_label() {
        let r = join(&p("/a[*]"), &p("/a[b]")).unwrap();
        assert_eq!(printed(&r), vec!["/a[b]"]);
        let r = join(&p("/*"), &p("/*")).unwrap();
        assert_eq!(printed(&r), vec!["/*"]);
    }

    #[test]
    fn child_merge_forces_parent_merge() {
        // b under x and b under y cannot be one node
        let r = join(&p("/a[x[b]]"), &p("/a[y[b]]")).unwrap();
        assert_eq!(printed(&r), vec!["/a[x[b]][y[b]]"]);
    }

    #[test]
    fn shared_join_seeds_the_shared_part() {
        let shared = p("/a");
        let q = p("/a[b]");
        let p1 = p("/a[c]");
        let r = shared_join(&p1, &q, &shared, &NodeMap::new(vec![0]), &NodeMap::new(vec![0])).unwrap();
        assert_eq!(printed(&r), vec!["/a[b][c]"]);

        let r = shared_join(&p("/a"), &q, &shared, &NodeMap::new(vec![0]), &NodeMap::new(vec![0])).unwrap();
        assert_eq!(printed(&r), vec!["/a[b]"]);

        let prem = p("/a[.//e]");
        let concl = p("/a[.//e[f]]");
        let r = shared_join(&prem, &concl, &prem, &NodeMap::new(vec![0, 1]), &NodeMap::new(vec![0, 1])).unwrap();
        assert_eq!(printed(&r), vec!["/a[.//e[f]]"]);
        for res in &r {
            for x in prem.nodes() {
                assert_eq!(res.inc1.get(x), res.inc2.get(x));
            }
        }
    }

    #[test]
    fn shared_join_checks_its_maps() {
        let shared = p("/a[b]");
        assert_eq!(
            shared_join(&p("/a[b]"), &p("/a[.//b]"), &shared, &NodeMap::new(vec![0, 1]), &NodeMap::new(vec![0, 1])),
            Err(AlgebraError::NotAPrefix)
        );
        assert_eq!(
            shared_join(&p("/a[c]"), &p("/a[b]"), &shared, &NodeMap::new(vec![0, 1]), &NodeMap::new(vec![0, 1])),
            Err(AlgebraError::NotAMonomorphism)
        );
    }

    #[test]
    fn unfold_single_edge() {
        let u = unfold_edge(&p("/a[.//b]"), 1).unwrap();
        assert_eq!(print_pattern(&u.step), "/a[b]");
        assert_eq!(u.skip.iter().map(print_pattern).collect::<Vec<_>>(), vec!["/a[*[.//b]]"]);
        let again = unfold_edge(&u.skip[0], 2).unwrap();
        assert_eq!(print_pattern(&again.step), "/a[*[b]]");
        assert_eq!(again.skip.iter().map(print_pattern).collect::<Vec<_>>(), vec!["/a[*[*[.//b]]]"]);
        assert_eq!(unfold_edge(&p("/a[b]"), 1), Err(AlgebraError::NotADescendantEdge { node: 1 }));
        assert!(unfold_edge(&p("/a"), 0).is_err());
    }

    #[test]
    fn unfold_lets_the_intermediate_node_be_an_existing_one() {
        // in /a[b[b]] the path to the lower b passes through the other b
        let u = unfold_edge(&p("/a[.//b][b]"), 1).unwrap();
        let skip: Vec<String> = u.skip.iter().map(print_pattern).collect();
        assert_eq!(skip[0], "/a[*[.//b]][b]");
        assert!(u.skip.iter().any(|s| is_isomorphic(s, &p("/a[b[.//b]]"))), "{skip:?}");
    }

    #[test]
    fn descendant_edge_listing() {
        assert!(descendant_edges(&p("/a[b]")).is_empty());
        assert_eq!(descendant_edges(&p("/a[b][.//*[e][d]]")), vec![2]);
        assert_eq!(descendant_edges(&p("/a[.//b][.//c]")), vec![1, 2]);
    }
}
