//! Reference implementations used as oracles. They only read patterns
//! through their accessors and share no search code with the library.

#![allow(dead_code)]

use std::collections::BTreeSet;

use xsat_core::logic::{Clause, Constraint, Specification};
use xsat_core::pattern::{Axis, Label, NodeId, Pattern, RawNode};

/// Whether `a` is a strict ancestor of `d`, by walking parent links.
pub fn ancestor(t: &Pattern, a: NodeId, d: NodeId) -> bool {
    let mut cur = t.parent(d);
    while let Some(x) = cur {
        if x == a {
            return true;
        }
        cur = t.parent(x);
    }
    false
}

fn label_ok(pl: &Label, tl: &Label) -> bool {
    match pl {
        Label::Wildcard => true,
        Label::Name(_) => pl == tl,
    }
}

/// The embedding conditions, checked on a complete assignment.
pub fn is_embedding(p: &Pattern, t: &Pattern, h: &[NodeId]) -> bool {
    let mut seen = BTreeSet::new();
    if !h.iter().all(|x| seen.insert(*x)) {
        return false;
    }
    if h[0] != 0 {
        return false;
    }
    for n in 0..p.len() {
        if !label_ok(p.label(n), t.label(h[n])) {
            return false;
        }
        if let Some((parent, axis)) = p.parent_edge(n) {
            let ok = match axis {
                Axis::Child => t.parent(h[n]) == Some(h[parent]) && t.axis(h[n]) == Some(Axis::Child),
                Axis::Descendant => ancestor(t, h[parent], h[n]),
            };
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Every function from the nodes of `p` into the nodes of `t`, filtered by
/// `keep`. Exponential; for small inputs only.
pub fn all_functions(p: &Pattern, t: &Pattern, keep: &dyn Fn(&[NodeId]) -> bool) -> Vec<Vec<NodeId>> {
    let mut out = Vec::new();
    let mut h = vec![0; p.len()];
    fn go(i: usize, h: &mut Vec<NodeId>, m: usize, keep: &dyn Fn(&[NodeId]) -> bool, out: &mut Vec<Vec<NodeId>>) {
        if i == h.len() {
            if keep(h) {
                out.push(h.clone());
            }
            return;
        }
        for x in 0..m {
            h[i] = x;
            go(i + 1, h, m, keep, out);
        }
    }
    go(0, &mut h, t.len(), keep, &mut out);
    out
}

/// Injective assignments, extended node by node with no other pruning.
fn injective(p: &Pattern, t: &Pattern, pins: &[Option<NodeId>], visit: &mut dyn FnMut(&[NodeId]) -> bool) -> bool {
    fn go(
        i: usize,
        h: &mut Vec<NodeId>,
        used: &mut Vec<bool>,
        pins: &[Option<NodeId>],
        visit: &mut dyn FnMut(&[NodeId]) -> bool,
    ) -> bool {
        if i == pins.len() {
            return visit(h);
        }
        for x in 0..used.len() {
            if used[x] || pins[i].is_some_and(|y| y != x) {
                continue;
            }
            used[x] = true;
            h.push(x);
            let stop = go(i + 1, h, used, pins, visit);
            h.pop();
            used[x] = false;
            if stop {
                return true;
            }
        }
        false
    }
    if p.len() > t.len() {
        return false;
    }
    go(0, &mut Vec::new(), &mut vec![false; t.len()], pins, visit)
}

pub fn embeds(p: &Pattern, t: &Pattern) -> bool {
    injective(p, t, &vec![None; p.len()], &mut |h| is_embedding(p, t, h))
}

pub fn satisfies(t: &Pattern, k: &Constraint) -> bool {
    match k {
        Constraint::Positive(p) => embeds(p, t),
        Constraint::Negative(p) => !embeds(p, t),
        Constraint::Conditional(c) => {
            let (premise, conclusion, prefix) = (c.premise(), c.conclusion(), c.prefix());
            let mut every = true;
            injective(premise, t, &vec![None; premise.len()], &mut |h| {
                if !is_embedding(premise, t, h) {
                    return false;
                }
                let mut pins = vec![None; conclusion.len()];
                for x in 0..premise.len() {
                    pins[prefix.get(x)] = Some(h[x]);
                }
                let extends = injective(conclusion, t, &pins, &mut |f| is_embedding(conclusion, t, f));
                if !extends {
                    every = false;
                }
                !every
            });
            every
        }
    }
}

pub fn satisfies_clause(t: &Pattern, c: &Clause) -> bool {
    c.literals.iter().any(|k| satisfies(t, k))
}

pub fn satisfies_spec(t: &Pattern, s: &Specification) -> bool {
    s.clauses().iter().all(|c| satisfies_clause(t, c))
}

/// A canonical string for an unordered labelled tree: label, then the
/// sorted strings of the children.
pub fn tree_string(t: &Pattern, n: NodeId) -> String {
    let mut kids: Vec<String> = t
        .children(n)
        .iter()
        .map(|&c| {
            let arrow = if t.axis(c) == Some(Axis::Descendant) { "//" } else { "/" };
            format!("{arrow}{}", tree_string(t, c))
        })
        .collect();
    kids.sort();
    let label = match t.label(n) {
        Label::Wildcard => "*".to_string(),
        Label::Name(s) => format!("'{s}'"),
    };
    format!("{label}({})", kids.concat())
}

/// Documents with at most `max` nodes, one per isomorphism class, built as
/// ordered trees from parent arrays and deduplicated.
pub fn reference_documents(labels: &[&str], max: usize) -> Vec<Pattern> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for n in 1..=max {
        let mut parents = vec![0usize; n];
        loop {
            let mut labelling = vec![0usize; n];
            loop {
                let raw: Vec<RawNode> = (0..n)
                    .map(|i| {
                        let l = Label::Name(labels[labelling[i]].to_string());
                        if i == 0 {
                            RawNode::root(l)
                        } else {
                            RawNode::child_of(parents[i], Axis::Child, l)
                        }
                    })
                    .collect();
                let t = Pattern::from_raw(&raw).unwrap();
                if seen.insert(tree_string(&t, 0)) {
                    out.push(t);
                }
                if !next_digits(&mut labelling, &vec![labels.len(); n]) {
                    break;
                }
            }
            // parents[i] ranges over 0..i
            let limits: Vec<usize> = (0..n).map(|i| i.max(1)).collect();
            if n < 2 || !next_digits(&mut parents[1..], &limits[1..]) {
                break;
            }
        }
    }
    out
}

fn next_digits(d: &mut [usize], limits: &[usize]) -> bool {
    for i in (0..d.len()).rev() {
        d[i] += 1;
        if d[i] < limits[i] {
            return true;
        }
        d[i] = 0;
    }
    false
}

/// Canonical strings of the trees in `docs` satisfying `keep`.
pub fn models(docs: &[Pattern], keep: impl Fn(&Pattern) -> bool) -> BTreeSet<String> {
    docs.iter().filter(|t| keep(t)).map(|t| tree_string(t, 0)).collect()
}
