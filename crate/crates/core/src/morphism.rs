//! Monomorphisms, prefix functions and constrained extensions.
//!
//! All enumerators backtrack over source nodes in preorder with the root
//! pinned to the target root, and try candidate images in increasing target
//! id. Results therefore come out in lexicographic order of the image tuple
//! `(map(0), map(1), ...)`.

use std::fmt;
use std::ops::ControlFlow;

use crate::pattern::{Axis, NodeId, Pattern};

/// A total node function from a source pattern into a target pattern,
/// stored as the image of every source node in preorder.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeMap(Vec<NodeId>);

impl NodeMap {
    pub fn new(images: Vec<NodeId>) -> NodeMap {
        NodeMap(images)
    }

    pub fn identity(len: usize) -> NodeMap {
        NodeMap((0..len).collect())
    }

    pub fn get(&self, n: NodeId) -> NodeId {
        self.0[n]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<NodeId> {
        self.0
    }

    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.0.iter().copied().enumerate()
    }

    /// `then ∘ self`: first apply `self`, then `then`.
    pub fn then(&self, then: &NodeMap) -> NodeMap {
        NodeMap(self.0.iter().map(|&x| then.get(x)).collect())
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.0.iter().all(|x| seen.insert(*x))
    }

    /// Builds a map from explicit `(source, target)` pairs; every source
    /// node in `0..len` must appear exactly once.
    pub fn from_pairs(len: usize, pairs: &[(NodeId, NodeId)]) -> Option<NodeMap> {
        let mut images = vec![None; len];
        for &(s, t) in pairs {
            if s >= len || images[s].is_some() {
                return None;
            }
            images[s] = Some(t);
        }
        images.into_iter().collect::<Option<Vec<_>>>().map(NodeMap)
    }
}

impl fmt::Display for NodeMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (s, t)) in self.pairs().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}->{t}")?;
        }
        f.write_str("]")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MorphismKind {
    Monomorphism,
    PrefixFunction,
}

fn well_formed(source: &Pattern, target: &Pattern, h: &NodeMap) -> bool {
    h.len() == source.len() && h.as_slice().iter().all(|&x| x < target.len())
}

/// Checks the monomorphism conditions directly: injective, root-, label-,
/// child-edge- and descendant-edge-preserving.
pub fn is_monomorphism(source: &Pattern, target: &Pattern, h: &NodeMap) -> bool {
    well_formed(source, target, h)
        && h.is_injective()
        && h.get(source.root()) == target.root()
        && source
            .nodes()
            .all(|n| source.label(n).matches(target.label(h.get(n))))
        && source.edges().all(|(x, y, axis)| {
            let (hx, hy) = (h.get(x), h.get(y));
            match axis {
                Axis::Child => target.parent_edge(hy) == Some((hx, Axis::Child)),
                Axis::Descendant => target.is_strict_ancestor(hx, hy),
            }
        })
}

/// Checks the prefix-function conditions: injective, root identity, exact
/// label identity, and every edge mapped onto an edge of the same kind.
pub fn is_prefix_function(source: &Pattern, target: &Pattern, c: &NodeMap) -> bool {
    well_formed(source, target, c)
        && c.is_injective()
        && c.get(source.root()) == target.root()
        && source.nodes().all(|n| source.label(n) == target.label(c.get(n)))
        && source
            .edges()
            .all(|(x, y, axis)| target.parent_edge(c.get(y)) == Some((c.get(x), axis)))
}

struct Search<'a> {
    source: &'a Pattern,
    target: &'a Pattern,
    kind: MorphismKind,
    pins: Option<&'a [Option<NodeId>]>,
    images: Vec<NodeId>,
    used: Vec<bool>,
}

impl Search<'_> {
    fn admissible(&self, n: NodeId, cand: NodeId) -> bool {
        if self.used[cand] {
            return false;
        }
        if let Some(pins) = self.pins {
            if let Some(pin) = pins[n] {
                if pin != cand {
                    return false;
                }
            }
        }
        match self.kind {
            MorphismKind::Monomorphism => self.source.label(n).matches(self.target.label(cand)),
            MorphismKind::PrefixFunction => self.source.label(n) == self.target.label(cand),
        }
    }

    fn run<B>(&mut self, n: NodeId, visit: &mut dyn FnMut(&[NodeId]) -> ControlFlow<B>) -> ControlFlow<B> {
        if n == self.source.len() {
            return visit(&self.images);
        }
        let candidates: Vec<NodeId> = match self.source.parent_edge(n) {
            None => vec![self.target.root()],
            Some((p, axis)) => {
                let image = self.images[p];
                match (self.kind, axis) {
                    (MorphismKind::Monomorphism, Axis::Descendant) => {
                        self.target.strict_descendants(image).collect()
                    }
                    (MorphismKind::Monomorphism, Axis::Child) => self
                        .target
                        .children(image)
                        .iter()
                        .copied()
                        .filter(|&c| self.target.axis(c) == Some(Axis::Child))
                        .collect(),
                    (MorphismKind::PrefixFunction, axis) => self
                        .target
                        .children(image)
                        .iter()
                        .copied()
                        .filter(|&c| self.target.axis(c) == Some(axis))
                        .collect(),
                }
            }
        };
        for cand in candidates {
            if !self.admissible(n, cand) {
                continue;
            }
            self.images.push(cand);
            self.used[cand] = true;
            let flow = self.run(n + 1, visit);
            self.used[cand] = false;
            self.images.pop();
            flow?;
        }
        ControlFlow::Continue(())
    }
}

/// Streams every map of the given kind from `source` into `target` in
/// lexicographic order. `pins[n] = Some(t)` forces node `n` onto `t`.
pub fn for_each_map<B>(
    source: &Pattern,
    target: &Pattern,
    kind: MorphismKind,
    pins: Option<&[Option<NodeId>]>,
    mut visit: impl FnMut(&[NodeId]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    if source.len() > target.len() {
        return ControlFlow::Continue(());
    }
    let mut search = Search {
        source,
        target,
        kind,
        pins,
        images: Vec::with_capacity(source.len()),
        used: vec![false; target.len()],
    };
    search.run(0, &mut visit)
}

fn collect(
    source: &Pattern,
    target: &Pattern,
    kind: MorphismKind,
    pins: Option<&[Option<NodeId>]>,
) -> Vec<NodeMap> {
    let mut out = Vec::new();
    let _ = for_each_map::<()>(source, target, kind, pins, |images| {
        out.push(NodeMap(images.to_vec()));
        ControlFlow::Continue(())
    });
    out
}

fn first(
    source: &Pattern,
    target: &Pattern,
    kind: MorphismKind,
    pins: Option<&[Option<NodeId>]>,
) -> Option<NodeMap> {
    match for_each_map(source, target, kind, pins, |images| {
        ControlFlow::Break(NodeMap(images.to_vec()))
    }) {
        ControlFlow::Break(m) => Some(m),
        ControlFlow::Continue(()) => None,
    }
}

pub fn enumerate_monomorphisms(source: &Pattern, target: &Pattern) -> Vec<NodeMap> {
    collect(source, target, MorphismKind::Monomorphism, None)
}

pub fn first_monomorphism(source: &Pattern, target: &Pattern) -> Option<NodeMap> {
    first(source, target, MorphismKind::Monomorphism, None)
}

pub fn exists_monomorphism(source: &Pattern, target: &Pattern) -> bool {
    first_monomorphism(source, target).is_some()
}

pub fn enumerate_prefix_functions(source: &Pattern, target: &Pattern) -> Vec<NodeMap> {
    collect(source, target, MorphismKind::PrefixFunction, None)
}

fn extension_pins(prefix: &NodeMap, h: &NodeMap, conclusion_len: usize) -> Vec<Option<NodeId>> {
    let mut pins = vec![None; conclusion_len];
    for (x, cx) in prefix.pairs() {
        pins[cx] = Some(h.get(x));
    }
    pins
}

/// All monomorphisms `f: conclusion → target` with `f ∘ prefix = h`.
///
/// `prefix` maps some pattern into `conclusion`; `h` maps the same pattern
/// into `target`.
pub fn extend_map(prefix: &NodeMap, h: &NodeMap, conclusion: &Pattern, target: &Pattern) -> Vec<NodeMap> {
    let pins = extension_pins(prefix, h, conclusion.len());
    collect(conclusion, target, MorphismKind::Monomorphism, Some(&pins))
}

pub fn extension_exists(prefix: &NodeMap, h: &NodeMap, conclusion: &Pattern, target: &Pattern) -> bool {
    let pins = extension_pins(prefix, h, conclusion.len());
    first(conclusion, target, MorphismKind::Monomorphism, Some(&pins)).is_some()
}
