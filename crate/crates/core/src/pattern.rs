//! Tree patterns and documents.
//!
//! A [`Pattern`] is a rooted, unordered tree whose nodes carry a [`Label`]
//! (a name or the wildcard `*`) and whose edges are either child (`/`) or
//! descendant (`//`) edges. A [`Document`] is a pattern without wildcards or
//! descendant edges.
//!
//! Nodes are addressed by [`NodeId`], the preorder position of the node in
//! the pattern as it was built (root is `0`, children visited in stored
//! order). Because nodes are stored in preorder, the subtree of a node `n`
//! occupies the contiguous id range `n..n + subtree_size(n)`.

use std::fmt;
use std::ops::Range;

/// Preorder index of a node inside its pattern.
pub type NodeId = usize;

/// Characters that may not appear inside a label name.
pub const RESERVED_LABEL_CHARS: &[char] = &['/', '[', ']', '*', '|'];

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Name(String),
    Wildcard,
}

impl Label {
    /// Builds a concrete label, rejecting names the text grammar could not
    /// print back unambiguously.
    pub fn name(name: impl Into<String>) -> Result<Label, String> {
        let name = name.into();
        if is_valid_name(&name) {
            Ok(Label::Name(name))
        } else {
            Err(name)
        }
    }

    pub fn is_wildcard(&self) -> bool {
        matches!(self, Label::Wildcard)
    }

    pub fn as_name(&self) -> Option<&str> {
        match self {
            Label::Name(n) => Some(n),
            Label::Wildcard => None,
        }
    }

    /// Monomorphism label rule: a wildcard source matches anything.
    pub fn matches(&self, target: &Label) -> bool {
        match self {
            Label::Wildcard => true,
            Label::Name(_) => self == target,
        }
    }

    /// Two labels can sit on the same merged node.
    pub fn compatible(&self, other: &Label) -> bool {
        self.is_wildcard() || other.is_wildcard() || self == other
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Name(n) => f.write_str(n),
            Label::Wildcard => f.write_str("*"),
        }
    }
}

pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name
            .chars()
            .any(|c| c.is_whitespace() || RESERVED_LABEL_CHARS.contains(&c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    Child,
    Descendant,
}

impl Axis {
    pub fn symbol(self) -> &'static str {
        match self {
            Axis::Child => "/",
            Axis::Descendant => "//",
        }
    }
}

/// A node in an unchecked tree description, see [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawNode {
    pub label: Label,
    pub parent: Option<usize>,
    /// Axis of the edge to `parent`; ignored for the root.
    pub axis: Axis,
}

impl RawNode {
    pub fn root(label: Label) -> RawNode {
        RawNode {
            label,
            parent: None,
            axis: Axis::Child,
        }
    }

    pub fn child_of(parent: usize, axis: Axis, label: Label) -> RawNode {
        RawNode {
            label,
            parent: Some(parent),
            axis,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("pattern has no nodes")]
    Empty,
    #[error("no root node")]
    NoRoot,
    #[error("multiple roots: {0:?}")]
    MultipleRoots(Vec<usize>),
    #[error("node {node} names missing parent {parent}")]
    ParentOutOfRange { node: usize, parent: usize },
    #[error("not a tree: nodes {0:?} are not connected to the root")]
    NotATree(Vec<usize>),
    #[error("node {node} has invalid label {label:?}")]
    InvalidLabel { node: usize, label: String },
}

/// Checks every tree invariant of a raw node list and reports all
/// violations found.
pub fn validate(nodes: &[RawNode]) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    if nodes.is_empty() {
        return Err(vec![Violation::Empty]);
    }
    for (i, node) in nodes.iter().enumerate() {
        if let Label::Name(n) = &node.label {
            if !is_valid_name(n) {
                violations.push(Violation::InvalidLabel {
                    node: i,
                    label: n.clone(),
                });
            }
        }
        if let Some(p) = node.parent {
            if p >= nodes.len() {
                violations.push(Violation::ParentOutOfRange { node: i, parent: p });
            }
        }
    }
    let roots: Vec<usize> = (0..nodes.len())
        .filter(|&i| nodes[i].parent.is_none())
        .collect();
    match roots.len() {
        0 => violations.push(Violation::NoRoot),
        1 => {}
        _ => violations.push(Violation::MultipleRoots(roots.clone())),
    }
    // every node must reach a root without revisiting a node
    let mut detached = Vec::new();
    for start in 0..nodes.len() {
        let mut cur = start;
        let mut steps = 0;
        let ok = loop {
            match nodes[cur].parent {
                None => break true,
                Some(p) if p >= nodes.len() => break false,
                Some(p) => cur = p,
            }
            steps += 1;
            if steps > nodes.len() {
                break false;
            }
        };
        if !ok {
            detached.push(start);
        }
    }
    if !detached.is_empty() {
        violations.push(Violation::NotATree(detached));
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Recursive tree description used by parsers and printers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    pub label: Label,
    pub children: Vec<(Axis, Tree)>,
}

impl Tree {
    pub fn leaf(label: Label) -> Tree {
        Tree {
            label,
            children: Vec::new(),
        }
    }
}

/// A valid tree pattern. Immutable once built.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    labels: Vec<Label>,
    parents: Vec<Option<NodeId>>,
    axes: Vec<Axis>,
    children: Vec<Vec<NodeId>>,
    sizes: Vec<usize>,
}

impl Pattern {
    pub fn single(label: Label) -> Pattern {
        Pattern::from_raw(&[RawNode::root(label)]).expect("single node is a tree")
    }

    /// Validates `nodes` and renumbers them into preorder (children visited
    /// in increasing raw index).
    pub fn from_raw(nodes: &[RawNode]) -> Result<Pattern, Vec<Violation>> {
        Pattern::from_raw_with_ids(nodes).map(|(p, _)| p)
    }

    /// Like [`Pattern::from_raw`], also returning the raw index → [`NodeId`]
    /// renumbering.
    pub fn from_raw_with_ids(nodes: &[RawNode]) -> Result<(Pattern, Vec<NodeId>), Vec<Violation>> {
        validate(nodes)?;
        let n = nodes.len();
        let mut raw_children = vec![Vec::new(); n];
        let mut root = 0;
        for (i, node) in nodes.iter().enumerate() {
            match node.parent {
                Some(p) => raw_children[p].push(i),
                None => root = i,
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            order.push(x);
            stack.extend(raw_children[x].iter().rev());
        }
        let mut new_id = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            new_id[old] = new;
        }
        let mut labels = Vec::with_capacity(n);
        let mut parents = Vec::with_capacity(n);
        let mut axes = Vec::with_capacity(n);
        for &old in &order {
            labels.push(nodes[old].label.clone());
            parents.push(nodes[old].parent.map(|p| new_id[p]));
            axes.push(if nodes[old].parent.is_some() {
                nodes[old].axis
            } else {
                Axis::Child
            });
        }
        Ok((Pattern::assemble(labels, parents, axes), new_id))
    }

    /// Assumes `parents` already describe a preorder-numbered tree.
    fn assemble(labels: Vec<Label>, parents: Vec<Option<NodeId>>, axes: Vec<Axis>) -> Pattern {
        let n = labels.len();
        let mut children = vec![Vec::new(); n];
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(i);
            }
        }
        let mut sizes = vec![1; n];
        for i in (1..n).rev() {
            let p = parents[i].expect("non-root has a parent");
            sizes[p] += sizes[i];
        }
        Pattern {
            labels,
            parents,
            axes,
            children,
            sizes,
        }
    }

    pub fn from_tree(tree: &Tree) -> Pattern {
        let mut raw = Vec::new();
        fn walk(t: &Tree, parent: Option<(usize, Axis)>, raw: &mut Vec<RawNode>) {
            let id = raw.len();
            raw.push(match parent {
                None => RawNode::root(t.label.clone()),
                Some((p, axis)) => RawNode::child_of(p, axis, t.label.clone()),
            });
            for (axis, child) in &t.children {
                walk(child, Some((id, *axis)), raw);
            }
        }
        walk(tree, None, &mut raw);
        // trees built this way are already in preorder
        let labels = raw.iter().map(|r| r.label.clone()).collect();
        let parents = raw.iter().map(|r| r.parent).collect();
        let axes = raw.iter().map(|r| r.axis).collect();
        Pattern::assemble(labels, parents, axes)
    }

    pub fn to_tree(&self) -> Tree {
        self.subtree(self.root())
    }

    fn subtree(&self, n: NodeId) -> Tree {
        Tree {
            label: self.labels[n].clone(),
            children: self.children[n]
                .iter()
                .map(|&c| (self.axes[c], self.subtree(c)))
                .collect(),
        }
    }

    pub fn to_raw(&self) -> Vec<RawNode> {
        self.nodes()
            .map(|n| RawNode {
                label: self.labels[n].clone(),
                parent: self.parents[n],
                axis: self.axes[n],
            })
            .collect()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> Range<NodeId> {
        0..self.labels.len()
    }

    pub fn label(&self, n: NodeId) -> &Label {
        &self.labels[n]
    }

    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        self.parents[n]
    }

    /// Axis of the edge from `n` to its parent; `None` for the root.
    pub fn axis(&self, n: NodeId) -> Option<Axis> {
        self.parents[n].map(|_| self.axes[n])
    }

    /// Parent together with the axis of the connecting edge.
    pub fn parent_edge(&self, n: NodeId) -> Option<(NodeId, Axis)> {
        self.parents[n].map(|p| (p, self.axes[n]))
    }

    pub fn children(&self, n: NodeId) -> &[NodeId] {
        &self.children[n]
    }

    pub fn subtree_size(&self, n: NodeId) -> usize {
        self.sizes[n]
    }

    /// Proper descendants of `n`, as a contiguous preorder range.
    pub fn strict_descendants(&self, n: NodeId) -> Range<NodeId> {
        n + 1..n + self.sizes[n]
    }

    pub fn is_strict_ancestor(&self, a: NodeId, d: NodeId) -> bool {
        a < d && d < a + self.sizes[a]
    }

    /// Proper ancestors of `n`, nearest first.
    pub fn strict_ancestors(&self, n: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut cur = self.parents[n];
        while let Some(p) = cur {
            out.push(p);
            cur = self.parents[p];
        }
        out
    }

    pub fn depth(&self, n: NodeId) -> usize {
        self.strict_ancestors(n).len()
    }

    /// Edges `(parent, child, axis)` in preorder of the child.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, Axis)> + '_ {
        self.nodes()
            .skip(1)
            .map(|n| (self.parents[n].unwrap(), n, self.axes[n]))
    }

    pub fn has_wildcard(&self) -> bool {
        self.labels.iter().any(Label::is_wildcard)
    }

    pub fn has_descendant_edge(&self) -> bool {
        self.edges().any(|(_, _, a)| a == Axis::Descendant)
    }

    /// Preorder list of nodes whose parent edge is a descendant edge.
    pub fn descendant_edges(&self) -> Vec<NodeId> {
        self.edges()
            .filter(|&(_, _, a)| a == Axis::Descendant)
            .map(|(_, c, _)| c)
            .collect()
    }

    /// Concrete label names used anywhere in the pattern.
    pub fn label_names(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().filter_map(Label::as_name)
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern({})", crate::textio::print_pattern(self))
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::textio::print_pattern(self))
    }
}

/// A pattern with no wildcards and only child edges.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Document(Pattern);

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("not a document: wildcard nodes {wildcards:?}, descendant edges into {descendant_edges:?}")]
pub struct NotADocument {
    pub wildcards: Vec<NodeId>,
    pub descendant_edges: Vec<NodeId>,
}

impl Document {
    pub fn pattern(&self) -> &Pattern {
        &self.0
    }

    pub fn into_pattern(self) -> Pattern {
        self.0
    }
}

impl std::ops::Deref for Document {
    type Target = Pattern;
    fn deref(&self) -> &Pattern {
        &self.0
    }
}

impl fmt::Debug for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Document({})", crate::textio::print_pattern(&self.0))
    }
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

pub fn as_document(p: &Pattern) -> Result<Document, NotADocument> {
    let wildcards: Vec<NodeId> = p.nodes().filter(|&n| p.label(n).is_wildcard()).collect();
    let descendant_edges = p.descendant_edges();
    if wildcards.is_empty() && descendant_edges.is_empty() {
        Ok(Document(p.clone()))
    } else {
        Err(NotADocument {
            wildcards,
            descendant_edges,
        })
    }
}

impl TryFrom<Pattern> for Document {
    type Error = NotADocument;
    fn try_from(p: Pattern) -> Result<Document, NotADocument> {
        as_document(&p)
    }
}

/// Isomorphism-invariant encoding of a pattern.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(pub Vec<u8>);

fn encode_label(label: &Label, out: &mut Vec<u8>) {
    match label {
        Label::Wildcard => out.push(b'*'),
        Label::Name(n) => {
            out.push(b'L');
            out.extend_from_slice(n.len().to_string().as_bytes());
            out.push(b':');
            out.extend_from_slice(n.as_bytes());
        }
    }
}

fn axis_byte(axis: Axis) -> u8 {
    match axis {
        Axis::Child => b'/',
        Axis::Descendant => b'd',
    }
}

/// Canonical key of every subtree, optionally distinguishing marked nodes.
///
/// A node's key is its label followed by the sorted `(axis, child key)`
/// sequence of its children.
pub fn subtree_keys(p: &Pattern, marks: Option<&[bool]>) -> Vec<Vec<u8>> {
    let mut keys: Vec<Vec<u8>> = vec![Vec::new(); p.len()];
    for n in p.nodes().rev() {
        let mut parts: Vec<Vec<u8>> = p
            .children(n)
            .iter()
            .map(|&c| {
                let mut part = vec![axis_byte(p.axes[c])];
                part.extend_from_slice(&keys[c]);
                part
            })
            .collect();
        parts.sort();
        let mut key = Vec::new();
        if let Some(marks) = marks {
            key.push(if marks[n] { b'+' } else { b'-' });
        }
        encode_label(p.label(n), &mut key);
        key.push(b'(');
        for part in parts {
            key.extend_from_slice(&part);
        }
        key.push(b')');
        keys[n] = key;
    }
    keys
}

pub fn canonical_form(p: &Pattern) -> CanonicalKey {
    CanonicalKey(subtree_keys(p, None).swap_remove(0))
}

/// Canonical form of a pattern in which a subset of nodes is marked.
pub fn marked_canonical_form(p: &Pattern, marks: &[bool]) -> CanonicalKey {
    CanonicalKey(subtree_keys(p, Some(marks)).swap_remove(0))
}

pub fn is_isomorphic(p: &Pattern, q: &Pattern) -> bool {
    p.len() == q.len() && canonical_form(p) == canonical_form(q)
}

/// Renumbers `p` so that siblings appear in canonical order, which is the
/// order the printer uses. Returns the pattern and the old → new ids.
pub fn canonical_order(p: &Pattern) -> (Pattern, Vec<NodeId>) {
    let keys = subtree_keys(p, None);
    let mut raw = Vec::with_capacity(p.len());
    let mut ids = vec![0; p.len()];
    let mut stack = vec![p.root()];
    while let Some(n) = stack.pop() {
        ids[n] = raw.len();
        raw.push(match p.parent(n) {
            None => RawNode::root(p.label(n).clone()),
            Some(parent) => RawNode::child_of(ids[parent], p.axes[n], p.label(n).clone()),
        });
        let mut kids = p.children(n).to_vec();
        kids.sort_by(|&x, &y| (p.axes[x], &keys[x]).cmp(&(p.axes[y], &keys[y])));
        stack.extend(kids.into_iter().rev());
    }
    let labels = raw.iter().map(|r| r.label.clone()).collect();
    let parents = raw.iter().map(|r| r.parent).collect();
    let axes = raw.iter().map(|r| r.axis).collect();
    (Pattern::assemble(labels, parents, axes), ids)
}

pub fn strict_ancestors(p: &Pattern, n: NodeId) -> Vec<NodeId> {
    let mut a = p.strict_ancestors(n);
    a.sort_unstable();
    a
}
