//! Bounded model search: every document up to a node budget, one per
//! isomorphism class.

use rayon::prelude::*;

use crate::logic::{check_document, tree_satisfies, ClauseId, Constraint, Specification};
use crate::pattern::{as_document, canonical_form, is_valid_name, Axis, CanonicalKey, Document, Label, Pattern, Tree};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BoundError {
    #[error("the label list is empty")]
    NoLabels,
    #[error("{0:?} is not a valid label")]
    InvalidLabel(String),
    #[error("max_nodes must be at least 1")]
    ZeroNodes,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleBound {
    labels: Vec<String>,
    max_nodes: usize,
}

impl OracleBound {
    /// Labels are deduplicated and sorted.
    pub fn new<S: AsRef<str>>(labels: &[S], max_nodes: usize) -> Result<OracleBound, BoundError> {
        let mut names: Vec<String> = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            if !is_valid_name(l) {
                return Err(BoundError::InvalidLabel(l.to_string()));
            }
            names.push(l.to_string());
        }
        names.sort();
        names.dedup();
        if names.is_empty() {
            return Err(BoundError::NoLabels);
        }
        if max_nodes == 0 {
            return Err(BoundError::ZeroNodes);
        }
        Ok(OracleBound {
            labels: names,
            max_nodes,
        })
    }

    /// The labels of `s` plus one label that does not occur in it.
    pub fn for_spec(s: &Specification, max_nodes: usize) -> Result<OracleBound, BoundError> {
        let mut labels = s.label_names();
        labels.push(fresh_label(&labels));
        OracleBound::new(&labels, max_nodes)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn max_nodes(&self) -> usize {
        self.max_nodes
    }
}

/// `fresh`, or `fresh1`, `fresh2`, … when taken.
pub fn fresh_label<S: AsRef<str>>(taken: &[S]) -> String {
    let taken = |c: &str| taken.iter().any(|t| t.as_ref() == c);
    if !taken("fresh") {
        return "fresh".to_string();
    }
    (1..)
        .map(|i| format!("fresh{i}"))
        .find(|c| !taken(c))
        .expect("finitely many labels are taken")
}

/// A document satisfying every clause of a specification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub document: Document,
    pub per_clause: Vec<(ClauseId, bool)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundedSat {
    Witness(Witness),
    NoModelWithinBound,
}

impl BoundedSat {
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            BoundedSat::Witness(w) => Some(w),
            BoundedSat::NoModelWithinBound => None,
        }
    }
}

/// A tree in the generation arena: a label and its children as arena
/// indices in non-decreasing order.
struct Shape {
    label: usize,
    children: Vec<usize>,
}

/// Every document within a bound, ordered by node count and then by
/// canonical form.
pub struct DocumentSpace {
    bound: OracleBound,
    docs: Vec<Document>,
}

impl DocumentSpace {
    pub fn new(bound: &OracleBound) -> DocumentSpace {
        let mut arena: Vec<Shape> = Vec::new();
        let mut sizes: Vec<usize> = Vec::new();
        let mut docs: Vec<Document> = Vec::new();
        for n in 1..=bound.max_nodes {
            let mut level: Vec<(CanonicalKey, Shape, Document)> = Vec::new();
            let mut forests = Vec::new();
            forests_of(&sizes, n - 1, 0, &mut Vec::new(), &mut forests);
            for label in 0..bound.labels.len() {
                for children in &forests {
                    let shape = Shape {
                        label,
                        children: children.clone(),
                    };
                    let tree = materialize(&arena, &shape, &bound.labels);
                    let p = Pattern::from_tree(&tree);
                    let doc = as_document(&p).expect("generated trees are documents");
                    level.push((canonical_form(&p), shape, doc));
                }
            }
            level.sort_by(|a, b| a.0.cmp(&b.0));
            for (_, shape, doc) in level {
                arena.push(shape);
                sizes.push(n);
                docs.push(doc);
            }
        }
        DocumentSpace {
            bound: bound.clone(),
            docs,
        }
    }

    pub fn bound(&self) -> &OracleBound {
        &self.bound
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// The first document (in enumeration order) satisfying `s`.
    pub fn first_model(&self, s: &Specification) -> BoundedSat {
        let found = self
            .docs
            .par_iter()
            .find_first(|d| s.clauses().iter().all(|c| c.literals.iter().any(|k| tree_satisfies(d, k))));
        match found {
            Some(d) => BoundedSat::Witness(Witness {
                document: d.clone(),
                per_clause: check_document(d, s).per_clause,
            }),
            None => BoundedSat::NoModelWithinBound,
        }
    }

    /// Indices of the documents satisfying `k`.
    pub fn model_indices(&self, k: &Constraint) -> Vec<usize> {
        (0..self.docs.len())
            .into_par_iter()
            .filter(|&i| tree_satisfies(&self.docs[i], k))
            .collect()
    }

    /// Indices of the documents satisfying every clause of `s`.
    pub fn spec_model_indices(&self, s: &Specification) -> Vec<usize> {
        (0..self.docs.len())
            .into_par_iter()
            .filter(|&i| check_document(&self.docs[i], s).overall)
            .collect()
    }
}

/// Non-decreasing sequences of arena indices starting at `from` whose
/// sizes sum to `total`.
fn forests_of(sizes: &[usize], total: usize, from: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if total == 0 {
        out.push(current.clone());
        return;
    }
    for i in from..sizes.len() {
        if sizes[i] > total {
            // sizes are non-decreasing along the arena
            break;
        }
        current.push(i);
        forests_of(sizes, total - sizes[i], i, current, out);
        current.pop();
    }
}

fn materialize(arena: &[Shape], shape: &Shape, labels: &[String]) -> Tree {
    Tree {
        label: Label::Name(labels[shape.label].clone()),
        children: shape
            .children
            .iter()
            .map(|&c| (Axis::Child, materialize(arena, &arena[c], labels)))
            .collect(),
    }
}

pub fn enumerate_documents(b: &OracleBound) -> Vec<Document> {
    DocumentSpace::new(b).docs
}

pub fn bounded_sat(s: &Specification, b: &OracleBound) -> BoundedSat {
    DocumentSpace::new(b).first_model(s)
}

pub fn bounded_models(p: &Pattern, b: &OracleBound) -> Vec<Document> {
    let space = DocumentSpace::new(b);
    space
        .model_indices(&Constraint::Positive(p.clone()))
        .into_iter()
        .map(|i| space.docs[i].clone())
        .collect()
}
