//! Random patterns, documents and specifications for differential testing.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::logic::{Clause, Conditional, Constraint, Specification};
use crate::morphism::NodeMap;
use crate::pattern::{Axis, Label, Pattern, RawNode};

#[derive(Clone, Debug)]
pub struct PatternGen {
    pub labels: Vec<String>,
    pub min_nodes: usize,
    pub max_nodes: usize,
    /// Probability that a node is `*`.
    pub wildcard: f64,
    /// Probability that a non-root edge is a descendant edge.
    pub descendant: f64,
}

impl PatternGen {
    pub fn new(labels: &[&str], max_nodes: usize) -> PatternGen {
        PatternGen {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            min_nodes: 1,
            max_nodes,
            wildcard: 0.15,
            descendant: 0.35,
        }
    }

    fn label(&self, rng: &mut impl Rng) -> Label {
        if rng.gen_bool(self.wildcard) {
            Label::Wildcard
        } else {
            Label::Name(self.labels.choose(rng).expect("labels are non-empty").clone())
        }
    }

    fn axis(&self, rng: &mut impl Rng) -> Axis {
        if rng.gen_bool(self.descendant) {
            Axis::Descendant
        } else {
            Axis::Child
        }
    }

    fn raw(&self, rng: &mut impl Rng) -> Vec<RawNode> {
        let n = rng.gen_range(self.min_nodes.max(1)..=self.max_nodes.max(self.min_nodes).max(1));
        let mut raw = vec![RawNode::root(self.label(rng))];
        for i in 1..n {
            let parent = rng.gen_range(0..i);
            raw.push(RawNode::child_of(parent, self.axis(rng), self.label(rng)));
        }
        raw
    }

    pub fn pattern(&self, rng: &mut impl Rng) -> Pattern {
        Pattern::from_raw(&self.raw(rng)).expect("parents precede children")
    }

    /// A pattern with at least two nodes and at least one descendant edge.
    pub fn pattern_with_descendant(&self, rng: &mut impl Rng) -> Pattern {
        let gen = PatternGen {
            min_nodes: self.min_nodes.max(2),
            max_nodes: self.max_nodes.max(2),
            ..self.clone()
        };
        let mut raw = gen.raw(rng);
        if raw.iter().skip(1).all(|r| r.axis == Axis::Child) {
            let i = rng.gen_range(1..raw.len());
            raw[i].axis = Axis::Descendant;
        }
        Pattern::from_raw(&raw).expect("parents precede children")
    }

    /// A document: no wildcards, child edges only.
    pub fn document(&self, rng: &mut impl Rng) -> Pattern {
        let gen = PatternGen {
            wildcard: 0.0,
            descendant: 0.0,
            ..self.clone()
        };
        gen.pattern(rng)
    }

    /// A conditional whose conclusion extends its premise by up to `extra`
    /// nodes.
    pub fn conditional(&self, rng: &mut impl Rng, extra: usize) -> Conditional {
        let mut raw = self.raw(rng);
        let premise_len = raw.len();
        for _ in 0..rng.gen_range(0..=extra) {
            let parent = rng.gen_range(0..raw.len());
            raw.push(RawNode::child_of(parent, self.axis(rng), self.label(rng)));
        }
        let premise = Pattern::from_raw(&raw[..premise_len]).expect("a prefix of a raw tree is a tree");
        let (conclusion, ids) = Pattern::from_raw_with_ids(&raw).expect("parents precede children");
        // premise ids follow the same preorder rule on the first raw nodes
        let (_, premise_ids) = Pattern::from_raw_with_ids(&raw[..premise_len]).expect("tree");
        let mut images = vec![0; premise_len];
        for old in 0..premise_len {
            images[premise_ids[old]] = ids[old];
        }
        Conditional::new(premise, conclusion, NodeMap::new(images)).expect("the premise is copied into the conclusion")
    }
}

#[derive(Clone, Debug)]
pub struct SpecGen {
    pub patterns: PatternGen,
    pub max_clauses: usize,
    pub max_literals: usize,
    /// Probability that a literal is negative.
    pub negative: f64,
    /// Probability that a literal is conditional.
    pub conditional: f64,
    pub conditional_extra: usize,
}

impl SpecGen {
    /// Positive and negative literals only.
    pub fn positive_negative(patterns: PatternGen, max_clauses: usize, max_literals: usize) -> SpecGen {
        SpecGen {
            patterns,
            max_clauses,
            max_literals,
            negative: 0.4,
            conditional: 0.0,
            conditional_extra: 0,
        }
    }

    pub fn literal(&self, rng: &mut impl Rng) -> Constraint {
        let roll: f64 = rng.gen();
        if roll < self.conditional {
            Constraint::Conditional(self.patterns.conditional(rng, self.conditional_extra))
        } else if roll < self.conditional + self.negative {
            Constraint::Negative(self.patterns.pattern(rng))
        } else {
            Constraint::Positive(self.patterns.pattern(rng))
        }
    }

    pub fn spec(&self, rng: &mut impl Rng) -> Specification {
        let n = rng.gen_range(1..=self.max_clauses.max(1));
        let clauses = (1..=n)
            .map(|i| {
                let k = rng.gen_range(1..=self.max_literals.max(1));
                Clause::new(format!("c{i}"), (0..k).map(|_| self.literal(rng)).collect())
            })
            .collect();
        Specification::new(clauses).expect("ids are distinct")
    }
}
