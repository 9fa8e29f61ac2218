//! Run history and replay.

use super::rules::{apply_r1, apply_r2, apply_r3_with, r3_candidates, Rule};
use crate::algebra::unfold_edge;
use crate::logic::{simplify, subsumes, Clause, ClauseId, Constraint, Specification};
use crate::morphism::NodeMap;
use crate::pattern::NodeId;
use crate::textio::format_clause_body;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Unsatisfiable,
    Saturated,
    LimitReached,
}

impl Verdict {
    /// The word used in the history export and on the command line.
    pub fn word(self) -> &'static str {
        match self {
            Verdict::Unsatisfiable => "UNSAT",
            Verdict::Saturated => "SATURATED",
            Verdict::LimitReached => "LIMIT",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.word())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventKind {
    Infer {
        rule: Rule,
        premises: [(ClauseId, usize); 2],
        mono: Option<NodeMap>,
        result: Clause,
    },
    Delete {
        clause: ClauseId,
        subsumed_by: ClauseId,
    },
    Simplify {
        before: ClauseId,
        after: Clause,
    },
    Unfold {
        clause: ClauseId,
        literal: usize,
        edge: NodeId,
        result: Clause,
    },
}

impl EventKind {
    /// The clause this event introduces, if any.
    pub fn introduced(&self) -> Option<&Clause> {
        match self {
            EventKind::Infer { result, .. } | EventKind::Unfold { result, .. } => Some(result),
            EventKind::Simplify { after, .. } => Some(after),
            EventKind::Delete { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    /// 1-based.
    pub step: usize,
    pub kind: EventKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerdictInfo {
    pub verdict: Verdict,
    pub steps: usize,
    pub elapsed_ms: u64,
    pub cancelled: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct History {
    pub events: Vec<Event>,
    pub verdict: VerdictInfo,
}

impl History {
    /// Copy with timing zeroed, for comparing runs.
    pub fn normalized(&self) -> History {
        let mut h = self.clone();
        h.verdict.elapsed_ms = 0;
        h
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("step {step}: expected {expected}, got {got}")]
    Mismatch {
        step: usize,
        expected: String,
        got: String,
    },
}

fn mismatch(step: usize, expected: impl Into<String>, got: impl Into<String>) -> ReplayError {
    ReplayError::Mismatch {
        step,
        expected: expected.into(),
        got: got.into(),
    }
}

fn position(clauses: &[Clause], id: &ClauseId, step: usize) -> Result<usize, ReplayError> {
    clauses
        .iter()
        .position(|c| &c.id == id)
        .ok_or_else(|| mismatch(step, format!("clause {id}"), "no such clause"))
}

fn fresh(clauses: &[Clause], id: &ClauseId, step: usize) -> Result<(), ReplayError> {
    if clauses.iter().any(|c| &c.id == id) {
        Err(mismatch(step, format!("new clause id {id}"), "id already in use"))
    } else {
        Ok(())
    }
}

fn compare(step: usize, recorded: &Clause, got: &[Constraint]) -> Result<(), ReplayError> {
    let expected = format_clause_body(recorded);
    let got = format_clause_body(&Clause::new(recorded.id.clone(), got.to_vec()));
    if expected == got {
        Ok(())
    } else {
        Err(mismatch(step, expected, got))
    }
}

/// The clauses an engine run starts from: the input with every pattern in
/// printed order.
pub(crate) fn initial_clauses(s0: &Specification) -> Vec<Clause> {
    s0.clauses()
        .iter()
        .map(|c| Clause::new(c.id.clone(), c.literals.iter().map(Constraint::canonical).collect()))
        .collect()
}

/// Literals of `cl` after unfolding literal `i` at `edge`, or `None` when
/// that literal is not a positive pattern with a descendant edge there.
pub(crate) fn unfolded_literals(cl: &Clause, i: usize, edge: NodeId) -> Option<Vec<Constraint>> {
    let Some(Constraint::Positive(p)) = cl.literals.get(i) else {
        return None;
    };
    let unfolding = unfold_edge(p, edge).ok()?;
    let mut literals = cl.literals[..i].to_vec();
    literals.extend(unfolding.disjuncts().map(|q| Constraint::Positive(q.clone()).canonical()));
    literals.extend_from_slice(&cl.literals[i + 1..]);
    Some(literals)
}

/// Re-applies `events` to `s0`, recomputing every inference, and returns
/// the resulting clause set.
pub fn replay(s0: &Specification, events: &[Event]) -> Result<Specification, ReplayError> {
    let mut clauses = initial_clauses(s0);
    for ev in events {
        let step = ev.step;
        match &ev.kind {
            EventKind::Infer {
                rule,
                premises,
                mono,
                result,
            } => {
                let [(id1, i), (id2, j)] = premises;
                let c1 = clauses[position(&clauses, id1, step)?].clone();
                let c2 = clauses[position(&clauses, id2, step)?].clone();
                fresh(&clauses, &result.id, step)?;
                let inferred = match rule {
                    Rule::R1 => apply_r1(&c1, *i, &c2, *j).map(|v| v.into_iter().next()),
                    Rule::R2 => apply_r2(&c1, *i, &c2, *j).map(|v| v.into_iter().next()),
                    Rule::R3 => {
                        let m = mono.clone().ok_or_else(|| mismatch(step, "a monomorphism", "none"))?;
                        match r3_candidates(&c1, *i, &c2, *j) {
                            Ok(ms) if ms.contains(&m) => apply_r3_with(&c1, *i, &c2, *j, &m).map(Some),
                            Ok(_) => return Err(mismatch(step, format!("R3 applicable with {m}"), "not applicable")),
                            Err(e) => Err(e),
                        }
                    }
                };
                match inferred {
                    Ok(Some(inf)) => compare(step, result, &inf.literals)?,
                    Ok(None) => return Err(mismatch(step, format!("{rule} applicable"), "not applicable")),
                    Err(e) => return Err(mismatch(step, format!("{rule} applicable"), e.to_string())),
                }
                clauses.push(result.clone());
            }
            EventKind::Delete { clause, subsumed_by } => {
                let at = position(&clauses, clause, step)?;
                let by = position(&clauses, subsumed_by, step)?;
                if at == by || !subsumes(&clauses[by], &clauses[at]) {
                    return Err(mismatch(
                        step,
                        format!("{clause} subsumed by {subsumed_by}"),
                        "not subsumed",
                    ));
                }
                clauses.remove(at);
            }
            EventKind::Simplify { before, after } => {
                let at = position(&clauses, before, step)?;
                fresh(&clauses, &after.id, step)?;
                compare(step, after, &simplify(&clauses[at]).literals)?;
                clauses[at] = after.clone();
            }
            EventKind::Unfold {
                clause,
                literal,
                edge,
                result,
            } => {
                let at = position(&clauses, clause, step)?;
                fresh(&clauses, &result.id, step)?;
                let literals = unfolded_literals(&clauses[at], *literal, *edge).ok_or_else(|| {
                    mismatch(step, format!("descendant edge {edge} in literal {literal}"), "none")
                })?;
                compare(step, result, &literals)?;
                clauses[at] = result.clone();
            }
        }
    }
    Specification::new(clauses).map_err(|e| mismatch(events.len(), "distinct clause ids", format!("duplicate {}", e.0)))
}
