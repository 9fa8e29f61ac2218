//! The saturation engine.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use super::history::{initial_clauses, unfolded_literals, Event, EventKind, History, Verdict, VerdictInfo};
use super::rules::{apply_r1, apply_r2, apply_r3, Inference, Rule, RuleError};
use crate::logic::{simplify, subsumes, Clause, ClauseId, Constraint, Specification};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    /// 1 or 2.
    pub version: u8,
    /// Maximum number of history events.
    pub max_steps: usize,
    /// Maximum number of live clauses.
    pub max_clauses: usize,
    /// Maximum node count of any inferred or unfolded pattern.
    pub max_pattern_nodes: usize,
    /// Version 2 only.
    pub unfold_rounds: usize,
    pub time_budget_ms: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            version: 1,
            max_steps: 10_000,
            max_clauses: 2_000,
            max_pattern_nodes: 64,
            unfold_rounds: 3,
            time_budget_ms: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub verdict: Verdict,
    pub final_clauses: Specification,
    pub history: History,
    pub elapsed_ms: u64,
    pub cancelled: bool,
}

enum Stop {
    Unsat,
    Limit,
    Cancelled,
}

struct Engine<'a> {
    cfg: RunConfig,
    clauses: Vec<Clause>,
    events: Vec<Event>,
    next_id: u64,
    start: Instant,
    cancel: Option<&'a AtomicBool>,
    /// Clauses added during the current level.
    fresh: Vec<ClauseId>,
}

impl<'a> Engine<'a> {
    fn new(s: &Specification, cfg: RunConfig, cancel: Option<&'a AtomicBool>) -> Engine<'a> {
        let next_id = s.clauses().iter().filter_map(|c| c.id.number()).max().unwrap_or(0) + 1;
        Engine {
            cfg,
            clauses: initial_clauses(s),
            events: Vec::new(),
            next_id,
            start: Instant::now(),
            cancel,
            fresh: Vec::new(),
        }
    }

    fn new_id(&mut self) -> ClauseId {
        loop {
            let id = ClauseId::new(format!("c{}", self.next_id));
            self.next_id += 1;
            if !self.clauses.iter().any(|c| c.id == id) {
                return id;
            }
        }
    }

    fn poll(&self) -> Result<(), Stop> {
        if self.cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Err(Stop::Cancelled);
        }
        if let Some(ms) = self.cfg.time_budget_ms {
            if self.start.elapsed() >= Duration::from_millis(ms) {
                return Err(Stop::Limit);
            }
        }
        Ok(())
    }

    fn record(&mut self, kind: EventKind) -> Result<(), Stop> {
        if self.events.len() >= self.cfg.max_steps {
            return Err(Stop::Limit);
        }
        self.events.push(Event {
            step: self.events.len() + 1,
            kind,
        });
        Ok(())
    }

    fn too_large(&self, literals: &[Constraint]) -> bool {
        literals
            .iter()
            .flat_map(|l| l.patterns())
            .any(|p| p.len() > self.cfg.max_pattern_nodes)
    }

    fn position(&self, id: &ClauseId) -> Option<usize> {
        self.clauses.iter().position(|c| &c.id == id)
    }

    fn simplify_inputs(&mut self) -> Result<(), Stop> {
        for at in 0..self.clauses.len() {
            let simplified = simplify(&self.clauses[at]);
            if simplified.literals.len() != self.clauses[at].literals.len() {
                let after = Clause::new(self.new_id(), simplified.literals);
                self.record(EventKind::Simplify {
                    before: self.clauses[at].id.clone(),
                    after: after.clone(),
                })?;
                self.clauses[at] = after;
            }
        }
        if self.clauses.iter().any(Clause::is_false) {
            return Err(Stop::Unsat);
        }
        Ok(())
    }

    fn add_inferred(&mut self, rule: Rule, premises: [(ClauseId, usize); 2], inf: Inference) -> Result<(), Stop> {
        if self.too_large(&inf.literals) {
            return Err(Stop::Limit);
        }
        let candidate = Clause::new("_", inf.literals);
        if self.clauses.iter().any(|c| subsumes(c, &candidate)) {
            return Ok(());
        }
        let clause = Clause::new(self.new_id(), candidate.literals);
        self.record(EventKind::Infer {
            rule,
            premises,
            mono: inf.mono,
            result: clause.clone(),
        })?;
        if clause.is_false() {
            self.clauses.push(clause);
            return Err(Stop::Unsat);
        }
        let mut at = 0;
        while at < self.clauses.len() {
            if subsumes(&clause, &self.clauses[at]) {
                self.record(EventKind::Delete {
                    clause: self.clauses[at].id.clone(),
                    subsumed_by: clause.id.clone(),
                })?;
                self.clauses.remove(at);
            } else {
                at += 1;
            }
        }
        self.fresh.push(clause.id.clone());
        self.clauses.push(clause);
        if self.clauses.len() > self.cfg.max_clauses {
            return Err(Stop::Limit);
        }
        Ok(())
    }

    /// Every rule application between two distinct clauses, in literal
    /// order. Stops early when either premise gets deleted.
    fn resolve_pair(&mut self, a: &ClauseId, b: &ClauseId) -> Result<(), Stop> {
        let (Some(ia), Some(ib)) = (self.position(a), self.position(b)) else {
            return Ok(());
        };
        let (ca, cb) = (self.clauses[ia].clone(), self.clauses[ib].clone());
        for i in 0..ca.literals.len() {
            for j in 0..cb.literals.len() {
                if self.position(a).is_none() || self.position(b).is_none() {
                    return Ok(());
                }
                self.poll()?;
                let (rule, (c1, i1), (c2, j2)) = match (&ca.literals[i], &cb.literals[j]) {
                    (Constraint::Positive(_), Constraint::Negative(_)) => (Rule::R1, (&ca, i), (&cb, j)),
                    (Constraint::Negative(_), Constraint::Positive(_)) => (Rule::R1, (&cb, j), (&ca, i)),
                    (Constraint::Positive(_), Constraint::Positive(_)) => (Rule::R2, (&ca, i), (&cb, j)),
                    (Constraint::Positive(_), Constraint::Conditional(_)) => (Rule::R3, (&ca, i), (&cb, j)),
                    (Constraint::Conditional(_), Constraint::Positive(_)) => (Rule::R3, (&cb, j), (&ca, i)),
                    _ => continue,
                };
                let inferred = match rule {
                    Rule::R1 => apply_r1(c1, i1, c2, j2),
                    Rule::R2 => apply_r2(c1, i1, c2, j2),
                    Rule::R3 => apply_r3(c1, i1, c2, j2),
                };
                let inferred = match inferred {
                    Ok(v) => v,
                    Err(RuleError::Algebra(_)) => return Err(Stop::Limit),
                    Err(e) => unreachable!("premises are checked before applying a rule: {e}"),
                };
                for inf in inferred {
                    self.add_inferred(rule, [(c1.id.clone(), i1), (c2.id.clone(), j2)], inf)?;
                }
            }
        }
        Ok(())
    }

    /// Level saturation. `Ok` means a level added no new clause.
    fn saturate(&mut self) -> Result<(), Stop> {
        let mut old: Vec<ClauseId> = Vec::new();
        let mut new: Vec<ClauseId> = self.clauses.iter().map(|c| c.id.clone()).collect();
        loop {
            self.fresh.clear();
            for a in &old {
                for b in &new {
                    self.resolve_pair(a, b)?;
                }
            }
            for (x, a) in new.iter().enumerate() {
                for b in &new[x + 1..] {
                    self.resolve_pair(a, b)?;
                }
            }
            if self.fresh.is_empty() {
                return Ok(());
            }
            let live = |id: &ClauseId| self.clauses.iter().any(|c| &c.id == id);
            old = old.iter().chain(new.iter()).filter(|id| live(id)).cloned().collect();
            new = self.fresh.iter().filter(|id| live(id)).cloned().collect();
        }
    }

    fn unfoldable(&self) -> bool {
        self.clauses.iter().any(|c| {
            c.literals
                .iter()
                .any(|l| matches!(l, Constraint::Positive(p) if p.has_descendant_edge()))
        })
    }

    /// Unfolds every positive literal at its first descendant edge.
    fn unfold_round(&mut self) -> Result<(), Stop> {
        for at in 0..self.clauses.len() {
            let original = self.clauses[at].literals.clone();
            for i in (0..original.len()).rev() {
                let Constraint::Positive(p) = &original[i] else {
                    continue;
                };
                let Some(&edge) = p.descendant_edges().first() else {
                    continue;
                };
                self.poll()?;
                let literals = unfolded_literals(&self.clauses[at], i, edge).expect("literal has that edge");
                if self.too_large(&literals) {
                    return Err(Stop::Limit);
                }
                let result = Clause::new(self.new_id(), literals);
                self.record(EventKind::Unfold {
                    clause: self.clauses[at].id.clone(),
                    literal: i,
                    edge,
                    result: result.clone(),
                })?;
                self.clauses[at] = result;
            }
            let simplified = simplify(&self.clauses[at]);
            if simplified.literals.len() != self.clauses[at].literals.len() {
                let after = Clause::new(self.new_id(), simplified.literals);
                self.record(EventKind::Simplify {
                    before: self.clauses[at].id.clone(),
                    after: after.clone(),
                })?;
                self.clauses[at] = after;
            }
        }
        Ok(())
    }

    fn finish(self, outcome: Result<Verdict, Stop>) -> RunResult {
        let (verdict, cancelled) = match outcome {
            Ok(v) => (v, false),
            Err(Stop::Unsat) => (Verdict::Unsatisfiable, false),
            Err(Stop::Limit) => (Verdict::LimitReached, false),
            Err(Stop::Cancelled) => (Verdict::LimitReached, true),
        };
        let elapsed_ms = self.start.elapsed().as_millis() as u64;
        let history = History {
            verdict: VerdictInfo {
                verdict,
                steps: self.events.len(),
                elapsed_ms,
                cancelled,
            },
            events: self.events,
        };
        RunResult {
            verdict,
            final_clauses: Specification::new(self.clauses).expect("engine ids are unique"),
            history,
            elapsed_ms,
            cancelled,
        }
    }
}

fn version1(e: &mut Engine<'_>) -> Result<Verdict, Stop> {
    e.simplify_inputs()?;
    e.saturate()?;
    Ok(Verdict::Saturated)
}

fn version2(e: &mut Engine<'_>) -> Result<Verdict, Stop> {
    e.simplify_inputs()?;
    for round in 0..=e.cfg.unfold_rounds {
        e.saturate()?;
        if !e.unfoldable() {
            return Ok(Verdict::Saturated);
        }
        if round == e.cfg.unfold_rounds {
            break;
        }
        e.unfold_round()?;
    }
    Err(Stop::Limit)
}

/// Version 1: saturate under R1 to R3 with subsumption deletion.
pub fn saturate_v1(s: &Specification, cfg: &RunConfig) -> RunResult {
    let mut e = Engine::new(s, *cfg, None);
    let outcome = version1(&mut e);
    e.finish(outcome)
}

/// Version 2: alternate saturation with unfolding of positive descendant
/// edges, for at most `cfg.unfold_rounds` rounds.
pub fn run_v2(s: &Specification, cfg: &RunConfig) -> RunResult {
    let mut e = Engine::new(s, *cfg, None);
    let outcome = version2(&mut e);
    e.finish(outcome)
}

/// Runs the version selected in `cfg`, polling `cancel` between steps.
pub fn run(s: &Specification, cfg: &RunConfig, cancel: Option<&AtomicBool>) -> RunResult {
    let mut e = Engine::new(s, *cfg, cancel);
    let outcome = if cfg.version == 2 {
        version2(&mut e)
    } else {
        version1(&mut e)
    };
    e.finish(outcome)
}
