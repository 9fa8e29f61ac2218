//! Refutation: the rules R1 to R3, level saturation (Version 1), the
//! unfolding loop (Version 2) and the replayable history.

mod engine;
mod history;
mod rules;

pub use engine::{run, run_v2, saturate_v1, RunConfig, RunResult};
pub use history::{replay, Event, EventKind, History, ReplayError, Verdict, VerdictInfo};
pub use rules::{apply_r1, apply_r2, apply_r3, apply_r3_with, r3_candidates, Inference, Rule, RuleError};
