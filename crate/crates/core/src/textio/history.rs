//! History export.

use std::fmt::Write;

use super::format_clause_body;
use crate::refutation::{Event, EventKind, History, Rule};

/// One history line, without the trailing newline.
pub fn format_event(ev: &Event) -> String {
    let n = ev.step;
    match &ev.kind {
        EventKind::Infer {
            rule,
            premises,
            mono,
            result,
        } => {
            let [(c1, i), (c2, j)] = premises;
            let mut line = format!("STEP {n} {rule} premises={c1}.{i},{c2}.{j} result={}", result.id);
            if let (Rule::R3, Some(m)) = (rule, mono) {
                write!(line, " mono={m}").unwrap();
            }
            write!(line, " : {}", format_clause_body(result)).unwrap();
            line
        }
        EventKind::Delete { clause, subsumed_by } => {
            format!("STEP {n} DELETE clause={clause} reason=subsumed-by:{subsumed_by}")
        }
        EventKind::Simplify { before, after } => {
            format!("STEP {n} SIMPLIFY clause={before} result={} : {}", after.id, format_clause_body(after))
        }
        EventKind::Unfold {
            clause,
            literal,
            edge,
            result,
        } => format!(
            "STEP {n} UNFOLD clause={clause} literal={literal} edge={edge} result={} : {}",
            result.id,
            format_clause_body(result)
        ),
    }
}

/// One line per event, then the verdict line. LF line endings.
pub fn format_history(h: &History) -> String {
    let mut out = String::new();
    for ev in &h.events {
        out.push_str(&format_event(ev));
        out.push('\n');
    }
    let v = &h.verdict;
    writeln!(out, "VERDICT {} steps={} elapsed-ms={}", v.verdict, v.steps, v.elapsed_ms).unwrap();
    out
}
