//! Run management: start, poll, cancel, and browse histories.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::Json;
use serde::Deserialize;
use serde_json::{json, Value};
use xsat_core::logic::{Clause, ConstraintKey, Specification};
use xsat_core::refutation::{replay, run, EventKind, RunConfig, RunResult};
use xsat_core::textio::{format_clause_body, format_history, format_literal};

use super::{body, ok, ApiError, ApiResult, AppState};
use crate::json::{event_json, run_result_json};

enum RunState {
    Pending,
    Running,
    Done(Arc<RunResult>),
    Cancelled(Arc<RunResult>),
}

pub struct RunEntry {
    id: String,
    session: String,
    config: RunConfig,
    input: Specification,
    cancel: Arc<AtomicBool>,
    state: Mutex<RunState>,
}

impl RunEntry {
    fn result(&self) -> Option<Arc<RunResult>> {
        match &*self.state.lock().expect("run state lock") {
            RunState::Done(r) | RunState::Cancelled(r) => Some(r.clone()),
            RunState::Pending | RunState::Running => None,
        }
    }

    fn finished(&self) -> Result<Arc<RunResult>, ApiError> {
        self.result()
            .ok_or_else(|| ApiError::conflict("run-not-finished", format!("run {} has not finished", self.id)))
    }

    fn to_json(&self) -> Value {
        let state = self.state.lock().expect("run state lock");
        let (word, result) = match &*state {
            RunState::Pending => ("pending", None),
            RunState::Running => ("running", None),
            RunState::Done(r) => ("done", Some(r)),
            RunState::Cancelled(r) => ("cancelled", Some(r)),
        };
        let mut m = serde_json::Map::new();
        m.insert("id".into(), json!(self.id));
        m.insert("session".into(), json!(self.session));
        m.insert("state".into(), json!(word));
        m.insert("version".into(), json!(self.config.version));
        if let Some(r) = result {
            m.extend(run_result_json(r));
        }
        Value::Object(m)
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct StartRun {
    version: Option<u8>,
    max_steps: Option<usize>,
    max_clauses: Option<usize>,
    max_pattern_nodes: Option<usize>,
    unfold_rounds: Option<usize>,
    time_budget_ms: Option<u64>,
}

pub async fn start(State(st): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult {
    let req: StartRun = body(&bytes)?;
    let d = RunConfig::default();
    let version = req.version.unwrap_or(1);
    if !(1..=2).contains(&version) {
        return Err(ApiError::unprocessable("invalid-version", "version must be 1 or 2"));
    }
    let config = RunConfig {
        version,
        max_steps: req.max_steps.unwrap_or(d.max_steps),
        max_clauses: req.max_clauses.unwrap_or(d.max_clauses),
        max_pattern_nodes: req.max_pattern_nodes.unwrap_or(d.max_pattern_nodes),
        unfold_rounds: req.unfold_rounds.unwrap_or(d.unfold_rounds),
        time_budget_ms: req.time_budget_ms,
    };
    let session = st.session(&id)?;
    let input = session.lock().await.active();
    let rid = format!("r{}", st.0.next_run.fetch_add(1, Ordering::SeqCst));
    let entry = Arc::new(RunEntry {
        id: rid.clone(),
        session: id,
        config,
        input,
        cancel: Arc::new(AtomicBool::new(false)),
        state: Mutex::new(RunState::Pending),
    });
    st.0.runs.lock().expect("run map lock").insert(rid, entry.clone());
    let worker = entry.clone();
    tokio::task::spawn_blocking(move || {
        *worker.state.lock().expect("run state lock") = RunState::Running;
        let result = Arc::new(run(&worker.input, &worker.config, Some(&worker.cancel)));
        *worker.state.lock().expect("run state lock") = if result.cancelled {
            RunState::Cancelled(result)
        } else {
            RunState::Done(result)
        };
    });
    Ok((StatusCode::ACCEPTED, Json(entry.to_json())).into_response())
}

pub async fn status(State(st): State<AppState>, Path(rid): Path<String>) -> ApiResult {
    ok(st.run(&rid)?.to_json())
}

pub async fn cancel(State(st): State<AppState>, Path(rid): Path<String>) -> ApiResult {
    let entry = st.run(&rid)?;
    if entry.result().is_some() {
        return Err(ApiError::conflict("run-terminal", format!("run {rid} has already ended")));
    }
    entry.cancel.store(true, Ordering::SeqCst);
    Ok((StatusCode::ACCEPTED, Json(entry.to_json())).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Page {
    from: Option<usize>,
    count: Option<usize>,
}

pub async fn history(State(st): State<AppState>, Path(rid): Path<String>, Query(page): Query<Page>) -> ApiResult {
    let result = st.run(&rid)?.finished()?;
    let events = &result.history.events;
    let from = page.from.unwrap_or(1).max(1);
    let count = page.count.unwrap_or(100);
    let slice: Vec<Value> = events.iter().skip(from - 1).take(count).map(event_json).collect();
    ok(json!({"events": slice, "total": events.len()}))
}

pub async fn export(State(st): State<AppState>, Path(rid): Path<String>) -> ApiResult {
    let result = st.run(&rid)?.finished()?;
    Ok(format_history(&result.history).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct At {
    at: Option<usize>,
}

pub async fn clauses_at(State(st): State<AppState>, Path(rid): Path<String>, Query(q): Query<At>) -> ApiResult {
    let entry = st.run(&rid)?;
    let result = entry.finished()?;
    let total = result.history.events.len();
    let at = q.at.unwrap_or(total);
    if at > total {
        return Err(ApiError::unprocessable(
            "step-out-of-range",
            format!("the run has {total} steps"),
        ));
    }
    let clauses = replay(&entry.input, &result.history.events[..at])
        .map_err(|e| ApiError::internal(format!("replay failed: {e}")))?;
    let list: Vec<Value> = clauses
        .clauses()
        .iter()
        .map(|c| json!({"id": c.id.as_str(), "text": format_clause_body(c)}))
        .collect();
    ok(json!({"at": at, "clauses": list}))
}

/// Every clause the run saw, with the step that introduced it (0 for the
/// input) and the step that removed or replaced it.
fn clause_index(input: &Specification, result: &RunResult) -> Vec<(Clause, usize, Option<usize>)> {
    let mut all: Vec<(Clause, usize, Option<usize>)> = input.clauses().iter().map(|c| (c.clone(), 0, None)).collect();
    for ev in &result.history.events {
        let gone = match &ev.kind {
            EventKind::Delete { clause, .. } => Some(clause),
            EventKind::Simplify { before, .. } => Some(before),
            EventKind::Unfold { clause, .. } => Some(clause),
            EventKind::Infer { .. } => None,
        };
        if let Some(id) = gone {
            if let Some(entry) = all.iter_mut().find(|(c, _, end)| &c.id == id && end.is_none()) {
                entry.2 = Some(ev.step);
            }
        }
        if let Some(c) = ev.kind.introduced() {
            all.push((c.clone(), ev.step, None));
        }
    }
    all
}

pub async fn clause(State(st): State<AppState>, Path((rid, cid)): Path<(String, String)>) -> ApiResult {
    let entry = st.run(&rid)?;
    let result = entry.finished()?;
    let index = clause_index(&entry.input, &result);
    let (c, introduced, removed) = index
        .iter()
        .find(|(c, _, _)| c.id.as_str() == cid)
        .ok_or_else(|| ApiError::not_found("clause", &cid))?;
    ok(json!({
        "id": c.id.as_str(),
        "text": format_clause_body(c),
        "introducedAt": introduced,
        "removedAt": removed,
    }))
}

pub async fn constraint(State(st): State<AppState>, Path((rid, ctid)): Path<(String, String)>) -> ApiResult {
    let entry = st.run(&rid)?;
    let result = entry.finished()?;
    let mut ids: HashMap<ConstraintKey, usize> = HashMap::new();
    // (text, clause ids) per constraint, in order of first appearance
    let mut found: Vec<(String, Vec<String>)> = Vec::new();
    for (c, _, _) in clause_index(&entry.input, &result) {
        for k in &c.literals {
            let n = *ids.entry(k.key()).or_insert_with(|| {
                found.push((format_literal(k), Vec::new()));
                found.len()
            });
            let clauses = &mut found[n - 1].1;
            if clauses.last().map(String::as_str) != Some(c.id.as_str()) {
                clauses.push(c.id.as_str().to_string());
            }
        }
    }
    let n = ctid
        .strip_prefix("ct")
        .and_then(|n| n.parse::<usize>().ok())
        .filter(|n| (1..=found.len()).contains(n))
        .ok_or_else(|| ApiError::not_found("constraint", &ctid))?;
    let (text, clauses) = &found[n - 1];
    ok(json!({"id": ctid, "text": text, "clauses": clauses}))
}
