//! HTTP API over sessions, runs and the pattern tools.
//!
//! A session holds a specification whose clauses can be deleted
//! temporarily and restored, plus an optional document to check. Runs
//! execute on the blocking pool and are polled; their histories stay
//! available once they end.

mod runs;
mod store;
mod tools;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use xsat_core::logic::{check_document, Clause, ClauseId, Specification};
use xsat_core::pattern::Document;
use xsat_core::textio::{ingest_xml, parse_document_native, parse_spec, print_pattern, XmlOptions};

use crate::json::{clause_json, parse_errors_json, LiteralJson};
use runs::RunEntry;
use store::Store;

/// An error response: status plus `{"error": reason, "message": ...}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, reason: &str, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            body: json!({"error": reason, "message": message.into()}),
        }
    }

    fn malformed(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "malformed-body", message)
    }

    fn not_found(what: &str, id: &str) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "not-found", format!("no {what} {id:?}"))
    }

    fn unprocessable(reason: &str, message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, reason, message)
    }

    fn conflict(reason: &str, message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::CONFLICT, reason, message)
    }

    fn internal(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

fn ok(v: Value) -> ApiResult {
    Ok(Json(v).into_response())
}

/// Parses a JSON body. An empty body reads as `{}`.
fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    let bytes: &[u8] = if bytes.iter().all(u8::is_ascii_whitespace) { b"{}" } else { bytes };
    serde_json::from_slice(bytes).map_err(|e| ApiError::malformed(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClauseState {
    Active,
    Deleted,
}

impl ClauseState {
    fn word(self) -> &'static str {
        match self {
            ClauseState::Active => "active",
            ClauseState::Deleted => "deleted",
        }
    }
}

pub struct Session {
    id: String,
    clauses: Vec<(Clause, ClauseState)>,
    document: Option<Document>,
}

impl Session {
    fn active(&self) -> Specification {
        let clauses = self
            .clauses
            .iter()
            .filter(|(_, s)| *s == ClauseState::Active)
            .map(|(c, _)| c.clone())
            .collect();
        Specification::new(clauses).expect("session clause ids are distinct")
    }

    fn all(&self) -> Specification {
        Specification::new(self.clauses.iter().map(|(c, _)| c.clone()).collect()).expect("distinct ids")
    }

    fn to_json(&self) -> Value {
        let clauses: Vec<Value> = self
            .clauses
            .iter()
            .map(|(c, s)| {
                let mut v = clause_json(c);
                v["state"] = json!(s.word());
                v
            })
            .collect();
        json!({
            "id": self.id,
            "clauses": clauses,
            "document": self.document.as_ref().map(|d| print_pattern(d)),
        })
    }
}

type Shared<T> = Arc<tokio::sync::Mutex<T>>;

struct Inner {
    sessions: Mutex<HashMap<String, Shared<Session>>>,
    runs: Mutex<HashMap<String, Arc<RunEntry>>>,
    next_session: AtomicU64,
    next_run: AtomicU64,
    store: Option<Store>,
}

/// Service state; cheap to clone.
#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    /// With a state directory, sessions saved there are loaded and every
    /// change is written back.
    pub fn new(state_dir: Option<PathBuf>) -> std::io::Result<AppState> {
        let (store, loaded) = match state_dir {
            Some(dir) => {
                let store = Store::open(dir)?;
                let loaded = store.load()?;
                (Some(store), loaded)
            }
            None => (None, Vec::new()),
        };
        let mut next = 1;
        let mut sessions = HashMap::new();
        for s in loaded {
            if let Some(n) = s.id.strip_prefix('s').and_then(|n| n.parse::<u64>().ok()) {
                next = next.max(n + 1);
            }
            sessions.insert(s.id.clone(), Arc::new(tokio::sync::Mutex::new(s)));
        }
        Ok(AppState(Arc::new(Inner {
            sessions: Mutex::new(sessions),
            runs: Mutex::new(HashMap::new()),
            next_session: AtomicU64::new(next),
            next_run: AtomicU64::new(1),
            store,
        })))
    }

    fn session(&self, id: &str) -> Result<Shared<Session>, ApiError> {
        let sessions = self.0.sessions.lock().expect("session map lock");
        sessions.get(id).cloned().ok_or_else(|| ApiError::not_found("session", id))
    }

    fn run(&self, id: &str) -> Result<Arc<RunEntry>, ApiError> {
        let runs = self.0.runs.lock().expect("run map lock");
        runs.get(id).cloned().ok_or_else(|| ApiError::not_found("run", id))
    }

    fn persist(&self, s: &Session) -> Result<(), ApiError> {
        match &self.0.store {
            Some(store) => {
                let ids: Vec<String> = self.0.sessions.lock().expect("session map lock").keys().cloned().collect();
                store.save(s, &ids).map_err(|e| ApiError::internal(format!("cannot save session: {e}")))
            }
            None => Ok(()),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/specs", post(create_spec))
        .route("/specs/{id}", get(get_spec))
        .route("/specs/{id}/clauses/{cid}", patch(set_clause_state))
        .route("/specs/{id}/document", post(set_document))
        .route("/specs/{id}/check", post(check))
        .route("/specs/{id}/runs", post(runs::start))
        .route("/runs/{rid}", get(runs::status).delete(runs::cancel))
        .route("/runs/{rid}/history", get(runs::history))
        .route("/runs/{rid}/export", get(runs::export))
        .route("/runs/{rid}/clauses", get(runs::clauses_at))
        .route("/runs/{rid}/clauses/{cid}", get(runs::clause))
        .route("/runs/{rid}/constraints/{ctid}", get(runs::constraint))
        .route("/tools/monomorphisms", post(tools::monomorphisms))
        .route("/tools/prefixes", post(tools::prefixes))
        .route("/tools/join", post(tools::join))
        .route("/tools/shared-join", post(tools::shared_join))
        .route("/tools/unfold", post(tools::unfold))
        .with_state(state)
}

/// Serves until interrupted. `cors_origin` restricts cross-origin access to
/// one origin; otherwise any origin is allowed.
pub async fn serve(addr: SocketAddr, state: AppState, cors_origin: Option<String>) -> std::io::Result<()> {
    let origin = match cors_origin {
        Some(o) => AllowOrigin::exact(
            HeaderValue::from_str(&o).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?,
        ),
        None => AllowOrigin::from(Any),
    };
    let cors = CorsLayer::new().allow_origin(origin).allow_methods(Any).allow_headers(Any);
    let app = router(state).layer(cors);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClauseInput {
    id: String,
    literals: Vec<LiteralJson>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSpec {
    text: Option<String>,
    clauses: Option<Vec<ClauseInput>>,
}

fn spec_from_request(req: CreateSpec) -> Result<Specification, ApiError> {
    match (req.text, req.clauses) {
        (Some(text), None) => parse_spec(&text).map_err(|errors| ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: json!({
                "error": "parse-error",
                "message": format!("{} parse error(s)", errors.len()),
                "errors": parse_errors_json(&errors),
            }),
        }),
        (None, Some(clauses)) => {
            let mut out = Vec::with_capacity(clauses.len());
            for c in clauses {
                let mut literals = Vec::with_capacity(c.literals.len());
                for (i, k) in c.literals.iter().enumerate() {
                    let k = k
                        .to_constraint()
                        .map_err(|e| ApiError::unprocessable("invalid-literal", format!("{} literal {i}: {e}", c.id)))?;
                    literals.push(k);
                }
                out.push(Clause::new(ClauseId::new(c.id), literals));
            }
            Specification::new(out)
                .map_err(|e| ApiError::unprocessable("duplicate-clause-id", format!("clause id {} is used twice", e.0)))
        }
        _ => Err(ApiError::malformed("give exactly one of \"text\" and \"clauses\"")),
    }
}

async fn create_spec(State(st): State<AppState>, bytes: Bytes) -> ApiResult {
    let s = spec_from_request(body(&bytes)?)?;
    let id = format!("s{}", st.0.next_session.fetch_add(1, Ordering::SeqCst));
    let session = Session {
        id: id.clone(),
        clauses: s.into_clauses().into_iter().map(|c| (c, ClauseState::Active)).collect(),
        document: None,
    };
    let v = session.to_json();
    let shared = Arc::new(tokio::sync::Mutex::new(session));
    st.0.sessions.lock().expect("session map lock").insert(id, shared.clone());
    st.persist(&*shared.lock().await)?;
    Ok((StatusCode::CREATED, Json(v)).into_response())
}

async fn get_spec(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let session = st.session(&id)?;
    let s = session.lock().await;
    ok(s.to_json())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SetClauseState {
    state: ClauseState,
}

async fn set_clause_state(
    State(st): State<AppState>,
    Path((id, cid)): Path<(String, String)>,
    bytes: Bytes,
) -> ApiResult {
    let req: SetClauseState = body(&bytes)?;
    let session = st.session(&id)?;
    let mut s = session.lock().await;
    let entry = s
        .clauses
        .iter_mut()
        .find(|(c, _)| c.id.as_str() == cid)
        .ok_or_else(|| ApiError::not_found("clause", &cid))?;
    entry.1 = req.state;
    let mut v = clause_json(&entry.0);
    v["state"] = json!(req.state.word());
    st.persist(&s)?;
    ok(v)
}

#[derive(Deserialize, Default, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum DocFormat {
    #[default]
    Native,
    Xml,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct SetDocument {
    #[serde(default)]
    format: DocFormat,
    content: String,
    #[serde(default)]
    xml_attrs: bool,
    #[serde(default)]
    xml_text: bool,
}

async fn set_document(State(st): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult {
    let req: SetDocument = body(&bytes)?;
    let session = st.session(&id)?;
    let parsed = match req.format {
        DocFormat::Native => parse_document_native(req.content.trim()),
        DocFormat::Xml => ingest_xml(
            req.content.as_bytes(),
            XmlOptions {
                attrs: req.xml_attrs,
                text: req.xml_text,
            },
        ),
    };
    let doc = parsed.map_err(|e| ApiError {
        status: StatusCode::UNPROCESSABLE_ENTITY,
        body: json!({
            "error": "parse-error",
            "message": e.to_string(),
            "errors": parse_errors_json(std::slice::from_ref(&e)),
        }),
    })?;
    let mut s = session.lock().await;
    let text = print_pattern(&doc);
    s.document = Some(doc);
    st.persist(&s)?;
    ok(json!({"document": text}))
}

async fn check(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let session = st.session(&id)?;
    let s = session.lock().await;
    let doc = s
        .document
        .as_ref()
        .ok_or_else(|| ApiError::unprocessable("no-document", "set a document before checking"))?;
    let report = check_document(doc, &s.active());
    let per: Vec<Value> = report
        .per_clause
        .iter()
        .map(|(c, r)| json!({"clause": c.as_str(), "result": r}))
        .collect();
    ok(json!({"overall": report.overall, "per_clause": per}))
}
