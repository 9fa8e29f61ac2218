//! HTTP API behaviour, driven in-process.

use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use xsat::service::{router, AppState};
use xsat_core::refutation::{replay, run, RunConfig};
use xsat_core::textio::{format_clause_body, parse_spec};

const SAMPLE_DOC: &str = "/a[b[g]][e[f[e][d]]]";
const CONDITIONAL_SPEC: &str =
    "clause c1 : exists /a[b][.//*[e][d]]\nclause c2 : forall /a[.//e] => /a[.//e[f]] prefix [0->0,1->1]\n";
const LOOPING: &str =
    "clause c1 : exists /*[.//b[.//c]]\nclause c2 : exists /b[.//*[.//a][.//b]]\nclause c3 : exists /b[.//b][.//b[a]]\n";

async fn raw(state: &AppState, method: Method, uri: &str, body: &str) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn call(state: &AppState, method: Method, uri: &str, body: Value) -> (StatusCode, Value) {
    let text = if body.is_null() { String::new() } else { body.to_string() };
    let (status, out) = raw(state, method, uri, &text).await;
    (status, serde_json::from_str(&out).unwrap_or(Value::String(out)))
}

async fn create(state: &AppState, text: &str) -> String {
    let (status, v) = call(state, Method::POST, "/specs", json!({"text": text})).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["id"].as_str().unwrap().to_string()
}

async fn wait(state: &AppState, rid: &str) -> Value {
    let start = Instant::now();
    loop {
        let (status, v) = call(state, Method::GET, &format!("/runs/{rid}"), Value::Null).await;
        assert_eq!(status, StatusCode::OK);
        if v["state"] == "done" || v["state"] == "cancelled" {
            return v;
        }
        assert!(start.elapsed() < Duration::from_secs(60), "run {rid} did not finish");
        tokio::time::sleep(Duration::from_millis(5)).await;
    }
}

async fn start(state: &AppState, sid: &str, cfg: Value) -> String {
    let (status, v) = call(state, Method::POST, &format!("/specs/{sid}/runs"), cfg).await;
    assert_eq!(status, StatusCode::ACCEPTED, "{v}");
    v["id"].as_str().unwrap().to_string()
}

fn state() -> AppState {
    AppState::new(None).unwrap()
}

#[tokio::test]
async fn check_a_document() {
    let st = state();
    let sid = create(&st, "clause c1 : exists /a").await;
    let (status, v) = call(&st, Method::POST, &format!("/specs/{sid}/document"), json!({"content": "/a"})).await;
    assert_eq!((status, &v["document"]), (StatusCode::OK, &json!("/a")));
    let (status, v) = call(&st, Method::POST, &format!("/specs/{sid}/check"), Value::Null).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v, json!({"overall": true, "per_clause": [{"clause": "c1", "result": true}]}));
}

#[tokio::test]
async fn delete_and_restore_round_trip() {
    let st = state();
    let sid = create(&st, CONDITIONAL_SPEC).await;
    call(&st, Method::POST, &format!("/specs/{sid}/document"), json!({"content": SAMPLE_DOC})).await;
    let check_uri = format!("/specs/{sid}/check");
    let check = || call(&st, Method::POST, &check_uri, Value::Null);
    let (_, before) = check().await;
    assert_eq!(
        before,
        json!({"overall": false, "per_clause": [{"clause": "c1", "result": true}, {"clause": "c2", "result": false}]})
    );
    let (_, spec_before) = call(&st, Method::GET, &format!("/specs/{sid}"), Value::Null).await;

    let (status, v) = call(&st, Method::PATCH, &format!("/specs/{sid}/clauses/c2"), json!({"state": "deleted"})).await;
    assert_eq!((status, &v["state"]), (StatusCode::OK, &json!("deleted")));
    let (_, during) = check().await;
    assert_eq!(during, json!({"overall": true, "per_clause": [{"clause": "c1", "result": true}]}));

    call(&st, Method::PATCH, &format!("/specs/{sid}/clauses/c2"), json!({"state": "active"})).await;
    let (_, after) = check().await;
    assert_eq!(after, before);
    let (_, spec_after) = call(&st, Method::GET, &format!("/specs/{sid}"), Value::Null).await;
    assert_eq!(spec_after, spec_before);
}

#[tokio::test]
async fn documents_from_xml() {
    let st = state();
    let sid = create(&st, "clause c1 : exists /a[@id[x]]").await;
    let body = json!({"format": "xml", "content": "<a id=\"x\"><b/></a>", "xmlAttrs": true});
    let (status, v) = call(&st, Method::POST, &format!("/specs/{sid}/document"), body).await;
    assert_eq!((status, &v["document"]), (StatusCode::OK, &json!("/a[b][@id[x]]")));
    let (_, v) = call(&st, Method::POST, &format!("/specs/{sid}/check"), Value::Null).await;
    assert_eq!(v["overall"], true);
    let (status, v) =
        call(&st, Method::POST, &format!("/specs/{sid}/document"), json!({"format": "xml", "content": "<a>"})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "parse-error");
}

#[tokio::test]
async fn structured_clauses() {
    let st = state();
    let body = json!({"clauses": [
        {"id": "c1", "literals": [{"kind": "exists", "pattern": {"label": "a", "children": [{"axis": "descendant", "node": {"label": "b"}}]}}]},
        {"id": "c2", "literals": [{"kind": "not-exists", "pattern": "/a[b]"}, {"kind": "forall", "premise": "/a", "conclusion": "/a[c]"}]},
    ]});
    let (status, v) = call(&st, Method::POST, "/specs", body).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    assert_eq!(v["clauses"][0]["text"], "exists /a[.//b]");
    assert_eq!(v["clauses"][1]["text"], "not exists /a[b] | forall /a => /a[c] prefix [0->0]");
    assert_eq!(v["clauses"][1]["state"], "active");
    assert_eq!(v["clauses"][1]["literals"][1]["prefix"], json!([[0, 0]]));

    let dup = json!({"clauses": [{"id": "c1", "literals": []}, {"id": "c1", "literals": []}]});
    let (status, v) = call(&st, Method::POST, "/specs", dup).await;
    assert_eq!((status, &v["error"]), (StatusCode::UNPROCESSABLE_ENTITY, &json!("duplicate-clause-id")));
    let bad = json!({"clauses": [{"id": "c1", "literals": [{"kind": "exists", "pattern": {"label": "a]"}}]}]});
    let (status, _) = call(&st, Method::POST, "/specs", bad).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn refutation_run_and_history() {
    let st = state();
    let sid = create(&st, "clause c1 : exists /a[b]\nclause c2 : not exists /a[.//b]").await;
    let rid = start(&st, &sid, json!({"version": 1})).await;
    let done = wait(&st, &rid).await;
    assert_eq!(done["state"], "done");
    assert_eq!(done["verdict"], "UNSAT");
    assert_eq!(done["clauseCount"], 3);
    assert!(done["elapsedMs"].is_u64());

    let (status, h) = call(&st, Method::GET, &format!("/runs/{rid}/history"), Value::Null).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(h["total"], 1);
    assert_eq!(h["events"][0]["kind"], "R1");
    assert_eq!(h["events"][0]["line"], "STEP 1 R1 premises=c1.0,c2.0 result=c3 : false");
    assert_eq!(h["events"][0]["premises"], json!([{"clause": "c1", "literal": 0}, {"clause": "c2", "literal": 0}]));

    let (status, text) = raw(&st, Method::GET, &format!("/runs/{rid}/export"), "").await;
    assert_eq!(status, StatusCode::OK);
    assert!(text.starts_with("STEP 1 R1 premises=c1.0,c2.0 result=c3 : false\nVERDICT UNSAT steps=1 elapsed-ms="));

    let (_, at0) = call(&st, Method::GET, &format!("/runs/{rid}/clauses?at=0"), Value::Null).await;
    assert_eq!(at0["clauses"].as_array().unwrap().len(), 2);
    let (_, at1) = call(&st, Method::GET, &format!("/runs/{rid}/clauses?at=1"), Value::Null).await;
    assert_eq!(at1["clauses"][2], json!({"id": "c3", "text": "false"}));
    let (status, _) = call(&st, Method::GET, &format!("/runs/{rid}/clauses?at=2"), Value::Null).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let (_, c3) = call(&st, Method::GET, &format!("/runs/{rid}/clauses/c3"), Value::Null).await;
    assert_eq!(c3, json!({"id": "c3", "text": "false", "introducedAt": 1, "removedAt": null}));
    let (_, ct) = call(&st, Method::GET, &format!("/runs/{rid}/constraints/ct2"), Value::Null).await;
    assert_eq!(ct, json!({"id": "ct2", "text": "not exists /a[.//b]", "clauses": ["c2"]}));
    let (status, _) = call(&st, Method::GET, &format!("/runs/{rid}/constraints/ct3"), Value::Null).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, v) = call(&st, Method::DELETE, &format!("/runs/{rid}"), Value::Null).await;
    assert_eq!((status, &v["error"]), (StatusCode::CONFLICT, &json!("run-terminal")));
}

#[tokio::test]
async fn paging_is_lossless_and_clauses_match_replay() {
    let st = state();
    let text = "clause c1 : exists /a[.//b] | exists /a[c]\nclause c2 : forall /a[.//b] => /a[.//b[c]] prefix [0->0,1->1]\nclause c3 : not exists /a[b[c]]\nclause c4 : exists /a[b]";
    let sid = create(&st, text).await;
    let rid = start(&st, &sid, json!({"version": 2, "unfoldRounds": 2})).await;
    let done = wait(&st, &rid).await;
    let total = done["steps"].as_u64().unwrap() as usize;
    assert!(total >= 4, "{done}");

    let (_, all) = call(&st, Method::GET, &format!("/runs/{rid}/history?count=100000"), Value::Null).await;
    let mut paged = Vec::new();
    let mut from = 1;
    while from <= total {
        let (_, page) = call(&st, Method::GET, &format!("/runs/{rid}/history?from={from}&count=3"), Value::Null).await;
        assert_eq!(page["total"], total);
        paged.extend(page["events"].as_array().unwrap().iter().cloned());
        from += 3;
    }
    assert_eq!(Value::Array(paged), all["events"]);

    let s0 = parse_spec(text).unwrap();
    let local = run(&s0, &RunConfig { version: 2, unfold_rounds: 2, ..RunConfig::default() }, None);
    assert_eq!(local.history.events.len(), total);
    for k in 0..=total {
        let (_, v) = call(&st, Method::GET, &format!("/runs/{rid}/clauses?at={k}"), Value::Null).await;
        let want: Vec<Value> = replay(&s0, &local.history.events[..k])
            .unwrap()
            .clauses()
            .iter()
            .map(|c| json!({"id": c.id.as_str(), "text": format_clause_body(c)}))
            .collect();
        assert_eq!(v["clauses"], Value::Array(want), "at {k}");
    }
}

#[tokio::test]
async fn runs_use_active_clauses_only() {
    let st = state();
    let sid = create(&st, "clause c1 : exists /a[b]\nclause c2 : not exists /a[.//b]").await;
    call(&st, Method::PATCH, &format!("/specs/{sid}/clauses/c2"), json!({"state": "deleted"})).await;
    let rid = start(&st, &sid, Value::Null).await;
    assert_eq!(wait(&st, &rid).await["verdict"], "SATURATED");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn cancellation() {
    let st = state();
    let sid = create(&st, LOOPING).await;
    let rid = start(&st, &sid, json!({"maxSteps": 1000000, "maxClauses": 1000000})).await;
    // history is unavailable while running
    let (status, _) = call(&st, Method::GET, &format!("/runs/{rid}/history"), Value::Null).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call(&st, Method::DELETE, &format!("/runs/{rid}"), Value::Null).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    let end = wait(&st, &rid).await;
    assert_eq!((end["state"].as_str(), end["verdict"].as_str()), (Some("cancelled"), Some("LIMIT")));
    assert_eq!(end["cancelled"], true);
    let (status, _) = call(&st, Method::DELETE, &format!("/runs/{rid}"), Value::Null).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, h) = call(&st, Method::GET, &format!("/runs/{rid}/history"), Value::Null).await;
    assert_eq!((status, &h["total"]), (StatusCode::OK, &end["steps"]));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_runs_match_single_runs() {
    let st = state();
    let texts = [
        "clause c1 : exists /a[b]\nclause c2 : not exists /a[.//b]",
        "clause c1 : exists /a",
        "clause c1 : exists /a[.//b]\nclause c2 : not exists /a[b]\nclause c3 : not exists /a[*[.//b]]",
        "clause c1 : exists /a[.//b] | exists /a[c]\nclause c2 : not exists /a[.//b]\nclause c3 : not exists /a[c]",
    ];
    let mut rids = Vec::new();
    for (i, t) in texts.iter().enumerate() {
        let sid = create(&st, t).await;
        let version = 1 + (i % 2) as u8;
        rids.push((start(&st, &sid, json!({"version": version, "unfoldRounds": 1})).await, t, version));
    }
    for (rid, t, version) in rids {
        let got = wait(&st, &rid).await;
        let cfg = RunConfig { version, unfold_rounds: 1, ..RunConfig::default() };
        let want = run(&parse_spec(t).unwrap(), &cfg, None);
        assert_eq!(got["verdict"], want.verdict.word());
        assert_eq!(got["steps"], want.history.events.len());
    }
}

#[tokio::test]
async fn error_statuses() {
    let st = state();
    let (status, v) = raw(&st, Method::POST, "/specs", "{not json").await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{v}");
    let (status, _) = call(&st, Method::POST, "/specs", json!({})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&st, Method::POST, "/specs", json!({"text": "clause c1 : exists /a", "extra": 1})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, v) = call(&st, Method::POST, "/specs", json!({"text": "clause c1 : exists /a[\nclause c2 : nope"})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "parse-error");
    let lines: Vec<u64> = v["errors"].as_array().unwrap().iter().map(|e| e["line"].as_u64().unwrap()).collect();
    assert_eq!(lines, vec![1, 2]);

    let (status, _) = call(&st, Method::GET, "/specs/s999", Value::Null).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&st, Method::GET, "/runs/r999", Value::Null).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&st, Method::DELETE, "/runs/r999", Value::Null).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let sid = create(&st, "clause c1 : exists /a").await;
    let (status, _) = call(&st, Method::PATCH, &format!("/specs/{sid}/clauses/c9"), json!({"state": "deleted"})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&st, Method::PATCH, &format!("/specs/{sid}/clauses/c1"), json!({"state": "gone"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, v) = call(&st, Method::POST, &format!("/specs/{sid}/check"), Value::Null).await;
    assert_eq!((status, &v["error"]), (StatusCode::UNPROCESSABLE_ENTITY, &json!("no-document")));
    let (status, _) = call(&st, Method::POST, &format!("/specs/{sid}/document"), json!({"content": "/a[.//b]"})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(&st, Method::POST, &format!("/specs/{sid}/runs"), json!({"version": 3})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(&st, Method::POST, &format!("/specs/{sid}/runs"), json!({"version": "one"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&st, Method::GET, "/runs/r1/history?from=x", Value::Null).await;
    assert!(status == StatusCode::BAD_REQUEST || status == StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn monomorphism_and_prefix_tools() {
    let st = state();
    let (status, v) = call(
        &st,
        Method::POST,
        "/tools/monomorphisms",
        json!({"source": "/a[b][.//*[e][d]]", "target": SAMPLE_DOC}),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v, json!({"maps": [[[0, 0], [1, 1], [2, 4], [3, 5], [4, 6]]], "count": 1}));

    let tree = json!({"label": "a", "children": [{"axis": "descendant", "node": {"label": "e"}}]});
    let (_, v) = call(&st, Method::POST, "/tools/monomorphisms", json!({"source": tree, "target": SAMPLE_DOC})).await;
    assert_eq!(v["count"], 2);
    let (_, v) = call(&st, Method::POST, "/tools/prefixes", json!({"source": "/a[b]", "target": "/a[b][b]"})).await;
    assert_eq!(v, json!({"maps": [[[0, 0], [1, 1]], [[0, 0], [1, 2]]], "count": 2}));
    let (status, v) = call(&st, Method::POST, "/tools/prefixes", json!({"source": "/a[", "target": "/a"})).await;
    assert_eq!((status, &v["error"]), (StatusCode::UNPROCESSABLE_ENTITY, &json!("invalid-pattern")));
    let (status, _) = call(&st, Method::POST, "/tools/prefixes", json!({"source": "/a"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn join_shared_join_and_unfold_tools() {
    let st = state();
    let (_, v) = call(&st, Method::POST, "/tools/join", json!({"p1": "/a[b]", "p2": "/a[c]"})).await;
    assert_eq!(
        v,
        json!({"results": [{"label": "a", "children": [
            {"axis": "child", "node": {"label": "b", "children": []}},
            {"axis": "child", "node": {"label": "c", "children": []}}
        ]}]})
    );
    let (_, v) = call(&st, Method::POST, "/tools/join", json!({"p1": "/a", "p2": "/b"})).await;
    assert_eq!(v, json!({"results": []}));

    let body = json!({"p1": "/a[e][b[e]]", "p2": "/a[.//e]", "q": "/a[.//e[f]]"});
    let (status, v) = call(&st, Method::POST, "/tools/shared-join", body).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["prefix"], json!([[0, 0], [1, 1]]));
    let groups = v["groups"].as_array().unwrap();
    assert_eq!(groups.len(), 2);
    assert_eq!(groups[0]["mono"], json!([[0, 0], [1, 1]]));
    assert_eq!(groups[0]["extends"], false);
    assert_eq!(groups[0]["results"].as_array().unwrap().len(), 1);

    let body = json!({"p1": "/a[e]", "p2": "/a[.//e]", "q": "/a[.//e[f]]", "mono": [[0, 0], [1, 0]]});
    let (status, v) = call(&st, Method::POST, "/tools/shared-join", body).await;
    assert_eq!((status, &v["error"]), (StatusCode::UNPROCESSABLE_ENTITY, &json!("not-a-monomorphism")));
    let body = json!({"p1": "/a[e]", "p2": "/a[b]", "q": "/a[b][b]"});
    let (status, v) = call(&st, Method::POST, "/tools/shared-join", body).await;
    assert_eq!((status, &v["error"]), (StatusCode::UNPROCESSABLE_ENTITY, &json!("no-unique-prefix")));

    let (_, v) = call(&st, Method::POST, "/tools/unfold", json!({"p": "/a[.//b]"})).await;
    assert_eq!(v["edge"], 1);
    assert_eq!(v["step"]["children"][0]["axis"], "child");
    assert_eq!(v["skip"][0]["children"][0]["node"]["label"], "*");
    let (status, v) = call(&st, Method::POST, "/tools/unfold", json!({"p": "/a[b]"})).await;
    assert_eq!((status, &v["error"]), (StatusCode::UNPROCESSABLE_ENTITY, &json!("no-descendant-edge")));
    let (status, v) = call(&st, Method::POST, "/tools/unfold", json!({"p": "/a[b]", "edge": 1})).await;
    assert_eq!((status, &v["error"]), (StatusCode::UNPROCESSABLE_ENTITY, &json!("not-a-descendant-edge")));
}

#[tokio::test]
async fn sessions_persist_in_a_state_directory() {
    let dir = tempfile::TempDir::new().unwrap();
    let st = AppState::new(Some(dir.path().to_path_buf())).unwrap();
    let sid = create(&st, CONDITIONAL_SPEC).await;
    call(&st, Method::POST, &format!("/specs/{sid}/document"), json!({"content": SAMPLE_DOC})).await;
    call(&st, Method::PATCH, &format!("/specs/{sid}/clauses/c2"), json!({"state": "deleted"})).await;
    let (_, before) = call(&st, Method::GET, &format!("/specs/{sid}"), Value::Null).await;
    assert!(dir.path().join(format!("{sid}.spec")).exists());
    assert!(dir.path().join("index.json").exists());

    let reopened = AppState::new(Some(dir.path().to_path_buf())).unwrap();
    let (status, after) = call(&reopened, Method::GET, &format!("/specs/{sid}"), Value::Null).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(after, before);
    // new sessions do not reuse ids
    let next = create(&reopened, "clause c1 : exists /a").await;
    assert_ne!(next, sid);
}
