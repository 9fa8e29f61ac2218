//! The pattern tools: monomorphisms, prefixes, join, shared join, unfold.

use axum::body::Bytes;
use serde::Deserialize;
use serde_json::{json, Value};
use xsat_core::algebra::{self, AlgebraError};
use xsat_core::morphism::{
    enumerate_monomorphisms, enumerate_prefix_functions, extension_exists, is_monomorphism, NodeMap,
};
use xsat_core::pattern::{NodeId, Pattern};

use super::{body, ok, ApiError, ApiResult};
use crate::json::{map_from_json, map_json, pattern_json, unique_prefix, PatternInput};

fn pattern(input: &PatternInput, field: &str) -> Result<Pattern, ApiError> {
    input
        .to_pattern()
        .map_err(|e| ApiError::unprocessable("invalid-pattern", format!("{field}: {e}")))
}

fn algebra_error(e: AlgebraError) -> ApiError {
    let reason = match e {
        AlgebraError::TooLarge { .. } => "too-large",
        AlgebraError::NotAPrefix => "not-a-prefix-function",
        AlgebraError::NotAMonomorphism => "not-a-monomorphism",
        AlgebraError::NotADescendantEdge { .. } => "not-a-descendant-edge",
    };
    ApiError::unprocessable(reason, e.to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pair {
    source: PatternInput,
    target: PatternInput,
}

fn maps_response(maps: &[NodeMap]) -> ApiResult {
    let all: Vec<_> = maps.iter().map(map_json).collect();
    ok(json!({"maps": all, "count": maps.len()}))
}

pub async fn monomorphisms(bytes: Bytes) -> ApiResult {
    let req: Pair = body(&bytes)?;
    let (s, t) = (pattern(&req.source, "source")?, pattern(&req.target, "target")?);
    maps_response(&enumerate_monomorphisms(&s, &t))
}

pub async fn prefixes(bytes: Bytes) -> ApiResult {
    let req: Pair = body(&bytes)?;
    let (s, t) = (pattern(&req.source, "source")?, pattern(&req.target, "target")?);
    maps_response(&enumerate_prefix_functions(&s, &t))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JoinRequest {
    p1: PatternInput,
    p2: PatternInput,
}

fn patterns_json(results: &[algebra::MergeResult]) -> Vec<Value> {
    results.iter().map(|r| json!(pattern_json(&r.pattern))).collect()
}

pub async fn join(bytes: Bytes) -> ApiResult {
    let req: JoinRequest = body(&bytes)?;
    let (p1, p2) = (pattern(&req.p1, "p1")?, pattern(&req.p2, "p2")?);
    let results = algebra::join(&p1, &p2).map_err(algebra_error)?;
    ok(json!({"results": patterns_json(&results)}))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharedJoinRequest {
    p1: PatternInput,
    q: PatternInput,
    p2: PatternInput,
    prefix: Option<Vec<[NodeId; 2]>>,
    mono: Option<Vec<[NodeId; 2]>>,
}

/// One group per monomorphism from `p2` into `p1`, or only the given one.
pub async fn shared_join(bytes: Bytes) -> ApiResult {
    let req: SharedJoinRequest = body(&bytes)?;
    let (p1, q, p2) = (pattern(&req.p1, "p1")?, pattern(&req.q, "q")?, pattern(&req.p2, "p2")?);
    let bad_map = |field: &str| {
        ApiError::unprocessable(
            "invalid-map",
            format!("{field} must map each of the {} nodes of p2 exactly once", p2.len()),
        )
    };
    let prefix = match &req.prefix {
        Some(pairs) => map_from_json(p2.len(), pairs).ok_or_else(|| bad_map("prefix"))?,
        None => unique_prefix(&p2, &q).map_err(|e| ApiError::unprocessable("no-unique-prefix", e))?,
    };
    let monos = match &req.mono {
        Some(pairs) => {
            let m = map_from_json(p2.len(), pairs).ok_or_else(|| bad_map("mono"))?;
            if !is_monomorphism(&p2, &p1, &m) {
                return Err(ApiError::unprocessable("not-a-monomorphism", "mono is not a monomorphism from p2 into p1"));
            }
            vec![m]
        }
        None => enumerate_monomorphisms(&p2, &p1),
    };
    let mut groups = Vec::with_capacity(monos.len());
    for m in &monos {
        let results = algebra::shared_join(&p1, &q, &p2, &prefix, m).map_err(algebra_error)?;
        groups.push(json!({
            "mono": map_json(m),
            "extends": extension_exists(&prefix, m, &q, &p1),
            "results": patterns_json(&results),
        }));
    }
    ok(json!({"prefix": map_json(&prefix), "groups": groups}))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnfoldRequest {
    p: PatternInput,
    edge: Option<NodeId>,
}

pub async fn unfold(bytes: Bytes) -> ApiResult {
    let req: UnfoldRequest = body(&bytes)?;
    let p = pattern(&req.p, "p")?;
    let edge = match req.edge {
        Some(e) => e,
        None => *p
            .descendant_edges()
            .first()
            .ok_or_else(|| ApiError::unprocessable("no-descendant-edge", "the pattern has no descendant edge"))?,
    };
    let u = algebra::unfold_edge(&p, edge).map_err(algebra_error)?;
    let skip: Vec<Value> = u.skip.iter().map(|s| json!(pattern_json(s))).collect();
    ok(json!({"edge": edge, "step": pattern_json(&u.step), "skip": skip}))
}
