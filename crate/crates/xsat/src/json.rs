//! JSON shapes shared by the service and `--json` output.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use xsat_core::logic::{Clause, Conditional, Constraint};
use xsat_core::morphism::{enumerate_prefix_functions, NodeMap};
use xsat_core::pattern::{canonical_order, Axis, Label, NodeId, Pattern, Tree};
use xsat_core::refutation::{Event, EventKind, RunResult};
use xsat_core::textio::{format_clause_body, format_event, format_literal, parse_pattern, ParseError};

/// `{"label": "a" | "*", "children": [{"axis": "child" | "descendant", "node": ...}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternJson {
    pub label: String,
    #[serde(default)]
    pub children: Vec<EdgeJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeJson {
    pub axis: AxisJson,
    pub node: PatternJson,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisJson {
    Child,
    Descendant,
}

/// A pattern given either as a tree or in the text syntax.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum PatternInput {
    Text(String),
    Tree(PatternJson),
}

impl PatternInput {
    /// Node ids follow the preorder of the input.
    pub fn to_pattern(&self) -> Result<Pattern, String> {
        match self {
            PatternInput::Text(t) => parse_pattern(t).map_err(|e| e.to_string()),
            PatternInput::Tree(j) => pattern_from_json(j),
        }
    }
}

fn tree_from_json(j: &PatternJson) -> Result<Tree, String> {
    let label = if j.label == "*" {
        Label::Wildcard
    } else {
        Label::name(j.label.clone())?
    };
    let mut children = Vec::with_capacity(j.children.len());
    for e in &j.children {
        let axis = match e.axis {
            AxisJson::Child => Axis::Child,
            AxisJson::Descendant => Axis::Descendant,
        };
        children.push((axis, tree_from_json(&e.node)?));
    }
    Ok(Tree { label, children })
}

pub fn pattern_from_json(j: &PatternJson) -> Result<Pattern, String> {
    Ok(Pattern::from_tree(&tree_from_json(j)?))
}

fn node_json(p: &Pattern, n: NodeId) -> PatternJson {
    PatternJson {
        label: p.label(n).to_string(),
        children: p
            .children(n)
            .iter()
            .map(|&c| EdgeJson {
                axis: match p.axis(c) {
                    Some(Axis::Descendant) => AxisJson::Descendant,
                    _ => AxisJson::Child,
                },
                node: node_json(p, c),
            })
            .collect(),
    }
}

/// The pattern with its node ids unchanged.
pub fn pattern_json_as_is(p: &Pattern) -> PatternJson {
    node_json(p, p.root())
}

/// The pattern in printed order, so that ids match the text form.
pub fn pattern_json(p: &Pattern) -> PatternJson {
    pattern_json_as_is(&canonical_order(p).0)
}

pub fn map_json(m: &NodeMap) -> Vec<[NodeId; 2]> {
    m.pairs().map(|(x, y)| [x, y]).collect()
}

pub fn map_from_json(len: usize, pairs: &[[NodeId; 2]]) -> Option<NodeMap> {
    let pairs: Vec<(NodeId, NodeId)> = pairs.iter().map(|[x, y]| (*x, *y)).collect();
    NodeMap::from_pairs(len, &pairs)
}

/// A structured literal.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LiteralJson {
    Exists {
        pattern: PatternInput,
    },
    NotExists {
        pattern: PatternInput,
    },
    Forall {
        premise: PatternInput,
        conclusion: PatternInput,
        #[serde(default)]
        prefix: Option<Vec<[NodeId; 2]>>,
    },
}

impl LiteralJson {
    pub fn to_constraint(&self) -> Result<Constraint, String> {
        Ok(match self {
            LiteralJson::Exists { pattern } => Constraint::Positive(pattern.to_pattern()?),
            LiteralJson::NotExists { pattern } => Constraint::Negative(pattern.to_pattern()?),
            LiteralJson::Forall {
                premise,
                conclusion,
                prefix,
            } => {
                let (premise, conclusion) = (premise.to_pattern()?, conclusion.to_pattern()?);
                let prefix = match prefix {
                    Some(pairs) => map_from_json(premise.len(), pairs)
                        .ok_or_else(|| "the prefix must map every premise node exactly once".to_string())?,
                    None => unique_prefix(&premise, &conclusion)?,
                };
                Constraint::Conditional(Conditional::new(premise, conclusion, prefix).map_err(|e| e.to_string())?)
            }
        })
    }
}

/// The only prefix function from `premise` into `conclusion`.
pub fn unique_prefix(premise: &Pattern, conclusion: &Pattern) -> Result<NodeMap, String> {
    let mut all = enumerate_prefix_functions(premise, conclusion);
    match all.len() {
        0 => Err("the premise is not a prefix of the conclusion".to_string()),
        1 => Ok(all.remove(0)),
        n => Err(format!("{n} prefix functions exist; give the prefix explicitly")),
    }
}

pub fn literal_json(k: &Constraint) -> Value {
    let text = format_literal(k);
    let k = k.canonical();
    match &k {
        Constraint::Positive(p) => json!({"kind": "exists", "pattern": pattern_json_as_is(p), "text": text}),
        Constraint::Negative(p) => json!({"kind": "not-exists", "pattern": pattern_json_as_is(p), "text": text}),
        Constraint::Conditional(c) => json!({
            "kind": "forall",
            "premise": pattern_json_as_is(c.premise()),
            "conclusion": pattern_json_as_is(c.conclusion()),
            "prefix": map_json(c.prefix()),
            "text": text,
        }),
    }
}

pub fn clause_json(c: &Clause) -> Value {
    json!({
        "id": c.id.as_str(),
        "text": format_clause_body(c),
        "literals": c.literals.iter().map(literal_json).collect::<Vec<_>>(),
    })
}

pub fn parse_errors_json(errors: &[ParseError]) -> Value {
    Value::Array(
        errors
            .iter()
            .map(|e| {
                json!({
                    "message": e.message,
                    "line": e.span.line,
                    "column": e.span.column,
                    "length": e.span.length,
                    "expected": e.expected,
                })
            })
            .collect(),
    )
}

/// The fields of a finished run.
pub fn run_result_json(r: &RunResult) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("verdict".into(), json!(r.verdict.word()));
    m.insert("elapsedMs".into(), json!(r.elapsed_ms));
    m.insert("clauseCount".into(), json!(r.final_clauses.len()));
    m.insert("steps".into(), json!(r.history.events.len()));
    m.insert("cancelled".into(), json!(r.cancelled));
    m
}

pub fn event_json(ev: &Event) -> Value {
    let line = format_event(ev);
    let step = ev.step;
    match &ev.kind {
        EventKind::Infer {
            rule,
            premises,
            mono,
            result,
        } => json!({
            "step": step,
            "kind": rule.to_string(),
            "premises": premises.iter().map(|(c, i)| json!({"clause": c.as_str(), "literal": i})).collect::<Vec<_>>(),
            "mono": mono.as_ref().map(map_json),
            "result": {"id": result.id.as_str(), "text": format_clause_body(result)},
            "line": line,
        }),
        EventKind::Delete { clause, subsumed_by } => json!({
            "step": step,
            "kind": "DELETE",
            "clause": clause.as_str(),
            "subsumedBy": subsumed_by.as_str(),
            "line": line,
        }),
        EventKind::Simplify { before, after } => json!({
            "step": step,
            "kind": "SIMPLIFY",
            "clause": before.as_str(),
            "result": {"id": after.id.as_str(), "text": format_clause_body(after)},
            "line": line,
        }),
        EventKind::Unfold {
            clause,
            literal,
            edge,
            result,
        } => json!({
            "step": step,
            "kind": "UNFOLD",
            "clause": clause.as_str(),
            "literal": literal,
            "edge": edge,
            "result": {"id": result.id.as_str(), "text": format_clause_body(result)},
            "line": line,
        }),
    }
}
