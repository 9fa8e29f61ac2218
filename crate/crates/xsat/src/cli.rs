//! The `xsat` command line.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use xsat_core::algebra::{join, shared_join, unfold_edge};
use xsat_core::logic::{check_document, Specification};
use xsat_core::morphism::{enumerate_monomorphisms, enumerate_prefix_functions, NodeMap};
use xsat_core::oracle::{bounded_sat, fresh_label, BoundedSat, OracleBound};
use xsat_core::pattern::{Document, Pattern};
use xsat_core::refutation::{run as run_engine, RunConfig, Verdict};
use xsat_core::textio::{
    format_history, ingest_xml, parse_document_native, parse_pattern, parse_spec, print_pattern, XmlOptions,
};

use crate::json::{map_json, pattern_json, run_result_json};
use crate::service;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_A_MODEL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_MODEL: i32 = 3;
pub const EXIT_UNSAT: i32 = 10;
pub const EXIT_LIMIT: i32 = 20;

#[derive(Parser, Debug)]
#[command(name = "xsat", version, about = "Satisfiability workbench for XPath tree-pattern constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the refutation procedure on a .spec file.
    Sat(SatArgs),
    /// Check whether a document satisfies a specification.
    Check(CheckArgs),
    /// List the monomorphisms from one pattern into another.
    Mono(PairArgs),
    /// List the prefix functions from one pattern into another.
    Prefixes(PairArgs),
    /// Join two patterns.
    Join(JoinArgs),
    /// Join P1 with Q, identifying the copies of P2 in both.
    Sjoin(SjoinArgs),
    /// Unfold a descendant edge.
    Unfold(UnfoldArgs),
    /// Search small documents for a model.
    Oracle(OracleArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
struct SatArgs {
    spec: PathBuf,
    /// Procedure version: 1, or 2 to also unfold descendant edges.
    #[arg(long = "version", value_name = "N", default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    procedure: u8,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    max_clauses: Option<usize>,
    #[arg(long)]
    max_pattern_nodes: Option<usize>,
    #[arg(long)]
    unfold_rounds: Option<usize>,
    #[arg(long)]
    time_budget_ms: Option<u64>,
    /// Write the run history to this file.
    #[arg(long, value_name = "PATH")]
    history: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct CheckArgs {
    spec: PathBuf,
    /// A .tree file in the pattern syntax, or a .xml file.
    doc: PathBuf,
    /// Keep XML attributes as `@name` children.
    #[arg(long)]
    xml_attrs: bool,
    /// Keep XML text runs as leaf children.
    #[arg(long)]
    xml_text: bool,
    /// Print one line per clause.
    #[arg(long)]
    report: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct PairArgs {
    /// Pattern text, or @file.
    source: String,
    /// Pattern text, or @file.
    target: String,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct JoinArgs {
    p1: String,
    p2: String,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct SjoinArgs {
    p1: String,
    /// The shared pattern, embedded in P1 and a prefix of Q.
    p2: String,
    q: String,
    /// Prefix function P2 -> Q, e.g. `[0->0,1->1]`.
    #[arg(long)]
    prefix: Option<String>,
    /// Monomorphism P2 -> P1.
    #[arg(long)]
    mono: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct UnfoldArgs {
    p: String,
    /// Preorder id of the node below the descendant edge; defaults to the
    /// first one.
    #[arg(long)]
    edge: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    spec: PathBuf,
    /// Comma-separated labels; defaults to the specification's labels plus a fresh one.
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<String>>,
    #[arg(long, default_value_t = 6)]
    max_nodes: usize,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Keep sessions as files in this directory.
    #[arg(long, value_name = "DIR")]
    state_dir: Option<PathBuf>,
    /// Allowed CORS origin; any origin when omitted.
    #[arg(long)]
    cors_origin: Option<String>,
}

/// A failure reported on stderr with exit code 2.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

/// Runs one command. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Sat(a) => cmd_sat(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::Mono(a) => cmd_maps(a, false, out),
        Command::Prefixes(a) => cmd_maps(a, true, out),
        Command::Join(a) => cmd_join(a, out),
        Command::Sjoin(a) => cmd_sjoin(a, out),
        Command::Unfold(a) => cmd_unfold(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Serve(a) => cmd_serve(a, err),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure(message)) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_USAGE
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<Specification, Failure> {
    parse_spec(&read(path)?).map_err(|errors| {
        let lines: Vec<String> = errors.iter().map(|e| format!("{}:{e}", path.display())).collect();
        Failure(lines.join("\n"))
    })
}

fn load_document(path: &Path, opts: XmlOptions) -> Result<Document, Failure> {
    let is_xml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("xml"));
    let parsed = if is_xml {
        let bytes = std::fs::read(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
        ingest_xml(&bytes, opts)
    } else {
        parse_document_native(read(path)?.trim())
    };
    parsed.map_err(|e| Failure(format!("{}:{e}", path.display())))
}

/// Inline pattern text, or `@path` to read it from a file.
fn pattern_arg(arg: &str) -> Result<Pattern, Failure> {
    let (text, origin) = match arg.strip_prefix('@') {
        Some(path) => (read(Path::new(path))?, path.to_string()),
        None => (arg.to_string(), "pattern".to_string()),
    };
    parse_pattern(text.trim()).map_err(|e| Failure(format!("{origin}:{e}")))
}

fn mapping_arg(text: &str, source: &Pattern, what: &str) -> Result<NodeMap, Failure> {
    let bad = || Failure(format!("{what}: expected a mapping like [0->0,1->1], got {text:?}"));
    let inner = text.trim().strip_prefix('[').and_then(|t| t.strip_suffix(']')).ok_or_else(bad)?;
    let mut pairs = Vec::new();
    for part in inner.split(',').filter(|p| !p.trim().is_empty()) {
        let (x, y) = part.split_once("->").ok_or_else(bad)?;
        let x: usize = x.trim().parse().map_err(|_| bad())?;
        let y: usize = y.trim().parse().map_err(|_| bad())?;
        pairs.push((x, y));
    }
    NodeMap::from_pairs(source.len(), &pairs)
        .ok_or_else(|| Failure(format!("{what} must map each of the {} source nodes exactly once", source.len())))
}

fn print_json(out: &mut dyn Write, v: &Value) -> Result<(), Failure> {
    writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn cmd_sat(a: SatArgs, out: &mut dyn Write) -> Outcome {
    let s = load_spec(&a.spec)?;
    let d = RunConfig::default();
    let cfg = RunConfig {
        version: a.procedure,
        max_steps: a.max_steps.unwrap_or(d.max_steps),
        max_clauses: a.max_clauses.unwrap_or(d.max_clauses),
        max_pattern_nodes: a.max_pattern_nodes.unwrap_or(d.max_pattern_nodes),
        unfold_rounds: a.unfold_rounds.unwrap_or(d.unfold_rounds),
        time_budget_ms: a.time_budget_ms,
    };
    let result = run_engine(&s, &cfg, None);
    if let Some(path) = &a.history {
        std::fs::write(path, format_history(&result.history))
            .map_err(|e| Failure(format!("cannot write {}: {e}", path.display())))?;
    }
    if a.json {
        let mut m = run_result_json(&result);
        m.insert("state".into(), json!("done"));
        print_json(out, &Value::Object(m))?;
    } else {
        writeln!(out, "{}", result.verdict)?;
        writeln!(out, "steps={} elapsed-ms={}", result.history.events.len(), result.elapsed_ms)?;
    }
    Ok(match result.verdict {
        Verdict::Unsatisfiable => EXIT_UNSAT,
        Verdict::Saturated => EXIT_OK,
        Verdict::LimitReached => EXIT_LIMIT,
    })
}

fn cmd_check(a: CheckArgs, out: &mut dyn Write) -> Outcome {
    let s = load_spec(&a.spec)?;
    let doc = load_document(
        &a.doc,
        XmlOptions {
            attrs: a.xml_attrs,
            text: a.xml_text,
        },
    )?;
    let report = check_document(&doc, &s);
    let word = |b: bool| if b { "TRUE" } else { "FALSE" };
    if a.json {
        let per: Vec<Value> = report
            .per_clause
            .iter()
            .map(|(c, ok)| json!({"clause": c.as_str(), "result": ok}))
            .collect();
        print_json(out, &json!({"overall": report.overall, "per_clause": per}))?;
    } else {
        writeln!(out, "{}", word(report.overall))?;
        if a.report {
            for (c, ok) in &report.per_clause {
                writeln!(out, "{c} {}", word(*ok))?;
            }
        }
    }
    Ok(if report.overall { EXIT_OK } else { EXIT_NOT_A_MODEL })
}

fn cmd_maps(a: PairArgs, prefixes: bool, out: &mut dyn Write) -> Outcome {
    let (source, target) = (pattern_arg(&a.source)?, pattern_arg(&a.target)?);
    let maps = if prefixes {
        enumerate_prefix_functions(&source, &target)
    } else {
        enumerate_monomorphisms(&source, &target)
    };
    if a.json {
        let all: Vec<_> = maps.iter().map(map_json).collect();
        print_json(out, &json!({"maps": all, "count": maps.len()}))?;
    } else {
        for m in &maps {
            writeln!(out, "{m}")?;
        }
        writeln!(out, "count={}", maps.len())?;
    }
    Ok(EXIT_OK)
}

fn print_patterns<'a>(out: &mut dyn Write, json: bool, ps: impl Iterator<Item = &'a Pattern>) -> Result<(), Failure> {
    let ps: Vec<&Pattern> = ps.collect();
    if json {
        let all: Vec<_> = ps.iter().map(|p| pattern_json(p)).collect();
        print_json(out, &json!({"results": all}))
    } else {
        for p in ps {
            writeln!(out, "{}", print_pattern(p))?;
        }
        Ok(())
    }
}

fn cmd_join(a: JoinArgs, out: &mut dyn Write) -> Outcome {
    let results = join(&pattern_arg(&a.p1)?, &pattern_arg(&a.p2)?)?;
    print_patterns(out, a.json, results.iter().map(|r| &r.pattern))?;
    Ok(EXIT_OK)
}

/// The only candidate, or an error naming the missing or ambiguous map.
fn unique(mut candidates: Vec<NodeMap>, what: &str, flag: &str) -> Result<NodeMap, Failure> {
    match candidates.len() {
        0 => Err(Failure(format!("there is no {what}"))),
        1 => Ok(candidates.remove(0)),
        n => {
            let listed: Vec<String> = candidates.iter().map(|m| m.to_string()).collect();
            Err(Failure(format!(
                "{n} candidates for the {what}: {}; choose one with {flag}",
                listed.join(" ")
            )))
        }
    }
}

fn cmd_sjoin(a: SjoinArgs, out: &mut dyn Write) -> Outcome {
    let (p1, p2, q) = (pattern_arg(&a.p1)?, pattern_arg(&a.p2)?, pattern_arg(&a.q)?);
    let prefix = match &a.prefix {
        Some(t) => mapping_arg(t, &p2, "--prefix")?,
        None => unique(enumerate_prefix_functions(&p2, &q), "prefix function from P2 into Q", "--prefix")?,
    };
    let mono = match &a.mono {
        Some(t) => mapping_arg(t, &p2, "--mono")?,
        None => unique(enumerate_monomorphisms(&p2, &p1), "monomorphism from P2 into P1", "--mono")?,
    };
    let results = shared_join(&p1, &q, &p2, &prefix, &mono)?;
    print_patterns(out, a.json, results.iter().map(|r| &r.pattern))?;
    Ok(EXIT_OK)
}

fn cmd_unfold(a: UnfoldArgs, out: &mut dyn Write) -> Outcome {
    let p = pattern_arg(&a.p)?;
    let edge = match a.edge {
        Some(e) => e,
        None => *p
            .descendant_edges()
            .first()
            .ok_or_else(|| Failure("the pattern has no descendant edge".to_string()))?,
    };
    let u = unfold_edge(&p, edge)?;
    if a.json {
        let skip: Vec<_> = u.skip.iter().map(pattern_json).collect();
        print_json(out, &json!({"edge": edge, "step": pattern_json(&u.step), "skip": skip}))?;
    } else {
        for d in u.disjuncts() {
            writeln!(out, "{}", print_pattern(d))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_oracle(a: OracleArgs, out: &mut dyn Write) -> Outcome {
    let s = load_spec(&a.spec)?;
    let labels = match a.labels {
        Some(l) => l,
        None => {
            let mut l = s.label_names();
            l.push(fresh_label(&l));
            l
        }
    };
    let bound = OracleBound::new(&labels, a.max_nodes)?;
    match bounded_sat(&s, &bound) {
        BoundedSat::Witness(w) => {
            writeln!(out, "WITNESS {}", print_pattern(&w.document))?;
            Ok(EXIT_OK)
        }
        BoundedSat::NoModelWithinBound => {
            writeln!(out, "NO-MODEL-WITHIN-BOUND")?;
            Ok(EXIT_NO_MODEL)
        }
    }
}

fn cmd_serve(a: ServeArgs, err: &mut dyn Write) -> Outcome {
    let state = service::AppState::new(a.state_dir)?;
    let addr = SocketAddr::new(a.host, a.port);
    let runtime = tokio::runtime::Runtime::new()?;
    writeln!(err, "listening on http://{addr}")?;
    runtime.block_on(service::serve(addr, state, a.cors_origin))?;
    Ok(EXIT_OK)
}
