//! The line-oriented `.spec` clause format.
//!
//! ```text
//! # comment
//! clause c1 : exists /a[b] | not exists /a[.//c]
//! clause c2 : forall /a[.//e] => /a[.//e[f]] prefix [0->0,1->1]
//! clause c3 : false
//! ```

use std::collections::HashSet;

use super::{print_pattern_with_ids, span_at, Cursor, ParseError};
use crate::logic::{Clause, ClauseId, Conditional, Constraint, Specification};
use crate::morphism::{enumerate_prefix_functions, NodeMap};
use crate::pattern::{NodeId, Pattern};

/// Byte offset where a `#` comment starts: at line start or after
/// whitespace.
fn comment_start(line: &str) -> Option<usize> {
    let bytes = line.as_bytes();
    (0..bytes.len()).find(|&i| bytes[i] == b'#' && (i == 0 || (bytes[i - 1] as char).is_whitespace()))
}

fn parse_mapping(cur: &mut Cursor<'_>) -> Result<Vec<(NodeId, NodeId)>, ParseError> {
    cur.skip_ws();
    if !cur.eat("[") {
        return Err(cur.error(cur.pos, 1, "expected mapping", &["\"[\""]));
    }
    let mut pairs = Vec::new();
    loop {
        cur.skip_ws();
        let from = number(cur)?;
        cur.skip_ws();
        if !cur.eat("->") {
            return Err(cur.error(cur.pos, 1, "expected \"->\" in mapping", &["\"->\""]));
        }
        cur.skip_ws();
        let to = number(cur)?;
        pairs.push((from, to));
        cur.skip_ws();
        if cur.eat(",") {
            continue;
        }
        if cur.eat("]") {
            return Ok(pairs);
        }
        return Err(cur.error(cur.pos, 1, "unterminated mapping", &["\",\"", "\"]\""]));
    }
}

fn number(cur: &mut Cursor<'_>) -> Result<usize, ParseError> {
    let digits = cur.rest().bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return Err(cur.error(cur.pos, 1, "expected node id", &["number"]));
    }
    let start = cur.pos;
    cur.pos += digits;
    cur.text[start..cur.pos]
        .parse()
        .map_err(|_| cur.error(start, digits, "node id out of range", &[]))
}

fn parse_literal(cur: &mut Cursor<'_>) -> Result<Constraint, ParseError> {
    cur.skip_ws();
    let start = cur.pos;
    if cur.eat_keyword("not") {
        cur.skip_ws();
        if !cur.eat_keyword("exists") {
            return Err(cur.error(cur.pos, 1, "expected \"exists\" after \"not\"", &["\"exists\""]));
        }
        let p = Pattern::from_tree(&cur.pattern()?);
        return Ok(Constraint::Negative(p));
    }
    if cur.eat_keyword("exists") {
        let p = Pattern::from_tree(&cur.pattern()?);
        return Ok(Constraint::Positive(p));
    }
    if cur.eat_keyword("forall") {
        let premise = Pattern::from_tree(&cur.pattern()?);
        cur.skip_ws();
        if !cur.eat("=>") {
            return Err(cur.error(cur.pos, 1, "expected \"=>\"", &["\"=>\""]));
        }
        let conclusion = Pattern::from_tree(&cur.pattern()?);
        let end = cur.pos;
        cur.skip_ws();
        let prefix = if cur.eat_keyword("prefix") {
            let map_start = cur.pos;
            let pairs = parse_mapping(cur)?;
            let map = NodeMap::from_pairs(premise.len(), &pairs).ok_or_else(|| {
                cur.error(map_start, cur.pos - map_start, "mapping must list every premise node exactly once", &[])
            })?;
            if map.as_slice().iter().any(|&j| j >= conclusion.len()) {
                return Err(cur.error(map_start, cur.pos - map_start, "mapping targets a missing conclusion node", &[]));
            }
            map
        } else {
            cur.pos = end;
            let mut candidates = enumerate_prefix_functions(&premise, &conclusion);
            match candidates.len() {
                1 => candidates.pop().unwrap(),
                0 => return Err(cur.error(start, end - start, "no prefix function: 0 candidates", &["prefix"])),
                n => {
                    return Err(cur.error(start, end - start, format!("ambiguous prefix: {n} candidates"), &["prefix"]))
                }
            }
        };
        return Conditional::new(premise, conclusion, prefix)
            .map(Constraint::Conditional)
            .map_err(|e| cur.error(start, cur.pos - start, e.to_string(), &[]));
    }
    Err(cur.error(start, 1, "expected literal", &["\"exists\"", "\"not exists\"", "\"forall\""]))
}

fn parse_clause_line(line: &str) -> Result<Clause, ParseError> {
    let mut cur = Cursor::new(line);
    cur.skip_ws();
    if !cur.eat_keyword("clause") {
        return Err(cur.error(cur.pos, 1, "expected clause declaration", &["\"clause\""]));
    }
    cur.skip_ws();
    let id_len = cur
        .rest()
        .find(|c: char| c.is_whitespace() || c == ':')
        .unwrap_or(cur.rest().len());
    if id_len == 0 {
        return Err(cur.error(cur.pos, 1, "missing clause id", &["identifier"]));
    }
    let id = ClauseId::new(&cur.rest()[..id_len]);
    cur.pos += id_len;
    cur.skip_ws();
    if !cur.eat(":") {
        return Err(cur.error(cur.pos, 1, "expected \":\" after clause id", &["\":\""]));
    }
    cur.skip_ws();
    if cur.eat_keyword("false") {
        cur.skip_ws();
        if !cur.at_end() {
            return Err(cur.error(cur.pos, cur.rest().len(), "unexpected input after false", &["end of line"]));
        }
        return Ok(Clause::new(id, Vec::new()));
    }
    let mut literals = Vec::new();
    loop {
        literals.push(parse_literal(&mut cur)?);
        cur.skip_ws();
        if cur.at_end() {
            return Ok(Clause::new(id, literals));
        }
        if !cur.eat("|") {
            return Err(cur.error(cur.pos, 1, "unexpected input after literal", &["\"|\"", "end of line"]));
        }
    }
}

/// Parses a `.spec` text, reporting one error per offending line.
pub fn parse_spec(text: &str) -> Result<Specification, Vec<ParseError>> {
    let mut clauses = Vec::new();
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    for (index, raw_line) in text.lines().enumerate() {
        let line = match comment_start(raw_line) {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        if line.trim().is_empty() {
            continue;
        }
        let line_no = index + 1;
        match parse_clause_line(line) {
            Ok(clause) => {
                if seen.insert(clause.id.clone()) {
                    clauses.push(clause);
                } else {
                    let pos = line.find(clause.id.as_str()).unwrap_or(0);
                    let mut span = span_at(line, pos, clause.id.as_str().len());
                    span.line = line_no;
                    errors.push(ParseError {
                        message: format!("duplicate clause id {}", clause.id),
                        span,
                        expected: Vec::new(),
                    });
                }
            }
            Err(mut e) => {
                e.span.line = line_no;
                errors.push(e);
            }
        }
    }
    if errors.is_empty() {
        Ok(Specification::new(clauses).expect("ids checked while parsing"))
    } else {
        Err(errors)
    }
}

pub fn format_literal(k: &Constraint) -> String {
    match k {
        Constraint::Positive(p) => format!("exists {}", super::print_pattern(p)),
        Constraint::Negative(p) => format!("not exists {}", super::print_pattern(p)),
        Constraint::Conditional(c) => {
            let (premise, premise_ids) = print_pattern_with_ids(c.premise());
            let (conclusion, conclusion_ids) = print_pattern_with_ids(c.conclusion());
            // rewrite the prefix function into printed node ids
            let mut pairs: Vec<(NodeId, NodeId)> = c
                .prefix()
                .pairs()
                .map(|(x, y)| (premise_ids[x], conclusion_ids[y]))
                .collect();
            pairs.sort_unstable();
            let mapping: Vec<String> = pairs.iter().map(|(x, y)| format!("{x}->{y}")).collect();
            format!("forall {premise} => {conclusion} prefix [{}]", mapping.join(","))
        }
    }
}

/// Clause literals joined by ` | `; the empty clause prints as `false`.
pub fn format_clause_body(cl: &Clause) -> String {
    if cl.is_false() {
        "false".to_string()
    } else {
        cl.literals.iter().map(format_literal).collect::<Vec<_>>().join(" | ")
    }
}

pub fn print_spec(s: &Specification) -> String {
    s.clauses()
        .iter()
        .map(|c| format!("clause {} : {}\n", c.id, format_clause_body(c)))
        .collect()
}
