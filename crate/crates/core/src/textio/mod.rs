//! Text formats: the pattern grammar, native documents, `.spec` files,
//! XML ingestion and the history export.
//!
//! Pattern grammar (whitespace between tokens is insignificant):
//!
//! ```text
//! Pattern := "/" Subtree
//! Subtree := Label Branch*
//! Branch  := "[" Step "]"
//! Step    := Subtree | ".//" Subtree
//! Label   := name | "*"
//! ```

mod history;
mod spec;
mod xml;

use std::fmt;

pub use history::{format_event, format_history};
pub use spec::{format_clause_body, format_literal, parse_spec, print_spec};
pub use xml::{ingest_xml, XmlOptions};

use crate::pattern::{self, Axis, Document, Label, NodeId, Pattern, Tree};

/// 1-based position of an error in its input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

/// Span of `len` bytes starting at byte offset `pos`, clamped into `text`.
pub(crate) fn span_at(text: &str, pos: usize, len: usize) -> SourceSpan {
    let mut pos = pos.min(text.len());
    if pos == text.len() && pos > 0 {
        // point at the last character rather than past the end
        pos = text[..pos].char_indices().last().map(|(i, _)| i).unwrap_or(0);
    }
    let before = &text[..pos];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map(|i| i + 1).unwrap_or(0);
    let column = text[line_start..pos].chars().count() + 1;
    SourceSpan {
        line,
        column,
        length: len.max(1),
    }
}

pub(crate) struct Cursor<'a> {
    pub text: &'a str,
    pub pos: usize,
    pub document_only: bool,
}

impl<'a> Cursor<'a> {
    pub fn new(text: &'a str) -> Cursor<'a> {
        Cursor {
            text,
            pos: 0,
            document_only: false,
        }
    }

    pub fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    pub fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    pub fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    pub fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    /// Consumes `word` only when it is followed by whitespace, `/` or the
    /// end of input.
    pub fn eat_keyword(&mut self, word: &str) -> bool {
        let rest = self.rest();
        if let Some(after) = rest.strip_prefix(word) {
            if after.is_empty() || after.starts_with(|c: char| c.is_whitespace() || c == '/') {
                self.pos += word.len();
                return true;
            }
        }
        false
    }

    pub fn error(&self, pos: usize, len: usize, message: impl Into<String>, expected: &[&str]) -> ParseError {
        ParseError {
            message: message.into(),
            span: span_at(self.text, pos, len),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(c) => format!("unexpected {c:?}"),
            None => "unexpected end of input".to_string(),
        }
    }

    pub fn pattern(&mut self) -> Result<Tree, ParseError> {
        self.skip_ws();
        if !self.eat("/") {
            return Err(self.error(self.pos, 1, self.found(), &["\"/\""]));
        }
        self.skip_ws();
        self.subtree()
    }

    fn subtree(&mut self) -> Result<Tree, ParseError> {
        let label = self.label()?;
        let mut children = Vec::new();
        loop {
            self.skip_ws();
            if !self.eat("[") {
                break;
            }
            self.skip_ws();
            let start = self.pos;
            let axis = if self.eat(".//") {
                if self.document_only {
                    return Err(self.error(start, 3, "descendant edge not allowed in documents", &["label"]));
                }
                self.skip_ws();
                Axis::Descendant
            } else {
                Axis::Child
            };
            let child = self.subtree()?;
            self.skip_ws();
            if !self.eat("]") {
                return Err(self.error(self.pos, 1, self.found(), &["\"[\"", "\"]\""]));
            }
            children.push((axis, child));
        }
        Ok(Tree { label, children })
    }

    fn label(&mut self) -> Result<Label, ParseError> {
        let start = self.pos;
        if self.eat("*") {
            if self.document_only {
                return Err(self.error(start, 1, "wildcard not allowed in documents", &["label"]));
            }
            return Ok(Label::Wildcard);
        }
        let len = self
            .rest()
            .find(|c: char| c.is_whitespace() || pattern::RESERVED_LABEL_CHARS.contains(&c))
            .unwrap_or(self.rest().len());
        if len == 0 {
            let expected: &[&str] = if self.document_only {
                &["label"]
            } else {
                &["label", "\"*\""]
            };
            return Err(self.error(start, 1, self.found(), expected));
        }
        self.pos += len;
        Ok(Label::Name(self.text[start..start + len].to_string()))
    }
}

fn parse_whole(text: &str, document_only: bool) -> Result<Pattern, ParseError> {
    let mut cur = Cursor::new(text);
    cur.document_only = document_only;
    let tree = cur.pattern()?;
    cur.skip_ws();
    if !cur.at_end() {
        return Err(cur.error(cur.pos, cur.rest().len(), "unexpected trailing input", &["\"[\"", "end of input"]));
    }
    Ok(Pattern::from_tree(&tree))
}

/// Parses a pattern such as `/a[b][.//*[e][d]]`. Branch order in the text
/// fixes the preorder node ids.
pub fn parse_pattern(text: &str) -> Result<Pattern, ParseError> {
    parse_whole(text, false)
}

/// Parses a native document: the pattern grammar without `*` or `.//`.
pub fn parse_document_native(text: &str) -> Result<Document, ParseError> {
    let p = parse_whole(text, true)?;
    Ok(pattern::as_document(&p).expect("grammar excludes wildcards and descendant edges"))
}

/// Prints a pattern with siblings in canonical order, so isomorphic
/// patterns print identically.
pub fn print_pattern(p: &Pattern) -> String {
    print_pattern_with_ids(p).0
}

/// Like [`print_pattern`], also returning for each node its preorder id in
/// the printed text.
pub fn print_pattern_with_ids(p: &Pattern) -> (String, Vec<NodeId>) {
    let keys = pattern::subtree_keys(p, None);
    let mut out = String::from("/");
    let mut ids = vec![0; p.len()];
    let mut next = 0;
    fn walk(p: &Pattern, n: NodeId, keys: &[Vec<u8>], out: &mut String, ids: &mut [NodeId], next: &mut NodeId) {
        ids[n] = *next;
        *next += 1;
        out.push_str(&p.label(n).to_string());
        let mut kids: Vec<NodeId> = p.children(n).to_vec();
        kids.sort_by(|&x, &y| (p.axis(x), &keys[x]).cmp(&(p.axis(y), &keys[y])));
        for c in kids {
            out.push('[');
            if p.axis(c) == Some(Axis::Descendant) {
                out.push_str(".//");
            }
            walk(p, c, keys, out, ids, next);
            out.push(']');
        }
    }
    walk(p, p.root(), &keys, &mut out, &mut ids, &mut next);
    (out, ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{as_document, is_isomorphic};

    #[test]
    fn parses_sample_pattern() {
        let p = parse_pattern("/a[b][.//*[e][d]]").unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(p.label(2), &Label::Wildcard);
        assert_eq!(p.axis(2), Some(Axis::Descendant));
        assert_eq!(p.axis(1), Some(Axis::Child));
        assert_eq!(p.children(2), &[3, 4]);
    }

    #[test]
    fn parses_small_patterns() {
        assert_eq!(parse_pattern("/a").unwrap().len(), 1);
        let q = parse_pattern("/a[.//e[f]]").unwrap();
        assert_eq!(q.len(), 3);
        assert_eq!(q.axis(1), Some(Axis::Descendant));
        assert_eq!(q.axis(2), Some(Axis::Child));
        let spaced = parse_pattern("  / a [ .// e [ f ] ]\n").unwrap();
        assert_eq!(spaced, q);
    }

    #[test]
    fn parse_errors_point_into_input() {
        let e = parse_pattern("a").unwrap_err();
        assert_eq!(e.span, SourceSpan { line: 1, column: 1, length: 1 });
        let e = parse_pattern("/a[b").unwrap_err();
        assert_eq!(e.span.column, 4);
        assert!(e.message.contains("end of input"));
        let e = parse_pattern("/a]").unwrap_err();
        assert_eq!(e.span.column, 3);
        let e = parse_pattern("/a[\n]").unwrap_err();
        assert_eq!((e.span.line, e.span.column), (2, 1));
        assert!(parse_pattern("").is_err());
        assert!(parse_pattern("/").is_err());
    }

    #[test]
    fn document_syntax() {
        let t = parse_document_native("/a[b[g]][e[f[e][d]]]").unwrap();
        assert_eq!(t.len(), 7);
        assert!(as_document(t.pattern()).is_ok());
        let e = parse_document_native("/a[.//b]").unwrap_err();
        assert_eq!(e.message, "descendant edge not allowed in documents");
        let e = parse_document_native("/a[*]").unwrap_err();
        assert_eq!(e.message, "wildcard not allowed in documents");
        assert_eq!(parse_document_native("/a").unwrap().len(), 1);
    }

    #[test]
    fn printing_is_canonical() {
        assert_eq!(print_pattern(&parse_pattern("/a").unwrap()), "/a");
        assert_eq!(print_pattern(&parse_pattern("/a[c][b]").unwrap()), "/a[b][c]");
        let fig = parse_pattern("/a[b][.//*[e][d]]").unwrap();
        let printed = print_pattern(&fig);
        assert_eq!(printed, "/a[b][.//*[d][e]]");
        assert_eq!(print_pattern(&parse_pattern(&printed).unwrap()), printed);
        assert!(is_isomorphic(&parse_pattern(&printed).unwrap(), &fig));
    }

    #[test]
    fn printed_ids_follow_printed_preorder() {
        let p = parse_pattern("/a[c][b]").unwrap();
        let (text, ids) = print_pattern_with_ids(&p);
        assert_eq!(text, "/a[b][c]");
        assert_eq!(ids, vec![0, 2, 1]);
    }
}
