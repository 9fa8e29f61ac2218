//! XML ingestion into documents.

use super::{ParseError, SourceSpan};
use crate::pattern::{self, is_valid_name, Axis, Document, Label, Pattern, Tree};

/// Which non-element parts of an XML file become nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct XmlOptions {
    /// Each attribute becomes a child `@name` with one child holding the value.
    pub attrs: bool,
    /// Each non-blank text run becomes a child labelled by the trimmed text.
    pub text: bool,
}

fn xml_error(message: impl Into<String>, pos: roxmltree::TextPos) -> ParseError {
    ParseError {
        message: message.into(),
        span: SourceSpan {
            line: pos.row as usize,
            column: pos.col as usize,
            length: 1,
        },
        expected: Vec::new(),
    }
}

fn label_for(value: &str, what: &str, pos: roxmltree::TextPos) -> Result<Label, ParseError> {
    if is_valid_name(value) {
        Ok(Label::Name(value.to_string()))
    } else {
        Err(xml_error(format!("{what} {value:?} cannot be used as a label"), pos))
    }
}

fn convert(node: roxmltree::Node<'_, '_>, doc: &roxmltree::Document<'_>, opts: XmlOptions) -> Result<Tree, ParseError> {
    let pos = doc.text_pos_at(node.range().start);
    let name = node.tag_name();
    if name.namespace().is_some() {
        return Err(xml_error("namespaces are not supported", pos));
    }
    let mut tree = Tree::leaf(label_for(name.name(), "element name", pos)?);
    if opts.attrs {
        for attr in node.attributes() {
            if attr.namespace().is_some() {
                return Err(xml_error("namespaced attributes are not supported", pos));
            }
            let mut holder = Tree::leaf(label_for(&format!("@{}", attr.name()), "attribute", pos)?);
            holder
                .children
                .push((Axis::Child, Tree::leaf(label_for(attr.value(), "attribute value", pos)?)));
            tree.children.push((Axis::Child, holder));
        }
    }
    for child in node.children() {
        if child.is_element() {
            tree.children.push((Axis::Child, convert(child, doc, opts)?));
        } else if child.is_text() && opts.text {
            let text = child.text().unwrap_or("").trim();
            if !text.is_empty() {
                let tpos = doc.text_pos_at(child.range().start);
                tree.children.push((Axis::Child, Tree::leaf(label_for(text, "text", tpos)?)));
            }
        }
    }
    Ok(tree)
}

/// Reads an XML document as a labelled tree. Comments and processing
/// instructions are skipped; DTDs and namespaces are rejected.
pub fn ingest_xml(bytes: &[u8], opts: XmlOptions) -> Result<Document, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ParseError {
        message: format!("input is not UTF-8: {e}"),
        span: super::span_at(&String::from_utf8_lossy(bytes), e.valid_up_to(), 1),
        expected: Vec::new(),
    })?;
    let doc = roxmltree::Document::parse(text).map_err(|e| xml_error(e.to_string(), e.pos()))?;
    let tree = convert(doc.root_element(), &doc, opts)?;
    Ok(pattern::as_document(&Pattern::from_tree(&tree)).expect("XML trees only use child edges and names"))
}
