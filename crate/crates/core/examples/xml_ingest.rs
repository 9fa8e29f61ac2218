//! Reads XML into documents, optionally keeping attributes and text.

use xsat_core::textio::{ingest_xml, print_pattern, XmlOptions};

const XML: &str = r#"<library><book lang="en"><title>Dune</title></book><!-- note --><book/></library>"#;

fn main() {
    for (attrs, text) in [(false, false), (true, false), (true, true)] {
        let doc = ingest_xml(XML.as_bytes(), XmlOptions { attrs, text }).expect("xml");
        println!("attrs={attrs} text={text}: {}", print_pattern(&doc));
    }
    match ingest_xml(b"<a><b></a>", XmlOptions::default()) {
        Ok(_) => unreachable!(),
        Err(e) => println!("error: {e}"),
    }
}
