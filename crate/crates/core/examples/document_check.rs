//! Checks a document against a specification clause by clause.

use xsat_core::logic::check_document;
use xsat_core::textio::{parse_document_native, parse_spec};

const SPEC: &str = "\
clause c1 : exists /a[b][.//*[e][d]]
clause c2 : forall /a[.//e] => /a[.//e[f]] prefix [0->0,1->1]
";

fn main() {
    let s = parse_spec(SPEC).expect("spec");
    let t = parse_document_native("/a[b[g]][e[f[e][d]]]").expect("document");
    let report = check_document(&t, &s);
    for (id, ok) in &report.per_clause {
        println!("{id} {}", if *ok { "TRUE" } else { "FALSE" });
    }
    println!("overall {}", if report.overall { "TRUE" } else { "FALSE" });
}
