//! Runs the first version of the refutation procedure on a few small
//! specifications and prints their histories.

use xsat_core::refutation::{saturate_v1, RunConfig};
use xsat_core::textio::{format_history, parse_spec};

fn main() {
    let specs = [
        "clause c1 : exists /a[b]\nclause c2 : not exists /a[.//b]",
        "clause c1 : exists /a\nclause c2 : exists /b",
        "clause c1 : exists /a[.//b]\nclause c2 : forall /a[.//b] => /a[.//b[c]] prefix [0->0,1->1]\nclause c3 : not exists /a[.//c]",
        "clause c1 : exists /a",
    ];
    for text in specs {
        let s = parse_spec(text).expect("spec");
        let result = saturate_v1(&s, &RunConfig::default());
        println!("{text}\n--");
        print!("{}", format_history(&result.history));
        println!();
    }
}
