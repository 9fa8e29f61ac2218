//! Finds every embedding of the pattern `/a[b][.//*[e][d]]` into the
//! document `/a[b[g]][e[f[e][d]]]`.

use xsat_core::morphism::enumerate_monomorphisms;
use xsat_core::textio::{parse_document_native, parse_pattern};

fn main() {
    let p = parse_pattern("/a[b][.//*[e][d]]").expect("pattern");
    let t = parse_document_native("/a[b[g]][e[f[e][d]]]").expect("document");
    let maps = enumerate_monomorphisms(&p, &t);
    for h in &maps {
        println!("{h}");
        for (x, y) in h.pairs() {
            println!("  {x} {} -> {y} {}", p.label(x), t.label(y));
        }
    }
    println!("count={}", maps.len());
}
