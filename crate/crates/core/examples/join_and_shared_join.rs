//! Joins two patterns, then joins a pattern with the conclusion of a
//! conditional along each embedding of its premise.

use xsat_core::algebra::{join, shared_join};
use xsat_core::morphism::{enumerate_monomorphisms, NodeMap};
use xsat_core::textio::{parse_pattern, print_pattern};

fn main() {
    let pairs = [("/a[b]", "/a[c]"), ("/a[.//b]", "/a[c]"), ("/a[.//b]", "/*[.//c]"), ("/a", "/b")];
    for (x, y) in pairs {
        let results = join(&parse_pattern(x).unwrap(), &parse_pattern(y).unwrap()).expect("join");
        let printed: Vec<String> = results.iter().map(|r| print_pattern(&r.pattern)).collect();
        println!("join {x} {y} = {{{}}}", printed.join(", "));
    }

    let p1 = parse_pattern("/a[e][b[e]]").unwrap();
    let premise = parse_pattern("/a[.//e]").unwrap();
    let conclusion = parse_pattern("/a[.//e[f]]").unwrap();
    let prefix = NodeMap::new(vec![0, 1]);
    for m in enumerate_monomorphisms(&premise, &p1) {
        let results = shared_join(&p1, &conclusion, &premise, &prefix, &m).expect("shared join");
        for r in results {
            println!("shared join via {m}: {}", print_pattern(&r.pattern));
        }
    }
}
