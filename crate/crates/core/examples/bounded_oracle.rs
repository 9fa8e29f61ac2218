//! Searches small documents for a model of a specification.

use xsat_core::oracle::{bounded_sat, BoundedSat, DocumentSpace, OracleBound};
use xsat_core::textio::{parse_spec, print_pattern};

fn main() {
    let specs = [
        "clause c1 : exists /a[.//e[f]]\nclause c2 : forall /a[.//e] => /a[.//e[f]] prefix [0->0,1->1]",
        "clause c1 : exists /a\nclause c2 : exists /b",
        "clause c1 : exists /a[b] | exists /a[c]\nclause c2 : not exists /a[b]",
    ];
    for text in specs {
        let s = parse_spec(text).expect("spec");
        let bound = OracleBound::for_spec(&s, 5).expect("bound");
        let space = DocumentSpace::new(&bound);
        print!("labels {:?}, {} documents: ", bound.labels(), space.len());
        match bounded_sat(&s, &bound) {
            BoundedSat::Witness(w) => println!("WITNESS {}", print_pattern(&w.document)),
            BoundedSat::NoModelWithinBound => println!("NO-MODEL-WITHIN-BOUND"),
        }
    }
}
