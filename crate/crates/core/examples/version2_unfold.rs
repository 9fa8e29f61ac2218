//! A specification that only the second version refutes: the descendant
//! edge has to be unfolded before the negative literals apply.

use xsat_core::refutation::{run, RunConfig};
use xsat_core::textio::{format_history, parse_spec};

const SPEC: &str = "\
clause c1 : exists /a[.//b]
clause c2 : not exists /a[b]
clause c3 : not exists /a[*[.//b]]
";

fn main() {
    let s = parse_spec(SPEC).expect("spec");
    for version in [1, 2] {
        let cfg = RunConfig {
            version,
            unfold_rounds: 1,
            ..RunConfig::default()
        };
        let result = run(&s, &cfg, None);
        println!("version {version}: {}", result.verdict);
        print!("{}", format_history(&result.history));
    }
}
