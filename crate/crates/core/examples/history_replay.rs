//! Replays a recorded run and shows that a tampered history is rejected.

use xsat_core::refutation::{replay, run, EventKind, RunConfig};
use xsat_core::textio::{format_history, parse_spec, print_spec};

fn main() {
    let s = parse_spec("clause c1 : exists /a[.//b] | exists /a[c]\nclause c2 : not exists /a[.//b]\nclause c3 : not exists /a[c]")
        .expect("spec");
    let result = run(&s, &RunConfig::default(), None);
    print!("{}", format_history(&result.history));

    let replayed = replay(&s, &result.history.events).expect("replay");
    println!("replayed clauses:\n{}", print_spec(&replayed));

    let mut events = result.history.events.clone();
    if let Some(EventKind::Infer { premises, .. }) = events.first_mut().map(|e| &mut e.kind) {
        premises[0].1 += 1;
    }
    match replay(&s, &events) {
        Ok(_) => println!("tampered history accepted"),
        Err(e) => println!("tampered history rejected: {e}"),
    }
}
