//! Inconsistency explanations and the union identities linking them to
//! diagnoses.
//!
//! `cargo run --example explain`

use pmcs::inconsistency::Analyzer;
use pmcs::{dsl, Config, RuleId};
use std::collections::BTreeSet;

const M3: &str = include_str!("../fixtures/m3.pmcs");

fn show(s: &BTreeSet<RuleId>) -> String {
    format!(
        "{{{}}}",
        s.iter().map(RuleId::as_str).collect::<Vec<_>>().join(", ")
    )
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = Analyzer::new(
        &dsl::parse(M3).map_err(|e| format!("{e:?}"))?,
        &Config::default(),
    )?;

    for e in a.minimal_explanations()? {
        println!(
            "caused by {} unless one of {} is forced",
            show(&e.cause),
            show(&e.protected)
        );
    }
    for e in a.s_explanations_min()? {
        println!("s-explanation {}", show(&e.rules));
    }
    for e in a.c_explanations_min()? {
        println!("c-explanation {}", show(&e.rules));
    }

    let report = a.duality_check()?;
    for c in &report.checks {
        println!("{}: {}", c.name, if c.holds { "holds" } else { "violated" });
    }
    Ok(())
}
