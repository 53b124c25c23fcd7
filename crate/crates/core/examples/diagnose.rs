//! Diagnoses: which bridge rules to drop or force to restore consistency.
//!
//! `cargo run --example diagnose`

use pmcs::inconsistency::{Analyzer, DiagnosisFamily};
use pmcs::{dsl, Config, RuleId};
use std::collections::BTreeSet;

const M1: &str = include_str!("../fixtures/m1.pmcs");
const M3: &str = include_str!("../fixtures/m3.pmcs");

fn show(s: &BTreeSet<RuleId>) -> String {
    format!(
        "{{{}}}",
        s.iter().map(RuleId::as_str).collect::<Vec<_>>().join(", ")
    )
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = Config::default();

    let m1 = Analyzer::new(&dsl::parse(M1).map_err(|e| format!("{e:?}"))?, &cfg)?;
    println!("m1 minimal diagnoses:");
    for d in m1.minimal_diagnoses()? {
        println!(
            "  remove {}, make unconditional {}",
            show(&d.remove),
            show(&d.unconditional)
        );
    }
    println!("m1 s-diagnoses:");
    for d in m1.s_diagnoses_min()? {
        println!("  {}", show(&d.rules));
    }

    let m3 = Analyzer::new(&dsl::parse(M3).map_err(|e| format!("{e:?}"))?, &cfg)?;
    println!(
        "m3 maximal consistent level: {}",
        m3.maximal_consistent_level()?
    );
    println!("m3 c-diagnoses:");
    for d in m3.c_diagnoses()? {
        println!("  {}", show(&d.rules));
    }
    println!("m3 minimal diagnoses that spare the section:");
    for d in m3.compatible_diagnoses(DiagnosisFamily::Minimal)? {
        println!("  ({}, {})", show(&d.remove), show(&d.unconditional));
    }
    Ok(())
}
