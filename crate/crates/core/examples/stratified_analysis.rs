//! Maximal consistent level, degree of inconsistency and the maximal
//! consistent section of a stratified system.
//!
//! `cargo run --example stratified_analysis`

use pmcs::pmcs::{
    analyze, cut_consistency_profile, is_l_lt_equilibrium, maximal_consistent_section,
};
use pmcs::{dsl, Config, SearchMode};

const M3: &str = include_str!("../fixtures/m3.pmcs");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = dsl::parse(M3).map_err(|e| format!("{e:?}"))?;
    let cfg = Config::default();

    println!("cut consistency: {:?}", cut_consistency_profile(&p, &cfg)?);

    let report = analyze(&p, &cfg)?;
    println!(
        "level {} of {}, DI = {}",
        report.level, report.strata, report.di
    );
    let linear = analyze(
        &p,
        &Config {
            search: SearchMode::Linear,
            ..cfg.clone()
        },
    )?;
    assert_eq!(linear.level, report.level);

    if let Some(w) = &report.witness {
        println!(
            "witness {} (suffix unconstrained: {})",
            w.state, w.suffix_unconstrained
        );
        println!(
            "is a {}<-equilibrium: {}",
            report.level,
            is_l_lt_equilibrium(&p, &w.state, report.level, &cfg)?
        );
    }

    if let Some((level, section)) = maximal_consistent_section(&p, &cfg)? {
        println!(
            "maximal consistent section ({level} strata):\n{}",
            dsl::serialize(&section)
        );
    }
    Ok(())
}
