//! Parse a system, list its equilibria and check a candidate state.
//!
//! `cargo run --example equilibria`

use pmcs::mcs::{applicable_rules, enumerate_equilibria, is_consistent, is_equilibrium};
use pmcs::{dsl, BeliefSet, BeliefState, Config, Literal};

const M2: &str = include_str!("../fixtures/m2.pmcs");
const M1: &str = include_str!("../fixtures/m1.pmcs");

fn set(lits: &[&str]) -> BeliefSet {
    lits.iter().map(|a| Literal::pos(*a)).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = Config::default();
    let p = dsl::parse(M2).map_err(|e| format!("{e:?}"))?;
    let m = p.base();

    for s in enumerate_equilibria(m, None, &cfg)? {
        println!("equilibrium {s}");
    }

    let candidate = BeliefState(vec![
        set(&["a", "c"]),
        set(&["b", "d"]),
        set(&["e", "f"]),
        set(&["g", "h"]),
        set(&["p", "q"]),
    ]);
    let applicable: Vec<String> = applicable_rules(m, &candidate)?
        .into_iter()
        .flatten()
        .map(|r| r.to_string())
        .collect();
    println!("applicable in {candidate}: {}", applicable.join(", "));
    println!(
        "is an equilibrium: {}",
        is_equilibrium(m, &candidate, &cfg)?
    );

    let m1 = dsl::parse(M1).map_err(|e| format!("{e:?}"))?;
    println!("m1 consistent: {}", is_consistent(m1.base(), &cfg)?);
    Ok(())
}
