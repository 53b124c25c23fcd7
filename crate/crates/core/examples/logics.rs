//! The two built-in logics on their own.
//!
//! `cargo run --example logics`

use pmcs::logic::{asp_acc, prop_acc, AspProgram, AspRule, Formula, PropKb};
use pmcs::{Literal, Signature};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sig: Signature = ["a", "b", "c"].into_iter().collect();

    // a, a -> b: entails a and b, says nothing about c
    let kb = PropKb::new(vec![
        Formula::atom("a"),
        Formula::Implies(Box::new(Formula::atom("a")), Box::new(Formula::atom("b"))),
    ]);
    println!(
        "prop {:?} -> {:?}",
        kb.formulas
            .iter()
            .map(|f| f.to_string())
            .collect::<Vec<_>>(),
        show(&prop_acc(&kb, &sig)?)
    );

    // unsatisfiable theories accept nothing
    let bad = PropKb::new(vec![
        Formula::atom("c"),
        Formula::Not(Box::new(Formula::atom("c"))),
    ]);
    println!("prop {{c, ~c}} -> {:?}", show(&prop_acc(&bad, &sig)?));

    // a <- not b. b <- not a. has two answer sets
    let even = AspProgram::new(vec![
        AspRule::new(Literal::pos("a"), vec![], vec![Literal::pos("b")]),
        AspRule::new(Literal::pos("b"), vec![], vec![Literal::pos("a")]),
    ]);
    println!(
        "asp {{a <- not b. b <- not a.}} -> {:?}",
        show(&asp_acc(&even, &sig, 16)?)
    );

    // a <- not a. has none
    let odd = AspProgram::new(vec![AspRule::new(
        Literal::pos("a"),
        vec![],
        vec![Literal::pos("a")],
    )]);
    println!(
        "asp {{a <- not a.}} -> {:?}",
        show(&asp_acc(&odd, &sig, 16)?)
    );

    // classical negation and a constraint
    let neg = AspProgram::new(vec![
        AspRule::fact(Literal::neg("c")),
        AspRule::new(Literal::pos("a"), vec![Literal::neg("c")], vec![]),
        AspRule::constraint(vec![Literal::pos("b")], vec![]),
    ]);
    println!(
        "asp {{-c. a <- -c. <- b.}} -> {:?}",
        show(&asp_acc(&neg, &sig, 16)?)
    );
    Ok(())
}

fn show(sets: &[pmcs::BeliefSet]) -> Vec<String> {
    sets.iter().map(|s| s.to_string()).collect()
}
