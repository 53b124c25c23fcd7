//! Build a system in code, write it in the text format and read it back.
//!
//! `cargo run --example build_and_serialize`

use pmcs::logic::{AspProgram, AspRule, Formula, PropKb};
use pmcs::{dsl, BodyRef, BridgeRule, Context, KnowledgeBase, Literal, McsSystem, PmcsSystem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sensor = Context::new(
        "sensor",
        KnowledgeBase::Prop(PropKb::new(vec![Formula::atom("hot")])),
        vec![],
    );
    let planner = Context::new(
        "planner",
        KnowledgeBase::Asp(AspProgram::new(vec![AspRule::new(
            Literal::pos("cool"),
            vec![Literal::pos("alarm")],
            vec![Literal::pos("override")],
        )])),
        vec![BridgeRule::new(
            "r1",
            2,
            Literal::pos("alarm"),
            vec![BodyRef::new(1, Literal::pos("hot"))],
            vec![],
        )],
    )
    .with_atoms(["override"]);
    let p = PmcsSystem::new(
        McsSystem::new(vec![sensor, planner])?,
        vec![vec![1], vec![2]],
    )?;

    let text = dsl::serialize(&p);
    print!("{text}");
    let back = dsl::parse(&text).map_err(|e| format!("{e:?}"))?;
    assert_eq!(back, p);

    match dsl::parse("stratum { context x logic prop { kb { a $ } br { r1: (2:a) <- . } } }") {
        Ok(_) => unreachable!(),
        Err(errors) => {
            for e in errors {
                eprintln!("{e}");
            }
        }
    }
    Ok(())
}
