//! Information flow between contexts, as DOT.
//!
//! `cargo run --example flow_graph | dot -Tsvg > flow.svg`

use pmcs::dsl;
use pmcs::graph::{export_flow_graph, FlowGraph};

const M2: &str = include_str!("../fixtures/m2.pmcs");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = dsl::parse(M2).map_err(|e| format!("{e:?}"))?;
    for (from, to) in FlowGraph::of(&p).named_edges() {
        eprintln!("{from} -> {to}");
    }
    print!("{}", export_flow_graph(&p));
    Ok(())
}
