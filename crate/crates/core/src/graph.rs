//! Information-flow graphs.
//!
//! There is an edge `Ci -> Cj` when some bridge rule of `Cj` reads from `Ci`.
//! Edges inside a stratum and self-loops are kept.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::mcs::McsSystem;
use crate::pmcs::PmcsSystem;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlowGraph {
    /// Context names in index order.
    pub nodes: Vec<String>,
    /// 1-based `(from, to)` pairs, sorted.
    pub edges: BTreeSet<(usize, usize)>,
}

impl FlowGraph {
    pub fn of_mcs(m: &McsSystem) -> Self {
        let nodes = m.contexts().iter().map(|c| c.name.clone()).collect();
        let edges = m
            .contexts()
            .iter()
            .enumerate()
            .flat_map(|(j, c)| {
                c.rules
                    .iter()
                    .flat_map(|r| r.cnt())
                    .map(move |i| (i, j + 1))
            })
            .collect();
        FlowGraph { nodes, edges }
    }

    pub fn of(p: &PmcsSystem) -> Self {
        Self::of_mcs(p.base())
    }

    /// Edges as name pairs.
    pub fn named_edges(&self) -> Vec<(&str, &str)> {
        self.edges
            .iter()
            .map(|&(i, j)| (self.nodes[i - 1].as_str(), self.nodes[j - 1].as_str()))
            .collect()
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT digraph with one cluster per stratum.
pub fn export_flow_graph(p: &PmcsSystem) -> String {
    let g = FlowGraph::of(p);
    let mut out = String::from("digraph pmcs {\n  rankdir=TB;\n");
    for (i, stratum) in p.strata().iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_stratum_{} {{", i + 1);
        let _ = writeln!(out, "    label=\"stratum {}\";", i + 1);
        for &k in stratum {
            let _ = writeln!(out, "    {};", quote(&g.nodes[k - 1]));
        }
        out.push_str("  }\n");
    }
    for (from, to) in g.named_edges() {
        let _ = writeln!(out, "  {} -> {};", quote(from), quote(to));
    }
    out.push_str("}\n");
    out
}
