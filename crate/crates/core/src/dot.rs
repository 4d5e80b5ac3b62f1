//! Graphviz export of the layered network.

use std::fmt::Write;

use crate::planner::CostTable;
use crate::timexp::{EdgeKind, LayeredNetwork};

fn fmt_cost(x: f64) -> String {
    if x.is_finite() {
        format!("{:.2}", x)
    } else {
        "inf".to_string()
    }
}

/// DOT text with one rank per layer. With `costs`, each node also shows its
/// exact cost in red and its heuristic in blue.
pub fn export_dot(layered: &LayeredNetwork, costs: Option<&CostTable>) -> String {
    let mut out = String::new();
    out.push_str("digraph layered {\n  rankdir=LR;\n  node [shape=circle, fontsize=10];\n");
    for t in 0..layered.layer_count() {
        let _ = writeln!(out, "  subgraph layer_{t} {{\n    rank=same;");
        for col in 0..layered.width() {
            let idx = t * layered.width() + col;
            let node = layered.node(idx);
            let exit_attr = if layered.is_exit_copy(idx) {
                ", peripheries=2"
            } else {
                ""
            };
            match costs {
                Some(c) => {
                    let _ = writeln!(
                        out,
                        "    \"{node}\" [label=<{node}<br/><font color=\"red\">{}</font> <font color=\"blue\">{}</font>>{exit_attr}];",
                        fmt_cost(c.g(idx)),
                        fmt_cost(c.h(idx)),
                    );
                }
                None => {
                    let _ = writeln!(out, "    \"{node}\" [label=\"{node}\"{exit_attr}];");
                }
            }
        }
        out.push_str("  }\n");
    }
    for e in layered.edges() {
        let style = match e.kind {
            EdgeKind::Travel => "",
            EdgeKind::Wait => " [style=dashed]",
        };
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\"{style};",
            layered.node(e.from),
            layered.node(e.to)
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_network;
    use crate::planner::cost_table;
    use crate::strategies::MixedStrategy;
    use crate::timexp::build_layered;
    use crate::{FIXTURE_NETWORK, FIXTURE_STRATEGIES};

    #[test]
    fn dot_is_deterministic_and_annotated() {
        let net = parse_network(FIXTURE_NETWORK).unwrap();
        let mix = MixedStrategy::from_json(&net, FIXTURE_STRATEGIES).unwrap();
        let l = build_layered(&net);
        let plain = export_dot(&l, None);
        assert_eq!(plain, export_dot(&l, None));
        assert!(plain.contains("\"0_6\" -> \"2_3\";"));
        assert!(plain.contains("\"5_5\" -> \"6_5\" [style=dashed];"));
        let c = cost_table(&l, mix.strategies(), mix.probs()).unwrap();
        let annotated = export_dot(&l, Some(&c));
        assert!(annotated
            .contains("\"2_3\" [label=<2_3<br/><font color=\"red\">0.30</font> <font color=\"blue\">0.70</font>>];"));
    }
}
