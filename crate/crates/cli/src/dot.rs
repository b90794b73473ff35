//! Graphviz renders of an original subgraph next to its reconstruction.
//! In the reconstructed panel, edges that were added are solid red and
//! edges that went missing are dotted red.

use std::fmt::Write;

use restore_core::DiGraph;

pub const MAX_DOT_NODES: usize = 300;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// `None` when the graph is too large to be legible.
pub fn render(title: &str, original: &DiGraph, reconstructed: &DiGraph) -> Option<String> {
    if original.node_count() > MAX_DOT_NODES {
        return None;
    }
    let mut s = String::new();
    let _ = writeln!(s, "digraph {} {{", quote(title));
    s.push_str("  rankdir=LR;\n  node [shape=ellipse, fontsize=10];\n");

    s.push_str("  subgraph cluster_original {\n    label=\"original\";\n");
    for (i, l) in original.labels().iter().enumerate() {
        let _ = writeln!(s, "    o{i} [label={}];", quote(l));
    }
    for (a, b) in original.edges() {
        let _ = writeln!(s, "    o{a} -> o{b};");
    }
    s.push_str("  }\n");

    s.push_str("  subgraph cluster_reconstructed {\n    label=\"reconstructed\";\n");
    for (i, l) in original.labels().iter().enumerate() {
        let _ = writeln!(s, "    r{i} [label={}];", quote(l));
    }
    let in_recon = |a: usize, b: usize| {
        let (la, lb) = (original.label(a), original.label(b));
        reconstructed
            .index_of(la)
            .zip(reconstructed.index_of(lb))
            .is_some_and(|(x, y)| reconstructed.has_edge(x, y))
    };
    for (a, b) in original.edges() {
        if in_recon(a, b) {
            let _ = writeln!(s, "    r{a} -> r{b};");
        } else {
            let _ = writeln!(s, "    r{a} -> r{b} [color=red, style=dotted];");
        }
    }
    for (x, y) in reconstructed.edges() {
        let (lx, ly) = (reconstructed.label(x), reconstructed.label(y));
        match (original.index_of(lx), original.index_of(ly)) {
            (Some(a), Some(b)) if original.has_edge(a, b) => {}
            (Some(a), Some(b)) => {
                let _ = writeln!(s, "    r{a} -> r{b} [color=red];");
            }
            _ => {}
        }
    }
    s.push_str("  }\n}\n");
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use restore_core::graph::build_graph;

    #[test]
    fn colours_follow_the_diff() {
        let g = build_graph([("a", "b"), ("b", "c")]).unwrap();
        let same = render("t", &g, &g).unwrap();
        assert!(!same.contains("red"));
        let r = build_graph([("a", "b"), ("c", "a")]).unwrap();
        let d = render("t", &g, &r).unwrap();
        assert!(d.contains("r1 -> r2 [color=red, style=dotted];"));
        assert!(d.contains("r2 -> r0 [color=red];"));
    }

    #[test]
    fn large_graphs_are_not_rendered() {
        let edges: Vec<(String, String)> = (0..301).map(|i| (format!("n{i}"), format!("n{}", i + 1))).collect();
        let g = build_graph(edges).unwrap();
        assert!(render("t", &g, &g).is_none());
    }
}
