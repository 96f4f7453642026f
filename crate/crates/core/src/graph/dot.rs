use std::fmt::Write;

use super::{EdgeSet, Graph};

/// Graphviz rendering. Edges in `highlight` are drawn thick and gray, the
/// rest thin and black.
pub fn to_dot(g: &Graph, name: &str, highlight: Option<&EdgeSet>) -> String {
    let mut out = String::new();
    let id: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    writeln!(out, "graph {} {{", if id.is_empty() { "N" } else { &id }).unwrap();
    writeln!(out, "  node [shape=circle];").unwrap();
    for v in 0..g.vertex_count() {
        writeln!(out, "  {v};").unwrap();
    }
    for (e, (u, v)) in g.edges() {
        let style = match highlight {
            Some(h) if h.contains(e) => "color=gray, penwidth=2",
            _ => "color=black",
        };
        writeln!(out, "  {u} -- {v} [label=\"{}\", {style}];", e.0).unwrap();
    }
    out.push_str("}\n");
    out
}
