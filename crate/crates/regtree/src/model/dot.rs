use std::fmt::{Display, Write};

use super::setsys::{SetSystem, Target};

/// Graphviz rendering: initial vertices are doubled, roots are boxed, variables are
/// plain text nodes.
pub fn to_dot<L: Display>(s: &SetSystem<L>, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", escape(name)).unwrap();
    for (i, v) in s.vertices.iter().enumerate() {
        let shape = match (v.initial, v.root) {
            (true, _) => "doublecircle",
            (false, true) => "box",
            _ => "circle",
        };
        writeln!(out, "  n{i} [label=\"{}\\n{}\", shape={shape}];", escape(&v.id), escape(&v.label.to_string())).unwrap();
    }
    for x in 1..=s.rank {
        writeln!(out, "  x{x} [label=\"x{x}\", shape=plaintext];").unwrap();
    }
    for e in &s.edges {
        let dst = match e.tgt {
            Target::Vertex(w) => format!("n{w}"),
            Target::Var(x) => format!("x{x}"),
        };
        writeln!(out, "  n{} -> {dst} [label=\"{}\"];", e.src, e.dir).unwrap();
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
