//! Graphviz export. Each edge is drawn from side 0 to side 1 with both end
//! labels; a filled dot marks a unit end.

use std::fmt::Write;

use crate::graph::LabeledGraph;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn to_dot(g: &LabeledGraph) -> String {
    let mut out = String::from("digraph G {\n");
    for v in g.vertices() {
        writeln!(out, "  {};", quote(v.as_str())).unwrap();
    }
    for (id, [a, b]) in g.edges() {
        let mark = |l: i64| if l.abs() == 1 { "dot" } else { "none" };
        writeln!(
            out,
            "  {} -> {} [label={}, taillabel=\"{}\", headlabel=\"{}\", dir=both, arrowtail={}, arrowhead={}];",
            quote(a.vertex.as_str()),
            quote(b.vertex.as_str()),
            quote(id.as_str()),
            a.label,
            b.label,
            mark(a.label),
            mark(b.label),
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marks_unit_ends() {
        let dot = to_dot(&LabeledGraph::from_edges(&[("e", "u", 1, "w", 3)]));
        assert!(dot.contains(r#""u" -> "w" [label="e", taillabel="1", headlabel="3", dir=both, arrowtail=dot, arrowhead=none];"#));
        assert!(dot.starts_with("digraph G {\n") && dot.ends_with("}\n"));
    }
}
