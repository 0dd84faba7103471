use std::collections::BTreeSet;
use std::fmt::Write;

use crate::sit::{CategoryId, ClassificationGraph, MemoryGraph};

#[derive(Debug, Clone, Copy, Default)]
pub struct DotOptions<'a> {
    /// Drop a degree-1 edge `a → c` when degree-1 edges `a → b → c` exist,
    /// unless `b` sits on a degree-1 cycle with `a` or `c`.
    pub reduce: bool,
    /// Highlight the categories of this classification with their `p` and `d`.
    pub classification: Option<&'a ClassificationGraph>,
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn node(id: CategoryId) -> String {
    format!("c{}", id.0)
}

/// Graphviz rendering of `memory`. Edges point from the implying (child)
/// category to the implied (parent) one; categories without a parent also
/// point to the root.
pub fn memory_to_dot(memory: &MemoryGraph, opts: DotOptions<'_>) -> String {
    let one = |c: CategoryId, p: CategoryId| memory.edge(c, p).is_some_and(|d| d.value() >= 1.0);
    let mut hidden = BTreeSet::new();
    if opts.reduce {
        for e in memory.edges().filter(|e| e.degree.value() >= 1.0) {
            let (a, c) = (e.child, e.parent);
            let redundant = memory
                .categories()
                .map(|b| b.id())
                .any(|b| b != a && b != c && one(a, b) && one(b, c) && !one(b, a) && !one(c, b));
            if redundant {
                hidden.insert((a, c));
            }
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "digraph memory {{");
    let _ = writeln!(out, "  rankdir=BT;");
    let _ = writeln!(
        out,
        "  root [label=\"{}\", shape=doublecircle];",
        MemoryGraph::ROOT_LABEL
    );
    for cat in memory.categories() {
        let mut label = cat.id().to_string();
        if let Some(note) = cat.annotation() {
            let _ = write!(label, "\\n{}", escape(note));
        }
        let mut attrs = String::new();
        if let Some(n) = opts.classification.and_then(|g| g.node(cat.id())) {
            let _ = write!(label, "\\np={:.2} d={:.2}", n.degree, n.similarity);
            attrs.push_str(", color=red, fontcolor=red");
        }
        let _ = writeln!(out, "  {} [label=\"{label}\"{attrs}];", node(cat.id()));
    }
    for e in memory.edges() {
        if hidden.contains(&(e.child, e.parent)) {
            continue;
        }
        let mut attrs = format!("label=\"{}\"", e.degree);
        if let Some(g) = opts.classification {
            if g.node(e.child).is_some() && g.node(e.parent).is_some() {
                attrs.push_str(", color=red");
            }
        }
        let _ = writeln!(out, "  {} -> {} [{attrs}];", node(e.child), node(e.parent));
    }
    for cat in memory.categories() {
        let has_parent = memory.parents(cat.id()).next().is_some();
        if !opts.reduce || !has_parent {
            let _ = writeln!(
                out,
                "  {} -> root [label=\"1.00\", style=dashed];",
                node(cat.id())
            );
        }
    }
    out.push_str("}\n");
    out
}
