//! Graphviz output for requirements and estimability graphs.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::{Coloring, RequirementsGraph};
use crate::design::FactorGrouping;
use crate::effects::factor_name;

const PALETTE: [&str; 12] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5",
    "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f",
];

fn ordered(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn node(out: &mut String, v: usize, n: usize, color: Option<usize>) {
    let name = factor_name(v, n);
    match color {
        Some(c) => writeln!(
            out,
            "  {name} [style=filled, fillcolor=\"{}\", xlabel=\"{}\"];",
            PALETTE[c % PALETTE.len()],
            c + 1
        ),
        None => writeln!(out, "  {name};"),
    }
    .expect("write to string");
}

/// The requirements graph, optionally filled by colour class. Edges listed
/// in `aliased` are drawn dashed.
pub fn requirements_dot(
    g: &RequirementsGraph,
    coloring: Option<&Coloring>,
    aliased: &[(usize, usize)],
) -> String {
    let n = g.n();
    let dashed: BTreeSet<(usize, usize)> = aliased.iter().map(|&(a, b)| ordered(a, b)).collect();
    let mut out = String::from("graph requirements {\n  node [shape=circle];\n");
    for v in 0..n {
        node(&mut out, v, n, coloring.map(|c| c.color(v)));
    }
    for (a, b) in g.edges() {
        let style = if dashed.contains(&(a, b)) {
            " [style=dashed]"
        } else {
            ""
        };
        writeln!(
            out,
            "  {} -- {}{style};",
            factor_name(a, n),
            factor_name(b, n)
        )
        .expect("write to string");
    }
    out.push_str("}\n");
    out
}

/// The complete multipartite graph of interactions a grouping leaves
/// unconfounded. Required interactions are drawn bold, interactions aliased
/// with another two-factor interaction dashed.
pub fn estimability_dot(
    fg: &FactorGrouping,
    required: Option<&RequirementsGraph>,
    aliased: &[(usize, usize)],
) -> String {
    let n = fg.n();
    let group_of = fg.group_of();
    let dashed: BTreeSet<(usize, usize)> = aliased.iter().map(|&(a, b)| ordered(a, b)).collect();
    let mut out = String::from("graph estimability {\n  node [shape=circle];\n");
    for (v, &grp) in group_of.iter().enumerate() {
        node(&mut out, v, n, Some(grp));
    }
    for a in 0..n {
        for b in a + 1..n {
            if group_of[a] == group_of[b] {
                continue;
            }
            let mut attrs = Vec::new();
            if dashed.contains(&(a, b)) {
                attrs.push("style=dashed");
            }
            if required.is_some_and(|g| g.has_edge(a, b)) {
                attrs.push("penwidth=2");
            }
            let attrs = if attrs.is_empty() {
                String::new()
            } else {
                format!(" [{}]", attrs.join(", "))
            };
            writeln!(
                out,
                "  {} -- {}{attrs};",
                factor_name(a, n),
                factor_name(b, n)
            )
            .expect("write to string");
        }
    }
    out.push_str("}\n");
    out
}
