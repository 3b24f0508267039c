//! DOT and SVG pictures of region colourings: one row per level, `a` edges solid, `b` edges dashed.

use std::fmt::Write;

use crate::error::Result;
use crate::solver::VertexColouring;
use crate::tilesets::Colour;

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

fn label(value: u32, names: Option<&[Colour]>) -> String {
    match names.and_then(|n| n.get(value as usize)) {
        Some(c) => c.to_string(),
        None => value.to_string(),
    }
}

/// Edges as `(lower, upper, is_b)`.
fn edges(c: &VertexColouring) -> Result<Vec<(usize, usize, bool)>> {
    let r = c.region()?;
    Ok((0..r.edge_count())
        .map(|e| {
            let (lo, hi) = r.edge_endpoints(e);
            (lo, hi, e % 2 == 1)
        })
        .collect())
}

pub fn to_dot(c: &VertexColouring, names: Option<&[Colour]>) -> Result<String> {
    let r = c.region()?;
    let mut out = String::new();
    writeln!(out, "digraph region {{").unwrap();
    writeln!(out, "  rankdir=BT;").unwrap();
    writeln!(out, "  node [shape=circle, style=filled, fontsize=9];").unwrap();
    for level in 0..=r.height() {
        writeln!(out, "  subgraph level_{level} {{ rank=same;").unwrap();
        for bits in 0..r.width() {
            let i = r.index(level, bits);
            let v = c.values[i];
            writeln!(
                out,
                "    v{i} [label=\"{}\\n{}\", fillcolor=\"{}\"];",
                r.vertex(i),
                label(v, names),
                PALETTE[v as usize % PALETTE.len()]
            )
            .unwrap();
        }
        writeln!(out, "  }}").unwrap();
    }
    for (lo, hi, is_b) in edges(c)? {
        let style = if is_b { "dashed" } else { "solid" };
        let gen = if is_b { "b" } else { "a" };
        writeln!(out, "  v{lo} -> v{hi} [label=\"{gen}\", style={style}];").unwrap();
    }
    writeln!(out, "}}").unwrap();
    Ok(out)
}

pub fn to_svg(c: &VertexColouring, names: Option<&[Colour]>) -> Result<String> {
    let r = c.region()?;
    let (dx, dy, pad) = (48.0f64, 80.0f64, 30.0f64);
    let width = pad * 2.0 + dx * (r.width() as f64 - 1.0).max(0.0);
    let height = pad * 2.0 + dy * r.height() as f64;
    let pos = |i: usize| {
        let x = pad + dx * r.bits_of(i) as f64;
        let y = height - pad - dy * r.level_of(i) as f64;
        (x, y)
    };
    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"monospace\" font-size=\"9\">"
    )
    .unwrap();
    for (lo, hi, is_b) in edges(c)? {
        let ((x1, y1), (x2, y2)) = (pos(lo), pos(hi));
        let dash = if is_b { " stroke-dasharray=\"4 3\"" } else { "" };
        writeln!(
            out,
            "  <line x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"#555\"{dash}/>"
        )
        .unwrap();
    }
    for (i, &v) in c.values.iter().enumerate() {
        let (x, y) = pos(i);
        writeln!(
            out,
            "  <circle cx=\"{x}\" cy=\"{y}\" r=\"12\" fill=\"{}\"/><text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            PALETTE[v as usize % PALETTE.len()],
            y + 3.0,
            label(v, names)
        )
        .unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::TetraRegion;

    #[test]
    fn dot_has_every_vertex_and_edge() {
        let r = TetraRegion::new(0, 2).unwrap();
        let c = VertexColouring::new(r, vec![0; r.vertex_count()]).unwrap();
        let dot = to_dot(&c, None).unwrap();
        assert_eq!(dot.matches("fillcolor").count(), 12);
        assert_eq!(dot.matches("->").count(), 16);
        assert_eq!(dot.matches("style=dashed").count(), 8);
        let svg = to_svg(&c, None).unwrap();
        assert_eq!(svg.matches("<circle").count(), 12);
        assert_eq!(svg.matches("stroke-dasharray").count(), 8);
    }
}
