//! Counts tables as CSV and JSON, and entry-chart heatmaps as SVG.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::omega::Pattern;

use super::{CountsTable, NodeLabel, StrataAtlas};

pub fn counts_csv(counts: &CountsTable) -> String {
    let mut s = String::from("pattern,codim,components\n");
    for r in &counts.rows {
        let _ = writeln!(s, "{},{},{}", r.pattern, r.codim, r.components);
    }
    s
}

pub fn counts_json(counts: &CountsTable) -> serde_json::Value {
    serde_json::json!({
        "trajectory_space_dim": counts.trajectory_space_dim,
        "rows": counts.rows.iter().map(|r| serde_json::json!({
            "pattern": r.pattern.to_string(),
            "codim": r.codim,
            "components": r.components,
        })).collect::<Vec<_>>(),
    })
}

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
];

fn label_color(label: &NodeLabel, colors: &BTreeMap<Pattern, &'static str>) -> &'static str {
    match label {
        NodeLabel::Pattern { pattern } => colors.get(pattern).copied().unwrap_or("#000000"),
        NodeLabel::InteriorTangency { .. } => "#dddddd",
        NodeLabel::NotEntry { .. } => "#ffffff",
        NodeLabel::Trapped | NodeLabel::Failed { .. } => "#000000",
    }
}

/// One panel per boundary curve; the horizontal axis is arclength and, on a
/// two-dimensional chart, the vertical axis is the entry angle. Transition
/// nodes are drawn as dots.
pub fn atlas_svg(atlas: &StrataAtlas) -> String {
    let patterns: Vec<Pattern> = {
        let mut v: Vec<Pattern> = atlas
            .nodes
            .iter()
            .chain(atlas.transitions.iter().map(|t| &t.node))
            .filter_map(|n| n.label.pattern().cloned())
            .collect();
        v.sort();
        v.dedup();
        v
    };
    let colors: BTreeMap<Pattern, &'static str> = patterns
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), PALETTE[i % PALETTE.len()]))
        .collect();
    let (w, h, pad) = (600.0, 160.0, 20.0);
    let total_h = pad + atlas.curves.len() as f64 * (h + pad) + 20.0 * patterns.len() as f64 + pad;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        w + 2.0 * pad,
        total_h,
        w + 2.0 * pad,
        total_h
    );
    let half_pi = std::f64::consts::FRAC_PI_2;
    for (ci, c) in atlas.curves.iter().enumerate() {
        let top = pad + ci as f64 * (h + pad);
        let _ = writeln!(
            s,
            r##"<rect x="{pad}" y="{top}" width="{w}" height="{h}" fill="none" stroke="#333333"/>"##
        );
        let nodes: Vec<_> = atlas.nodes.iter().filter(|n| n.curve == ci).collect();
        let cw = w / c.len().max(1) as f64;
        let rows = if atlas.chart_dim == 2 { atlas.config.angle_steps.max(2) + 1 } else { 1 };
        let ch = h / rows as f64;
        for n in nodes {
            let x = pad + n.chart[0] / c.length * w;
            let y = if atlas.chart_dim == 2 {
                top + (half_pi - n.chart[1]) / (2.0 * half_pi) * (h - ch)
            } else {
                top
            };
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                x,
                y,
                cw,
                ch,
                label_color(&n.label, &colors)
            );
        }
        for t in atlas.transitions.iter().filter(|t| t.node.curve == ci) {
            let n = &t.node;
            let x = pad + n.chart[0].rem_euclid(c.length) / c.length * w + 0.5 * cw;
            let y = if atlas.chart_dim == 2 {
                top + (half_pi - n.chart[1]) / (2.0 * half_pi) * (h - ch) + 0.5 * ch
            } else {
                top + 0.5 * h
            };
            let _ = writeln!(
                s,
                r##"<circle cx="{:.3}" cy="{:.3}" r="2" fill="{}" stroke="#000000" stroke-width="0.3"/>"##,
                x,
                y,
                label_color(&n.label, &colors)
            );
        }
    }
    let legend_top = pad + atlas.curves.len() as f64 * (h + pad);
    for (i, p) in patterns.iter().enumerate() {
        let y = legend_top + 20.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{pad}" y="{y}" width="12" height="12" fill="{}"/><text x="{}" y="{}" font-size="12" font-family="monospace">{}</text>"#,
            colors[p],
            pad + 18.0,
            y + 11.0,
            p
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_has_header() {
        let t = CountsTable::new(2, Vec::<(Pattern, usize)>::new());
        assert_eq!(counts_csv(&t), "pattern,codim,components\n");
    }

    #[test]
    fn csv_rows() {
        let t = CountsTable::new(2, [("121".parse().unwrap(), 2), ("11".parse().unwrap(), 4)]);
        assert_eq!(counts_csv(&t), "pattern,codim,components\n11,0,4\n121,1,2\n");
    }
}
