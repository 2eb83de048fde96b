//! Cell models read off a sampled atlas. Every chart node becomes a top
//! cell of the dual grid, so each top cell is tagged by the trajectory
//! through its center. Such models are only as good as the sampling and are
//! always marked heuristic.

use std::collections::HashMap;

use super::{Cells, MhoError, StratifiedModel};
use crate::homology::cubical::{Axis, CubicalComplex};
use crate::homology::Locus;
use crate::omega::Pattern;
use crate::stratification::{NodeLabel, StrataAtlas};

const UNKNOWN: &str = "?";
const JUNCTION: &str = "junction";

fn tag_of(label: &NodeLabel) -> Option<String> {
    label.pattern().map(|p| p.to_string())
}

fn boundary_tag(label: &NodeLabel) -> String {
    match label {
        NodeLabel::Pattern { pattern } => pattern.to_string(),
        NodeLabel::InteriorTangency { through: Some(p) } => p.to_string(),
        _ => "2".into(),
    }
}

/// One model per boundary curve of a two-dimensional chart.
pub fn atlas_models(atlas: &StrataAtlas, name: &str) -> Result<Vec<StratifiedModel>, MhoError> {
    if atlas.chart_dim != 2 {
        return Err(MhoError::Unsupported("heuristic models need a two-dimensional chart".into()));
    }
    let rows = atlas.config.angle_steps.max(2);
    // deepest transition pattern per chart edge
    let mut cut: HashMap<(usize, usize), Pattern> = HashMap::new();
    for t in &atlas.transitions {
        if let Some(p) = t.node.label.pattern() {
            let key = (t.edge.0.min(t.edge.1), t.edge.0.max(t.edge.1));
            let slot = cut.entry(key).or_insert_with(|| p.clone());
            if (p.reduced_norm(), p) > (slot.reduced_norm(), &*slot) {
                *slot = p.clone();
            }
        }
    }
    let mut out = Vec::new();
    let mut base = 0;
    for (ci, curve) in atlas.curves.iter().enumerate() {
        let n = curve.len();
        if n < 2 || rows < 3 {
            return Err(MhoError::Unsupported("chart too coarse for a cell model".into()));
        }
        let node = |k: usize, i: usize| base + (k % n) * (rows + 1) + i;
        let axes = [Axis::periodic(n as u32), Axis::closed(rows as u32 - 1)];
        let mut cx = CubicalComplex::grid(&axes)?;
        let top_tag = |k: usize, m: usize| {
            tag_of(&atlas.nodes[node(k, m + 1)].label).unwrap_or_else(|| UNKNOWN.into())
        };
        let mut tags: Vec<(String, u32, Locus)> = Vec::with_capacity(cx.len());
        // top cells and edges first, vertices after
        for i in 0..cx.len() {
            let l = cx.label(i).clone();
            let (k, m) = (l.lo[0] as usize, l.lo[1] as usize);
            let t = match (l.free[0], l.free[1]) {
                (true, true) => (top_tag(k, m), 0, Locus::Interior),
                // horizontal edge on φ-line m
                (true, false) if m == 0 || m == rows - 1 => {
                    let tangent = if m == 0 { node(k, 0) } else { node(k, rows) };
                    (boundary_tag(&atlas.nodes[tangent].label), 1, Locus::Boundary)
                }
                (true, false) => {
                    let (a, b) = (top_tag(k, m - 1), top_tag(k, m));
                    if a == b {
                        (a, 0, Locus::Interior)
                    } else {
                        let key = (node(k, m), node(k, m + 1));
                        let t = cut.get(&key).map_or(UNKNOWN.into(), |p| p.to_string());
                        (t, 1, Locus::Interior)
                    }
                }
                (false, true) => {
                    let (a, b) = (top_tag(k + n - 1, m), top_tag(k, m));
                    if a == b {
                        (a, 0, Locus::Interior)
                    } else {
                        let (x, y) = (node(k + n - 1, m + 1), node(k, m + 1));
                        let t = cut.get(&(x.min(y), x.max(y))).map_or(UNKNOWN.into(), |p| p.to_string());
                        (t, 1, Locus::Interior)
                    }
                }
                (false, false) => (String::new(), 0, Locus::Interior),
            };
            tags.push(t);
        }
        // vertices: depth one on a single curve of the depth-one locus,
        // depth two at its junctions and ends
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); cx.len()];
        for i in 0..cx.len() {
            if cx.complex().cell(i).dim == 1 {
                for &(f, _) in &cx.complex().cell(i).boundary {
                    incident[f].push(i);
                }
            }
        }
        for v in cx.complex().cells_of_dim(0).to_vec() {
            let deep: Vec<usize> = incident[v].iter().copied().filter(|&e| tags[e].1 >= 1).collect();
            let on_boundary = deep.iter().any(|&e| tags[e].2 == Locus::Boundary);
            let locus = if on_boundary { Locus::Boundary } else { Locus::Interior };
            let same = deep.iter().all(|&e| tags[e].0 == tags[deep[0]].0);
            tags[v] = match deep.len() {
                0 => {
                    let e = incident[v][0];
                    (tags[e].0.clone(), 0, Locus::Interior)
                }
                2 if same => (tags[deep[0]].0.clone(), 1, locus),
                _ => (JUNCTION.into(), 2, locus),
            };
        }
        for (i, (t, d, l)) in tags.into_iter().enumerate() {
            cx.complex_mut().tag(i, Some(t), d, l);
        }
        out.push(StratifiedModel {
            name: format!("{name}-curve{ci}"),
            heuristic: true,
            cells: Cells::Cubical(cx),
        });
        base += n * (rows + 1);
    }
    Ok(out)
}
