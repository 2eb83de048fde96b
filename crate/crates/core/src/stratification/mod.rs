//! Sampled stratification of the trajectory space by divisor pattern.
//!
//! Trajectories are parametrized by their entry points. For a geodesic
//! field on a planar domain the chart is `(s, φ)`: arclength `s` along a
//! boundary curve and the angle `φ ∈ [-π/2, π/2]` of the initial direction
//! from the inward normal, with the tangent rows `φ = ±π/2` included. For an
//! explicit planar field it is `s` alone, with tangency points inserted by
//! bisection on `L_v z`.
//!
//! Strata components are merged over mesh edges. An edge whose endpoints
//! disagree (pattern, exit curve, or a large jump of the exit point) is
//! bisected; if a deeper pattern shows up in between, the edge is cut and
//! the crossing becomes a transition node of that deeper stratum.
//! Transition nodes sharing a mesh cell are merged.
//!
//! Entries tangent from inside (the trajectory touches the boundary there
//! and carries on) are not entries; they are labeled and left out of the
//! counts, which are therefore counts on the entry chart.

pub mod boundary;
pub mod bounds;
pub mod export;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Var;
use crate::flow::{
    integrate_trajectory, tangency_multiplicity, trace_through, FieldKind, Flow, FlowError,
    ImplicitDomain, Tolerances,
};
use crate::omega::Pattern;
use crate::union_find::UnionFind;

pub use boundary::{boundary_loops, BoundaryLoop};
pub use bounds::{
    check_k_convexity, morse_bound_report, obstruction_report, KConvexity, MorseBoundReport,
    NormAnnotations, ObstructionEntry,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StratError {
    #[error("atlas needs a planar domain with an explicit or geodesic field")]
    Unsupported,
    #[error("no boundary curve found")]
    NoBoundary,
    #[error("{failed} of {total} nodes failed, above the 1% limit")]
    TooManyFailures { failed: usize, total: usize },
    #[error("no rank annotation for degree {0}")]
    MissingAnnotation(u32),
    #[error("integer overflow in bound arithmetic")]
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtlasConfig {
    /// Nodes per unit of boundary length.
    pub samples_per_unit: f64,
    /// Angular subdivisions of `[-π/2, π/2]` (geodesic chart only).
    pub angle_steps: usize,
    /// Grid used to find boundary curves.
    pub seed_grid: usize,
    /// Bisection depth on suspicious edges.
    pub bisect_depth: usize,
    /// Exit-point jump, as a fraction of the domain diameter, that makes an
    /// edge suspicious.
    pub jump_fraction: f64,
}

impl Default for AtlasConfig {
    fn default() -> Self {
        AtlasConfig {
            samples_per_unit: 8.0,
            angle_steps: 32,
            seed_grid: 64,
            bisect_depth: 44,
            jump_fraction: 0.1,
        }
    }
}

impl AtlasConfig {
    pub fn refined(&self) -> Self {
        AtlasConfig {
            samples_per_unit: 2.0 * self.samples_per_unit,
            angle_steps: 2 * self.angle_steps,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeLabel {
    Pattern { pattern: Pattern },
    /// Tangent from inside; `through` is the pattern of the trajectory
    /// passing through, when it could be traced.
    InteriorTangency { through: Option<Pattern> },
    /// The field leaves (or is tangent from outside with odd order) here.
    NotEntry { multiplicity: u32, sign: i8 },
    Trapped,
    Failed { reason: String },
}

impl NodeLabel {
    pub fn pattern(&self) -> Option<&Pattern> {
        match self {
            NodeLabel::Pattern { pattern } => Some(pattern),
            _ => None,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, NodeLabel::Trapped | NodeLabel::Failed { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasNode {
    pub curve: usize,
    /// Chart coordinates: `[s]` or `[s, φ]`.
    pub chart: Vec<f64>,
    /// Entry state.
    pub entry: Vec<f64>,
    pub label: NodeLabel,
    pub exit_curve: Option<usize>,
    pub exit_point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionNode {
    pub edge: (usize, usize),
    /// Position along the edge, in `[0, 1]`.
    pub lambda: f64,
    pub node: AtlasNode,
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumComponent {
    pub pattern: Pattern,
    pub codim: u32,
    pub nodes: Vec<usize>,
    pub transitions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CountsRow {
    pub pattern: Pattern,
    pub codim: u32,
    pub components: usize,
}

/// Number of connected components per pattern stratum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsTable {
    pub trajectory_space_dim: usize,
    pub rows: Vec<CountsRow>,
}

impl CountsTable {
    /// Hand-built table; rows are sorted by pattern and zero rows dropped.
    pub fn new(trajectory_space_dim: usize, rows: impl IntoIterator<Item = (Pattern, usize)>) -> Self {
        let mut map: BTreeMap<Pattern, usize> = BTreeMap::new();
        for (p, c) in rows {
            *map.entry(p).or_default() += c;
        }
        CountsTable {
            trajectory_space_dim,
            rows: map
                .into_iter()
                .filter(|(_, c)| *c > 0)
                .map(|(pattern, components)| CountsRow {
                    codim: pattern.reduced_norm(),
                    pattern,
                    components,
                })
                .collect(),
        }
    }

    pub fn components(&self, pattern: &Pattern) -> usize {
        self.rows
            .iter()
            .find(|r| &r.pattern == pattern)
            .map_or(0, |r| r.components)
    }

    pub fn patterns(&self) -> Vec<Pattern> {
        self.rows.iter().map(|r| r.pattern.clone()).collect()
    }

    /// Every stratum fits in the trajectory space.
    pub fn dimension_consistent(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.codim as usize <= self.trajectory_space_dim)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrataAtlas {
    pub chart_dim: usize,
    pub config: AtlasConfig,
    pub curves: Vec<BoundaryLoop>,
    pub nodes: Vec<AtlasNode>,
    pub edges: Vec<(usize, usize)>,
    /// Mesh cells as node lists (quads for the 2-D chart, edges for 1-D).
    pub cells: Vec<Vec<usize>>,
    pub cut_edges: Vec<usize>,
    pub transitions: Vec<TransitionNode>,
    pub components: Vec<StratumComponent>,
    pub counts: CountsTable,
    pub failed: usize,
}

impl StrataAtlas {
    pub fn failed_fraction(&self) -> f64 {
        self.failed as f64 / self.nodes.len().max(1) as f64
    }

    /// Pattern of every unit: nodes first, then transitions.
    pub fn unit_patterns(&self) -> Vec<Option<Pattern>> {
        self.nodes
            .iter()
            .map(|n| n.label.pattern().cloned())
            .chain(self.transitions.iter().map(|t| t.node.label.pattern().cloned()))
            .collect()
    }

    pub fn filtration(&self) -> FiltrationTable {
        FiltrationTable::from_patterns(&self.unit_patterns())
    }
}

/// Membership masks of the depth filtration over atlas units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiltrationTable {
    /// `interior[k]`: units whose stratum has codimension `>= k`.
    pub interior: Vec<Vec<bool>>,
    /// `with_boundary[k]`: as `interior[k]`, plus boundary strata (tangent
    /// entries, first multiplicity even) of codimension `>= k - 1`.
    pub with_boundary: Vec<Vec<bool>>,
}

impl FiltrationTable {
    pub fn from_patterns(units: &[Option<Pattern>]) -> Self {
        let depth = units
            .iter()
            .flatten()
            .map(|p| p.reduced_norm() as usize)
            .max()
            .unwrap_or(0);
        let mut interior = Vec::new();
        let mut with_boundary = Vec::new();
        for k in 0..=depth + 2 {
            interior.push(
                units
                    .iter()
                    .map(|p| p.as_ref().is_some_and(|p| p.reduced_norm() as usize >= k))
                    .collect(),
            );
            with_boundary.push(
                units
                    .iter()
                    .map(|p| {
                        p.as_ref().is_some_and(|p| {
                            let rn = p.reduced_norm() as usize;
                            rn >= k || (is_boundary_stratum(p) && rn + 1 >= k)
                        })
                    })
                    .collect(),
            );
        }
        FiltrationTable {
            interior,
            with_boundary,
        }
    }

    pub fn is_nested(&self) -> bool {
        let nested = |masks: &[Vec<bool>]| {
            masks
                .windows(2)
                .all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| *a || !*b))
        };
        nested(&self.interior) && nested(&self.with_boundary)
    }

    /// Masks on the double: two copies of every unit, with units on
    /// boundary strata shared. Returns the table and the swap involution.
    pub fn doubled(units: &[Option<Pattern>]) -> (FiltrationTable, Vec<usize>) {
        let mut doubled = Vec::new();
        let mut partner_of = Vec::new();
        let mut second = Vec::new();
        for (i, p) in units.iter().enumerate() {
            doubled.push(p.clone());
            partner_of.push(i);
            if !p.as_ref().is_some_and(is_boundary_stratum) {
                second.push(i);
            }
        }
        let n = doubled.len();
        let mut swap: Vec<usize> = (0..n).collect();
        for (k, &i) in second.iter().enumerate() {
            doubled.push(units[i].clone());
            swap[i] = n + k;
            swap.push(i);
        }
        let _ = partner_of;
        (FiltrationTable::from_patterns(&doubled), swap)
    }

    pub fn invariant_under(&self, swap: &[usize]) -> bool {
        let inv = |masks: &[Vec<bool>]| {
            masks
                .iter()
                .all(|m| (0..m.len()).all(|i| m[i] == m[swap[i]]))
        };
        inv(&self.interior) && inv(&self.with_boundary)
    }
}

/// Tangent-entry strata, which sit on the boundary of the trajectory space.
pub fn is_boundary_stratum(p: &Pattern) -> bool {
    p.entries()[0].is_multiple_of(2)
}

/// State at chart coordinates `[s]` or `[s, φ]` on a boundary curve. With
/// `geodesic` set, `φ` is measured from the inward normal towards the
/// curve's tangent; `φ = ±π/2` are exact tangent directions.
pub fn chart_state(domain: &ImplicitDomain, curve: &BoundaryLoop, chart: &[f64], geodesic: bool) -> [f64; 4] {
    let p = curve.point_at(domain, chart[0]);
    let mut y = [0.0; 4];
    y[Var::X as usize] = p[0];
    y[Var::Y as usize] = p[1];
    if geodesic {
        let (t, n) = boundary::frame(domain, p);
        let phi = chart[1];
        let (c, s) = if phi == FRAC_PI_2 {
            (0.0, 1.0)
        } else if phi == -FRAC_PI_2 {
            (0.0, -1.0)
        } else {
            (phi.cos(), phi.sin())
        };
        let w = [c * n[0] + s * t[0], c * n[1] + s * t[1]];
        y[Var::Theta as usize] = w[1].atan2(w[0]);
    }
    y
}

struct Evaluator<'a> {
    flow: &'a Flow,
    reverse: &'a Flow,
    tol: &'a Tolerances,
    curves: &'a [BoundaryLoop],
    geodesic: bool,
}

impl Evaluator<'_> {
    fn entry_state(&self, curve: usize, chart: &[f64]) -> [f64; 4] {
        chart_state(self.flow.domain(), &self.curves[curve], chart, self.geodesic)
    }

    fn nearest_curve(&self, p: &[f64]) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, c) in self.curves.iter().enumerate() {
            let d = c.distance_to(p);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }

    fn node(&self, curve: usize, chart: Vec<f64>) -> AtlasNode {
        let y = self.entry_state(curve, &chart);
        let entry = self.flow.coords(&y);
        let mut node = AtlasNode {
            curve,
            chart,
            entry,
            label: NodeLabel::Failed {
                reason: String::new(),
            },
            exit_curve: None,
            exit_point: None,
        };
        node.label = match integrate_trajectory(self.flow, &y, self.tol, false) {
            Ok(rec) => {
                let exit = rec.exit[..2].to_vec();
                node.exit_curve = Some(self.nearest_curve(&exit));
                node.exit_point = Some(exit);
                NodeLabel::Pattern {
                    pattern: rec.pattern,
                }
            }
            Err(FlowError::NotAnEntry { multiplicity, sign }) => {
                if multiplicity % 2 == 0 && sign < 0 {
                    let through = trace_through(self.flow, self.reverse, &y, self.tol)
                        .ok()
                        .map(|r| r.pattern);
                    NodeLabel::InteriorTangency { through }
                } else {
                    NodeLabel::NotEntry { multiplicity, sign }
                }
            }
            Err(FlowError::BudgetExceeded { .. }) => NodeLabel::Trapped,
            Err(e) => NodeLabel::Failed {
                reason: e.to_string(),
            },
        };
        node
    }
}

fn signature(n: &AtlasNode) -> (Option<Pattern>, Option<usize>) {
    (n.label.pattern().cloned(), n.exit_curve)
}

fn lerp_chart(a: &[f64], b: &[f64], lambda: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + lambda * (y - x)).collect()
}

/// Builds the atlas for a planar domain with an explicit or geodesic field.
pub fn build_atlas(flow: &Flow, config: &AtlasConfig, tol: &Tolerances) -> Result<StrataAtlas, StratError> {
    let dom = flow.domain();
    if dom.vars() != [Var::X, Var::Y] {
        return Err(StratError::Unsupported);
    }
    let geodesic = matches!(flow.field().kind(), FieldKind::Geodesic(_));
    if !geodesic && flow.vars() != [Var::X, Var::Y] {
        return Err(StratError::Unsupported);
    }
    let curves = boundary_loops(dom, config.seed_grid, config.samples_per_unit);
    if curves.is_empty() {
        return Err(StratError::NoBoundary);
    }
    let reverse = flow.reversed();
    let ev = Evaluator {
        flow,
        reverse: &reverse,
        tol,
        curves: &curves,
        geodesic,
    };

    // mesh: chart points, edges with their cells, cells
    let mut charts: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut edge_cells: Vec<Vec<usize>> = Vec::new();
    let mut cells: Vec<Vec<usize>> = Vec::new();
    if geodesic {
        let rows = config.angle_steps.max(2);
        for (ci, c) in curves.iter().enumerate() {
            let n = c.len();
            let base = charts.len();
            let id = |k: usize, i: usize| base + (k % n) * (rows + 1) + i;
            let cell_base = cells.len();
            let cell = |k: usize, i: usize| cell_base + (k % n) * rows + i;
            for k in 0..n {
                let s = k as f64 * c.spacing();
                for i in 0..=rows {
                    let phi = if i == 0 {
                        -FRAC_PI_2
                    } else if i == rows {
                        FRAC_PI_2
                    } else {
                        -FRAC_PI_2 + std::f64::consts::PI * i as f64 / rows as f64
                    };
                    charts.push((ci, vec![s, phi]));
                }
            }
            for k in 0..n {
                for i in 0..rows {
                    cells.push(vec![id(k, i), id(k + 1, i), id(k + 1, i + 1), id(k, i + 1)]);
                }
            }
            for k in 0..n {
                for i in 0..=rows {
                    // along s
                    let mut cs = Vec::new();
                    if i > 0 {
                        cs.push(cell(k, i - 1));
                    }
                    if i < rows {
                        cs.push(cell(k, i));
                    }
                    edges.push((id(k, i), id(k + 1, i)));
                    edge_cells.push(cs);
                    // along φ
                    if i < rows {
                        edges.push((id(k, i), id(k, i + 1)));
                        edge_cells.push(vec![cell(k + n - 1, i), cell(k, i)]);
                    }
                }
            }
        }
    } else {
        let mut s_lists: Vec<Vec<f64>> = Vec::new();
        for (ci, c) in curves.iter().enumerate() {
            // grid plus tangency points where L_v z changes sign
            let n = c.len();
            let slope_at = |s: f64| {
                let p = c.point_at(dom, s);
                let y = flow.state(&[p[0], p[1]]);
                flow.z_and_slope(&y, &mut Default::default()).1
            };
            let mut ss: Vec<f64> = (0..n).map(|k| k as f64 * c.spacing()).collect();
            let slopes: Vec<f64> = ss.iter().map(|&s| slope_at(s)).collect();
            let mut extra = Vec::new();
            for k in 0..n {
                let (a, b) = (ss[k], ss[k] + c.spacing());
                let (ga, gb) = (slopes[k], slopes[(k + 1) % n]);
                if (ga < 0.0) != (gb < 0.0) {
                    let (mut lo, mut hi, mut glo) = (a, b, ga);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        let gm = slope_at(mid);
                        if (gm < 0.0) == (glo < 0.0) {
                            lo = mid;
                            glo = gm;
                        } else {
                            hi = mid;
                        }
                    }
                    let s = 0.5 * (lo + hi);
                    extra.push(if s >= c.length { s - c.length } else { s });
                }
            }
            ss.extend(extra);
            ss.sort_by(f64::total_cmp);
            ss.dedup();
            let base = charts.len();
            let m = ss.len();
            for &s in &ss {
                charts.push((ci, vec![s]));
            }
            for k in 0..m {
                let a = base + k;
                let b = base + (k + 1) % m;
                cells.push(vec![a, b]);
                edges.push((a, b));
                edge_cells.push(vec![cells.len() - 1]);
            }
            s_lists.push(ss);
        }
    }

    let nodes: Vec<AtlasNode> = charts
        .par_iter()
        .map(|(ci, chart)| ev.node(*ci, chart.clone()))
        .collect();
    let failed = nodes.iter().filter(|n| n.label.is_failure()).count();
    if failed * 100 >= nodes.len() {
        return Err(StratError::TooManyFailures {
            failed,
            total: nodes.len(),
        });
    }

    // examine edges between entry nodes
    let jump = config.jump_fraction * dom.diameter();
    let chart_of = |a: usize, b: usize| -> (Vec<f64>, Vec<f64>) {
        let ca = nodes[a].chart.clone();
        let mut cb = nodes[b].chart.clone();
        // unwrap the periodic arclength
        let len = curves[nodes[a].curve].length;
        if cb[0] < ca[0] - 0.5 * len {
            cb[0] += len;
        }
        (ca, cb)
    };
    let verdicts: Vec<EdgeVerdict> = edges
        .par_iter()
        .map(|&(a, b)| {
            let (na, nb) = (&nodes[a], &nodes[b]);
            let (Some(pa), Some(pb)) = (na.label.pattern(), nb.label.pattern()) else {
                return EdgeVerdict::Skip;
            };
            let jumped = match (&na.exit_point, &nb.exit_point) {
                (Some(x), Some(y)) => {
                    ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt() > jump
                }
                _ => false,
            };
            let suspicious = pa != pb || na.exit_curve != nb.exit_curve || jumped;
            if !suspicious {
                return EdgeVerdict::Join;
            }
            let floor = pa.reduced_norm().max(pb.reduced_norm());
            let (ca, cb) = chart_of(a, b);
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let sig_lo = signature(na);
            for _ in 0..config.bisect_depth {
                let mid = 0.5 * (lo + hi);
                let node = ev.node(na.curve, lerp_chart(&ca, &cb, mid));
                if node.label.pattern().is_some_and(|p| p.reduced_norm() > floor) {
                    return EdgeVerdict::Cut(mid, node);
                }
                if signature(&node) == sig_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if pa == pb {
                EdgeVerdict::Join
            } else {
                EdgeVerdict::Skip
            }
        })
        .collect();

    let mut transitions = Vec::new();
    let mut cut_edges = Vec::new();
    let n_nodes = nodes.len();
    let mut joins = Vec::new();
    for (e, v) in verdicts.into_iter().enumerate() {
        match v {
            EdgeVerdict::Skip => {}
            EdgeVerdict::Join => joins.push(edges[e]),
            EdgeVerdict::Cut(lambda, node) => {
                cut_edges.push(e);
                transitions.push(TransitionNode {
                    edge: edges[e],
                    lambda,
                    node,
                    cells: edge_cells[e].clone(),
                });
            }
        }
    }
    let mut uf = UnionFind::new(n_nodes + transitions.len());
    for (a, b) in joins {
        uf.union(a, b);
    }
    // transitions and nodes of the same pattern sharing a cell
    let mut by_cell: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (t, tr) in transitions.iter().enumerate() {
        for &c in &tr.cells {
            by_cell.entry(c).or_default().push(n_nodes + t);
        }
    }
    let unit_pattern = |u: usize| -> Option<&Pattern> {
        if u < n_nodes {
            nodes[u].label.pattern()
        } else {
            transitions[u - n_nodes].node.label.pattern()
        }
    };
    for (c, members) in &by_cell {
        let mut all = members.clone();
        all.extend(cells[*c].iter().copied());
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                let (u, v) = (all[i], all[j]);
                if u >= n_nodes || v >= n_nodes {
                    if let (Some(p), Some(q)) = (unit_pattern(u), unit_pattern(v)) {
                        if p == q {
                            uf.union(u, v);
                        }
                    }
                }
            }
        }
    }

    let mut groups: BTreeMap<usize, StratumComponent> = BTreeMap::new();
    for u in 0..n_nodes + transitions.len() {
        let Some(p) = unit_pattern(u) else { continue };
        let root = uf.find(u);
        let comp = groups.entry(root).or_insert_with(|| StratumComponent {
            pattern: p.clone(),
            codim: p.reduced_norm(),
            nodes: Vec::new(),
            transitions: Vec::new(),
        });
        if u < n_nodes {
            comp.nodes.push(u);
        } else {
            comp.transitions.push(u - n_nodes);
        }
    }
    let mut components: Vec<StratumComponent> = groups.into_values().collect();
    components.sort_by(|a, b| {
        let first = |c: &StratumComponent| {
            c.nodes
                .first()
                .copied()
                .unwrap_or(n_nodes + c.transitions.first().copied().unwrap_or(0))
        };
        (&a.pattern, first(a)).cmp(&(&b.pattern, first(b)))
    });
    let counts = CountsTable::new(
        flow.dim() - 1,
        components.iter().map(|c| (c.pattern.clone(), 1)),
    );
    Ok(StrataAtlas {
        chart_dim: if geodesic { 2 } else { 1 },
        config: *config,
        curves,
        nodes,
        edges,
        cells,
        cut_edges,
        transitions,
        components,
        counts,
        failed,
    })
}

enum EdgeVerdict {
    Skip,
    Join,
    Cut(f64, AtlasNode),
}

/// Counts at `config` and at one refinement, and whether they agree.
pub fn refinement_check(
    flow: &Flow,
    config: &AtlasConfig,
    tol: &Tolerances,
) -> Result<(CountsTable, CountsTable, bool), StratError> {
    let a = build_atlas(flow, config, tol)?;
    let b = build_atlas(flow, &config.refined(), tol)?;
    let stable = a.counts == b.counts;
    Ok((a.counts, b.counts, stable))
}

/// Tangency order of the field at a boundary point, for labeling.
pub fn boundary_multiplicity(flow: &Flow, state: &[f64; 4], tol: &Tolerances) -> Option<u32> {
    tangency_multiplicity(flow, state, tol).ok().map(|t| t.multiplicity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{FieldSpec, ImplicitDomain, Metric};

    fn p(s: &str) -> Pattern {
        s.parse().unwrap()
    }

    #[test]
    fn disk_geodesic_atlas() {
        let flow = Flow::new(ImplicitDomain::unit_disk(), FieldSpec::geodesic(Metric::euclidean()), 4).unwrap();
        let cfg = AtlasConfig {
            samples_per_unit: 4.0,
            angle_steps: 8,
            ..AtlasConfig::default()
        };
        let atlas = build_atlas(&flow, &cfg, &Tolerances::default()).unwrap();
        assert_eq!(atlas.counts.patterns(), vec![p("11"), p("2")]);
        assert_eq!(atlas.counts.components(&p("11")), 1);
        assert_eq!(atlas.counts.components(&p("2")), 2);
        assert!(atlas.filtration().interior[2].iter().all(|m| !m));
    }

    #[test]
    fn annulus_geodesic_atlas() {
        let flow = Flow::new(ImplicitDomain::annulus(), FieldSpec::geodesic(Metric::euclidean()), 4).unwrap();
        let cfg = AtlasConfig {
            samples_per_unit: 3.0,
            angle_steps: 12,
            ..AtlasConfig::default()
        };
        let atlas = build_atlas(&flow, &cfg, &Tolerances::default()).unwrap();
        let got: Vec<(String, usize)> = atlas
            .counts
            .rows
            .iter()
            .map(|r| (r.pattern.to_string(), r.components))
            .collect();
        assert_eq!(got, vec![("11".into(), 4), ("2".into(), 2), ("121".into(), 2)]);
        assert!(atlas.counts.dimension_consistent());
        let f = atlas.filtration();
        assert!(f.is_nested());
    }

    #[test]
    fn disk_explicit_field_atlas() {
        let flow = Flow::new(
            ImplicitDomain::unit_disk(),
            FieldSpec::constant(vec![Var::X, Var::Y], &[1.0, 0.0]),
            4,
        )
        .unwrap();
        let atlas = build_atlas(&flow, &AtlasConfig::default(), &Tolerances::default()).unwrap();
        assert_eq!(atlas.counts.components(&p("11")), 1);
        assert_eq!(atlas.counts.components(&p("2")), 2);
        assert_eq!(atlas.counts.rows.len(), 2);
    }

    #[test]
    fn annulus_explicit_field_atlas() {
        // horizontal lines: tangent chords at y = ±1 split the outer arc
        let flow = Flow::new(
            ImplicitDomain::annulus(),
            FieldSpec::constant(vec![Var::X, Var::Y], &[1.0, 0.0]),
            4,
        )
        .unwrap();
        let atlas = build_atlas(&flow, &AtlasConfig::default(), &Tolerances::default()).unwrap();
        let got: Vec<(String, usize)> = atlas
            .counts
            .rows
            .iter()
            .map(|r| (r.pattern.to_string(), r.components))
            .collect();
        // (1,1): |y| in (1,2) top and bottom, outer-to-inner and
        // inner-to-outer for |y| < 1; (1,2,1): y = ±1; (2): y = ±2
        assert_eq!(got, vec![("11".into(), 4), ("2".into(), 2), ("121".into(), 2)]);
    }

    #[test]
    fn filtration_double_is_swap_invariant() {
        let units = vec![Some(p("11")), Some(p("2")), Some(p("121")), None];
        let (t, swap) = FiltrationTable::doubled(&units);
        assert!(t.is_nested());
        assert!(t.invariant_under(&swap));
        // the boundary unit is shared, the others doubled
        assert_eq!(swap.len(), 7);
        assert_eq!(swap[1], 1);
    }
}
