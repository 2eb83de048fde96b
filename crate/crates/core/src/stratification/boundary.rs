//! Boundary curves of planar domains, traced from grid sign changes and
//! resampled at equal arclength.

use serde::{Deserialize, Serialize};

use crate::flow::ImplicitDomain;

/// One closed boundary curve, counterclockwise with the domain on the left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLoop {
    pub length: f64,
    /// Equally spaced points; `points[k]` sits at arclength `k·length/n`.
    pub points: Vec<[f64; 2]>,
}

impl BoundaryLoop {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points.len() as f64
    }

    /// Point at arclength parameter `s` (periodic), projected onto `z = 0`.
    pub fn point_at(&self, domain: &ImplicitDomain, s: f64) -> [f64; 2] {
        let n = self.points.len();
        let u = (s / self.length).rem_euclid(1.0) * n as f64;
        let k = (u.floor() as usize) % n;
        let frac = u - u.floor();
        let a = self.points[k];
        let b = self.points[(k + 1) % n];
        let guess = [a[0] + frac * (b[0] - a[0]), a[1] + frac * (b[1] - a[1])];
        project(domain, guess).unwrap_or(guess)
    }

    pub fn distance_to(&self, p: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|q| ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min)
    }
}

fn project(domain: &ImplicitDomain, p: [f64; 2]) -> Option<[f64; 2]> {
    domain
        .project_to_boundary(&[p[0], p[1], 0.0, 0.0])
        .map(|q| [q[0], q[1]])
}

/// Unit tangent with the domain on the left, and the inward unit normal.
pub fn frame(domain: &ImplicitDomain, p: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    let g = domain.gradient(&[p[0], p[1], 0.0, 0.0]);
    let n = (g[0] * g[0] + g[1] * g[1]).sqrt();
    let inward = [-g[0] / n, -g[1] / n];
    let tangent = [-g[1] / n, g[0] / n];
    (tangent, inward)
}

fn trace(domain: &ImplicitDomain, seed: [f64; 2], ds: f64, max_steps: usize) -> Option<Vec<[f64; 2]>> {
    let start = project(domain, seed)?;
    let mut pts = vec![start];
    let mut p = start;
    let mut travelled = 0.0;
    for _ in 0..max_steps {
        let (t, _) = frame(domain, p);
        // midpoint predictor, then projection
        let half = project(domain, [p[0] + 0.5 * ds * t[0], p[1] + 0.5 * ds * t[1]])?;
        let (tm, _) = frame(domain, half);
        let next = project(domain, [p[0] + ds * tm[0], p[1] + ds * tm[1]])?;
        travelled += ds;
        let d0 = ((next[0] - start[0]).powi(2) + (next[1] - start[1]).powi(2)).sqrt();
        if travelled > 3.0 * ds && d0 < ds {
            return Some(pts);
        }
        pts.push(next);
        p = next;
    }
    None
}

fn resample(domain: &ImplicitDomain, poly: &[[f64; 2]], n: usize) -> BoundaryLoop {
    let m = poly.len();
    let mut cum = vec![0.0; m + 1];
    for k in 0..m {
        let a = poly[k];
        let b = poly[(k + 1) % m];
        cum[k + 1] = cum[k] + ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    }
    let length = cum[m];
    let mut points = Vec::with_capacity(n);
    let mut seg = 0;
    for i in 0..n {
        let s = length * i as f64 / n as f64;
        while cum[seg + 1] < s {
            seg += 1;
        }
        let f = (s - cum[seg]) / (cum[seg + 1] - cum[seg]);
        let a = poly[seg];
        let b = poly[(seg + 1) % m];
        let guess = [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])];
        points.push(project(domain, guess).unwrap_or(guess));
    }
    BoundaryLoop { length, points }
}

/// All boundary curves of a planar domain met by a `grid × grid` scan of
/// its box, each resampled to `samples_per_unit · length` points (at least
/// 8). Loops are ordered by the first grid edge that meets them.
pub fn boundary_loops(domain: &ImplicitDomain, grid: usize, samples_per_unit: f64) -> Vec<BoundaryLoop> {
    let bbox = domain.bbox();
    let (x0, x1) = bbox[0];
    let (y0, y1) = bbox[1];
    let ds = 2e-3 * domain.diameter();
    let max_steps = (1e4 * domain.diameter() / ds) as usize;
    let at = |i: usize, j: usize| {
        [
            x0 + (x1 - x0) * i as f64 / grid as f64,
            y0 + (y1 - y0) * j as f64 / grid as f64,
        ]
    };
    let mut traced: Vec<Vec<[f64; 2]>> = Vec::new();
    for j in 0..=grid {
        for i in 0..grid {
            let a = at(i, j);
            let b = at(i + 1, j);
            let za = domain.eval_z(&[a[0], a[1], 0.0, 0.0]);
            let zb = domain.eval_z(&[b[0], b[1], 0.0, 0.0]);
            if (za < 0.0) == (zb < 0.0) {
                continue;
            }
            let seed = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            let Some(p) = project(domain, seed) else { continue };
            let known = traced.iter().any(|poly| {
                poly.iter()
                    .any(|q| ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt() < 2.0 * ds)
            });
            if known {
                continue;
            }
            if let Some(poly) = trace(domain, p, ds, max_steps) {
                traced.push(poly);
            }
        }
    }
    traced
        .iter()
        .map(|poly| {
            let length: f64 = poly.len() as f64 * ds;
            let n = ((samples_per_unit * length).round() as usize).max(8);
            resample(domain, poly, n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn annulus_has_two_loops() {
        let loops = boundary_loops(&ImplicitDomain::annulus(), 64, 20.0);
        assert_eq!(loops.len(), 2);
        let mut lengths: Vec<f64> = loops.iter().map(|l| l.length).collect();
        lengths.sort_by(f64::total_cmp);
        assert!((lengths[0] - 2.0 * PI).abs() < 1e-3);
        assert!((lengths[1] - 4.0 * PI).abs() < 1e-3);
        for l in &loops {
            for p in &l.points {
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                assert!((r - 1.0).abs() < 1e-12 || (r - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn domain_is_on_the_left() {
        let dom = ImplicitDomain::annulus();
        for l in boundary_loops(&dom, 64, 10.0) {
            let p = l.points[0];
            let (t, n) = frame(&dom, p);
            assert!((t[0] * n[1] - t[1] * n[0]) > 0.99);
            let q = [p[0] + 1e-3 * n[0], p[1] + 1e-3 * n[1]];
            assert!(dom.eval_z(&[q[0], q[1], 0.0, 0.0]) < 0.0);
            // consecutive samples advance along the tangent
            let d = [l.points[1][0] - p[0], l.points[1][1] - p[1]];
            assert!(d[0] * t[0] + d[1] * t[1] > 0.0);
        }
    }

    #[test]
    fn bean_is_one_loop() {
        let loops = boundary_loops(&ImplicitDomain::bean(), 64, 10.0);
        assert_eq!(loops.len(), 1);
    }
}
