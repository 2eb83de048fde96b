//! JSON and SVG renderings of complexes and quotient balls.

use std::fmt::Write;

use num_traits::ToPrimitive;
use serde::Serialize;

use super::lp::Q;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolytopeDump {
    pub dimension: usize,
    /// Exact coordinates written as `p/q` strings.
    pub vertices: Vec<Vec<String>>,
}

pub fn polytope_dump(dimension: usize, vertices: &[Vec<Q>]) -> PolytopeDump {
    PolytopeDump {
        dimension,
        vertices: vertices
            .iter()
            .map(|v| v.iter().map(|x| x.to_string()).collect())
            .collect(),
    }
}

fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Sketch of a quotient ball. Three-dimensional balls are drawn in an
/// oblique projection with every vertex pair joined. Higher dimensions give
/// `None`.
pub fn polytope_svg(dimension: usize, vertices: &[Vec<Q>]) -> Option<String> {
    if dimension == 0 || dimension > 3 {
        return None;
    }
    let pts: Vec<(f64, f64)> = vertices
        .iter()
        .map(|v| {
            let c: Vec<f64> = v.iter().map(to_f64).collect();
            match dimension {
                1 => (c[0], 0.0),
                2 => (c[0], c[1]),
                _ => (c[0] + 0.45 * c[2], c[1] + 0.3 * c[2]),
            }
        })
        .collect();
    let r = pts
        .iter()
        .map(|(x, y)| x.abs().max(y.abs()))
        .fold(1e-9, f64::max);
    let size = 240.0;
    let map = |(x, y): (f64, f64)| (size / 2.0 + x / r * 100.0, size / 2.0 - y / r * 100.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    match dimension {
        2 => {
            let mut order: Vec<usize> = (0..pts.len()).collect();
            order.sort_by(|&a, &b| {
                pts[a].1.atan2(pts[a].0).total_cmp(&pts[b].1.atan2(pts[b].0))
            });
            let poly: Vec<String> = order
                .iter()
                .map(|&i| {
                    let (x, y) = map(pts[i]);
                    format!("{x:.3},{y:.3}")
                })
                .collect();
            let _ = writeln!(
                s,
                r##"<polygon points="{}" fill="#dce8f5" stroke="#1f4e79" stroke-width="1.5"/>"##,
                poly.join(" ")
            );
        }
        _ => {
            for a in 0..pts.len() {
                for b in a + 1..pts.len() {
                    let ((x1, y1), (x2, y2)) = (map(pts[a]), map(pts[b]));
                    let _ = writeln!(
                        s,
                        r##"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="#1f4e79" stroke-width="0.8"/>"##
                    );
                }
            }
        }
    }
    for &p in &pts {
        let (x, y) = map(p);
        let _ = writeln!(s, r##"<circle cx="{x:.3}" cy="{y:.3}" r="3" fill="#c0392b"/>"##);
    }
    s.push_str("</svg>\n");
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_only_up_to_three_dimensions() {
        let q = |v: i64| Q::from_integer(v.into());
        let square = vec![vec![q(1), q(0)], vec![q(0), q(1)], vec![q(-1), q(0)], vec![q(0), q(-1)]];
        let svg = polytope_svg(2, &square).unwrap();
        assert!(svg.contains("<polygon"));
        assert!(polytope_svg(4, &[]).is_none());
        let d = polytope_dump(2, &square);
        assert_eq!(d.vertices[0], vec!["1".to_string(), "0".to_string()]);
    }
}
