//! ℓ¹ norms on a based lattice, their quotient by a subspace, and the
//! quotient unit ball.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::lp::{minimize, LpOutcome, Q};
use super::MhoError;
use crate::homology::IntMatrix;

/// Largest quotient dimension handled by the exact hull.
pub const HULL_DIMENSION_CAP: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormedQuotient {
    ambient_dim: usize,
    /// Spanning vectors of the subspace.
    subspace: Vec<Vec<Q>>,
    /// Rows of a linear map with kernel exactly the subspace; coordinates
    /// on the quotient.
    projection: Vec<Vec<Q>>,
}

/// An attained minimum of `‖v + B u‖₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientNorm {
    pub value: Q,
    pub shift: Vec<Q>,
    pub representative: Vec<Q>,
}

pub fn l1(v: &[Q]) -> Q {
    v.iter().map(|x| x.abs()).sum()
}

pub fn to_rational(v: &[BigInt]) -> Vec<Q> {
    v.iter().map(|x| Q::from_integer(x.clone())).collect()
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(m: &mut [Vec<Q>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let lead = m[r][c].clone();
        for v in m[r].iter_mut() {
            *v /= &lead;
        }
        let row = m[r].clone();
        for (i, other) in m.iter_mut().enumerate() {
            if i != r && !other[c].is_zero() {
                let f = other[c].clone();
                for (v, pv) in other.iter_mut().zip(&row) {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    pivots
}

impl NormedQuotient {
    pub fn new(ambient_dim: usize, subspace: Vec<Vec<Q>>) -> Self {
        assert!(subspace.iter().all(|b| b.len() == ambient_dim));
        let mut m = subspace.clone();
        let pivots = rref(&mut m, ambient_dim);
        let projection = (0..ambient_dim)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut y = vec![Q::zero(); ambient_dim];
                y[free] = Q::one();
                for (row, &p) in m.iter().zip(&pivots) {
                    y[p] = -row[free].clone();
                }
                y
            })
            .collect();
        NormedQuotient {
            ambient_dim,
            subspace,
            projection,
        }
    }

    /// Quotient by the column span of an integer matrix.
    pub fn by_image(m: &IntMatrix) -> Self {
        let cols = (0..m.cols()).map(|j| to_rational(&m.column(j))).collect();
        Self::new(m.rows(), cols)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn quotient_dim(&self) -> usize {
        self.projection.len()
    }

    pub fn subspace(&self) -> &[Vec<Q>] {
        &self.subspace
    }

    /// Quotient coordinates of an ambient vector.
    pub fn project(&self, v: &[Q]) -> Vec<Q> {
        self.projection
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `min_u ‖v + B u‖₁` by an exact linear program.
    pub fn norm(&self, v: &[Q]) -> QuotientNorm {
        let d = self.ambient_dim;
        let k = self.subspace.len();
        // variables u⁺, u⁻, p, n with v + B(u⁺ − u⁻) = p − n
        let width = 2 * k + 2 * d;
        let mut a = Vec::with_capacity(d);
        for i in 0..d {
            let mut row = vec![Q::zero(); width];
            for (j, b) in self.subspace.iter().enumerate() {
                row[j] = b[i].clone();
                row[k + j] = -b[i].clone();
            }
            row[2 * k + i] = -Q::one();
            row[2 * k + d + i] = Q::one();
            a.push(row);
        }
        let rhs: Vec<Q> = v.iter().map(|x| -x.clone()).collect();
        let cost: Vec<Q> = (0..width)
            .map(|j| if j < 2 * k { Q::zero() } else { Q::one() })
            .collect();
        match minimize(&a, &rhs, &cost) {
            LpOutcome::Optimal { value, x } => {
                let shift: Vec<Q> = (0..k).map(|j| &x[j] - &x[k + j]).collect();
                let representative: Vec<Q> = (0..d)
                    .map(|i| {
                        &v[i] + self
                            .subspace
                            .iter()
                            .zip(&shift)
                            .map(|(b, u)| &b[i] * u)
                            .sum::<Q>()
                    })
                    .collect();
                debug_assert_eq!(l1(&representative), value);
                QuotientNorm {
                    value,
                    shift,
                    representative,
                }
            }
            // u = 0 is always feasible and the objective is bounded below
            other => unreachable!("norm program ended with {other:?}"),
        }
    }
}

pub fn quotient_norm(space: &NormedQuotient, v: &[Q]) -> Q {
    space.norm(v).value
}

/// Whether `p` lies in the convex hull of `points`.
fn in_hull(points: &[&Vec<Q>], p: &[Q]) -> bool {
    if points.is_empty() {
        return false;
    }
    let d = p.len();
    let mut a: Vec<Vec<Q>> = (0..d).map(|i| points.iter().map(|q| q[i].clone()).collect()).collect();
    a.push(vec![Q::one(); points.len()]);
    let mut b = p.to_vec();
    b.push(Q::one());
    matches!(
        minimize(&a, &b, &vec![Q::zero(); points.len()]),
        LpOutcome::Optimal { .. }
    )
}

/// Vertices of the quotient unit ball, in quotient coordinates: the extreme
/// points among the images of `±e_i`, sorted.
pub fn ball_polytope(space: &NormedQuotient) -> Result<Vec<Vec<Q>>, MhoError> {
    let dim = space.quotient_dim();
    if dim > HULL_DIMENSION_CAP {
        return Err(MhoError::DimensionCap {
            dim,
            cap: HULL_DIMENSION_CAP,
        });
    }
    if dim == 0 {
        return Ok(Vec::new());
    }
    let mut candidates: Vec<Vec<Q>> = Vec::new();
    for i in 0..space.ambient_dim() {
        for s in [1, -1] {
            let mut e = vec![Q::zero(); space.ambient_dim()];
            e[i] = Q::from_integer(s.into());
            let p = space.project(&e);
            if p.iter().any(|x| !x.is_zero()) {
                candidates.push(p);
            }
        }
    }
    candidates.sort();
    candidates.dedup();
    let vertices = candidates
        .iter()
        .enumerate()
        .filter(|(i, p)| {
            let others: Vec<&Vec<Q>> = candidates
                .iter()
                .enumerate()
                .filter(|(k, _)| k != i)
                .map(|(_, q)| q)
                .collect();
            !in_hull(&others, p)
        })
        .map(|(_, p)| p.clone())
        .collect();
    Ok(vertices)
}
