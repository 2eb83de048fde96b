//! Cubical complexes, the Serre diagonal, cap products and duality.
//!
//! Cells are elementary cubes of an integer grid whose axes may be periodic.
//! Each cube knows its front and back faces for the Serre diagonal
//! `Δ(e) = Σ_S ± front_S(e) ⊗ back_S(e)`, where `front_S` keeps the axes in
//! `S` free and pins the others at their lower end, and `back_S` keeps the
//! complementary axes free and pins `S` at the upper end. The cap product
//! evaluates a cochain on fronts and keeps backs. This table is carried
//! through restriction and doubling, so duality works on doubles too.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::complex::{Cell, CellComplex, CellSet};
use super::groups::{chain_homology, relative_cohomology, CellularGroup, Subquotient};
use super::matrix::IntMatrix;
use super::HomologyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axis {
    pub len: u32,
    pub periodic: bool,
}

impl Axis {
    pub fn closed(len: u32) -> Self {
        Axis { len, periodic: false }
    }

    pub fn periodic(len: u32) -> Self {
        Axis { len, periodic: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeLabel {
    pub lo: Vec<u32>,
    pub free: Vec<bool>,
    /// 0 for the original sheet, 1 for the twin in a double.
    pub sheet: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalTerm {
    pub front: usize,
    pub back: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubicalComplex {
    complex: CellComplex,
    labels: Vec<CubeLabel>,
    diagonal: Vec<Vec<DiagonalTerm>>,
}

fn shuffle_sign(free_axes: &[usize], front: &[bool]) -> i8 {
    // pairs (a in back, b in front) with a before b
    let mut inversions = 0;
    for (i, &a) in free_axes.iter().enumerate() {
        if front[a] {
            continue;
        }
        inversions += free_axes[i + 1..].iter().filter(|&&b| front[b]).count();
    }
    if inversions % 2 == 0 { 1 } else { -1 }
}

impl CubicalComplex {
    /// All elementary cubes of the grid `Π [0, len]` (axes optionally
    /// periodic), ordered by dimension then position.
    pub fn grid(axes: &[Axis]) -> Result<Self, HomologyError> {
        if axes.iter().any(|a| a.len == 0 || (a.periodic && a.len < 2)) {
            return Err(HomologyError::Unsupported(
                "axes need length ≥ 1, periodic axes length ≥ 2".into(),
            ));
        }
        let d = axes.len();
        let mut keys: Vec<(Vec<u32>, Vec<bool>)> = Vec::new();
        for mask in 0u32..(1 << d) {
            let free: Vec<bool> = (0..d).map(|a| mask >> a & 1 == 1).collect();
            let extents: Vec<u32> = (0..d)
                .map(|a| {
                    if free[a] || axes[a].periodic {
                        axes[a].len
                    } else {
                        axes[a].len + 1
                    }
                })
                .collect();
            let total: u64 = extents.iter().map(|&e| e as u64).product();
            for mut idx in 0..total {
                let mut lo = vec![0u32; d];
                for a in (0..d).rev() {
                    lo[a] = (idx % extents[a] as u64) as u32;
                    idx /= extents[a] as u64;
                }
                keys.push((lo, free.clone()));
            }
        }
        keys.sort_by(|x, y| {
            let dx = x.1.iter().filter(|b| **b).count();
            let dy = y.1.iter().filter(|b| **b).count();
            (dx, &x.1, &x.0).cmp(&(dy, &y.1, &y.0))
        });
        let index: HashMap<(Vec<u32>, Vec<bool>), usize> =
            keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        let shift = |lo: &[u32], a: usize| {
            let mut l = lo.to_vec();
            l[a] += 1;
            if axes[a].periodic {
                l[a] %= axes[a].len;
            }
            l
        };
        let mut cells = Vec::with_capacity(keys.len());
        let mut diagonal = Vec::with_capacity(keys.len());
        for (lo, free) in &keys {
            let free_axes: Vec<usize> = (0..d).filter(|&a| free[a]).collect();
            let mut bd: BTreeMap<usize, i64> = BTreeMap::new();
            for (i, &a) in free_axes.iter().enumerate() {
                let mut f = free.clone();
                f[a] = false;
                let sign = if i % 2 == 0 { 1 } else { -1 };
                *bd.entry(index[&(shift(lo, a), f.clone())]).or_default() += sign;
                *bd.entry(index[&(lo.clone(), f)]).or_default() -= sign;
            }
            cells.push(Cell::new(
                free_axes.len(),
                bd.into_iter().filter(|(_, v)| *v != 0).collect(),
            ));
            let mut terms = Vec::new();
            for sub in 0u32..(1 << free_axes.len()) {
                let mut front = vec![false; d];
                for (i, &a) in free_axes.iter().enumerate() {
                    front[a] = sub >> i & 1 == 1;
                }
                let back_free: Vec<bool> = (0..d).map(|a| free[a] && !front[a]).collect();
                let mut back_lo = lo.clone();
                for &a in &free_axes {
                    if front[a] {
                        back_lo = shift(&back_lo, a);
                    }
                }
                terms.push(DiagonalTerm {
                    front: index[&(lo.clone(), front.clone())],
                    back: index[&(back_lo, back_free)],
                    sign: shuffle_sign(&free_axes, &front),
                });
            }
            diagonal.push(terms);
        }
        let labels = keys
            .into_iter()
            .map(|(lo, free)| CubeLabel { lo, free, sheet: 0 })
            .collect();
        Ok(CubicalComplex {
            complex: CellComplex::new(cells)?,
            labels,
            diagonal,
        })
    }

    /// A complex with a hand-supplied diagonal table. Grid labels are left
    /// empty, so [`Self::grid_boundary`] sees nothing.
    pub fn from_parts(complex: CellComplex, diagonal: Vec<Vec<DiagonalTerm>>) -> Result<Self, HomologyError> {
        if diagonal.len() != complex.len() {
            return Err(HomologyError::Invalid {
                cell: diagonal.len().min(complex.len()),
                reason: "diagonal table does not cover every cell".into(),
            });
        }
        for (i, terms) in diagonal.iter().enumerate() {
            for t in terms {
                let ok = t.front < complex.len()
                    && t.back < complex.len()
                    && t.sign.abs() == 1
                    && complex.cell(t.front).dim + complex.cell(t.back).dim == complex.cell(i).dim;
                if !ok {
                    return Err(HomologyError::Invalid {
                        cell: i,
                        reason: "malformed diagonal term".into(),
                    });
                }
            }
        }
        let labels = vec![
            CubeLabel {
                lo: Vec::new(),
                free: Vec::new(),
                sheet: 0
            };
            complex.len()
        ];
        Ok(CubicalComplex {
            complex,
            labels,
            diagonal,
        })
    }

    pub fn torus(n: u32, m: u32) -> Result<Self, HomologyError> {
        Self::grid(&[Axis::periodic(n), Axis::periodic(m)])
    }

    /// `[0, radial] × S¹`, the first axis across the annulus.
    pub fn annulus(radial: u32, around: u32) -> Result<Self, HomologyError> {
        Self::grid(&[Axis::closed(radial), Axis::periodic(around)])
    }

    /// Boundary of the unit `(k+1)`-cube, a `k`-sphere.
    pub fn sphere(k: usize) -> Result<Self, HomologyError> {
        let cube = Self::grid(&vec![Axis::closed(1); k + 1])?;
        let top = cube.complex.cells_of_dim(k + 1)[0];
        let keep = CellSet::from_indices(cube.len(), (0..cube.len()).filter(|&i| i != top));
        cube.restrict(&keep)
    }

    pub fn complex(&self) -> &CellComplex {
        &self.complex
    }

    /// Mutable access to cell tags (depth, stratum, locus).
    pub fn complex_mut(&mut self) -> &mut CellComplex {
        &mut self.complex
    }

    pub fn label(&self, i: usize) -> &CubeLabel {
        &self.labels[i]
    }

    pub fn len(&self) -> usize {
        self.complex.len()
    }

    pub fn is_empty(&self) -> bool {
        self.complex.is_empty()
    }

    pub fn diagonal(&self, i: usize) -> &[DiagonalTerm] {
        &self.diagonal[i]
    }

    /// Cells lying on the faces `x_a = 0` or `x_a = len` of closed axes.
    pub fn grid_boundary(&self, axes: &[Axis]) -> CellSet {
        CellSet::from_indices(
            self.len(),
            (0..self.len()).filter(|&i| {
                let l = &self.labels[i];
                l.free.len() == axes.len()
                    && axes.iter().enumerate().any(|(a, ax)| {
                    !ax.periodic && !l.free[a] && (l.lo[a] == 0 || l.lo[a] == ax.len)
                })
            }),
        )
    }

    /// The subcomplex on `keep`, reindexed in order.
    pub fn restrict(&self, keep: &CellSet) -> Result<Self, HomologyError> {
        if !self.complex.is_subcomplex(keep) {
            return Err(HomologyError::NotSubcomplex("restriction".into()));
        }
        let new_index: HashMap<usize, usize> = keep.iter().enumerate().map(|(k, i)| (i, k)).collect();
        let mut cells = Vec::new();
        let mut labels = Vec::new();
        let mut diagonal = Vec::new();
        for i in keep.iter() {
            let mut c = self.complex.cell(i).clone();
            c.boundary = c.boundary.iter().map(|&(f, s)| (new_index[&f], s)).collect();
            cells.push(c);
            labels.push(self.labels[i].clone());
            diagonal.push(
                self.diagonal[i]
                    .iter()
                    .map(|t| DiagonalTerm {
                        front: new_index[&t.front],
                        back: new_index[&t.back],
                        sign: t.sign,
                    })
                    .collect(),
            );
        }
        Ok(CubicalComplex {
            complex: CellComplex::new(cells)?,
            labels,
            diagonal,
        })
    }

    /// Double along `glue`, with the swap involution.
    pub fn double(&self, glue: &CellSet) -> Result<(Self, Vec<usize>), HomologyError> {
        let (complex, swap) = self.complex.double(glue)?;
        let n = self.len();
        let mut labels = self.labels.clone();
        let mut diagonal = self.diagonal.clone();
        for i in 0..n {
            if swap[i] != i {
                let mut l = self.labels[i].clone();
                l.sheet = 1;
                labels.push(l);
                diagonal.push(
                    self.diagonal[i]
                        .iter()
                        .map(|t| DiagonalTerm {
                            front: swap[t.front],
                            back: swap[t.back],
                            sign: t.sign,
                        })
                        .collect(),
                );
            }
        }
        Ok((
            CubicalComplex {
                complex,
                labels,
                diagonal,
            },
            swap,
        ))
    }

    /// Cap product of a cochain of degree `p` with a chain, both indexed by
    /// cell.
    pub fn cap(&self, cochain: &[BigInt], p: usize, chain: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.len()];
        for (i, c) in chain.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for t in &self.diagonal[i] {
                if self.complex.cell(t.front).dim != p {
                    continue;
                }
                let v = &cochain[t.front];
                if !v.is_zero() {
                    out[t.back] += v * c * BigInt::from(t.sign);
                }
            }
        }
        out
    }

    pub fn fundamental_cycle(&self, boundary: &CellSet) -> Result<Vec<BigInt>, HomologyError> {
        fundamental_cycle(&self.complex, boundary)
    }

    /// Poincaré–Lefschetz duality `H_j(X) → H^{n-j}(X, ∂X)`, computed as the
    /// inverse of capping with the fundamental class. `boundary` is empty
    /// for closed complexes.
    pub fn duality(&self, boundary: &CellSet, j: usize) -> Result<Duality, HomologyError> {
        let cx = &self.complex;
        let n = cx.dim().ok_or(HomologyError::NotManifold("empty complex".into()))?;
        if j > n {
            return Err(HomologyError::Unsupported(format!("degree {j} above dimension {n}")));
        }
        let fundamental = self.fundamental_cycle(boundary)?;
        let homology = chain_homology(cx, &cx.all(), j);
        let cohomology = relative_cohomology(cx, &cx.all(), boundary, n - j)?;
        let mut cols = Vec::new();
        for g in cohomology.generators() {
            let chain = self.cap(&self.globalize(&cohomology, g), n - j, &fundamental);
            let on_cells: Vec<BigInt> = homology.cells.iter().map(|&i| chain[i].clone()).collect();
            // the cap of a relative cocycle with the relative fundamental
            // cycle must be a cycle
            if j > 0 {
                let below: Vec<usize> = cx.cells_of_dim(j - 1).to_vec();
                let bd = cx.boundary_matrix(j, &below, &homology.cells).apply(&on_cells);
                if bd.iter().any(|v| !v.is_zero()) {
                    return Err(HomologyError::NotManifold("cap product is not a cycle".into()));
                }
            }
            cols.push(homology.coordinates(&on_cells));
        }
        let cap = IntMatrix::from_columns(homology.rank(), &cols);
        let pd = cap
            .unimodular_inverse()
            .ok_or_else(|| HomologyError::NotManifold("duality matrix is not unimodular".into()))?;
        Ok(Duality {
            degree: j,
            dual_degree: n - j,
            cap,
            pd,
            homology,
            cohomology,
        })
    }

    fn globalize(&self, g: &CellularGroup, v: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.len()];
        for (k, &i) in g.cells.iter().enumerate() {
            out[i] = v[k].clone();
        }
        out
    }
}

/// Fundamental cycle relative to `boundary`: the top chain, with
/// coefficients ±1, whose boundary lies in `boundary`.
pub fn fundamental_cycle(cx: &CellComplex, boundary: &CellSet) -> Result<Vec<BigInt>, HomologyError> {
    let n = cx.dim().ok_or(HomologyError::NotManifold("empty complex".into()))?;
    let top: Vec<usize> = cx.cells_of_dim(n).to_vec();
    let faces: Vec<usize> = if n == 0 {
        Vec::new()
    } else {
        cx.cells_of_dim(n - 1).iter().copied().filter(|&f| !boundary.contains(f)).collect()
    };
    let m = if n == 0 {
        IntMatrix::zeros(0, top.len())
    } else {
        cx.boundary_matrix(n, &faces, &top)
    };
    let g = Subquotient::compute(&m, &IntMatrix::zeros(top.len(), 0));
    if g.rank != 1 {
        return Err(HomologyError::NotOrientable(format!(
            "top relative cycles have rank {}",
            g.rank
        )));
    }
    let z = &g.free_generators[0];
    if z.iter().any(|v| !v.abs().is_one()) {
        return Err(HomologyError::NotManifold(
            "fundamental cycle does not cover every top cell once".into(),
        ));
    }
    let mut out = vec![BigInt::zero(); cx.len()];
    for (k, &i) in top.iter().enumerate() {
        out[i] = z[k].clone();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Duality {
    pub degree: usize,
    pub dual_degree: usize,
    /// `H^{n-j} → H_j`, capping with the fundamental class.
    pub cap: IntMatrix,
    /// `H_j → H^{n-j}`, its inverse.
    pub pd: IntMatrix,
    pub homology: CellularGroup,
    pub cohomology: CellularGroup,
}

impl Duality {
    /// Dual of a homology class given in coordinates, as coordinates.
    pub fn dual(&self, class: &[BigInt]) -> Vec<BigInt> {
        self.pd.apply(class)
    }

    /// Representing cocycle (on `cohomology.cells`) of the dual class.
    pub fn dual_cocycle(&self, class: &[BigInt]) -> Vec<BigInt> {
        let c = self.dual(class);
        let mut out = vec![BigInt::zero(); self.cohomology.cells.len()];
        for (k, g) in self.cohomology.generators().iter().enumerate() {
            for (o, v) in out.iter_mut().zip(g) {
                *o += &c[k] * v;
            }
        }
        out
    }
}
