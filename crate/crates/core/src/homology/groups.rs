//! (Co)homology groups with explicit generators, connecting maps of
//! triples, and the long exact sequence check.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::complex::{CellComplex, CellSet};
use super::matrix::IntMatrix;
use super::snf::smith_normal_form;
use super::HomologyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficients {
    Integers,
    Rationals,
}

/// `ker(out) / im(inn)` over the integers, on a free module of rank `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subquotient {
    pub rank: usize,
    pub torsion: Vec<BigInt>,
    /// Cycles spanning the free part.
    pub free_generators: Vec<Vec<BigInt>>,
    /// Cycles generating the torsion summands, with their orders.
    pub torsion_generators: Vec<(BigInt, Vec<BigInt>)>,
    /// Sends a cycle to its coordinates on the free part.
    pub coords: IntMatrix,
}

impl Subquotient {
    pub fn compute(out: &IntMatrix, inn: &IntMatrix) -> Self {
        let n = out.cols();
        debug_assert_eq!(inn.rows(), n);
        let s = smith_normal_form(out);
        let r = s.rank;
        let z = s.v.select_columns(r..n);
        let k = s.v_inv.select_rows(r..n);
        let w = &k * inn;
        let sw = smith_normal_form(&w);
        let basis = &z * &sw.u_inv;
        let full = &sw.u * &k;
        let kk = n - r;
        let mut free_generators = Vec::new();
        let mut torsion_generators = Vec::new();
        let mut free_rows = Vec::new();
        for i in 0..kk {
            if i < sw.rank {
                let d = &sw.diagonal[i];
                if !d.is_one() {
                    torsion_generators.push((d.clone(), basis.column(i)));
                }
            } else {
                free_generators.push(basis.column(i));
                free_rows.push(i);
            }
        }
        Subquotient {
            rank: free_generators.len(),
            torsion: torsion_generators.iter().map(|(d, _)| d.clone()).collect(),
            free_generators,
            torsion_generators,
            coords: full.select_rows(free_rows),
        }
    }

    pub fn coordinates(&self, cycle: &[BigInt]) -> Vec<BigInt> {
        self.coords.apply(cycle)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyGroup {
    pub degree: usize,
    pub rank: usize,
    pub torsion: Vec<BigInt>,
}

/// Cellular homology of the whole complex.
pub fn homology(cx: &CellComplex, q: usize, coefficients: Coefficients) -> HomologyGroup {
    let g = chain_homology(cx, &cx.all(), q);
    HomologyGroup {
        degree: q,
        rank: g.group.rank,
        torsion: match coefficients {
            Coefficients::Integers => g.group.torsion,
            Coefficients::Rationals => Vec::new(),
        },
    }
}

/// Betti numbers in degrees `0..=dim`.
pub fn betti_numbers(cx: &CellComplex) -> Vec<usize> {
    (0..=cx.dim().unwrap_or(0))
        .map(|q| homology(cx, q, Coefficients::Rationals).rank)
        .collect()
}

/// A homology or cohomology group of a cellular (co)chain complex, with
/// chains and cochains written on `cells`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellularGroup {
    pub degree: usize,
    pub cells: Vec<usize>,
    pub group: Subquotient,
}

impl CellularGroup {
    pub fn rank(&self) -> usize {
        self.group.rank
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.group.torsion
    }

    pub fn generators(&self) -> &[Vec<BigInt>] {
        &self.group.free_generators
    }

    /// Coordinates of a (co)cycle written on `cells`.
    pub fn coordinates(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.group.coordinates(v)
    }

    /// Rewrites a vector given on other cells onto `self.cells`, keeping
    /// shared entries and dropping or zero-filling the rest.
    pub fn transport(&self, cells: &[usize], v: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.cells.len()];
        let mut k = 0;
        for (i, &c) in cells.iter().enumerate() {
            while k < self.cells.len() && self.cells[k] < c {
                k += 1;
            }
            if k < self.cells.len() && self.cells[k] == c {
                out[k] = v[i].clone();
            }
        }
        out
    }
}

/// `H_q` of the subcomplex `set`.
pub fn chain_homology(cx: &CellComplex, set: &CellSet, q: usize) -> CellularGroup {
    let none = cx.none();
    let cells = cx.relative_cells(q, set, &none);
    let below = if q == 0 { Vec::new() } else { cx.relative_cells(q - 1, set, &none) };
    let above = cx.relative_cells(q + 1, set, &none);
    let out = if q == 0 {
        IntMatrix::zeros(0, cells.len())
    } else {
        cx.boundary_matrix(q, &below, &cells)
    };
    let inn = cx.boundary_matrix(q + 1, &cells, &above);
    CellularGroup {
        degree: q,
        group: Subquotient::compute(&out, &inn),
        cells,
    }
}

fn check_pair(cx: &CellComplex, a: &CellSet, b: &CellSet) -> Result<(), HomologyError> {
    if !cx.is_subcomplex(a) {
        return Err(HomologyError::NotSubcomplex("A".into()));
    }
    if !cx.is_subcomplex(b) {
        return Err(HomologyError::NotSubcomplex("B".into()));
    }
    if !b.is_subset(a) {
        return Err(HomologyError::NotSubcomplex("B is not contained in A".into()));
    }
    Ok(())
}

/// Coboundary `δ^q` on relative cochains of `(A, B)`.
fn coboundary(cx: &CellComplex, a: &CellSet, b: &CellSet, q: usize) -> (Vec<usize>, Vec<usize>, IntMatrix) {
    let cells = cx.relative_cells(q, a, b);
    let above = cx.relative_cells(q + 1, a, b);
    let m = cx.boundary_matrix(q + 1, &cells, &above).transpose();
    (cells, above, m)
}

/// `H^q(A, B)` with representing cocycles on the `q`-cells of `A \ B`.
pub fn relative_cohomology(
    cx: &CellComplex,
    a: &CellSet,
    b: &CellSet,
    q: usize,
) -> Result<CellularGroup, HomologyError> {
    check_pair(cx, a, b)?;
    let (cells, _, out) = coboundary(cx, a, b, q);
    let inn = if q == 0 {
        IntMatrix::zeros(cells.len(), 0)
    } else {
        coboundary(cx, a, b, q - 1).2
    };
    Ok(CellularGroup {
        degree: q,
        group: Subquotient::compute(&out, &inn),
        cells,
    })
}

pub fn cohomology(cx: &CellComplex, q: usize) -> CellularGroup {
    relative_cohomology(cx, &cx.all(), &cx.none(), q).expect("the whole complex is a subcomplex")
}

/// Applies `δ` to a cochain on `cells` (extended by zero), returning its
/// values on `targets`.
pub fn apply_coboundary(cx: &CellComplex, cells: &[usize], cochain: &[BigInt], targets: &[usize]) -> Vec<BigInt> {
    let value: std::collections::HashMap<usize, &BigInt> = cells.iter().copied().zip(cochain).collect();
    targets
        .iter()
        .map(|&s| {
            cx.cell(s)
                .boundary
                .iter()
                .filter_map(|&(f, inc)| value.get(&f).map(|v| *v * BigInt::from(inc)))
                .sum()
        })
        .collect()
}

/// Connecting map `H^q(B, C) → H^{q+1}(A, B)` of the triple, on free parts:
/// lift a cocycle by zero, take its coboundary, read it in `(A, B)`.
pub fn connecting_hom(
    cx: &CellComplex,
    a: &CellSet,
    b: &CellSet,
    c: &CellSet,
    q: usize,
) -> Result<IntMatrix, HomologyError> {
    check_pair(cx, a, b)?;
    check_pair(cx, b, c)?;
    let source = relative_cohomology(cx, b, c, q)?;
    let target = relative_cohomology(cx, a, b, q + 1)?;
    let cols: Vec<Vec<BigInt>> = source
        .generators()
        .iter()
        .map(|g| {
            let d = apply_coboundary(cx, &source.cells, g, &target.cells);
            target.coordinates(&d)
        })
        .collect();
    Ok(IntMatrix::from_columns(target.rank(), &cols))
}

/// The map between relative groups induced by the identity on shared cells
/// (restriction or extension by zero), on free parts.
pub fn induced_map(from: &CellularGroup, to: &CellularGroup) -> IntMatrix {
    let cols: Vec<Vec<BigInt>> = from
        .generators()
        .iter()
        .map(|g| to.coordinates(&to.transport(&from.cells, g)))
        .collect();
    IntMatrix::from_columns(to.rank(), &cols)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LesNode {
    pub label: String,
    pub rank: usize,
    pub rank_in: usize,
    pub rank_out: usize,
}

impl LesNode {
    pub fn exact(&self) -> bool {
        self.rank == self.rank_in + self.rank_out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LesReport {
    pub nodes: Vec<LesNode>,
    pub exact: bool,
}

/// Rational rank identities along the cohomology sequence of the triple
/// `A ⊇ B ⊇ C`:
/// `H^q(A,B) → H^q(A,C) → H^q(B,C) → H^{q+1}(A,B) → …`.
pub fn les_check(cx: &CellComplex, a: &CellSet, b: &CellSet, c: &CellSet) -> Result<LesReport, HomologyError> {
    check_pair(cx, a, b)?;
    check_pair(cx, b, c)?;
    let top = cx.dim().unwrap_or(0);
    let mut groups = Vec::new();
    let mut maps: Vec<IntMatrix> = Vec::new();
    for q in 0..=top {
        let ab = relative_cohomology(cx, a, b, q)?;
        let ac = relative_cohomology(cx, a, c, q)?;
        let bc = relative_cohomology(cx, b, c, q)?;
        maps.push(induced_map(&ab, &ac));
        maps.push(induced_map(&ac, &bc));
        maps.push(connecting_hom(cx, a, b, c, q)?);
        groups.push((format!("H^{q}(A,B)"), ab.rank()));
        groups.push((format!("H^{q}(A,C)"), ac.rank()));
        groups.push((format!("H^{q}(B,C)"), bc.rank()));
    }
    let ranks: Vec<usize> = maps.iter().map(IntMatrix::rank).collect();
    let nodes: Vec<LesNode> = groups
        .into_iter()
        .enumerate()
        .map(|(k, (label, rank))| LesNode {
            label,
            rank,
            rank_in: if k == 0 { 0 } else { ranks[k - 1] },
            rank_out: ranks[k],
        })
        .collect();
    let exact = nodes.iter().all(LesNode::exact);
    Ok(LesReport { nodes, exact })
}

#[cfg(test)]
mod tests {
    use super::super::complex::models;
    use super::*;

    fn ranks(cx: &CellComplex) -> Vec<usize> {
        betti_numbers(cx)
    }

    #[test]
    fn classical_examples() {
        assert_eq!(ranks(&models::torus()), vec![1, 2, 1]);
        assert_eq!(ranks(&models::circle()), vec![1, 1]);
        let rp2 = models::projective_plane();
        let h1 = homology(&rp2, 1, Coefficients::Integers);
        assert_eq!(h1.rank, 0);
        assert_eq!(h1.torsion, vec![BigInt::from(2)]);
        assert!(homology(&rp2, 1, Coefficients::Rationals).torsion.is_empty());
        assert_eq!(ranks(&models::sphere()), vec![1, 0, 1]);
    }

    #[test]
    fn relative_examples() {
        let d = models::disk();
        let circle = CellSet::from_indices(3, [0, 1]);
        assert_eq!(relative_cohomology(&d, &d.all(), &circle, 2).unwrap().rank(), 1);
        for q in 0..3 {
            assert_eq!(relative_cohomology(&d, &d.all(), &d.all(), q).unwrap().rank(), 0);
        }
        let i = models::interval();
        let ends = CellSet::from_indices(3, [0, 1]);
        assert_eq!(relative_cohomology(&i, &i.all(), &ends, 1).unwrap().rank(), 1);
        let bad = CellSet::from_indices(3, [2]);
        assert!(relative_cohomology(&i, &i.all(), &bad, 1).is_err());
    }

    #[test]
    fn disk_connecting_map_is_an_isomorphism() {
        let d = models::disk();
        let circle = CellSet::from_indices(3, [0, 1]);
        let m = connecting_hom(&d, &d.all(), &circle, &d.none(), 1).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 1));
        assert!(m.is_unimodular());
        let z = connecting_hom(&d, &d.all(), &d.all(), &circle, 1).unwrap();
        assert!(z.is_zero());
        assert!(les_check(&d, &d.all(), &circle, &d.none()).unwrap().exact);
    }

    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn random_triples_give_exact_sequences(seeds in proptest::collection::vec(0usize..64, 1..12), cut_b in 1usize..12, cut_c in 0usize..12) {
            let t = super::super::cubical::CubicalComplex::torus(3, 3).unwrap();
            let cx = t.complex();
            let n = cx.len();
            let seeds: Vec<usize> = seeds.into_iter().map(|s| s % n).collect();
            let cut_b = cut_b.min(seeds.len());
            let cut_c = cut_c.min(cut_b);
            let a = cx.closure(seeds.iter().copied());
            let b = cx.closure(seeds[..cut_b].iter().copied().skip(1));
            let c = cx.closure(seeds[..cut_c].iter().copied().skip(1));
            let r = les_check(cx, &a, &b, &c).unwrap();
            prop_assert!(r.exact, "{:?}", r.nodes);
        }
    }
}
