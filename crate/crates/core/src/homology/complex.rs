//! Finite regular cell complexes with stratum tags and filtration depths.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::matrix::IntMatrix;
use super::HomologyError;

/// Which part of a manifold with boundary a cell lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Locus {
    #[default]
    Interior,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub dim: usize,
    /// Faces of dimension `dim - 1` with incidence numbers.
    pub boundary: Vec<(usize, i64)>,
    /// Identifier of the stratum component containing the open cell.
    pub stratum: Option<String>,
    /// Filtration depth: the cell lies in the `depth`-th filtration term.
    pub depth: u32,
    pub locus: Locus,
}

impl Cell {
    pub fn new(dim: usize, boundary: Vec<(usize, i64)>) -> Self {
        Cell {
            dim,
            boundary,
            stratum: None,
            depth: 0,
            locus: Locus::Interior,
        }
    }
}

/// A set of cells by index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSet(Vec<bool>);

impl CellSet {
    pub fn empty(n: usize) -> Self {
        CellSet(vec![false; n])
    }

    pub fn full(n: usize) -> Self {
        CellSet(vec![true; n])
    }

    pub fn from_indices(n: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n);
        for i in idx {
            s.0[i] = true;
        }
        s
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn insert(&mut self, i: usize) {
        self.0[i] = true;
    }

    pub fn len(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.0.iter().any(|b| *b)
    }

    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        CellSet(self.0.iter().zip(&other.0).map(|(a, b)| *a || *b).collect())
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| !*a || *b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellComplex {
    cells: Vec<Cell>,
    #[serde(skip)]
    by_dim: Vec<Vec<usize>>,
}

impl CellComplex {
    /// Checks face dimensions, indices and `∂∘∂ = 0`.
    pub fn new(cells: Vec<Cell>) -> Result<Self, HomologyError> {
        for (i, c) in cells.iter().enumerate() {
            for &(f, inc) in &c.boundary {
                let face = cells.get(f).ok_or_else(|| HomologyError::Invalid {
                    cell: i,
                    reason: format!("face {f} does not exist"),
                })?;
                if face.dim + 1 != c.dim {
                    return Err(HomologyError::Invalid {
                        cell: i,
                        reason: format!("face {f} has dimension {}", face.dim),
                    });
                }
                if inc == 0 {
                    return Err(HomologyError::Invalid {
                        cell: i,
                        reason: "zero incidence".into(),
                    });
                }
            }
            if c.dim == 0 && !c.boundary.is_empty() {
                return Err(HomologyError::Invalid {
                    cell: i,
                    reason: "vertex with faces".into(),
                });
            }
        }
        let mut cx = CellComplex { cells, by_dim: Vec::new() };
        cx.index();
        for (i, c) in cx.cells.iter().enumerate() {
            let mut dd: BTreeMap<usize, i64> = BTreeMap::new();
            for &(f, a) in &c.boundary {
                for &(g, b) in &cx.cells[f].boundary {
                    *dd.entry(g).or_default() += a * b;
                }
            }
            if dd.values().any(|v| *v != 0) {
                return Err(HomologyError::Invalid {
                    cell: i,
                    reason: "boundary of boundary is not zero".into(),
                });
            }
        }
        Ok(cx)
    }

    fn index(&mut self) {
        let top = self.cells.iter().map(|c| c.dim + 1).max().unwrap_or(0);
        self.by_dim = vec![Vec::new(); top];
        for (i, c) in self.cells.iter().enumerate() {
            self.by_dim[c.dim].push(i);
        }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &Cell {
        &self.cells[i]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Top dimension, or `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        self.by_dim.len().checked_sub(1)
    }

    pub fn cells_of_dim(&self, q: usize) -> &[usize] {
        self.by_dim.get(q).map_or(&[], Vec::as_slice)
    }

    pub fn count(&self, q: usize) -> usize {
        self.cells_of_dim(q).len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..self.by_dim.len())
            .map(|q| if q % 2 == 0 { self.count(q) as i64 } else { -(self.count(q) as i64) })
            .sum()
    }

    /// Sets cell tags; used by model builders.
    pub fn tag(&mut self, i: usize, stratum: Option<String>, depth: u32, locus: Locus) {
        let c = &mut self.cells[i];
        c.stratum = stratum;
        c.depth = depth;
        c.locus = locus;
    }

    pub fn all(&self) -> CellSet {
        CellSet::full(self.len())
    }

    pub fn none(&self) -> CellSet {
        CellSet::empty(self.len())
    }

    /// Smallest subcomplex containing `seeds`.
    pub fn closure(&self, seeds: impl IntoIterator<Item = usize>) -> CellSet {
        let mut set = self.none();
        let mut stack: Vec<usize> = seeds.into_iter().collect();
        while let Some(i) = stack.pop() {
            if set.contains(i) {
                continue;
            }
            set.insert(i);
            stack.extend(self.cells[i].boundary.iter().map(|(f, _)| *f));
        }
        set
    }

    pub fn is_subcomplex(&self, s: &CellSet) -> bool {
        s.iter()
            .all(|i| self.cells[i].boundary.iter().all(|(f, _)| s.contains(*f)))
    }

    /// Cells with filtration depth `>= j`.
    pub fn depth_at_least(&self, j: u32) -> CellSet {
        CellSet::from_indices(self.len(), (0..self.len()).filter(|&i| self.cells[i].depth >= j))
    }

    pub fn boundary_cells(&self) -> CellSet {
        CellSet::from_indices(
            self.len(),
            (0..self.len()).filter(|&i| self.cells[i].locus == Locus::Boundary),
        )
    }

    pub fn max_depth(&self) -> u32 {
        self.cells.iter().map(|c| c.depth).max().unwrap_or(0)
    }

    /// `∂_q : C_q → C_{q-1}` restricted to the given cells, with rows and
    /// columns in increasing cell order.
    pub fn boundary_matrix(&self, q: usize, rows: &[usize], cols: &[usize]) -> IntMatrix {
        let row_of: HashMap<usize, usize> = rows.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut m = IntMatrix::zeros(rows.len(), cols.len());
        for (c, &j) in cols.iter().enumerate() {
            debug_assert_eq!(self.cells[j].dim, q);
            for &(f, inc) in &self.cells[j].boundary {
                if let Some(&r) = row_of.get(&f) {
                    m[(r, c)] += BigInt::from(inc);
                }
            }
        }
        m
    }

    /// `q`-cells of `a` not in `b`, in increasing order.
    pub fn relative_cells(&self, q: usize, a: &CellSet, b: &CellSet) -> Vec<usize> {
        self.cells_of_dim(q)
            .iter()
            .copied()
            .filter(|&i| a.contains(i) && !b.contains(i))
            .collect()
    }

    /// Evaluates a cochain, given on `cells`, against a chain given on the
    /// same kind of list.
    pub fn pairing(
        cochain_cells: &[usize],
        cochain: &[BigInt],
        chain_cells: &[usize],
        chain: &[BigInt],
    ) -> BigInt {
        let at: HashMap<usize, &BigInt> = cochain_cells.iter().copied().zip(cochain).collect();
        chain_cells
            .iter()
            .zip(chain)
            .filter(|(_, c)| !c.is_zero())
            .filter_map(|(i, c)| at.get(i).map(|v| *v * c))
            .sum()
    }

    /// Two copies glued along `glue`, a subcomplex. Cells of `glue` are
    /// shared; every other cell gets a twin. Returns the double and the swap
    /// involution on its cells. Stratum identifiers of twins get a `'`.
    pub fn double(&self, glue: &CellSet) -> Result<(CellComplex, Vec<usize>), HomologyError> {
        if !self.is_subcomplex(glue) {
            return Err(HomologyError::NotSubcomplex("gluing locus".into()));
        }
        let n = self.len();
        let mut twin = vec![0usize; n];
        let mut cells = self.cells.clone();
        for i in 0..n {
            if glue.contains(i) {
                twin[i] = i;
            } else {
                twin[i] = cells.len();
                let mut c = self.cells[i].clone();
                c.stratum = c.stratum.map(|s| format!("{s}'"));
                cells.push(c);
            }
        }
        for i in 0..n {
            if !glue.contains(i) {
                let t = twin[i];
                cells[t].boundary = self.cells[i]
                    .boundary
                    .iter()
                    .map(|&(f, s)| (twin[f], s))
                    .collect();
            }
        }
        let mut swap: Vec<usize> = (0..cells.len()).collect();
        for i in 0..n {
            swap[i] = twin[i];
            swap[twin[i]] = i;
        }
        Ok((CellComplex::new(cells)?, swap))
    }
}

/// On-disk form: cells with string or numeric identifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellComplexFile {
    #[serde(default)]
    pub name: Option<String>,
    pub cells: Vec<RawCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCell {
    pub id: serde_json::Value,
    pub dim: usize,
    #[serde(default)]
    pub boundary: Vec<(serde_json::Value, i64)>,
    #[serde(default)]
    pub stratum: Option<String>,
    #[serde(default)]
    pub depth: u32,
    #[serde(default)]
    pub locus: Locus,
}

impl CellComplexFile {
    pub fn parse(text: &str) -> Result<Self, HomologyError> {
        serde_json::from_str(text).map_err(|e| HomologyError::Parse {
            line: e.line(),
            column: e.column(),
            reason: e.to_string(),
        })
    }

    pub fn to_complex(&self) -> Result<CellComplex, HomologyError> {
        let key = |v: &serde_json::Value| v.to_string();
        let mut index = HashMap::new();
        for (i, c) in self.cells.iter().enumerate() {
            if index.insert(key(&c.id), i).is_some() {
                return Err(HomologyError::Invalid {
                    cell: i,
                    reason: format!("duplicate id {}", c.id),
                });
            }
        }
        let cells = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let boundary = c
                    .boundary
                    .iter()
                    .map(|(f, s)| {
                        index.get(&key(f)).map(|&k| (k, *s)).ok_or_else(|| HomologyError::Invalid {
                            cell: i,
                            reason: format!("unknown face id {f}"),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Cell {
                    dim: c.dim,
                    boundary,
                    stratum: c.stratum.clone(),
                    depth: c.depth,
                    locus: c.locus,
                })
            })
            .collect::<Result<Vec<_>, HomologyError>>()?;
        CellComplex::new(cells)
    }

    pub fn from_complex(name: Option<String>, cx: &CellComplex) -> Self {
        CellComplexFile {
            name,
            cells: cx
                .cells()
                .iter()
                .enumerate()
                .map(|(i, c)| RawCell {
                    id: i.into(),
                    dim: c.dim,
                    boundary: c.boundary.iter().map(|&(f, s)| (f.into(), s)).collect(),
                    stratum: c.stratum.clone(),
                    depth: c.depth,
                    locus: c.locus,
                })
                .collect(),
        }
    }
}

impl<'de> Deserialize<'de> for CellComplex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            cells: Vec<Cell>,
        }
        let r = Raw::deserialize(d)?;
        CellComplex::new(r.cells).map_err(serde::de::Error::custom)
    }
}

/// Standard small complexes.
pub mod models {
    use super::*;

    fn v() -> Cell {
        Cell::new(0, vec![])
    }

    /// Circle with one vertex and one edge.
    pub fn circle() -> CellComplex {
        CellComplex::new(vec![v(), Cell::new(1, vec![(0, 1), (0, -1)])]).unwrap()
    }

    /// Interval `[0, 1]`: vertices 0, 1 and edge 2.
    pub fn interval() -> CellComplex {
        CellComplex::new(vec![v(), v(), Cell::new(1, vec![(1, 1), (0, -1)])]).unwrap()
    }

    /// Disk with boundary circle: vertex 0, edge 1, face 2.
    pub fn disk() -> CellComplex {
        CellComplex::new(vec![
            v(),
            Cell::new(1, vec![(0, 1), (0, -1)]),
            Cell::new(2, vec![(1, 1)]),
        ])
        .unwrap()
    }

    /// Torus with one vertex, edges a, b and a square `aba⁻¹b⁻¹`.
    pub fn torus() -> CellComplex {
        CellComplex::new(vec![
            v(),
            Cell::new(1, vec![(0, 1), (0, -1)]),
            Cell::new(1, vec![(0, 1), (0, -1)]),
            Cell::new(2, vec![(1, 1), (2, 1), (1, -1), (2, -1)]),
        ])
        .unwrap()
    }

    /// Real projective plane: one cell in each dimension, `∂e₂ = 2e₁`.
    pub fn projective_plane() -> CellComplex {
        CellComplex::new(vec![
            v(),
            Cell::new(1, vec![(0, 1), (0, -1)]),
            Cell::new(2, vec![(1, 2)]),
        ])
        .unwrap()
    }

    /// Two-sphere: a vertex and a disk attached by the constant map.
    pub fn sphere() -> CellComplex {
        CellComplex::new(vec![v(), Cell::new(2, vec![])]).unwrap()
    }
}
