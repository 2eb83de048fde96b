//! Differential complexes built from the depth filtration of a stratified
//! cell model, their ℓ¹ norms in the stratum-component basis, and the
//! localized duality operators.
//!
//! Writing `F_j` for the cells of depth at least `j` and `N` for the top
//! dimension, the group in codimension `j` is `H^{N-j}(F_j, F_{j+1})` and the
//! differential to codimension `j-1` is the connecting map of the triple
//! `(F_{j-1}, F_j, F_{j+1})`. The interior variant adds the boundary
//! subcomplex to every `F_j`; the double variant works on the double along
//! the boundary.
//!
//! Each group is read in the basis of its stratum components: a component
//! carries a relative fundamental cycle `Φ_K`, and a class has coordinate
//! `⟨φ, Φ_K⟩` at `K`. This is only a basis when the pairing matrix against
//! the homology generators is unimodular, which is checked.

pub mod export;
pub mod heuristic;
mod lp;
pub mod models;
pub mod quotient;

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::homology::complex::RawCell;
use crate::homology::cubical::DiagonalTerm;
use crate::homology::groups::{connecting_hom, les_check, relative_cohomology, Subquotient};
use crate::homology::{
    smith_normal_form, CellComplex, CellComplexFile, CellSet, CubicalComplex, HomologyError, IntMatrix, Locus,
};
use crate::union_find::UnionFind;

pub use lp::Q;
pub use quotient::{ball_polytope, quotient_norm, NormedQuotient, QuotientNorm};

#[derive(Debug, Error)]
pub enum MhoError {
    #[error("stratification defect: {0}")]
    StratificationDefect(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error("quotient of dimension {dim} exceeds the hull cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

fn defect(msg: impl Into<String>) -> MhoError {
    MhoError::StratificationDefect(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Interior,
    Double,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Interior => "interior",
            Variant::Double => "double",
        })
    }
}

/// Cells of a model, optionally with a diagonal table for cap products.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Cells {
    Plain(CellComplex),
    Cubical(CubicalComplex),
}

impl Cells {
    pub fn complex(&self) -> &CellComplex {
        match self {
            Cells::Plain(c) => c,
            Cells::Cubical(c) => c.complex(),
        }
    }

    pub fn cubical(&self) -> Option<&CubicalComplex> {
        match self {
            Cells::Plain(_) => None,
            Cells::Cubical(c) => Some(c),
        }
    }

    fn double(&self, glue: &CellSet) -> Result<Cells, HomologyError> {
        Ok(match self {
            Cells::Plain(c) => Cells::Plain(c.double(glue)?.0),
            Cells::Cubical(c) => Cells::Cubical(c.double(glue)?.0),
        })
    }
}

/// A cell complex whose cells carry a stratum tag, a depth (the codimension
/// of the stratum, plus one on boundary strata) and a locus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratifiedModel {
    pub name: String,
    /// Set for models discretized from sampled atlases.
    pub heuristic: bool,
    pub cells: Cells,
}

/// On-disk form of a [`StratifiedModel`]. Diagonal terms are
/// `[front id, back id, sign]`, one list per cell in file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    #[serde(default)]
    pub heuristic: bool,
    pub cells: Vec<RawCell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<Vec<Vec<(serde_json::Value, serde_json::Value, i8)>>>,
}

impl StratifiedModel {
    pub fn complex(&self) -> &CellComplex {
        self.cells.complex()
    }

    pub fn parse(text: &str) -> Result<Self, MhoError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| HomologyError::Parse {
            line: e.line(),
            column: e.column(),
            reason: e.to_string(),
        })?;
        file.to_model()
    }

    pub fn to_file(&self) -> ModelFile {
        let raw = CellComplexFile::from_complex(None, self.complex());
        let diagonal = self.cells.cubical().map(|c| {
            (0..c.len())
                .map(|i| {
                    c.diagonal(i)
                        .iter()
                        .map(|t| (t.front.into(), t.back.into(), t.sign))
                        .collect()
                })
                .collect()
        });
        ModelFile {
            name: self.name.clone(),
            heuristic: self.heuristic,
            cells: raw.cells,
            diagonal,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("model files serialize");
        s.push('\n');
        s
    }
}

impl ModelFile {
    pub fn to_model(&self) -> Result<StratifiedModel, MhoError> {
        let complex = CellComplexFile {
            name: Some(self.name.clone()),
            cells: self.cells.clone(),
        }
        .to_complex()?;
        let cells = match &self.diagonal {
            None => Cells::Plain(complex),
            Some(table) => {
                let index: HashMap<String, usize> =
                    self.cells.iter().enumerate().map(|(i, c)| (c.id.to_string(), i)).collect();
                let lookup = |cell: usize, v: &serde_json::Value| {
                    index.get(&v.to_string()).copied().ok_or_else(|| HomologyError::Invalid {
                        cell,
                        reason: format!("diagonal names unknown cell {v}"),
                    })
                };
                let mut diagonal = Vec::with_capacity(table.len());
                for (i, terms) in table.iter().enumerate() {
                    let mut row = Vec::with_capacity(terms.len());
                    for (f, b, sign) in terms {
                        row.push(DiagonalTerm {
                            front: lookup(i, f)?,
                            back: lookup(i, b)?,
                            sign: *sign,
                        });
                    }
                    diagonal.push(row);
                }
                Cells::Cubical(CubicalComplex::from_parts(complex, diagonal)?)
            }
        };
        Ok(StratifiedModel {
            name: self.name.clone(),
            heuristic: self.heuristic,
            cells,
        })
    }
}

/// Number of connected open strata of exact depth `depth`, optionally
/// restricted to one locus. Cells join when one is a face of the other and
/// both carry the same tag.
pub fn open_strata(cx: &CellComplex, depth: u32, locus: Option<Locus>) -> usize {
    let keep = |i: usize| {
        let c = cx.cell(i);
        c.depth == depth && locus.is_none_or(|l| c.locus == l)
    };
    let mut uf = UnionFind::new(cx.len());
    for i in (0..cx.len()).filter(|&i| keep(i)) {
        for &(f, _) in &cx.cell(i).boundary {
            if keep(f) && cx.cell(f).stratum == cx.cell(i).stratum {
                uf.union(i, f);
            }
        }
    }
    let members: Vec<usize> = (0..cx.len()).filter(|&i| keep(i)).collect();
    uf.labels(&members).into_iter().max().map_or(0, |m| m + 1)
}

/// Component count the basis rule demands in codimension `j`.
pub fn basis_rule(model: &StratifiedModel, variant: Variant, j: u32) -> usize {
    let cx = model.complex();
    let has_boundary = !cx.boundary_cells().is_empty();
    match variant {
        Variant::Double if has_boundary => {
            2 * open_strata(cx, j, Some(Locus::Interior)) + open_strata(cx, j, Some(Locus::Boundary))
        }
        // a closed model is its own double
        Variant::Double => open_strata(cx, j, None),
        Variant::Interior => open_strata(cx, j, Some(Locus::Interior)),
    }
}

struct Component {
    id: String,
    cycle: Vec<BigInt>,
}

/// Stratum components among the `q`-cells of `upper \ lower`, each with its
/// relative fundamental cycle written on those cells.
fn components(cx: &CellComplex, upper: &CellSet, lower: &CellSet, q: usize) -> Result<(Vec<usize>, Vec<Component>), MhoError> {
    let rel = cx.relative_cells(q, upper, lower);
    let mut uf = UnionFind::new(rel.len());
    let mut by_face: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, &s) in rel.iter().enumerate() {
        for &(f, _) in &cx.cell(s).boundary {
            if !lower.contains(f) {
                by_face.entry(f).or_default().push(k);
            }
        }
    }
    for (f, sharing) in &by_face {
        for w in sharing.windows(2) {
            let (a, b) = (rel[w[0]], rel[w[1]]);
            if cx.cell(a).stratum != cx.cell(b).stratum {
                return Err(defect(format!(
                    "strata {:?} and {:?} meet along cell {f} outside the deeper locus",
                    cx.cell(a).stratum,
                    cx.cell(b).stratum
                )));
            }
            uf.union(w[0], w[1]);
        }
    }
    let members: Vec<usize> = (0..rel.len()).collect();
    let labels = uf.labels(&members);
    let count = labels.iter().max().map_or(0, |m| m + 1);
    let mut seen_per_tag: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::with_capacity(count);
    for c in 0..count {
        let cells: Vec<usize> = (0..rel.len()).filter(|&k| labels[k] == c).collect();
        let tag = cx.cell(rel[cells[0]]).stratum.clone().unwrap_or_else(|| "?".into());
        let n = seen_per_tag.entry(tag.clone()).or_default();
        let id = format!("{tag}#{n}");
        *n += 1;
        let globals: Vec<usize> = cells.iter().map(|&k| rel[k]).collect();
        let mut faces: Vec<usize> = globals
            .iter()
            .flat_map(|&s| cx.cell(s).boundary.iter().map(|&(f, _)| f))
            .filter(|&f| !lower.contains(f))
            .collect();
        faces.sort_unstable();
        faces.dedup();
        let m = if q == 0 {
            IntMatrix::zeros(0, globals.len())
        } else {
            cx.boundary_matrix(q, &faces, &globals)
        };
        let z = Subquotient::compute(&m, &IntMatrix::zeros(globals.len(), 0));
        if z.rank != 1 || z.free_generators[0].iter().any(|v| !v.abs().is_one()) {
            return Err(defect(format!(
                "component {id} has no oriented relative fundamental cycle"
            )));
        }
        let mut g = z.free_generators[0].clone();
        if g[0].is_negative() {
            g.iter_mut().for_each(|v| *v = -v.clone());
        }
        let mut cycle = vec![BigInt::zero(); rel.len()];
        for (k, v) in cells.iter().zip(g) {
            cycle[*k] = v;
        }
        out.push(Component { id, cycle });
    }
    Ok((rel, out))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MhoGroup {
    pub codim: u32,
    pub degree: usize,
    /// Stratum-component identifiers, in basis order.
    pub basis: Vec<String>,
    /// Relative cells the cycles and cocycles live on.
    pub cells: Vec<usize>,
    pub cycles: Vec<Vec<BigInt>>,
    /// Component coordinates of the homology generators.
    pub pairing: IntMatrix,
    pub expected_rank: usize,
}

impl MhoGroup {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MhoDifferential {
    pub from_codim: u32,
    pub to_codim: u32,
    /// Component basis of the source to component basis of the target.
    pub matrix: IntMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MhoComplex {
    pub model: String,
    pub variant: Variant,
    pub heuristic: bool,
    pub top_dim: usize,
    pub groups: Vec<MhoGroup>,
    pub differentials: Vec<MhoDifferential>,
    #[serde(skip)]
    ambient: Cells,
    #[serde(skip)]
    base: CellSet,
    #[serde(skip)]
    filtration: Vec<CellSet>,
}

pub fn build_mho(model: &StratifiedModel, variant: Variant) -> Result<MhoComplex, MhoError> {
    let cx = model.complex();
    let boundary = cx.boundary_cells();
    if !cx.is_subcomplex(&boundary) {
        return Err(defect("boundary cells do not form a subcomplex"));
    }
    let (ambient, base) = match variant {
        Variant::Double if !boundary.is_empty() => {
            let d = model.cells.double(&boundary)?;
            let none = d.complex().none();
            (d, none)
        }
        Variant::Double => (model.cells.clone(), cx.none()),
        Variant::Interior => (model.cells.clone(), boundary),
    };
    let acx = ambient.complex();
    let top = acx.dim().ok_or_else(|| defect("empty model"))?;
    let n = top as u32;
    let filtration: Vec<CellSet> = (0..=n + 1).map(|j| acx.depth_at_least(j).union(&base)).collect();
    for (j, f) in filtration.iter().enumerate() {
        if !acx.is_subcomplex(f) {
            return Err(defect(format!("cells of depth ≥ {j} do not form a subcomplex")));
        }
    }
    if let Some(i) = (0..acx.len()).find(|&i| !base.contains(i) && acx.cell(i).depth > n) {
        return Err(defect(format!("cell {i} is deeper than the top dimension")));
    }
    for j in 0..=n {
        let layer = (0..acx.len()).filter(|&i| filtration[j as usize].contains(i) && !filtration[j as usize + 1].contains(i));
        for i in layer {
            if acx.cell(i).dim + j as usize > top {
                return Err(defect(format!(
                    "cell {i} of dimension {} sits in codimension {j}",
                    acx.cell(i).dim
                )));
            }
        }
    }

    let mut groups = Vec::new();
    let mut inverse_pairings = Vec::new();
    for j in 0..=n {
        let (upper, lower) = (&filtration[j as usize], &filtration[j as usize + 1]);
        let q = top - j as usize;
        let h = relative_cohomology(acx, upper, lower, q)?;
        if !h.torsion().is_empty() {
            return Err(defect(format!("codimension {j} group has torsion {:?}", h.torsion())));
        }
        let (cells, comps) = components(acx, upper, lower, q)?;
        debug_assert_eq!(cells, h.cells);
        let expected = basis_rule(model, variant, j);
        if h.rank() != comps.len() || comps.len() != expected {
            return Err(defect(format!(
                "codimension {j}: rank {} with {} components, basis rule asks for {expected}",
                h.rank(),
                comps.len()
            )));
        }
        let mut pairing = IntMatrix::zeros(comps.len(), h.rank());
        for (r, c) in comps.iter().enumerate() {
            for (k, g) in h.generators().iter().enumerate() {
                pairing[(r, k)] = CellComplex::pairing(&h.cells, g, &cells, &c.cycle);
            }
        }
        let inv = pairing.unimodular_inverse().ok_or_else(|| {
            defect(format!("codimension {j}: stratum components do not form a basis"))
        })?;
        inverse_pairings.push(inv);
        groups.push(MhoGroup {
            codim: j,
            degree: q,
            basis: comps.iter().map(|c| c.id.clone()).collect(),
            cells,
            cycles: comps.into_iter().map(|c| c.cycle).collect(),
            pairing,
            expected_rank: expected,
        });
    }

    let mut differentials = Vec::new();
    for j in 1..=n {
        let (a, b, c) = (
            &filtration[j as usize - 1],
            &filtration[j as usize],
            &filtration[j as usize + 1],
        );
        let q = top - j as usize;
        let les = les_check(acx, a, b, c)?;
        if !les.exact {
            return Err(MhoError::Invariant(format!("exact sequence of triple {j} fails")));
        }
        let dh = connecting_hom(acx, a, b, c, q)?;
        let m = &(&groups[j as usize - 1].pairing * &dh) * &inverse_pairings[j as usize];
        differentials.push(MhoDifferential {
            from_codim: j,
            to_codim: j - 1,
            matrix: m,
        });
    }
    for w in differentials.windows(2) {
        // w[0]: j → j−1, w[1]: j+1 → j
        if !(&w[0].matrix * &w[1].matrix).is_zero() {
            return Err(MhoError::Invariant(format!(
                "δ∘δ ≠ 0 from codimension {}",
                w[1].from_codim
            )));
        }
    }
    Ok(MhoComplex {
        model: model.name.clone(),
        variant,
        heuristic: model.heuristic,
        top_dim: top,
        groups,
        differentials,
        ambient,
        base,
        filtration,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupDump {
    pub codim: u32,
    pub degree: usize,
    pub rank: usize,
    pub basis: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferentialDump {
    pub from_codim: u32,
    pub to_codim: u32,
    pub matrix: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MhoDump {
    pub model: String,
    pub variant: Variant,
    pub heuristic: bool,
    pub top_dim: usize,
    pub groups: Vec<GroupDump>,
    pub differentials: Vec<DifferentialDump>,
}

impl MhoComplex {
    pub fn ambient(&self) -> &CellComplex {
        self.ambient.complex()
    }

    /// `F_j`, including the boundary in the interior variant.
    pub fn filtration(&self, j: u32) -> &CellSet {
        &self.filtration[j as usize]
    }

    pub fn group(&self, codim: u32) -> Option<&MhoGroup> {
        self.groups.get(codim as usize)
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.groups.iter().map(MhoGroup::rank).collect()
    }

    /// The differential into codimension `codim`, from `codim + 1`.
    pub fn incoming(&self, codim: u32) -> Option<&MhoDifferential> {
        self.differentials.iter().find(|d| d.to_codim == codim)
    }

    pub fn outgoing(&self, codim: u32) -> Option<&MhoDifferential> {
        self.differentials.iter().find(|d| d.from_codim == codim)
    }

    /// Image of the incoming differential, as columns in the component basis.
    pub fn boundary_image(&self, codim: u32) -> IntMatrix {
        match self.incoming(codim) {
            Some(d) => d.matrix.clone(),
            None => IntMatrix::zeros(self.group(codim).map_or(0, MhoGroup::rank), 0),
        }
    }

    pub fn delta_squared_vanishes(&self) -> bool {
        self.differentials
            .windows(2)
            .all(|w| (&w[0].matrix * &w[1].matrix).is_zero())
    }

    pub fn normed_quotient(&self, codim: u32) -> NormedQuotient {
        NormedQuotient::by_image(&self.boundary_image(codim))
    }

    pub fn dump(&self) -> Result<MhoDump, MhoError> {
        let differentials = self
            .differentials
            .iter()
            .map(|d| {
                Ok(DifferentialDump {
                    from_codim: d.from_codim,
                    to_codim: d.to_codim,
                    matrix: d
                        .matrix
                        .to_i64_rows()
                        .ok_or_else(|| MhoError::Invariant("matrix entry exceeds 64 bits".into()))?,
                })
            })
            .collect::<Result<_, MhoError>>()?;
        Ok(MhoDump {
            model: self.model.clone(),
            variant: self.variant,
            heuristic: self.heuristic,
            top_dim: self.top_dim,
            groups: self
                .groups
                .iter()
                .map(|g| GroupDump {
                    codim: g.codim,
                    degree: g.degree,
                    rank: g.rank(),
                    basis: g.basis.clone(),
                })
                .collect(),
            differentials,
        })
    }
}

/// Duality followed by localization to the codimension-`j` components:
/// `H_j → H^{N-j} → C_j / B_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizedPd {
    pub degree: usize,
    pub variant: Variant,
    pub basis: Vec<String>,
    pub homology_rank: usize,
    /// Rows follow `basis`, columns the homology generators.
    pub matrix: IntMatrix,
    /// Incoming boundaries, as columns in the same basis.
    pub subspace: IntMatrix,
    pub rank_mod_boundaries: usize,
    /// Homology coordinates spanning the kernel over the rationals.
    pub kernel: Vec<Vec<BigInt>>,
}

impl LocalizedPd {
    pub fn is_injective(&self) -> bool {
        self.kernel.is_empty()
    }

    /// Whether the class with these homology coordinates maps into the
    /// boundaries.
    pub fn annihilates(&self, class: &[BigInt]) -> bool {
        let image = self.matrix.apply(class);
        let with = self.subspace.hstack(&IntMatrix::from_columns(image.len(), &[image]));
        with.rank() == self.subspace.rank()
    }
}

pub fn localized_pd(mho: &MhoComplex, j: usize) -> Result<LocalizedPd, MhoError> {
    let cub = mho
        .ambient
        .cubical()
        .ok_or_else(|| MhoError::Unsupported("duality needs a model with a diagonal table".into()))?;
    let group = mho
        .group(j as u32)
        .ok_or_else(|| MhoError::Unsupported(format!("no codimension {j} group")))?;
    let duality = cub.duality(&mho.base, j)?;
    let h = duality.homology.rank();
    let mut matrix = IntMatrix::zeros(group.rank(), h);
    for k in 0..h {
        let mut class = vec![BigInt::zero(); h];
        class[k] = BigInt::one();
        let cocycle = duality.dual_cocycle(&class);
        for (r, cycle) in group.cycles.iter().enumerate() {
            matrix[(r, k)] = CellComplex::pairing(&duality.cohomology.cells, &cocycle, &group.cells, cycle);
        }
    }
    let subspace = mho.boundary_image(j as u32);
    let joint = matrix.hstack(&subspace);
    let rank_mod_boundaries = joint.rank() - subspace.rank();
    let s = smith_normal_form(&joint);
    let mut kernel: Vec<Vec<BigInt>> = Vec::new();
    for c in s.rank..joint.cols() {
        let x: Vec<BigInt> = s.v.column(c)[..h].to_vec();
        if x.iter().all(Zero::is_zero) {
            continue;
        }
        let mut trial = kernel.clone();
        trial.push(x.clone());
        if IntMatrix::from_columns(h, &trial).rank() == trial.len() {
            kernel = trial;
        }
    }
    debug_assert_eq!(kernel.len() + rank_mod_boundaries, h);
    Ok(LocalizedPd {
        degree: j,
        variant: mho.variant,
        basis: group.basis.clone(),
        homology_rank: h,
        matrix,
        subspace,
        rank_mod_boundaries,
        kernel,
    })
}
