//! Registry of simplicial seminorm values and the rules that produce them.
//!
//! Nothing here computes a simplicial norm. Values come from a small set of
//! classical rules (surfaces, hyperbolic volume, additivity under connected
//! sums in dimension ≥ 3, vanishing for amenable fundamental groups and for
//! sphere-bundle total spaces) or from annotations supplied in a file. Every
//! value carries a provenance string.

use std::collections::BTreeMap;
use std::path::Path;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormError {
    #[error("no annotation registered for `{id}` in degree {degree}")]
    Missing { id: String, degree: u32 },
    #[error("conflicting annotation for `{id}` in degree {degree}")]
    Conflict { id: String, degree: u32 },
    #[error("unsupported space description: {0}")]
    Unsupported(String),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("malformed annotation `{id}`: {reason}")]
    Malformed { id: String, reason: String },
    #[error("annotation without provenance: `{0}`")]
    Unprovenanced(String),
    #[error("reading norms file: {0}")]
    Io(String),
}

/// Rank of the quotient of `H_j` by the zero-seminorm subspace, exactly or
/// as a lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReducedRank {
    Exact(u64),
    AtLeast(u64),
}

impl ReducedRank {
    pub fn value(&self) -> u64 {
        match *self {
            ReducedRank::Exact(r) | ReducedRank::AtLeast(r) => r,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ReducedRank::Exact(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassNorm {
    pub class: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnnotationData {
    /// Seminorm of each listed class; `homology_rank` is the rank of `H_j`
    /// when the listed classes form a basis of it.
    Values {
        classes: Vec<ClassNorm>,
        #[serde(default)]
        homology_rank: Option<u64>,
    },
    /// `H_j` has rank `rank`; the zero-seminorm subspace is spanned by
    /// `zero_basis` (integer coordinates in a fixed basis of `H_j`).
    ZeroSubspace { rank: u64, zero_basis: Vec<Vec<i64>> },
    /// Only a lower bound on the reduced rank is known.
    LowerBound { rank_at_least: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormAnnotation {
    pub space: String,
    pub degree: u32,
    pub data: AnnotationData,
    pub provenance: String,
}

impl NormAnnotation {
    pub fn validate(&self) -> Result<(), NormError> {
        let bad = |reason: &str| NormError::Malformed {
            id: self.space.clone(),
            reason: reason.into(),
        };
        if self.provenance.trim().is_empty() {
            return Err(NormError::Unprovenanced(self.space.clone()));
        }
        match &self.data {
            AnnotationData::Values { classes, homology_rank } => {
                if homology_rank.is_some_and(|r| r != classes.len() as u64) {
                    return Err(bad("homology rank differs from the number of classes"));
                }
                if classes.is_empty() {
                    return Err(bad("no classes"));
                }
                if classes.iter().any(|c| !(c.value >= 0.0) || !c.value.is_finite()) {
                    return Err(bad("seminorm values must be finite and nonnegative"));
                }
            }
            AnnotationData::ZeroSubspace { rank, zero_basis } => {
                if zero_basis.iter().any(|v| v.len() as u64 != *rank) {
                    return Err(bad("zero-subspace vector has the wrong length"));
                }
            }
            AnnotationData::LowerBound { .. } => {}
        }
        Ok(())
    }

    /// Rank of `H_j` modulo classes of zero seminorm.
    pub fn reduced_rank(&self) -> ReducedRank {
        match &self.data {
            AnnotationData::ZeroSubspace { rank, zero_basis } => {
                ReducedRank::Exact(rank - rational_rank(zero_basis) as u64)
            }
            AnnotationData::LowerBound { rank_at_least } => ReducedRank::AtLeast(*rank_at_least),
            AnnotationData::Values { classes, homology_rank } => {
                let nonzero = classes.iter().filter(|c| c.value > 0.0).count() as u64;
                // combinations of nonzero classes may still vanish, so beyond
                // a one-class basis only "at least one" is certain
                match (nonzero, homology_rank) {
                    (0, Some(_)) => ReducedRank::Exact(0),
                    (n, Some(1)) => ReducedRank::Exact(n),
                    (n, _) => ReducedRank::AtLeast(n.min(1)),
                }
            }
        }
    }
}

fn rational_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &m[rank][c];
                for k in c..cols {
                    let d = &f * &m[rank][k];
                    m[r][k] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedConstant {
    pub name: String,
    pub value: f64,
    pub citation: String,
}

/// Spaces built from registered constructors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceDescription {
    /// Closed orientable surface.
    Surface { genus: u32 },
    /// Closed manifold with amenable fundamental group; `betti[j]` is the
    /// rank of `H_j`.
    Amenable { dim: u32, betti: Vec<u64> },
    /// Closed hyperbolic manifold of the given volume.
    Hyperbolic { dim: u32, volume: f64 },
    /// Connected sum of closed manifolds of dimension ≥ 3.
    ConnectedSum { parts: Vec<SpaceDescription> },
    /// Double of a closed manifold with an open ball removed, i.e. `N # N`.
    PuncturedDouble { of: Box<SpaceDescription> },
    /// Total space of a sphere bundle with fibers of positive dimension.
    SphereBundle { base: Box<SpaceDescription>, fiber_dim: u32 },
    /// The 2-cycle given by a disjoint family of embedded surfaces of the
    /// listed genera, each of genus ≥ 2, inside a 4-manifold with `H_2` of
    /// rank at least the number of surfaces.
    SurfaceFamily { genera: Vec<u32> },
}

impl SpaceDescription {
    pub fn dim(&self) -> u32 {
        match self {
            SpaceDescription::Surface { .. } => 2,
            SpaceDescription::Amenable { dim, .. } | SpaceDescription::Hyperbolic { dim, .. } => *dim,
            SpaceDescription::ConnectedSum { parts } => parts.first().map_or(0, |p| p.dim()),
            SpaceDescription::PuncturedDouble { of } => of.dim(),
            SpaceDescription::SphereBundle { base, fiber_dim } => base.dim() + fiber_dim,
            SpaceDescription::SurfaceFamily { .. } => 4,
        }
    }
}

/// Simplicial volume of the fundamental class, with provenance.
fn fundamental_norm(
    d: &SpaceDescription,
    constants: &BTreeMap<String, NamedConstant>,
) -> Result<(f64, String), NormError> {
    use SpaceDescription as S;
    Ok(match d {
        S::Surface { genus } => (
            (4.0 * *genus as f64 - 4.0).max(0.0),
            format!("surface rule: genus {genus} gives max(4g-4, 0)"),
        ),
        S::Amenable { .. } => (0.0, "amenable fundamental group: seminorm vanishes".into()),
        S::Hyperbolic { dim, volume } => {
            let name = format!("v{dim}");
            let c = constants
                .get(&name)
                .ok_or_else(|| NormError::UnknownConstant(name.clone()))?;
            (
                volume / c.value,
                format!("hyperbolic rule: volume / {name} ({})", c.citation),
            )
        }
        S::ConnectedSum { parts } => {
            if d.dim() < 3 || parts.iter().any(|p| p.dim() != d.dim()) {
                return Err(NormError::Unsupported(
                    "connected sums need equal dimensions ≥ 3".into(),
                ));
            }
            let mut total = 0.0;
            let mut why = Vec::new();
            for p in parts {
                let (v, w) = fundamental_norm(p, constants)?;
                total += v;
                why.push(w);
            }
            (total, format!("additivity under connected sum, dim ≥ 3 [{}]", why.join("; ")))
        }
        S::PuncturedDouble { of } => {
            if of.dim() < 3 {
                return Err(NormError::Unsupported("doubling rule needs dim ≥ 3".into()));
            }
            let (v, w) = fundamental_norm(of, constants)?;
            (2.0 * v, format!("double is N # N, additivity in dim ≥ 3 [{w}]"))
        }
        S::SphereBundle { fiber_dim, .. } => {
            if *fiber_dim == 0 {
                return Err(NormError::Unsupported("sphere bundle with 0-dimensional fibers".into()));
            }
            (0.0, "sphere-bundle total space: fundamental class has zero seminorm".into())
        }
        S::SurfaceFamily { .. } => {
            return Err(NormError::Unsupported(
                "surface family is a 2-cycle, not a closed manifold".into(),
            ))
        }
    })
}

/// Annotations implied by the registered rules for `space`.
pub fn apply_rules(
    id: &str,
    description: &SpaceDescription,
    constants: &BTreeMap<String, NamedConstant>,
) -> Result<Vec<NormAnnotation>, NormError> {
    use SpaceDescription as S;
    let ann = |degree, data, provenance: String| NormAnnotation {
        space: id.to_string(),
        degree,
        data,
        provenance,
    };
    Ok(match description {
        S::Amenable { betti, .. } => betti
            .iter()
            .enumerate()
            .map(|(j, &b)| {
                ann(
                    j as u32,
                    AnnotationData::ZeroSubspace {
                        rank: b,
                        zero_basis: (0..b as usize)
                            .map(|i| (0..b as usize).map(|k| i64::from(i == k)).collect())
                            .collect(),
                    },
                    "amenable fundamental group: every class has zero seminorm".into(),
                )
            })
            .collect(),
        S::SurfaceFamily { genera } => {
            if genera.iter().any(|&g| g < 2) {
                return Err(NormError::Unsupported("surface family needs genus ≥ 2".into()));
            }
            let value: f64 = genera.iter().map(|&g| 2.0 * g as f64 - 2.0).sum();
            vec![
                ann(
                    2,
                    AnnotationData::Values {
                        classes: vec![ClassNorm {
                            class: "sum-of-surfaces".into(),
                            value,
                        }],
                        homology_rank: None,
                    },
                    "surface family cycle: sum of (2g-2) over the surfaces".into(),
                ),
                ann(
                    2,
                    AnnotationData::LowerBound {
                        rank_at_least: genera.len() as u64,
                    },
                    "surface family: each surface of genus ≥ 2 contributes an independent class".into(),
                ),
            ]
        }
        _ => {
            let (value, provenance) = fundamental_norm(description, constants)?;
            vec![ann(
                description.dim(),
                AnnotationData::Values {
                    classes: vec![ClassNorm {
                        class: "fundamental".into(),
                        value,
                    }],
                    homology_rank: Some(1),
                },
                provenance,
            )]
        }
    })
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsFile {
    pub version: u32,
    #[serde(default)]
    pub constants: Vec<NamedConstant>,
    #[serde(default)]
    pub spaces: Vec<SpaceEntry>,
    #[serde(default)]
    pub annotations: Vec<NormAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceEntry {
    pub id: String,
    pub description: SpaceDescription,
}

/// Annotations keyed by `(space, degree)`. Where a rule yields both a value
/// and a lower bound for the same key, both are kept, in registration order.
#[derive(Debug, Clone, Default)]
pub struct NormRegistry {
    constants: BTreeMap<String, NamedConstant>,
    entries: BTreeMap<(String, u32), Vec<NormAnnotation>>,
}

impl NormRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_file(file: &NormsFile) -> Result<Self, NormError> {
        let mut reg = NormRegistry::new();
        for c in &file.constants {
            reg.constants.insert(c.name.clone(), c.clone());
        }
        for s in &file.spaces {
            for a in apply_rules(&s.id, &s.description, &reg.constants)? {
                reg.register(a)?;
            }
        }
        for a in &file.annotations {
            reg.register(a.clone())?;
        }
        Ok(reg)
    }

    pub fn load(path: &Path) -> Result<Self, NormError> {
        let text = std::fs::read_to_string(path).map_err(|e| NormError::Io(e.to_string()))?;
        let file: NormsFile =
            serde_json::from_str(&text).map_err(|e| NormError::Io(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn constant(&self, name: &str) -> Result<&NamedConstant, NormError> {
        self.constants
            .get(name)
            .ok_or_else(|| NormError::UnknownConstant(name.into()))
    }

    pub fn constants(&self) -> &BTreeMap<String, NamedConstant> {
        &self.constants
    }

    /// Identical re-registration is a no-op; a different annotation of the
    /// same kind for the same key is a conflict.
    pub fn register(&mut self, a: NormAnnotation) -> Result<(), NormError> {
        a.validate()?;
        let list = self.entries.entry((a.space.clone(), a.degree)).or_default();
        if list.contains(&a) {
            return Ok(());
        }
        let same_kind = |b: &NormAnnotation| {
            std::mem::discriminant(&b.data) == std::mem::discriminant(&a.data)
        };
        if list.iter().any(same_kind) {
            return Err(NormError::Conflict {
                id: a.space,
                degree: a.degree,
            });
        }
        list.push(a);
        Ok(())
    }

    pub fn lookup(&self, space: &str, degree: u32) -> Result<&[NormAnnotation], NormError> {
        self.entries
            .get(&(space.to_string(), degree))
            .map(Vec::as_slice)
            .ok_or_else(|| NormError::Missing {
                id: space.into(),
                degree,
            })
    }

    /// Best known reduced rank: an exact value if any annotation gives one,
    /// else the largest lower bound. Returns the provenance used.
    pub fn reduced_rank(&self, space: &str, degree: u32) -> Result<(ReducedRank, String), NormError> {
        let anns = self.lookup(space, degree)?;
        let mut best: Option<(ReducedRank, String)> = None;
        for a in anns {
            let r = a.reduced_rank();
            let better = match (&best, r) {
                (None, _) => true,
                (Some((ReducedRank::Exact(_), _)), _) => false,
                (Some(_), ReducedRank::Exact(_)) => true,
                (Some((b, _)), r) => r.value() > b.value(),
            };
            if better {
                best = Some((r, a.provenance.clone()));
            }
        }
        Ok(best.expect("lookup returns a nonempty list"))
    }

    pub fn spaces(&self) -> impl Iterator<Item = &(String, u32)> {
        self.entries.keys()
    }
}

/// The norms file shipped with the crate.
pub fn shipped_norms_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join("norms.json")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constants() -> BTreeMap<String, NamedConstant> {
        let mut m = BTreeMap::new();
        m.insert(
            "v3".into(),
            NamedConstant {
                name: "v3".into(),
                value: 1.0149416064096536,
                citation: "regular ideal tetrahedron".into(),
            },
        );
        m
    }

    #[test]
    fn torus_reduced_rank_is_zero() {
        let anns = apply_rules(
            "torus",
            &SpaceDescription::Amenable { dim: 2, betti: vec![1, 2, 1] },
            &constants(),
        )
        .unwrap();
        assert_eq!(anns[1].reduced_rank(), ReducedRank::Exact(0));
    }

    #[test]
    fn sphere_bundle_and_connected_sum() {
        let hyp = SpaceDescription::Hyperbolic { dim: 3, volume: 2.0298832128193072 };
        let bundle = SpaceDescription::SphereBundle { base: Box::new(hyp.clone()), fiber_dim: 2 };
        let a = apply_rules("b", &bundle, &constants()).unwrap();
        assert_eq!(a[0].reduced_rank(), ReducedRank::Exact(0));
        let (single, _) = fundamental_norm(&hyp, &constants()).unwrap();
        assert!((single - 2.0).abs() < 1e-12);
        let sum = SpaceDescription::ConnectedSum { parts: vec![hyp.clone(), hyp.clone()] };
        let (v, _) = fundamental_norm(&sum, &constants()).unwrap();
        let (d, _) =
            fundamental_norm(&SpaceDescription::PuncturedDouble { of: Box::new(hyp) }, &constants())
                .unwrap();
        assert_eq!(v, 2.0 * single);
        assert_eq!(d, v);
    }

    #[test]
    fn hyperbolic_fundamental_class_has_reduced_rank_one() {
        let a = apply_rules(
            "n",
            &SpaceDescription::Hyperbolic { dim: 3, volume: 0.9427 },
            &constants(),
        )
        .unwrap();
        assert_eq!(a[0].reduced_rank(), ReducedRank::Exact(1));
        let missing = apply_rules(
            "n",
            &SpaceDescription::Hyperbolic { dim: 5, volume: 1.0 },
            &constants(),
        );
        assert_eq!(missing, Err(NormError::UnknownConstant("v5".into())));
    }

    #[test]
    fn surface_family_keeps_its_own_value() {
        let a = apply_rules(
            "m",
            &SpaceDescription::SurfaceFamily { genera: vec![2, 3] },
            &constants(),
        )
        .unwrap();
        match &a[0].data {
            AnnotationData::Values { classes, .. } => assert_eq!(classes[0].value, 2.0 + 4.0),
            _ => panic!(),
        }
        let mut reg = NormRegistry::new();
        for x in a {
            reg.register(x).unwrap();
        }
        assert_eq!(reg.reduced_rank("m", 2).unwrap().0, ReducedRank::AtLeast(2));
        // the surface's own fundamental class is a different value
        let s = apply_rules("s", &SpaceDescription::Surface { genus: 2 }, &constants()).unwrap();
        match &s[0].data {
            AnnotationData::Values { classes, .. } => assert_eq!(classes[0].value, 4.0),
            _ => panic!(),
        }
    }

    #[test]
    fn registry_rules() {
        let mut reg = NormRegistry::new();
        let a = NormAnnotation {
            space: "x".into(),
            degree: 1,
            data: AnnotationData::LowerBound { rank_at_least: 2 },
            provenance: "test".into(),
        };
        reg.register(a.clone()).unwrap();
        reg.register(a.clone()).unwrap();
        let mut b = a.clone();
        b.data = AnnotationData::LowerBound { rank_at_least: 3 };
        assert!(matches!(reg.register(b), Err(NormError::Conflict { .. })));
        assert!(matches!(reg.lookup("y", 1), Err(NormError::Missing { .. })));
        let mut c = a;
        c.provenance = " ".into();
        c.space = "z".into();
        assert!(matches!(reg.register(c), Err(NormError::Unprovenanced(_))));
    }

    #[test]
    fn zero_subspace_rank() {
        let a = NormAnnotation {
            space: "x".into(),
            degree: 1,
            data: AnnotationData::ZeroSubspace {
                rank: 3,
                zero_basis: vec![vec![1, 1, 0], vec![2, 2, 0], vec![0, 0, 5]],
            },
            provenance: "test".into(),
        };
        assert_eq!(a.reduced_rank(), ReducedRank::Exact(1));
    }

    #[test]
    fn shipped_file_loads() {
        let reg = NormRegistry::load(&shipped_norms_path()).unwrap();
        for space in ["annulus-unit-tangent", "annulus-unit-tangent-double"] {
            for j in 0..=3 {
                assert_eq!(reg.reduced_rank(space, j).unwrap().0, ReducedRank::Exact(0));
            }
        }
        assert_eq!(reg.reduced_rank("weeks-manifold", 3).unwrap().0, ReducedRank::Exact(1));
        assert_eq!(reg.reduced_rank("weeks-sphere-bundle", 5).unwrap().0, ReducedRank::Exact(0));
        assert!(reg.constant("v3").unwrap().citation.contains("tetrahedron"));
    }
}
