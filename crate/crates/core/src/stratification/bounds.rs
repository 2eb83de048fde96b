//! Component-count bounds, k-convexity and the obstruction report.
//! All arithmetic is on integers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::omega::Pattern;
use crate::simplicial_norm::{NormRegistry, ReducedRank};

use super::{CountsTable, StrataAtlas, StratError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub pattern: Pattern,
    pub entry: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KConvexity {
    pub k: u32,
    pub convex: bool,
    pub witnesses: Vec<Witness>,
}

/// Globally k-convex means no sampled trajectory of reduced norm `>= k`.
pub fn check_k_convexity(atlas: &StrataAtlas, k: u32) -> KConvexity {
    let witnesses: Vec<Witness> = atlas
        .nodes
        .iter()
        .chain(atlas.transitions.iter().map(|t| &t.node))
        .filter_map(|n| {
            let p = n.label.pattern()?;
            (p.reduced_norm() >= k).then(|| Witness {
                pattern: p.clone(),
                entry: n.entry.clone(),
            })
        })
        .collect();
    KConvexity {
        k,
        convex: witnesses.is_empty(),
        witnesses,
    }
}

/// A rank on the right-hand side, with where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankBound {
    pub rank: ReducedRank,
    pub provenance: String,
}

/// Reduced ranks per degree for the manifold and for its double.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NormAnnotations {
    pub manifold: BTreeMap<u32, RankBound>,
    pub double: BTreeMap<u32, RankBound>,
}

impl NormAnnotations {
    /// Looks up degrees `0..=max_degree` of both spaces; absent degrees are
    /// left out.
    pub fn from_registry(
        reg: &NormRegistry,
        manifold: &str,
        double: &str,
        max_degree: u32,
    ) -> Self {
        let pick = |space: &str| {
            (0..=max_degree)
                .filter_map(|j| {
                    let (rank, provenance) = reg.reduced_rank(space, j).ok()?;
                    Some((j, RankBound { rank, provenance }))
                })
                .collect()
        };
        NormAnnotations {
            manifold: pick(manifold),
            double: pick(double),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseBoundReport {
    pub j: u32,
    /// Sum over patterns of reduced norm `j` of `sup · #components`.
    pub lhs_manifold: u128,
    /// `lhs_manifold + 2 · Σ (sup - 1) · #components` over reduced norm `j+1`.
    pub lhs_double: u128,
    pub rhs_manifold: RankBound,
    pub rhs_double: RankBound,
    pub satisfied_manifold: bool,
    pub satisfied_double: bool,
    pub satisfied: bool,
}

fn weighted_sum(counts: &CountsTable, codim: u32, weight: impl Fn(&Pattern) -> u128) -> Result<u128, StratError> {
    counts
        .rows
        .iter()
        .filter(|r| r.codim == codim)
        .try_fold(0u128, |acc, r| {
            weight(&r.pattern)
                .checked_mul(r.components as u128)
                .and_then(|t| acc.checked_add(t))
                .ok_or(StratError::Overflow)
        })
}

pub fn morse_bound_report(
    counts: &CountsTable,
    j: u32,
    annotations: &NormAnnotations,
) -> Result<MorseBoundReport, StratError> {
    let rhs_manifold = annotations
        .manifold
        .get(&j)
        .cloned()
        .ok_or(StratError::MissingAnnotation(j))?;
    let rhs_double = annotations
        .double
        .get(&j)
        .cloned()
        .ok_or(StratError::MissingAnnotation(j))?;
    let lhs_manifold = weighted_sum(counts, j, |p| p.sup_count() as u128)?;
    let deeper = weighted_sum(counts, j + 1, |p| p.sup_count() as u128 - 1)?;
    let lhs_double = deeper
        .checked_mul(2)
        .and_then(|d| d.checked_add(lhs_manifold))
        .ok_or(StratError::Overflow)?;
    let satisfied_manifold = lhs_manifold >= rhs_manifold.rank.value() as u128;
    let satisfied_double = lhs_double >= rhs_double.rank.value() as u128;
    Ok(MorseBoundReport {
        j,
        lhs_manifold,
        lhs_double,
        rhs_manifold,
        rhs_double,
        satisfied_manifold,
        satisfied_double,
        satisfied: satisfied_manifold && satisfied_double,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionEntry {
    pub j: u32,
    pub rank_manifold: Option<u64>,
    pub rank_double: Option<u64>,
    /// No stratum of codimension `>= j` was found.
    pub empty_from_j: bool,
    /// A positive annotated rank against an atlas that looks j-convex.
    pub flagged: bool,
}

/// For each annotated degree: a positive reduced rank rules out global
/// j-convexity, so an atlas with nothing in codimension `>= j` is flagged.
pub fn obstruction_report(counts: &CountsTable, annotations: &NormAnnotations) -> Vec<ObstructionEntry> {
    let degrees: std::collections::BTreeSet<u32> = annotations
        .manifold
        .keys()
        .chain(annotations.double.keys())
        .copied()
        .collect();
    degrees
        .into_iter()
        .map(|j| {
            let rank_manifold = annotations.manifold.get(&j).map(|r| r.rank.value());
            let rank_double = annotations.double.get(&j).map(|r| r.rank.value());
            let empty_from_j = counts
                .rows
                .iter()
                .all(|r| r.codim < j || r.components == 0);
            let positive = rank_manifold.unwrap_or(0) > 0 || rank_double.unwrap_or(0) > 0;
            ObstructionEntry {
                j,
                rank_manifold,
                rank_double,
                empty_from_j,
                flagged: positive && empty_from_j,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Pattern {
        s.parse().unwrap()
    }

    fn ann(j: u32, m: u64, d: u64) -> NormAnnotations {
        let b = |r| RankBound {
            rank: ReducedRank::Exact(r),
            provenance: "test".into(),
        };
        NormAnnotations {
            manifold: [(j, b(m))].into(),
            double: [(j, b(d))].into(),
        }
    }

    #[test]
    fn single_deep_component() {
        let t = CountsTable::new(4, [(p("1221"), 1)]);
        let r = morse_bound_report(&t, 2, &ann(2, 0, 0)).unwrap();
        assert_eq!(r.lhs_manifold, 4);
    }

    #[test]
    fn second_display_adds_deeper_strata() {
        let t = CountsTable::new(4, [(p("121"), 1), (p("1221"), 1)]);
        let r = morse_bound_report(&t, 1, &ann(1, 0, 0)).unwrap();
        assert_eq!(r.lhs_manifold, 3);
        assert_eq!(r.lhs_double, 3 + 2 * 3);
        assert!(r.satisfied);
        let r = morse_bound_report(&t, 1, &ann(1, 4, 9)).unwrap();
        assert!(!r.satisfied_manifold && r.satisfied_double);
    }

    #[test]
    fn missing_degree_is_an_error() {
        let t = CountsTable::new(2, [(p("11"), 1)]);
        assert_eq!(
            morse_bound_report(&t, 3, &ann(1, 0, 0)),
            Err(StratError::MissingAnnotation(3))
        );
    }

    #[test]
    fn obstruction_flags_empty_deep_strata() {
        let t = CountsTable::new(2, [(p("11"), 1), (p("2"), 2)]);
        let rep = obstruction_report(&t, &ann(2, 1, 0));
        assert!(rep[0].flagged);
        let rep = obstruction_report(&t, &ann(1, 1, 0));
        assert!(!rep[0].flagged);
        let rep = obstruction_report(&t, &ann(2, 0, 0));
        assert!(!rep[0].flagged);
    }
}
