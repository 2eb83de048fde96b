//! Tangency patterns and their degeneration order.
//!
//! A [`Pattern`] is the ordered list of boundary multiplicities met by one
//! trajectory. Admissible patterns are either a single even entry (a
//! trajectory touching the boundary at one point from outside) or a sequence
//! whose ends are odd and whose interior entries are even.
//!
//! The degeneration order is generated by four moves on formal sequences:
//!
//! * **M1** merge two adjacent entries `a, b` into `a + b` (two roots collide);
//! * **M2** add 2 to one entry (a complex-conjugate pair lands on a root);
//! * **M3** insert a new entry 2 at an interior position (a complex pair
//!   lands on the real line inside a component);
//! * **M4** attach a `(1,1)` block at either end (a neighbouring component
//!   that later merges with this one).
//!
//! Admissibility is only required at the two ends of a move sequence. The
//! polynomial models in [`crate::local_models`] are the reference for this
//! order; M4 is needed for agreement (e.g. the detached singleton `(2)` in
//! the deformations of `(3,1)`).

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("empty pattern")]
    Empty,
    #[error("entry {index} is zero; multiplicities are positive")]
    ZeroEntry { index: usize },
    #[error("single-entry pattern ({0}) must be even")]
    OddSingleton(u32),
    #[error("end entry {value} at position {index} must be odd")]
    EvenEnd { index: usize, value: u32 },
    #[error("interior entry {value} at position {index} must be even")]
    OddInterior { index: usize, value: u32 },
    #[error("cannot parse pattern {0:?}")]
    Parse(String),
}

/// Checks the parity rule in one pass and names the first violation.
pub fn check_admissible(entries: &[u32]) -> Result<(), PatternError> {
    if entries.is_empty() {
        return Err(PatternError::Empty);
    }
    if let Some(index) = entries.iter().position(|&e| e == 0) {
        return Err(PatternError::ZeroEntry { index });
    }
    let n = entries.len();
    if n == 1 {
        return if entries[0].is_multiple_of(2) {
            Ok(())
        } else {
            Err(PatternError::OddSingleton(entries[0]))
        };
    }
    for (index, &value) in entries.iter().enumerate() {
        let end = index == 0 || index == n - 1;
        if end && value % 2 == 0 {
            return Err(PatternError::EvenEnd { index, value });
        }
        if !end && value % 2 == 1 {
            return Err(PatternError::OddInterior { index, value });
        }
    }
    Ok(())
}

pub fn is_admissible(entries: &[u32]) -> bool {
    check_admissible(entries).is_ok()
}

/// An admissible tangency pattern, entries in flow order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Pattern(Vec<u32>);

impl Pattern {
    pub fn new(entries: Vec<u32>) -> Result<Self, PatternError> {
        check_admissible(&entries)?;
        Ok(Pattern(entries))
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// `|ω|`, the sum of the multiplicities.
    pub fn norm(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `|ω|'`, the sum of `multiplicity - 1`; the codimension of the stratum.
    pub fn reduced_norm(&self) -> u32 {
        self.0.iter().map(|&j| j - 1).sum()
    }

    /// Number of distinct support points, `|ω| - |ω|'`.
    pub fn sup_count(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Canonical ordering key: reduced norm, then norm, then lexicographic.
    fn sort_key(&self) -> (u32, u32, &[u32]) {
        (self.reduced_norm(), self.norm(), &self.0)
    }
}

impl PartialOrd for Pattern {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pattern {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl TryFrom<Vec<u32>> for Pattern {
    type Error = PatternError;
    fn try_from(v: Vec<u32>) -> Result<Self, Self::Error> {
        Pattern::new(v)
    }
}

impl From<Pattern> for Vec<u32> {
    fn from(p: Pattern) -> Self {
        p.0
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&e| e <= 9) {
            for e in &self.0 {
                write!(f, "{e}")?;
            }
            Ok(())
        } else {
            write!(f, "(")?;
            for (i, e) in self.0.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, ")")
        }
    }
}

impl FromStr for Pattern {
    type Err = PatternError;

    /// Accepts the digit-string form `1221` and the list form `(1,12,1)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || PatternError::Parse(s.to_string());
        let entries: Vec<u32> = if t.starts_with('(') || t.contains(',') {
            let inner = t.trim_start_matches('(').trim_end_matches(')');
            inner
                .split(',')
                .map(|p| p.trim().parse::<u32>().map_err(|_| bad()))
                .collect::<Result<_, _>>()?
        } else {
            t.chars()
                .map(|c| c.to_digit(10).ok_or_else(bad))
                .collect::<Result<_, _>>()?
        };
        Pattern::new(entries)
    }
}

/// All admissible patterns with reduced norm at most `max_reduced_norm`, in
/// canonical order.
pub fn enumerate(max_reduced_norm: u32) -> Vec<Pattern> {
    // Interior entries are even, so each contributes at least 1 to the
    // reduced norm: length <= bound + 2 and entries <= bound + 1.
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(current: &mut Vec<u32>, budget: u32, max_len: usize, out: &mut Vec<Pattern>) {
        if !current.is_empty() && is_admissible(current) {
            out.push(Pattern(current.clone()));
        }
        if current.len() == max_len {
            return;
        }
        for j in 1..=budget + 1 {
            current.push(j);
            rec(current, budget - (j - 1), max_len, out);
            current.pop();
        }
    }
    rec(&mut current, max_reduced_norm, max_reduced_norm as usize + 2, &mut out);
    out.sort();
    out.dedup();
    out
}

fn apply_moves(seq: &[u32], out: &mut Vec<Vec<u32>>) {
    let n = seq.len();
    // M1
    for i in 0..n.saturating_sub(1) {
        let mut s = Vec::with_capacity(n - 1);
        s.extend_from_slice(&seq[..i]);
        s.push(seq[i] + seq[i + 1]);
        s.extend_from_slice(&seq[i + 2..]);
        out.push(s);
    }
    // M2
    for i in 0..n {
        let mut s = seq.to_vec();
        s[i] += 2;
        out.push(s);
    }
    // M3
    for i in 1..n {
        let mut s = Vec::with_capacity(n + 1);
        s.extend_from_slice(&seq[..i]);
        s.push(2);
        s.extend_from_slice(&seq[i..]);
        out.push(s);
    }
    // M4
    let mut left = vec![1, 1];
    left.extend_from_slice(seq);
    out.push(left);
    let mut right = seq.to_vec();
    right.extend_from_slice(&[1, 1]);
    out.push(right);
}

/// Admissible patterns one move away from `pattern`.
pub fn elementary_degenerations(pattern: &Pattern) -> BTreeSet<Pattern> {
    let mut raw = Vec::new();
    apply_moves(&pattern.0, &mut raw);
    raw.into_iter()
        .filter_map(|s| Pattern::new(s).ok())
        .collect()
}

/// True iff `target` is reachable from `source` by a (possibly empty)
/// sequence of moves.
///
/// Moves never decrease `|ω|`, so the search is confined to formal
/// sequences with norm at most `|target|`.
pub fn degenerates_to(source: &Pattern, target: &Pattern) -> bool {
    if source == target {
        return true;
    }
    if source.reduced_norm() >= target.reduced_norm() || source.norm() > target.norm() {
        return false;
    }
    let limit = target.norm();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(source.0.clone());
    queue.push_back(source.0.clone());
    let mut next = Vec::new();
    while let Some(seq) = queue.pop_front() {
        next.clear();
        apply_moves(&seq, &mut next);
        for s in next.drain(..) {
            if s.iter().sum::<u32>() > limit {
                continue;
            }
            if s == target.0 {
                return true;
            }
            if seen.insert(s.clone()) {
                queue.push_back(s);
            }
        }
    }
    false
}

/// The degeneration order restricted to `enumerate(max_reduced_norm)`,
/// reduced to its covering relations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerationDag {
    pub max_reduced_norm: u32,
    pub nodes: Vec<Pattern>,
    /// Covering pairs `(i, j)`: `nodes[i]` degenerates to `nodes[j]` with
    /// nothing in between.
    pub edges: Vec<(usize, usize)>,
}

pub fn hasse_diagram(max_reduced_norm: u32) -> DegenerationDag {
    let nodes = enumerate(max_reduced_norm);
    let n = nodes.len();
    let mut below = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && degenerates_to(&nodes[i], &nodes[j]) {
                below[i][j] = true;
            }
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !below[i][j] {
                continue;
            }
            let covered = (0..n).any(|k| k != i && k != j && below[i][k] && below[k][j]);
            if !covered {
                edges.push((i, j));
            }
        }
    }
    DegenerationDag {
        max_reduced_norm,
        nodes,
        edges,
    }
}

impl DegenerationDag {
    /// `{"nodes": ["11", ...], "edges": [[0, 1], ...]}`
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "max_reduced_norm": self.max_reduced_norm,
            "nodes": self.nodes.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>(),
        })
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph omega {\n  rankdir=BT;\n");
        for (i, p) in self.nodes.iter().enumerate() {
            s.push_str(&format!(
                "  n{i} [label=\"{p}\" rank={}];\n",
                p.reduced_norm()
            ));
        }
        for &(i, j) in &self.edges {
            s.push_str(&format!("  n{i} -> n{j};\n"));
        }
        s.push_str("}\n");
        s
    }

    /// Index lookup by pattern.
    pub fn index(&self) -> HashMap<&Pattern, usize> {
        self.nodes.iter().enumerate().map(|(i, p)| (p, i)).collect()
    }
}
