//! Polynomial normal forms near a trajectory and the brute-force
//! realization of the degeneration order.
//!
//! A model is a product of factors `(u - c_i)^{j_i} + Σ_{l <= j_i - 2}
//! x_{i,l} (u - c_i)^l`. Trajectories are the connected components of
//! `{℘ <= 0}` on the `u`-line. Multiplicities of roots are read off an exact
//! square-free decomposition over the rationals (every `f64` is a dyadic
//! rational); root locations come from companion-matrix eigenvalues with a
//! Newton polish.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::omega::{Pattern, PatternError};
use crate::poly::{self, RatPoly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("root index {index} out of range 1..={count}")]
    RootIndex { index: u32, count: u32 },
    #[error("power {power} not allowed for root {index} of multiplicity {multiplicity}; must be <= multiplicity - 2")]
    Power {
        index: u32,
        power: u32,
        multiplicity: u32,
    },
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("root clustering ambiguous at tol {tol:e} near u = {near}")]
    IllConditioned { tol: f64, near: f64 },
    #[error("bad deformation key {0:?}, expected \"i,l\"")]
    Key(String),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

/// One factor `(u - center)^multiplicity + Σ coeffs[l] (u - center)^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub center: f64,
    pub multiplicity: u32,
    /// `multiplicity - 1` deformation coefficients (`l = 0..=j-2`).
    pub coeffs: Vec<f64>,
}

impl Factor {
    /// Coefficients of the factor in the local variable `w = u - center`,
    /// increasing degree.
    pub fn local_coefficients(&self) -> Vec<f64> {
        let j = self.multiplicity as usize;
        let mut c = vec![0.0; j + 1];
        c[..self.coeffs.len()].copy_from_slice(&self.coeffs);
        c[j] = 1.0;
        c
    }

    fn evaluate(&self, u: f64) -> f64 {
        poly::horner(&self.local_coefficients(), u - self.center)
    }
}

/// A polynomial normal form `℘(u, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPolynomial {
    pub factors: Vec<Factor>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    pattern: Vec<u32>,
    #[serde(default)]
    deformation: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    centers: Option<Vec<f64>>,
}

impl ModelPolynomial {
    /// The product model for `pattern`, roots centered at `1, 2, …`, with
    /// deformation keyed by `(root index, power)` (1-based root index).
    pub fn product(
        pattern: &Pattern,
        deformation: &BTreeMap<(u32, u32), f64>,
    ) -> Result<Self, ModelError> {
        let count = pattern.sup_count();
        let mut factors: Vec<Factor> = pattern
            .entries()
            .iter()
            .enumerate()
            .map(|(i, &j)| Factor {
                center: (i + 1) as f64,
                multiplicity: j,
                coeffs: vec![0.0; j as usize - 1],
            })
            .collect();
        for (&(index, power), &value) in deformation {
            if index == 0 || index > count {
                return Err(ModelError::RootIndex { index, count });
            }
            let f = &mut factors[index as usize - 1];
            if power + 2 > f.multiplicity {
                return Err(ModelError::Power {
                    index,
                    power,
                    multiplicity: f.multiplicity,
                });
            }
            if !value.is_finite() {
                return Err(ModelError::NonFinite);
            }
            f.coeffs[power as usize] = value;
        }
        Ok(ModelPolynomial { factors })
    }

    /// Central pattern when the multiplicities form an admissible pattern.
    pub fn pattern(&self) -> Option<Pattern> {
        Pattern::new(self.factors.iter().map(|f| f.multiplicity).collect()).ok()
    }

    /// Number of deformation coordinates, `Σ (j_i - 1)`.
    pub fn deformation_dim(&self) -> usize {
        self.factors.iter().map(|f| f.coeffs.len()).sum()
    }

    pub fn deformation(&self) -> BTreeMap<(u32, u32), f64> {
        let mut m = BTreeMap::new();
        for (i, f) in self.factors.iter().enumerate() {
            for (l, &v) in f.coeffs.iter().enumerate() {
                m.insert((i as u32 + 1, l as u32), v);
            }
        }
        m
    }

    pub fn evaluate(&self, u: f64) -> f64 {
        self.factors.iter().map(|f| f.evaluate(u)).product()
    }

    /// Expanded coefficients in `u`, increasing degree.
    pub fn expanded(&self) -> Vec<f64> {
        let mut acc = vec![1.0];
        for f in &self.factors {
            let local = f.local_coefficients();
            // substitute w = u - center
            let mut shifted = vec![0.0; local.len()];
            for (k, &c) in local.iter().enumerate().rev() {
                // shifted = shifted * (u - center) + c
                let mut next = vec![0.0; shifted.len()];
                for (i, &s) in shifted.iter().enumerate() {
                    if i + 1 < next.len() {
                        next[i + 1] += s;
                    }
                    next[i] -= s * f.center;
                }
                next[0] += c;
                shifted = next;
                let _ = k;
            }
            let mut out = vec![0.0; acc.len() + shifted.len() - 1];
            for (i, a) in acc.iter().enumerate() {
                for (j, b) in shifted.iter().enumerate() {
                    out[i + j] += a * b;
                }
            }
            acc = out;
        }
        acc
    }

    /// `max(1e-8, 1e-6 · max |coefficient|)` over the factor coefficients in
    /// their local variables, where roots are actually located. The expanded
    /// product has coefficients in the thousands for long patterns, which
    /// would swamp the root gaps the model is meant to resolve.
    pub fn default_tol(&self) -> f64 {
        let scale = self
            .factors
            .iter()
            .map(|f| poly::abs_max(&f.local_coefficients()))
            .fold(0.0, f64::max);
        (1e-6 * scale).max(1e-8)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let deformation = self
            .deformation()
            .into_iter()
            .map(|((i, l), v)| (format!("{i},{l}"), v))
            .collect();
        let centers: Vec<f64> = self.factors.iter().map(|f| f.center).collect();
        let standard = centers
            .iter()
            .enumerate()
            .all(|(i, &c)| c == (i + 1) as f64);
        serde_json::to_value(ModelJson {
            pattern: self.factors.iter().map(|f| f.multiplicity).collect(),
            deformation,
            centers: (!standard).then_some(centers),
        })
        .expect("model json")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, ModelError> {
        let parsed: ModelJson =
            serde_json::from_value(value.clone()).map_err(|e| ModelError::Key(e.to_string()))?;
        let mut deformation = BTreeMap::new();
        for (k, v) in &parsed.deformation {
            let (i, l) = k.split_once(',').ok_or_else(|| ModelError::Key(k.clone()))?;
            let i = i.trim().parse().map_err(|_| ModelError::Key(k.clone()))?;
            let l = l.trim().parse().map_err(|_| ModelError::Key(k.clone()))?;
            deformation.insert((i, l), *v);
        }
        match parsed.centers {
            None => {
                let pattern = Pattern::new(parsed.pattern)?;
                ModelPolynomial::product(&pattern, &deformation)
            }
            Some(centers) => {
                let mut factors = Vec::new();
                for (&j, &c) in parsed.pattern.iter().zip(&centers) {
                    if j == 0 {
                        return Err(PatternError::ZeroEntry { index: factors.len() }.into());
                    }
                    factors.push(Factor {
                        center: c,
                        multiplicity: j,
                        coeffs: vec![0.0; j as usize - 1],
                    });
                }
                let count = factors.len() as u32;
                for (&(index, power), &value) in &deformation {
                    if index == 0 || index > count {
                        return Err(ModelError::RootIndex { index, count });
                    }
                    let f = &mut factors[index as usize - 1];
                    if power + 2 > f.multiplicity {
                        return Err(ModelError::Power {
                            index,
                            power,
                            multiplicity: f.multiplicity,
                        });
                    }
                    f.coeffs[power as usize] = value;
                }
                Ok(ModelPolynomial { factors })
            }
        }
    }
}

/// Single-factor model `u^j + Σ_{l <= j-2} x_l u^l`, root centered at 0.
pub fn boundary_local_model(j: u32, coeffs: &[f64]) -> ModelPolynomial {
    assert!(j >= 1, "multiplicity must be positive");
    let mut c = vec![0.0; j as usize - 1];
    for (dst, &src) in c.iter_mut().zip(coeffs) {
        *dst = src;
    }
    ModelPolynomial {
        factors: vec![Factor {
            center: 0.0,
            multiplicity: j,
            coeffs: c,
        }],
    }
}

/// One connected component of `{℘ <= 0}`: roots in `u` order with their
/// multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelComponent {
    pub left: f64,
    pub right: f64,
    pub roots: Vec<(f64, u32)>,
    pub pattern: Pattern,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ModelDivisor {
    pub components: Vec<ModelComponent>,
}

impl ModelDivisor {
    pub fn patterns(&self) -> Vec<Pattern> {
        self.components.iter().map(|c| c.pattern.clone()).collect()
    }
}

/// Real roots of the model with exact multiplicities, sorted by `u`.
pub fn real_roots(model: &ModelPolynomial, tol: f64) -> Result<Vec<(f64, u32)>, ModelError> {
    let mut roots: Vec<(f64, u32)> = Vec::new();
    for f in &model.factors {
        let local = RatPoly::from_f64(&f.local_coefficients()).ok_or(ModelError::NonFinite)?;
        for (k, q) in local.square_free_decomposition() {
            let qf = q.to_f64();
            let rs = poly::real_roots_square_free(&qf, tol).map_err(|a| {
                ModelError::IllConditioned {
                    tol,
                    near: a.re + f.center,
                }
            })?;
            roots.extend(rs.into_iter().map(|r| (r + f.center, k)));
        }
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, u32)> = Vec::with_capacity(roots.len());
    for (r, m) in roots {
        if let Some(last) = merged.last_mut() {
            if r == last.0 {
                last.1 += m;
                continue;
            }
            if r - last.0 <= 2.0 * tol {
                return Err(ModelError::IllConditioned { tol, near: r });
            }
        }
        merged.push((r, m));
    }
    Ok(merged)
}

/// Splits a root sequence (monic, even total degree not required) into the
/// components of `{℘ <= 0}`.
pub fn sublevel_components(roots: &[(f64, u32)]) -> Vec<(usize, usize)> {
    // sign of ℘ just right of root k is (-1)^(multiplicities to the right)
    let n = roots.len();
    let mut right_parity = vec![0u32; n + 1];
    for k in (0..n).rev() {
        right_parity[k] = right_parity[k + 1] + roots[k].1;
    }
    let negative_after = |k: usize| right_parity[k + 1] % 2 == 1;
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for k in 0..n {
        match start {
            None => {
                if negative_after(k) {
                    start = Some(k);
                } else {
                    out.push((k, k));
                }
            }
            Some(s) => {
                if !negative_after(k) {
                    out.push((s, k));
                    start = None;
                }
            }
        }
    }
    out
}

/// Trajectories of `∂_u` in the model at the given deformation.
pub fn trajectories_at(model: &ModelPolynomial, tol: f64) -> Result<ModelDivisor, ModelError> {
    assert!(tol > 0.0, "tol must be positive");
    let roots = real_roots(model, tol)?;
    let mut components = Vec::new();
    for (a, b) in sublevel_components(&roots) {
        let slice = roots[a..=b].to_vec();
        let pattern = Pattern::new(slice.iter().map(|r| r.1).collect())?;
        components.push(ModelComponent {
            left: slice[0].0,
            right: slice[slice.len() - 1].0,
            roots: slice,
            pattern,
        });
    }
    Ok(ModelDivisor { components })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachableSet {
    pub pattern: Pattern,
    pub patterns: BTreeSet<Pattern>,
    pub radius: f64,
    pub budget: usize,
    pub seed: u64,
    pub samples: usize,
    pub ill_conditioned: usize,
}

/// Real-root shape of one deformed factor: multiplicities of its real roots
/// in increasing order and the number of complex-conjugate pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
struct RootShape {
    real: Vec<u32>,
    pairs: u32,
}

fn compositions(n: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn root_shapes(j: u32) -> Vec<RootShape> {
    let mut out = Vec::new();
    let mut real_total = j as i64;
    while real_total >= 0 {
        for c in compositions(real_total as u32) {
            out.push(RootShape {
                real: c,
                pairs: (j - real_total as u32) / 2,
            });
        }
        real_total -= 2;
    }
    out
}

const GRID_DEN: i64 = 1024;

/// Draws exact dyadic roots realizing `shape` with zero root sum, expands
/// them, and returns the deformation coefficients (`l <= j - 2`) when they
/// are exactly representable and inside `radius`.
fn sample_shape(shape: &RootShape, radius: f64, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    let j: u32 = shape.real.iter().sum::<u32>() + 2 * shape.pairs;
    let spread = ((radius.sqrt() * GRID_DEN as f64) / j as f64).max(24.0) as i64;
    let min_gap = 8;
    // the balancing element: a complex pair if there is one, else the real
    // root of smallest multiplicity
    let (free_mult, free_is_pair, free_real_idx) = if shape.pairs > 0 {
        (2u32, true, usize::MAX)
    } else {
        let (idx, &m) = shape
            .real
            .iter()
            .enumerate()
            .min_by_key(|(_, &m)| m)
            .expect("nonempty");
        (m, false, idx)
    };
    if shape.real.is_empty() && shape.pairs == 0 {
        return None;
    }
    let scale = if free_is_pair { 1 } else { free_mult as i64 };
    let mut reals: Vec<(i64, u32)> = Vec::new();
    let mut sum: i64 = 0; // numerators over GRID_DEN
    for (idx, &m) in shape.real.iter().enumerate() {
        if idx == free_real_idx {
            continue;
        }
        let k = rng.gen_range(-spread..=spread) * scale;
        reals.push((k, m));
        sum += k * m as i64;
    }
    let mut pairs: Vec<(BigRational, BigRational)> = Vec::new();
    let den2 = 2 * GRID_DEN;
    let mut pair_re_sum: i64 = 0; // numerators over 2*GRID_DEN
    for p in 0..shape.pairs {
        let im = rng.gen_range(min_gap..=spread.max(min_gap + 1));
        let re = if free_is_pair && p == 0 {
            0 // filled in below
        } else {
            2 * rng.gen_range(-spread..=spread)
        };
        pair_re_sum += re;
        pairs.push((poly::rat(re, den2), poly::rat(2 * im, den2)));
    }
    if free_is_pair {
        // 2·re_free + 2·Σ other pair re + Σ m_k r_k = 0
        let total = 2 * sum + 2 * pair_re_sum; // over den2
        pairs[0].0 = poly::rat(-total, 2 * den2);
    } else {
        let k = -(sum / free_mult as i64);
        debug_assert_eq!(k * free_mult as i64, -sum);
        let m = shape.real[free_real_idx];
        reals.push((k, m));
        let _ = pair_re_sum;
        // pair real parts would break the balance; the free element is a
        // real root only when there are no pairs
    }
    // the sorted real-root multiplicities must reproduce the shape
    reals.sort_by_key(|r| r.0);
    if reals.iter().map(|r| r.1).collect::<Vec<_>>() != shape.real {
        return None;
    }
    if reals.windows(2).any(|w| w[1].0 - w[0].0 < min_gap) {
        return None;
    }
    let mut p = RatPoly(vec![BigRational::one()]);
    for &(k, m) in &reals {
        let r = poly::rat(k, GRID_DEN);
        for _ in 0..m {
            p = p.mul(&RatPoly::from_roots(std::slice::from_ref(&r)));
        }
    }
    for (re, im) in &pairs {
        // w^2 - 2 re w + re^2 + im^2
        let two = BigRational::from_integer(2.into());
        let q = RatPoly(vec![
            re * re + im * im,
            -(two * re),
            BigRational::one(),
        ]);
        p = p.mul(&q);
    }
    debug_assert_eq!(p.degree(), j as usize);
    if j >= 2 && !p.0[j as usize - 1].is_zero() {
        return None;
    }
    if !p.is_exact_in_f64() {
        return None;
    }
    let coeffs: Vec<f64> = p.0[..(j as usize).saturating_sub(1)]
        .iter()
        .map(|c| c.to_f64().expect("finite"))
        .collect();
    if coeffs.iter().any(|c| c.abs() > radius) {
        return None;
    }
    Some(coeffs)
}

#[derive(Default)]
struct Tally {
    patterns: BTreeSet<Pattern>,
    samples: usize,
    ill: usize,
}

impl Tally {
    fn classify(&mut self, model: &ModelPolynomial) {
        self.samples += 1;
        match trajectories_at(model, model.default_tol()) {
            Ok(div) => self.patterns.extend(div.patterns()),
            Err(_) => self.ill += 1,
        }
    }
}

/// Patterns realized by small deformations of the `pattern` model.
///
/// Samples are `x = 0`, exact dyadic root configurations of every real-root
/// shape of every factor (these reach the positive-codimension strata that a
/// coefficient sampler never hits), an odd coefficient grid, and uniform
/// random coefficients; all with `‖x‖_∞ <= radius`.
pub fn reachable_patterns(pattern: &Pattern, radius: f64, budget: usize, seed: u64) -> ReachableSet {
    assert!(radius > 0.0 && budget >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = ModelPolynomial::product(pattern, &BTreeMap::new()).expect("valid pattern");
    let dim = zero.deformation_dim();
    let mut tally = Tally::default();
    tally.classify(&zero);
    if dim == 0 {
        return ReachableSet {
            pattern: pattern.clone(),
            patterns: tally.patterns,
            radius,
            budget,
            seed,
            samples: tally.samples,
            ill_conditioned: tally.ill,
        };
    }

    // stratified root-configuration samples: every combination of factor shapes
    let shapes: Vec<Vec<RootShape>> = pattern.entries().iter().map(|&j| root_shapes(j)).collect();
    let combos: usize = shapes.iter().map(|s| s.len()).product();
    let per_combo = ((budget / 2) / combos.max(1)).max(1);
    let mut idx = vec![0usize; shapes.len()];
    'combos: for _ in 0..combos {
        for _ in 0..per_combo {
            let mut model = zero.clone();
            let mut ok = true;
            for (fi, f) in model.factors.iter_mut().enumerate() {
                let shape = &shapes[fi][idx[fi]];
                if f.multiplicity == 1 {
                    continue;
                }
                let mut got = None;
                for _ in 0..64 {
                    if let Some(c) = sample_shape(shape, radius, &mut rng) {
                        got = Some(c);
                        break;
                    }
                }
                match got {
                    Some(c) => f.coeffs = c,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                tally.classify(&model);
            }
            if tally.samples >= budget {
                break 'combos;
            }
        }
        // odometer over factor shapes
        for k in 0..idx.len() {
            idx[k] += 1;
            if idx[k] < shapes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }

    // odd coefficient grid through 0
    let remaining = budget.saturating_sub(tally.samples);
    let mut g = ((remaining / 2) as f64).powf(1.0 / dim as f64).floor() as usize;
    if g.is_multiple_of(2) {
        g = g.saturating_sub(1);
    }
    if g >= 3 {
        let values: Vec<f64> = (0..g)
            .map(|k| radius * (2 * k as i64 - (g as i64 - 1)) as f64 / (g - 1) as f64)
            .collect();
        let total = g.pow(dim as u32);
        for flat in 0..total {
            let mut model = zero.clone();
            let mut rem = flat;
            for f in model.factors.iter_mut() {
                for c in f.coeffs.iter_mut() {
                    *c = values[rem % g];
                    rem /= g;
                }
            }
            tally.classify(&model);
        }
    }

    while tally.samples < budget {
        let mut model = zero.clone();
        for f in model.factors.iter_mut() {
            for c in f.coeffs.iter_mut() {
                *c = rng.gen_range(-radius..=radius);
            }
        }
        tally.classify(&model);
    }

    ReachableSet {
        pattern: pattern.clone(),
        patterns: tally.patterns,
        radius,
        budget,
        seed,
        samples: tally.samples,
        ill_conditioned: tally.ill,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Pattern {
        s.parse().unwrap()
    }

    fn model(pat: &str, def: &[((u32, u32), f64)]) -> ModelPolynomial {
        ModelPolynomial::product(&p(pat), &def.iter().cloned().collect()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(model("2", &[((1, 0), 0.0)]).evaluate(1.0), 0.0);
        assert_eq!(model("2", &[((1, 0), -0.25)]).evaluate(1.0), -0.25);
        assert_eq!(model("121", &[]).evaluate(2.0), 0.0);
    }

    #[test]
    fn central_trajectory() {
        let d = trajectories_at(&model("1221", &[]), 1e-8).unwrap();
        assert_eq!(d.components.len(), 1);
        let c = &d.components[0];
        assert_eq!((c.left, c.right), (1.0, 4.0));
        assert_eq!(c.pattern, p("1221"));
    }

    #[test]
    fn quadratic_split_and_empty() {
        let d = trajectories_at(&model("2", &[((1, 0), -0.01)]), 1e-8).unwrap();
        assert_eq!(d.components.len(), 1);
        assert!((d.components[0].left - 0.9).abs() < 1e-12);
        assert!((d.components[0].right - 1.1).abs() < 1e-12);
        assert_eq!(d.components[0].pattern, p("11"));
        let d = trajectories_at(&model("2", &[((1, 0), 0.01)]), 1e-8).unwrap();
        assert!(d.components.is_empty());
    }

    #[test]
    fn boundary_models() {
        let m = boundary_local_model(2, &[]);
        assert_eq!(m.expanded(), vec![0.0, 0.0, 1.0]);
        let m = boundary_local_model(3, &[0.0, -0.03]);
        let roots = real_roots(&m, 1e-8).unwrap();
        let s = 0.03f64.sqrt();
        assert_eq!(roots.len(), 3);
        assert!((roots[0].0 + s).abs() < 1e-12 && roots[1].0.abs() < 1e-12);
        assert!(roots.iter().all(|r| r.1 == 1));
        let m = boundary_local_model(1, &[]);
        assert_eq!(m.deformation_dim(), 0);
    }

    #[test]
    fn ambiguous_cluster_is_an_error() {
        // roots 1 ± 1e-9, closer than 2·tol
        let m = model("2", &[((1, 0), -1e-18)]);
        assert!(matches!(
            trajectories_at(&m, 1e-8),
            Err(ModelError::IllConditioned { .. })
        ));
    }

    #[test]
    fn reachable_small() {
        let r = reachable_patterns(&p("2"), 0.1, 1000, 7);
        let got: Vec<String> = r.patterns.iter().map(|p| p.to_string()).collect();
        assert_eq!(got, ["11", "2"]);
        let r = reachable_patterns(&p("11"), 0.1, 10, 7);
        assert_eq!(r.patterns.len(), 1);
        let r = reachable_patterns(&p("121"), 0.1, 10_000, 7);
        let got: Vec<String> = r.patterns.iter().map(|p| p.to_string()).collect();
        assert_eq!(got, ["11", "121"]);
    }

    #[test]
    fn json_round_trip() {
        let m = model("121", &[((2, 0), -0.05)]);
        let back = ModelPolynomial::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let b = boundary_local_model(3, &[0.01, -0.02]);
        assert_eq!(ModelPolynomial::from_json(&b.to_json()).unwrap(), b);
    }

    #[test]
    fn root_shapes_count() {
        // quadratic: (2), (1,1), one pair
        assert_eq!(root_shapes(2).len(), 3);
        // quartic: 8 compositions of 4, 2 of 2, empty
        assert_eq!(root_shapes(4).len(), 11);
    }
}
