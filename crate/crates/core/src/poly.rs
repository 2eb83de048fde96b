//! Univariate polynomial helpers: exact rational arithmetic for multiplicity
//! structure and floating-point root location for square-free parts.

use nalgebra::{Complex, DMatrix, Schur};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coefficients in increasing degree; no trailing zeros (the zero
/// polynomial is empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RatPoly(pub Vec<BigRational>);

impl RatPoly {
    pub fn from_f64(coeffs: &[f64]) -> Option<Self> {
        let c = coeffs
            .iter()
            .map(|&v| BigRational::from_float(v))
            .collect::<Option<Vec<_>>>()?;
        Some(RatPoly(c).trimmed())
    }

    #[cfg(test)]
    pub fn from_ints(coeffs: &[i64]) -> Self {
        RatPoly(
            coeffs
                .iter()
                .map(|&v| BigRational::from_integer(BigInt::from(v)))
                .collect(),
        )
        .trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn lead(&self) -> &BigRational {
        self.0.last().expect("nonzero polynomial")
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead().clone();
        RatPoly(self.0.iter().map(|c| c / &l).collect())
    }

    pub fn derivative(&self) -> Self {
        RatPoly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
                .collect(),
        )
        .trimmed()
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return RatPoly(Vec::new());
        }
        let mut out = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RatPoly(out).trimmed()
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let mut rem = self.0.clone();
        let dd = divisor.degree();
        if self.is_zero() || self.degree() < dd {
            return (RatPoly(Vec::new()), self.clone());
        }
        let mut quot = vec![BigRational::zero(); self.degree() - dd + 1];
        let lead = divisor.lead().clone();
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if !c.is_zero() {
                for (i, d) in divisor.0.iter().enumerate() {
                    rem[k + i] -= &c * d;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (RatPoly(quot).trimmed(), RatPoly(rem).trimmed())
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Yun's algorithm: returns `(k, q_k)` with `self = lead * Π q_k^k`,
    /// each `q_k` square-free, monic and pairwise coprime; only `q_k` of
    /// positive degree are listed.
    pub fn square_free_decomposition(&self) -> Vec<(u32, RatPoly)> {
        let mut out = Vec::new();
        if self.degree() == 0 {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let a0 = f.gcd(&df);
        let mut b = f.div_rem(&a0).0;
        let mut c = df.div_rem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut k = 1;
        loop {
            let a = b.gcd(&d);
            if a.degree() > 0 {
                out.push((k, a.clone()));
            }
            b = b.div_rem(&a).0;
            if b.degree() == 0 {
                break;
            }
            c = d.div_rem(&a).0;
            d = c.sub(&b.derivative());
            k += 1;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, c) in self.0.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.0.iter().enumerate() {
            out[i] -= c;
        }
        RatPoly(out).trimmed()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// Exact product of linear factors `(w - r)`.
    pub fn from_roots(roots: &[BigRational]) -> Self {
        let mut p = RatPoly(vec![BigRational::one()]);
        for r in roots {
            p = p.mul(&RatPoly(vec![-r.clone(), BigRational::one()]));
        }
        p
    }

    pub fn is_exact_in_f64(&self) -> bool {
        self.0.iter().all(|c| {
            c.to_f64()
                .and_then(BigRational::from_float)
                .is_some_and(|back| &back == c)
        })
    }
}

pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn horner_with_derivative(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// All complex roots of a polynomial (coefficients increasing degree) from
/// the eigenvalues of its companion matrix.
pub(crate) fn companion_roots(coeffs: &[f64]) -> Vec<(f64, f64)> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    // Francis iteration can stall on highly symmetric companion matrices
    // (e.g. w^4 + c), so cap it and fall back to simultaneous iteration.
    match Schur::try_new(m, f64::EPSILON, 500) {
        Some(schur) => schur
            .complex_eigenvalues()
            .iter()
            .map(|z| (z.re, z.im))
            .collect(),
        None => aberth_roots(coeffs),
    }
}

/// Aberth-Ehrlich iteration from points on a circle of Cauchy-bound radius.
fn aberth_roots(coeffs: &[f64]) -> Vec<(f64, f64)> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let c: Vec<Complex<f64>> = coeffs.iter().map(|&v| Complex::new(v / lead, 0.0)).collect();
    let radius = 1.0 + c[..n].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex<f64>> = (0..n)
        .map(|k| Complex::from_polar(radius, 0.4 + std::f64::consts::TAU * k as f64 / n as f64))
        .collect();
    let eval = |x: Complex<f64>| {
        let mut p = Complex::new(0.0, 0.0);
        let mut dp = Complex::new(0.0, 0.0);
        for &a in c.iter().rev() {
            dp = dp * x + p;
            p = p * x + a;
        }
        (p, dp)
    };
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex<f64> = (0..n)
                .filter(|&k| k != i)
                .map(|k| (z[i] - z[k]).inv())
                .sum();
            let step = ratio / (Complex::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z.into_iter().map(|w| (w.re, w.im)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct AmbiguousRoot {
    pub re: f64,
    pub im: f64,
}

/// Real roots of a square-free polynomial. Eigenvalues with `|im| <= tol/4`
/// count as real and get Newton-polished; `|im| > 2 tol` are discarded as
/// complex; anything in between is reported as ambiguous.
pub(crate) fn real_roots_square_free(
    coeffs: &[f64],
    tol: f64,
) -> Result<Vec<f64>, AmbiguousRoot> {
    let mut out = Vec::new();
    for (re, im) in companion_roots(coeffs) {
        if im.abs() > 2.0 * tol {
            continue;
        }
        if im.abs() > tol / 4.0 {
            return Err(AmbiguousRoot { re, im });
        }
        let mut x = re;
        for _ in 0..3 {
            let (p, dp) = horner_with_derivative(coeffs, x);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.is_finite() || step.abs() > tol {
                break;
            }
            x -= step;
        }
        out.push(x);
    }
    out.sort_by(|a, b| a.total_cmp(b));
    Ok(out)
}

/// Exact value of a dyadic or integer rational as `BigRational`.
pub(crate) fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub(crate) fn abs_max(coeffs: &[f64]) -> f64 {
    coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
}

#[allow(dead_code)]
pub(crate) fn rat_abs_max(p: &RatPoly) -> BigRational {
    p.0.iter()
        .map(|c| c.abs())
        .fold(BigRational::zero(), |m, c| if c > m { c } else { m })
}
