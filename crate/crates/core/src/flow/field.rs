use crate::expr::{Expr, Program, Var};

use super::domain::ImplicitDomain;
use super::FlowError;

/// Symmetric 2×2 metric tensor on a planar domain.
#[derive(Debug, Clone)]
pub struct Metric {
    pub g11: Expr,
    pub g12: Expr,
    pub g22: Expr,
}

impl Metric {
    pub fn euclidean() -> Self {
        Metric {
            g11: Expr::constant(1.0),
            g12: Expr::constant(0.0),
            g22: Expr::constant(1.0),
        }
    }

    pub fn parse(g11: &str, g12: &str, g22: &str) -> Result<Self, FlowError> {
        let p = |s: &str| Expr::parse(s).map_err(|e| FlowError::Expr(e.to_string()));
        let m = Metric {
            g11: p(g11)?,
            g12: p(g12)?,
            g22: p(g22)?,
        };
        for e in [&m.g11, &m.g12, &m.g22] {
            if e.uses(Var::U) || e.uses(Var::Theta) {
                return Err(FlowError::Expr(
                    "metric entries may only depend on x and y".into(),
                ));
            }
        }
        Ok(m)
    }

    fn entry(&self, i: usize, j: usize) -> &Expr {
        match (i, j) {
            (0, 0) => &self.g11,
            (1, 1) => &self.g22,
            _ => &self.g12,
        }
    }

    /// Smallest eigenvalue at a point.
    pub fn min_eigenvalue(&self, env: &[f64; 4]) -> f64 {
        let a = self.g11.eval(env);
        let b = self.g12.eval(env);
        let d = self.g22.eval(env);
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        mean - r
    }

    /// `Γ^k_ij` as expressions, indexed `[k][i][j]`.
    pub fn christoffel(&self) -> [[[Expr; 2]; 2]; 2] {
        let xy = [Var::X, Var::Y];
        let det = self.g11.mul(&self.g22).sub(&self.g12.mul(&self.g12));
        let inv = [
            [self.g22.div(&det), self.g12.neg().div(&det)],
            [self.g12.neg().div(&det), self.g11.div(&det)],
        ];
        let dg = |a: usize, b: usize, by: usize| self.entry(a, b).diff(xy[by]);
        std::array::from_fn(|k| {
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    (0..2).fold(Expr::constant(0.0), |acc, l| {
                        let bracket = dg(j, l, i).add(&dg(i, l, j)).sub(&dg(i, j, l));
                        acc.add(&Expr::constant(0.5).mul(&inv[k][l]).mul(&bracket))
                    })
                })
            })
        })
    }
}

#[derive(Debug, Clone)]
pub enum FieldKind {
    Explicit,
    /// Unit-speed geodesic flow on the unit tangent bundle, charted by
    /// `(x, y, theta)` with `theta` the Euclidean angle of the velocity.
    Geodesic(Metric),
}

/// A vector field given by one expression per state variable.
#[derive(Debug, Clone)]
pub struct FieldSpec {
    kind: FieldKind,
    vars: Vec<Var>,
    components: Vec<Expr>,
}

impl FieldSpec {
    pub fn explicit(vars: Vec<Var>, components: Vec<Expr>) -> Result<Self, FlowError> {
        if vars.len() != components.len() || vars.is_empty() {
            return Err(FlowError::Field(
                "need one component per variable".into(),
            ));
        }
        Ok(FieldSpec {
            kind: FieldKind::Explicit,
            vars,
            components,
        })
    }

    pub fn parse_explicit(vars: Vec<Var>, components: &[&str]) -> Result<Self, FlowError> {
        let comps = components
            .iter()
            .map(|s| Expr::parse(s).map_err(|e| FlowError::Expr(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::explicit(vars, comps)
    }

    pub fn constant(vars: Vec<Var>, v: &[f64]) -> Self {
        let comps = v.iter().map(|&c| Expr::constant(c)).collect();
        Self::explicit(vars, comps).expect("matching lengths")
    }

    /// Geodesic field of `metric` on SM. With `e = (cos θ, sin θ)`,
    /// `a = g(e, e)^{-1/2}` and `A^k = -Γ^k_ij e^i e^j`:
    /// `ẋ = a cos θ`, `ẏ = a sin θ`, `θ̇ = a (cos θ A^y - sin θ A^x)`.
    pub fn geodesic(metric: Metric) -> Self {
        let theta = Expr::var(Var::Theta);
        let e = [theta.cos(), theta.sin()];
        let norm2 = metric
            .g11
            .mul(&e[0])
            .mul(&e[0])
            .add(&Expr::constant(2.0).mul(&metric.g12).mul(&e[0]).mul(&e[1]))
            .add(&metric.g22.mul(&e[1]).mul(&e[1]));
        let a = norm2.powf(-0.5);
        let gamma = metric.christoffel();
        let accel: Vec<Expr> = (0..2)
            .map(|k| {
                let mut s = Expr::constant(0.0);
                for i in 0..2 {
                    for j in 0..2 {
                        s = s.add(&gamma[k][i][j].mul(&e[i]).mul(&e[j]));
                    }
                }
                s.neg()
            })
            .collect();
        let theta_dot = a.mul(&e[0].mul(&accel[1]).sub(&e[1].mul(&accel[0])));
        FieldSpec {
            kind: FieldKind::Geodesic(metric),
            vars: vec![Var::X, Var::Y, Var::Theta],
            components: vec![a.mul(&e[0]), a.mul(&e[1]), theta_dot],
        }
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn reversed(&self) -> Self {
        FieldSpec {
            kind: self.kind.clone(),
            vars: self.vars.clone(),
            components: self.components.iter().map(Expr::neg).collect(),
        }
    }

    pub fn compile(&self) -> Program {
        Program::compile(&self.components)
    }

    /// Rejects geodesic specs whose metric is not uniformly positive definite
    /// on a grid over the part of the box inside the domain.
    pub fn validate(&self, domain: &ImplicitDomain, eps_pd: f64) -> Result<(), FlowError> {
        for v in domain.vars() {
            if !self.vars.contains(v) {
                return Err(FlowError::Field(format!(
                    "domain variable {} is not a state variable of the field",
                    v.name()
                )));
            }
        }
        if let FieldKind::Geodesic(metric) = &self.kind {
            let bbox = domain.bbox();
            if domain.vars() != [Var::X, Var::Y] {
                return Err(FlowError::Field(
                    "geodesic fields need a planar (x, y) domain".into(),
                ));
            }
            let n = 41;
            for i in 0..n {
                for j in 0..n {
                    let x = bbox[0].0 + (bbox[0].1 - bbox[0].0) * i as f64 / (n - 1) as f64;
                    let y = bbox[1].0 + (bbox[1].1 - bbox[1].0) * j as f64 / (n - 1) as f64;
                    let env = [x, y, 0.0, 0.0];
                    if domain.eval_z(&env) > 0.0 {
                        continue;
                    }
                    let lam = metric.min_eigenvalue(&env);
                    if !(lam >= eps_pd) {
                        return Err(FlowError::DegenerateMetric { x, y, eigenvalue: lam });
                    }
                }
            }
        }
        Ok(())
    }
}
