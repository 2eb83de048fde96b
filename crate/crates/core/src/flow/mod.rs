//! Traversing flows on implicit domains: integration with boundary events,
//! tangency multiplicities, scattering and trajectory caches.

pub mod cache;
pub mod domain;
pub mod field;
mod ode;
pub mod scatter;
pub mod trajectory;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, Program, Var};

pub use domain::{ImplicitDomain, RegularityReport};
pub use field::{FieldKind, FieldSpec, Metric};
pub use ode::State;
pub use scatter::{
    scattering_map, traversing_report, EntryOutcome, ScatteringReport, ScatteringSample,
    TraversingReport,
};
pub use trajectory::{
    integrate_trajectory, tangency_multiplicity, trace_through, BoundaryEvent, Tangency,
    TrajectoryRecord,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("no exit before t = {t_max} (trapped or closed trajectory)")]
    BudgetExceeded { t_max: f64 },
    #[error("ill-conditioned: {reason} at t = {time}")]
    IllConditioned { reason: String, time: f64 },
    #[error("point is not an entry: multiplicity {multiplicity}, sign {sign}")]
    NotAnEntry { multiplicity: u32, sign: i8 },
    #[error("point is off the boundary: |z| = {z:e}")]
    NotOnBoundary { z: f64 },
    #[error("metric not positive definite at ({x}, {y}): eigenvalue {eigenvalue}")]
    DegenerateMetric { x: f64, y: f64, eigenvalue: f64 },
    #[error("domain: {0}")]
    Domain(String),
    #[error("field: {0}")]
    Field(String),
    #[error("expression: {0}")]
    Expr(String),
}

/// Numerical tolerances for integration and boundary events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `|z|` below which a point counts as on the boundary.
    pub tol_boundary: f64,
    /// Time resolution of event location.
    pub tol_event: f64,
    /// Relative threshold for nonvanishing Lie derivatives.
    pub tol_mult: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Flight-time budget; defaults to `1e3 · diameter`.
    pub t_max: Option<f64>,
    /// Largest step; defaults to `0.05 · diameter`.
    pub h_max: Option<f64>,
    /// Highest Lie derivative tried by the multiplicity detector.
    pub k_max: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_boundary: 1e-6,
            tol_event: 1e-12,
            tol_mult: 1e-6,
            rtol: 1e-10,
            atol: 1e-12,
            t_max: None,
            h_max: None,
            k_max: 5,
        }
    }
}

impl Tolerances {
    pub fn halved(&self) -> Self {
        Tolerances {
            tol_event: self.tol_event / 2.0,
            tol_mult: self.tol_mult / 2.0,
            ..*self
        }
    }
}

/// Per-thread evaluation buffers.
#[derive(Debug, Default)]
pub struct Scratch {
    regs: Vec<f64>,
    out: Vec<f64>,
}

/// Domain and field compiled together, with the iterated Lie derivatives of
/// the boundary function.
#[derive(Debug, Clone)]
pub struct Flow {
    domain: ImplicitDomain,
    field: FieldSpec,
    active: Vec<usize>,
    rhs: Program,
    z_slope: Program,
    lie: Program,
    k_max: usize,
}

impl Flow {
    pub fn new(domain: ImplicitDomain, field: FieldSpec, k_max: usize) -> Result<Self, FlowError> {
        field.validate(&domain, 1e-9)?;
        let k_max = k_max.max(1);
        let vars = field.vars().to_vec();
        let mut derivs: Vec<Expr> = Vec::with_capacity(k_max + domain.vars().len());
        let mut cur = domain.z().clone();
        for _ in 0..k_max {
            cur = cur.lie(&vars, field.components());
            derivs.push(cur.clone());
        }
        let slope = derivs[0].clone();
        derivs.extend(domain.z().gradient(domain.vars()));
        Ok(Flow {
            rhs: field.compile(),
            z_slope: Program::compile(&[domain.z().clone(), slope]),
            lie: Program::compile(&derivs),
            active: vars.iter().map(|v| *v as usize).collect(),
            domain,
            field,
            k_max,
        })
    }

    pub fn domain(&self) -> &ImplicitDomain {
        &self.domain
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn vars(&self) -> &[Var] {
        self.field.vars()
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Dimension of the state space.
    pub fn dim(&self) -> usize {
        self.active.len()
    }

    pub fn reversed(&self) -> Flow {
        Flow::new(self.domain.clone(), self.field.reversed(), self.k_max)
            .expect("reversal keeps a valid field")
    }

    pub(crate) fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn velocity(&self, y: &State, sc: &mut Scratch) -> State {
        let n = self.active.len();
        sc.out.resize(n, 0.0);
        self.rhs.eval_into(y, &mut sc.regs, &mut sc.out);
        let mut v = [0.0; 4];
        for (i, &d) in self.active.iter().enumerate() {
            v[d] = sc.out[i];
        }
        v
    }

    /// `(z, L_v z)` at a state.
    pub fn z_and_slope(&self, y: &State, sc: &mut Scratch) -> (f64, f64) {
        let mut out = [0.0; 2];
        self.z_slope.eval_into(y, &mut sc.regs, &mut out);
        (out[0], out[1])
    }

    pub fn z(&self, y: &State) -> f64 {
        self.domain.eval_z(y)
    }

    /// `[L_v z, L_v² z, …, L_v^{k_max} z]`.
    pub fn lie_derivatives(&self, y: &State, sc: &mut Scratch) -> Vec<f64> {
        let mut out = vec![0.0; self.lie.outputs()];
        self.lie.eval_into(y, &mut sc.regs, &mut out);
        out.truncate(self.k_max);
        out
    }

    /// `max(1, |v| · |∇z|)`: the natural size of `L_v z` near the point.
    pub fn local_scale(&self, y: &State, sc: &mut Scratch) -> f64 {
        let mut out = vec![0.0; self.lie.outputs()];
        self.lie.eval_into(y, &mut sc.regs, &mut out);
        let grad: f64 = out[self.k_max..].iter().map(|g| g * g).sum::<f64>().sqrt();
        let v = self.velocity(y, sc);
        let speed: f64 = self.active.iter().map(|&d| v[d] * v[d]).sum::<f64>().sqrt();
        (grad * speed).max(1.0)
    }

    pub fn state(&self, coords: &[f64]) -> State {
        let mut y = [0.0; 4];
        for (&d, c) in self.active.iter().zip(coords) {
            y[d] = *c;
        }
        y
    }

    pub fn coords(&self, y: &State) -> Vec<f64> {
        self.active.iter().map(|&d| y[d]).collect()
    }

    pub fn t_max(&self, tol: &Tolerances) -> f64 {
        tol.t_max.unwrap_or(1e3 * self.domain.diameter())
    }

    pub fn h_max(&self, tol: &Tolerances) -> f64 {
        tol.h_max.unwrap_or(0.05 * self.domain.diameter())
    }
}
