use serde::Serialize;

use crate::expr::{Expr, ExprError, Program, Var};

use super::FlowError;

/// `X = {z <= 0}` inside an axis-aligned bounding box.
#[derive(Debug, Clone)]
pub struct ImplicitDomain {
    vars: Vec<Var>,
    z: Expr,
    bbox: Vec<(f64, f64)>,
    z_prog: Program,
    grad_prog: Program,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub interior_samples: usize,
    pub boundary_samples: usize,
    pub min_gradient: f64,
    pub regular: bool,
}

impl ImplicitDomain {
    pub fn new(vars: Vec<Var>, z: Expr, bbox: Vec<(f64, f64)>) -> Result<Self, FlowError> {
        if vars.is_empty() || vars.len() != bbox.len() {
            return Err(FlowError::Domain(
                "need one bounding interval per variable".into(),
            ));
        }
        if bbox.iter().any(|&(lo, hi)| !(lo < hi)) {
            return Err(FlowError::Domain("empty bounding interval".into()));
        }
        if let Some(v) = Var::ALL
            .iter()
            .find(|v| !vars.contains(v) && z.uses(**v))
        {
            return Err(FlowError::Domain(format!(
                "boundary function uses {} which is not a domain variable",
                v.name()
            )));
        }
        let grad = z.gradient(&vars);
        Ok(ImplicitDomain {
            z_prog: z.compile(),
            grad_prog: Program::compile(&grad),
            vars,
            z,
            bbox,
        })
    }

    pub fn parse(vars: Vec<Var>, z: &str, bbox: Vec<(f64, f64)>) -> Result<Self, FlowError> {
        let z = Expr::parse(z).map_err(|e: ExprError| FlowError::Expr(e.to_string()))?;
        Self::new(vars, z, bbox)
    }

    pub fn unit_disk() -> Self {
        Self::parse(vec![Var::X, Var::Y], "x^2 + y^2 - 1", vec![(-1.5, 1.5); 2]).unwrap()
    }

    /// Planar annulus `1 <= r <= 2`.
    pub fn annulus() -> Self {
        Self::parse(
            vec![Var::X, Var::Y],
            "(x^2 + y^2 - 4) * (x^2 + y^2 - 1)",
            vec![(-2.5, 2.5); 2],
        )
        .unwrap()
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        Self::parse(
            vec![Var::X, Var::Y],
            &format!("x^2 / {} + y^2 / {} - 1", a * a, b * b),
            vec![(-1.25 * a, 1.25 * a), (-1.25 * b, 1.25 * b)],
        )
        .unwrap()
    }

    /// A non-convex bean shaped curve.
    pub fn bean() -> Self {
        Self::parse(
            vec![Var::X, Var::Y],
            "x^2 + 4*(y - 0.5*x^2)^2 - 1",
            vec![(-1.5, 1.5), (-0.8, 1.6)],
        )
        .unwrap()
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn z(&self) -> &Expr {
        &self.z
    }

    pub fn bbox(&self) -> &[(f64, f64)] {
        &self.bbox
    }

    pub fn diameter(&self) -> f64 {
        self.bbox
            .iter()
            .map(|(lo, hi)| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }

    pub fn eval_z(&self, env: &[f64; 4]) -> f64 {
        self.z_prog.eval(env)
    }

    pub fn gradient(&self, env: &[f64; 4]) -> Vec<f64> {
        let mut out = vec![0.0; self.vars.len()];
        self.grad_prog.eval_into(env, &mut Vec::new(), &mut out);
        out
    }

    /// Newton projection along the gradient onto `z = 0`.
    pub fn project_to_boundary(&self, env: &[f64; 4]) -> Option<[f64; 4]> {
        let mut p = *env;
        for _ in 0..50 {
            let z = self.eval_z(&p);
            let g = self.gradient(&p);
            let g2: f64 = g.iter().map(|v| v * v).sum();
            if g2 == 0.0 || !z.is_finite() {
                return None;
            }
            let mut step = 0.0f64;
            for (v, gi) in self.vars.iter().zip(&g) {
                let d = z * gi / g2;
                p[*v as usize] -= d;
                step = step.max(d.abs());
            }
            if step < 1e-15 * (1.0 + self.diameter()) {
                return Some(p);
            }
        }
        (self.eval_z(&p).abs() < 1e-12).then_some(p)
    }

    pub fn env(&self, coords: &[f64]) -> [f64; 4] {
        let mut e = [0.0; 4];
        for (v, c) in self.vars.iter().zip(coords) {
            e[*v as usize] = *c;
        }
        e
    }

    /// Samples a grid over the box: interior nodes must have `z < 0` and
    /// boundary points found on sign-changing grid edges must have
    /// `|∇z| >= eps_reg`.
    pub fn check_regular(&self, resolution: usize, eps_reg: f64) -> RegularityReport {
        let n = self.vars.len();
        let res = resolution.max(2);
        let total = res.pow(n as u32);
        let coord = |flat: usize| -> Vec<f64> {
            let mut rem = flat;
            (0..n)
                .map(|k| {
                    let i = rem % res;
                    rem /= res;
                    let (lo, hi) = self.bbox[k];
                    lo + (hi - lo) * i as f64 / (res - 1) as f64
                })
                .collect()
        };
        let mut interior = 0;
        let mut boundary = 0;
        let mut min_grad = f64::INFINITY;
        for flat in 0..total {
            let p = self.env(&coord(flat));
            let zp = self.eval_z(&p);
            if zp < 0.0 {
                interior += 1;
            }
            // one neighbor per axis
            let mut stride = 1;
            for k in 0..n {
                let idx = (flat / stride) % res;
                if idx + 1 < res {
                    let q = self.env(&coord(flat + stride));
                    let zq = self.eval_z(&q);
                    if (zp < 0.0) != (zq < 0.0) {
                        let mid: Vec<f64> = (0..n)
                            .map(|d| 0.5 * (p[self.vars[d] as usize] + q[self.vars[d] as usize]))
                            .collect();
                        if let Some(b) = self.project_to_boundary(&self.env(&mid)) {
                            let g: f64 = self.gradient(&b).iter().map(|v| v * v).sum::<f64>().sqrt();
                            min_grad = min_grad.min(g);
                            boundary += 1;
                        }
                    }
                }
                stride *= res;
                let _ = k;
            }
        }
        RegularityReport {
            interior_samples: interior,
            boundary_samples: boundary,
            min_gradient: min_grad,
            regular: boundary > 0 && min_grad >= eps_reg,
        }
    }
}
