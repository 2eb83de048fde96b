use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::expr::Var;
use crate::omega::Pattern;

use super::field::FieldKind;
use super::trajectory::{exit_time_from_interior, integrate_trajectory, TrajectoryRecord};
use super::{Flow, FlowError, Scratch, State, Tolerances};

/// Entry and exit of one trajectory, as boundary points with directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSample {
    pub entry_point: Vec<f64>,
    pub entry_direction: Vec<f64>,
    pub exit_point: Vec<f64>,
    pub exit_direction: Vec<f64>,
    pub flight_time: f64,
    pub pattern: Pattern,
    /// Full states, for feeding back into the integrator.
    pub entry_state: Vec<f64>,
    pub exit_state: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EntryOutcome {
    Sample(ScatteringSample),
    Trapped,
    Failed(FlowError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ScatteringReport {
    pub samples: Vec<ScatteringSample>,
    /// Entries with no exit inside the time budget.
    pub trapped: Vec<Vec<f64>>,
    /// Entries whose integration failed, with the reason.
    pub failed: Vec<(Vec<f64>, String)>,
}

/// Position part of a state in domain coordinates and the unit direction of
/// motion there.
pub(crate) fn point_and_direction(flow: &Flow, y: &State) -> (Vec<f64>, Vec<f64>) {
    let dom = flow.domain().vars();
    let point: Vec<f64> = dom.iter().map(|v| y[*v as usize]).collect();
    let dir: Vec<f64> = match flow.field().kind() {
        FieldKind::Geodesic(_) => {
            let th = y[Var::Theta as usize];
            vec![th.cos(), th.sin()]
        }
        FieldKind::Explicit => {
            let v = flow.velocity(y, &mut Scratch::default());
            let d: Vec<f64> = dom.iter().map(|w| v[*w as usize]).collect();
            let n = d.iter().map(|c| c * c).sum::<f64>().sqrt();
            if n > 0.0 {
                d.iter().map(|c| c / n).collect()
            } else {
                d
            }
        }
    };
    (point, dir)
}

pub fn sample_from_record(flow: &Flow, rec: &TrajectoryRecord) -> ScatteringSample {
    let entry = flow.state(&rec.entry);
    let exit = flow.state(&rec.exit);
    let (entry_point, entry_direction) = point_and_direction(flow, &entry);
    let (exit_point, exit_direction) = point_and_direction(flow, &exit);
    ScatteringSample {
        entry_point,
        entry_direction,
        exit_point,
        exit_direction,
        flight_time: rec.flight_time,
        pattern: rec.pattern.clone(),
        entry_state: rec.entry.clone(),
        exit_state: rec.exit.clone(),
    }
}

pub fn scatter_one(flow: &Flow, entry: &State, tol: &Tolerances) -> EntryOutcome {
    match integrate_trajectory(flow, entry, tol, false) {
        Ok(rec) => EntryOutcome::Sample(sample_from_record(flow, &rec)),
        Err(FlowError::BudgetExceeded { .. }) => EntryOutcome::Trapped,
        Err(e) => EntryOutcome::Failed(e),
    }
}

/// Entry-to-exit map over a list of entry states. Order of the output
/// follows the input; parallel and serial runs agree exactly.
pub fn scattering_map(flow: &Flow, entries: &[State], tol: &Tolerances) -> ScatteringReport {
    let outcomes: Vec<EntryOutcome> = entries
        .par_iter()
        .map(|e| scatter_one(flow, e, tol))
        .collect();
    let mut report = ScatteringReport::default();
    for (e, o) in entries.iter().zip(outcomes) {
        match o {
            EntryOutcome::Sample(s) => report.samples.push(s),
            EntryOutcome::Trapped => report.trapped.push(flow.coords(e)),
            EntryOutcome::Failed(err) => report.failed.push((flow.coords(e), err.to_string())),
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraversingReport {
    pub seed: u64,
    pub sampled: usize,
    /// Points whose trajectory leaves the domain both forward and backward.
    pub exited: usize,
    pub exit_fraction: f64,
    pub trapped_witnesses: Vec<Vec<f64>>,
    pub failures: Vec<(Vec<f64>, String)>,
}

/// Samples interior points and integrates both ways; a point without an
/// exit inside the time budget is a witness against the traversing property.
pub fn traversing_report(flow: &Flow, budget: usize, seed: u64, tol: &Tolerances) -> TraversingReport {
    let reverse = flow.reversed();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bbox = flow.domain().bbox().to_vec();
    let dom_vars = flow.domain().vars().to_vec();
    let mut points = Vec::with_capacity(budget);
    let mut attempts = 0usize;
    while points.len() < budget && attempts < 1000 * budget.max(1) {
        attempts += 1;
        let mut y = [0.0; 4];
        for (v, (lo, hi)) in dom_vars.iter().zip(&bbox) {
            y[*v as usize] = rng.gen_range(*lo..*hi);
        }
        for v in flow.vars() {
            if !dom_vars.contains(v) {
                y[*v as usize] = rng.gen_range(0.0..std::f64::consts::TAU);
            }
        }
        if flow.z(&y) < -tol.tol_boundary {
            points.push(y);
        }
    }
    let results: Vec<Result<(), FlowError>> = points
        .par_iter()
        .map(|p| {
            exit_time_from_interior(flow, p, tol)?;
            exit_time_from_interior(&reverse, p, tol)?;
            Ok(())
        })
        .collect();
    let mut report = TraversingReport {
        seed,
        sampled: points.len(),
        exited: 0,
        exit_fraction: 0.0,
        trapped_witnesses: Vec::new(),
        failures: Vec::new(),
    };
    for (p, r) in points.iter().zip(results) {
        match r {
            Ok(()) => report.exited += 1,
            Err(FlowError::BudgetExceeded { .. }) => report.trapped_witnesses.push(flow.coords(p)),
            Err(e) => report.failures.push((flow.coords(p), e.to_string())),
        }
    }
    report.exit_fraction = if report.sampled > 0 {
        report.exited as f64 / report.sampled as f64
    } else {
        0.0
    };
    report
}
