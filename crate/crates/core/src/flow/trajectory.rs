use serde::{Deserialize, Serialize};

use crate::omega::Pattern;

use super::ode::{dp_step, error_norm, State};
use super::{Flow, FlowError, Scratch, Tolerances};

/// Multiplicity of contact between a trajectory and the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangency {
    pub multiplicity: u32,
    /// Sign of the first nonvanishing Lie derivative.
    pub sign: i8,
    /// Point where the multiplicity was read (after refinement).
    pub state: State,
    /// Flow time from the queried point to `state`.
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEvent {
    pub time: f64,
    pub point: Vec<f64>,
    pub multiplicity: u32,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub entry: Vec<f64>,
    pub exit: Vec<f64>,
    pub flight_time: f64,
    pub events: Vec<BoundaryEvent>,
    pub pattern: Pattern,
    pub norm: u32,
    pub reduced_norm: u32,
    /// Accepted step endpoints `(t, state)`, when requested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<(f64, Vec<f64>)>,
    /// Reduced norm above the dimension of the trajectory space: the
    /// configuration is not generic.
    pub dimension_cap_exceeded: bool,
}

/// First `k` with `|L^k z| > thresh · scale^k`.
fn first_nonvanishing(derivs: &[f64], thresh: f64, scale: f64) -> Option<usize> {
    derivs
        .iter()
        .enumerate()
        .find(|(k, d)| d.abs() > thresh * scale.powi(*k as i32 + 1))
        .map(|(k, _)| k + 1)
}

/// Moves a state along the flow by `dt` (either sign) in small steps.
fn advance(flow: &Flow, y: &State, dt: f64, tol: &Tolerances, sc: &mut Scratch) -> State {
    let h_max = 0.25 * flow.h_max(tol);
    let n = (dt.abs() / h_max).ceil().max(1.0) as usize;
    let h = dt / n as f64;
    let mut y = *y;
    for _ in 0..n {
        let f0 = flow.velocity(&y, sc);
        let mut f = |s: &State| flow.velocity(s, sc);
        y = dp_step(&mut f, &y, &f0, h).0;
    }
    y
}

/// Reads the contact order at a point without checking it is on the
/// boundary. A loose first pass picks a candidate order `m`; the point is
/// then moved to the simple root of `L^{m-1} z` along the flow, where the
/// strict thresholds decide.
fn classify(flow: &Flow, y: &State, tol: &Tolerances, sc: &mut Scratch) -> Result<Tangency, FlowError> {
    let scale = flow.local_scale(y, sc);
    let derivs = flow.lie_derivatives(y, sc);
    let coarse = first_nonvanishing(&derivs, tol.tol_mult.sqrt(), scale).ok_or_else(|| {
        FlowError::IllConditioned {
            reason: format!("first {} Lie derivatives vanish", flow.k_max()),
            time: 0.0,
        }
    })?;
    let mut refined = *y;
    let mut dt = 0.0;
    if coarse >= 2 {
        let reach = 0.01 * flow.domain().diameter();
        let mut ok = true;
        for _ in 0..16 {
            let d = flow.lie_derivatives(&refined, sc);
            let (g, gp) = (d[coarse - 2], d[coarse - 1]);
            if gp == 0.0 {
                break;
            }
            let step = -g / gp;
            if !step.is_finite() || (dt + step).abs() > reach {
                ok = false;
                break;
            }
            refined = advance(flow, &refined, step, tol, sc);
            dt += step;
            if step.abs() <= tol.tol_event {
                break;
            }
        }
        if !ok || flow.z(&refined).abs() > tol.tol_boundary {
            refined = *y;
            dt = 0.0;
        }
    }
    let scale = flow.local_scale(&refined, sc);
    let derivs = flow.lie_derivatives(&refined, sc);
    let m = first_nonvanishing(&derivs, tol.tol_mult, scale).ok_or_else(|| {
        FlowError::IllConditioned {
            reason: format!("first {} Lie derivatives vanish", flow.k_max()),
            time: dt,
        }
    })?;
    Ok(Tangency {
        multiplicity: m as u32,
        sign: if derivs[m - 1] > 0.0 { 1 } else { -1 },
        state: refined,
        dt,
    })
}

/// Order of contact of the field with the boundary at a boundary point.
pub fn tangency_multiplicity(
    flow: &Flow,
    point: &State,
    tol: &Tolerances,
) -> Result<Tangency, FlowError> {
    let z = flow.z(point);
    if z.abs() > tol.tol_boundary {
        return Err(FlowError::NotOnBoundary { z });
    }
    classify(flow, point, tol, &mut Scratch::default())
}

#[derive(Clone, Copy)]
enum Probe {
    Z,
    Slope,
}

fn probe(flow: &Flow, y: &State, which: Probe, sc: &mut Scratch) -> f64 {
    let (z, s) = flow.z_and_slope(y, sc);
    match which {
        Probe::Z => z,
        Probe::Slope => s,
    }
}

/// Root of `probe` along one step from `y`, bracketed by `[lo, h]` where
/// `g0` is the value at `lo`. Each trial point is a fresh single step of the
/// integrator (so accuracy matches the accepted step). Illinois false
/// position with bisection fallback.
#[allow(clippy::too_many_arguments)]
fn locate(
    flow: &Flow,
    y: &State,
    f0: &State,
    (lo, g0): (f64, f64),
    h: f64,
    which: Probe,
    g1: f64,
    tol_t: f64,
    sc: &mut Scratch,
) -> (f64, State) {
    let eval = |tau: f64, sc: &mut Scratch| -> (State, f64) {
        if tau == 0.0 {
            return (*y, probe(flow, y, which, sc));
        }
        let mut f = |s: &State| flow.velocity(s, sc);
        let yt = dp_step(&mut f, y, f0, tau).0;
        let g = probe(flow, &yt, which, sc);
        (yt, g)
    };
    if g0.signum() == g1.signum() && g0 != 0.0 && g1 != 0.0 {
        // no bracket; the endpoint nearer the root
        let t = if g0.abs() <= g1.abs() { lo } else { h };
        return (t, eval(t, sc).0);
    }
    let (mut a, mut ga, mut b, mut gb) = (lo, g0, h, g1);
    let mut best = if ga.abs() <= gb.abs() {
        (a, eval(a, sc).0, ga)
    } else {
        (b, eval(b, sc).0, gb)
    };
    let mut side = 0i8;
    let mut width = (b - a).abs();
    for it in 0..200 {
        if (b - a).abs() <= tol_t || best.2 == 0.0 {
            break;
        }
        let mut c = (a * gb - b * ga) / (gb - ga);
        // bisect when false position stalls
        if !c.is_finite() || !((c - a) * (c - b) < 0.0) || (it % 4 == 3 && (b - a).abs() > 0.5 * width) {
            c = 0.5 * (a + b);
        }
        if it % 4 == 3 {
            width = (b - a).abs();
        }
        let (yc, gc) = eval(c, sc);
        if gc.abs() < best.2.abs() || gc == 0.0 {
            best = (c, yc, gc);
        }
        if gc == 0.0 {
            break;
        }
        if gc.signum() == gb.signum() {
            b = c;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    (best.0, best.1)
}

#[derive(Clone, Copy, PartialEq)]
enum Start {
    /// On the boundary, heading inward.
    Boundary,
    Interior,
}

struct Run {
    events: Vec<(f64, Tangency)>,
    exit: (f64, Tangency),
    samples: Vec<(f64, Vec<f64>)>,
}

fn ill(reason: &str, time: f64) -> FlowError {
    FlowError::IllConditioned {
        reason: reason.to_string(),
        time,
    }
}

/// Integrates from `y0` until the trajectory leaves the domain, collecting
/// interior tangencies. A crossing of `z = 0` is only an exit once `z`
/// clears `tol_boundary`; if `z` turns around first it was a graze.
fn run(
    flow: &Flow,
    y0: &State,
    start: Start,
    tol: &Tolerances,
    sc: &mut Scratch,
    keep_samples: bool,
) -> Result<Run, FlowError> {
    let t_max = flow.t_max(tol);
    let h_max = flow.h_max(tol);
    let h_min = 1e-14 * flow.domain().diameter();
    let active = flow.active().to_vec();
    let mut t = 0.0;
    let mut y = *y0;
    let mut f0 = flow.velocity(&y, sc);
    let (mut z_prev, mut s_prev) = flow.z_and_slope(&y, sc);
    if start == Start::Boundary {
        z_prev = z_prev.min(0.0);
        s_prev = s_prev.min(0.0);
    }
    let mut h = 0.1 * h_max;
    let mut pending: Option<(f64, State)> = None;
    let mut events = Vec::new();
    let mut samples = Vec::new();
    if keep_samples {
        samples.push((0.0, flow.coords(&y)));
    }
    let exit_at = |t_exit: f64, y_exit: &State, sc: &mut Scratch| -> Result<(f64, Tangency), FlowError> {
        let tg = classify(flow, y_exit, tol, sc).map_err(|e| match e {
            FlowError::IllConditioned { reason, .. } => ill(&reason, t_exit),
            other => other,
        })?;
        if tg.multiplicity % 2 == 0 || tg.sign < 0 {
            return Err(ill(
                &format!(
                    "exit with multiplicity {} and sign {}",
                    tg.multiplicity, tg.sign
                ),
                t_exit,
            ));
        }
        Ok((t_exit + tg.dt, tg))
    };
    loop {
        if t > t_max {
            return Err(FlowError::BudgetExceeded { t_max });
        }
        h = h.min(h_max);
        let mut f = |s: &State| flow.velocity(s, sc);
        let (y1, f1, err) = dp_step(&mut f, &y, &f0, h);
        let en = error_norm(&err, &y, &y1, &active, tol.rtol, tol.atol);
        if !(en <= 1.0) {
            h *= if en.is_finite() { (0.9 * en.powf(-0.2)).max(0.2) } else { 0.2 };
            if h < h_min {
                return Err(ill("step size underflow", t));
            }
            continue;
        }
        let (z1, s1) = flow.z_and_slope(&y1, sc);
        let mut handled = false;
        if s_prev > 0.0 && s1 <= 0.0 {
            // z has a local maximum inside the step
            let (tau, ym) = locate(flow, &y, &f0, (0.0, s_prev), h, Probe::Slope, s1, tol.tol_event, sc);
            let zm = flow.z(&ym);
            if zm > tol.tol_boundary {
                let (te, ye) = match pending.take() {
                    Some(p) => p,
                    None => {
                        let (tc, yc) = locate(flow, &y, &f0, (0.0, z_prev), tau, Probe::Z, zm, tol.tol_event, sc);
                        (t + tc, yc)
                    }
                };
                let exit = exit_at(te, &ye, sc)?;
                return Ok(Run { events, exit, samples });
            }
            if zm >= -tol.tol_boundary {
                let tg = classify(flow, &ym, tol, sc).map_err(|e| match e {
                    FlowError::IllConditioned { reason, .. } => ill(&reason, t + tau),
                    other => other,
                })?;
                if tg.multiplicity % 2 == 1 {
                    return Err(ill(
                        &format!("graze with odd multiplicity {}", tg.multiplicity),
                        t + tau,
                    ));
                }
                events.push((t + tau + tg.dt, tg));
                pending = None;
                handled = true;
            }
        }
        if !handled {
            if pending.is_none() && z_prev <= 0.0 && z1 > 0.0 {
                // a minimum of z inside the step (a short chord from a
                // boundary start) brackets the exit away from the start
                let mut lo = (0.0, z_prev);
                if s_prev < 0.0 && s1 > 0.0 {
                    let (tm, ym) = locate(flow, &y, &f0, (0.0, s_prev), h, Probe::Slope, s1, tol.tol_event, sc);
                    let zm = flow.z(&ym);
                    if zm < 0.0 {
                        lo = (tm, zm);
                    }
                }
                let (tc, yc) = locate(flow, &y, &f0, lo, h, Probe::Z, z1, tol.tol_event, sc);
                pending = Some((t + tc, yc));
            }
            if let Some((tp, yp)) = pending {
                if z1 > tol.tol_boundary {
                    let exit = exit_at(tp, &yp, sc)?;
                    return Ok(Run { events, exit, samples });
                }
                if z1 <= 0.0 {
                    return Err(ill("boundary touch without a located maximum", tp));
                }
            }
        }
        t += h;
        y = y1;
        f0 = f1;
        z_prev = z1;
        s_prev = s1;
        if keep_samples {
            samples.push((t, flow.coords(&y)));
        }
        h *= (0.9 * en.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
    }
}

fn event(flow: &Flow, time: f64, tg: &Tangency) -> BoundaryEvent {
    BoundaryEvent {
        time,
        point: flow.coords(&tg.state),
        multiplicity: tg.multiplicity,
        sign: tg.sign,
    }
}

fn record(
    flow: &Flow,
    entry: &Tangency,
    events: Vec<BoundaryEvent>,
    exit: Option<(f64, Tangency)>,
    samples: Vec<(f64, Vec<f64>)>,
) -> Result<TrajectoryRecord, FlowError> {
    let multiplicities: Vec<u32> = events.iter().map(|e| e.multiplicity).collect();
    let pattern = Pattern::new(multiplicities).map_err(|e| FlowError::IllConditioned {
        reason: format!("extracted divisor is not admissible: {e}"),
        time: events.last().map_or(0.0, |e| e.time),
    })?;
    let (flight_time, exit) = match exit {
        Some((t, tg)) => (t, flow.coords(&tg.state)),
        None => (0.0, flow.coords(&entry.state)),
    };
    Ok(TrajectoryRecord {
        entry: flow.coords(&entry.state),
        exit,
        flight_time,
        norm: pattern.norm(),
        reduced_norm: pattern.reduced_norm(),
        dimension_cap_exceeded: pattern.reduced_norm() as usize >= flow.dim(),
        pattern,
        events,
        samples,
    })
}

/// Integrates the trajectory starting at a boundary entry. Entries must have
/// odd multiplicity with the field pointing inward, or even multiplicity
/// with the trajectory touching from outside (a singleton trajectory).
pub fn integrate_trajectory(
    flow: &Flow,
    entry: &State,
    tol: &Tolerances,
    keep_samples: bool,
) -> Result<TrajectoryRecord, FlowError> {
    let sc = &mut Scratch::default();
    let z = flow.z(entry);
    if z.abs() > tol.tol_boundary {
        return Err(FlowError::NotOnBoundary { z });
    }
    let mut start = classify(flow, entry, tol, sc)?;
    let m = start.multiplicity;
    if m % 2 == 0 {
        if start.sign > 0 {
            let ev = event(flow, 0.0, &start);
            return record(flow, &start, vec![ev], None, Vec::new());
        }
        return Err(FlowError::NotAnEntry {
            multiplicity: m,
            sign: start.sign,
        });
    }
    if start.sign > 0 {
        return Err(FlowError::NotAnEntry {
            multiplicity: m,
            sign: start.sign,
        });
    }
    // the entry is the queried point; refinement only informs the order
    start.state = *entry;
    start.dt = 0.0;
    let r = run(flow, entry, Start::Boundary, tol, sc, keep_samples)?;
    let mut events = vec![event(flow, 0.0, &start)];
    events.extend(r.events.iter().map(|(t, tg)| event(flow, *t, tg)));
    events.push(event(flow, r.exit.0, &r.exit.1));
    record(flow, &start, events, Some(r.exit), r.samples)
}

/// The full trajectory through a boundary point that is not an entry (for
/// instance a touch from inside): integrates `reverse` back to the true
/// entry, then forward.
pub fn trace_through(
    flow: &Flow,
    reverse: &Flow,
    point: &State,
    tol: &Tolerances,
) -> Result<TrajectoryRecord, FlowError> {
    let sc = &mut Scratch::default();
    let z = flow.z(point);
    let start = if z.abs() <= tol.tol_boundary { Start::Boundary } else { Start::Interior };
    let back = run(reverse, point, start, tol, sc, false)?;
    integrate_trajectory(flow, &back.exit.1.state, tol, false)
}

/// Forward run from an interior point; `Ok(exit time)` or the failure.
pub(crate) fn exit_time_from_interior(flow: &Flow, point: &State, tol: &Tolerances) -> Result<f64, FlowError> {
    let sc = &mut Scratch::default();
    run(flow, point, Start::Interior, tol, sc, false).map(|r| r.exit.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Var;
    use crate::flow::{FieldSpec, ImplicitDomain, Metric};

    fn disk_flow() -> Flow {
        Flow::new(
            ImplicitDomain::unit_disk(),
            FieldSpec::constant(vec![Var::X, Var::Y], &[1.0, 0.0]),
            5,
        )
        .unwrap()
    }

    #[test]
    fn disk_chord() {
        let flow = disk_flow();
        let tol = Tolerances::default();
        let r = integrate_trajectory(&flow, &flow.state(&[-1.0, 0.0]), &tol, false).unwrap();
        assert_eq!(r.pattern.to_string(), "11");
        assert!((r.flight_time - 2.0).abs() < 1e-9);
        assert!((r.exit[0] - 1.0).abs() < 1e-9 && r.exit[1].abs() < 1e-12);
    }

    #[test]
    fn disk_tangent_singleton() {
        let flow = Flow::new(
            ImplicitDomain::unit_disk(),
            FieldSpec::constant(vec![Var::X, Var::Y], &[0.0, 1.0]),
            5,
        )
        .unwrap();
        let r = integrate_trajectory(&flow, &flow.state(&[1.0, 0.0]), &Tolerances::default(), false).unwrap();
        assert_eq!(r.pattern.to_string(), "2");
        assert_eq!(r.flight_time, 0.0);
    }

    #[test]
    fn annulus_tangent_chord() {
        let flow = Flow::new(
            ImplicitDomain::annulus(),
            FieldSpec::geodesic(Metric::euclidean()),
            5,
        )
        .unwrap();
        let s3 = 3f64.sqrt();
        let r = integrate_trajectory(&flow, &flow.state(&[-s3, 1.0, 0.0]), &Tolerances::default(), false).unwrap();
        assert_eq!(r.pattern.to_string(), "121");
        let mid = &r.events[1].point;
        assert!(mid[0].abs() < 1e-6 && (mid[1] - 1.0).abs() < 1e-9);
        assert!((r.exit[0] - s3).abs() < 1e-9);
        assert!((r.flight_time - 2.0 * s3).abs() < 1e-9);
    }

    #[test]
    fn not_an_entry() {
        let flow = disk_flow();
        let e = integrate_trajectory(&flow, &flow.state(&[1.0, 0.0]), &Tolerances::default(), false).unwrap_err();
        assert!(matches!(e, FlowError::NotAnEntry { multiplicity: 1, sign: 1 }));
        let e = integrate_trajectory(&flow, &flow.state(&[0.0, 0.0]), &Tolerances::default(), false).unwrap_err();
        assert!(matches!(e, FlowError::NotOnBoundary { .. }));
    }

    #[test]
    fn local_model_multiplicities() {
        let tol = Tolerances::default();
        for j in 1..=4u32 {
            let dom = ImplicitDomain::parse(vec![Var::U], &format!("u^{j}"), vec![(-1.0, 1.0)]).unwrap();
            let flow = Flow::new(dom, FieldSpec::constant(vec![Var::U], &[1.0]), 5).unwrap();
            let tg = tangency_multiplicity(&flow, &flow.state(&[0.0]), &tol).unwrap();
            assert_eq!(tg.multiplicity, j);
        }
        // z = u^2 + x at the origin with v = ∂_u
        let dom = ImplicitDomain::parse(vec![Var::U, Var::X], "u^2 + x", vec![(-1.0, 1.0); 2]).unwrap();
        let flow = Flow::new(dom, FieldSpec::constant(vec![Var::U, Var::X], &[1.0, 0.0]), 5).unwrap();
        let tg = tangency_multiplicity(&flow, &flow.state(&[0.0, 0.0]), &tol).unwrap();
        assert_eq!(tg.multiplicity, 2);
    }

    #[test]
    fn cubic_exit_is_refined() {
        // 1-D flow through z = u^3: exit at u = 0 with multiplicity 3
        let dom = ImplicitDomain::parse(vec![Var::U], "(u + 1) * u^3", vec![(-2.0, 1.0)]).unwrap();
        let flow = Flow::new(dom, FieldSpec::constant(vec![Var::U], &[1.0]), 5).unwrap();
        let r = integrate_trajectory(&flow, &flow.state(&[-1.0]), &Tolerances::default(), false).unwrap();
        assert_eq!(r.pattern.to_string(), "13");
        assert!(r.exit[0].abs() < 1e-9);
    }

    #[test]
    fn trace_through_a_touch() {
        let flow = Flow::new(
            ImplicitDomain::annulus(),
            FieldSpec::geodesic(Metric::euclidean()),
            5,
        )
        .unwrap();
        let reverse = flow.reversed();
        let r = trace_through(&flow, &reverse, &flow.state(&[0.0, 1.0, 0.0]), &Tolerances::default()).unwrap();
        assert_eq!(r.pattern.to_string(), "121");
        assert!((r.entry[0] + 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn short_chords_exit_at_the_far_end() {
        let flow = Flow::new(ImplicitDomain::unit_disk(), FieldSpec::geodesic(Metric::euclidean()), 5).unwrap();
        // closer to tangency the sagitta drops below tol_boundary and the
        // chord reads as a touch
        for eps in [3e-2, 1e-2, 4e-3] {
            // direction eps off the tangent at (-1, 0), turning inward
            let theta = std::f64::consts::FRAC_PI_2 - eps;
            let r = integrate_trajectory(&flow, &[-1.0, 0.0, 0.0, theta], &Tolerances::default(), false).unwrap();
            let t = 2.0 * theta.cos();
            assert_eq!(r.pattern.to_string(), "11");
            assert!((r.flight_time - t).abs() < 1e-9, "eps {eps}: {} vs {t}", r.flight_time);
        }
    }
}
