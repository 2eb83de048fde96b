use std::f64::consts::PI;

use proptest::prelude::*;

use travflow::flow::{
    integrate_trajectory, tangency_multiplicity, FieldSpec, Flow, ImplicitDomain, Metric, Tolerances,
};
use travflow::omega::is_admissible;

fn geodesic(domain: ImplicitDomain) -> Flow {
    Flow::new(domain, FieldSpec::geodesic(Metric::euclidean()), 5).unwrap()
}

/// Point where the ray from the origin at angle `a` leaves `{z <= 0}`.
fn ray_exit(flow: &Flow, a: f64) -> (f64, f64) {
    let at = |r: f64| flow.z(&[r * a.cos(), r * a.sin(), 0.0, 0.0]);
    let (mut lo, mut hi) = (0.0, 0.1);
    while at(hi) <= 0.0 {
        lo = hi;
        hi *= 1.5;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * a.cos(), lo * a.sin())
}

fn bean_gradient(x: f64, y: f64) -> (f64, f64) {
    let w = y - 0.5 * x * x;
    (2.0 * x - 8.0 * x * w, 8.0 * w)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 256,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn ellipse_exits_match_line_conic_intersection(s in 0.0..2.0 * PI, phi in -1.45f64..1.45) {
        let (a, b) = (2.0, 1.0);
        let flow = geodesic(ImplicitDomain::ellipse(a, b));
        let p = (a * s.cos(), b * s.sin());
        let normal = (p.1 / (b * b)).atan2(p.0 / (a * a));
        let theta = normal + PI + phi;
        let w = (theta.cos(), theta.sin());
        let t = -2.0 * (p.0 * w.0 / (a * a) + p.1 * w.1 / (b * b)) / (w.0 * w.0 / (a * a) + w.1 * w.1 / (b * b));
        let rec = integrate_trajectory(&flow, &[p.0, p.1, 0.0, theta], &Tolerances::default(), false).unwrap();
        prop_assert_eq!(rec.pattern.to_string(), "11");
        prop_assert!((rec.flight_time - t).abs() < 1e-6);
        prop_assert!((rec.exit[0] - (p.0 + t * w.0)).abs() < 1e-6);
        prop_assert!((rec.exit[1] - (p.1 + t * w.1)).abs() < 1e-6);
    }

    #[test]
    fn multiplicity_survives_halved_tolerances(which in 0usize..4, a in 0.0..2.0 * PI, phi in -PI..PI, tangent in any::<bool>()) {
        let domain = match which {
            0 => ImplicitDomain::unit_disk(),
            1 => ImplicitDomain::annulus(),
            2 => ImplicitDomain::ellipse(2.0, 1.0),
            _ => ImplicitDomain::bean(),
        };
        let flow = geodesic(domain);
        let (x, y) = match which {
            1 if phi < 0.0 => (a.cos(), a.sin()),
            1 => (2.0 * a.cos(), 2.0 * a.sin()),
            _ => ray_exit(&flow, a),
        };
        let (gx, gy) = match which {
            0 | 1 => (x, y),
            2 => (x / 4.0, y),
            _ => bean_gradient(x, y),
        };
        let theta = if tangent { gy.atan2(gx) + PI / 2.0 } else { phi };
        let state = [x, y, 0.0, theta];
        let tol = Tolerances::default();
        let m = tangency_multiplicity(&flow, &state, &tol).map(|t| t.multiplicity);
        let halved = tangency_multiplicity(&flow, &state, &tol.halved()).map(|t| t.multiplicity);
        prop_assert_eq!(&m, &halved);
        if tangent && which < 3 {
            prop_assert_eq!(m, Ok(2));
        }
    }

    #[test]
    fn bean_patterns_are_admissible(a in 0.0..2.0 * PI, phi in -1.4f64..1.4) {
        let flow = geodesic(ImplicitDomain::bean());
        let (x, y) = ray_exit(&flow, a);
        let (gx, gy) = bean_gradient(x, y);
        let theta = gy.atan2(gx) + PI + phi;
        let rec = integrate_trajectory(&flow, &[x, y, 0.0, theta], &Tolerances::default(), false).unwrap();
        prop_assert!(is_admissible(rec.pattern.entries()));
        prop_assert_eq!(rec.events.len(), rec.pattern.len());
    }
}

#[test]
fn momentum_is_conserved_when_the_metric_ignores_y() {
    let metric = Metric::parse("1", "0", "(1 + 0.1*x)^2").unwrap();
    let flow = Flow::new(ImplicitDomain::unit_disk(), FieldSpec::geodesic(metric), 5).unwrap();
    // g22 · ẏ along a unit-speed geodesic
    let momentum = |x: f64, theta: f64| {
        let g22 = (1.0 + 0.1 * x).powi(2);
        let speed = (theta.cos().powi(2) + g22 * theta.sin().powi(2)).sqrt().recip();
        g22 * speed * theta.sin()
    };
    for k in 0..12 {
        let a = 2.0 * PI * k as f64 / 12.0;
        let theta = a + PI + 0.3;
        let rec = integrate_trajectory(&flow, &[a.cos(), a.sin(), 0.0, theta], &Tolerances::default(), true).unwrap();
        let start = momentum(a.cos(), theta);
        let drift = rec
            .samples
            .iter()
            .map(|(_, s)| (momentum(s[0], s[2]) - start).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-8, "start angle {a}: drift {drift:e}");
        assert!(rec.samples.len() > 2);
    }
}

#[test]
fn constant_conformal_factor_gives_straight_chords() {
    let metric = Metric::parse("4", "0", "4").unwrap();
    let flow = Flow::new(ImplicitDomain::unit_disk(), FieldSpec::geodesic(metric), 5).unwrap();
    let a: f64 = 0.7;
    let theta = a + PI - 0.4;
    let rec = integrate_trajectory(&flow, &[a.cos(), a.sin(), 0.0, theta], &Tolerances::default(), false).unwrap();
    let t = -2.0 * (a.cos() * theta.cos() + a.sin() * theta.sin());
    // unit speed in g is half the Euclidean speed
    assert!((rec.flight_time - 2.0 * t).abs() < 1e-9);
    assert!((rec.exit[0] - (a.cos() + t * theta.cos())).abs() < 1e-9);
    assert!((rec.exit[2] - theta).abs() < 1e-9);
}
