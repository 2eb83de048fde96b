//! Dormand–Prince 5(4) steps on fixed-size states.

pub type State = [f64; 4];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One step of size `h` (which may be negative) from `y` with slope `f0`
/// already known. Returns the fifth-order solution, the slope there, and the
/// embedded error estimate per component.
pub fn dp_step(
    f: &mut impl FnMut(&State) -> State,
    y: &State,
    f0: &State,
    h: f64,
) -> (State, State, State) {
    let mut k = [[0.0; 4]; 7];
    k[0] = *f0;
    for s in 1..7 {
        let mut ys = *y;
        for (d, v) in ys.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (r, a) in A[s].iter().take(s).enumerate() {
                acc += a * k[r][d];
            }
            *v += h * acc;
        }
        k[s] = f(&ys);
    }
    // stage 7 is evaluated at the fifth-order solution itself
    let mut y5 = *y;
    let mut err = [0.0; 4];
    for d in 0..4 {
        let mut s5 = 0.0;
        let mut s4 = 0.0;
        for s in 0..7 {
            s5 += B5[s] * k[s][d];
            s4 += B4[s] * k[s][d];
        }
        y5[d] += h * s5;
        err[d] = h * (s5 - s4);
    }
    (y5, k[6], err)
}

/// Weighted RMS error norm over the active components.
pub fn error_norm(err: &State, y0: &State, y1: &State, active: &[usize], rtol: f64, atol: f64) -> f64 {
    let mut s = 0.0;
    for &d in active {
        let sc = atol + rtol * y0[d].abs().max(y1[d].abs());
        s += (err[d] / sc).powi(2);
    }
    (s / active.len() as f64).sqrt()
}
