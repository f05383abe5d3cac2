//! Adaptive Dormand-Prince 5(4) integration for complex vector and
//! matrix states. Used by the Fock-space oracle and by propagation with
//! time-dependent rates; the constant-rate amplitude path uses exact
//! eigendecomposition instead.

use nalgebra::{DMatrix, DVector};

use crate::C64;

/// Minimal state interface for the integrator.
pub trait OdeState: Clone {
    /// `self += a * x`
    fn add_scaled(&mut self, a: f64, x: &Self);
    /// `self *= a`
    fn scale_by(&mut self, a: f64);
    /// Scaled RMS norm of `err` relative to `atol + rtol * max(|y0|, |y1|)`.
    fn error_norm(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64;
}

macro_rules! impl_ode_state {
    ($ty:ty) => {
        impl OdeState for $ty {
            fn add_scaled(&mut self, a: f64, x: &Self) {
                let a = C64::new(a, 0.0);
                self.zip_apply(x, |s, xv| *s += a * xv);
            }

            fn scale_by(&mut self, a: f64) {
                *self *= C64::new(a, 0.0);
            }

            fn error_norm(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
                let mut acc = 0.0;
                for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
                    let scale = atol + rtol * a.norm().max(b.norm());
                    let r = e.norm() / scale;
                    acc += r * r;
                }
                (acc / err.len() as f64).sqrt()
            }
        }
    };
}

impl_ode_state!(DVector<C64>);
impl_ode_state!(DMatrix<C64>);

const A: [[f64; 6]; 6] = [
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
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// Difference between the 5th- and 4th-order weights (error estimator).
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Integrates `dy/dt = rhs(t, y)` from `t0` to `t1`.
pub fn integrate<S, F>(rhs: F, t0: f64, y0: S, t1: f64, rtol: f64, atol: f64) -> S
where
    S: OdeState,
    F: Fn(f64, &S) -> S,
{
    assert!(t1 >= t0, "integration runs forward");
    if t1 == t0 {
        return y0;
    }
    let span = t1 - t0;
    let mut t = t0;
    let mut y = y0;
    let mut h = span / 100.0;
    let mut k1 = rhs(t, &y);

    while t < t1 {
        h = h.min(t1 - t);
        let mut k = Vec::with_capacity(7);
        k.push(k1.clone());
        for stage in 0..6 {
            let mut ys = y.clone();
            for (i, kn) in k.iter().enumerate() {
                let a = A[stage][i];
                if a != 0.0 {
                    ys.add_scaled(h * a, kn);
                }
            }
            k.push(rhs(t + C[stage] * h, &ys));
        }
        // 5th-order solution is stage 6's argument (FSAL): rebuild it.
        let mut y_new = y.clone();
        for (i, kn) in k.iter().take(6).enumerate() {
            let a = A[5][i];
            if a != 0.0 {
                y_new.add_scaled(h * a, kn);
            }
        }
        let mut err = k[0].clone();
        err.scale_by(h * E[0]);
        for (i, kn) in k.iter().enumerate().skip(1) {
            if E[i] != 0.0 {
                err.add_scaled(h * E[i], kn);
            }
        }
        let norm = S::error_norm(&err, &y, &y_new, atol, rtol);
        if norm <= 1.0 || h <= span * 1e-14 {
            t += h;
            y = y_new;
            k1 = k.pop().unwrap(); // first-same-as-last
        }
        let factor = if norm > 0.0 {
            0.9 * norm.powf(-0.2)
        } else {
            5.0
        };
        h *= factor.clamp(0.2, 5.0);
    }
    y
}
