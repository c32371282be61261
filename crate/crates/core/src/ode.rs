//! Adaptive embedded Runge-Kutta integration for small complex ODE systems.
//!
//! Dormand-Prince 5(4) pair with PI-free step control. States are fixed-size
//! arrays of complex numbers; the right-hand side is an arbitrary closure, so
//! stiff exponential factors can be removed analytically by the caller before
//! integration (the intended usage for the decaying branch of the eigenvalue
//! equation).

use crate::{CoreError, Result, C64};

/// Integrator options.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Relative tolerance per step.
    pub rtol: f64,
    /// Absolute tolerance per step.
    pub atol: f64,
    /// Hard cap on accepted + rejected steps.
    pub max_steps: usize,
    /// Optional initial step size magnitude.
    pub initial_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-14,
            max_steps: 2_000_000,
            initial_step: None,
        }
    }
}

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
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
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

fn axpy<const N: usize>(y: &[C64; N], coeffs: &[f64], ks: &[[C64; N]], h: f64) -> [C64; N] {
    let mut out = *y;
    for (c, k) in coeffs.iter().zip(ks) {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrate from `x0` to `x1` (either direction), returning the state at `x1`.
pub fn integrate<const N: usize>(
    mut f: impl FnMut(f64, &[C64; N]) -> [C64; N],
    x0: f64,
    x1: f64,
    y0: [C64; N],
    opts: &OdeOptions,
) -> Result<[C64; N]> {
    let mut out = y0;
    integrate_with(&mut f, x0, x1, y0, opts, |_, y| out = *y)?;
    Ok(out)
}

/// Integrate from `x0` through each checkpoint in `xs` (monotone toward the
/// last entry), returning the state at every checkpoint.
pub fn integrate_checkpoints<const N: usize>(
    mut f: impl FnMut(f64, &[C64; N]) -> [C64; N],
    x0: f64,
    xs: &[f64],
    y0: [C64; N],
    opts: &OdeOptions,
) -> Result<Vec<[C64; N]>> {
    let mut out = Vec::with_capacity(xs.len());
    let mut y = y0;
    let mut x = x0;
    for &target in xs {
        y = integrate(&mut f, x, target, y, opts)?;
        x = target;
        out.push(y);
    }
    Ok(out)
}

/// Core loop; `observe` is called after every accepted step with (x, y).
fn integrate_with<const N: usize>(
    f: &mut impl FnMut(f64, &[C64; N]) -> [C64; N],
    x0: f64,
    x1: f64,
    y0: [C64; N],
    opts: &OdeOptions,
    mut observe: impl FnMut(f64, &[C64; N]),
) -> Result<()> {
    if x0 == x1 {
        observe(x1, &y0);
        return Ok(());
    }
    let dir = (x1 - x0).signum();
    let span = (x1 - x0).abs();
    let mut h = opts.initial_step.unwrap_or(span / 100.0).min(span) * dir;
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    for _step in 0..opts.max_steps {
        if (x - x1).abs() <= 1e-14 * span.max(1.0) {
            observe(x1, &y);
            return Ok(());
        }
        if (x + h - x1) * dir > 0.0 {
            h = x1 - x;
        }
        let k2 = f(x + C[1] * h, &axpy(&y, &A2, &[k1], h));
        let k3 = f(x + C[2] * h, &axpy(&y, &A3, &[k1, k2], h));
        let k4 = f(x + C[3] * h, &axpy(&y, &A4, &[k1, k2, k3], h));
        let k5 = f(x + C[4] * h, &axpy(&y, &A5, &[k1, k2, k3, k4], h));
        let k6 = f(x + C[5] * h, &axpy(&y, &A6, &[k1, k2, k3, k4, k5], h));
        let ks5 = [k1, k2, k3, k4, k5, k6];
        let y5 = axpy(&y, &B5[..6], &ks5, h);
        let k7 = f(x + h, &y5);
        let ks = [k1, k2, k3, k4, k5, k6, k7];
        let y4 = axpy(&y, &B4, &ks, h);
        // weighted error norm
        let mut err: f64 = 0.0;
        for i in 0..N {
            let scale = opts.atol + opts.rtol * y[i].norm().max(y5[i].norm());
            err = err.max((y5[i] - y4[i]).norm() / scale);
        }
        if err <= 1.0 {
            x += h;
            y = y5;
            k1 = k7; // first-same-as-last
            observe(x, &y);
            if (x - x1).abs() <= f64::EPSILON * span.max(1.0) {
                return Ok(());
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h.abs() < 1e-15 * span.max(x.abs()) {
            return Err(CoreError::OdeFailure {
                position: x,
                reason: "step size underflow".into(),
            });
        }
    }
    Err(CoreError::OdeFailure {
        position: x,
        reason: format!("step budget {} exhausted", opts.max_steps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_forward() {
        // y' = y, y(0)=1 -> e at x=1
        let opts = OdeOptions::default();
        let y = integrate(|_, y: &[C64; 1]| [y[0]], 0.0, 1.0, [C64::new(1.0, 0.0)], &opts).unwrap();
        assert!((y[0].re - 1f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn rotation_backward() {
        // y'' = -y integrated backward from (sin 2, cos 2) at x=2 to x=0
        let opts = OdeOptions::default();
        let y = integrate(
            |_, y: &[C64; 2]| [y[1], -y[0]],
            2.0,
            0.0,
            [C64::new(2f64.sin(), 0.0), C64::new(2f64.cos(), 0.0)],
            &opts,
        )
        .unwrap();
        assert!(y[0].norm() < 1e-10);
        assert!((y[1].re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn complex_coefficient_accuracy() {
        // y' = i y over [0, 10]: |y| conserved, phase 10
        let opts = OdeOptions {
            rtol: 1e-12,
            ..OdeOptions::default()
        };
        let y = integrate(
            |_, y: &[C64; 1]| [C64::new(0.0, 1.0) * y[0]],
            0.0,
            10.0,
            [C64::new(1.0, 0.0)],
            &opts,
        )
        .unwrap();
        assert!((y[0].norm() - 1.0).abs() < 1e-10);
        assert!((y[0] - C64::new(0.0, 10.0).exp()).norm() < 1e-9);
    }

    #[test]
    fn checkpoints_monotone() {
        let opts = OdeOptions::default();
        let states = integrate_checkpoints(
            |_, y: &[C64; 1]| [y[0]],
            0.0,
            &[0.5, 1.0, 1.5],
            [C64::new(1.0, 0.0)],
            &opts,
        )
        .unwrap();
        for (s, x) in states.iter().zip([0.5f64, 1.0, 1.5]) {
            assert!((s[0].re - x.exp()).abs() < 1e-9);
        }
    }
}
