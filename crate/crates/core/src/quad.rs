//! Adaptive Gauss-Kronrod quadrature.
//!
//! A 7-point Gauss / 15-point Kronrod pair drives a global-error bisection
//! strategy: the interval with the largest error estimate is split until the
//! summed estimate drops below the requested absolute tolerance.

use crate::{CoreError, Result, C64};

/// Kronrod abscissae (positive half, including 0), 15-point rule.
const XK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];

/// Kronrod weights matching `XK`.
const WK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Gauss weights for the embedded 7-point rule (abscissae XK[1], XK[3], XK[5], XK[7]).
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// Values that can be accumulated by the quadrature rules.
pub trait QuadValue: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, factor: f64) -> Self;
    fn sub(self, other: Self) -> Self;
    fn norm(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, factor: f64) -> Self {
        self * factor
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, factor: f64) -> Self {
        self * factor
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn norm(self) -> f64 {
        num_complex::Complex::norm(self)
    }
}

/// One Gauss-Kronrod 15(7) evaluation on [a, b]: returns (K15 value, error estimate).
fn gk15<T: QuadValue>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kronrod = T::zero();
    let mut gauss = T::zero();
    for i in 0..8 {
        let x = half * XK[i];
        let v = if i == 7 {
            f(mid)
        } else {
            f(mid - x).add(f(mid + x))
        };
        kronrod = kronrod.add(v.scale(WK[i]));
        if i % 2 == 1 {
            gauss = gauss.add(v.scale(WG[i / 2]));
        }
    }
    let k = kronrod.scale(half);
    let g = gauss.scale(half);
    let diff = k.sub(g).norm();
    // QUADPACK-style sharpening of the raw difference
    let err = (200.0 * diff).powf(1.5).min(diff.max(1e-300));
    (k, err.max(diff * 1e-6))
}

/// Adaptive integration of `f` over [a, b] to absolute tolerance `abs_tol`.
///
/// Returns the value and the final error estimate. Fails if `max_subdiv`
/// interval splits do not reach the tolerance.
pub fn adaptive<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_subdiv: usize,
) -> Result<(T, f64)> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(CoreError::InvalidArgument(
            "quadrature endpoints must be finite".into(),
        ));
    }
    if a == b {
        return Ok((T::zero(), 0.0));
    }
    struct Piece<T> {
        a: f64,
        b: f64,
        value: T,
        err: f64,
    }
    let (v0, e0) = gk15(&mut f, a, b);
    let mut pieces = vec![Piece {
        a,
        b,
        value: v0,
        err: e0,
    }];
    let mut total_err = e0;
    for _split in 0..max_subdiv {
        if total_err <= abs_tol {
            break;
        }
        // split the worst piece
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("nonempty piece list");
        let Piece { a: pa, b: pb, err: old_err, .. } = pieces[worst];
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // interval at floating-point resolution; accept its estimate
            break;
        }
        let (vl, el) = gk15(&mut f, pa, mid);
        let (vr, er) = gk15(&mut f, mid, pb);
        pieces[worst] = Piece {
            a: pa,
            b: mid,
            value: vl,
            err: el,
        };
        pieces.push(Piece {
            a: mid,
            b: pb,
            value: vr,
            err: er,
        });
        total_err += el + er - old_err;
    }
    let value = pieces
        .iter()
        .fold(T::zero(), |acc, p| acc.add(p.value));
    if total_err > abs_tol * 10.0 && total_err > 1e-9 {
        return Err(CoreError::QuadratureFailure {
            error: total_err,
            subdivisions: pieces.len(),
        });
    }
    Ok((value, total_err))
}

/// Adaptive integration over a list of breakpoints, summing piecewise results.
pub fn adaptive_split<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    points: &[f64],
    abs_tol: f64,
    max_subdiv: usize,
) -> Result<(T, f64)> {
    if points.len() < 2 {
        return Err(CoreError::InvalidArgument(
            "need at least two breakpoints".into(),
        ));
    }
    let per_tol = abs_tol / (points.len() - 1) as f64;
    let mut value = T::zero();
    let mut err = 0.0;
    for w in points.windows(2) {
        let (v, e) = adaptive(&mut f, w[0], w[1], per_tol, max_subdiv)?;
        value = value.add(v);
        err += e;
    }
    Ok((value, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        // K15 integrates degree <= 22 exactly; x^7 over [0,2] = 32
        let (v, _) = adaptive(|x: f64| x.powi(7), 0.0, 2.0, 1e-12, 100).unwrap();
        assert!((v - 32.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_transcendental() {
        // int_0^1 e^x dx = e - 1
        let (v, _) = adaptive(f64::exp, 0.0, 1.0, 1e-13, 200).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        // int_0^1 x^{-1/2} dx = 2
        let (v, _) = adaptive(|x: f64| x.sqrt().recip(), 1e-300, 1.0, 1e-10, 4000).unwrap();
        assert!((v - 2.0).abs() < 1e-8, "got {v}");
    }

    #[test]
    fn complex_oscillatory() {
        // int_0^pi e^{i x} dx = 2i
        let (v, _) = adaptive(
            |x: f64| C64::new(0.0, x).exp(),
            0.0,
            std::f64::consts::PI,
            1e-12,
            200,
        )
        .unwrap();
        assert!((v - C64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn split_points_cover_peak() {
        // sharply peaked Lorentzian: int -1..1 of eps/(eps^2+x^2) dx -> ~pi
        let eps = 1e-6;
        let (v, _) = adaptive_split(
            |x: f64| eps / (eps * eps + x * x),
            &[-1.0, -1e-3, 0.0, 1e-3, 1.0],
            1e-10,
            4000,
        )
        .unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((v - exact).abs() < 1e-8);
    }
}
