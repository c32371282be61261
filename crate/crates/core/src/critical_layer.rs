//! Local structure of neutral waves at the radius where the swirl matches
//! the wave speed.
//!
//! For a real phase speed `b` in the range of the angular velocity the
//! radial equation degenerates at `r_bar = Omega^{-1}(b)`.  This module
//! builds the local solution pair there (a Frobenius expansion around the
//! regularized equation), connects it to the global branches grown from the
//! axis and from infinity, and provides the two workhorse checks used by
//! the spectral arguments: comparison functions `(b - Omega)^d` with a
//! sign-definite defect outside the layer, and the convergence of solutions
//! computed with a small imaginary shift toward the shifted-branch limit.

use std::f64::consts::PI;

use crate::cheb::ChebSeries;
use crate::ode::{integrate_checkpoints, OdeOptions};
use crate::profiles::{ProfileKind, VortexProfile};
use crate::shooting::{miss_distance, Coefficients, ORIGIN_SEED_RADIUS};
use crate::taylor::Series;
use crate::{C64, CoreError, FourierSector, Result, SpectralParameter};

/// Nature of the two indicial exponents at the critical radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndicialCase {
    /// Distinct real exponents.
    RealDistinct,
    /// Complex-conjugate pair `1/2 +- i delta`.
    ComplexPair,
    /// Double exponent `1/2`; the companion solution carries a logarithm.
    Double,
}

/// Location and exponent data of the critical layer for a real wave speed.
#[derive(Debug, Clone)]
pub struct CriticalLayer {
    /// Wave speed defining the layer.
    pub b: f64,
    /// Radius where the swirl equals the wave speed.
    pub r_bar: f64,
    /// Slope of the angular velocity at `r_bar` (negative for the
    /// monotone profiles handled here).
    pub omega_slope: f64,
    /// Indicial constant `(k/m)^2 J(r_bar)`; the exponents solve
    /// `d(d-1) + mu = 0`.
    pub mu: f64,
    pub case: IndicialCase,
    pub d_plus: C64,
    pub d_minus: C64,
}

const DOUBLE_ROOT_TOL: f64 = 1e-9;

/// Locate the critical radius and classify the indicial exponents.
pub fn critical_layer(
    profile: &VortexProfile,
    sector: &FourierSector,
    b: f64,
) -> Result<CriticalLayer> {
    if sector.m == 0 {
        return Err(CoreError::InvalidArgument(
            "the critical-layer exponents need m != 0".into(),
        ));
    }
    if sector.k == 0.0 {
        return Err(CoreError::InvalidArgument(
            "the critical-layer exponents need k != 0".into(),
        ));
    }
    let r_bar = profile.omega_inverse(b)?;
    let omega_slope = profile.omega_prime(r_bar);
    let m2 = (sector.m * sector.m) as f64;
    let mu = sector.k * sector.k / m2 * profile.j_of(r_bar);
    let disc = 0.25 - mu;
    let (case, d_plus, d_minus) = if disc.abs() <= DOUBLE_ROOT_TOL {
        let half = C64::new(0.5, 0.0);
        (IndicialCase::Double, half, half)
    } else if disc > 0.0 {
        let s = disc.sqrt();
        (
            IndicialCase::RealDistinct,
            C64::new(0.5 + s, 0.0),
            C64::new(0.5 - s, 0.0),
        )
    } else {
        let s = (-disc).sqrt();
        (
            IndicialCase::ComplexPair,
            C64::new(0.5, s),
            C64::new(0.5, -s),
        )
    };
    Ok(CriticalLayer {
        b,
        r_bar,
        omega_slope,
        mu,
        case,
        d_plus,
        d_minus,
    })
}

/// Taylor data of the swirl and axial vorticity around `r_bar`.
fn base_series(profile: &VortexProfile, r_bar: f64, len: usize) -> Result<(Series, Series)> {
    match profile.kind {
        ProfileKind::ClosedFormKs => {
            // Omega = 1/(1+r^2), W = 2 Omega^2
            let one_plus_r2 = Series::affine(r_bar, 1.0, len)
                .mul(&Series::affine(r_bar, 1.0, len))
                .add(&Series::constant(1.0, len));
            let inv = one_plus_r2.recip();
            Ok((inv.clone(), inv.mul(&inv).scale(2.0)))
        }
        ProfileKind::ClosedFormLambOseen => {
            // Omega = (1 - e^{-r^2})/r^2, W = 2 e^{-r^2}
            let x = Series::affine(r_bar, 1.0, len).mul(&Series::affine(r_bar, 1.0, len));
            let e = x.scale(-1.0).exp();
            let omega = Series::constant(1.0, len).sub(&e).mul(&x.recip());
            Ok((omega, e.scale(2.0)))
        }
        ProfileKind::ReferenceW1 { m, k } => {
            let m2 = (m * m) as f64;
            let fk2 = 4.0 * k * k;
            let r2 = Series::affine(r_bar, 1.0, len).mul(&Series::affine(r_bar, 1.0, len));
            let den = Series::constant(m2, len).add(&r2.scale(fk2));
            let inv = den.recip();
            Ok((
                inv.scale(m2),
                inv.mul(&inv).scale(2.0 * m2 * m2),
            ))
        }
        ProfileKind::ClosedFormRankine => Err(CoreError::InvalidArgument(
            "the critical-layer expansion needs a continuously differentiable swirl".into(),
        )),
        ProfileKind::FromQ => {
            // sampled reconstruction: extract local Taylor data from a
            // Chebyshev fit on a window around the critical radius
            // degree 32 keeps truncation negligible for these smooth windows
            // while amplifying derivative-extraction noise far less than a
            // higher-degree fit would
            let half = if r_bar > 0.3 { 0.25 } else { 0.4 * r_bar };
            let omega_fit = ChebSeries::fit(|x| profile.omega(x), r_bar - half, r_bar + half, 32);
            let w_fit = ChebSeries::fit(|x| profile.w(x), r_bar - half, r_bar + half, 32);
            Ok((
                Series {
                    c: omega_fit.taylor_at_center(len - 1),
                },
                Series {
                    c: w_fit.taylor_at_center(len - 1),
                },
            ))
        }
    }
}

/// Frobenius data of the regularized radial equation
/// `z^2 w'' + z P(z) w' + Q(z) w = 0` at the critical radius, `z = r - r_bar`.
#[derive(Debug, Clone)]
pub struct FrobeniusExpansion {
    pub layer: CriticalLayer,
    /// Taylor coefficients of `P`; `p[0] = 0`.
    pub p: Vec<f64>,
    /// Taylor coefficients of `Q`; `q[0]` is the indicial constant.
    pub q: Vec<f64>,
    /// Series coefficients for the exponent `d_plus`, `c[0] = 1`.
    pub c_plus: Vec<C64>,
    /// Series coefficients for `d_minus` (equal to `c_plus` in the double
    /// case, where the companion solution lives in `c_log`).
    pub c_minus: Vec<C64>,
    /// Derivative-in-exponent coefficients accompanying the logarithmic
    /// companion solution in the double case; empty otherwise.
    pub c_log: Vec<C64>,
    /// Largest offset at which the truncated series is trusted.
    pub radius: f64,
}

fn indicial_poly(p0: f64, q0: f64, x: C64) -> C64 {
    x * (x - 1.0) + x * p0 + q0
}

fn frobenius_coeffs(p: &[f64], q: &[f64], d: C64, n: usize) -> Vec<C64> {
    let mut c = vec![C64::new(1.0, 0.0)];
    for kk in 1..=n {
        let mut s = C64::new(0.0, 0.0);
        for (j, cj) in c.iter().enumerate() {
            s += cj * ((d + j as f64) * p[kk - j] + q[kk - j]);
        }
        c.push(-s / indicial_poly(p[0], q[0], d + kk as f64));
    }
    c
}

/// Series coefficients together with their derivative in the exponent,
/// which builds the logarithmic companion at a double indicial root.
fn frobenius_coeffs_with_derivative(
    p: &[f64],
    q: &[f64],
    d: C64,
    n: usize,
) -> (Vec<C64>, Vec<C64>) {
    let mut c = vec![C64::new(1.0, 0.0)];
    let mut e = vec![C64::new(0.0, 0.0)];
    for kk in 1..=n {
        let mut s = C64::new(0.0, 0.0);
        let mut ds = C64::new(0.0, 0.0);
        for j in 0..kk {
            let w = (d + j as f64) * p[kk - j] + q[kk - j];
            s += c[j] * w;
            ds += e[j] * w + c[j] * p[kk - j];
        }
        let fk = indicial_poly(p[0], q[0], d + kk as f64);
        let dfk = 2.0 * (d + kk as f64) - 1.0 + p[0];
        c.push(-s / fk);
        e.push(-ds / fk + s * dfk / (fk * fk));
    }
    (c, e)
}

fn usable_radius(r_bar: f64, families: &[&[C64]]) -> f64 {
    let mut rho = 0.5 * r_bar;
    'shrink: for _ in 0..400 {
        for c in families {
            let n = c.len() - 1;
            if c[n].norm() * rho.powi(n as i32) > 0.5 {
                rho *= 0.85;
                continue 'shrink;
            }
        }
        break;
    }
    rho
}

/// Build the local expansion to `n_terms` series coefficients per solution.
pub fn frobenius_expansion(
    profile: &VortexProfile,
    sector: &FourierSector,
    b: f64,
    n_terms: usize,
) -> Result<FrobeniusExpansion> {
    let layer = critical_layer(profile, sector, b)?;
    let len = n_terms + 4;
    let (omega_s, w_s) = base_series(profile, layer.r_bar, len)?;
    if (omega_s.c[0] - b).abs() > 1e-8 * b.abs().max(1.0) {
        return Err(CoreError::RootFinding {
            lo: layer.r_bar,
            hi: layer.r_bar,
            reason: "local swirl data disagrees with the critical radius".into(),
        });
    }
    let m2 = (sector.m * sector.m) as f64;
    let k2 = sector.k * sector.k;
    let r1 = Series::affine(layer.r_bar, 1.0, len);
    let r2 = r1.mul(&r1);
    let den = Series::constant(m2, len).add(&r2.scale(k2));
    let den_inv = den.recip();
    let a_s = r2.mul(&den_inv);
    let a_inv = a_s.recip();
    let ap_s = r1.mul(&den_inv).mul(&den_inv).scale(2.0 * m2);
    let phi_s = omega_s.mul(&w_s).scale(2.0);
    let d_s = w_s.mul(&den_inv).derivative();
    // gamma_star = Omega - b vanishes linearly; divide the factor out
    let mut g_num = omega_s.clone();
    g_num.c[0] = 0.0;
    let g = g_num.shift_down(0.0);
    let g_inv = g.recip();
    let p_series = ap_s.mul(&a_inv).add(&r1.recip()).shift_up();
    let regular = ap_s
        .mul(&a_inv)
        .mul(&r1.recip())
        .sub(&r2.recip())
        .sub(&a_inv);
    let q_series = regular
        .shift_up()
        .shift_up()
        .add(&phi_s.mul(&g_inv).mul(&g_inv).scale(k2 / m2))
        .sub(&r1.mul(&d_s).mul(&a_inv).mul(&g_inv).shift_up());
    let p: Vec<f64> = p_series.c[..=n_terms].to_vec();
    let q: Vec<f64> = q_series.c[..=n_terms].to_vec();
    let (c_plus, c_minus, c_log) = match layer.case {
        IndicialCase::Double => {
            let (c, e) = frobenius_coeffs_with_derivative(&p, &q, layer.d_plus, n_terms);
            (c.clone(), c, e)
        }
        _ => (
            frobenius_coeffs(&p, &q, layer.d_plus, n_terms),
            frobenius_coeffs(&p, &q, layer.d_minus, n_terms),
            Vec::new(),
        ),
    };
    let radius = usable_radius(layer.r_bar, &[&c_plus, &c_minus]);
    Ok(FrobeniusExpansion {
        layer,
        p,
        q,
        c_plus,
        c_minus,
        c_log,
        radius,
    })
}

/// `z^s` continued through the upper half plane: for `z < 0` the branch is
/// `|z|^s e^{i pi s}`, matching the limit of a spectral parameter
/// approaching the real axis from above.
pub fn branch_pow(z: f64, s: C64) -> C64 {
    if z > 0.0 {
        (s * z.ln()).exp()
    } else {
        (s * C64::new((-z).ln(), PI)).exp()
    }
}

/// `ln z` on the same branch as [`branch_pow`].
pub fn branch_log(z: f64) -> C64 {
    if z > 0.0 {
        C64::new(z.ln(), 0.0)
    } else {
        C64::new((-z).ln(), PI)
    }
}

fn raw_pair(c: &[C64], d: C64, z: f64) -> (C64, C64) {
    let mut v = C64::new(0.0, 0.0);
    let mut dv = C64::new(0.0, 0.0);
    for (i, ci) in c.iter().enumerate() {
        let e = d + i as f64;
        v += ci * branch_pow(z, e);
        dv += ci * e * branch_pow(z, e - 1.0);
    }
    (v, dv)
}

fn horner(c: &[f64], z: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * z + v)
}

impl FrobeniusExpansion {
    /// Value and slope of the `d_plus` solution, normalized so that it
    /// behaves as `(b - Omega)^{d_plus}` at the layer.
    pub fn phi_plus(&self, z: f64) -> (C64, C64) {
        let pref = (self.layer.d_plus * self.layer.omega_slope.abs().ln()).exp();
        let (v, dv) = raw_pair(&self.c_plus, self.layer.d_plus, z);
        (pref * v, pref * dv)
    }

    /// Value and slope of the second solution: the `d_minus` power in the
    /// generic cases, the logarithmic companion at a double root (again
    /// normalized through `b - Omega` rather than bare `z`).
    pub fn phi_minus(&self, z: f64) -> (C64, C64) {
        let slope = self.layer.omega_slope.abs();
        match self.layer.case {
            IndicialCase::Double => {
                let d = self.layer.d_plus;
                let (wp_v, wp_d) = raw_pair(&self.c_plus, d, z);
                let (we_v, we_d) = raw_pair(&self.c_log, d, z);
                let lg = branch_log(z);
                let sharp_v = lg * wp_v + we_v;
                let sharp_d = wp_v / z + lg * wp_d + we_d;
                let pref = slope.sqrt();
                (
                    pref * (sharp_v + slope.ln() * wp_v),
                    pref * (sharp_d + slope.ln() * wp_d),
                )
            }
            _ => {
                let pref = (self.layer.d_minus * slope.ln()).exp();
                let (v, dv) = raw_pair(&self.c_minus, self.layer.d_minus, z);
                (pref * v, pref * dv)
            }
        }
    }

    /// Back-substitution defect of the stored `d_plus` series at offset `z`.
    pub fn residual(&self, z: f64) -> f64 {
        series_residual(&self.p, &self.q, &self.c_plus, self.layer.d_plus, z)
    }
}

/// `|z^2 w'' + z P w' + Q w|` for the truncated Frobenius solution given by
/// `c` and exponent `d`, with `P`, `Q` evaluated from the given Taylor
/// slices.  Exact solutions make this vanish to truncation order.
pub fn series_residual(p: &[f64], q: &[f64], c: &[C64], d: C64, z: f64) -> f64 {
    let mut w = C64::new(0.0, 0.0);
    let mut wp = C64::new(0.0, 0.0);
    let mut wpp = C64::new(0.0, 0.0);
    for (i, ci) in c.iter().enumerate() {
        let e = d + i as f64;
        w += ci * branch_pow(z, e);
        wp += ci * e * branch_pow(z, e - 1.0);
        wpp += ci * e * (e - 1.0) * branch_pow(z, e - 2.0);
    }
    (z * z * wpp + z * horner(p, z) * wp + horner(q, z) * w).norm()
}

fn tight_opts() -> OdeOptions {
    OdeOptions {
        rtol: 1e-10,
        atol: 1e-290,
        ..OdeOptions::default()
    }
}

/// Coordinates of the global branches over the local solution pair.
#[derive(Debug, Clone)]
pub struct ConnectionCoefficients {
    pub layer: CriticalLayer,
    /// Regular-at-axis branch over `(phi_plus, phi_minus)` just inside the
    /// layer, normalized to value 1 at the solve offset.
    pub origin_plus: C64,
    pub origin_minus: C64,
    /// Decaying-at-infinity branch over the pair just outside the layer.
    pub infinity_plus: C64,
    pub infinity_minus: C64,
    /// Largest relative disagreement when the solve is repeated at 1.5x
    /// the offset; small values certify the expansion and the branches
    /// agree over a finite annulus, not just at one radius.
    pub consistency: f64,
}

/// Expand the two global branches over the local pair on their own sides
/// of the layer.  The solve offset is `0.05 r_bar`.
pub fn connection_coefficients(
    profile: &VortexProfile,
    sector: &FourierSector,
    b: f64,
    n_terms: usize,
) -> Result<ConnectionCoefficients> {
    let expansion = frobenius_expansion(profile, sector, b, n_terms)?;
    let r_bar = expansion.layer.r_bar;
    let delta1 = 0.05 * r_bar;
    let delta2 = 1.5 * delta1;
    if delta2 >= expansion.radius {
        return Err(CoreError::InvalidArgument(format!(
            "series radius {:.3e} cannot reach the solve offset {:.3e}",
            expansion.radius, delta2
        )));
    }
    let coeff = Coefficients::new(profile, sector)?;
    let param = SpectralParameter::from_ab(sector.m, 0.0, b);
    // inner leg from the axis
    let (u0, up0) = coeff.origin_seed(ORIGIN_SEED_RADIUS, &param);
    let inner_pts = [r_bar - delta2, r_bar - delta1];
    let inner = integrate_checkpoints(
        |r, y: &[C64; 2]| [y[1], coeff.u_second(r, y[0], y[1], &param)],
        ORIGIN_SEED_RADIUS,
        &inner_pts,
        [u0, up0],
        &tight_opts(),
    )?;
    let norm0 = inner[1][0];
    // outer leg inward, in the damped variable that stays order one
    let k = sector.k;
    let m2 = (sector.m * sector.m) as f64;
    let big_r = coeff.outer_radius();
    let a1 = (4.0 * m2 + 3.0) / (8.0 * k);
    let outer_pts = [r_bar + delta2, r_bar + delta1];
    let outer = integrate_checkpoints(
        |r, y: &[C64; 2]| {
            let a = coeff.a(r);
            let ap = coeff.a_prime(r);
            let dq = coeff.b_coeff(r, &param) / a + 0.75 / (r * r) - ap / (2.0 * r * a);
            [
                y[1],
                -(ap / a - 2.0 * k) * y[1] + (dq - k * k + k * ap / a) * y[0],
            ]
        },
        big_r,
        &outer_pts,
        [C64::new(1.0 + a1 / big_r, 0.0), C64::new(-a1 / (big_r * big_r), 0.0)],
        &tight_opts(),
    )?;
    let from_h = |idx: usize| {
        let rr = outer_pts[idx];
        let damp = (-k * (rr - (r_bar + delta1))).exp() / rr.sqrt();
        let h = outer[idx][0];
        let hp = outer[idx][1];
        (h * damp, (hp - h * (k + 0.5 / rr)) * damp)
    };
    let norm_inf = from_h(1).0;
    let solve = |z: f64, psi: C64, psip: C64| {
        let (fp, fpd) = expansion.phi_plus(z);
        let (fm, fmd) = expansion.phi_minus(z);
        let det = fp * fmd - fm * fpd;
        ((psi * fmd - fm * psip) / det, (fp * psip - psi * fpd) / det)
    };
    let (o1p, o1m) = solve(-delta1, inner[1][0] / norm0, inner[1][1] / norm0);
    let (o2p, o2m) = solve(-delta2, inner[0][0] / norm0, inner[0][1] / norm0);
    let (ui1, upi1) = from_h(1);
    let (ui2, upi2) = from_h(0);
    let (i1p, i1m) = solve(delta1, ui1 / norm_inf, upi1 / norm_inf);
    let (i2p, i2m) = solve(delta2, ui2 / norm_inf, upi2 / norm_inf);
    let rel = |x2: C64, x1: C64| (x2 - x1).norm() / x1.norm().max(1e-30);
    let consistency = rel(o2p, o1p)
        .max(rel(o2m, o1m))
        .max(rel(i2p, i1p))
        .max(rel(i2m, i1m));
    Ok(ConnectionCoefficients {
        layer: expansion.layer,
        origin_plus: o1p,
        origin_minus: o1m,
        infinity_plus: i1p,
        infinity_minus: i1m,
        consistency,
    })
}

/// Regular branch pushed across the layer with a small imaginary shift of
/// the wave speed, for a decreasing sequence of shifts.
#[derive(Debug, Clone)]
pub struct CrossingSequence {
    pub a_values: Vec<f64>,
    /// Value at `r_bar + offset`, normalized by the value at
    /// `r_bar - offset`.
    pub values: Vec<C64>,
    /// Slope at `r_bar + offset` on the same normalization.
    pub slopes: Vec<C64>,
    /// C1 distances between consecutive members.
    pub gaps: Vec<f64>,
}

/// Integrate the regular branch through the layer at shifts `10^{-j}` for
/// the given exponents and record the convergence of the crossing data.
pub fn approximate_crossing(
    profile: &VortexProfile,
    sector: &FourierSector,
    b: f64,
    offset: f64,
    exponents: &[u32],
) -> Result<CrossingSequence> {
    let r_bar = profile.omega_inverse(b)?;
    if r_bar - offset <= ORIGIN_SEED_RADIUS {
        return Err(CoreError::InvalidArgument(
            "crossing offset reaches below the axis seed".into(),
        ));
    }
    let coeff = Coefficients::new(profile, sector)?;
    let pts = [r_bar - offset, r_bar + offset];
    let mut a_values = Vec::with_capacity(exponents.len());
    let mut values = Vec::with_capacity(exponents.len());
    let mut slopes = Vec::with_capacity(exponents.len());
    for &j in exponents {
        let a = 10f64.powi(-(j as i32));
        let param = SpectralParameter::from_ab(sector.m, a, b);
        let (u0, up0) = coeff.origin_seed(ORIGIN_SEED_RADIUS, &param);
        let states = integrate_checkpoints(
            |r, y: &[C64; 2]| [y[1], coeff.u_second(r, y[0], y[1], &param)],
            ORIGIN_SEED_RADIUS,
            &pts,
            [u0, up0],
            &tight_opts(),
        )?;
        let base = states[0][0];
        a_values.push(a);
        values.push(states[1][0] / base);
        slopes.push(states[1][1] / base);
    }
    let gaps = (1..values.len())
        .map(|i| (values[i] - values[i - 1]).norm() + (slopes[i] - slopes[i - 1]).norm())
        .collect();
    Ok(CrossingSequence {
        a_values,
        values,
        slopes,
        gaps,
    })
}

/// Defect of the comparison function `(b - Omega)^d` outside the layer:
/// applying the radial operator to it gives `(b - Omega)^{d-2}` times this
/// quantity, so a positive defect certifies a strict upper solution.
pub fn upper_solution_defect(
    profile: &VortexProfile,
    sector: &FourierSector,
    layer: &CriticalLayer,
    d: C64,
    r: f64,
) -> Result<C64> {
    if r <= layer.r_bar {
        return Err(CoreError::InvalidArgument(
            "comparison functions live outside the critical radius".into(),
        ));
    }
    let coeff = Coefficients::new(profile, sector)?;
    let m2 = (sector.m * sector.m) as f64;
    let k2 = sector.k * sector.k;
    let a = coeff.a(r);
    let ap = coeff.a_prime(r);
    let den = m2 + k2 * r * r;
    let omp = profile.omega_prime(r);
    let y = layer.b - profile.omega(r);
    let t1 = a * omp * omp * (k2 / m2) * (profile.j_of(layer.r_bar) - profile.j_of(r));
    let t2 = (1.0 - (m2 - k2 * r * r) / (den * den)) * y * y;
    let t3 = a
        * y
        * (d * profile.omega_second(r) + d * (ap / a + 1.0 / r) * omp
            - (r / a) * coeff.w_weight_derivative(r));
    Ok(t1 + t2 + t3)
}

/// Minimum mismatch magnitude along a horizontal segment at height `a`
/// above the real axis, sampled at `n` evenly spaced wave speeds.
/// Returns the minimum and the wave speed attaining it.
pub fn neutral_segment_min_miss(
    profile: &VortexProfile,
    sector: &FourierSector,
    a: f64,
    b_lo: f64,
    b_hi: f64,
    n: usize,
) -> Result<(f64, f64)> {
    if n < 2 || !(b_hi > b_lo) {
        return Err(CoreError::InvalidArgument(
            "segment scan needs at least two ordered samples".into(),
        ));
    }
    let mut best = f64::INFINITY;
    let mut best_b = b_lo;
    for i in 0..n {
        let b = b_lo + (b_hi - b_lo) * i as f64 / (n - 1) as f64;
        let param = SpectralParameter::from_ab(sector.m, a, b);
        let miss = miss_distance(profile, sector, &param)?.norm();
        if miss < best {
            best = miss;
            best_b = b;
        }
    }
    Ok((best, best_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::FourierSector;

    fn sector(m: i32, k: f64) -> FourierSector {
        FourierSector::new(m, k)
    }

    #[test]
    fn locates_exponents_and_classifies_cases() {
        let ks = VortexProfile::ks();
        let layer = critical_layer(&ks, &sector(2, 1.0), 0.5).unwrap();
        assert!((layer.r_bar - 1.0).abs() < 1e-10);
        assert!((layer.mu - 0.5).abs() < 1e-12);
        assert_eq!(layer.case, IndicialCase::ComplexPair);
        assert!((layer.d_plus - C64::new(0.5, 0.5)).norm() < 1e-12);
        // Vieta: roots of d^2 - d + mu
        let sum = layer.d_plus + layer.d_minus;
        let prod = layer.d_plus * layer.d_minus;
        assert!((sum - 1.0).norm() < 1e-14);
        assert!((prod - layer.mu).norm() < 1e-14);

        let lo = VortexProfile::lamb_oseen();
        let layer = critical_layer(&lo, &sector(2, 1.0), 0.2).unwrap();
        assert!((layer.r_bar - 2.2282536282354117).abs() < 1e-10);
        assert!((layer.mu - 0.0464900598350600).abs() < 1e-12);
        assert_eq!(layer.case, IndicialCase::RealDistinct);
        assert!((layer.d_plus.re - 0.9511207600686761).abs() < 1e-12);
        assert!((layer.d_minus.re - 0.0488792399313239).abs() < 1e-12);

        // m = 3, k = 1, b = 5/9 puts the quotient exactly at the double root
        let layer = critical_layer(&ks, &sector(3, 1.0), 5.0 / 9.0).unwrap();
        assert_eq!(layer.case, IndicialCase::Double);
        assert!((layer.mu - 0.25).abs() < 1e-9);
    }

    #[test]
    fn taylor_data_matches_rational_reference() {
        let ks = VortexProfile::ks();
        let e = frobenius_expansion(&ks, &sector(2, 1.0), 0.5, 12).unwrap();
        let p_ref = [
            0.0,
            13.0 / 5.0,
            -81.0 / 25.0,
            397.0 / 125.0,
            -1889.0 / 625.0,
            9293.0 / 3125.0,
            -46641.0 / 15625.0,
        ];
        let q_ref = [
            0.5,
            -17.0 / 5.0,
            497.0 / 200.0,
            -1939.0 / 1000.0,
            -57553.0 / 20000.0,
            241909.0 / 25000.0,
            -32261903.0 / 2000000.0,
        ];
        for (j, &want) in p_ref.iter().enumerate() {
            assert!(
                (e.p[j] - want).abs() <= 1e-12 * want.abs().max(1.0),
                "p[{j}] = {} vs {want}",
                e.p[j]
            );
        }
        for (j, &want) in q_ref.iter().enumerate() {
            assert!(
                (e.q[j] - want).abs() <= 1e-12 * want.abs().max(1.0),
                "q[{j}] = {} vs {want}",
                e.q[j]
            );
        }
    }

    #[test]
    fn taylor_data_matches_gaussian_reference() {
        let lo = VortexProfile::lamb_oseen();
        let e = frobenius_expansion(&lo, &sector(2, 1.0), 0.2, 12).unwrap();
        let p_ref = [
            0.0,
            0.8492515305805024,
            -0.5801999057027787,
            0.31467060966452927,
            -0.14599934160051087,
            0.061843001905306424,
            -0.025392006069281149,
        ];
        let q_ref = [
            0.046490059835060032,
            -0.37140941887380215,
            -0.77529379315849445,
            -0.88634308495274658,
            0.85909298536135901,
            -0.24155183983417977,
            -0.22270918810641621,
        ];
        for (j, &want) in p_ref.iter().enumerate() {
            assert!(
                (e.p[j] - want).abs() <= 1e-9 * want.abs().max(1.0),
                "p[{j}] = {} vs {want}",
                e.p[j]
            );
        }
        for (j, &want) in q_ref.iter().enumerate() {
            assert!(
                (e.q[j] - want).abs() <= 1e-9 * want.abs().max(1.0),
                "q[{j}] = {} vs {want}",
                e.q[j]
            );
        }
    }

    #[test]
    fn series_coefficients_match_reference() {
        let ks = VortexProfile::ks();
        let e = frobenius_expansion(&ks, &sector(2, 1.0), 0.5, 12).unwrap();
        let c_ref = [
            C64::new(1.0, 0.0),
            C64::new(0.4, -1.7),
            C64::new(-0.46, 0.7175),
            C64::new(0.42125, -0.87416666666666667),
            C64::new(-0.19848498774509804, 0.88694546568627451),
        ];
        for (j, &want) in c_ref.iter().enumerate() {
            assert!(
                (e.c_plus[j] - want).norm() <= 1e-12 * want.norm().max(1.0),
                "c[{j}] = {} vs {want}",
                e.c_plus[j]
            );
        }
        // the d_minus family is the conjugate for real Taylor data
        for (cp, cm) in e.c_plus.iter().zip(e.c_minus.iter()) {
            assert!((cp.conj() - cm).norm() < 1e-12 * cp.norm().max(1.0));
        }
    }

    #[test]
    fn truncated_residual_matches_reference() {
        let ks = VortexProfile::ks();
        let e = frobenius_expansion(&ks, &sector(2, 1.0), 0.5, 12).unwrap();
        let res = series_residual(&e.p[..8], &e.q[..8], &e.c_plus[..5], e.layer.d_plus, 0.05);
        assert!(
            (res - 2.0623772e-6).abs() < 1e-5 * 2.0623772e-6 + 1e-13,
            "residual {res}"
        );
    }

    #[test]
    fn residual_small_on_both_sides_with_full_order() {
        let ks = VortexProfile::ks();
        let e = frobenius_expansion(&ks, &sector(2, 1.0), 0.5, 12).unwrap();
        assert!(e.radius > 0.1, "radius {}", e.radius);
        for &z in &[0.05, 0.1, -0.05, -0.1] {
            let res = e.residual(z);
            assert!(res < 1e-8, "residual {res} at z = {z}");
        }
    }

    #[test]
    fn log_companion_matches_difference_quotient() {
        let ks = VortexProfile::ks();
        let e = frobenius_expansion(&ks, &sector(3, 1.0), 5.0 / 9.0, 12).unwrap();
        assert_eq!(e.layer.case, IndicialCase::Double);
        // exponent-derivative route against a central difference in d
        let h = 1e-5;
        let plus = frobenius_coeffs(&e.p, &e.q, C64::new(0.5 + h, 0.0), 8);
        let minus = frobenius_coeffs(&e.p, &e.q, C64::new(0.5 - h, 0.0), 8);
        for j in 1..=8 {
            let fd = (plus[j] - minus[j]) / (2.0 * h);
            assert!(
                (fd - e.c_log[j]).norm() <= 1e-4 * e.c_log[j].norm().max(1.0),
                "e[{j}] = {} vs fd {fd}",
                e.c_log[j]
            );
        }
        // the companion really solves the equation: finite-difference the
        // second derivative and back-substitute
        for &z in &[0.05, -0.05] {
            let fd_h = 1e-4;
            let (v, dv) = e.phi_minus(z);
            let (vp, _) = e.phi_minus(z + fd_h);
            let (vm, _) = e.phi_minus(z - fd_h);
            let wpp = (vp - 2.0 * v + vm) / (fd_h * fd_h);
            let res = z * z * wpp + z * horner(&e.p, z) * dv + horner(&e.q, z) * v;
            assert!(res.norm() < 1e-3, "log-solution residual {} at {z}", res.norm());
            let slope_fd = (vp - vm) / (2.0 * fd_h);
            assert!((slope_fd - dv).norm() < 1e-3 * dv.norm().max(1.0));
        }
    }

    #[test]
    fn connection_matches_reference_for_real_exponents() {
        let lo = VortexProfile::lamb_oseen();
        let conn = connection_coefficients(&lo, &sector(2, 1.0), 0.2, 12).unwrap();
        let refs = [
            (conn.origin_plus, C64::new(-18.252684777902659, -2.8250983417395922)),
            (conn.origin_minus, C64::new(1.0776923606571293, -0.16680214105728525)),
            (conn.infinity_plus, C64::new(-35.213045482277588, 0.0)),
            (conn.infinity_minus, C64::new(1.5966353966005996, 0.0)),
        ];
        for (got, want) in refs {
            assert!(
                (got - want).norm() <= 1e-6 * want.norm(),
                "{got} vs {want}"
            );
        }
        // real exponents on the outward side keep the coefficients real,
        // and both enter (no accidental pure-power matching)
        assert!(conn.infinity_plus.im.abs() <= 1e-8 * conn.infinity_plus.norm());
        assert!(conn.infinity_minus.im.abs() <= 1e-8 * conn.infinity_minus.norm());
        assert!((conn.infinity_plus * conn.infinity_minus).norm() > 1.0);
        assert!(conn.consistency < 1e-6, "consistency {}", conn.consistency);
    }

    #[test]
    fn connection_matches_reference_for_complex_exponents() {
        let ks = VortexProfile::ks();
        let conn = connection_coefficients(&ks, &sector(2, 1.0), 0.5, 12).unwrap();
        let refs = [
            (conn.origin_plus, C64::new(25.930943302079447, -54.379250184110845)),
            (conn.origin_minus, C64::new(-1.1205776643585737, -2.3499404727013881)),
            (conn.infinity_plus, C64::new(-4.5365060436316611, 1.6163971534787955)),
            (conn.infinity_minus, C64::new(-4.5365060436316611, -1.6163971534787955)),
        ];
        for (got, want) in refs {
            assert!(
                (got - want).norm() <= 1e-6 * want.norm(),
                "{got} vs {want}"
            );
        }
        // conjugate exponents against a real branch give conjugate weights
        assert!(
            (conn.infinity_plus.conj() - conn.infinity_minus).norm()
                <= 1e-8 * conn.infinity_plus.norm()
        );
        assert!(conn.consistency < 1e-6, "consistency {}", conn.consistency);
    }

    #[test]
    fn small_shift_crossing_converges() {
        let ks = VortexProfile::ks();
        let seq = approximate_crossing(&ks, &sector(2, 1.0), 0.5, 0.3, &[3, 4, 5, 6]).unwrap();
        assert!(
            (seq.values[3] - C64::new(-2.10643918, -1.79818418)).norm() < 1e-5,
            "value {}",
            seq.values[3]
        );
        assert!(
            (seq.slopes[3] - C64::new(-3.85691569, -5.57700347)).norm() < 1e-5,
            "slope {}",
            seq.slopes[3]
        );
        for i in 1..seq.gaps.len() {
            assert!(seq.gaps[i] < seq.gaps[i - 1], "gaps {:?}", seq.gaps);
            let ratio = seq.gaps[i] / seq.gaps[i - 1];
            assert!(
                ratio > 0.05 && ratio < 0.2,
                "gap ratio {ratio} outside the linear-shift decay band"
            );
        }
    }

    #[test]
    fn comparison_defect_positive_outside_crossing() {
        let lo = VortexProfile::lamb_oseen();
        let sec = sector(2, 1.0);
        let layer = critical_layer(&lo, &sec, 0.2).unwrap();
        for d in [layer.d_plus, layer.d_minus] {
            for i in 0..40 {
                let r = layer.r_bar + 0.02 + 5.0 * i as f64 / 39.0;
                let t = upper_solution_defect(&lo, &sec, &layer, d, r).unwrap();
                assert!(t.re > 0.0, "defect {t} at r = {r}");
                assert!(t.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn neutral_segment_bounded_away_from_zero() {
        let sec = sector(2, 1.0);
        let (lo_min, _) =
            neutral_segment_min_miss(&VortexProfile::lamb_oseen(), &sec, 1e-4, 0.05, 0.95, 10)
                .unwrap();
        assert!(lo_min > 0.25, "min miss {lo_min}");
        let (ks_min, _) =
            neutral_segment_min_miss(&VortexProfile::ks(), &sec, 1e-4, 0.05, 0.95, 10).unwrap();
        assert!(ks_min > 0.25, "min miss {ks_min}");
    }

    #[test]
    fn reconstructed_profile_matches_closed_form_locally() {
        let ks = VortexProfile::ks();
        let q = ks.q_function().unwrap();
        let rebuilt = VortexProfile::from_q(q, ks.grid.clone()).unwrap();
        let e_closed = frobenius_expansion(&ks, &sector(2, 1.0), 0.5, 12).unwrap();
        let e_rebuilt = frobenius_expansion(&rebuilt, &sector(2, 1.0), 0.5, 12).unwrap();
        for j in 0..=5 {
            assert!(
                (e_closed.p[j] - e_rebuilt.p[j]).abs() < 2e-4 * e_closed.p[j].abs().max(1.0),
                "p[{j}]: {} vs {}",
                e_closed.p[j],
                e_rebuilt.p[j]
            );
            assert!(
                (e_closed.q[j] - e_rebuilt.q[j]).abs() < 2e-4 * e_closed.q[j].abs().max(1.0),
                "q[{j}]: {} vs {}",
                e_closed.q[j],
                e_rebuilt.q[j]
            );
        }
        for &z in &[-0.05, 0.05] {
            let (a, _) = e_closed.phi_plus(z);
            let (b, _) = e_rebuilt.phi_plus(z);
            assert!((a - b).norm() < 1e-4 * a.norm(), "phi at {z}: {a} vs {b}");
        }
    }
}
