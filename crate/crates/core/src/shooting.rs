//! Radial shooting for the eigenvalue problem of a columnar vortex at a
//! fixed azimuthal/axial wavenumber pair.
//!
//! The disturbance equation is written in self-adjoint form
//! `-d_r(A d*_r u) + B u = 0`, `d*_r = d_r + 1/r`, with
//! `A = r^2/(m^2 + k^2 r^2)` and
//! `B = 1 - (k^2/m^2) A Phi/gs^2 + (r/gs) d_r(W/(m^2 + k^2 r^2))`,
//! where `gs(r) = Omega(r) - b - i a` and the spectral parameter is
//! `s = m (a - i b)`.
//!
//! One solution is grown from the regular behavior `u ~ r^{m-1}` at the
//! axis, the other from the decaying behavior `u ~ e^{-k r}/sqrt(r)` at
//! infinity; their Wronskian mismatch at a matching radius vanishes exactly
//! at eigenvalues. Both seeds are analytic in the spectral parameter and
//! both integrations run in their stable directions, so the mismatch is an
//! analytic function whose zeros can also be counted by winding.

use serde::Serialize;

use crate::contour::{rect_corners, winding_number, WindingOptions};
use crate::ode::{integrate_checkpoints, OdeOptions};
use crate::profiles::VortexProfile;
use crate::{CoreError, FourierSector, Result, SpectralParameter, C64};

/// Which end a shooting branch was grown from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    FromOrigin,
    FromInfinity,
}

/// One shooting branch sampled at checkpoints, normalized to 1 at the
/// matching radius (last checkpoint for the origin branch, first for the
/// infinity branch).
#[derive(Debug, Clone)]
pub struct ShootingSolution {
    pub branch: Branch,
    pub r: Vec<f64>,
    pub u: Vec<C64>,
    pub u_prime: Vec<C64>,
    /// Raw (pre-normalization) value at the matching radius; dividing the
    /// seed by this scale continues the branch outside its sample range.
    pub match_scale: C64,
}

/// A neutral mode located on the real frequency axis.
#[derive(Debug, Clone, Copy)]
pub struct KelvinMode {
    /// Angular phase speed; the eigenvalue is `s = -i m b`.
    pub b: f64,
    pub s: C64,
    /// Mismatch modulus after the final polish.
    pub miss_abs: f64,
}

/// Result of a rectangle scan for eigenvalues off the real axis.
#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub m: i32,
    pub k: f64,
    /// `[b_lo, b_hi, a_lo, a_hi]`.
    pub rect: [f64; 4],
    pub winding: i64,
    pub roots: Vec<UnstableRoot>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct UnstableRoot {
    pub a: f64,
    pub b: f64,
    /// Set when two candidates were closer than the merge radius.
    pub near_degenerate: bool,
    pub residual: f64,
    pub s_im: f64,
    pub s_re: f64,
}

pub const ORIGIN_SEED_RADIUS: f64 = 1e-3;

fn ode_opts() -> OdeOptions {
    OdeOptions {
        rtol: 1e-10,
        atol: 1e-290,
        ..OdeOptions::default()
    }
}

/// Tighter tolerance used to certify polished roots: the mismatch noise
/// floor is roughly the integrator tolerance times the solution scale.
fn tight_opts() -> OdeOptions {
    OdeOptions {
        rtol: 1e-13,
        atol: 1e-290,
        ..OdeOptions::default()
    }
}

/// Coefficient functions of the radial equation for one wavenumber pair.
pub struct Coefficients<'a> {
    pub profile: &'a VortexProfile,
    pub m: i32,
    pub k: f64,
    m2: f64,
    k2: f64,
}

impl<'a> Coefficients<'a> {
    pub fn new(profile: &'a VortexProfile, sector: &FourierSector) -> Result<Self> {
        if sector.m < 1 {
            return Err(CoreError::InvalidArgument(
                "shooting normalizes to m >= 1; use the reflection symmetries for other sectors"
                    .into(),
            ));
        }
        if !(sector.k > 0.0) {
            return Err(CoreError::InvalidArgument(
                "shooting requires k > 0".into(),
            ));
        }
        Ok(Coefficients {
            profile,
            m: sector.m,
            k: sector.k,
            m2: (sector.m * sector.m) as f64,
            k2: sector.k * sector.k,
        })
    }

    pub fn a(&self, r: f64) -> f64 {
        r * r / (self.m2 + self.k2 * r * r)
    }

    pub fn a_prime(&self, r: f64) -> f64 {
        let d = self.m2 + self.k2 * r * r;
        2.0 * self.m2 * r / (d * d)
    }

    pub fn gamma_star(&self, r: f64, param: &SpectralParameter) -> C64 {
        C64::new(self.profile.omega(r) - param.b, -param.a)
    }

    /// `d_r( W / (m^2 + k^2 r^2) )`.
    pub fn w_weight_derivative(&self, r: f64) -> f64 {
        let d = self.m2 + self.k2 * r * r;
        self.profile.w_prime(r) / d - 2.0 * self.k2 * r * self.profile.w(r) / (d * d)
    }

    pub fn b_coeff(&self, r: f64, param: &SpectralParameter) -> C64 {
        let gs = self.gamma_star(r, param);
        let phi = self.profile.phi(r);
        C64::new(1.0, 0.0) - (self.k2 / self.m2) * self.a(r) * phi / (gs * gs)
            + r / gs * self.w_weight_derivative(r)
    }

    /// Right side of `u'' = f(u, u')` in the expanded self-adjoint form.
    pub fn u_second(&self, r: f64, u: C64, up: C64, param: &SpectralParameter) -> C64 {
        let a = self.a(r);
        let ap = self.a_prime(r);
        (self.b_coeff(r, param) * u - ap * (up + u / r) - a * (up / r - u / r / r)) / a
    }

    /// Curvature coefficient of the seed at the axis.
    fn origin_c1(&self, param: &SpectralParameter) -> C64 {
        let g0 = C64::new(1.0 - param.b, -param.a);
        let w0pp = self.profile.w_second_origin;
        let qc = -2.0 * self.k2 / self.m2 - self.k2 + 4.0 * self.k2 / (self.m2 * g0 * g0)
            - (w0pp - 4.0 * self.k2 / self.m2) / g0;
        let mf = self.m as f64;
        ((2.0 * self.k2 / self.m2) * (mf - 1.0) - qc) / (4.0 * (mf + 1.0))
    }

    /// Value and derivative of the regular seed at radius `r0`.
    pub fn origin_seed(&self, r0: f64, param: &SpectralParameter) -> (C64, C64) {
        let c1 = self.origin_c1(param);
        let mf = self.m as f64;
        let u = r0.powi(self.m - 1) * (1.0 + c1 * r0 * r0);
        let up = (mf - 1.0) * r0.powi(self.m - 2) * (1.0 + c1 * r0 * r0)
            + 2.0 * c1 * r0.powi(self.m);
        (u, up)
    }

    /// Start radius of the inward branch.
    pub fn outer_radius(&self) -> f64 {
        (12.0 / self.k).max(30.0)
    }

    /// Seed of the decaying branch in the substituted variable
    /// `h = sqrt(r) u e^{k(r - r_ref)}`, which tends to a constant.
    fn infinity_seed(&self) -> (f64, C64, C64) {
        let big_r = self.outer_radius();
        let a1 = (4.0 * self.m2 + 3.0) / (8.0 * self.k);
        (
            big_r,
            C64::new(1.0 + a1 / big_r, 0.0),
            C64::new(-a1 / (big_r * big_r), 0.0),
        )
    }

    fn infinity_rhs(&self, r: f64, y: &[C64; 2], param: &SpectralParameter) -> [C64; 2] {
        let a = self.a(r);
        let ap = self.a_prime(r);
        let k = self.k;
        let dq = self.b_coeff(r, param) / a + 0.75 / (r * r) - ap / (2.0 * r * a);
        [
            y[1],
            -(ap / a - 2.0 * k) * y[1] + (dq - k * k + k * ap / a) * y[0],
        ]
    }
}

/// Raw `(u, u')` of the regular branch at `r_target`, seed-normalized so
/// `r^{1-m} u -> 1` at the axis.
fn origin_state_at(
    coeff: &Coefficients,
    param: &SpectralParameter,
    r_target: f64,
    opts: &OdeOptions,
) -> Result<[C64; 2]> {
    let (u0, up0) = coeff.origin_seed(ORIGIN_SEED_RADIUS, param);
    crate::ode::integrate(
        |r, y: &[C64; 2]| [y[1], coeff.u_second(r, y[0], y[1], param)],
        ORIGIN_SEED_RADIUS,
        r_target,
        [u0, up0],
        opts,
    )
}

/// Raw `(u, u')` of the decaying branch at `r_target`, normalized so
/// `sqrt(r) e^{k(r - r_target)} u -> 1` at infinity (a fixed multiple of
/// the canonical normalization, constant in the spectral parameter).
fn infinity_state_at(
    coeff: &Coefficients,
    param: &SpectralParameter,
    r_target: f64,
    opts: &OdeOptions,
) -> Result<[C64; 2]> {
    let (big_r, h0, hp0) = coeff.infinity_seed();
    let state = crate::ode::integrate(
        |r, y: &[C64; 2]| coeff.infinity_rhs(r, y, param),
        big_r,
        r_target,
        [h0, hp0],
        opts,
    )?;
    let k = coeff.k;
    let damp = 1.0 / r_target.sqrt();
    Ok([
        state[0] * damp,
        (state[1] - state[0] * (k + 0.5 / r_target)) * damp,
    ])
}

/// Matching radius: where the angular velocity has fallen to 1/2, pushed
/// away from the critical radius when one exists.
pub fn matching_radius(profile: &VortexProfile, param: Option<&SpectralParameter>) -> Result<f64> {
    let mut rm = profile.omega_inverse(0.5)?;
    if let Some(p) = param {
        if p.b > 0.0 && p.b < 1.0 {
            let rbar = profile.omega_inverse(p.b)?;
            if (rm - rbar).abs() < 0.2 {
                rm = if rm >= rbar { rbar + 0.2 } else { (rbar - 0.2).max(0.05) };
            }
        }
    }
    Ok(rm)
}

/// Grows the regular solution from the axis out to `r_match`, sampling at
/// the profile grid nodes that fall inside the integration range.
pub fn shoot_from_origin(
    profile: &VortexProfile,
    sector: &FourierSector,
    param: &SpectralParameter,
    r_match: f64,
) -> Result<ShootingSolution> {
    let coeff = Coefficients::new(profile, sector)?;
    let r0 = ORIGIN_SEED_RADIUS;
    if r_match <= r0 {
        return Err(CoreError::InvalidArgument(
            "matching radius must exceed the seed radius".into(),
        ));
    }
    let mut rs: Vec<f64> = profile
        .grid
        .nodes
        .iter()
        .copied()
        .filter(|&r| r > r0 && r < r_match)
        .collect();
    rs.push(r_match);
    let (u0, up0) = coeff.origin_seed(r0, param);
    let states = integrate_checkpoints(
        |r, y: &[C64; 2]| [y[1], coeff.u_second(r, y[0], y[1], param)],
        r0,
        &rs,
        [u0, up0],
        &ode_opts(),
    )?;
    let scale = states.last().unwrap()[0];
    if scale.norm() == 0.0 {
        return Err(CoreError::OdeFailure {
            position: r_match,
            reason: "origin branch vanishes at the matching radius".into(),
        });
    }
    Ok(ShootingSolution {
        branch: Branch::FromOrigin,
        r: rs.clone(),
        u: states.iter().map(|s| s[0] / scale).collect(),
        u_prime: states.iter().map(|s| s[1] / scale).collect(),
        match_scale: scale,
    })
}

/// Grows the decaying solution inward from the outer radius down to
/// `r_match`, in the substituted variable `h = sqrt(r) u e^{k(r - r_match)}`
/// which tends to a constant at infinity.
pub fn shoot_from_infinity(
    profile: &VortexProfile,
    sector: &FourierSector,
    param: &SpectralParameter,
    r_match: f64,
) -> Result<ShootingSolution> {
    let coeff = Coefficients::new(profile, sector)?;
    let k = coeff.k;
    let big_r = coeff.outer_radius();
    if r_match >= big_r {
        return Err(CoreError::InvalidArgument(
            "matching radius must lie inside the outer radius".into(),
        ));
    }
    let mut rs: Vec<f64> = profile
        .grid
        .nodes
        .iter()
        .copied()
        .filter(|&r| r > r_match && r < big_r)
        .collect();
    rs.push(r_match);
    rs.sort_by(|a, b| b.partial_cmp(a).unwrap()); // descending
    let (_, h0, hp0) = coeff.infinity_seed();
    let states = integrate_checkpoints(
        |r, y: &[C64; 2]| coeff.infinity_rhs(r, y, param),
        big_r,
        &rs,
        [h0, hp0],
        &ode_opts(),
    )?;
    // back to u: u = h r^{-1/2} e^{-k(r - r_match)}
    let mut r_out = Vec::with_capacity(rs.len());
    let mut u_out = Vec::with_capacity(rs.len());
    let mut up_out = Vec::with_capacity(rs.len());
    for (i, &r) in rs.iter().enumerate().rev() {
        let damp = (-k * (r - r_match)).exp() / r.sqrt();
        let h = states[i][0];
        let hp = states[i][1];
        r_out.push(r);
        u_out.push(h * damp);
        up_out.push((hp - h * (k + 0.5 / r)) * damp);
    }
    let scale = u_out[0];
    if scale.norm() == 0.0 {
        return Err(CoreError::OdeFailure {
            position: r_match,
            reason: "infinity branch vanishes at the matching radius".into(),
        });
    }
    for v in &mut u_out {
        *v /= scale;
    }
    for v in &mut up_out {
        *v /= scale;
    }
    Ok(ShootingSolution {
        branch: Branch::FromInfinity,
        r: r_out,
        u: u_out,
        u_prime: up_out,
        match_scale: scale,
    })
}

/// Wronskian mismatch `A (u_0 u_inf' - u_0' u_inf)` of the seed-normalized
/// branches, referred to the fixed mid-profile radius; zero exactly at
/// eigenvalues.
///
/// The combination `r A(r) (u_0 u_inf' - u_0' u_inf)` is independent of the
/// radius where the branches meet, so the value does not change when the
/// matching point is pushed off a critical radius; together with the
/// parameter-independent branch normalizations this makes the mismatch an
/// analytic function of the spectral parameter with no spurious poles.
pub fn miss_distance(
    profile: &VortexProfile,
    sector: &FourierSector,
    param: &SpectralParameter,
) -> Result<C64> {
    miss_distance_with(profile, sector, param, &ode_opts())
}

fn miss_distance_with(
    profile: &VortexProfile,
    sector: &FourierSector,
    param: &SpectralParameter,
    opts: &OdeOptions,
) -> Result<C64> {
    let coeff = Coefficients::new(profile, sector)?;
    let rm0 = matching_radius(profile, None)?;
    let rm = matching_radius(profile, Some(param))?;
    let s0 = origin_state_at(&coeff, param, rm, opts)?;
    let si = infinity_state_at(&coeff, param, rm, opts)?;
    let wr = s0[0] * si[1] - s0[1] * si[0];
    // rescale the radius-invariant Wronskian and the exponential offset of
    // the inward seed to the reference radius rm0
    Ok(coeff.a(rm) * (rm / rm0) * (-coeff.k * (rm - rm0)).exp() * wr)
}

/// Newton polish with a central-difference slope; returns the iterate with
/// the smallest certified residual.
fn polish_real<F: Fn(f64) -> Result<f64>>(f: &F, b0: f64) -> Result<(f64, f64)> {
    let mut b = b0;
    let mut fb = f(b)?;
    let mut best = (b, fb.abs());
    for _ in 0..3 {
        let h = 1e-9 * b.abs().max(1.0);
        let slope = (f(b + h)? - f(b - h)?) / (2.0 * h);
        if !slope.is_finite() || slope == 0.0 {
            break;
        }
        let step = fb / slope;
        b -= step;
        fb = f(b)?;
        if fb.abs() < best.1 {
            best = (b, fb.abs());
        }
        if step.abs() < 1e-15 * b.abs().max(1.0) {
            break;
        }
    }
    Ok(best)
}

pub(crate) fn brent_real<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<f64> {
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa * fb > 0.0 {
        return Err(CoreError::RootFinding {
            lo: a,
            hi: b,
            reason: "no sign change over the bracket".into(),
        });
    }
    let (mut c, mut fc) = (a, fa);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..200 {
        if fb.abs() > fc.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let rr = fb / fc;
                p = s * (2.0 * xm * qq * (qq - rr) - (b - a) * (rr - 1.0));
                q = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b)?;
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    Err(CoreError::RootFinding {
        lo: a,
        hi: b,
        reason: "bracket refinement stalled".into(),
    })
}

/// Searches the real frequency axis outside the essential band `[0, 1]` for
/// neutral modes, with a scan geometrically refined toward the band edges
/// where the modes accumulate.
pub fn find_kelvin_modes(
    profile: &VortexProfile,
    sector: &FourierSector,
    b_min: f64,
    b_max: f64,
) -> Result<Vec<KelvinMode>> {
    let real_miss = |b: f64| -> Result<f64> {
        let param = SpectralParameter::from_ab(sector.m, 0.0, b);
        miss_distance(profile, sector, &param).map(|v| v.re)
    };
    let tight_miss = |b: f64| -> Result<f64> {
        let param = SpectralParameter::from_ab(sector.m, 0.0, b);
        miss_distance_with(profile, sector, &param, &tight_opts()).map(|v| v.re)
    };
    let mut modes: Vec<KelvinMode> = Vec::new();
    let search = |bs: &[f64], modes: &mut Vec<KelvinMode>| -> Result<()> {
        let mut vals = Vec::with_capacity(bs.len());
        for &b in bs {
            vals.push(real_miss(b)?);
        }
        for i in 0..bs.len() - 1 {
            if vals[i].is_finite() && vals[i + 1].is_finite() && vals[i] * vals[i + 1] < 0.0 {
                let root = brent_real(&real_miss, bs[i], bs[i + 1], 1e-12)?;
                let (root, res) = polish_real(&tight_miss, root)?;
                // the residual certificate rejects spurious crossings from
                // under-resolved scans near the accumulation edge
                if res < 1e-8 {
                    modes.push(KelvinMode {
                        b: root,
                        s: C64::new(0.0, -(sector.m as f64) * root),
                        miss_abs: res,
                    });
                }
            }
        }
        Ok(())
    };
    if b_max > 1.0 {
        let delta_max = b_max - 1.0;
        let n = 420;
        let lo: f64 = (b_min - 1.0).max(2e-4).min(0.5 * delta_max);
        let ratio = (delta_max / lo).ln();
        let bs: Vec<f64> = (0..=n)
            .map(|j| 1.0 + lo * (ratio * j as f64 / n as f64).exp())
            .collect();
        search(&bs, &mut modes)?;
    }
    if b_min < 0.0 {
        let n = 200;
        let lo: f64 = (-b_max).max(1e-6).min(0.5 * -b_min);
        let ratio = ((-b_min) / lo).ln();
        let mut bs: Vec<f64> = (0..=n)
            .map(|j| -lo * (ratio * j as f64 / n as f64).exp())
            .collect();
        bs.reverse();
        search(&bs, &mut modes)?;
    }
    modes.sort_by(|x, y| x.b.partial_cmp(&y.b).unwrap());
    modes.dedup_by(|x, y| (x.b - y.b).abs() < 1e-10);
    Ok(modes)
}

/// Counts eigenvalues inside the rectangle `b in [rect[0], rect[1]]`,
/// `a in [rect[2], rect[3]]` of the upper half plane (`a > 0` means growth)
/// and localizes them when the count is positive.
pub fn scan_unstable(
    profile: &VortexProfile,
    sector: &FourierSector,
    rect: [f64; 4],
) -> Result<ScanResult> {
    let [b_lo, b_hi, a_lo, a_hi] = rect;
    if !(a_lo > 0.0 && a_hi > a_lo && b_hi > b_lo) {
        return Err(CoreError::InvalidArgument(
            "scan rectangle needs 0 < a_lo < a_hi and b_lo < b_hi".into(),
        ));
    }
    let mut f = |w: C64| -> Result<C64> {
        let param = SpectralParameter::from_ab(sector.m, w.im, w.re);
        miss_distance(profile, sector, &param)
    };
    let corners = rect_corners(b_lo, b_hi, a_lo, a_hi);
    let winding = winding_number(&mut f, &corners, &WindingOptions::default())?;
    let mut roots = Vec::new();
    if winding != 0 {
        let mut cells = vec![(b_lo, b_hi, a_lo, a_hi, winding)];
        let mut budget = 200usize;
        while let Some((x0, x1, y0, y1, count)) = cells.pop() {
            if budget == 0 {
                break;
            }
            budget -= 1;
            if (x1 - x0).max(y1 - y0) < 1e-5 || budget == 0 {
                let center = C64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
                let polished = polish_complex(&mut f, center)?;
                let residual = f(polished).map(|v| v.norm()).unwrap_or(f64::INFINITY);
                let (b, a) = (polished.re, polished.im);
                roots.push(UnstableRoot {
                    a,
                    b,
                    near_degenerate: count > 1,
                    residual,
                    s_re: (sector.m as f64) * a,
                    s_im: -(sector.m as f64) * b,
                });
                continue;
            }
            let xm = 0.5 * (x0 + x1);
            let ym = 0.5 * (y0 + y1);
            for &(cx0, cx1, cy0, cy1) in &[
                (x0, xm, y0, ym),
                (xm, x1, y0, ym),
                (x0, xm, ym, y1),
                (xm, x1, ym, y1),
            ] {
                let c = rect_corners(cx0, cx1, cy0, cy1);
                match winding_number(&mut f, &c, &WindingOptions::default()) {
                    Ok(0) => {}
                    Ok(n) => cells.push((cx0, cx1, cy0, cy1, n)),
                    Err(_) => {
                        // a root sits on the dividing line; nudge by polishing
                        let center = C64::new(0.5 * (cx0 + cx1), 0.5 * (cy0 + cy1));
                        if let Ok(p) = polish_complex(&mut f, center) {
                            let residual = f(p).map(|v| v.norm()).unwrap_or(f64::INFINITY);
                            roots.push(UnstableRoot {
                                a: p.im,
                                b: p.re,
                                near_degenerate: false,
                                residual,
                                s_re: (sector.m as f64) * p.im,
                                s_im: -(sector.m as f64) * p.re,
                            });
                        }
                    }
                }
            }
        }
        // merge duplicates found through different cells
        roots.sort_by(|p, q| (p.b, p.a).partial_cmp(&(q.b, q.a)).unwrap());
        let merge_radius = 1e-7;
        let mut merged: Vec<UnstableRoot> = Vec::new();
        for root in roots {
            if let Some(last) = merged.last_mut() {
                if (last.b - root.b).abs() < merge_radius && (last.a - root.a).abs() < merge_radius
                {
                    last.near_degenerate = true;
                    continue;
                }
            }
            merged.push(root);
        }
        roots = merged;
    }
    Ok(ScanResult {
        m: sector.m,
        k: sector.k,
        rect,
        winding,
        roots,
    })
}

fn polish_complex<F>(f: &mut F, start: C64) -> Result<C64>
where
    F: FnMut(C64) -> Result<C64>,
{
    let mut w0 = start;
    let mut w1 = start + C64::new(1e-6, 1e-6);
    let mut f0 = f(w0)?;
    let mut f1 = f(w1)?;
    for _ in 0..80 {
        let denom = f1 - f0;
        if denom.norm() == 0.0 {
            break;
        }
        let w2 = w1 - f1 * (w1 - w0) / denom;
        if (w2 - w1).norm() < 1e-12 * w1.norm().max(1.0) {
            return Ok(w2);
        }
        w0 = w1;
        f0 = f1;
        w1 = w2;
        f1 = f(w1)?;
    }
    Ok(w1)
}

/// Assembled eigenfunction on the profile grid for a neutral mode at `b`.
#[derive(Debug, Clone)]
pub struct EigenFunction {
    pub r: Vec<f64>,
    pub u: Vec<C64>,
    pub u_prime: Vec<C64>,
}

/// Glues the two shooting branches at the matching radius (valid when `b`
/// is an eigenvalue, so the derivative jump is below the mismatch
/// tolerance) and extends by the seed behaviors beyond the integration
/// range.
pub fn kelvin_eigenfunction(
    profile: &VortexProfile,
    sector: &FourierSector,
    b: f64,
) -> Result<EigenFunction> {
    let param = SpectralParameter::from_ab(sector.m, 0.0, b);
    let rm = matching_radius(profile, Some(&param))?;
    let coeff = Coefficients::new(profile, sector)?;
    let from0 = shoot_from_origin(profile, sector, &param, rm)?;
    let from_inf = shoot_from_infinity(profile, sector, &param, rm)?;
    let big_r = coeff.outer_radius();
    let k = coeff.k;
    let a1 = (4.0 * coeff.m2 + 3.0) / (8.0 * k);
    // seed continuations on both ends are divided by the same raw matching
    // values as the integrated branches
    let origin_scale = from0.match_scale;
    let tail_scale = {
        let r_last = *from_inf.r.last().unwrap();
        let u_last = *from_inf.u.last().unwrap();
        let form = (1.0 + a1 / r_last) * (-k * (r_last - rm)).exp() / r_last.sqrt();
        u_last / form
    };
    let mut r = Vec::new();
    let mut u = Vec::new();
    let mut up = Vec::new();
    for &node in profile.grid.nodes.iter() {
        if node <= ORIGIN_SEED_RADIUS {
            let (su, sup) = coeff.origin_seed(node, &param);
            r.push(node);
            u.push(su / origin_scale);
            up.push(sup / origin_scale);
        } else if node < rm {
            if let Some(idx) = from0.r.iter().position(|&x| (x - node).abs() < 1e-12) {
                r.push(node);
                u.push(from0.u[idx]);
                up.push(from0.u_prime[idx]);
            }
        } else if node < big_r {
            if let Some(idx) = from_inf.r.iter().position(|&x| (x - node).abs() < 1e-12) {
                r.push(node);
                u.push(from_inf.u[idx]);
                up.push(from_inf.u_prime[idx]);
            }
        } else {
            let form = (1.0 + a1 / node) * (-k * (node - rm)).exp() / node.sqrt();
            let dform = (-a1 / (node * node)
                - (1.0 + a1 / node) * (k + 0.5 / node))
                * (-k * (node - rm)).exp()
                / node.sqrt();
            r.push(node);
            u.push(tail_scale * form);
            up.push(tail_scale * dform);
        }
    }
    Ok(EigenFunction { r, u, u_prime: up })
}

/// Quadratic-form residual `int (A |d* u|^2 + B |u|^2) r dr`, which
/// vanishes for true eigenfunctions.
pub fn howard_residual(
    profile: &VortexProfile,
    sector: &FourierSector,
    param: &SpectralParameter,
    ef: &EigenFunction,
) -> Result<C64> {
    let coeff = Coefficients::new(profile, sector)?;
    let vals: Vec<C64> = ef
        .r
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let dstar = ef.u_prime[i] + ef.u[i] / r;
            let b = coeff.b_coeff(r, param);
            C64::new(coeff.a(r) * dstar.norm_sqr(), 0.0) + b * ef.u[i].norm_sqr()
        })
        .collect();
    quad_on_subgrid(profile, &ef.r, &vals)
}

/// Squared weighted norm `int |u|^2 r dr` used to scale residuals.
pub fn weighted_norm_sq(profile: &VortexProfile, ef: &EigenFunction) -> Result<f64> {
    let vals: Vec<C64> = ef.u.iter().map(|u| C64::new(u.norm_sqr(), 0.0)).collect();
    quad_on_subgrid(profile, &ef.r, &vals).map(|v| v.re)
}

fn quad_on_subgrid(profile: &VortexProfile, rs: &[f64], vals: &[C64]) -> Result<C64> {
    // the eigenfunction arrays reuse grid nodes, so grid weights apply
    let mut acc = C64::new(0.0, 0.0);
    let mut j = 0;
    for (i, &node) in profile.grid.nodes.iter().enumerate() {
        if j < rs.len() && (rs[j] - node).abs() < 1e-12 {
            acc += profile.grid.weights[i] * vals[j];
            j += 1;
        }
    }
    if j != rs.len() {
        return Err(CoreError::InvalidArgument(
            "sample points do not match the profile grid".into(),
        ));
    }
    Ok(acc)
}

/// Imaginary part of the quadratic form with its growth-rate prefactor made
/// explicit: returns exactly 0.0 at `a = 0`.
pub fn howard_imag_part(
    profile: &VortexProfile,
    sector: &FourierSector,
    param: &SpectralParameter,
    ef: &EigenFunction,
) -> Result<f64> {
    let coeff = Coefficients::new(profile, sector)?;
    let a = param.a;
    let vals: Vec<C64> = ef
        .r
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let om_b = profile.omega(r) - param.b;
            let mod2 = om_b * om_b + a * a;
            let bracket = -2.0 * (coeff.k * coeff.k / coeff.m2)
                * coeff.a(r)
                * profile.phi(r)
                * om_b
                / (mod2 * mod2)
                + r * coeff.w_weight_derivative(r) / mod2;
            C64::new(bracket * ef.u[i].norm_sqr(), 0.0)
        })
        .collect();
    let integral = quad_on_subgrid(profile, &ef.r, &vals)?;
    Ok(a * integral.re)
}

/// Weight used in the transformed quadratic forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormWeight {
    /// `q = gs`: sign-definite first term when the stability quotient
    /// stays above 1/4 everywhere.
    GammaStar,
    /// `q = gs^{1/2}`: intermediate weight with the quarter-curvature term.
    GammaStarSqrt,
}

/// Transformed residual `int (q^2 A |d*(u/q)|^2 + E |u/q|^2) r dr` with the
/// closed-form substituted potential `E`; also vanishes at eigenvalues.
pub fn howard_weighted_residual(
    profile: &VortexProfile,
    sector: &FourierSector,
    param: &SpectralParameter,
    weight: FormWeight,
    ef: &EigenFunction,
) -> Result<C64> {
    let coeff = Coefficients::new(profile, sector)?;
    let k2 = coeff.k * coeff.k;
    let m2 = coeff.m2;
    let vals: Vec<C64> = ef
        .r
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let gs = coeff.gamma_star(r, param);
            let a = coeff.a(r);
            let phi = profile.phi(r);
            let d = m2 + k2 * r * r;
            let (q, qp, e) = match weight {
                FormWeight::GammaStar => {
                    let dr_om_w = profile.omega_prime(r) / d
                        - 2.0 * k2 * r * profile.omega(r) / (d * d);
                    let e = gs * gs - (k2 / m2) * a * phi + 2.0 * r * gs * dr_om_w;
                    (gs, C64::new(profile.omega_prime(r), 0.0), e)
                }
                FormWeight::GammaStarSqrt => {
                    let wp2o = profile.w_prime(r) + 2.0 * profile.omega_prime(r);
                    let w2o = profile.w(r) + 2.0 * profile.omega(r);
                    let dr_mix = wp2o / d - 2.0 * k2 * r * w2o / (d * d);
                    let op = profile.omega_prime(r);
                    let e = gs - (k2 / m2) * a * phi / gs
                        + 0.5 * r * dr_mix
                        + 0.25 * a * op * op / gs;
                    let q = gs.sqrt();
                    (q, C64::new(op, 0.0) / (2.0 * q), e)
                }
            };
            let v = ef.u[i] / q;
            let dstar_v = (ef.u_prime[i] + ef.u[i] / r) / q - ef.u[i] * qp / (q * q);
            q * q * a * dstar_v * dstar_v.conj() + e * v.norm_sqr()
        })
        .collect();
    quad_on_subgrid(profile, &ef.r, &vals)
}

/// All integral-identity residuals of one candidate eigenfunction, with the
/// squared norm used to scale them.
#[derive(Debug, Clone, Copy)]
pub struct HowardResiduals {
    /// Plain quadratic form `int (A |d* u|^2 + B |u|^2) r dr`.
    pub base: C64,
    /// Imaginary part of the plain form with the growth-rate prefactor made
    /// explicit; exactly 0.0 when `a = 0`.
    pub imag_part: f64,
    /// Weighted form with `q = gs`.
    pub weight_linear: C64,
    /// Weighted form with `q = gs^{1/2}`.
    pub weight_sqrt: C64,
    /// `int |u|^2 r dr`.
    pub norm_sq: f64,
}

/// Evaluates every integral identity on one candidate eigenfunction.
pub fn howard_identity_residuals(
    profile: &VortexProfile,
    sector: &FourierSector,
    param: &SpectralParameter,
    ef: &EigenFunction,
) -> Result<HowardResiduals> {
    Ok(HowardResiduals {
        base: howard_residual(profile, sector, param, ef)?,
        imag_part: howard_imag_part(profile, sector, param, ef)?,
        weight_linear: howard_weighted_residual(profile, sector, param, FormWeight::GammaStar, ef)?,
        weight_sqrt: howard_weighted_residual(
            profile,
            sector,
            param,
            FormWeight::GammaStarSqrt,
            ef,
        )?,
        norm_sq: weighted_norm_sq(profile, ef)?,
    })
}

/// Mismatch of the axisymmetric problem at frequency `omega > 0` (the
/// eigenvalue is `s = -i omega`): the radial equation is
/// `-d_r d*_r u + k^2 (1 - Phi/omega^2) u = 0` with `u ~ r` at the axis
/// and `u ~ e^{-kr}/sqrt(r)` at infinity; the weighted Wronskian
/// `r (u_0 u_inf' - u_0' u_inf)` at the mid-profile radius vanishes at
/// eigenfrequencies.
pub fn axisymmetric_miss(profile: &VortexProfile, k: f64, omega: f64) -> Result<f64> {
    axisymmetric_miss_with(profile, k, omega, &ode_opts())
}

fn axisymmetric_miss_with(
    profile: &VortexProfile,
    k: f64,
    omega: f64,
    opts: &OdeOptions,
) -> Result<f64> {
    if !(k > 0.0 && omega > 0.0) {
        return Err(CoreError::InvalidArgument(
            "axisymmetric mismatch needs k > 0 and omega > 0".into(),
        ));
    }
    let rm = matching_radius(profile, None)?;
    let s0 = axi_origin_state_at(profile, k, omega, rm, opts)?;
    let si = axi_infinity_state_at(profile, k, omega, rm, opts)?;
    Ok(rm * (s0[0] * si[1] - s0[1] * si[0]).re)
}

/// `1 - Phi/omega^2`, the sign-indefinite well of the axisymmetric problem.
fn axi_well(profile: &VortexProfile, omega: f64, r: f64) -> f64 {
    1.0 - profile.phi(r) / (omega * omega)
}

fn axi_origin_state_at(
    profile: &VortexProfile,
    k: f64,
    omega: f64,
    r_target: f64,
    opts: &OdeOptions,
) -> Result<[C64; 2]> {
    // seed u = r + c1 r^3 from the Frobenius balance 8 c1 = k^2 (1 - Phi(0)/omega^2),
    // with Phi(0) = 4 under the profile normalization
    let c1 = k * k * (1.0 - 4.0 / (omega * omega)) / 8.0;
    let r0 = ORIGIN_SEED_RADIUS;
    let u0 = C64::new(r0 + c1 * r0 * r0 * r0, 0.0);
    let up0 = C64::new(1.0 + 3.0 * c1 * r0 * r0, 0.0);
    crate::ode::integrate(
        |r, y: &[C64; 2]| {
            [
                y[1],
                -y[1] / r + y[0] / (r * r) + k * k * axi_well(profile, omega, r) * y[0],
            ]
        },
        r0,
        r_target,
        [u0, up0],
        opts,
    )
}

fn axi_infinity_state_at(
    profile: &VortexProfile,
    k: f64,
    omega: f64,
    r_target: f64,
    opts: &OdeOptions,
) -> Result<[C64; 2]> {
    // h = sqrt(r) u e^{k(r - r_target)} tends to 1 + a1/r with a1 = 3/(8k)
    let big_r = (12.0 / k).max(30.0);
    let a1 = 3.0 / (8.0 * k);
    let h0 = C64::new(1.0 + a1 / big_r, 0.0);
    let hp0 = C64::new(-a1 / (big_r * big_r), 0.0);
    let state = crate::ode::integrate(
        |r, y: &[C64; 2]| {
            [
                y[1],
                2.0 * k * y[1]
                    + (0.75 / (r * r) + k * k * (axi_well(profile, omega, r) - 1.0)) * y[0],
            ]
        },
        big_r,
        r_target,
        [h0, hp0],
        opts,
    )?;
    let damp = 1.0 / r_target.sqrt();
    Ok([
        state[0] * damp,
        (state[1] - state[0] * (k + 0.5 / r_target)) * damp,
    ])
}

/// Scans `(omega_lo, omega_hi)` for axisymmetric eigenfrequencies. Modes
/// exist only below the core vorticity scale (`omega < 2` for normalized
/// profiles) and accumulate toward zero frequency.
pub fn find_axisymmetric_modes(
    profile: &VortexProfile,
    k: f64,
    omega_lo: f64,
    omega_hi: f64,
) -> Result<Vec<KelvinMode>> {
    if !(omega_lo > 0.0 && omega_hi > omega_lo) {
        return Err(CoreError::InvalidArgument(
            "frequency window must satisfy 0 < omega_lo < omega_hi".into(),
        ));
    }
    let f = |w: f64| axisymmetric_miss(profile, k, w);
    let tight = |w: f64| axisymmetric_miss_with(profile, k, w, &tight_opts());
    let n = 300;
    let mut modes = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for j in 0..=n {
        let w = omega_lo + (omega_hi - omega_lo) * j as f64 / n as f64;
        let v = f(w)?;
        if let Some((wp, vp)) = prev {
            if vp.is_finite() && v.is_finite() && vp * v < 0.0 {
                let root = brent_real(&f, wp, w, 1e-12)?;
                let (root, res) = polish_real(&tight, root)?;
                if res < 1e-8 {
                    modes.push(KelvinMode {
                        b: root,
                        s: C64::new(0.0, -root),
                        miss_abs: res,
                    });
                }
            }
        }
        prev = Some((w, v));
    }
    Ok(modes)
}

/// Assembles the axisymmetric eigenfunction at frequency `omega` on the
/// profile grid, gluing the two branches at the mid-profile radius.
pub fn axisymmetric_eigenfunction(
    profile: &VortexProfile,
    k: f64,
    omega: f64,
) -> Result<EigenFunction> {
    let rm = matching_radius(profile, None)?;
    let opts = ode_opts();
    let r0 = ORIGIN_SEED_RADIUS;
    let big_r = (12.0 / k).max(30.0);
    let a1 = 3.0 / (8.0 * k);
    let c1 = k * k * (1.0 - 4.0 / (omega * omega)) / 8.0;

    // outward sweep through the interior nodes, ending at the glue radius
    let mut inner: Vec<f64> = profile
        .grid
        .nodes
        .iter()
        .copied()
        .filter(|&x| x > r0 && x < rm)
        .collect();
    inner.push(rm);
    let seed = [
        C64::new(r0 + c1 * r0.powi(3), 0.0),
        C64::new(1.0 + 3.0 * c1 * r0 * r0, 0.0),
    ];
    let states0 = integrate_checkpoints(
        |r, y: &[C64; 2]| {
            [
                y[1],
                -y[1] / r + y[0] / (r * r) + k * k * axi_well(profile, omega, r) * y[0],
            ]
        },
        r0,
        &inner,
        seed,
        &opts,
    )?;
    let scale0 = states0.last().unwrap()[0];

    // inward sweep in the substituted variable, offset referred to rm
    let mut outer: Vec<f64> = profile
        .grid
        .nodes
        .iter()
        .copied()
        .filter(|&x| x >= rm && x < big_r)
        .collect();
    outer.push(rm);
    outer.sort_by(|a, b| b.partial_cmp(a).unwrap());
    outer.dedup();
    let h_seed = [
        C64::new(1.0 + a1 / big_r, 0.0),
        C64::new(-a1 / (big_r * big_r), 0.0),
    ];
    let states_inf = integrate_checkpoints(
        |r, y: &[C64; 2]| {
            [
                y[1],
                2.0 * k * y[1]
                    + (0.75 / (r * r) + k * k * (axi_well(profile, omega, r) - 1.0)) * y[0],
            ]
        },
        big_r,
        &outer,
        h_seed,
        &opts,
    )?;
    let h_to_u = |r: f64, h: C64, hp: C64| -> (C64, C64) {
        let damp = (-k * (r - rm)).exp() / r.sqrt();
        (h * damp, (hp - h * (k + 0.5 / r)) * damp)
    };
    let (glue_inf, _) = h_to_u(rm, states_inf.last().unwrap()[0], states_inf.last().unwrap()[1]);
    if scale0.norm() == 0.0 || glue_inf.norm() == 0.0 {
        return Err(CoreError::OdeFailure {
            position: rm,
            reason: "branch vanishes at the matching radius".into(),
        });
    }

    let mut r = Vec::new();
    let mut u = Vec::new();
    let mut up = Vec::new();
    let mut j0 = 0usize;
    for &node in profile.grid.nodes.iter() {
        let (uu, duu) = if node <= r0 {
            (
                C64::new(node + c1 * node.powi(3), 0.0) / scale0,
                C64::new(1.0 + 3.0 * c1 * node * node, 0.0) / scale0,
            )
        } else if node < rm {
            let st = states0[j0];
            j0 += 1;
            (st[0] / scale0, st[1] / scale0)
        } else if node < big_r {
            let idx = outer
                .iter()
                .position(|&x| (x - node).abs() < 1e-12)
                .expect("outer checkpoint");
            let (v, dv) = h_to_u(node, states_inf[idx][0], states_inf[idx][1]);
            (v / glue_inf, dv / glue_inf)
        } else {
            let form = (1.0 + a1 / node) * (-k * (node - rm)).exp() / node.sqrt();
            let dform = (-a1 / (node * node) - (1.0 + a1 / node) * (k + 0.5 / node))
                * (-k * (node - rm)).exp()
                / node.sqrt();
            (
                C64::new(form, 0.0) / glue_inf,
                C64::new(dform, 0.0) / glue_inf,
            )
        };
        r.push(node);
        u.push(uu);
        up.push(duu);
    }
    Ok(EigenFunction { r, u, u_prime: up })
}

/// Axisymmetric quadratic form at `m = 0`:
/// `int (|d* u|^2 + k^2 (1 + Phi/s^2) |u|^2) r dr`.
pub fn axisymmetric_form(
    profile: &VortexProfile,
    k: f64,
    s: C64,
    ef: &EigenFunction,
) -> Result<C64> {
    let vals: Vec<C64> = ef
        .r
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let dstar = ef.u_prime[i] + ef.u[i] / r;
            C64::new(dstar.norm_sqr(), 0.0)
                + k * k * (1.0 + profile.phi(r) / (s * s)) * ef.u[i].norm_sqr()
        })
        .collect();
    quad_on_subgrid(profile, &ef.r, &vals)
}

/// Planar quadratic form at `k = 0`:
/// `int (|d_r(r u)|^2 + (m^2 + r W'/gs) |u|^2) r dr`.
pub fn planar_form(
    profile: &VortexProfile,
    m: i32,
    param: &SpectralParameter,
    ef: &EigenFunction,
) -> Result<C64> {
    let m2 = (m * m) as f64;
    let vals: Vec<C64> = ef
        .r
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let d_ru = r * ef.u_prime[i] + ef.u[i];
            let gs = C64::new(profile.omega(r) - param.b, -param.a);
            C64::new(d_ru.norm_sqr(), 0.0)
                + (m2 + r * profile.w_prime(r) / gs) * ef.u[i].norm_sqr()
        })
        .collect();
    quad_on_subgrid(profile, &ef.r, &vals)
}

/// Outcome of the quotient threshold test.
#[derive(Debug, Clone, Copy)]
pub struct QuotientThreshold {
    /// True when `(k^2/m^2) J(r) >= 1/4` everywhere.
    pub holds: bool,
    /// Infimum of `(k^2/m^2) J` over the grid.
    pub inf_value: f64,
    /// First radius where the quotient crosses 1/4, or infinity.
    pub r_star: f64,
}

/// Tests whether the weighted stability quotient stays above 1/4, and
/// locates the crossing radius when it does not.
pub fn hg_criterion(profile: &VortexProfile, sector: &FourierSector) -> Result<QuotientThreshold> {
    if sector.m == 0 {
        return Err(CoreError::InvalidArgument(
            "quotient test needs m != 0".into(),
        ));
    }
    let factor = (sector.k * sector.k) / ((sector.m * sector.m) as f64);
    let g = |r: f64| factor * profile.j_of(r);
    let mut inf_value = f64::INFINITY;
    let mut crossing: Option<(f64, f64)> = None;
    let mut prev: Option<(f64, f64)> = None;
    for &r in &profile.grid.nodes {
        let v = g(r);
        inf_value = inf_value.min(v);
        if let Some((rp, vp)) = prev {
            if crossing.is_none() && (vp - 0.25) > 0.0 && (v - 0.25) <= 0.0 {
                crossing = Some((rp, r));
            }
        }
        prev = Some((r, v));
    }
    let r_star = match crossing {
        None => f64::INFINITY,
        Some((lo, hi)) => {
            let mut lo = lo;
            let mut hi = hi;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if g(mid) > 0.25 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    };
    Ok(QuotientThreshold {
        holds: inf_value >= 0.25 - 1e-12,
        inf_value,
        r_star,
    })
}

/// Minimum over the grid of `B(r) - (1 - 4/m^2)` at a real frequency `b`
/// outside the critical band; nonnegative for the profiles covered by the
/// coercivity bound.
pub fn verify_b_lower_bound(
    profile: &VortexProfile,
    sector: &FourierSector,
    b: f64,
) -> Result<f64> {
    if (0.0..=1.0).contains(&b) && b > 0.0 {
        return Err(CoreError::InvalidArgument(
            "lower-bound check requires b outside the critical band (0, 1]".into(),
        ));
    }
    let coeff = Coefficients::new(profile, sector)?;
    let param = SpectralParameter::from_ab(sector.m, 0.0, b);
    let floor = 1.0 - 4.0 / coeff.m2;
    let mut min_gap = f64::INFINITY;
    for &r in &profile.grid.nodes {
        let bv = coeff.b_coeff(r, &param).re;
        min_gap = min_gap.min(bv - floor);
    }
    Ok(min_gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::VortexProfile;

    fn sector(m: i32, k: f64) -> FourierSector {
        FourierSector::new(m, k)
    }

    #[test]
    fn matching_radius_values() {
        let lo = VortexProfile::lamb_oseen();
        let rm = matching_radius(&lo, None).unwrap();
        assert!((rm - 1.262_388_315_867_997_8).abs() < 1e-10);
        let ks = VortexProfile::ks();
        assert!((matching_radius(&ks, None).unwrap() - 1.0).abs() < 1e-10);
        // pushed off the critical radius
        let param = SpectralParameter::from_ab(2, 0.0, 0.5);
        let rm2 = matching_radius(&ks, Some(&param)).unwrap();
        assert!((rm2 - 1.2).abs() < 1e-9);
    }

    #[test]
    fn origin_seed_satisfies_equation() {
        // residual of the seed in the full equation at the seed radius
        let lo = VortexProfile::lamb_oseen();
        let sec = sector(2, 1.0);
        let coeff = Coefficients::new(&lo, &sec).unwrap();
        let param = SpectralParameter::from_ab(2, 0.3, 1.7);
        let r0 = 1e-3;
        let h = 1e-5;
        let (um, _) = coeff.origin_seed(r0 - h, &param);
        let (u0, up0) = coeff.origin_seed(r0, &param);
        let (upl, _) = coeff.origin_seed(r0 + h, &param);
        let upp = (um - 2.0 * u0 + upl) / (h * h);
        let rhs = coeff.u_second(r0, u0, up0, &param);
        assert!(
            (upp - rhs).norm() / rhs.norm().max(1.0) < 1e-3,
            "seed residual {:?} vs {:?}",
            upp,
            rhs
        );
    }

    #[test]
    fn miss_real_on_real_axis_outside_band() {
        // real coefficients when a = 0 and b is outside [0, 1]
        let lo = VortexProfile::lamb_oseen();
        let sec = sector(2, 1.0);
        for b in [1.2, 5.0, -3.0] {
            let param = SpectralParameter::from_ab(2, 0.0, b);
            let miss = miss_distance(&lo, &sec, &param).unwrap();
            assert!(
                miss.im.abs() < 1e-10 * miss.re.abs().max(1.0),
                "b={b}: imag part {}",
                miss.im
            );
        }
    }

    #[test]
    fn mismatch_conjugates_under_time_reversal() {
        // reflecting the growth rate conjugates every coefficient, hence
        // the mismatch itself
        let lo = VortexProfile::lamb_oseen();
        let sec = sector(2, 1.0);
        let plus = miss_distance(&lo, &sec, &SpectralParameter::from_ab(2, 0.7, 0.4)).unwrap();
        let minus = miss_distance(&lo, &sec, &SpectralParameter::from_ab(2, -0.7, 0.4)).unwrap();
        assert!(
            (minus - plus.conj()).norm() < 1e-13 * plus.norm(),
            "{plus} vs {minus}"
        );
    }

    #[test]
    fn mismatch_is_analytic_off_the_essential_segment() {
        // Cauchy-Riemann quotient |d miss / d conj(s)| / |d miss / d s|
        let lo = VortexProfile::lamb_oseen();
        let sec = sector(2, 1.0);
        let f = |s: C64| -> C64 {
            let param = SpectralParameter::from_s(2, s);
            miss_distance_with(&lo, &sec, &param, &tight_opts()).unwrap()
        };
        for (a, b) in [(0.5, 0.5), (1.0, -0.3), (0.3, 1.4), (0.15, 0.85)] {
            let s = SpectralParameter::from_ab(2, a, b).s;
            let h = 5e-5 * s.norm().max(1.0);
            let dx = (f(s + h) - f(s - h)) / (2.0 * h);
            let dy = (f(s + C64::new(0.0, h)) - f(s - C64::new(0.0, h))) / (2.0 * h);
            let anti = 0.5 * (dx + C64::new(0.0, 1.0) * dy);
            let holo = 0.5 * (dx - C64::new(0.0, 1.0) * dy);
            assert!(
                anti.norm() < 1e-6 * holo.norm(),
                "a={a} b={b}: anti {anti:e} holo {holo:e}"
            );
        }
    }

    #[test]
    fn no_roots_off_axis_when_b_is_negative() {
        // the imaginary part of the base identity is sign-definite there,
        // so the mismatch cannot vanish
        let lo = VortexProfile::lamb_oseen();
        let sec = sector(2, 1.0);
        let miss = miss_distance(&lo, &sec, &SpectralParameter::from_ab(2, 1.0, -0.5)).unwrap();
        assert!(miss.norm() > 1e-3, "miss {miss}");
    }

    fn bump_eigenfunction(profile: &VortexProfile) -> EigenFunction {
        // smooth decaying non-eigenfunction sampled on the grid
        let phase = C64::new(1.0, 0.5);
        let r: Vec<f64> = profile.grid.nodes.clone();
        let u: Vec<C64> = r.iter().map(|&x| phase * x * (-0.5 * x * x).exp()).collect();
        let up: Vec<C64> = r
            .iter()
            .map(|&x| phase * (1.0 - x * x) * (-0.5 * x * x).exp())
            .collect();
        EigenFunction { r, u, u_prime: up }
    }

    #[test]
    fn imaginary_identity_matches_base_form() {
        // the explicit a-prefactored integrand is algebraically the
        // imaginary part of the plain quadratic form, eigenfunction or not
        let lo = VortexProfile::lamb_oseen();
        let sec = sector(2, 1.0);
        let param = SpectralParameter::from_ab(2, 0.4, 0.3);
        let ef = bump_eigenfunction(&lo);
        let base = howard_residual(&lo, &sec, &param, &ef).unwrap();
        let imag = howard_imag_part(&lo, &sec, &param, &ef).unwrap();
        assert!(
            (base.im - imag).abs() < 1e-12 * base.norm(),
            "Im {} vs {}",
            base.im,
            imag
        );
        // ... and it is a strong negative control for a random function
        let norm = weighted_norm_sq(&lo, &ef).unwrap();
        assert!(base.norm() > 1e-2 * norm, "base {base} norm {norm}");
    }

    #[test]
    fn axisymmetric_form_imaginary_part_tracks_s() {
        let lo = VortexProfile::lamb_oseen();
        let ef = bump_eigenfunction(&lo);
        let k = 1.3;
        let s = C64::new(1.0, 0.5);
        let form = axisymmetric_form(&lo, k, s, &ef).unwrap();
        // direct quadrature of k^2 Im(1/s^2) int Phi |u|^2 r dr
        let phi_weight: Vec<C64> = ef
            .r
            .iter()
            .zip(&ef.u)
            .map(|(&r, u)| C64::new(lo.phi(r) * u.norm_sqr(), 0.0))
            .collect();
        let phi_int = quad_on_subgrid(&lo, &ef.r, &phi_weight).unwrap().re;
        let expect = k * k * (1.0 / (s * s)).im * phi_int;
        assert!(
            (form.im - expect).abs() < 1e-12 * form.norm(),
            "Im {} vs {}",
            form.im,
            expect
        );
        // zero input is exactly zero
        let zero = EigenFunction {
            r: ef.r.clone(),
            u: vec![C64::new(0.0, 0.0); ef.r.len()],
            u_prime: vec![C64::new(0.0, 0.0); ef.r.len()],
        };
        assert_eq!(axisymmetric_form(&lo, k, s, &zero).unwrap().norm(), 0.0);
    }

    #[test]
    fn planar_form_imaginary_part_is_the_monotonicity_integral() {
        let lo = VortexProfile::lamb_oseen();
        let ef = bump_eigenfunction(&lo);
        let param = SpectralParameter::from_ab(3, 0.25, 0.6);
        let form = planar_form(&lo, 3, &param, &ef).unwrap();
        let weight: Vec<C64> = ef
            .r
            .iter()
            .zip(&ef.u)
            .map(|(&r, u)| {
                let gs = param.gamma_star(lo.omega(r));
                C64::new(r * lo.w_prime(r) * param.a / gs.norm_sqr() * u.norm_sqr(), 0.0)
            })
            .collect();
        let expect = quad_on_subgrid(&lo, &ef.r, &weight).unwrap().re;
        assert!(
            (form.im - expect).abs() < 1e-12 * form.norm(),
            "Im {} vs {}",
            form.im,
            expect
        );
        let norm = weighted_norm_sq(&lo, &ef).unwrap();
        assert!(form.norm() > norm, "planar form too small: {form}");
    }

    #[test]
    fn axisymmetric_mode_satisfies_the_radial_identity() {
        let lo = VortexProfile::lamb_oseen();
        let k = 1.0;
        let modes = find_axisymmetric_modes(&lo, k, 0.4, 0.7).unwrap();
        assert!(!modes.is_empty(), "no axisymmetric modes in (0.4, 0.7)");
        for mode in &modes {
            assert!(mode.miss_abs < 1e-10, "residual {}", mode.miss_abs);
            let ef = axisymmetric_eigenfunction(&lo, k, mode.b).unwrap();
            let form = axisymmetric_form(&lo, k, mode.s, &ef).unwrap();
            // positive-definite scale of the same integrand
            let scale: Vec<C64> = ef
                .r
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    let dstar = ef.u_prime[i] + ef.u[i] / r;
                    C64::new(
                        dstar.norm_sqr()
                            + k * k
                                * (1.0 + lo.phi(r) / (mode.b * mode.b))
                                * ef.u[i].norm_sqr(),
                        0.0,
                    )
                })
                .collect();
            let scale = quad_on_subgrid(&lo, &ef.r, &scale).unwrap().re;
            assert!(
                form.norm() < 1e-6 * scale,
                "omega={}: form {form} scale {scale}",
                mode.b
            );
        }
    }

    #[test]
    fn translation_mode_bifurcates_to_negative_frequency() {
        // the planar translation mode at m = 1 leaves the essential band
        // through b = 0 as the vertical wavenumber turns on
        let lo = VortexProfile::lamb_oseen();
        let modes = find_kelvin_modes(&lo, &sector(1, 0.1), -0.5, -1e-9).unwrap();
        assert!(!modes.is_empty(), "no m=1 mode below the band at k=0.1");
        assert!(modes.iter().all(|m| m.b < 0.0));
    }

    #[test]
    fn branches_agree_with_direct_outer_integration() {
        // integrate u directly (no substitution) from the outer radius and
        // compare the normalized derivative at the matching radius
        let lo = VortexProfile::lamb_oseen();
        let sec = sector(2, 1.0);
        let param = SpectralParameter::from_ab(2, 0.0, 1.3);
        let rm = matching_radius(&lo, Some(&param)).unwrap();
        let coeff = Coefficients::new(&lo, &sec).unwrap();
        let branch = shoot_from_infinity(&lo, &sec, &param, rm).unwrap();
        let k = 1.0;
        let big_r = coeff.outer_radius();
        let a1 = (4.0 * coeff.m2 + 3.0) / (8.0 * k);
        // direct seed: u = (1 + a1/r) e^{-k(r-rm)}/sqrt(r) up to scale; the
        // slope comparison below is scale invariant so the exponential
        // prefactor can be dropped from the seed value
        let u_r = (1.0 + a1 / big_r) / big_r.sqrt();
        let up_r = u_r * (-(a1 / (big_r * big_r)) / (1.0 + a1 / big_r) - k - 0.5 / big_r);
        let opts = OdeOptions {
            rtol: 1e-10,
            atol: 1e-290,
            ..OdeOptions::default()
        };
        let states = integrate_checkpoints(
            |r, y: &[C64; 2]| [y[1], coeff.u_second(r, y[0], y[1], &param)],
            big_r,
            &[rm],
            [C64::new(u_r, 0.0), C64::new(up_r, 0.0)],
            &opts,
        )
        .unwrap();
        let slope_direct = states[0][1] / states[0][0];
        let slope_sub = branch.u_prime[0] / branch.u[0];
        assert!(
            (slope_direct - slope_sub).norm() < 2e-4 * slope_sub.norm().max(1.0),
            "direct {slope_direct} vs substituted {slope_sub}"
        );
    }

    #[test]
    fn quotient_threshold_truth_table() {
        let ks = VortexProfile::ks();
        for m in 1..=4 {
            for kk in 1..=4 {
                let out = hg_criterion(&ks, &sector(m, kk as f64)).unwrap();
                let want = (m * m) as f64 <= 4.0 * (kk * kk) as f64;
                assert_eq!(out.holds, want, "ks m={m} k={kk}");
                if !out.holds {
                    assert!(out.r_star.is_finite());
                }
            }
        }
        let lo = VortexProfile::lamb_oseen();
        let out = hg_criterion(&lo, &sector(2, 1.0)).unwrap();
        assert!(!out.holds);
        let w1 = VortexProfile::w1(3, 1.3).unwrap();
        let out = hg_criterion(&w1, &sector(3, 1.3)).unwrap();
        assert!(out.holds);
        assert!(out.r_star.is_infinite());
    }

    #[test]
    fn b_lower_bound_nonnegative_for_reference_profiles() {
        for profile in [VortexProfile::lamb_oseen(), VortexProfile::ks()] {
            for m in [2, 3] {
                for b in [0.0, -1.0] {
                    let gap = verify_b_lower_bound(&profile, &sector(m, 1.0), b).unwrap();
                    assert!(gap > -1e-10, "{:?} m={m} b={b}: gap {gap}", profile.kind);
                }
            }
        }
    }

    #[test]
    fn rejects_invalid_sectors() {
        let lo = VortexProfile::lamb_oseen();
        assert!(Coefficients::new(&lo, &sector(0, 1.0)).is_err());
        assert!(Coefficients::new(&lo, &sector(-2, 1.0)).is_err());
        assert!(Coefficients::new(&lo, &sector(2, 0.0)).is_err());
    }
}
