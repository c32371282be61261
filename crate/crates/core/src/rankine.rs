//! Kelvin dispersion relation for the discontinuous Rankine column.
//!
//! The Rankine column rotates rigidly inside the core (`Omega = 1`, `W = 2`
//! for `r < 1`) and is irrotational outside (`Omega = 1/r^2`, `W = 0`). A
//! perturbation in the sector `(m, k)` is then an explicit Bessel mode on each
//! side of the interface: the axial velocity is `A I_m(beta r)` inside and
//! `B K_m(k r)` outside, where `beta^2 = k^2 (1 + 4/gamma^2)` and
//! `gamma = s + im` is the Doppler-shifted frequency seen from the rotating
//! core. Matching the two pieces across `r = 1` is possible exactly when a
//! scalar dispersion function `D(s)` vanishes, so the whole eigenvalue problem
//! in the sector collapses to root-finding for `D`.
//!
//! `D` is real on the axis `s = -imb` and its neutral zeros accumulate at the
//! band edge `b = 1` from both sides, interlaced with poles coming from the
//! zeros of `I_m(beta)`; the scan in [`find_rankine_roots`] resolves the
//! zero/pole pairs and keeps only certified zeros. The quadratic form in
//! [`rankine_identity`] is the sign argument that confines eigenvalues to the
//! imaginary axis: for `Re s != 0` it is strictly positive on any nonzero
//! mode, so off-axis zeros of `D` cannot exist.

use crate::contour::{self, WindingOptions};
use crate::error::CoreError;
use crate::grid::RadialGrid;
use crate::shooting::brent_real;
use crate::specfun::bessel_ik;
use crate::{C64, FourierSector, Result, SpectralParameter};

/// Doppler factor and interior radial wavenumber attached to a spectral point.
#[derive(Debug, Clone, Copy)]
pub struct DispersionPoint {
    /// Spectral parameter `s`.
    pub s: C64,
    /// Doppler factor `gamma = s + im` of the rigidly rotating core.
    pub gamma: C64,
    /// Square of the interior radial wavenumber, `k^2 (1 + 4/gamma^2)`.
    pub beta_sq: C64,
    /// Principal square root of `beta_sq` (`Re beta >= 0`).
    pub beta: C64,
}

impl DispersionPoint {
    /// Classifies `s` for a sector with `m != 0`, `k != 0`.
    ///
    /// Rejects the two removable-singular points `s = 0` and `s = -im` of the
    /// parametrization, and the band edges where the interior wavenumber
    /// vanishes (`gamma = -+ 2i`), since every formula below divides by
    /// `beta`.
    pub fn new(sector: &FourierSector, s: C64) -> Result<Self> {
        if sector.m == 0 {
            return Err(CoreError::InvalidArgument(
                "rankine dispersion needs m != 0".into(),
            ));
        }
        if sector.k == 0.0 {
            return Err(CoreError::InvalidArgument(
                "rankine dispersion needs k != 0".into(),
            ));
        }
        if s.norm() == 0.0 {
            return Err(CoreError::InvalidArgument(
                "rankine dispersion: s = 0 is excluded".into(),
            ));
        }
        let gamma = s + C64::new(0.0, sector.mf());
        if gamma.norm() == 0.0 {
            return Err(CoreError::InvalidArgument(
                "rankine dispersion: s = -im is excluded".into(),
            ));
        }
        let k = sector.k.abs();
        let beta_sq = k * k * (C64::new(1.0, 0.0) + 4.0 / (gamma * gamma));
        let beta = beta_sq.sqrt();
        if beta.norm() < 1e-8 {
            return Err(CoreError::InvalidArgument(format!(
                "rankine dispersion: interior wavenumber vanishes near s = {s} (band edge)",
            )));
        }
        Ok(Self {
            s,
            gamma,
            beta_sq,
            beta,
        })
    }
}

/// Dispersion function of the Rankine column in the sector `(m, k)`.
///
/// `D(s) = I_m'(beta)/(beta I_m(beta)) + 2im/(gamma beta^2)
///        - K_m'(k)/(k K_m(k))`,
/// with `gamma = s + im` and `beta` the principal root of
/// `k^2 (1 + 4/gamma^2)`. `D` depends on `beta` only through even
/// combinations, so the branch choice is immaterial. Zeros of `D` are exactly
/// the eigenvalues of the linearized operator in the sector; poles sit at the
/// zeros of `I_m(beta)` and are reported as errors only if they are hit so
/// closely that the evaluation overflows.
pub fn dispersion(sector: &FourierSector, s: C64) -> Result<C64> {
    let point = DispersionPoint::new(sector, s)?;
    let k = sector.k.abs();
    let mf = sector.mf();
    let inner = bessel_ik(mf, point.beta)?;
    let outer = bessel_ik(mf, C64::new(k, 0.0))?;
    let value = inner.i_derivative / (point.beta * inner.i_value)
        + C64::new(0.0, 2.0 * mf) / (point.gamma * point.beta_sq)
        - outer.k_derivative / (k * outer.k_value);
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(CoreError::InvalidArgument(format!(
            "rankine dispersion: pole of I_m at beta = {} (s = {s})",
            point.beta,
        )));
    }
    Ok(value)
}

/// Dispersion function restricted to the neutral axis `s = -imb`.
///
/// There `gamma = im(1 - b)` and `beta^2` is real, so `D` is real up to
/// rounding; the residual imaginary part is checked and discarded.
pub fn dispersion_axis(sector: &FourierSector, b: f64) -> Result<f64> {
    let s = SpectralParameter::from_ab(sector.m, 0.0, b).s;
    let value = dispersion(sector, s)?;
    if value.im.abs() > 1e-6 * (1.0 + value.re.abs()) {
        return Err(CoreError::InvalidArgument(format!(
            "rankine dispersion lost realness on the axis at b = {b}: {value}",
        )));
    }
    Ok(value.re)
}

/// A certified neutral root of the dispersion relation.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RankineRoot {
    /// Neutral frequency parameter; the eigenvalue is `s = -imb`.
    pub b: f64,
    /// `|D|` at the root, the certificate separating zeros from poles.
    pub dispersion_abs: f64,
}

/// Neutral roots on both sides of the band edge `b = 1`.
#[derive(Debug, Clone, Default)]
pub struct RankineRoots {
    /// Roots with `b < 1`, ascending.
    pub below: Vec<RankineRoot>,
    /// Roots with `b > 1`, ascending.
    pub above: Vec<RankineRoot>,
}

/// Scans the neutral axis for roots of `D` on `(1 - 2/|m|, 1) u (1, 1 + 2/|m|)`.
///
/// Outside that band `beta` is real and `I_m` has no zeros, so neutral roots
/// can only live inside it. Roots accumulate at `b = 1` paired with poles,
/// the pair separation shrinking like `|b - 1|^3`, so the scan uses a
/// log-spaced offset grid dense enough to split every pair with offset at
/// least `min_offset`; candidates are refined by bracketed iteration and kept
/// only when `|D|` at the result is below `certificate`, which rejects the
/// pole of each pair. Completeness below `min_offset` is not attempted.
pub fn find_rankine_roots_with(
    sector: &FourierSector,
    min_offset: f64,
    certificate: f64,
) -> Result<RankineRoots> {
    if sector.m == 0 || sector.k == 0.0 {
        return Err(CoreError::InvalidArgument(
            "rankine root scan needs m != 0 and k != 0".into(),
        ));
    }
    let edge = 2.0 / sector.m.unsigned_abs() as f64;
    if !(min_offset > 0.0 && min_offset < edge) {
        return Err(CoreError::InvalidArgument(format!(
            "rankine root scan: min_offset must lie in (0, {edge})",
        )));
    }
    let mut roots = RankineRoots::default();
    for above in [false, true] {
        let side = scan_axis_side(sector, above, min_offset, certificate)?;
        if above {
            roots.above = side;
        } else {
            roots.below = side;
        }
    }
    Ok(roots)
}

/// [`find_rankine_roots_with`] at the default offset floor `0.025` and
/// certificate `1e-8`; poles masquerading as roots carry `|D| > 1e8`, so the
/// certificate has orders of magnitude of slack on both sides.
pub fn find_rankine_roots(sector: &FourierSector) -> Result<RankineRoots> {
    find_rankine_roots_with(sector, 0.025, 1e-8)
}

fn scan_axis_side(
    sector: &FourierSector,
    above: bool,
    min_offset: f64,
    certificate: f64,
) -> Result<Vec<RankineRoot>> {
    let edge = 2.0 / sector.m.unsigned_abs() as f64;
    let delta_hi = edge * (1.0 - 1e-9);
    if min_offset >= delta_hi {
        return Ok(Vec::new());
    }
    let span = (delta_hi / min_offset).ln();
    // resolve zero/pole pairs: local spacing delta*span/n must stay below the
    // pair separation, which scales like the cube of the offset
    let n = ((span / (0.05 * min_offset * min_offset)).ceil() as usize).clamp(4_000, 400_000);
    let b_of = |delta: f64| if above { 1.0 + delta } else { 1.0 - delta };
    let mut prev: Option<(f64, f64)> = None;
    let mut found: Vec<RankineRoot> = Vec::new();
    for j in 0..=n {
        let t = j as f64 / n as f64;
        let delta = delta_hi * (-span * t).exp();
        let b = b_of(delta);
        let value = match dispersion_axis(sector, b) {
            Ok(v) => v,
            Err(_) => {
                prev = None;
                continue;
            }
        };
        if let Some((b_prev, v_prev)) = prev {
            if value == 0.0 || v_prev * value < 0.0 {
                let (lo, hi) = if b_prev < b { (b_prev, b) } else { (b, b_prev) };
                // tight tolerance: near the band edge |D'| at a zero grows like
                // the inverse pair separation, so position error shows up in
                // the certificate magnified by ~1e6
                if let Ok(root) = brent_real(|x| dispersion_axis(sector, x), lo, hi, 1e-15) {
                    if let Ok(at_root) = dispersion_axis(sector, root) {
                        if at_root.abs() <= certificate
                            && found
                                .last()
                                .map(|p| (p.b - root).abs() > 1e-9)
                                .unwrap_or(true)
                        {
                            found.push(RankineRoot {
                                b: root,
                                dispersion_abs: at_root.abs(),
                            });
                        }
                    }
                }
            }
        }
        prev = Some((b, value));
    }
    found.sort_by(|x, y| x.b.total_cmp(&y.b));
    Ok(found)
}

/// Winding number of `D` around the rectangle `a in [a_lo, a_hi]`,
/// `b in [b_lo, b_hi]` in the `(a, b)` parametrization of the sector.
///
/// The rectangle is mapped to the `s` plane through `s = m(a - ib)` and the
/// image is traversed counterclockwise. Inside any rectangle avoiding the
/// axis `a = 0` the function `D` is analytic and pole-free (its poles need
/// `beta^2 < 0`, which forces `gamma^2` real and hence `a = 0`), so the count
/// equals the number of eigenvalues enclosed.
pub fn dispersion_winding(
    sector: &FourierSector,
    a_range: (f64, f64),
    b_range: (f64, f64),
) -> Result<i64> {
    let mf = sector.mf();
    let re = (mf * a_range.0, mf * a_range.1);
    let im = (-mf * b_range.1, -mf * b_range.0);
    let corners = contour::rect_corners(
        re.0.min(re.1),
        re.0.max(re.1),
        im.0.min(im.1),
        im.0.max(im.1),
    );
    let opts = WindingOptions::default();
    contour::winding_number(|z| dispersion(sector, z), &corners, &opts)
}

/// The two-sided trace data of a Bessel mode at the interface `r = 1`.
///
/// Fields pair the limits from inside and outside the core. The two matching
/// residuals are relative defects of the interface conditions: the axial one
/// couples the axial-velocity derivatives through the Doppler factor, the
/// radial one couples the radial-velocity derivatives through the vortex
/// jump. Both are proportional to `D(s)`, so they vanish exactly at roots.
#[derive(Debug, Clone, Copy)]
pub struct InterfaceData {
    pub u_z: (C64, C64),
    pub u_z_prime: (C64, C64),
    pub u_r: (C64, C64),
    pub u_r_prime: (C64, C64),
    /// Relative defect of the axial-velocity matching condition.
    pub axial_residual: f64,
    /// Relative defect of the radial-velocity matching condition.
    pub radial_residual: f64,
}

/// Evaluates the canonical Bessel mode (`A = K_m(k)`, `B = I_m(beta)`) on
/// both sides of the interface and forms the matching residuals.
pub fn interface_data(sector: &FourierSector, s: C64) -> Result<InterfaceData> {
    let point = DispersionPoint::new(sector, s)?;
    let k = sector.k.abs();
    let mf = sector.mf();
    let inner = bessel_ik(mf, point.beta)?;
    let outer = bessel_ik(mf, C64::new(k, 0.0))?;
    let a_coef = outer.k_value;
    let b_coef = inner.i_value;
    let gamma = point.gamma;
    let beta = point.beta;
    let two_im = C64::new(0.0, 2.0 * mf);

    let uz_in = a_coef * inner.i_value;
    let uz_out = b_coef * outer.k_value;
    let duz_in = a_coef * beta * inner.i_derivative;
    let duz_out = b_coef * k * outer.k_derivative;

    let ik = C64::new(0.0, k);
    let ur_in = -(ik / point.beta_sq) * a_coef * (beta * inner.i_derivative + (two_im / gamma) * inner.i_value);
    let ur_out = -C64::new(0.0, 1.0) * b_coef * outer.k_derivative;
    // second derivatives from the modified Bessel equation
    let ipp = (1.0 + mf * mf / (beta * beta)) * inner.i_value - inner.i_derivative / beta;
    let kz = C64::new(k, 0.0);
    let kpp = (1.0 + mf * mf / (kz * kz)) * outer.k_value - outer.k_derivative / kz;
    let dur_in = -(ik / point.beta_sq)
        * a_coef
        * (point.beta_sq * ipp - (two_im / gamma) * inner.i_value + (two_im / gamma) * beta * inner.i_derivative);
    let dur_out = -C64::new(0.0, 1.0) * b_coef * k * kpp;

    let gamma_sq = gamma * gamma;
    let axial_rhs = gamma_sq / (gamma_sq + 4.0) * (duz_in + (two_im / gamma) * uz_in);
    let axial_scale = duz_in.norm().max(duz_out.norm()).max(uz_in.norm());
    let radial_rhs = dur_in - (two_im / gamma) * ur_in;
    let radial_scale = dur_in.norm().max(dur_out.norm()).max(ur_in.norm());
    Ok(InterfaceData {
        u_z: (uz_in, uz_out),
        u_z_prime: (duz_in, duz_out),
        u_r: (ur_in, ur_out),
        u_r_prime: (dur_in, dur_out),
        axial_residual: (duz_out - axial_rhs).norm() / axial_scale,
        radial_residual: (dur_out - radial_rhs).norm() / radial_scale,
    })
}

/// Radial-velocity samples of the canonical Bessel mode on a grid.
#[derive(Debug, Clone)]
pub struct RankineMode {
    pub s: C64,
    pub u_r: Vec<C64>,
    pub u_r_prime: Vec<C64>,
}

/// Samples the canonical Bessel mode (`A = K_m(k)` inside, `B = I_m(beta)`
/// outside, which makes the axial velocity continuous) on the grid nodes.
///
/// Inside the core `u_r = -(ik/beta^2) A (beta I_m'(beta r)
/// + (2im/(gamma r)) I_m(beta r))`; outside `u_r = -i B K_m'(k r)`. At a
/// root of `D` the two pieces join continuously; elsewhere the interface jump
/// of `u_r` is the matching defect.
pub fn rankine_mode(sector: &FourierSector, s: C64, grid: &RadialGrid) -> Result<RankineMode> {
    let point = DispersionPoint::new(sector, s)?;
    let k = sector.k.abs();
    let mf = sector.mf();
    let inner0 = bessel_ik(mf, point.beta)?;
    let outer0 = bessel_ik(mf, C64::new(k, 0.0))?;
    let a_coef = outer0.k_value;
    let b_coef = inner0.i_value;
    let gamma = point.gamma;
    let beta = point.beta;
    let two_im = C64::new(0.0, 2.0 * mf);
    let ik = C64::new(0.0, k);

    let mut u_r = Vec::with_capacity(grid.len());
    let mut u_r_prime = Vec::with_capacity(grid.len());
    for &r in &grid.nodes {
        if k * r > 650.0 {
            // the outer tail decays like e^{-kr}; below 1e-280 it is zero
            u_r.push(C64::new(0.0, 0.0));
            u_r_prime.push(C64::new(0.0, 0.0));
        } else if r < 1.0 {
            let e = bessel_ik(mf, beta * r)?;
            let val = -(ik / point.beta_sq)
                * a_coef
                * (beta * e.i_derivative + (two_im / (gamma * r)) * e.i_value);
            let der = -(ik / point.beta_sq)
                * a_coef
                * (point.beta_sq * ((1.0 + mf * mf / (beta * beta * r * r)) * e.i_value - e.i_derivative / (beta * r))
                    + (two_im / gamma) * (beta * e.i_derivative / r - e.i_value / (r * r)));
            u_r.push(val);
            u_r_prime.push(der);
        } else {
            let e = bessel_ik(mf, C64::new(k * r, 0.0))?;
            let kr = C64::new(k * r, 0.0);
            let kpp = (1.0 + mf * mf / (kr * kr)) * e.k_value - e.k_derivative / kr;
            u_r.push(-C64::new(0.0, 1.0) * b_coef * e.k_derivative);
            u_r_prime.push(-C64::new(0.0, 1.0) * b_coef * k * kpp);
        }
    }
    Ok(RankineMode {
        s,
        u_r,
        u_r_prime,
    })
}

/// Quadratic form whose sign confines Rankine eigenvalues to the axis.
///
/// For radial-velocity samples `u` of the Bessel mode at spectral point
/// `s = m(a - ib)` this evaluates
///
/// `a * [ int (A |u' + u/r|^2 + |u|^2) r dr
///        + int_0^1 (4k^2/m^2) A / ((1-b)^2 + a^2) |u|^2 r dr ]`
///
/// with `A(r) = r^2/(m^2 + k^2 r^2)`. At an eigenvalue the form vanishes;
/// since both integrands are nonnegative, a nonzero mode with `a != 0` makes
/// it strictly positive, which is the contradiction that rules out unstable
/// modes. The samples must agree with the canonical Bessel mode up to one
/// overall complex scale; a scale mismatch between the inside and outside
/// pieces (a violated interface matching) is rejected.
pub fn rankine_identity(
    sector: &FourierSector,
    s: C64,
    grid: &RadialGrid,
    u_r: &[C64],
    u_r_prime: &[C64],
) -> Result<f64> {
    if u_r.len() != grid.len() || u_r_prime.len() != grid.len() {
        return Err(CoreError::InvalidArgument(
            "rankine identity: sample lengths must match the grid".into(),
        ));
    }
    let reference = rankine_mode(sector, s, grid)?;
    // fit one complex scale per side of the interface
    let mut num = [C64::new(0.0, 0.0); 2];
    let mut den = [0.0f64; 2];
    for i in 0..grid.len() {
        let side = usize::from(grid.nodes[i] >= 1.0);
        num[side] += reference.u_r[i].conj() * u_r[i];
        den[side] += reference.u_r[i].norm_sqr();
    }
    if den[0] == 0.0 || den[1] == 0.0 {
        return Err(CoreError::InvalidArgument(
            "rankine identity: grid must straddle the interface r = 1".into(),
        ));
    }
    let scales = [num[0] / den[0], num[1] / den[1]];
    let overall = scales[0].norm().max(scales[1].norm());
    if (scales[0] - scales[1]).norm() > 1e-8 * overall {
        return Err(CoreError::InvalidArgument(format!(
            "rankine identity: interface matching of the mode pieces violated \
             (scales {} vs {})",
            scales[0], scales[1],
        )));
    }
    let mut worst = 0.0f64;
    let mut amp = 0.0f64;
    for i in 0..grid.len() {
        let side = usize::from(grid.nodes[i] >= 1.0);
        worst = worst.max((u_r[i] - scales[side] * reference.u_r[i]).norm());
        amp = amp.max(reference.u_r[i].norm() * overall);
    }
    if worst > 1e-8 * amp {
        return Err(CoreError::InvalidArgument(
            "rankine identity: samples do not match the Bessel mode".into(),
        ));
    }

    let param = SpectralParameter::from_s(sector.m, s);
    let mf = sector.mf();
    let k = sector.k.abs();
    let denom = (1.0 - param.b) * (1.0 - param.b) + param.a * param.a;
    let mut integrand = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let r = grid.nodes[i];
        let coef_a = r * r / (mf * mf + k * k * r * r);
        let star = u_r_prime[i] + u_r[i] / r;
        let mut val = coef_a * star.norm_sqr() + u_r[i].norm_sqr();
        if r < 1.0 {
            val += (4.0 * k * k / (mf * mf)) * coef_a * u_r[i].norm_sqr() / denom;
        }
        integrand.push(val);
    }
    Ok(param.a * grid.integrate(&integrand))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m2k1() -> FourierSector {
        FourierSector::new(2, 1.0)
    }

    #[test]
    fn axis_value_matches_reference() {
        let v = dispersion_axis(&m2k1(), 1.3).unwrap();
        assert_relative_eq!(v, 3.0526194224142657, max_relative = 1e-10);
        // realness of the full complex evaluation on the axis
        let full = dispersion(&m2k1(), C64::new(0.0, -2.0 * 1.3)).unwrap();
        assert!(full.im.abs() <= 1e-10 * full.re.abs());
    }

    #[test]
    fn axis_spots_match_reference() {
        let sector = m2k1();
        for (b, want) in [
            (-0.7, 7.392028286150042),
            (0.5, 0.5486945284905855),
            (1.6, 3.293671878279908),
        ] {
            assert_relative_eq!(
                dispersion_axis(&sector, b).unwrap(),
                want,
                max_relative = 1e-9
            );
        }
        assert_relative_eq!(
            dispersion_axis(&FourierSector::new(3, 2.0), 0.8).unwrap(),
            8.355560646919969,
            max_relative = 1e-9
        );
    }

    #[test]
    fn complex_spot_values_match_reference() {
        let sector = m2k1();
        for (s, want) in [
            (
                C64::new(0.5, -2.0),
                C64::new(2.6164826330149533, 0.47058823529411765),
            ),
            (
                C64::new(-0.3, 1.7),
                C64::new(6.8165667468680629, -0.40283950659510506),
            ),
            (
                C64::new(0.1, -4.1),
                C64::new(3.561734242950363, 0.023484589928839389),
            ),
        ] {
            let got = dispersion(&sector, s).unwrap();
            assert_relative_eq!(got.re, want.re, max_relative = 1e-12);
            assert_relative_eq!(got.im, want.im, max_relative = 1e-12);
        }
    }

    #[test]
    fn rejects_singular_spectral_points() {
        let sector = m2k1();
        assert!(dispersion(&sector, C64::new(0.0, 0.0)).is_err());
        assert!(dispersion(&sector, C64::new(0.0, -2.0)).is_err());
        // band edge gamma = -2i, where the interior wavenumber vanishes
        assert!(dispersion(&sector, C64::new(0.0, -4.0)).is_err());
        assert!(dispersion(&FourierSector::new(0, 1.0), C64::new(0.0, -1.0)).is_err());
        assert!(dispersion(&FourierSector::new(2, 0.0), C64::new(0.0, -1.0)).is_err());
    }

    #[test]
    fn neutral_roots_match_reference() {
        let roots = find_rankine_roots(&m2k1()).unwrap();
        assert!(roots.below.len() >= 3);
        assert!(roots.above.len() >= 3);
        let has = |list: &[RankineRoot], b: f64| list.iter().any(|r| (r.b - b).abs() < 1e-9);
        assert!(has(&roots.below, 0.440013888171776));
        assert!(has(&roots.below, 0.81223159311631299));
        assert!(has(&roots.above, 1.1886851473321751));
        assert!(has(&roots.above, 1.1173532986021046));
        assert!(has(&roots.above, 1.0854967225539531));
        for r in roots.below.iter().chain(&roots.above) {
            assert!(r.dispersion_abs <= 1e-8);
            assert!((r.b - 1.0).abs() <= 1.0);
            assert!(r.b > 0.0);
        }
        // gaps between consecutive roots shrink toward the band edge
        for w in roots.below.windows(3) {
            assert!(w[1].b - w[0].b > w[2].b - w[1].b);
        }
        for w in roots.above.windows(3) {
            assert!(w[1].b - w[0].b < w[2].b - w[1].b);
        }
    }

    #[test]
    fn no_neutral_roots_at_or_below_zero() {
        // min |D| on b in [-3, 0] stays above 5 for m = 2 and above 6 for
        // m = 3, so the axis scan interval (1 - 2/|m|, 1) misses nothing
        for (m, floor) in [(2, 5.0), (3, 6.0)] {
            let sector = FourierSector::new(m, 1.0);
            for j in 0..=600 {
                let b = -3.0 + 3.0 * j as f64 / 600.0 - 1e-9;
                let v = dispersion_axis(&sector, b).unwrap();
                assert!(v.abs() > floor * 0.9, "small |D| at b = {b}: {v}");
            }
        }
    }

    #[test]
    fn interface_matching_closes_at_roots() {
        let sector = m2k1();
        let b_root = 1.1886851473321751;
        let data = interface_data(&sector, C64::new(0.0, -2.0 * b_root)).unwrap();
        assert!(data.axial_residual <= 1e-10);
        assert!(data.radial_residual <= 1e-10);
        // axial continuity holds by construction of (A, B)
        assert!((data.u_z.0 - data.u_z.1).norm() <= 1e-14 * data.u_z.0.norm());
        // the potential-flow relation between the outer traces is an identity
        let ik = C64::new(0.0, sector.k);
        assert!((data.u_z_prime.1 - ik * data.u_r.1).norm() <= 1e-14 * data.u_z_prime.1.norm());
        // away from roots the radial matching is violated at order |D|
        let off = interface_data(&sector, C64::new(0.0, -2.0 * 1.29)).unwrap();
        assert!(off.radial_residual > 1e-4);
    }

    #[test]
    fn identity_vanishes_on_axis_and_is_positive_off_axis() {
        let sector = m2k1();
        let grid = RadialGrid::standard(200);
        let b_root = 1.1886851473321751;
        let s = C64::new(0.0, -2.0 * b_root);
        let mode = rankine_mode(&sector, s, &grid).unwrap();
        let norm = grid.norm_sq(&mode.u_r);
        let value = rankine_identity(&sector, s, &grid, &mode.u_r, &mode.u_r_prime).unwrap();
        assert!(value.abs() <= 1e-6 * norm);

        let s_off = SpectralParameter::from_ab(sector.m, 0.1, 0.8).s;
        let mode_off = rankine_mode(&sector, s_off, &grid).unwrap();
        let value_off =
            rankine_identity(&sector, s_off, &grid, &mode_off.u_r, &mode_off.u_r_prime).unwrap();
        assert!(value_off > 0.0);

        // overall rescaling is fine, a one-sided rescale is a matching violation
        let scaled: Vec<C64> = mode.u_r.iter().map(|v| v * C64::new(0.3, 0.4)).collect();
        let scaled_p: Vec<C64> = mode.u_r_prime.iter().map(|v| v * C64::new(0.3, 0.4)).collect();
        assert!(rankine_identity(&sector, s, &grid, &scaled, &scaled_p).is_ok());
        let mut broken = mode.u_r.clone();
        for (i, &r) in grid.nodes.iter().enumerate() {
            if r >= 1.0 {
                broken[i] *= 1.0001;
            }
        }
        assert!(rankine_identity(&sector, s, &grid, &broken, &mode.u_r_prime).is_err());
    }

    #[test]
    fn winding_vanishes_on_reference_rectangles() {
        for (m, k) in [(1, 1.0), (2, 1.0), (3, 2.0)] {
            let sector = FourierSector::new(m, k);
            let w = dispersion_winding(&sector, (1e-2, 3.0), (0.0, 1.0)).unwrap();
            assert_eq!(w, 0, "unexpected winding for m = {m}, k = {k}");
        }
    }
}
