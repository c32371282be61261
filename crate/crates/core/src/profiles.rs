//! Columnar vortex profiles and the monotone-function representation.
//!
//! A profile is the pair of angular velocity `Omega(r)` and axial vorticity
//! `W(r)`, normalized to `Omega(0) = 1`, `W(0) = 2` and related by
//! `W = r Omega' + 2 Omega`. Derived fields: `Phi = 2 Omega W`,
//! `J = Phi / Omega'^2`, circulation `Gamma = int_0^inf W r dr`, and the
//! tail coefficient `ell_inf = lim r^4 W`.
//!
//! The alternative description is `Q = (1 + J)^{-1/2}`, an increasing
//! function from 0 to 1; a profile is rebuilt from `Q` through
//! `Omega(r) = exp(-int_0^r 4 ds/(s + sqrt(s^2 + 4 J(s))))` and the closed
//! expressions for `W`, `W'` below. Mollification, convex homotopy, and
//! weighted Lipschitz ratios operate in the `Q` description.

use std::sync::Arc;

use serde::Serialize;

use crate::grid::RadialGrid;
use crate::{CoreError, Result};

/// How a profile was built.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// Uniform core vorticity, discontinuous at the core edge.
    ClosedFormRankine,
    /// Algebraic profile `Omega = 1/(1+r^2)`.
    ClosedFormKs,
    /// Gaussian vorticity `W = 2 exp(-r^2)`.
    ClosedFormLambOseen,
    /// Two-parameter reference family indexed by a wavenumber pair.
    ReferenceW1 { m: u32, k: f64 },
    /// Reconstructed from a monotone `Q` function.
    FromQ,
}

impl ProfileKind {
    fn tag(&self) -> &'static str {
        match self {
            ProfileKind::ClosedFormRankine => "closed_form_rankine",
            ProfileKind::ClosedFormKs => "closed_form_ks",
            ProfileKind::ClosedFormLambOseen => "closed_form_lamb_oseen",
            ProfileKind::ReferenceW1 { .. } => "reference_w1",
            ProfileKind::FromQ => "from_q",
        }
    }
}

/// Monotone profile description: a value and a derivative on `r >= 0`.
#[derive(Clone)]
pub struct QFunction {
    value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    derivative: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for QFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QFunction").finish_non_exhaustive()
    }
}

impl QFunction {
    pub fn from_closures(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        QFunction {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.value)(r)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        (self.derivative)(r)
    }

    /// Scale-invariant seminorm `sup r |Q'(r)|`, sampled on the grid.
    pub fn seminorm(&self, grid: &RadialGrid) -> f64 {
        grid.nodes
            .iter()
            .map(|&r| (r * self.derivative(r)).abs())
            .fold(0.0, f64::max)
    }

    /// Checks monotonicity, range, and endpoint decay on the grid.
    ///
    /// The mathematical range is the open interval (0, 1), but a rapidly
    /// saturating description rounds to exactly 1 in the far tail, with a
    /// derivative that underflows to 0 there; both are accepted once `Q` is
    /// within rounding distance of its limit.
    pub fn check_admissible(&self, grid: &RadialGrid) -> Result<f64> {
        let mut seminorm: f64 = 0.0;
        for &r in &grid.nodes {
            let q = self.eval(r);
            let qp = self.derivative(r);
            if !(q > 0.0 && q <= 1.0) {
                return Err(CoreError::ProfileNotAdmissible(format!(
                    "Q({r}) = {q} outside (0, 1)"
                )));
            }
            let saturated = q >= 1.0 - 1e-12;
            if qp < 0.0 || (qp == 0.0 && !saturated) {
                return Err(CoreError::ProfileNotAdmissible(format!(
                    "Q'({r}) = {qp} not positive"
                )));
            }
            seminorm = seminorm.max(r * qp);
        }
        let r0 = 1e-6;
        if self.eval(r0) > 1e-2 {
            return Err(CoreError::ProfileNotAdmissible(
                "Q does not vanish at the axis".into(),
            ));
        }
        let r_last = *grid.nodes.last().unwrap();
        if r_last * self.derivative(r_last) > 0.2 * seminorm.max(1e-12) {
            return Err(CoreError::ProfileNotAdmissible(
                "r Q' does not decay at the outer end".into(),
            ));
        }
        Ok(seminorm)
    }
}

#[derive(Clone)]
enum Backend {
    Rankine,
    Ks,
    LambOseen,
    W1 { m2: f64, fk2: f64 }, // m^2 and 4 k^2
    Table(ReconstructedTable),
}

/// Angular-velocity table for a reconstructed profile: cumulative values of
/// `log Omega` at checkpoints, refined adaptively in between.
#[derive(Clone)]
struct ReconstructedTable {
    q: QFunction,
    checkpoints: Vec<f64>,
    log_omega: Vec<f64>,
}

impl ReconstructedTable {
    /// Integrand of `-log Omega`, in the form stable as `r -> 0`.
    fn integrand(&self, s: f64) -> f64 {
        let q = self.q.eval(s);
        let den = s * q + (s * s * q * q + 4.0 - 4.0 * q * q).sqrt();
        4.0 * q / den
    }

    fn build(q: QFunction, grid: &RadialGrid) -> Result<Self> {
        let mut table = ReconstructedTable {
            q,
            checkpoints: vec![0.0],
            log_omega: vec![0.0],
        };
        let mut acc = 0.0;
        let mut prev = 0.0;
        for &r in &grid.nodes {
            let (seg, _) = crate::quad::adaptive(|s| table.integrand(s), prev, r, 1e-13, 400)?;
            acc -= seg;
            table.checkpoints.push(r);
            table.log_omega.push(acc);
            prev = r;
        }
        Ok(table)
    }

    fn log_omega_at(&self, r: f64) -> Result<f64> {
        let idx = match self
            .checkpoints
            .binary_search_by(|c| c.partial_cmp(&r).unwrap())
        {
            Ok(i) => return Ok(self.log_omega[i]),
            Err(i) => i - 1, // checkpoints[0] = 0 <= r always
        };
        let idx = idx.min(self.checkpoints.len() - 1);
        let (seg, _) =
            crate::quad::adaptive(|s| self.integrand(s), self.checkpoints[idx], r, 1e-13, 400)?;
        Ok(self.log_omega[idx] - seg)
    }
}

/// A columnar vortex: evaluation of all radial coefficient functions.
#[derive(Clone)]
pub struct VortexProfile {
    pub kind: ProfileKind,
    backend: Backend,
    pub grid: RadialGrid,
    /// Total circulation `int_0^inf W r dr`.
    pub circulation: f64,
    /// Tail coefficient: `r^4 W -> ell_inf`.
    pub ell_inf: f64,
    /// Second derivative of the vorticity at the axis.
    pub w_second_origin: f64,
    /// Set when `W` is discontinuous, so `Q`-based operations do not apply.
    pub non_class_w: bool,
}

impl std::fmt::Debug for VortexProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VortexProfile")
            .field("kind", &self.kind)
            .field("circulation", &self.circulation)
            .field("ell_inf", &self.ell_inf)
            .finish_non_exhaustive()
    }
}

/// `1 - (1+x) e^{-x}`, series-protected against cancellation at small `x`.
fn one_minus_1px_emx(x: f64) -> f64 {
    if x < 0.05 {
        // sum_{n>=2} (-1)^n (n-1)/n! x^n
        let mut term = x * x / 2.0; // n = 2
        let mut sum = term;
        let mut fact = 2.0;
        for n in 3..=12u32 {
            fact *= n as f64;
            term = -term;
            let coeff = (n - 1) as f64 / fact * x.powi(n as i32);
            sum += if n % 2 == 0 { coeff } else { -coeff };
            let _ = term;
        }
        sum
    } else {
        1.0 - (1.0 + x) * (-x).exp()
    }
}

impl VortexProfile {
    pub fn rankine() -> Self {
        VortexProfile {
            kind: ProfileKind::ClosedFormRankine,
            backend: Backend::Rankine,
            grid: RadialGrid::standard(400),
            circulation: 1.0,
            ell_inf: 0.0,
            w_second_origin: 0.0,
            non_class_w: true,
        }
    }

    pub fn ks() -> Self {
        VortexProfile {
            kind: ProfileKind::ClosedFormKs,
            backend: Backend::Ks,
            grid: RadialGrid::standard(400),
            circulation: 1.0,
            ell_inf: 2.0,
            w_second_origin: -8.0,
            non_class_w: false,
        }
    }

    pub fn lamb_oseen() -> Self {
        VortexProfile {
            kind: ProfileKind::ClosedFormLambOseen,
            backend: Backend::LambOseen,
            grid: RadialGrid::standard(400),
            circulation: 1.0,
            ell_inf: 0.0,
            w_second_origin: -4.0,
            non_class_w: false,
        }
    }

    /// Reference algebraic family; at `(m, k)` its stability quotient is the
    /// constant-threshold case for the azimuthal/axial wavenumber pair.
    pub fn w1(m: u32, k: f64) -> Result<Self> {
        if m == 0 || !(k > 0.0) {
            return Err(CoreError::InvalidArgument(
                "w1 profile needs m >= 1 and k > 0".into(),
            ));
        }
        let m2 = (m * m) as f64;
        let fk2 = 4.0 * k * k;
        Ok(VortexProfile {
            kind: ProfileKind::ReferenceW1 { m, k },
            backend: Backend::W1 { m2, fk2 },
            grid: RadialGrid::standard(400),
            circulation: m2 / fk2,
            ell_inf: 2.0 * m2 * m2 / (fk2 * fk2),
            w_second_origin: -8.0 * fk2 / m2,
            non_class_w: false,
        })
    }

    /// Rebuild a profile from an admissible monotone description.
    pub fn from_q(q: QFunction, grid: RadialGrid) -> Result<Self> {
        q.check_admissible(&grid)?;
        let table = ReconstructedTable::build(q, &grid)?;
        let r_last = *grid.nodes.last().unwrap();
        let mut profile = VortexProfile {
            kind: ProfileKind::FromQ,
            backend: Backend::Table(table),
            grid,
            circulation: 0.0,
            ell_inf: 0.0,
            w_second_origin: 0.0,
            non_class_w: false,
        };
        // circulation by grid quadrature plus an algebraic-tail correction
        let samples: Vec<f64> = profile
            .grid
            .nodes
            .iter()
            .map(|&r| profile.w(r))
            .collect();
        let bulk = profile.grid.integrate(&samples);
        let w_tail = profile.w(r_last);
        let ell = w_tail * r_last.powi(4);
        profile.ell_inf = if ell.abs() < 1e-8 { 0.0 } else { ell };
        profile.circulation = bulk + ell / (2.0 * r_last * r_last);
        profile.w_second_origin = -8.0 * profile.q_derivative_origin();
        Ok(profile)
    }

    fn q_derivative_origin(&self) -> f64 {
        match &self.backend {
            Backend::Table(t) => {
                // one-sided limit of Q'(r)
                let h = 1e-4;
                (4.0 * t.q.eval(h) - t.q.eval(2.0 * h)) / (2.0 * h)
            }
            _ => -self.w_second_origin / 8.0,
        }
    }

    /// Angular velocity `Omega(r)`; `Omega(0) = 1`.
    pub fn omega(&self, r: f64) -> f64 {
        match &self.backend {
            Backend::Rankine => {
                if r <= 1.0 {
                    1.0
                } else {
                    1.0 / (r * r)
                }
            }
            Backend::Ks => 1.0 / (1.0 + r * r),
            Backend::LambOseen => {
                let x = r * r;
                if x < 1e-6 {
                    1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0
                } else {
                    -(-x).exp_m1() / x
                }
            }
            Backend::W1 { m2, fk2 } => m2 / (m2 + fk2 * r * r),
            Backend::Table(t) => t.log_omega_at(r).map(f64::exp).unwrap_or(f64::NAN),
        }
    }

    /// Axial vorticity `W(r)`; `W(0) = 2`.
    pub fn w(&self, r: f64) -> f64 {
        match &self.backend {
            Backend::Rankine => {
                if r <= 1.0 {
                    2.0
                } else {
                    0.0
                }
            }
            Backend::Ks => {
                let d = 1.0 + r * r;
                2.0 / (d * d)
            }
            Backend::LambOseen => 2.0 * (-r * r).exp(),
            Backend::W1 { m2, fk2 } => {
                let d = m2 + fk2 * r * r;
                2.0 * m2 * m2 / (d * d)
            }
            Backend::Table(_) => {
                let j = self.j_of(r);
                let om = self.omega(r);
                om * (2.0 - 4.0 * r / (r + (r * r + 4.0 * j).sqrt()))
            }
        }
    }

    /// Radial derivative `W'(r)`.
    pub fn w_prime(&self, r: f64) -> f64 {
        match &self.backend {
            Backend::Rankine => 0.0,
            Backend::Ks => {
                let d = 1.0 + r * r;
                -8.0 * r / (d * d * d)
            }
            Backend::LambOseen => -4.0 * r * (-r * r).exp(),
            Backend::W1 { m2, fk2 } => {
                let d = m2 + fk2 * r * r;
                -8.0 * m2 * m2 * fk2 * r / (d * d * d)
            }
            Backend::Table(_) => {
                let j = self.j_of(r);
                let jp = self.j_prime(r);
                let om = self.omega(r);
                let root = (r * r + 4.0 * j).sqrt();
                let den = r + root;
                8.0 * om / (den * den) * (r - (r * r + 6.0 * j) / root + r * jp / root)
            }
        }
    }

    /// `Omega'(r) = (W - 2 Omega)/r`, in cancellation-free closed forms.
    pub fn omega_prime(&self, r: f64) -> f64 {
        match &self.backend {
            Backend::Rankine => {
                if r <= 1.0 {
                    0.0
                } else {
                    -2.0 / (r * r * r)
                }
            }
            Backend::Ks => {
                let d = 1.0 + r * r;
                -2.0 * r / (d * d)
            }
            Backend::LambOseen => {
                if r == 0.0 {
                    0.0
                } else {
                    -2.0 * one_minus_1px_emx(r * r) / (r * r * r)
                }
            }
            Backend::W1 { m2, fk2 } => {
                let d = m2 + fk2 * r * r;
                -2.0 * m2 * fk2 * r / (d * d)
            }
            Backend::Table(_) => {
                let j = self.j_of(r);
                let om = self.omega(r);
                -4.0 * om / (r + (r * r + 4.0 * j).sqrt())
            }
        }
    }

    /// `Omega''(r) = (W' - 3 Omega')/r`.
    pub fn omega_second(&self, r: f64) -> f64 {
        match &self.backend {
            Backend::Rankine => {
                if r <= 1.0 {
                    0.0
                } else {
                    6.0 / r.powi(4)
                }
            }
            Backend::Ks => {
                let d = 1.0 + r * r;
                (6.0 * r * r - 2.0) / (d * d * d)
            }
            Backend::LambOseen => {
                -4.0 * (-r * r).exp() + 6.0 * one_minus_1px_emx(r * r) / r.powi(4)
            }
            Backend::W1 { m2, fk2 } => {
                let d = m2 + fk2 * r * r;
                (-2.0 * m2 * fk2 * d + 8.0 * m2 * fk2 * fk2 * r * r) / (d * d * d)
            }
            Backend::Table(_) => {
                if r < 1e-6 {
                    self.w_second_origin / 4.0
                } else {
                    (self.w_prime(r) - 3.0 * self.omega_prime(r)) / r
                }
            }
        }
    }

    /// Rayleigh-type function `Phi = 2 Omega W`.
    pub fn phi(&self, r: f64) -> f64 {
        2.0 * self.omega(r) * self.w(r)
    }

    /// Stability quotient `J = Phi / Omega'^2`.
    ///
    /// For the uniform-core profile this is infinite inside the core
    /// (`Omega' = 0`) and zero outside (`W = 0`).
    pub fn j_of(&self, r: f64) -> f64 {
        match &self.backend {
            Backend::Rankine => {
                if r <= 1.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            Backend::Ks => 1.0 + 1.0 / (r * r),
            Backend::LambOseen => {
                let x = r * r;
                let den = one_minus_1px_emx(x);
                let num = (-x).exp() * (-(-x).exp_m1());
                x * x * num / (den * den)
            }
            Backend::W1 { m2, fk2 } => m2 / fk2 * (1.0 + m2 / (fk2 * r * r)),
            Backend::Table(t) => {
                let q = t.q.eval(r);
                1.0 / (q * q) - 1.0
            }
        }
    }

    /// Radial derivative `J'(r)`.
    pub fn j_prime(&self, r: f64) -> f64 {
        match &self.backend {
            Backend::Rankine => 0.0,
            Backend::Ks => -2.0 / (r * r * r),
            Backend::LambOseen => {
                let x = r * r;
                let den = one_minus_1px_emx(x);
                let u = -(-x).exp_m1();
                // 2 u^2 - x u - x^2 (1 - u) equals 2 - x - (4 - x + x^2) e^{-x} + 2 e^{-2x}
                let num = 2.0 * u * u - x * u - x * x * (1.0 - u);
                2.0 * r * r * r * (-x).exp() * num / (den * den * den)
            }
            Backend::W1 { m2, fk2 } => -2.0 * m2 * m2 / (fk2 * fk2 * r * r * r),
            Backend::Table(t) => {
                let q = t.q.eval(r);
                -2.0 * t.q.derivative(r) / (q * q * q)
            }
        }
    }

    /// Logarithmic derivative `J'/J`, in forms that survive the far tail.
    ///
    /// For the rapidly decaying profiles `J` itself underflows to zero long
    /// before the outer grid nodes, so a sign check of `J'` must work with
    /// the ratio: `J'/J = Omega'/Omega + W'/W - 2 Omega''/Omega'`, where each
    /// quotient has a representable closed form at every radius. `J < 0`
    /// monotonicity is equivalent to a negative value here since `J > 0`.
    pub fn j_log_derivative(&self, r: f64) -> f64 {
        match &self.backend {
            Backend::Rankine => f64::NAN,
            Backend::Ks => -2.0 / (r * (r * r + 1.0)),
            Backend::LambOseen => {
                let x = r * r;
                let e = (-x).exp();
                let g = one_minus_1px_emx(x);
                let one_minus_e = -(-x).exp_m1();
                -2.0 * g / (r * one_minus_e) - 2.0 * r + 6.0 / r - 4.0 * e * r * r * r / g
            }
            Backend::W1 { m2, fk2 } => {
                let c = m2 / fk2;
                -2.0 * c / (r * r * r + c * r)
            }
            Backend::Table(t) => {
                let q = t.q.eval(r);
                -2.0 * t.q.derivative(r) / (q * (1.0 - q) * (1.0 + q))
            }
        }
    }

    /// Monotone description `Q = (1 + J)^{-1/2}`.
    pub fn q_of(&self, r: f64) -> f64 {
        match &self.backend {
            Backend::Table(t) => t.q.eval(r),
            _ => {
                let j = self.j_of(r);
                if j.is_infinite() {
                    0.0
                } else {
                    1.0 / (1.0 + j).sqrt()
                }
            }
        }
    }

    /// Derivative `Q'(r) = -J'/(2 (1+J)^{3/2})`.
    pub fn q_prime(&self, r: f64) -> f64 {
        match &self.backend {
            Backend::Table(t) => t.q.derivative(r),
            _ => {
                let j = self.j_of(r);
                if j.is_infinite() {
                    0.0
                } else {
                    -self.j_prime(r) / (2.0 * (1.0 + j).powf(1.5))
                }
            }
        }
    }

    /// The profile's own `Q` description as a standalone function.
    pub fn q_function(&self) -> Result<QFunction> {
        if self.non_class_w {
            return Err(CoreError::ProfileNotAdmissible(
                "discontinuous vorticity has no admissible Q description".into(),
            ));
        }
        let a = self.clone();
        let b = self.clone();
        Ok(QFunction::from_closures(
            move |r| a.q_of(r),
            move |r| b.q_prime(r),
        ))
    }

    /// Radius where `Omega(r) = b`, for `b` in (0, 1); `Omega` is strictly
    /// decreasing past the core so the solution is unique.
    pub fn omega_inverse(&self, b: f64) -> Result<f64> {
        if !(b > 0.0 && b < 1.0) {
            return Err(CoreError::InvalidArgument(format!(
                "omega_inverse: need b in (0, 1), got {b}"
            )));
        }
        let mut lo = 1e-9;
        let mut hi = (self.circulation.max(1.0) / b).sqrt() * 4.0 + 4.0;
        if self.omega(hi) > b {
            return Err(CoreError::RootFinding {
                lo,
                hi,
                reason: "angular velocity does not fall below target".into(),
            });
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.omega(mid) > b {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 * hi.max(1.0) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Serializable snapshot sampled on the profile's grid.
    pub fn record(&self) -> ProfileRecord {
        let r: Vec<f64> = self.grid.nodes.clone();
        let w: Vec<f64> = r.iter().map(|&x| self.w(x)).collect();
        let q: Vec<f64> = r.iter().map(|&x| self.q_of(x)).collect();
        let params = match self.kind {
            ProfileKind::ReferenceW1 { m, k } => Some(W1Params { k, m }),
            _ => None,
        };
        ProfileRecord {
            ell_inf: self.ell_inf,
            gamma: self.circulation,
            grid_n: self.grid.nodes.len(),
            kind: self.kind.tag().to_string(),
            map_l: self.grid.map_l,
            params,
            q,
            r,
            w,
        }
    }
}

/// Parameter block for the two-parameter reference family.
#[derive(Debug, Clone, Serialize)]
pub struct W1Params {
    pub k: f64,
    pub m: u32,
}

/// JSON snapshot of a profile (fields serialized in declaration order,
/// which is kept alphabetical).
#[derive(Debug, Clone, Serialize)]
pub struct ProfileRecord {
    pub ell_inf: f64,
    pub gamma: f64,
    pub grid_n: usize,
    pub kind: String,
    pub map_l: f64,
    pub params: Option<W1Params>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    pub w: Vec<f64>,
}

/// Gaussian mollification on the half-line with odd reflection, so the
/// mollified function still vanishes at `r = 0`.
pub fn mollify_q(q: &QFunction, eps: f64) -> Result<QFunction> {
    if !(eps > 0.0) {
        return Err(CoreError::InvalidArgument(
            "mollify_q: eps must be positive".into(),
        ));
    }
    let width = 8.0 * eps.sqrt();
    let norm = 1.0 / (std::f64::consts::PI * eps).sqrt();
    let qv = q.clone();
    let qd = q.clone();
    let value = move |r: f64| -> f64 {
        let lo = (r - width).max(0.0);
        let hi = r + width;
        let f = |s: f64| {
            let k1 = (-(r - s) * (r - s) / eps).exp();
            let k2 = (-(r + s) * (r + s) / eps).exp();
            norm * (k1 - k2) * qv.eval(s)
        };
        crate::quad::adaptive(f, lo, hi, 1e-12, 400)
            .map(|(v, _)| v)
            .unwrap_or(f64::NAN)
    };
    let derivative = move |r: f64| -> f64 {
        let lo = (r - width).max(0.0);
        let hi = r + width;
        let f = |s: f64| {
            let k1 = -2.0 * (r - s) / eps * (-(r - s) * (r - s) / eps).exp();
            let k2 = -2.0 * (r + s) / eps * (-(r + s) * (r + s) / eps).exp();
            norm * (k1 - k2) * qd.eval(s)
        };
        crate::quad::adaptive(f, lo, hi, 1e-12, 400)
            .map(|(v, _)| v)
            .unwrap_or(f64::NAN)
    };
    Ok(QFunction::from_closures(value, derivative))
}

/// Convex combination `(1-t) Q0 + t Q1`.
pub fn q_homotopy(q0: &QFunction, q1: &QFunction, t: f64) -> Result<QFunction> {
    if !(0.0..=1.0).contains(&t) {
        return Err(CoreError::InvalidArgument(
            "q_homotopy: t must lie in [0, 1]".into(),
        ));
    }
    let a0 = q0.clone();
    let a1 = q1.clone();
    let b0 = q0.clone();
    let b1 = q1.clone();
    Ok(QFunction::from_closures(
        move |r| (1.0 - t) * a0.eval(r) + t * a1.eval(r),
        move |r| (1.0 - t) * b0.derivative(r) + t * b1.derivative(r),
    ))
}

/// Weighted Lipschitz ratios of the map from `Q` to the vorticity.
#[derive(Debug, Clone, Copy)]
pub struct LipschitzRatios {
    /// `sup (1 + r^4) |W1 - W2| / sup |Q1 - Q2|`.
    pub w_ratio: f64,
    /// `sup (1 + r^5) |W1' - W2'| / sup |Q1 - Q2|`.
    pub w_prime_ratio: f64,
    /// The uniform distance `sup |Q1 - Q2|` itself.
    pub q_distance: f64,
}

/// Computes the weighted ratios for two descriptions pinned at `r = 1`:
/// both values `Q_i(1)` must lie in `[delta, sqrt(1 - delta^2)]`.
pub fn lipschitz_ratios(
    q1: &QFunction,
    q2: &QFunction,
    delta: f64,
    grid: &RadialGrid,
) -> Result<LipschitzRatios> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CoreError::InvalidArgument(
            "lipschitz_ratios: delta must lie in (0, 1)".into(),
        ));
    }
    let hi = (1.0 - delta * delta).sqrt();
    for (name, q) in [("first", q1), ("second", q2)] {
        let v = q.eval(1.0);
        if !(delta..=hi).contains(&v) {
            return Err(CoreError::InvalidArgument(format!(
                "lipschitz_ratios: {name} description not pinned at r = 1: Q(1) = {v}"
            )));
        }
    }
    let p1 = VortexProfile::from_q(q1.clone(), grid.clone())?;
    let p2 = VortexProfile::from_q(q2.clone(), grid.clone())?;
    let mut dq: f64 = 0.0;
    let mut dw: f64 = 0.0;
    let mut dwp: f64 = 0.0;
    for &r in &grid.nodes {
        dq = dq.max((q1.eval(r) - q2.eval(r)).abs());
        let w4 = 1.0 + r.powi(4);
        let w5 = 1.0 + r.powi(5);
        dw = dw.max(w4 * (p1.w(r) - p2.w(r)).abs());
        dwp = dwp.max(w5 * (p1.w_prime(r) - p2.w_prime(r)).abs());
    }
    if dq == 0.0 {
        return Err(CoreError::InvalidArgument(
            "lipschitz_ratios: descriptions coincide on the grid".into(),
        ));
    }
    Ok(LipschitzRatios {
        w_ratio: dw / dq,
        w_prime_ratio: dwp / dq,
        q_distance: dq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const REL: f64 = 1e-10;

    fn rel_err(got: f64, want: f64) -> f64 {
        (got - want).abs() / want.abs().max(1e-300)
    }

    #[test]
    fn normalization_at_axis() {
        for p in [
            VortexProfile::ks(),
            VortexProfile::lamb_oseen(),
            VortexProfile::w1(2, 1.0).unwrap(),
            VortexProfile::w1(3, 0.7).unwrap(),
        ] {
            assert!(rel_err(p.omega(1e-9), 1.0) < 1e-12, "{:?}", p.kind);
            assert!(rel_err(p.w(1e-9), 2.0) < 1e-12, "{:?}", p.kind);
        }
        let rk = VortexProfile::rankine();
        assert_eq!(rk.omega(0.5), 1.0);
        assert_eq!(rk.omega(2.0), 0.25);
        assert!(rk.non_class_w);
    }

    #[test]
    fn ks_closed_forms() {
        let p = VortexProfile::ks();
        for &r in &[0.3, 1.0, 2.0, 5.0, 17.0] {
            assert!(rel_err(p.j_of(r), 1.0 + 1.0 / (r * r)) < 1e-14);
        }
        assert!(rel_err(p.q_of(1.0), 0.577_350_269_189_625_76) < 1e-14);
        assert!((p.q_of(2.0) - 2.0 / 3.0).abs() < 1e-14);
        // Q'(0) limit: W''(0) = -8 Q'(0)
        assert!(rel_err(-p.w_second_origin / 8.0, 1.0) < 1e-12);
    }

    #[test]
    fn lamb_oseen_stability_quotient() {
        let p = VortexProfile::lamb_oseen();
        let cases = [
            (0.5, 15.333_112_358_567_131),
            (1.0, 3.330_463_192_016_740_8),
            (2.0, 0.348_609_185_967_111_57),
            (3.0, 1.001_967_576_718_463e-2),
        ];
        for &(r, want) in &cases {
            assert!(rel_err(p.j_of(r), want) < REL, "J({r})");
        }
        let dcases = [
            (0.5, -64.001_722_328_528_423),
            (1.0, -8.009_402_125_207_257_6),
            (2.0, -0.896_119_404_247_445_84),
        ];
        for &(r, want) in &dcases {
            assert!(rel_err(p.j_prime(r), want) < REL, "J'({r})");
        }
        let qcases = [
            (0.5, 0.247_437_503_457_678_74),
            (1.0, 0.480_543_629_482_260_65),
            (2.0, 0.861_106_650_206_708_28),
        ];
        for &(r, want) in &qcases {
            assert!(rel_err(p.q_of(r), want) < REL, "Q({r})");
        }
        // J' stays negative across the whole standard grid; past r ~ 27 the
        // quotient underflows, so the sign is checked through J'/J
        for &r in &p.grid.nodes {
            assert!(p.j_log_derivative(r) < 0.0, "J'({r}) not negative");
        }
        // the ratio agrees with J'/J where both are representable
        for &r in &[0.4, 1.0, 2.5, 6.0] {
            let direct = p.j_prime(r) / p.j_of(r);
            assert!(rel_err(p.j_log_derivative(r), direct) < 1e-11, "J'/J at {r}");
        }
    }

    #[test]
    fn w1_reference_values() {
        let p = VortexProfile::w1(2, 1.0).unwrap();
        assert!(rel_err(p.w(1.5), 0.189_349_112_426_035_5) < 1e-13);
        assert!(rel_err(p.j_of(1.5), 13.0 / 9.0) < 1e-13);
        assert!(rel_err(p.omega(1.5), 4.0 / 13.0) < 1e-13);
        assert!(rel_err(p.circulation, 1.0) < 1e-14);
        assert!(rel_err(p.w_second_origin, -8.0) < 1e-14);
        // J is constant + decaying: J' closed form cross-check
        let h = 1e-6;
        let fd = (p.j_of(1.5 + h) - p.j_of(1.5 - h)) / (2.0 * h);
        assert!(rel_err(p.j_prime(1.5), fd) < 1e-8);
    }

    #[test]
    fn vorticity_relation_holds() {
        // W = r Omega' + 2 Omega at scattered radii; the right side is a
        // difference of terms of size Omega, so the comparison scale is the
        // terms themselves, not W (which decays much faster for the
        // gaussian-core profile)
        for p in [
            VortexProfile::ks(),
            VortexProfile::lamb_oseen(),
            VortexProfile::w1(3, 1.4).unwrap(),
        ] {
            for &r in &[1e-3, 0.2, 0.9, 1.7, 4.0, 11.0] {
                let lhs = p.w(r);
                let rhs = r * p.omega_prime(r) + 2.0 * p.omega(r);
                let scale = (r * p.omega_prime(r)).abs() + 2.0 * p.omega(r) + lhs.abs();
                assert!((lhs - rhs).abs() < 1e-13 * scale, "{:?} at r={r}", p.kind);
            }
        }
    }

    #[test]
    fn tails_and_circulation() {
        let ks = VortexProfile::ks();
        assert!(rel_err(ks.w(60.0) * 60.0_f64.powi(4), 2.0) < 1e-3);
        // Omega ~ Gamma / r^2 far out
        assert!(rel_err(ks.omega(50.0) * 2500.0, 1.0) < 1e-3);
        let lo = VortexProfile::lamb_oseen();
        assert!(rel_err(lo.omega(20.0) * 400.0, 1.0) < 1e-12);
        assert!(lo.w(20.0) * 20.0_f64.powi(4) < 1e-100);
    }

    #[test]
    fn reconstruction_matches_closed_form() {
        let lo = VortexProfile::lamb_oseen();
        let q = lo.q_function().unwrap();
        let rebuilt = VortexProfile::from_q(q, RadialGrid::standard(200)).unwrap();
        let cases = [
            (1.0, 0.632_120_558_828_557_68, 0.735_758_882_342_884_64),
            (2.0, 0.245_421_090_277_816_45, 3.663_127_777_746_836_1e-2),
        ];
        for &(r, om, w) in &cases {
            assert!(rel_err(rebuilt.omega(r), om) < 1e-9, "Omega({r})");
            assert!(rel_err(rebuilt.w(r), w) < 1e-9, "W({r})");
        }
        assert!(rel_err(rebuilt.w_prime(1.0), -1.471_517_764_685_769_3) < 1e-8);
        assert!(rel_err(rebuilt.w_prime(2.0), -0.146_525_111_109_873_44) < 1e-8);
        assert!(rel_err(rebuilt.circulation, 1.0) < 1e-6);
        assert!(rel_err(rebuilt.w_second_origin, -4.0) < 1e-3);
    }

    #[test]
    fn round_trip_ks() {
        let ks = VortexProfile::ks();
        let rebuilt = VortexProfile::from_q(ks.q_function().unwrap(), RadialGrid::standard(200))
            .unwrap();
        for &r in &[0.05, 0.3, 1.0, 3.0, 10.0] {
            assert!(rel_err(rebuilt.w(r), ks.w(r)) < 1e-8, "W({r})");
            assert!(rel_err(rebuilt.w_prime(r), ks.w_prime(r)) < 1e-7, "W'({r})");
        }
    }

    #[test]
    fn mollified_constant_is_erf() {
        let c = 0.7;
        let q = QFunction::from_closures(move |_| c, |_| 0.0);
        let eps = 0.01;
        let qm = mollify_q(&q, eps).unwrap();
        // int kernel against a constant on (0, inf) gives c erf(r/sqrt(eps))
        let got = qm.eval(0.3);
        assert!(rel_err(got, 0.699_984_536_652_101) < 1e-9);
        assert!(qm.eval(0.0).abs() < 1e-14);
    }

    #[test]
    fn mollified_ks_values() {
        let ks = VortexProfile::ks();
        let q = ks.q_function().unwrap();
        let qm = mollify_q(&q, 1e-4).unwrap();
        let cases = [
            (0.5, 0.408_221_075_423_901_4),
            (1.0, 0.577_340_646_016_925_4),
            (2.0, 0.666_665_432_043_511_77),
        ];
        for &(r, want) in &cases {
            assert!(rel_err(qm.eval(r), want) < 1e-8, "mollified Q({r})");
        }
    }

    #[test]
    fn homotopy_endpoint_and_midpoint() {
        let ks = VortexProfile::ks().q_function().unwrap();
        let lo = VortexProfile::lamb_oseen().q_function().unwrap();
        let q0 = q_homotopy(&ks, &lo, 0.0).unwrap();
        assert!(rel_err(q0.eval(1.3), ks.eval(1.3)) < 1e-14);
        let qh = q_homotopy(&ks, &lo, 0.5).unwrap();
        let want = 0.5 * (ks.eval(0.8) + lo.eval(0.8));
        assert!(rel_err(qh.eval(0.8), want) < 1e-14);
        assert!(q_homotopy(&ks, &lo, 1.5).is_err());
    }

    #[test]
    fn admissibility_rejects_bad_descriptions() {
        let grid = RadialGrid::standard(80);
        let decreasing = QFunction::from_closures(|r| 1.0 / (1.0 + r), |r| -1.0 / (1.0 + r).powi(2));
        assert!(decreasing.check_admissible(&grid).is_err());
        let out_of_range = QFunction::from_closures(|r| 0.5 + r, |_| 1.0);
        assert!(out_of_range.check_admissible(&grid).is_err());
        let ks = VortexProfile::ks().q_function().unwrap();
        assert!(ks.check_admissible(&grid).is_ok());
    }

    #[test]
    fn lipschitz_ratios_finite_for_nearby_descriptions() {
        let grid = RadialGrid::standard(120);
        let ks = VortexProfile::ks().q_function().unwrap();
        let lo = VortexProfile::lamb_oseen().q_function().unwrap();
        let mix = q_homotopy(&ks, &lo, 0.2).unwrap();
        let ratios = lipschitz_ratios(&ks, &mix, 0.05, &grid).unwrap();
        assert!(ratios.w_ratio.is_finite() && ratios.w_ratio > 0.0);
        assert!(ratios.w_prime_ratio.is_finite() && ratios.w_prime_ratio > 0.0);
        assert!(ratios.q_distance > 0.0);
    }

    #[test]
    fn serialization_snapshot() {
        let p = VortexProfile::w1(2, 1.0).unwrap();
        let rec = p.record();
        assert_eq!(rec.kind, "reference_w1");
        assert_eq!(rec.grid_n, rec.r.len());
        assert_eq!(rec.r.len(), rec.w.len());
        let js = serde_json::to_string(&rec).unwrap();
        assert!(js.contains("\"kind\":\"reference_w1\""));
        assert!(js.contains("\"m\":2"));
    }
}
