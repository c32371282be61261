//! Numerical toolkit for the spectral stability of inviscid columnar vortices.
//!
//! A columnar vortex is a steady axisymmetric flow `u = V(r) e_theta` with
//! vertical vorticity `W(r) e_z`. Linearizing the Euler equations about such a
//! column and Fourier-transforming in the angle (mode `m`) and the vertical
//! direction (wavenumber `k`) yields, for each sector `(m, k)`, a nonlocal
//! operator acting on radial vorticity profiles. This crate provides the
//! machinery to study its spectrum numerically:
//!
//! * [`profiles`]: admissible vorticity profiles (monotone vorticity and
//!   Richardson ratio), their reconstruction from the associated monotone
//!   `Q`-function, mollification, and homotopies between profiles.
//! * [`biot_savart`]: recovery of the velocity field from a divergence-free
//!   vorticity field in a sector, with the energy estimate that controls it.
//! * [`operator`]: dense discretization of the linearized operator on the
//!   divergence-free subspace, spectra and resolvent norms.
//! * [`shooting`]: the radial eigenvalue ODE solved by complex shooting from
//!   both endpoints; Kelvin-mode location, unstable-mode scans by the argument
//!   principle, and the Howard-type integral identities.
//! * [`critical_layer`]: Frobenius analysis at the critical radius where the
//!   angular velocity equals the phase speed.
//! * [`specfun`]: modified Bessel functions `I`, `K` of real order and complex
//!   argument, plus the limit integral controlling the critical-layer phase
//!   jump.
//! * [`rankine`]: the explicit Kelvin dispersion relation for the
//!   discontinuous Rankine vortex.
//!
//! Conventions used throughout: profiles are normalized so that `W(0) = 2` and
//! `Omega(0) = 1`; spectral parameters are written `s = m(a - ib)` so that
//! purely imaginary eigenvalues correspond to `a = 0`; the essential spectrum
//! of the rotation multiplier is the segment `{-imb : b in [0, 1]}`.

pub mod biot_savart;
pub mod cheb;
pub mod contour;
pub mod critical_layer;
pub mod error;
pub mod grid;
pub mod ode;
pub mod operator;
pub mod profiles;
pub mod quad;
pub mod rankine;
pub mod shooting;
pub mod specfun;
pub mod taylor;

pub use error::CoreError;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;

/// Complex scalar used everywhere.
pub type C64 = num_complex::Complex64;

/// A Fourier sector: azimuthal mode `m` and vertical wavenumber `k`.
///
/// Velocity and vorticity perturbations in the sector have the form
/// `f(r) e^{i m theta} e^{i k z}`. Most eigenvalue machinery requires
/// `k != 0`; the purely two-dimensional case `k = 0` is handled separately
/// by the dedicated integral identities.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FourierSector {
    /// Azimuthal mode number.
    pub m: i32,
    /// Vertical wavenumber.
    pub k: f64,
}

impl FourierSector {
    pub fn new(m: i32, k: f64) -> Self {
        Self { m, k }
    }

    /// `m` as a float, for coefficient formulas.
    pub fn mf(&self) -> f64 {
        self.m as f64
    }
}

/// Spectral parameter `s` with the sector parametrization `s = m(a - ib)`.
///
/// For `m != 0` the pair `(a, b)` is recovered as `a = Re(s)/m`,
/// `b = -Im(s)/m`. Eigenvalues off the imaginary axis have `a != 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParameter {
    pub s: C64,
    pub a: f64,
    pub b: f64,
}

impl SpectralParameter {
    /// Build from the complex value `s` for a sector with `m != 0`.
    pub fn from_s(m: i32, s: C64) -> Self {
        debug_assert!(m != 0, "the (a, b) parametrization needs m != 0");
        let mf = m as f64;
        Self {
            s,
            a: s.re / mf,
            b: -s.im / mf,
        }
    }

    /// Build from the real pair `(a, b)`.
    pub fn from_ab(m: i32, a: f64, b: f64) -> Self {
        let mf = m as f64;
        Self {
            s: C64::new(mf * a, -mf * b),
            a,
            b,
        }
    }

    /// Shifted symbol `gamma_star(r) = Omega(r) - b - i a`.
    pub fn gamma_star(&self, omega_r: f64) -> C64 {
        C64::new(omega_r - self.b, -self.a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_parameter_roundtrip() {
        let p = SpectralParameter::from_ab(3, 0.25, -1.5);
        assert_eq!(p.s, C64::new(0.75, 4.5));
        let q = SpectralParameter::from_s(3, p.s);
        assert!((q.a - 0.25).abs() < 1e-15);
        assert!((q.b + 1.5).abs() < 1e-15);
    }

    #[test]
    fn gamma_star_matches_definition() {
        let p = SpectralParameter::from_ab(2, 0.1, 0.4);
        let g = p.gamma_star(0.9);
        assert!((g - C64::new(0.5, -0.1)).norm() < 1e-15);
    }
}
