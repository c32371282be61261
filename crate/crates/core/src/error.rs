//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A caller violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An input field failed the divergence-free constraint.
    #[error("vorticity field is not divergence-free: max residual {residual:.3e} exceeds {tolerance:.3e}")]
    NotDivergenceFree { residual: f64, tolerance: f64 },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failed to converge: estimated error {error:.3e} after {subdivisions} subdivisions")]
    QuadratureFailure { error: f64, subdivisions: usize },

    /// The ODE integrator exhausted its step budget or underflowed the step size.
    #[error("ODE integration failed at r = {position:.6e}: {reason}")]
    OdeFailure { position: f64, reason: String },

    /// A linear solve or eigensolve failed.
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    /// Root refinement did not converge.
    #[error("root finding failed in [{lo:.6e}, {hi:.6e}]: {reason}")]
    RootFinding { lo: f64, hi: f64, reason: String },

    /// A contour passed too close to a zero and adaptive re-meshing gave up.
    #[error("contour evaluation unresolved near panel {panel}: phase jump {jump:.3} rad after {splits} splits")]
    ContourUnresolved { panel: usize, jump: f64, splits: usize },

    /// A profile operation was applied to a profile outside its admissible class.
    #[error("profile not admissible for this operation: {0}")]
    ProfileNotAdmissible(String),

    /// Evaluation requested outside a series' reliable radius.
    #[error("point at distance {distance:.3e} from the expansion center exceeds the reliable radius {radius:.3e}")]
    OutsideRadius { distance: f64, radius: f64 },

    /// Serialization problems for file-based interchange.
    #[error("serialization: {0}")]
    Serialization(#[from] serde_json::Error),
}
