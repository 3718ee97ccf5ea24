//! Error taxonomy shared by every module.
//!
//! Payloads are carried as `f64` regardless of the working scalar so the
//! variants stay object-simple and display uniformly.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The localization condition fails: at least one of the effective
    /// frequency squares is non-positive, so no normalizable stationary
    /// Gaussian exists at these parameters.
    #[error(
        "localization violated at (mu={mu}, sigma={sigma}, rho={rho}): \
         sigma_tilde*mu - rho^2 = {omega_sq}, sigma0*mu - rho^2 = {omega_tilde_sq}"
    )]
    LocalizationViolated {
        mu: f64,
        sigma: f64,
        rho: f64,
        omega_sq: f64,
        omega_tilde_sq: f64,
    },

    /// A fixed-step integrator produced a non-finite component.
    #[error("integration step rejected at t={t}: {detail}")]
    StepRejected { t: f64, detail: String },

    /// The complex germ left its admissible set (|C| collapse, Im Q <= 0,
    /// or a broken symplectic normalization).
    #[error("germ degenerate: {detail}")]
    GermDegenerate { detail: String },

    /// The finite-difference self-test on a known Gaussian exceeded its
    /// residual budget: the grid cannot represent the state's derivatives.
    #[error("grid too coarse: kinetic self-test residual {residual:.3e} exceeds {bound:.3e}")]
    GridTooCoarse { residual: f64, bound: f64 },

    /// The PDE propagation left its validity envelope (norm drift or
    /// boundary amplitude beyond threshold).
    #[error("propagation stability lost at t={t}: {detail}")]
    StabilityLost { t: f64, detail: String },

    /// Overlap with the reference state dropped too low for a meaningful
    /// phase extraction.
    #[error("adiabaticity lost: overlap magnitude {fidelity:.6} <= {required:.6}")]
    AdiabaticityLost { fidelity: f64, required: f64 },

    /// A parameter path failed validation (open loop, degenerate mass, ...).
    #[error("invalid parameter path: {detail}")]
    InvalidPath { detail: String },

    /// A run configuration is structurally sound but numerically unusable.
    #[error("invalid configuration: {detail}")]
    InvalidConfig { detail: String },
}
