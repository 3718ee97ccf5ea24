//! Semiclassical machinery for the 1-D nonlocal Gross-Pitaevskii equation
//! with a quadratic interaction kernel and a quadratic trap.
//!
//! The equation is
//!
//! ```text
//! { -ih d/dt + H(t) } Psi = 0,
//! H(t) = (mu/2) p^2 + (sigma/2) x^2 + (rho/2)(x p + p x) + V[Psi](x),
//! V[Psi](x) = (kappa/2) Integral [ a x^2 + 2 b x y + c y^2 ] |Psi(y)|^2 dy,
//! ```
//!
//! whose quadratic kernel closes the nonlinearity over the norm and the first
//! two moments of the state. The crate builds, in closed form, the Gaussian
//! vacuum and Fock ladder riding on the Hamilton-Ehrenfest moment system, the
//! instantaneous nonlinear eigenstates and eigenvalues, the adiabatic (slow
//! loop) expansions, and the dynamic / geometric (Berry) phases with their
//! nonlinear corrections, including the classical Hannay angle. Every closed
//! form is backed by an independent numerical oracle: fixed-step integration
//! of the moment and variations systems, grid quadrature, and a banded
//! Crank-Nicolson propagator for the full nonlinear PDE.
//!
//! All numerics are generic over the scalar type through [`Real`]; the
//! `*64` aliases below fix `f64`, which every shipped tolerance assumes.

pub mod ehrenfest;
pub mod error;
pub mod germ;
pub mod grid;
pub mod params;
pub mod phases;
pub mod propagator;
pub mod quadrature;
pub mod real;
pub mod states;

mod ode;

pub use error::{Error, Result};
pub use real::Real;

/// Complex number over the crate's generic scalar.
pub type Complex<R> = num_complex::Complex<R>;

/// Double-precision complex, the working type of the CLI and all tolerances.
pub type C64 = num_complex::Complex<f64>;

pub type ParameterSet64 = params::ParameterSet<f64>;
pub type PhysicalScales64 = params::PhysicalScales<f64>;
pub type DerivedFrequencies64 = params::DerivedFrequencies<f64>;
pub type ParameterPath64 = params::ParameterPath<f64>;
pub type MomentState64 = ehrenfest::MomentState<f64>;
pub type MomentConstants64 = ehrenfest::MomentConstants<f64>;
pub type GermState64 = germ::GermState<f64>;
pub type SpatialGrid64 = grid::SpatialGrid<f64>;
pub type WaveFunction64 = states::WaveFunction<f64>;
pub type PhaseDecomposition64 = phases::PhaseDecomposition<f64>;
pub type PropagatorConfig64 = propagator::PropagatorConfig<f64>;
pub type PropagationResult64 = propagator::PropagationResult<f64>;
