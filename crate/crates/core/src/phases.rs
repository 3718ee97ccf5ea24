//! Dynamic and geometric phases of slowly driven packets.
//!
//! Over one period T of a closed parameter loop, the level-n packet returns
//! to itself up to a phase that splits into a dynamic part
//!
//!   −δₙ,  δₙ = (n + ½) T ∫₀¹ (κ̃cμ/(2Ω) + Ω) ds   (δₙ stored positive)
//!
//! and a geometric part that depends only on the loop's shape,
//!
//!   γₙ = (n + ½) ∮ [1 − κ̃cμ/(2Ω²)] (1/(2Ω)) (dρ − (ρ/μ) dμ).
//!
//! The one-form under the integral is the geometric (Berry) potential: only
//! its μ- and ρ-components are nonzero in this gauge. Its exterior
//! derivative gives a curvature 2-form supported on the (μ, ρ, σ̃, c)
//! coordinates (σ̃ = σ + κ̃a pulls back the trap and kernel directions), so
//! the same number is also computed as a flux integral over a cone spanning
//! the loop — an independent discretization used for cross-checks. The
//! classical (Hannay) angle is the n-independent companion −γₙ/(n + ½).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::germ::wrap_angle;
use crate::params::{derive_frequencies, ParameterPath, PhysicalScales};
use crate::real::Real;
use crate::states::WaveFunction;

/// Components of the geometric one-form at a single parameter point, scaled
/// by (n + ½). The trap, kernel and norm directions are exact zeros in this
/// gauge; they are kept as fields to make that statement part of the API.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricPotential<R: Real> {
    pub a_mu: R,
    pub a_sigma: R,
    pub a_rho: R,
    pub a_kernel_a: R,
    pub a_kernel_b: R,
    pub a_kernel_c: R,
}

/// Geometric potential of level n at a frozen parameter point:
///   A_μ = −(n+½) [1 − κ̃cμ/(2Ω²)] (ρ/μ) / (2Ω),
///   A_ρ = +(n+½) [1 − κ̃cμ/(2Ω²)] / (2Ω),
/// all other components identically zero.
pub fn geometric_potential<R: Real>(
    set: &crate::params::ParameterSet<R>,
    scales: &PhysicalScales<R>,
    n: usize,
) -> Result<GeometricPotential<R>> {
    let f = derive_frequencies(set, scales)?;
    if set.mu == R::zero() {
        return Err(Error::InvalidConfig {
            detail: "geometric potential is singular at mu = 0".into(),
        });
    }
    let weight = (R::of_usize(n) + R::of(0.5))
        * (R::one() - scales.kappa_tilde * set.c * set.mu / (R::of(2.0) * f.omega * f.omega))
        / (R::of(2.0) * f.omega);
    Ok(GeometricPotential {
        a_mu: -weight * set.rho / set.mu,
        a_sigma: R::zero(),
        a_rho: weight,
        a_kernel_a: R::zero(),
        a_kernel_b: R::zero(),
        a_kernel_c: R::zero(),
    })
}

/// Spectrally accurate loop quadrature with a fallible integrand: uniform
/// (periodic trapezoid) samples, doubled until two successive resolutions
/// agree to `tol`, starting from `n0` points.
fn periodic_quadrature<R: Real>(mut f: impl FnMut(R) -> Result<R>, n0: usize, tol: R) -> Result<R> {
    let eval = |f: &mut dyn FnMut(R) -> Result<R>, n: usize| -> Result<R> {
        let mut acc = R::zero();
        for k in 0..n {
            acc = acc + f(R::of_usize(k) / R::of_usize(n))?;
        }
        Ok(acc / R::of_usize(n))
    };
    let mut n = n0.max(16);
    let mut coarse = eval(&mut f, n)?;
    loop {
        n *= 2;
        let fine = eval(&mut f, n)?;
        if (fine - coarse).abs() <= tol || n >= (1 << 18) {
            if (fine - coarse).abs() > tol {
                return Err(Error::InvalidPath {
                    detail: format!(
                        "loop quadrature did not converge: |Δ| = {:.3e} at {} samples",
                        (fine - coarse).abs().as_f64(),
                        n
                    ),
                });
            }
            return Ok(fine);
        }
        coarse = fine;
    }
}

const QUADRATURE_TOL: f64 = 1e-9;
const QUADRATURE_START: usize = 1024;

/// Dynamic phase δₙ = (n+½) T ∫₀¹ (κ̃cμ/(2Ω) + Ω) ds, returned positive;
/// it enters the wavefunction as exp(−i δₙ).
pub fn dynamic_phase<R: Real>(
    path: &ParameterPath<R>,
    n: usize,
    scales: &PhysicalScales<R>,
) -> Result<R> {
    let integrand = |s: R| -> Result<R> {
        let set = path.at(s);
        let f = derive_frequencies(&set, scales)?;
        Ok(scales.kappa_tilde * set.c * set.mu / (R::of(2.0) * f.omega) + f.omega)
    };
    let mean = periodic_quadrature(integrand, QUADRATURE_START, R::of(QUADRATURE_TOL))?;
    Ok((R::of_usize(n) + R::of(0.5)) * path.period() * mean)
}

/// Shared loop integral γₙ/(n + ½) = ∮ [1 − κ̃cμ/(2Ω²)] (ρ′ − (ρ/μ)μ′) / (2Ω) ds.
fn berry_base<R: Real>(path: &ParameterPath<R>, scales: &PhysicalScales<R>) -> Result<R> {
    let integrand = |s: R| -> Result<R> {
        let set = path.at(s);
        let d = path.derivative(s);
        let f = derive_frequencies(&set, scales)?;
        if set.mu.abs() < R::of(1e-12) {
            return Err(Error::InvalidPath {
                detail: format!("loop touches mu = 0 at s = {}", s.as_f64()),
            });
        }
        let weight = (R::one()
            - scales.kappa_tilde * set.c * set.mu / (R::of(2.0) * f.omega * f.omega))
            / (R::of(2.0) * f.omega);
        Ok(weight * (d.rho - set.rho / set.mu * d.mu))
    };
    periodic_quadrature(integrand, QUADRATURE_START, R::of(QUADRATURE_TOL))
}

/// Geometric (Berry) phase of level n for one traversal of the loop, by the
/// contour integral of the geometric potential.
pub fn berry_contour<R: Real>(
    path: &ParameterPath<R>,
    n: usize,
    scales: &PhysicalScales<R>,
) -> Result<R> {
    Ok((R::of_usize(n) + R::of(0.5)) * berry_base(path, scales)?)
}

/// Classical angle shift accumulated over one loop: Θ = −γₙ/(n + ½),
/// independent of the level.
pub fn hannay_angle<R: Real>(path: &ParameterPath<R>, scales: &PhysicalScales<R>) -> Result<R> {
    Ok(-berry_base(path, scales)?)
}

pub const SURFACE_RADIAL_DEFAULT: usize = 512;
pub const SURFACE_ANGULAR_DEFAULT: usize = 1024;

/// Geometric phase of level n by the flux of the curvature 2-form through
/// the cone spanned from the loop centroid, in (μ, ρ, σ̃, c) coordinates:
///
///   dA/(n+½) = W₁ dμ∧dρ + W₂ dσ̃∧dρ + W₃ dσ̃∧dμ + W₄ dc∧dρ + W₅ dc∧dμ,
///   W₁ = σ̃/(4Ω³) − κ̃c(σ̃μ + 2ρ²)/(8Ω⁵),
///   W₂ = −μ/(4Ω³) + 3κ̃cμ²/(8Ω⁵),
///   W₃ =  ρ/(4Ω³) − 3κ̃cμρ/(8Ω⁵),
///   W₄ = −κ̃μ/(4Ω³),
///   W₅ = +κ̃ρ/(4Ω³).
///
/// Midpoint rule in the radial direction, periodic rule along the loop; the
/// whole cone must stay inside the localizable region Ω² > 0. (That region
/// is the positive-definite cone of [[σ̃, ρ], [ρ, μ]] and hence convex, so
/// the cone of a valid loop stays valid automatically; the check rejects
/// loops that are themselves partially outside.)
pub fn berry_surface_with<R: Real>(
    path: &ParameterPath<R>,
    n: usize,
    scales: &PhysicalScales<R>,
    n_radial: usize,
    n_angular: usize,
) -> Result<R> {
    if n_radial == 0 || n_angular == 0 {
        return Err(Error::InvalidConfig {
            detail: "surface rule needs at least one cell in each direction".into(),
        });
    }
    let kt = scales.kappa_tilde;
    // Loop samples y(s) = (μ, ρ, σ̃, c) and derivatives at angular midpoints.
    let mut y = Vec::with_capacity(n_angular);
    let mut dy = Vec::with_capacity(n_angular);
    for j in 0..n_angular {
        let s = (R::of_usize(j) + R::of(0.5)) / R::of_usize(n_angular);
        let set = path.at(s);
        let d = path.derivative(s);
        y.push([set.mu, set.rho, set.sigma + kt * set.a, set.c]);
        dy.push([d.mu, d.rho, d.sigma + kt * d.a, d.c]);
    }
    let mut centroid = [R::zero(); 4];
    for p in &y {
        for (c, v) in centroid.iter_mut().zip(p) {
            *c = *c + *v;
        }
    }
    for c in centroid.iter_mut() {
        *c = *c / R::of_usize(n_angular);
    }

    let dr = R::one() / R::of_usize(n_radial);
    let ds = R::one() / R::of_usize(n_angular);
    let mut flux = R::zero();
    for i in 0..n_radial {
        let r = (R::of_usize(i) + R::of(0.5)) * dr;
        for j in 0..n_angular {
            // Surface point Y(r, s) = centroid + r (y(s) − centroid).
            let rel = [
                y[j][0] - centroid[0],
                y[j][1] - centroid[1],
                y[j][2] - centroid[2],
                y[j][3] - centroid[3],
            ];
            let mu = centroid[0] + r * rel[0];
            let rho = centroid[1] + r * rel[1];
            let st = centroid[2] + r * rel[2];
            let c = centroid[3] + r * rel[3];
            let om_sq = st * mu - rho * rho;
            if om_sq <= R::zero() {
                return Err(Error::LocalizationViolated {
                    mu: mu.as_f64(),
                    sigma: st.as_f64(),
                    rho: rho.as_f64(),
                    omega_sq: om_sq.as_f64(),
                    omega_tilde_sq: om_sq.as_f64(),
                });
            }
            let om = om_sq.sqrt();
            let om3 = om_sq * om;
            let om5 = om3 * om_sq;
            let four = R::of(4.0);
            let eight = R::of(8.0);
            let w1 =
                st / (four * om3) - kt * c * (st * mu + R::of(2.0) * rho * rho) / (eight * om5);
            let w2 = -mu / (four * om3) + R::of(3.0) * kt * c * mu * mu / (eight * om5);
            let w3 = rho / (four * om3) - R::of(3.0) * kt * c * mu * rho / (eight * om5);
            let w4 = -kt * mu / (four * om3);
            let w5 = kt * rho / (four * om3);
            // Pullback Jacobians J(i, k) = ∂(Yi, Yk)/∂(r, s) = r (relᵢ y′ₖ − y′ᵢ relₖ).
            let jac = |a: usize, b: usize| r * (rel[a] * dy[j][b] - dy[j][a] * rel[b]);
            flux = flux
                + w1 * jac(0, 1)
                + w2 * jac(2, 1)
                + w3 * jac(2, 0)
                + w4 * jac(3, 1)
                + w5 * jac(3, 0);
        }
    }
    Ok((R::of_usize(n) + R::of(0.5)) * flux * dr * ds)
}

/// [`berry_surface_with`] at the default resolution.
pub fn berry_surface<R: Real>(
    path: &ParameterPath<R>,
    n: usize,
    scales: &PhysicalScales<R>,
) -> Result<R> {
    berry_surface_with(
        path,
        n,
        scales,
        SURFACE_RADIAL_DEFAULT,
        SURFACE_ANGULAR_DEFAULT,
    )
}

/// Phase bookkeeping for one closed traversal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDecomposition<R: Real> {
    pub n: usize,
    /// Principal-branch total phase arg⟨reference|final⟩ ∈ (−π, π].
    pub total: R,
    /// Signed dynamic phase entering the state as exp(i·dynamic), i.e. −δₙ.
    pub dynamic: R,
    /// wrap(total − dynamic): the geometric remainder on (−π, π].
    pub geometric: R,
    /// |⟨reference|final⟩| / (‖reference‖‖final‖).
    pub fidelity: R,
    /// Full branch bookkeeping when snapshots are provided: the unwrapped
    /// total equals total + 2π·winding.
    pub winding: Option<i64>,
}

/// Minimum overlap magnitude for the total phase to be meaningful.
pub const FIDELITY_FLOOR: f64 = 0.9;

/// Splits the measured return phase of `final_state` against `reference`
/// into the supplied signed dynamic part and a geometric remainder.
///
/// `snapshots`, when given, must sample the evolution densely enough that
/// the total phase advances by less than π between consecutive entries
/// (ending at the final state); they resolve the 2π branch of the total.
pub fn extract_geometric_phase<R: Real>(
    reference: &WaveFunction<R>,
    final_state: &WaveFunction<R>,
    dynamic_signed: R,
    n: usize,
    snapshots: Option<&[WaveFunction<R>]>,
) -> Result<PhaseDecomposition<R>> {
    let overlap = reference.overlap(final_state)?;
    let norms = reference.norm() * final_state.norm();
    if norms <= R::zero() {
        return Err(Error::InvalidConfig {
            detail: "cannot extract a phase from a zero state".into(),
        });
    }
    let fidelity = overlap.norm() / norms;
    if fidelity <= R::of(FIDELITY_FLOOR) {
        return Err(Error::AdiabaticityLost {
            fidelity: fidelity.as_f64(),
            required: FIDELITY_FLOOR,
        });
    }
    let total = overlap.arg();
    let geometric = wrap_angle(total - dynamic_signed);

    let winding = match snapshots {
        None => None,
        Some(states) => {
            let mut theta = R::zero();
            let mut have_prev = false;
            for st in states {
                let o: Complex<R> = reference.overlap(st)?;
                let raw = o.arg();
                theta = if have_prev {
                    theta + wrap_angle(raw - theta)
                } else {
                    raw
                };
                have_prev = true;
            }
            // Continue the branch onto the final state itself.
            theta = theta + wrap_angle(total - theta);
            Some(((theta - total) / R::TAU()).round().as_f64() as i64)
        }
    };

    Ok(PhaseDecomposition {
        n,
        total,
        dynamic: dynamic_signed,
        geometric,
        fidelity,
        winding,
    })
}
