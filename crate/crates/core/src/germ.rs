//! The system in variations (complex germ): time integration of the complex
//! 2-vector a = (B, C), the constant-parameter Floquet solution, symplectic
//! normalization, continuous unwrapping of Arg C, and the slow-loop (WKB)
//! expansion producing Q⁽⁰⁾, Q⁽¹⁾, Φ(s), φ(s).
//!
//! The germ obeys the linearization of the moment flow,
//!
//! ```text
//! Ḃ = −ρ B − σ̃ C,      Ċ = μ B + ρ C,
//! ```
//!
//! and its ratio Q = B/C is the complex width of the Gaussian ansatz;
//! Im Q > 0 is normalizability. The skew product {a₁, a₂} = B₁C₂ − C₁B₂ is
//! exactly conserved, and the working normalization is {a, a*} = 2i, i.e.
//! Im(B·C̄) = 1.

use std::io::{self, Write};

use num_complex::Complex;

use crate::ehrenfest::Drive;
use crate::error::{Error, Result};
use crate::ode::rk4_step;
use crate::params::{derive_frequencies, ParameterPath, ParameterSet, PhysicalScales};
use crate::real::Real;

/// Reduces an angle to the principal branch (−π, π].
pub fn wrap_angle<R: Real>(x: R) -> R {
    let tau = R::TAU();
    let mut y = x % tau;
    if y > R::PI() {
        y = y - tau;
    } else if y <= -R::PI() {
        y = y + tau;
    }
    y
}

/// Complex germ vector (B, C) with a continuous branch of Arg C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GermState<R: Real> {
    pub b: Complex<R>,
    pub c: Complex<R>,
    /// Continuous (unwrapped) branch of Arg C; equals the principal argument
    /// at construction and is continued without ±π jumps by the integrator.
    pub arg_c_unwrapped: R,
}

impl<R: Real> GermState<R> {
    /// Floor below which the coordinate component counts as caustic.
    pub const C_FLOOR: f64 = 1e-12;

    pub fn new(b: Complex<R>, c: Complex<R>) -> Result<Self> {
        if c.norm() < R::of(Self::C_FLOOR) {
            return Err(Error::GermDegenerate {
                detail: format!("|C| = {:.3e} below floor", c.norm().as_f64()),
            });
        }
        Ok(Self {
            b,
            c,
            arg_c_unwrapped: c.arg(),
        })
    }

    /// Q = B/C, the complex Gaussian width parameter.
    pub fn q(&self) -> Complex<R> {
        self.b / self.c
    }

    /// |{a, a*} − 2i| = 2·|Im(B·C̄) − 1|, the normalization defect.
    pub fn skew_defect(&self) -> R {
        R::of(2.0) * ((self.b * self.c.conj()).im - R::one()).abs()
    }
}

/// Skew product {a₁, a₂} = B₁C₂ − C₁B₂ (conserved by the variational flow).
pub fn skew_product<R: Real>(a1: &GermState<R>, a2: &GermState<R>) -> Complex<R> {
    a1.b * a2.c - a1.c * a2.b
}

/// A sampled germ trajectory.
#[derive(Debug, Clone)]
pub struct GermTrajectory<R: Real> {
    pub times: Vec<R>,
    pub states: Vec<GermState<R>>,
}

impl<R: Real> GermTrajectory<R> {
    pub fn last(&self) -> &GermState<R> {
        self.states
            .last()
            .expect("trajectory has at least the initial state")
    }

    pub fn skew_defect_max(&self) -> R {
        self.states
            .iter()
            .map(|a| a.skew_defect())
            .fold(R::zero(), R::max)
    }

    /// CSV export: t, Re B, Im B, Re C, Im C, argC_unwrapped, Re Q, Im Q,
    /// skew_defect.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(
            out,
            "t,re_B,im_B,re_C,im_C,argC_unwrapped,re_Q,im_Q,skew_defect"
        )?;
        for (t, a) in self.times.iter().zip(&self.states) {
            let q = a.q();
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                t.as_f64(),
                a.b.re.as_f64(),
                a.b.im.as_f64(),
                a.c.re.as_f64(),
                a.c.im.as_f64(),
                a.arg_c_unwrapped.as_f64(),
                q.re.as_f64(),
                q.im.as_f64(),
                a.skew_defect().as_f64()
            )?;
        }
        Ok(())
    }
}

/// Right-hand side of the variations system for a packed state
/// y = (Re B, Im B, Re C, Im C).
fn variations_rhs<R: Real>(y: &[R; 4], set: &ParameterSet<R>, kappa_tilde: R) -> [R; 4] {
    let sigma_tilde = set.sigma + kappa_tilde * set.a;
    [
        -set.rho * y[0] - sigma_tilde * y[2],
        -set.rho * y[1] - sigma_tilde * y[3],
        set.mu * y[0] + set.rho * y[2],
        set.mu * y[1] + set.rho * y[3],
    ]
}

/// Integrates the variations system with RK4, keeping Arg C continuous.
///
/// Each recorded step is internally subdivided until the argument of C
/// advances by less than π/4 per substep, so nearest-continuation unwrapping
/// is unambiguous regardless of the requested sampling step. Fails with
/// `GermDegenerate` on |C| collapse or loss of Im Q > 0 (impossible under
/// the localization condition, but guarded), and rejects initial states
/// violating the {a, a*} = 2i normalization by more than 1e-9.
pub fn integrate_variations<R: Real>(
    a0: &GermState<R>,
    drive: Drive<R>,
    t_span: (R, R),
    dt: R,
    scales: &PhysicalScales<R>,
) -> Result<GermTrajectory<R>> {
    let (t0, t1) = t_span;
    if !(dt > R::zero()) || t1 <= t0 {
        return Err(Error::InvalidConfig {
            detail: "integrate_variations needs dt > 0 and t1 > t0".into(),
        });
    }
    if a0.skew_defect() > R::of(1e-9) {
        return Err(Error::GermDegenerate {
            detail: format!(
                "initial germ violates the skew normalization: defect {:.3e}",
                a0.skew_defect().as_f64()
            ),
        });
    }
    if a0.q().im <= R::zero() {
        return Err(Error::GermDegenerate {
            detail: format!("initial Im Q = {:.3e} not positive", a0.q().im.as_f64()),
        });
    }

    let span = t1 - t0;
    let n_steps = ((span / dt).ceil().as_f64() as usize).max(1);
    let h = span / R::of_usize(n_steps);
    let quarter_pi = R::FRAC_PI_4();
    let c_floor = R::of(GermState::<R>::C_FLOOR);

    let mut f = |t: R, y: &[R; 4]| variations_rhs(y, &drive.at(t), scales.kappa_tilde);

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    times.push(t0);
    states.push(*a0);

    let mut y = [a0.b.re, a0.b.im, a0.c.re, a0.c.im];
    let mut arg = a0.arg_c_unwrapped;
    for k in 0..n_steps {
        let t_start = t0 + h * R::of_usize(k);
        // Try progressively finer substepping until every substep advances
        // Arg C by less than π/4.
        let mut parts = 1usize;
        'attempt: loop {
            let hs = h / R::of_usize(parts);
            let mut yt = y;
            let mut arg_t = arg;
            let mut prev_arg = Complex::new(yt[2], yt[3]).arg();
            for j in 0..parts {
                let t = t_start + hs * R::of_usize(j);
                yt = rk4_step(&mut f, t, &yt, hs);
                if yt.iter().any(|v| !v.is_finite()) {
                    return Err(Error::StepRejected {
                        t: (t + hs).as_f64(),
                        detail: "germ state became non-finite".into(),
                    });
                }
                let c = Complex::new(yt[2], yt[3]);
                if c.norm() < c_floor {
                    return Err(Error::GermDegenerate {
                        detail: format!("|C| collapsed at t = {}", (t + hs).as_f64()),
                    });
                }
                let new_arg = c.arg();
                let delta = wrap_angle(new_arg - prev_arg);
                if delta.abs() >= quarter_pi {
                    if parts >= 1 << 16 {
                        return Err(Error::GermDegenerate {
                            detail: format!(
                                "Arg C advances more than π/4 even at {} substeps",
                                parts
                            ),
                        });
                    }
                    parts *= 2;
                    continue 'attempt;
                }
                arg_t = arg_t + delta;
                prev_arg = new_arg;
            }
            y = yt;
            arg = arg_t;
            break;
        }
        let state = GermState {
            b: Complex::new(y[0], y[1]),
            c: Complex::new(y[2], y[3]),
            arg_c_unwrapped: arg,
        };
        if state.q().im <= R::zero() {
            return Err(Error::GermDegenerate {
                detail: format!(
                    "Im Q = {:.3e} lost positivity at t = {}",
                    state.q().im.as_f64(),
                    (t_start + h).as_f64()
                ),
            });
        }
        times.push(t_start + h);
        states.push(state);
    }
    Ok(GermTrajectory { times, states })
}

/// The constant-parameter Floquet solution
/// a(t) = e^{iΩt}/√(Ωμ) · (−ρ + iΩ, μ), normalized to {a, a*} = 2i, with
/// Arg C unwrapped exactly as Ωt.
pub fn floquet_solution<R: Real>(
    set: &ParameterSet<R>,
    scales: &PhysicalScales<R>,
    t: R,
) -> Result<GermState<R>> {
    let f = derive_frequencies(set, scales)?;
    if set.mu <= R::zero() {
        return Err(Error::GermDegenerate {
            detail: format!("Floquet profile needs mu > 0, got {}", set.mu.as_f64()),
        });
    }
    let root = (f.omega * set.mu).sqrt();
    let phase = Complex::from_polar(R::one(), f.omega * t);
    let b = phase * Complex::new(-set.rho / root, f.omega / root);
    let c = phase * Complex::new(set.mu / root, R::zero());
    Ok(GermState {
        b,
        c,
        arg_c_unwrapped: f.omega * t,
    })
}

/// Slow-loop (WKB) expansion of the germ at a point s of the loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticGerm<R: Real> {
    /// Fast phase Φ(s) = ∫₀ˢ Ω dτ (multiply by T for physical time).
    pub phi: R,
    /// Slow phase φ(s) = −∫₀ˢ (μ/2Ω)(ρ/μ)′ dτ.
    pub phi_slow: R,
    /// Leading profile f⁽⁰⁾ = (−ρ + iΩ, μ)/√(Ωμ).
    pub f0: [Complex<R>; 2],
    /// f⁽⁰⁾*-component of the first correction: f⁽¹⁾ = β·f⁽⁰⁾*
    /// (the f⁽⁰⁾-parallel part is gauge and set to zero), with
    /// β = (μ/4Ω²)·((ρ − iΩ)/μ)′.
    pub beta: Complex<R>,
    /// Q⁽⁰⁾ = (−ρ + iΩ)/μ.
    pub q0: Complex<R>,
    /// Q⁽¹⁾ = −(1/2Ω)·((Ω + iρ)/μ)′ = −2iβΩ/μ.
    pub q1: Complex<R>,
}

/// Ω and the exact s-derivatives needed by the adiabatic formulas.
struct SlowDerivatives<R: Real> {
    mu: R,
    rho: R,
    omega: R,
    d_mu: R,
    d_rho: R,
    d_omega: R,
}

fn slow_derivatives<R: Real>(
    path: &ParameterPath<R>,
    s: R,
    scales: &PhysicalScales<R>,
) -> Result<SlowDerivatives<R>> {
    let set = path.at(s);
    let d = path.derivative(s);
    let f = derive_frequencies(&set, scales)?;
    let st_d = d.sigma + scales.kappa_tilde * d.a;
    let d_omega = (st_d * set.mu + f.sigma_tilde * d.mu - R::of(2.0) * set.rho * d.rho)
        / (R::of(2.0) * f.omega);
    Ok(SlowDerivatives {
        mu: set.mu,
        rho: set.rho,
        omega: f.omega,
        d_mu: d.mu,
        d_rho: d.rho,
        d_omega,
    })
}

/// Simpson quadrature of a fallible integrand over [0, s].
fn simpson_checked<R: Real>(mut f: impl FnMut(R) -> Result<R>, s: R, n: usize) -> Result<R> {
    if s == R::zero() {
        return Ok(R::zero());
    }
    let n = if n % 2 == 0 { n.max(2) } else { n + 1 };
    let h = s / R::of_usize(n);
    let mut acc = f(R::zero())? + f(s)?;
    for k in 1..n {
        let w = if k % 2 == 1 { R::of(4.0) } else { R::of(2.0) };
        acc = acc + w * f(h * R::of_usize(k))?;
    }
    Ok(acc * h / R::of(3.0))
}

/// Evaluates the slow-loop germ expansion at s: cumulative phases Φ, φ by
/// composite Simpson on the loop grid, profile pieces in closed form.
pub fn adiabatic_germ<R: Real>(
    path: &ParameterPath<R>,
    s: R,
    scales: &PhysicalScales<R>,
) -> Result<AdiabaticGerm<R>> {
    let n = ((s.as_f64() * path.sample_resolution() as f64).ceil() as usize).max(64);
    let phi = simpson_checked(
        |tau| Ok(derive_frequencies(&path.at(tau), scales)?.omega),
        s,
        n,
    )?;
    let phi_slow = simpson_checked(
        |tau| {
            let sd = slow_derivatives(path, tau, scales)?;
            let d_rho_over_mu = (sd.d_rho * sd.mu - sd.rho * sd.d_mu) / (sd.mu * sd.mu);
            Ok(-(sd.mu / (R::of(2.0) * sd.omega)) * d_rho_over_mu)
        },
        s,
        n,
    )?;

    let sd = slow_derivatives(path, s, scales)?;
    if sd.mu <= R::zero() {
        return Err(Error::GermDegenerate {
            detail: format!("adiabatic germ needs mu > 0, got {}", sd.mu.as_f64()),
        });
    }
    let root = (sd.omega * sd.mu).sqrt();
    let f0 = [
        Complex::new(-sd.rho / root, sd.omega / root),
        Complex::new(sd.mu / root, R::zero()),
    ];
    // ((ρ − iΩ)/μ)′ and ((Ω + iρ)/μ)′ by the quotient rule.
    let mu_sq = sd.mu * sd.mu;
    let d_rho_minus_i_omega_over_mu = Complex::new(
        (sd.d_rho * sd.mu - sd.rho * sd.d_mu) / mu_sq,
        -(sd.d_omega * sd.mu - sd.omega * sd.d_mu) / mu_sq,
    );
    let d_omega_plus_i_rho_over_mu = Complex::new(
        (sd.d_omega * sd.mu - sd.omega * sd.d_mu) / mu_sq,
        (sd.d_rho * sd.mu - sd.rho * sd.d_mu) / mu_sq,
    );
    let beta = d_rho_minus_i_omega_over_mu * (sd.mu / (R::of(4.0) * sd.omega * sd.omega));
    let q0 = Complex::new(-sd.rho / sd.mu, sd.omega / sd.mu);
    let q1 = -d_omega_plus_i_rho_over_mu / (R::of(2.0) * sd.omega);
    Ok(AdiabaticGerm {
        phi,
        phi_slow,
        f0,
        beta,
        q0,
        q1,
    })
}
