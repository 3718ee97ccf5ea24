//! Semiclassical wavepacket states on a spatial grid.
//!
//! The building blocks are Gaussian packets driven by a complex germ
//! (B, C): the squeezed vacuum, its excited (Fock) ladder obtained by
//! Hermite factors, and the stationary eigenstates of the frozen problem.
//! The module also provides the discrete Hamiltonian action (including the
//! nonlocal mean-field potential), quadrature moments, the classical action
//! integral, and CSV/binary serialization.
//!
//! Conventions baked into the constructors:
//!   Φ₀(x) = (πħ)^(−1/4) |C(0)|^(−1/2)
//!           · exp(−½ Δln|C| − (i/2) ΔArg C)
//!           · exp{(i/ħ)(S + P·Δx + ½ Q·Δx²)},          Δx = x − X,
//!   Φₙ(x) = (1/√n!) (i/√2)ⁿ e^(−i n ΔArg C) Hₙ(ξ) Φ₀,  ξ = √(Im Q/ħ)·Δx,
//! with Q = B/C and ΔArg C taken on the continuous branch carried by
//! [`GermState`]. A normalized germ (Im B C̄ = 1) yields unit-norm states.

use std::io::{self, Read as IoRead, Write};

use num_complex::Complex;

use crate::ehrenfest::{hes_hamiltonian, Drive, MomentState, MomentTrajectory};
use crate::error::{Error, Result};
use crate::germ::{floquet_solution, GermState};
use crate::grid::SpatialGrid;
use crate::params::{derive_frequencies, ParameterSet, PhysicalScales};
use crate::quadrature::cumulative_simpson;
use crate::real::Real;

/// A complex-valued state sampled on a uniform grid, together with its
/// nominal packet center (used for reporting, not re-derived from samples).
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction<R: Real> {
    pub grid: SpatialGrid<R>,
    pub values: Vec<Complex<R>>,
    pub center_x: R,
    pub center_p: R,
}

impl<R: Real> WaveFunction<R> {
    pub fn norm_sq(&self) -> R {
        self.grid.norm_sq(&self.values)
    }

    pub fn norm(&self) -> R {
        self.norm_sq().sqrt()
    }

    /// ⟨self, other⟩ with the first argument conjugated.
    pub fn overlap(&self, other: &Self) -> Result<Complex<R>> {
        if self.grid != other.grid {
            return Err(Error::InvalidConfig {
                detail: "overlap requires both states on the same grid".into(),
            });
        }
        Ok(self.grid.inner_product(&self.values, &other.values))
    }

    /// Largest boundary amplitude relative to the peak amplitude; a
    /// localization diagnostic (should stay at round-off for trapped states).
    pub fn boundary_fraction(&self) -> R {
        let peak = self
            .values
            .iter()
            .map(|v| v.norm())
            .fold(R::zero(), |a, b| a.max(b));
        if peak == R::zero() {
            return R::zero();
        }
        let first = self.values.first().map(|v| v.norm()).unwrap_or(R::zero());
        let last = self.values.last().map(|v| v.norm()).unwrap_or(R::zero());
        first.max(last) / peak
    }

    /// CSV rows `x,re_psi,im_psi,density` at full precision.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "x,re_psi,im_psi,density")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.grid.x(i).as_f64(),
                v.re.as_f64(),
                v.im.as_f64(),
                v.norm_sqr().as_f64()
            )?;
        }
        Ok(())
    }

    /// Binary layout: magic `GPWF`, version u32, then x_min, x_max (f64),
    /// n_points (u64), center_x, center_p (f64), then n_points interleaved
    /// (re, im) f64 pairs. All little-endian.
    pub fn write_binary<W: Write>(&self, out: &mut W) -> io::Result<()> {
        out.write_all(b"GPWF")?;
        out.write_all(&1u32.to_le_bytes())?;
        out.write_all(&self.grid.x_min().as_f64().to_le_bytes())?;
        out.write_all(&self.grid.x_max().as_f64().to_le_bytes())?;
        out.write_all(&(self.grid.n_points() as u64).to_le_bytes())?;
        out.write_all(&self.center_x.as_f64().to_le_bytes())?;
        out.write_all(&self.center_p.as_f64().to_le_bytes())?;
        for v in &self.values {
            out.write_all(&v.re.as_f64().to_le_bytes())?;
            out.write_all(&v.im.as_f64().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<In: IoRead>(input: &mut In) -> io::Result<Self> {
        fn bad(msg: &str) -> io::Error {
            io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
        }
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != b"GPWF" {
            return Err(bad("bad magic, not a wavefunction file"));
        }
        let mut u32buf = [0u8; 4];
        input.read_exact(&mut u32buf)?;
        if u32::from_le_bytes(u32buf) != 1 {
            return Err(bad("unsupported wavefunction format version"));
        }
        let mut f = [0u8; 8];
        let mut next = |input: &mut In| -> io::Result<f64> {
            input.read_exact(&mut f)?;
            Ok(f64::from_le_bytes(f))
        };
        let x_min = next(input)?;
        let x_max = next(input)?;
        let mut u64buf = [0u8; 8];
        input.read_exact(&mut u64buf)?;
        let n_points = u64::from_le_bytes(u64buf) as usize;
        let center_x = next(input)?;
        let center_p = next(input)?;
        let grid = SpatialGrid::new(R::of(x_min), R::of(x_max), n_points)
            .map_err(|e| bad(&format!("invalid stored grid: {e}")))?;
        let mut values = Vec::with_capacity(n_points);
        for _ in 0..n_points {
            let re = next(input)?;
            let im = next(input)?;
            values.push(Complex::new(R::of(re), R::of(im)));
        }
        Ok(Self {
            grid,
            values,
            center_x: R::of(center_x),
            center_p: R::of(center_p),
        })
    }
}

/// Physicists' Hermite polynomial Hₙ(ξ) by the three-term recurrence.
fn hermite<R: Real>(n: usize, xi: R) -> R {
    let two = R::of(2.0);
    let mut h_prev = R::one();
    if n == 0 {
        return h_prev;
    }
    let mut h = two * xi;
    for k in 1..n {
        let h_next = two * xi * h - two * R::of_usize(k) * h_prev;
        h_prev = h;
        h = h_next;
    }
    h
}

/// Squeezed-vacuum packet for a germ evolved from `germ0`, with classical
/// action `S` and center (P, X). A normalized germ gives a unit-norm state.
pub fn vacuum_state<R: Real>(
    germ: &GermState<R>,
    germ0: &GermState<R>,
    action: R,
    center_p: R,
    center_x: R,
    scales: &PhysicalScales<R>,
    grid: &SpatialGrid<R>,
) -> Result<WaveFunction<R>> {
    fock_state(0, germ, germ0, action, center_p, center_x, scales, grid)
}

/// Level-n excited packet on the same germ.
///
/// Exactness caveat: for this to solve the time-dependent equation, the
/// action must be accumulated along a moment trajectory whose σ_xx is that
/// of *this level* (the mean-field energy sees the actual packet width).
#[allow(clippy::too_many_arguments)]
pub fn fock_state<R: Real>(
    n: usize,
    germ: &GermState<R>,
    germ0: &GermState<R>,
    action: R,
    center_p: R,
    center_x: R,
    scales: &PhysicalScales<R>,
    grid: &SpatialGrid<R>,
) -> Result<WaveFunction<R>> {
    let hbar = scales.hbar;
    let q = germ.q();
    if q.im <= R::zero() {
        return Err(Error::GermDegenerate {
            detail: format!("Im Q = {:.3e} must be positive", q.im.as_f64()),
        });
    }
    let c_abs = germ.c.norm();
    let c0_abs = germ0.c.norm();
    if c0_abs < R::of(GermState::<R>::C_FLOOR) {
        return Err(Error::GermDegenerate {
            detail: "reference germ has |C(0)| below floor".into(),
        });
    }
    let d_ln = c_abs.ln() - c0_abs.ln();
    let d_arg = germ.arg_c_unwrapped - germ0.arg_c_unwrapped;

    // (πħ)^(−1/4)|C(0)|^(−1/2) e^(−½Δln|C|), a positive real amplitude.
    let amp =
        (R::PI() * hbar).powf(-R::of(0.25)) * c0_abs.powf(-R::of(0.5)) * (-d_ln / R::of(2.0)).exp();
    // 1/√n! · (i/√2)ⁿ, and the level phase e^(−i(n+½)ΔArgC) folded below.
    let mut ladder = Complex::new(R::one(), R::zero());
    let i_over_sqrt2 = Complex::new(R::zero(), R::one() / R::of(2.0).sqrt());
    for k in 1..=n {
        ladder = ladder * i_over_sqrt2 / R::of_usize(k).sqrt();
    }
    let level_phase = Complex::from_polar(R::one(), -(R::of_usize(n) + R::of(0.5)) * d_arg);
    let prefactor = ladder * level_phase * amp;

    let xi_scale = (q.im / hbar).sqrt();
    let i_over_hbar = Complex::new(R::zero(), R::one() / hbar);
    let half_q = q * R::of(0.5);
    let values: Vec<Complex<R>> = (0..grid.n_points())
        .map(|i| {
            let dx = grid.x(i) - center_x;
            let exponent = i_over_hbar
                * (Complex::new(action + center_p * dx, R::zero())
                    + half_q * Complex::new(dx * dx, R::zero()));
            prefactor * Complex::new(hermite(n, xi_scale * dx), R::zero()) * exponent.exp()
        })
        .collect();
    Ok(WaveFunction {
        grid: *grid,
        values,
        center_x,
        center_p,
    })
}

/// Stationary level-n state of the frozen parameter set: a Fock state on
/// the periodic (Floquet) germ at t = 0, centered at the origin, so
///   ψₙ ∝ Hₙ(√(Ω/ħμ) x) · exp{−((Ω + iρ)/(2ħμ)) x²}.
pub fn eigenstate<R: Real>(
    n: usize,
    set: &ParameterSet<R>,
    scales: &PhysicalScales<R>,
    grid: &SpatialGrid<R>,
) -> Result<WaveFunction<R>> {
    let germ0 = floquet_solution(set, scales, R::zero())?;
    fock_state(
        n,
        &germ0,
        &germ0,
        R::zero(),
        R::zero(),
        R::zero(),
        scales,
        grid,
    )
}

/// Oscillation energy of the stationary level-n state,
/// Eₙ = ħ(n + ½)(κ̃cμ/(2Ω) + Ω).
pub fn eigenvalue<R: Real>(
    n: usize,
    set: &ParameterSet<R>,
    scales: &PhysicalScales<R>,
) -> Result<R> {
    let f = derive_frequencies(set, scales)?;
    let mean_field = scales.kappa_tilde * set.c * set.mu / (R::of(2.0) * f.omega);
    Ok(scales.hbar * (R::of_usize(n) + R::of(0.5)) * (mean_field + f.omega))
}

/// Second-derivative stencil self-test: differentiates a Gaussian with the
/// state's own center and width and compares against the analytic result.
/// Rejects the grid when the relative L² residual exceeds `bound`.
fn kinetic_self_test<R: Real>(
    grid: &SpatialGrid<R>,
    x_bar: R,
    sigma_xx: R,
    bound: R,
) -> Result<()> {
    let four_s = R::of(4.0) * sigma_xx;
    let probe: Vec<Complex<R>> = (0..grid.n_points())
        .map(|i| {
            let u = grid.x(i) - x_bar;
            Complex::new((-u * u / four_s).exp(), R::zero())
        })
        .collect();
    let numeric = grid.second_derivative(&probe);
    let mut err = R::zero();
    let mut scale = R::zero();
    // Skip the two rows at each edge: their stencils are truncated by the
    // zero ghost points, which measures boundary placement, not resolution.
    for (i, p) in probe
        .iter()
        .enumerate()
        .skip(2)
        .take(grid.n_points().saturating_sub(4))
    {
        let u = grid.x(i) - x_bar;
        let exact = (u * u / (four_s * sigma_xx) - R::one() / (R::of(2.0) * sigma_xx)) * p.re;
        let d = numeric[i].re - exact;
        err = err + d * d;
        scale = scale + exact * exact;
    }
    let residual = (err / scale).sqrt();
    if !(residual <= bound) {
        return Err(Error::GridTooCoarse {
            residual: residual.as_f64(),
            bound: bound.as_f64(),
        });
    }
    Ok(())
}

const KINETIC_RESIDUAL_BOUND: f64 = 1e-6;

/// Raw density moments m₀ = ∫|ψ|², m₁ = ∫x|ψ|², m₂ = ∫x²|ψ|² (not centered,
/// not normalized): exactly what the nonlocal potential consumes.
pub fn density_moments<R: Real>(psi: &WaveFunction<R>) -> (R, R, R) {
    let mut m0 = R::zero();
    let mut m1 = R::zero();
    let mut m2 = R::zero();
    for (i, v) in psi.values.iter().enumerate() {
        let x = psi.grid.x(i);
        let d = v.norm_sqr();
        m0 = m0 + d;
        m1 = m1 + x * d;
        m2 = m2 + x * x * d;
    }
    let dx = psi.grid.dx();
    (m0 * dx, m1 * dx, m2 * dx)
}

/// Applies the full (nonlocal) Hamiltonian to a sampled state:
///
///   Hψ = −(ħ²μ/2)ψ″ + (σ/2)x²ψ − iħρ·½(xψ′ + (xψ)′)
///        + (κ/2)[a·x²·m₀ + 2b·x·m₁ + c·m₂]ψ,
///
/// with m₀, m₁, m₂ the raw density moments of ψ itself. The symmetrized
/// cross term keeps the discrete operator exactly Hermitian. Errors with
/// `GridTooCoarse` when the stencil cannot resolve the packet.
pub fn apply_hamiltonian<R: Real>(
    psi: &WaveFunction<R>,
    set: &ParameterSet<R>,
    scales: &PhysicalScales<R>,
) -> Result<WaveFunction<R>> {
    let (m0, m1, m2) = density_moments(psi);
    if m0 <= R::zero() {
        return Err(Error::InvalidConfig {
            detail: "cannot apply Hamiltonian to the zero state".into(),
        });
    }
    let x_bar = m1 / m0;
    let sigma_xx = (m2 / m0 - x_bar * x_bar).max(R::of(1e-300));
    kinetic_self_test(&psi.grid, x_bar, sigma_xx, R::of(KINETIC_RESIDUAL_BOUND))?;

    let grid = &psi.grid;
    let hbar = scales.hbar;
    let half = R::of(0.5);
    let kinetic_w = -half * hbar * hbar * set.mu;
    let second = grid.second_derivative(&psi.values);
    let first = grid.first_derivative(&psi.values);
    let x_psi: Vec<Complex<R>> = (0..grid.n_points())
        .map(|i| psi.values[i] * grid.x(i))
        .collect();
    let first_of_x_psi = grid.first_derivative(&x_psi);
    let cross_w = Complex::new(R::zero(), -hbar * set.rho * half);

    let values: Vec<Complex<R>> = (0..grid.n_points())
        .map(|i| {
            let x = grid.x(i);
            let v = psi.values[i];
            let potential = half * set.sigma * x * x
                + half
                    * scales.kappa
                    * (set.a * x * x * m0 + R::of(2.0) * set.b * x * m1 + set.c * m2);
            second[i] * kinetic_w + v * potential + cross_w * (first[i] * x + first_of_x_psi[i])
        })
        .collect();
    Ok(WaveFunction {
        grid: *grid,
        values,
        center_x: psi.center_x,
        center_p: psi.center_p,
    })
}

/// Rayleigh quotient Re⟨ψ|ℋψ⟩/‖ψ‖² and relative residual
/// ‖ℋψ − E_ref ψ‖/‖ψ‖ of a trial state against a reference energy.
pub fn rayleigh_and_residual<R: Real>(
    psi: &WaveFunction<R>,
    e_ref: R,
    set: &ParameterSet<R>,
    scales: &PhysicalScales<R>,
) -> Result<(R, R)> {
    let h_psi = apply_hamiltonian(psi, set, scales)?;
    let norm_sq = psi.norm_sq();
    if norm_sq <= R::zero() {
        return Err(Error::InvalidConfig {
            detail: "cannot form a Rayleigh quotient of the zero state".into(),
        });
    }
    let rayleigh = psi.overlap(&h_psi)?.re / norm_sq;
    let res_sq: R = h_psi
        .values
        .iter()
        .zip(&psi.values)
        .map(|(h, v)| (*h - *v * e_ref).norm_sqr())
        .sum();
    let residual = (res_sq * psi.grid.dx()).sqrt() / norm_sq.sqrt();
    Ok((rayleigh, residual))
}

/// Centered quadrature moments of a sampled state (normalized by ‖ψ‖²):
/// means (p̄, x̄) and the symmetrized covariances, with
///   σ_pp = ‖(p̂ − p̄)ψ‖²/‖ψ‖²,
///   σ_xp = Re ∫ ψ̄ (x − x̄)(−iħ∂ − p̄)ψ dx / ‖ψ‖².
pub fn quadrature_moments<R: Real>(
    psi: &WaveFunction<R>,
    scales: &PhysicalScales<R>,
) -> Result<MomentState<R>> {
    let (m0, m1, m2) = density_moments(psi);
    if m0 <= R::zero() {
        return Err(Error::InvalidConfig {
            detail: "cannot take moments of the zero state".into(),
        });
    }
    let x_bar = m1 / m0;
    let sigma_xx = m2 / m0 - x_bar * x_bar;
    kinetic_self_test(
        &psi.grid,
        x_bar,
        sigma_xx.max(R::of(1e-300)),
        R::of(KINETIC_RESIDUAL_BOUND),
    )?;

    let grid = &psi.grid;
    let hbar = scales.hbar;
    let first = grid.first_derivative(&psi.values);
    let minus_i_hbar = Complex::new(R::zero(), -hbar);

    let mut p_acc = R::zero();
    for (v, d) in psi.values.iter().zip(&first) {
        p_acc = p_acc + (v.conj() * minus_i_hbar * *d).re;
    }
    let p_bar = p_acc * grid.dx() / m0;

    let mut spp = R::zero();
    let mut sxp = R::zero();
    for (i, (v, d)) in psi.values.iter().zip(&first).enumerate() {
        let shifted = minus_i_hbar * *d - *v * p_bar;
        spp = spp + shifted.norm_sqr();
        sxp = sxp + (grid.x(i) - x_bar) * (v.conj() * shifted).re;
    }
    let spp = spp * grid.dx() / m0;
    let sxp = sxp * grid.dx() / m0;

    Ok(MomentState {
        p: p_bar,
        x: x_bar,
        sigma_pp: spp,
        sigma_xp: sxp,
        sigma_xx,
    })
}

/// Classical action S(t) = ∫₀ᵗ (P Ẋ − ℌ) dτ along a sampled moment
/// trajectory, returned at every sample time. Ẋ = μP + ρX is evaluated
/// from the drive rather than by numerical differentiation.
pub fn action_trajectory<R: Real>(
    traj: &MomentTrajectory<R>,
    drive: &Drive<'_, R>,
    scales: &PhysicalScales<R>,
) -> Vec<R> {
    let n = traj.times.len();
    if n < 2 {
        return vec![R::zero(); n];
    }
    let dt = traj.times[1] - traj.times[0];
    let integrand: Vec<R> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, g)| {
            let set = drive.at(t);
            let x_dot = set.mu * g.p + set.rho * g.x;
            g.p * x_dot - hes_hamiltonian(g, &set, scales)
        })
        .collect();
    cumulative_simpson(&integrand, dt)
}

/// Action of the width-stationary profile: S(t) = −(κ̃ c / 2) C₅ t.
pub fn stationary_action<R: Real>(
    c5: R,
    set: &ParameterSet<R>,
    scales: &PhysicalScales<R>,
    t: R,
) -> R {
    -scales.kappa_tilde * set.c * c5 * t / R::of(2.0)
}
