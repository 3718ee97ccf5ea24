//! Grid propagator for the nonlocal equation.
//!
//! The reference scheme is the implicit midpoint (Crank–Nicolson) rule
//!
//!   (I + iλ H_mid) ψ⁺ = (I − iλ H_mid) ψ,   λ = Δt/(2ħ),
//!
//! with H_mid built from the parameter values at t + Δt/2 and, for the
//! mean-field part, from the density moments iterated to self-consistency
//! (predictor–corrector on the time-averaged moments). H is the
//! pentadiagonal Hermitian matrix of the 4th-order stencils; each step
//! solves one banded system by LU with partial pivoting, so the update is
//! unitary up to round-off and second-order accurate in Δt.
//!
//! A Strang-split alternative (`Scheme::SplitQuadratic`) sandwiches the
//! midpoint step of the quadratic one-body part between two exact diagonal
//! phase kicks of the mean-field potential; it has the same order and is
//! used as an internal cross-check of the time discretization.

use num_complex::Complex;

use crate::ehrenfest::Drive;
use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::params::{derive_frequencies, ParameterSet, PhysicalScales};
use crate::real::Real;
use crate::states::{apply_hamiltonian, density_moments, WaveFunction};

/// Time discretization of one propagation step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Crank–Nicolson on the full Hamiltonian (reference scheme).
    ImplicitMidpoint,
    /// Strang splitting: mean-field phase kick, quadratic midpoint step,
    /// mean-field phase kick.
    SplitQuadratic,
}

/// Propagation controls. `self_consistency_iters` counts the banded solves
/// per step: 1 freezes the mean field at the step's start, 2 (default) adds
/// one corrector pass with time-averaged density moments. The grid is part
/// of the config so a run is fully described by (state, drive, config); it
/// must coincide with the grid the initial state lives on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig<R: Real> {
    pub dt: R,
    pub scheme: Scheme,
    pub self_consistency_iters: usize,
    pub grid: SpatialGrid<R>,
    /// Number of evenly spaced snapshots to record (the last one is the
    /// final state); 0 disables recording.
    pub n_snapshots: usize,
}

impl<R: Real> PropagatorConfig<R> {
    pub fn implicit_midpoint(dt: R, grid: SpatialGrid<R>) -> Self {
        Self {
            dt,
            scheme: Scheme::ImplicitMidpoint,
            self_consistency_iters: 2,
            grid,
            n_snapshots: 0,
        }
    }
}

/// Step-accuracy guard: Δt·max(Ω̃, 2Ω) must stay below this over the drive.
pub const STABILITY_THRESHOLD: f64 = 0.1;
/// Relative norm drift that aborts a run.
pub const NORM_DRIFT_LIMIT: f64 = 1e-4;
/// Relative boundary amplitude that aborts a run. No absorbing boundaries
/// are used: grids must be sized so the state's tail sits below this level,
/// and any growth past it indicates a mis-sized box, not physics.
pub const BOUNDARY_AMPLITUDE_LIMIT: f64 = 1e-12;

/// Health record of a completed propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationDiagnostics<R: Real> {
    pub norm_drift_max: R,
    pub boundary_max: R,
    pub energy_initial: R,
    pub energy_final: R,
    pub steps: usize,
}

/// Final state plus optional snapshots and diagnostics.
#[derive(Debug, Clone)]
pub struct PropagationResult<R: Real> {
    pub final_state: WaveFunction<R>,
    pub snapshot_times: Vec<R>,
    pub snapshots: Vec<WaveFunction<R>>,
    pub diagnostics: PropagationDiagnostics<R>,
}

/// Mean-field potential sampled on the grid:
/// V_eff(x) = (κ/2)(a·x²·m₀ + 2b·x·m₁ + c·m₂) with the raw density moments
/// of `psi`. Equivalent to integrating the quadratic kernel against |ψ|².
pub fn effective_potential<R: Real>(
    psi: &WaveFunction<R>,
    set: &ParameterSet<R>,
    scales: &PhysicalScales<R>,
) -> Vec<R> {
    let (m0, m1, m2) = density_moments(psi);
    mean_field_from_moments(&psi.grid, set, scales, (m0, m1, m2))
}

fn mean_field_from_moments<R: Real>(
    grid: &SpatialGrid<R>,
    set: &ParameterSet<R>,
    scales: &PhysicalScales<R>,
    (m0, m1, m2): (R, R, R),
) -> Vec<R> {
    let half_k = scales.kappa / R::of(2.0);
    (0..grid.n_points())
        .map(|i| {
            let x = grid.x(i);
            half_k * (set.a * x * x * m0 + R::of(2.0) * set.b * x * m1 + set.c * m2)
        })
        .collect()
}

/// Conserved energy functional: ⟨ψ|T + V_trap + cross|ψ⟩ + ½⟨ψ|V_eff|ψ⟩,
/// normalized by ‖ψ‖². The mean-field term enters at half weight, which is
/// what frozen-parameter dynamics conserves.
pub fn conserved_energy<R: Real>(
    psi: &WaveFunction<R>,
    set: &ParameterSet<R>,
    scales: &PhysicalScales<R>,
) -> Result<R> {
    let h_psi = apply_hamiltonian(psi, set, scales)?;
    let full = psi.overlap(&h_psi)?.re;
    let veff = effective_potential(psi, set, scales);
    let mut mf = R::zero();
    for (v, w) in psi.values.iter().zip(&veff) {
        mf = mf + v.norm_sqr() * *w;
    }
    let mf = mf * psi.grid.dx();
    Ok((full - mf / R::of(2.0)) / psi.norm_sq())
}

// ---------------------------------------------------------------------------
// Pentadiagonal Hermitian Hamiltonian and the banded linear solver.
// ---------------------------------------------------------------------------

/// H in diagonal storage: real main diagonal, first and second
/// superdiagonals (subdiagonals are their conjugates by Hermiticity).
struct PentaHamiltonian<R: Real> {
    diag: Vec<R>,
    sup1: Vec<Complex<R>>,
    sup2: Vec<Complex<R>>,
}

impl<R: Real> PentaHamiltonian<R> {
    /// Assembles the 4th-order discretization of
    ///   −(ħ²μ/2)∂² + (σ/2)x² + V(x) − iħρ·½(x∂ + ∂x)
    /// with `extra_diag` carrying whatever diagonal potential the scheme
    /// wants (mean field and/or kernel trap term).
    fn assemble(
        grid: &SpatialGrid<R>,
        set: &ParameterSet<R>,
        scales: &PhysicalScales<R>,
        extra_diag: &[R],
    ) -> Self {
        let n = grid.n_points();
        let dx = grid.dx();
        let hbar = scales.hbar;
        let kin = hbar * hbar * set.mu / R::of(2.0);
        let k_diag = kin * R::of(30.0) / (R::of(12.0) * dx * dx);
        let k_off1 = -kin * R::of(16.0) / (R::of(12.0) * dx * dx);
        let k_off2 = kin / (R::of(12.0) * dx * dx);
        let d1_off1 = R::of(8.0) / (R::of(12.0) * dx);
        let d1_off2 = -R::one() / (R::of(12.0) * dx);
        let cross = -hbar * set.rho / R::of(2.0);
        let half_sigma = set.sigma / R::of(2.0);

        let mut diag = Vec::with_capacity(n);
        let mut sup1 = Vec::with_capacity(n.saturating_sub(1));
        let mut sup2 = Vec::with_capacity(n.saturating_sub(2));
        for i in 0..n {
            let x = grid.x(i);
            diag.push(k_diag + half_sigma * x * x + extra_diag[i]);
            if i + 1 < n {
                let xm = x + grid.x(i + 1);
                sup1.push(Complex::new(k_off1, cross * xm * d1_off1));
            }
            if i + 2 < n {
                let xm = x + grid.x(i + 2);
                sup2.push(Complex::new(k_off2, cross * xm * d1_off2));
            }
        }
        Self { diag, sup1, sup2 }
    }

    fn apply(&self, v: &[Complex<R>]) -> Vec<Complex<R>> {
        let n = v.len();
        (0..n)
            .map(|i| {
                let mut acc = v[i] * self.diag[i];
                if i + 1 < n {
                    acc = acc + self.sup1[i] * v[i + 1];
                }
                if i + 2 < n {
                    acc = acc + self.sup2[i] * v[i + 2];
                }
                if i >= 1 {
                    acc = acc + self.sup1[i - 1].conj() * v[i - 1];
                }
                if i >= 2 {
                    acc = acc + self.sup2[i - 2].conj() * v[i - 2];
                }
                acc
            })
            .collect()
    }
}

const KL: usize = 2;
const KU_FILL: usize = 4; // upper bandwidth after pivoting fill (kl + ku)
const LDAB: usize = 7; // 2*kl + ku + 1 storage rows

/// Banded complex matrix in LAPACK-style storage with room for pivoting
/// fill; entry (i, j) lives at ab[j·LDAB + KU_FILL + i − j].
struct BandedLu<R: Real> {
    n: usize,
    ab: Vec<Complex<R>>,
    piv: Vec<usize>,
}

impl<R: Real> BandedLu<R> {
    #[inline]
    fn idx(i: usize, j: usize) -> usize {
        j * LDAB + (KU_FILL + i - j)
    }

    /// Builds I + z·H for pentadiagonal Hermitian H.
    fn cayley(h: &PentaHamiltonian<R>, z: Complex<R>) -> Self {
        let n = h.diag.len();
        let zero = Complex::new(R::zero(), R::zero());
        let one = Complex::new(R::one(), R::zero());
        let mut ab = vec![zero; LDAB * n];
        for i in 0..n {
            ab[Self::idx(i, i)] = one + z * h.diag[i];
            if i + 1 < n {
                ab[Self::idx(i, i + 1)] = z * h.sup1[i];
                ab[Self::idx(i + 1, i)] = z * h.sup1[i].conj();
            }
            if i + 2 < n {
                ab[Self::idx(i, i + 2)] = z * h.sup2[i];
                ab[Self::idx(i + 2, i)] = z * h.sup2[i].conj();
            }
        }
        Self {
            n,
            ab,
            piv: vec![0; n],
        }
    }

    fn factor(&mut self) -> Result<()> {
        let n = self.n;
        for k in 0..n {
            let i_hi = (k + KL).min(n - 1);
            let mut p = k;
            let mut best = self.ab[Self::idx(k, k)].norm_sqr();
            for i in (k + 1)..=i_hi {
                let mag = self.ab[Self::idx(i, k)].norm_sqr();
                if mag > best {
                    best = mag;
                    p = i;
                }
            }
            if best == R::zero() {
                return Err(Error::StepRejected {
                    t: f64::NAN,
                    detail: format!("singular banded system at column {k}"),
                });
            }
            self.piv[k] = p;
            let j_hi = (k + KU_FILL).min(n - 1);
            if p != k {
                for j in k..=j_hi {
                    self.ab.swap(Self::idx(k, j), Self::idx(p, j));
                }
            }
            let pivot = self.ab[Self::idx(k, k)];
            for i in (k + 1)..=i_hi {
                let l = self.ab[Self::idx(i, k)] / pivot;
                self.ab[Self::idx(i, k)] = l;
                for j in (k + 1)..=j_hi {
                    let sub = l * self.ab[Self::idx(k, j)];
                    let t = self.ab[Self::idx(i, j)] - sub;
                    self.ab[Self::idx(i, j)] = t;
                }
            }
        }
        Ok(())
    }

    fn solve(&self, b: &mut [Complex<R>]) {
        let n = self.n;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let i_hi = (k + KL).min(n - 1);
            for i in (k + 1)..=i_hi {
                let l = self.ab[Self::idx(i, k)];
                let t = b[i] - l * b[k];
                b[i] = t;
            }
        }
        for i in (0..n).rev() {
            let j_hi = (i + KU_FILL).min(n - 1);
            let mut acc = b[i];
            for j in (i + 1)..=j_hi {
                acc = acc - self.ab[Self::idx(i, j)] * b[j];
            }
            b[i] = acc / self.ab[Self::idx(i, i)];
        }
    }
}

// ---------------------------------------------------------------------------
// Stepping.
// ---------------------------------------------------------------------------

fn moments_of_values<R: Real>(grid: &SpatialGrid<R>, v: &[Complex<R>]) -> (R, R, R) {
    let mut m0 = R::zero();
    let mut m1 = R::zero();
    let mut m2 = R::zero();
    for (i, a) in v.iter().enumerate() {
        let x = grid.x(i);
        let d = a.norm_sqr();
        m0 = m0 + d;
        m1 = m1 + x * d;
        m2 = m2 + x * x * d;
    }
    (m0 * grid.dx(), m1 * grid.dx(), m2 * grid.dx())
}

/// One Crank–Nicolson step with the mean field iterated to
/// self-consistency on the time-averaged density moments.
fn step_implicit_midpoint<R: Real>(
    grid: &SpatialGrid<R>,
    values: &[Complex<R>],
    set_mid: &ParameterSet<R>,
    scales: &PhysicalScales<R>,
    dt: R,
    iters: usize,
) -> Result<Vec<Complex<R>>> {
    let lambda = dt / (R::of(2.0) * scales.hbar);
    let z = Complex::new(R::zero(), lambda);
    let m_start = moments_of_values(grid, values);
    let mut m_mid = m_start;
    let mut out = values.to_vec();
    for _ in 0..iters.max(1) {
        let extra = mean_field_from_moments(grid, set_mid, scales, m_mid);
        let h = PentaHamiltonian::assemble(grid, set_mid, scales, &extra);
        let h_psi = h.apply(values);
        let mut rhs: Vec<Complex<R>> = values
            .iter()
            .zip(&h_psi)
            .map(|(v, hv)| *v - z * *hv)
            .collect();
        let mut a = BandedLu::cayley(&h, z);
        a.factor()?;
        a.solve(&mut rhs);
        out = rhs;
        let m_end = moments_of_values(grid, &out);
        m_mid = (
            (m_start.0 + m_end.0) / R::of(2.0),
            (m_start.1 + m_end.1) / R::of(2.0),
            (m_start.2 + m_end.2) / R::of(2.0),
        );
    }
    Ok(out)
}

/// One Strang-split step: exact mean-field phase for dt/2, quadratic
/// midpoint step for dt, mean-field phase for dt/2.
fn step_split_quadratic<R: Real>(
    grid: &SpatialGrid<R>,
    values: &[Complex<R>],
    set_mid: &ParameterSet<R>,
    scales: &PhysicalScales<R>,
    dt: R,
) -> Result<Vec<Complex<R>>> {
    let kick = |v: &[Complex<R>]| -> Vec<Complex<R>> {
        let m = moments_of_values(grid, v);
        let veff = mean_field_from_moments(grid, set_mid, scales, m);
        let w = -dt / (R::of(2.0) * scales.hbar);
        v.iter()
            .zip(&veff)
            .map(|(a, &p)| *a * Complex::from_polar(R::one(), w * p))
            .collect()
    };
    let half_kicked = kick(values);

    let lambda = dt / (R::of(2.0) * scales.hbar);
    let z = Complex::new(R::zero(), lambda);
    let zero_extra = vec![R::zero(); grid.n_points()];
    let h = PentaHamiltonian::assemble(grid, set_mid, scales, &zero_extra);
    let h_psi = h.apply(&half_kicked);
    let mut rhs: Vec<Complex<R>> = half_kicked
        .iter()
        .zip(&h_psi)
        .map(|(v, hv)| *v - z * *hv)
        .collect();
    let mut a = BandedLu::cayley(&h, z);
    a.factor()?;
    a.solve(&mut rhs);

    Ok(kick(&rhs))
}

/// Propagates `initial` from t_span.0 to t_span.1 under the drive.
///
/// Aborts with `InvalidConfig` when Δt under-resolves the fastest frequency
/// on the drive, and with `StabilityLost` when the norm drifts or the
/// packet reaches the boundary of the box.
pub fn propagate<R: Real>(
    initial: &WaveFunction<R>,
    drive: Drive<'_, R>,
    t_span: (R, R),
    config: &PropagatorConfig<R>,
    scales: &PhysicalScales<R>,
) -> Result<PropagationResult<R>> {
    let (t0, t1) = t_span;
    if !(config.dt > R::zero()) || t1 <= t0 {
        return Err(Error::InvalidConfig {
            detail: "propagate needs dt > 0 and t1 > t0".into(),
        });
    }
    if initial.grid != config.grid {
        return Err(Error::InvalidConfig {
            detail: "initial state lives on a different grid than the config".into(),
        });
    }
    // Resolution guard over the drive (256 samples cover a smooth loop).
    let mut fastest = R::zero();
    match drive {
        Drive::Fixed(set) => {
            let f = derive_frequencies(&set, scales)?;
            fastest = f.omega_tilde.max(R::of(2.0) * f.omega);
        }
        Drive::Loop(path) => {
            for j in 0..256 {
                let set = path.at(R::of_usize(j) / R::of(256.0));
                let f = derive_frequencies(&set, scales)?;
                fastest = fastest.max(f.omega_tilde.max(R::of(2.0) * f.omega));
            }
        }
    }
    if config.dt * fastest >= R::of(STABILITY_THRESHOLD) {
        return Err(Error::InvalidConfig {
            detail: format!(
                "dt·max(Ω̃, 2Ω) = {:.3e} exceeds {}",
                (config.dt * fastest).as_f64(),
                STABILITY_THRESHOLD
            ),
        });
    }

    let span = t1 - t0;
    let n_steps = ((span / config.dt).ceil().as_f64() as usize).max(1);
    let h = span / R::of_usize(n_steps);

    let grid = initial.grid;
    let norm0 = initial.norm();
    if norm0 <= R::zero() {
        return Err(Error::InvalidConfig {
            detail: "cannot propagate the zero state".into(),
        });
    }
    let energy_initial = {
        let set0 = drive.at(t0);
        conserved_energy(initial, &set0, scales)?
    };

    let snapshot_steps: Vec<usize> = if config.n_snapshots == 0 {
        Vec::new()
    } else {
        let mut v: Vec<usize> = (1..=config.n_snapshots)
            .map(|k| (k * n_steps) / config.n_snapshots)
            .collect();
        v.dedup();
        v
    };
    let mut snapshots = Vec::with_capacity(snapshot_steps.len());
    let mut snapshot_times = Vec::with_capacity(snapshot_steps.len());
    let mut next_snapshot = 0usize;

    let mut psi = initial.clone();
    let mut norm_drift_max = R::zero();
    let mut boundary_max = psi.boundary_fraction();

    for step in 0..n_steps {
        let t = t0 + h * R::of_usize(step);
        let set_mid = drive.at(t + h / R::of(2.0));
        let new_values = match config.scheme {
            Scheme::ImplicitMidpoint => step_implicit_midpoint(
                &grid,
                &psi.values,
                &set_mid,
                scales,
                h,
                config.self_consistency_iters,
            )?,
            Scheme::SplitQuadratic => {
                step_split_quadratic(&grid, &psi.values, &set_mid, scales, h)?
            }
        };
        psi.values = new_values;
        let t_next = t0 + h * R::of_usize(step + 1);

        let norm = psi.norm();
        if !norm.is_finite() {
            return Err(Error::StepRejected {
                t: t_next.as_f64(),
                detail: "state became non-finite".into(),
            });
        }
        let drift = (norm - norm0).abs() / norm0;
        norm_drift_max = norm_drift_max.max(drift);
        if drift > R::of(NORM_DRIFT_LIMIT) {
            return Err(Error::StabilityLost {
                t: t_next.as_f64(),
                detail: format!("relative norm drift {:.3e}", drift.as_f64()),
            });
        }
        let boundary = psi.boundary_fraction();
        boundary_max = boundary_max.max(boundary);
        if boundary > R::of(BOUNDARY_AMPLITUDE_LIMIT) {
            return Err(Error::StabilityLost {
                t: t_next.as_f64(),
                detail: format!(
                    "boundary amplitude fraction {:.3e}: packet reached the box",
                    boundary.as_f64()
                ),
            });
        }

        if next_snapshot < snapshot_steps.len() && step + 1 == snapshot_steps[next_snapshot] {
            snapshots.push(psi.clone());
            snapshot_times.push(t_next);
            next_snapshot += 1;
        }
    }

    let energy_final = {
        let set1 = drive.at(t1);
        conserved_energy(&psi, &set1, scales)?
    };

    Ok(PropagationResult {
        final_state: psi,
        snapshot_times,
        snapshots,
        diagnostics: PropagationDiagnostics {
            norm_drift_max,
            boundary_max,
            energy_initial,
            energy_final,
            steps: n_steps,
        },
    })
}
