//! Hamiltonian parameters, derived effective frequencies, periodic parameter
//! loops, and their validity checks.
//!
//! The instantaneous Hamiltonian is fixed by six real coefficients
//! R = (μ, σ, ρ, a, b, c): μ multiplies p², σ multiplies x², ρ the symmetrized
//! cross term, and (a, b, c) the quadratic interaction kernel
//! a·x² + 2b·x·y + c·y². After absorbing the squared norm into the coupling
//! κ̃, every derived quantity depends on the kernel only through the shifted
//! stiffnesses σ̃ = σ + κ̃a, σ₀ = σ + κ̃(a+b), σ̄ = σ + κ̃(a+c) and the
//! frequencies Ω = √(σ̃μ − ρ²), Ω̃ = √(σ₀μ − ρ²). Localized (normalizable,
//! oscillatory) dynamics requires both squares to be positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Names of the six coefficient slots, in canonical order.
pub const COMPONENT_NAMES: [&str; 6] = ["mu", "sigma", "rho", "a", "b", "c"];

/// Global scales: Planck constant and the nonlinear coupling.
///
/// `kappa_tilde` = κ·‖Ψ‖² is the coupling that actually enters every formula;
/// `kappa` is kept so the pairing can be cross-checked against a concrete
/// state's squared norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalScales<R: Real> {
    pub hbar: R,
    pub kappa: R,
    pub kappa_tilde: R,
}

impl<R: Real> PhysicalScales<R> {
    /// Scales for a unit-norm working state, where κ̃ = κ.
    pub fn unit_norm(hbar: R, kappa_tilde: R) -> Result<Self> {
        Self::with_norm_sq(hbar, kappa_tilde, R::one())
    }

    /// Scales for a state of squared norm `norm_sq`: κ̃ = κ·norm_sq.
    pub fn with_norm_sq(hbar: R, kappa: R, norm_sq: R) -> Result<Self> {
        if !(hbar.is_finite() && hbar > R::zero()) {
            return Err(Error::InvalidConfig {
                detail: format!("hbar must be finite and positive, got {}", hbar.as_f64()),
            });
        }
        if !(kappa.is_finite() && norm_sq.is_finite() && norm_sq > R::zero()) {
            return Err(Error::InvalidConfig {
                detail: "kappa and norm_sq must be finite, norm_sq positive".into(),
            });
        }
        Ok(Self {
            hbar,
            kappa,
            kappa_tilde: kappa * norm_sq,
        })
    }

    /// Does κ̃ = κ·norm_sq hold to within `tol` (absolute)?
    pub fn consistent_with_norm_sq(&self, norm_sq: R, tol: R) -> bool {
        (self.kappa_tilde - self.kappa * norm_sq).abs() <= tol
    }
}

/// Instantaneous Hamiltonian coefficients R = (μ, σ, ρ, a, b, c).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterSet<R: Real> {
    pub mu: R,
    pub sigma: R,
    pub rho: R,
    pub a: R,
    pub b: R,
    pub c: R,
}

impl<R: Real> ParameterSet<R> {
    pub fn new(mu: R, sigma: R, rho: R, a: R, b: R, c: R) -> Result<Self> {
        let set = Self {
            mu,
            sigma,
            rho,
            a,
            b,
            c,
        };
        for (name, v) in COMPONENT_NAMES.iter().zip(set.as_array()) {
            if !v.is_finite() {
                return Err(Error::InvalidConfig {
                    detail: format!("parameter {name} is not finite"),
                });
            }
        }
        Ok(set)
    }

    /// Pure-oscillator coefficients (μ, σ) with no cross term or kernel.
    pub fn oscillator(mu: R, sigma: R) -> Self {
        Self {
            mu,
            sigma,
            rho: R::zero(),
            a: R::zero(),
            b: R::zero(),
            c: R::zero(),
        }
    }

    pub fn as_array(&self) -> [R; 6] {
        [self.mu, self.sigma, self.rho, self.a, self.b, self.c]
    }

    pub fn from_array(v: [R; 6]) -> Self {
        Self {
            mu: v[0],
            sigma: v[1],
            rho: v[2],
            a: v[3],
            b: v[4],
            c: v[5],
        }
    }

    /// Method form of [`derive_frequencies`].
    pub fn frequencies(&self, scales: &PhysicalScales<R>) -> Result<DerivedFrequencies<R>> {
        derive_frequencies(self, scales)
    }
}

/// Effective stiffnesses and frequencies derived from a parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedFrequencies<R: Real> {
    /// σ₀ = σ + κ̃(a + b): drives the first-moment (mean) oscillation.
    pub sigma0: R,
    /// σ̃ = σ + κ̃a: drives the second-moment (width) oscillation.
    pub sigma_tilde: R,
    /// σ̄ = σ + κ̃(a + c): appears in the curvature of the geometric phase.
    pub sigma_bar: R,
    /// Ω = √(σ̃μ − ρ²).
    pub omega: R,
    /// Ω̃ = √(σ₀μ − ρ²).
    pub omega_tilde: R,
}

/// Computes σ₀, σ̃, σ̄ and the frequencies Ω, Ω̃ from instantaneous
/// coefficients, failing when the localization condition does not hold.
pub fn derive_frequencies<R: Real>(
    set: &ParameterSet<R>,
    scales: &PhysicalScales<R>,
) -> Result<DerivedFrequencies<R>> {
    let kt = scales.kappa_tilde;
    let sigma_tilde = set.sigma + kt * set.a;
    let sigma0 = set.sigma + kt * (set.a + set.b);
    let sigma_bar = set.sigma + kt * (set.a + set.c);
    let omega_sq = sigma_tilde * set.mu - set.rho * set.rho;
    let omega_tilde_sq = sigma0 * set.mu - set.rho * set.rho;
    if omega_sq <= R::zero() || omega_tilde_sq <= R::zero() {
        return Err(Error::LocalizationViolated {
            mu: set.mu.as_f64(),
            sigma: set.sigma.as_f64(),
            rho: set.rho.as_f64(),
            omega_sq: omega_sq.as_f64(),
            omega_tilde_sq: omega_tilde_sq.as_f64(),
        });
    }
    Ok(DerivedFrequencies {
        sigma0,
        sigma_tilde,
        sigma_bar,
        omega: omega_sq.sqrt(),
        omega_tilde: omega_tilde_sq.sqrt(),
    })
}

/// One coefficient's dependence on the slow variable s ∈ [0, 1]:
/// a real trigonometric polynomial
/// f(s) = const + Σ_k cos_k·cos(2πks) + Σ_k sin_k·sin(2πks).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FourierSeries<R: Real> {
    pub constant: R,
    pub cos: Vec<R>,
    pub sin: Vec<R>,
}

impl<R: Real> FourierSeries<R> {
    pub fn constant(value: R) -> Self {
        Self {
            constant: value,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    pub fn new(constant: R, cos: Vec<R>, sin: Vec<R>) -> Self {
        Self { constant, cos, sin }
    }

    pub fn is_constant(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|v| *v == R::zero())
    }

    pub fn eval(&self, s: R) -> R {
        let tau = R::TAU() * s;
        let mut acc = self.constant;
        for (k, &ck) in self.cos.iter().enumerate() {
            acc = acc + ck * (tau * R::of_usize(k + 1)).cos();
        }
        for (k, &sk) in self.sin.iter().enumerate() {
            acc = acc + sk * (tau * R::of_usize(k + 1)).sin();
        }
        acc
    }

    /// Exact derivative d/ds.
    pub fn derivative(&self, s: R) -> R {
        let tau = R::TAU() * s;
        let mut acc = R::zero();
        for (k, &ck) in self.cos.iter().enumerate() {
            let kk = R::of_usize(k + 1);
            acc = acc - ck * kk * R::TAU() * (tau * kk).sin();
        }
        for (k, &sk) in self.sin.iter().enumerate() {
            let kk = R::of_usize(k + 1);
            acc = acc + sk * kk * R::TAU() * (tau * kk).cos();
        }
        acc
    }

    /// Trigonometric interpolation of `values` sampled at s = j/N, j = 0..N-1.
    ///
    /// Uses the naive real DFT; for N even the Nyquist cosine coefficient is
    /// halved so the interpolant is real and matches every sample exactly.
    pub fn fit_samples(values: &[R]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::InvalidPath {
                detail: format!("need at least 2 samples for interpolation, got {n}"),
            });
        }
        let nf = R::of_usize(n);
        let mean = values.iter().copied().sum::<R>() / nf;
        let kmax = n / 2;
        let mut cos = vec![R::zero(); kmax];
        let mut sin = vec![R::zero(); kmax];
        for k in 1..=kmax {
            let mut ak = R::zero();
            let mut bk = R::zero();
            for (j, &v) in values.iter().enumerate() {
                let ang = R::TAU() * R::of_usize(k * j) / nf;
                ak = ak + v * ang.cos();
                bk = bk + v * ang.sin();
            }
            let two_over_n = R::of(2.0) / nf;
            ak = ak * two_over_n;
            bk = bk * two_over_n;
            if n % 2 == 0 && k == kmax {
                ak = ak / R::of(2.0);
                bk = R::zero();
            }
            cos[k - 1] = ak;
            sin[k - 1] = bk;
        }
        Ok(Self {
            constant: mean,
            cos,
            sin,
        })
    }
}

/// A T-periodic closed loop s ∈ [0, 1] ↦ R(s) in parameter space, stored as
/// one trigonometric polynomial per coefficient, so the loop closes exactly
/// and derivatives are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPath<R: Real> {
    series: [FourierSeries<R>; 6],
    period: R,
    n_samples: usize,
}

/// Validation summary for a parameter loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathDiagnostics<R: Real> {
    /// min over the loop of Ω(s).
    pub omega_min: R,
    /// min over the loop of Ω̃(s).
    pub omega_tilde_min: R,
    /// min over the loop of |μ(s)|.
    pub mu_min_abs: R,
    /// Slow-variation diagnostic: max over components i of
    /// max_s |R_i'(s)| / max_s |R_i(s)|, with identically-zero components
    /// contributing 0. The amplitude normalization keeps the number finite
    /// for components that cross zero. Reported, never enforced; divide by
    /// T·Ω to compare rates against the fast frequency.
    pub adiabaticity: R,
}

impl<R: Real> ParameterPath<R> {
    /// Default sampling resolution for validation and diagnostics.
    pub const DEFAULT_SAMPLES: usize = 512;

    /// Builds a loop from six coefficient series in canonical order
    /// (μ, σ, ρ, a, b, c).
    pub fn from_series(series: [FourierSeries<R>; 6], period: R) -> Result<Self> {
        if !(period.is_finite() && period > R::zero()) {
            return Err(Error::InvalidPath {
                detail: format!(
                    "period must be finite and positive, got {}",
                    period.as_f64()
                ),
            });
        }
        for (name, s) in COMPONENT_NAMES.iter().zip(series.iter()) {
            let bad = !s.constant.is_finite() || s.cos.iter().chain(&s.sin).any(|v| !v.is_finite());
            if bad {
                return Err(Error::InvalidPath {
                    detail: format!("series for {name} contains non-finite coefficients"),
                });
            }
        }
        Ok(Self {
            series,
            period,
            n_samples: Self::DEFAULT_SAMPLES,
        })
    }

    /// A frozen loop: R(s) ≡ `set` for all s.
    pub fn frozen(set: ParameterSet<R>, period: R) -> Result<Self> {
        let v = set.as_array();
        Self::from_series(v.map(FourierSeries::constant), period)
    }

    /// Builds a loop by trigonometric interpolation of `sets` sampled
    /// uniformly at s = j/N; the interpolant closes exactly by construction.
    pub fn from_samples(sets: &[ParameterSet<R>], period: R) -> Result<Self> {
        if sets.len() < 2 {
            return Err(Error::InvalidPath {
                detail: format!("need at least 2 parameter samples, got {}", sets.len()),
            });
        }
        let mut series: [FourierSeries<R>; 6] = Default::default();
        for i in 0..6 {
            let column: Vec<R> = sets.iter().map(|s| s.as_array()[i]).collect();
            series[i] = FourierSeries::fit_samples(&column)?;
        }
        let mut path = Self::from_series(series, period)?;
        path.n_samples = sets.len().max(Self::DEFAULT_SAMPLES);
        Ok(path)
    }

    /// Overrides the sampling resolution used by validation/diagnostics.
    pub fn with_samples(mut self, n: usize) -> Self {
        self.n_samples = n.max(8);
        self
    }

    pub fn period(&self) -> R {
        self.period
    }

    pub fn sample_resolution(&self) -> usize {
        self.n_samples
    }

    pub fn series(&self) -> &[FourierSeries<R>; 6] {
        &self.series
    }

    /// R(s). The representation is 1-periodic in s by construction, so any
    /// real argument is accepted.
    pub fn at(&self, s: R) -> ParameterSet<R> {
        let v = [
            self.series[0].eval(s),
            self.series[1].eval(s),
            self.series[2].eval(s),
            self.series[3].eval(s),
            self.series[4].eval(s),
            self.series[5].eval(s),
        ];
        ParameterSet::from_array(v)
    }

    /// Exact derivative dR/ds.
    pub fn derivative(&self, s: R) -> ParameterSet<R> {
        let v = [
            self.series[0].derivative(s),
            self.series[1].derivative(s),
            self.series[2].derivative(s),
            self.series[3].derivative(s),
            self.series[4].derivative(s),
            self.series[5].derivative(s),
        ];
        ParameterSet::from_array(v)
    }

    /// Checks localization (Ω, Ω̃ > 0) and non-degenerate mass (μ bounded
    /// away from 0, no sign change) on a uniform sample of the loop, and
    /// reports diagnostics. Fails with `LocalizationViolated` or
    /// `InvalidPath` on violation.
    pub fn validate(&self, scales: &PhysicalScales<R>) -> Result<PathDiagnostics<R>> {
        let n = self.n_samples;
        let mut omega_min = R::infinity();
        let mut omega_tilde_min = R::infinity();
        let mut mu_min_abs = R::infinity();
        let mut mu_max_abs = R::zero();
        let mut max_rate = [R::zero(); 6];
        let mut max_mag = [R::zero(); 6];
        let mut mu_sign = R::zero();
        for j in 0..n {
            let s = R::of_usize(j) / R::of_usize(n);
            let set = self.at(s);
            let freq = derive_frequencies(&set, scales)?;
            omega_min = omega_min.min(freq.omega);
            omega_tilde_min = omega_tilde_min.min(freq.omega_tilde);
            mu_min_abs = mu_min_abs.min(set.mu.abs());
            mu_max_abs = mu_max_abs.max(set.mu.abs());
            if set.mu != R::zero() {
                let sign = set.mu.signum();
                if mu_sign == R::zero() {
                    mu_sign = sign;
                } else if sign != mu_sign {
                    return Err(Error::InvalidPath {
                        detail: format!("mass coefficient mu changes sign near s = {}", s.as_f64()),
                    });
                }
            }
            let d = self.derivative(s);
            for (i, (ri, di)) in set.as_array().into_iter().zip(d.as_array()).enumerate() {
                max_rate[i] = max_rate[i].max(di.abs());
                max_mag[i] = max_mag[i].max(ri.abs());
            }
        }
        let mut adiabaticity = R::zero();
        for i in 0..6 {
            if max_mag[i] > R::zero() {
                adiabaticity = adiabaticity.max(max_rate[i] / max_mag[i]);
            }
        }
        let mu_floor = R::of(1e-10) * (R::one() + mu_max_abs);
        if mu_min_abs < mu_floor {
            return Err(Error::InvalidPath {
                detail: format!(
                    "mass coefficient mu degenerates: min |mu| = {:.3e}",
                    mu_min_abs.as_f64()
                ),
            });
        }
        Ok(PathDiagnostics {
            omega_min,
            omega_tilde_min,
            mu_min_abs,
            adiabaticity,
        })
    }
}

/// Serialization schema for one coefficient's Fourier series.
///
/// JSON shape: `{"const": 2.0, "cos_coeffs": [1.0], "sin_coeffs": []}`;
/// every field may be omitted (defaults to zero).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    #[serde(rename = "const", default)]
    pub constant: f64,
    #[serde(default)]
    pub cos_coeffs: Vec<f64>,
    #[serde(default)]
    pub sin_coeffs: Vec<f64>,
}

impl SeriesSpec {
    pub fn to_series<R: Real>(&self) -> FourierSeries<R> {
        FourierSeries {
            constant: R::of(self.constant),
            cos: self.cos_coeffs.iter().map(|&v| R::of(v)).collect(),
            sin: self.sin_coeffs.iter().map(|&v| R::of(v)).collect(),
        }
    }

    pub fn from_series<R: Real>(series: &FourierSeries<R>) -> Self {
        Self {
            constant: series.constant.as_f64(),
            cos_coeffs: series.cos.iter().map(|v| v.as_f64()).collect(),
            sin_coeffs: series.sin.iter().map(|v| v.as_f64()).collect(),
        }
    }
}

/// Loop definition file: per-coefficient Fourier series plus the period,
/// scales, and sampling resolution. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSpec {
    #[serde(rename = "period_T")]
    pub period_t: f64,
    pub hbar: f64,
    pub kappa_tilde: f64,
    /// Sampling resolution for validation and loop quadratures.
    #[serde(default = "LoopSpec::default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub mu: SeriesSpec,
    #[serde(default)]
    pub sigma: SeriesSpec,
    #[serde(default)]
    pub rho: SeriesSpec,
    #[serde(default)]
    pub a: SeriesSpec,
    #[serde(default)]
    pub b: SeriesSpec,
    #[serde(default)]
    pub c: SeriesSpec,
}

impl LoopSpec {
    fn default_samples() -> usize {
        ParameterPath::<f64>::DEFAULT_SAMPLES
    }

    pub fn to_path<R: Real>(&self) -> Result<ParameterPath<R>> {
        let series = [
            self.mu.to_series(),
            self.sigma.to_series(),
            self.rho.to_series(),
            self.a.to_series(),
            self.b.to_series(),
            self.c.to_series(),
        ];
        Ok(ParameterPath::from_series(series, R::of(self.period_t))?.with_samples(self.n_samples))
    }

    pub fn to_scales<R: Real>(&self) -> Result<PhysicalScales<R>> {
        PhysicalScales::unit_norm(R::of(self.hbar), R::of(self.kappa_tilde))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn scales(kt: f64) -> PhysicalScales<f64> {
        PhysicalScales::unit_norm(1.0, kt).unwrap()
    }

    /// The loop used throughout the verification campaigns:
    /// μ = 2 + cos 2πs, ρ = ½ sin 2πs, σ = 1, c = 1.
    pub(crate) fn ellipse_loop(period: f64) -> ParameterPath<f64> {
        let mut series: [FourierSeries<f64>; 6] = Default::default();
        series[0] = FourierSeries::new(2.0, vec![1.0], vec![]);
        series[1] = FourierSeries::constant(1.0);
        series[2] = FourierSeries::new(0.0, vec![], vec![0.5]);
        series[5] = FourierSeries::constant(1.0);
        ParameterPath::from_series(series, period).unwrap()
    }

    #[test]
    fn frequencies_harmonic_identity() {
        let set = ParameterSet::oscillator(1.0, 1.0);
        let f = derive_frequencies(&set, &scales(0.0)).unwrap();
        assert_eq!(f.omega, 1.0);
        assert_eq!(f.omega_tilde, 1.0);
        assert_eq!(f.sigma0, 1.0);
        assert_eq!(f.sigma_tilde, 1.0);
        assert_eq!(f.sigma_bar, 1.0);
    }

    #[test]
    fn frequencies_shifted_stiffness() {
        let set = ParameterSet::new(2.0, 1.5, 1.0, 0.5, 0.0, 0.0).unwrap();
        let f = derive_frequencies(&set, &scales(1.0)).unwrap();
        assert!((f.sigma_tilde - 2.0).abs() < 1e-15);
        assert!((f.omega - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn frequencies_localization_violated() {
        let set = ParameterSet::new(1.0, 0.5, 1.0, 0.0, 0.0, 0.0).unwrap();
        match derive_frequencies(&set, &scales(0.0)) {
            Err(Error::LocalizationViolated { omega_sq, .. }) => {
                assert!((omega_sq + 0.5).abs() < 1e-15);
            }
            other => panic!("expected LocalizationViolated, got {other:?}"),
        }
    }

    #[test]
    fn frequencies_kernel_independent_when_uncoupled() {
        // With κ̃ = 0 the kernel coefficients must not matter.
        let base = ParameterSet::new(1.3, 0.9, 0.2, 0.0, 0.0, 0.0).unwrap();
        let kernel = ParameterSet::new(1.3, 0.9, 0.2, 5.0, -3.0, 7.0).unwrap();
        let f0 = derive_frequencies(&base, &scales(0.0)).unwrap();
        let f1 = derive_frequencies(&kernel, &scales(0.0)).unwrap();
        assert_eq!(f0, f1);
    }

    #[test]
    fn frequency_ordering_follows_sign_of_b() {
        // For κ̃ > 0, μ > 0: Ω ≤ Ω̃ exactly when b ≥ 0.
        for b in [-0.3, 0.0, 0.4] {
            let set = ParameterSet::new(1.5, 1.2, 0.3, 0.2, b, 0.0).unwrap();
            let f = derive_frequencies(&set, &scales(0.7)).unwrap();
            assert_eq!(f.omega <= f.omega_tilde, b >= 0.0, "b = {b}");
        }
    }

    #[test]
    fn series_derivative_matches_richardson_fd() {
        let series: FourierSeries<f64> = FourierSeries::new(2.0, vec![1.0], vec![]);
        // Exact stationary point at s = 0.
        assert!(series.derivative(0.0).abs() < 1e-15);
        // At s = 0.25 the exact derivative is -2π; cross-check the closed
        // form with a Richardson-extrapolated central difference.
        let s = 0.25;
        let h = 1e-4;
        let d1 = (series.eval(s + h) - series.eval(s - h)) / (2.0 * h);
        let d2 = (series.eval(s + h / 2.0) - series.eval(s - h / 2.0)) / h;
        let fd = (4.0 * d2 - d1) / 3.0;
        let exact = series.derivative(s);
        assert!(
            (exact + std::f64::consts::TAU).abs() < 1e-12,
            "exact {exact}"
        );
        assert!(
            (exact - fd).abs() < 1e-8,
            "fd mismatch {:.3e}",
            (exact - fd).abs()
        );
    }

    #[test]
    fn constant_path_has_zero_derivative() {
        let set = ParameterSet::new(1.0, 2.0, 0.1, 0.3, 0.2, 0.5).unwrap();
        let path = ParameterPath::frozen(set, 10.0).unwrap();
        let d = path.derivative(0.37);
        assert_eq!(d.as_array(), [0.0; 6]);
        assert_eq!(path.at(0.77), set);
    }

    #[test]
    fn loop_derivative_integrates_to_zero() {
        let path = ellipse_loop(100.0);
        let n = 257;
        for i in 0..6 {
            let dx = 1.0 / (n as f64 - 1.0);
            let samples: Vec<f64> = (0..n)
                .map(|j| path.derivative(j as f64 * dx).as_array()[i])
                .collect();
            let total = crate::quadrature::simpson_samples(&samples, dx);
            assert!(total.abs() < 1e-12, "component {i}: {total:.3e}");
        }
    }

    #[test]
    fn sample_interpolation_reproduces_band_limited_loops() {
        let path = ellipse_loop(50.0);
        let n = 32;
        let sets: Vec<ParameterSet<f64>> = (0..n).map(|j| path.at(j as f64 / n as f64)).collect();
        let rebuilt = ParameterPath::from_samples(&sets, 50.0).unwrap();
        // Exact at sample points and (band-limited input) between them.
        for j in 0..200 {
            let s = j as f64 / 200.0;
            let orig = path.at(s).as_array();
            let got = rebuilt.at(s).as_array();
            for i in 0..6 {
                assert!((orig[i] - got[i]).abs() < 1e-12, "s={s} i={i}");
            }
            let dorig = path.derivative(s).as_array();
            let dgot = rebuilt.derivative(s).as_array();
            for i in 0..6 {
                assert!((dorig[i] - dgot[i]).abs() < 1e-10, "d s={s} i={i}");
            }
        }
    }

    #[test]
    fn validate_reports_diagnostics() {
        let path = ellipse_loop(100.0);
        let d = path.validate(&scales(0.5)).unwrap();
        // Ω² = σ̃μ − ρ² = μ − ρ²; minimum near μ = 1 end: Ω(0.5) = 1.
        assert!(d.omega_min <= 1.0 + 1e-6 && d.omega_min > 0.9);
        assert!((d.mu_min_abs - 1.0).abs() < 1e-6);
        // Dominant slow rate: ρ with max|ρ'| = π over max|ρ| = ½, i.e. 2π.
        assert!((d.adiabaticity - std::f64::consts::TAU).abs() < 1e-10);

        let frozen = ParameterPath::frozen(ParameterSet::oscillator(1.0, 1.0), 1.0).unwrap();
        let d = frozen.validate(&scales(0.0)).unwrap();
        assert_eq!(d.adiabaticity, 0.0);
    }

    #[test]
    fn validate_rejects_degenerate_mass() {
        let mut series: [FourierSeries<f64>; 6] = Default::default();
        series[0] = FourierSeries::new(0.5, vec![1.0], vec![]); // crosses zero
        series[1] = FourierSeries::constant(1.0);
        let path = ParameterPath::from_series(series, 10.0).unwrap();
        match path.validate(&scales(0.0)) {
            Err(Error::InvalidPath { .. }) | Err(Error::LocalizationViolated { .. }) => {}
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn loop_spec_roundtrip_and_unknown_key_rejection() {
        let text = r#"{
            "period_T": 100.0,
            "hbar": 1.0,
            "kappa_tilde": 0.5,
            "mu": {"const": 2.0, "cos_coeffs": [1.0]},
            "sigma": {"const": 1.0},
            "rho": {"sin_coeffs": [0.5]},
            "c": {"const": 1.0}
        }"#;
        let spec: LoopSpec = serde_json::from_str(text).unwrap();
        let path: ParameterPath<f64> = spec.to_path().unwrap();
        let reference = ellipse_loop(100.0);
        for j in 0..64 {
            let s = j as f64 / 64.0;
            assert_eq!(path.at(s), reference.at(s));
        }
        assert_eq!(spec.n_samples, ParameterPath::<f64>::DEFAULT_SAMPLES);

        let bad = r#"{"period_T": 1.0, "hbar": 1.0, "kappa_tilde": 0.0, "mu": {"konst": 2.0}}"#;
        assert!(serde_json::from_str::<LoopSpec>(bad).is_err());
        let bad2 = r#"{"period_T": 1.0, "hbar": 1.0, "kappa_tilde": 0.0, "extra": 1}"#;
        assert!(serde_json::from_str::<LoopSpec>(bad2).is_err());
    }
}
