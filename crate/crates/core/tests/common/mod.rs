//! Shared fixtures for the integration suites.

#![allow(dead_code)]

use gpberry::params::{FourierSeries, ParameterPath, ParameterSet, PhysicalScales};
use rand::Rng;

pub fn unit_scales(kappa_tilde: f64) -> PhysicalScales<f64> {
    PhysicalScales::unit_norm(1.0, kappa_tilde).unwrap()
}

/// The loop used throughout the verification campaigns:
/// μ = 2 + cos 2πs, σ = 1, ρ = ½ sin 2πs, a = b = 0, c = 1.
///
/// With a = 0 the frequency Ω is the same at every κ̃, which cleanly
/// isolates the mean-field correction to the geometric phase.
pub fn ellipse_path(period: f64) -> ParameterPath<f64> {
    let mut series: [FourierSeries<f64>; 6] = Default::default();
    series[0] = FourierSeries::new(2.0, vec![1.0], vec![]);
    series[1] = FourierSeries::constant(1.0);
    series[2] = FourierSeries::new(0.0, vec![], vec![0.5]);
    series[5] = FourierSeries::constant(1.0);
    ParameterPath::from_series(series, period).unwrap()
}

/// Random frozen parameter set with Ω drawn uniformly from
/// [omega_lo, omega_hi], resampled until both localization frequencies are
/// real.
pub fn random_localized_set(
    rng: &mut impl Rng,
    kappa_tilde: f64,
    omega_lo: f64,
    omega_hi: f64,
) -> ParameterSet<f64> {
    let scales = unit_scales(kappa_tilde);
    loop {
        let omega: f64 = rng.gen_range(omega_lo..omega_hi);
        let mu: f64 = rng.gen_range(0.4..2.5);
        let rho: f64 = rng.gen_range(-0.7..0.7);
        let a: f64 = rng.gen_range(0.0..0.6);
        let b: f64 = rng.gen_range(-0.2..0.4);
        let c: f64 = rng.gen_range(0.0..1.5);
        let sigma_tilde = (omega * omega + rho * rho) / mu;
        let sigma = sigma_tilde - kappa_tilde * a;
        let Ok(set) = ParameterSet::new(mu, sigma, rho, a, b, c) else {
            continue;
        };
        if set.frequencies(&scales).is_ok() {
            return set;
        }
    }
}

/// Random smooth closed loop (two harmonics per coefficient) around a
/// well-localized center, resampled until it validates under `scales`.
pub fn random_loop(
    rng: &mut impl Rng,
    scales: &PhysicalScales<f64>,
    period: f64,
) -> ParameterPath<f64> {
    loop {
        let series = [
            FourierSeries::new(
                1.5,
                vec![rng.gen_range(-0.25..0.25), rng.gen_range(-0.1..0.1)],
                vec![rng.gen_range(-0.25..0.25)],
            ),
            FourierSeries::new(
                1.3,
                vec![rng.gen_range(-0.25..0.25)],
                vec![rng.gen_range(-0.25..0.25)],
            ),
            FourierSeries::new(
                0.0,
                vec![rng.gen_range(-0.3..0.3)],
                vec![rng.gen_range(-0.3..0.3)],
            ),
            FourierSeries::new(0.3, vec![rng.gen_range(-0.1..0.1)], vec![]),
            FourierSeries::new(0.1, vec![], vec![rng.gen_range(-0.1..0.1)]),
            FourierSeries::new(
                0.8,
                vec![rng.gen_range(-0.2..0.2)],
                vec![rng.gen_range(-0.2..0.2)],
            ),
        ];
        let Ok(path) = ParameterPath::from_series(series, period) else {
            continue;
        };
        if path.validate(scales).is_ok() {
            return path;
        }
    }
}
