//! Uniform spatial grids with inner-product quadrature and 4th-order
//! centered finite differences.
//!
//! Every state in this crate is Schwartz-class and trap-confined, so the
//! plain Riemann sum (= trapezoid up to boundary values below round-off) is
//! spectrally accurate, and zero ghost points are the correct boundary
//! closure for the derivative stencils.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::params::{derive_frequencies, ParameterSet, PhysicalScales};
use crate::real::Real;

/// Uniformly spaced grid on [x_min, x_max] with n_points samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid<R: Real> {
    x_min: R,
    x_max: R,
    n_points: usize,
    dx: R,
}

impl<R: Real> SpatialGrid<R> {
    /// Default resolution; powers of two keep refinement studies simple.
    pub const DEFAULT_POINTS: usize = 2048;

    pub fn new(x_min: R, x_max: R, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::InvalidConfig {
                detail: "grid needs finite x_min < x_max".into(),
            });
        }
        if n_points < 16 {
            return Err(Error::InvalidConfig {
                detail: format!("grid needs at least 16 points, got {n_points}"),
            });
        }
        let dx = (x_max - x_min) / R::of_usize(n_points - 1);
        Ok(Self {
            x_min,
            x_max,
            n_points,
            dx,
        })
    }

    /// Auto-sized grid: half-width L = 8·√(ħμ/Ω)·√(2·n_max + 1) around
    /// `center_x`, so the n ≤ n_max states decay below round-off well before
    /// the boundary.
    pub fn auto_sized(
        set: &ParameterSet<R>,
        scales: &PhysicalScales<R>,
        n_max: usize,
        center_x: R,
        n_points: usize,
    ) -> Result<Self> {
        let f = derive_frequencies(set, scales)?;
        if set.mu <= R::zero() {
            return Err(Error::InvalidConfig {
                detail: format!("auto-sizing needs mu > 0, got {}", set.mu.as_f64()),
            });
        }
        let width = (scales.hbar * set.mu / f.omega).sqrt();
        let half = R::of(8.0) * width * R::of_usize(2 * n_max + 1).sqrt();
        Self::new(center_x - half, center_x + half, n_points)
    }

    pub fn x_min(&self) -> R {
        self.x_min
    }

    pub fn x_max(&self) -> R {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> R {
        self.dx
    }

    pub fn x(&self, i: usize) -> R {
        self.x_min + self.dx * R::of_usize(i)
    }

    pub fn points(&self) -> Vec<R> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// ⟨f, g⟩ = ∫ f̄ g dx by Riemann sum (exact to round-off for states that
    /// decay below round-off at the boundary).
    pub fn inner_product(&self, f: &[Complex<R>], g: &[Complex<R>]) -> Complex<R> {
        debug_assert_eq!(f.len(), self.n_points);
        debug_assert_eq!(g.len(), self.n_points);
        let mut acc = Complex::new(R::zero(), R::zero());
        for (a, b) in f.iter().zip(g) {
            acc = acc + a.conj() * *b;
        }
        acc * Complex::new(self.dx, R::zero())
    }

    pub fn norm_sq(&self, f: &[Complex<R>]) -> R {
        let mut acc = R::zero();
        for a in f {
            acc = acc + a.norm_sqr();
        }
        acc * self.dx
    }

    /// First derivative by the 4th-order centered stencil
    /// (1, −8, 0, 8, −1)/(12 dx) with zero ghost points. The resulting
    /// matrix is exactly antisymmetric.
    pub fn first_derivative(&self, f: &[Complex<R>]) -> Vec<Complex<R>> {
        debug_assert_eq!(f.len(), self.n_points);
        let n = self.n_points;
        let zero = Complex::new(R::zero(), R::zero());
        let at = |i: isize| -> Complex<R> {
            if i < 0 || i >= n as isize {
                zero
            } else {
                f[i as usize]
            }
        };
        let w = R::one() / (R::of(12.0) * self.dx);
        (0..n as isize)
            .map(|i| (at(i - 2) - at(i - 1) * R::of(8.0) + at(i + 1) * R::of(8.0) - at(i + 2)) * w)
            .collect()
    }

    /// Second derivative by the 4th-order centered stencil
    /// (−1, 16, −30, 16, −1)/(12 dx²) with zero ghost points.
    pub fn second_derivative(&self, f: &[Complex<R>]) -> Vec<Complex<R>> {
        debug_assert_eq!(f.len(), self.n_points);
        let n = self.n_points;
        let zero = Complex::new(R::zero(), R::zero());
        let at = |i: isize| -> Complex<R> {
            if i < 0 || i >= n as isize {
                zero
            } else {
                f[i as usize]
            }
        };
        let w = R::one() / (R::of(12.0) * self.dx * self.dx);
        (0..n as isize)
            .map(|i| {
                (-at(i - 2) + at(i - 1) * R::of(16.0) - at(i) * R::of(30.0)
                    + at(i + 1) * R::of(16.0)
                    - at(i + 2))
                    * w
            })
            .collect()
    }
}
