//! Small quadrature toolbox: composite Simpson (callable and sampled forms),
//! a cumulative Simpson variant for running integrals, and the periodic
//! trapezoidal rule, which is spectrally accurate on closed loops and is the
//! workhorse for contour integrals of smooth periodic integrands.

use crate::real::Real;

/// Composite Simpson rule for `f` on `[a, b]` with `n` sub-intervals
/// (rounded up to the next even number, minimum 2).
pub fn simpson<R: Real>(mut f: impl FnMut(R) -> R, a: R, b: R, n: usize) -> R {
    let n = n.max(2);
    let n = if n % 2 == 0 { n } else { n + 1 };
    let h = (b - a) / R::of_usize(n);
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let x = a + h * R::of_usize(k);
        let w = if k % 2 == 1 { R::of(4.0) } else { R::of(2.0) };
        acc = acc + w * f(x);
    }
    acc * h / R::of(3.0)
}

/// Composite Simpson rule over equally spaced samples with spacing `dx`.
///
/// Sample counts with an odd number of intervals are closed with a 3/8 rule
/// on the final four points so the overall order stays `O(dx^4)`.
pub fn simpson_samples<R: Real>(y: &[R], dx: R) -> R {
    let n = y.len();
    match n {
        0 | 1 => R::zero(),
        2 => (y[0] + y[1]) * dx / R::of(2.0),
        3 => (y[0] + R::of(4.0) * y[1] + y[2]) * dx / R::of(3.0),
        _ => {
            if n % 2 == 1 {
                composite_simpson_odd(y, dx)
            } else {
                // Simpson on the leading odd-count block, 3/8 on the tail.
                let head = composite_simpson_odd(&y[..n - 3], dx);
                let tail = (y[n - 4] + R::of(3.0) * y[n - 3] + R::of(3.0) * y[n - 2] + y[n - 1])
                    * dx
                    * R::of(3.0 / 8.0);
                head + tail
            }
        }
    }
}

/// Composite Simpson for an odd number of samples (even interval count).
fn composite_simpson_odd<R: Real>(y: &[R], dx: R) -> R {
    debug_assert!(y.len() >= 3 && y.len() % 2 == 1);
    let n = y.len();
    let mut acc = y[0] + y[n - 1];
    for (k, &v) in y.iter().enumerate().take(n - 1).skip(1) {
        let w = if k % 2 == 1 { R::of(4.0) } else { R::of(2.0) };
        acc = acc + w * v;
    }
    acc * dx / R::of(3.0)
}

/// Running integral of equally spaced samples: returns `F` with `F[0] = 0`
/// and `F[i] ≈ ∫_{x0}^{xi} y dx`, fourth-order accurate on smooth data.
///
/// Even-index points use composite Simpson; odd-index points integrate the
/// local quadratic through the three nearest samples.
pub fn cumulative_simpson<R: Real>(y: &[R], dx: R) -> Vec<R> {
    let n = y.len();
    let mut acc = vec![R::zero(); n];
    if n < 2 {
        return acc;
    }
    if n == 2 {
        acc[1] = (y[0] + y[1]) * dx / R::of(2.0);
        return acc;
    }
    let c12 = dx / R::of(12.0);
    for i in 1..n {
        if i % 2 == 0 {
            acc[i] = acc[i - 2] + (y[i - 2] + R::of(4.0) * y[i - 1] + y[i]) * dx / R::of(3.0);
        } else if i + 1 < n {
            // Quadratic through (i-1, i, i+1), integrated over [i-1, i].
            acc[i] = acc[i - 1] + (R::of(5.0) * y[i - 1] + R::of(8.0) * y[i] - y[i + 1]) * c12;
        } else {
            // Last point with an even sample count: integrate the quadratic
            // through the final three samples over the last interval.
            acc[i] = acc[i - 1] + (-y[i - 2] + R::of(8.0) * y[i - 1] + R::of(5.0) * y[i]) * c12;
        }
    }
    acc
}

/// Trapezoidal rule over equally spaced samples.
pub fn trapezoid<R: Real>(y: &[R], dx: R) -> R {
    let n = y.len();
    if n < 2 {
        return R::zero();
    }
    let mut acc = (y[0] + y[n - 1]) / R::of(2.0);
    for &v in &y[1..n - 1] {
        acc = acc + v;
    }
    acc * dx
}

/// Periodic trapezoidal rule: integrates `f` over one period sampled at `n`
/// equally spaced points. For smooth periodic integrands the error decays
/// faster than any power of `1/n`, which makes this the preferred rule for
/// loop integrals.
pub fn periodic_trapezoid<R: Real>(mut f: impl FnMut(R) -> R, period: R, n: usize) -> R {
    let n = n.max(1);
    let h = period / R::of_usize(n);
    let mut acc = R::zero();
    for k in 0..n {
        acc = acc + f(h * R::of_usize(k));
    }
    acc * h
}
