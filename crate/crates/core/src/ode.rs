//! Classic fixed-step RK4 over small fixed-size real state vectors.
//!
//! Kept private: the public surface exposes purpose-built integrators
//! (moment equations, variational system) that wrap this stepper.

use crate::real::Real;

/// One RK4 step of size `dt` for `y' = f(t, y)`.
pub(crate) fn rk4_step<R: Real, const N: usize>(
    f: &mut impl FnMut(R, &[R; N]) -> [R; N],
    t: R,
    y: &[R; N],
    dt: R,
) -> [R; N] {
    let half = dt / R::of(2.0);
    let k1 = f(t, y);
    let k2 = f(t + half, &axpy(y, &k1, half));
    let k3 = f(t + half, &axpy(y, &k2, half));
    let k4 = f(t + dt, &axpy(y, &k3, dt));
    let mut out = *y;
    let w = dt / R::of(6.0);
    for i in 0..N {
        out[i] = out[i] + w * (k1[i] + R::of(2.0) * (k2[i] + k3[i]) + k4[i]);
    }
    out
}

fn axpy<R: Real, const N: usize>(y: &[R; N], k: &[R; N], a: R) -> [R; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] = out[i] + a * k[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Harmonic oscillator: RK4 error over one period must scale as dt^4.
    #[test]
    fn rk4_fourth_order_on_oscillator() {
        let period = std::f64::consts::TAU;
        let run = |steps: usize| -> f64 {
            let dt = period / steps as f64;
            let mut f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
            let mut y = [1.0f64, 0.0];
            let mut t = 0.0;
            for _ in 0..steps {
                y = rk4_step(&mut f, t, &y, dt);
                t += dt;
            }
            ((y[0] - 1.0).powi(2) + y[1].powi(2)).sqrt()
        };
        let e1 = run(64);
        let e2 = run(128);
        assert!(e1 / e2 > 12.0 && e1 / e2 < 20.0, "ratio {}", e1 / e2);
        assert!(e2 < 1e-6);
    }
}
