//! Centered second differences.
//!
//! All residual checks and the finite-difference solver share one three-point
//! stencil, `(f[i+1] − 2 f[i] + f[i−1]) / (4 sin²(h/2))`. The denominator equals
//! `h²(1 − h²/12 + …)`, so the stencil is second-order consistent, and it is
//! exact on `cos x` and `sin x`. The kernel of the linearised operator
//! `−d²/dx² − 1` is therefore preserved on every grid.

use crate::C64;

/// Denominator of the fitted stencil; `h²` to leading order.
pub fn fitted_denominator(h: f64) -> f64 {
    let s = (0.5 * h).sin();
    4.0 * s * s
}

/// Second differences at interior nodes `1..n-1`; output length `n − 2`.
pub fn second_difference_interior(values: &[C64], h: f64) -> Vec<C64> {
    let inv = 1.0 / fitted_denominator(h);
    values
        .windows(3)
        .map(|w| (w[0] - 2.0 * w[1] + w[2]) * inv)
        .collect()
}

/// Second differences of a periodic sample sequence (wrap-around neighbours).
pub fn second_difference_periodic(values: &[C64], h: f64) -> Vec<C64> {
    let n = values.len();
    let inv = 1.0 / fitted_denominator(h);
    (0..n)
        .map(|i| {
            let prev = values[(i + n - 1) % n];
            let next = values[(i + 1) % n];
            (prev - 2.0 * values[i] + next) * inv
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exact_on_unit_frequency() {
        let h = PI / 64.0;
        let vals: Vec<C64> = (0..65).map(|i| C64::new((i as f64 * h).cos(), 0.0)).collect();
        let d2 = second_difference_interior(&vals, h);
        for (i, d) in d2.iter().enumerate() {
            assert!((d + vals[i + 1]).norm() < 1e-12);
        }
    }

    #[test]
    fn second_order_on_cos3() {
        let err = |m: usize| {
            let h = PI / m as f64;
            let vals: Vec<C64> = (0..=m).map(|i| C64::new((3.0 * i as f64 * h).cos(), 0.0)).collect();
            second_difference_interior(&vals, h)
                .iter()
                .enumerate()
                .map(|(i, d)| (d + 9.0 * vals[i + 1]).norm())
                .fold(0.0, f64::max)
        };
        let ratio = err(64) / err(128);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn periodic_wraps() {
        let m = 32;
        let h = 2.0 * PI / m as f64;
        let vals: Vec<C64> = (0..m).map(|i| C64::new((i as f64 * h).sin(), 0.0)).collect();
        let d2 = second_difference_periodic(&vals, h);
        assert!((d2[0] + vals[0]).norm() < 1e-12);
        assert!((d2[m - 1] + vals[m - 1]).norm() < 1e-12);
    }
}
