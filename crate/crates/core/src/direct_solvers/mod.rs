//! Solvers that attack `−U'' − U = ρ(r − |U|²)U` directly, used to cross-check
//! the contraction iteration.

pub mod finite_difference;
pub mod shooting;
mod tridiag;

pub use finite_difference::{fd_solve, fd_solve_from, FdState};
pub use shooting::{integrate_ivp, shoot_follow, shoot_solve, ShootingState, Trajectory};

use std::f64::consts::PI;

use crate::error::{Result, VortexError};
use crate::quadrature_kernel::GridFunction;
use crate::reduction::Branch;
use crate::C64;

/// `f(x) = ρ(r − |v(x)|² cos²x) v(x) cos x`, the right-hand side of the linear
/// problem for `U = v cos x`.
pub fn rhs_f(v: &GridFunction, rho: C64, r: C64) -> GridFunction {
    let cos = v.grid().cos();
    let values = v
        .values()
        .iter()
        .zip(cos)
        .map(|(z, &c)| rho * (r - z.norm_sqr() * c * c) * z * c)
        .collect();
    GridFunction::from_raw(v.grid().clone(), values)
}

/// Evaluates `U` at arbitrary `x` from its samples on J, treating `U` as the
/// 2π-periodic function with `U(x + π) = −U(x)` and summing its odd
/// harmonics. Exact for trigonometric polynomials the grid resolves.
pub fn resample(u: &GridFunction, targets: &[f64]) -> Vec<C64> {
    let grid = u.grid();
    let n = grid.n_nodes() - 1;
    let big_n = 2 * n;
    let h = grid.h();
    let samples: Vec<C64> = (0..big_n).map(|j| if j < n { u.values()[j] } else { -u.values()[j - n] }).collect();
    let x0 = -PI / 2.0;
    let kmax = n as i64 - 1;
    let coeffs: Vec<(f64, C64)> = (-kmax..=kmax)
        .filter(|k| k.rem_euclid(2) == 1)
        .map(|k| {
            let kf = k as f64;
            let sum: C64 = samples
                .iter()
                .enumerate()
                .map(|(j, y)| y * C64::from_polar(1.0, -kf * (x0 + j as f64 * h)))
                .sum();
            (kf, sum / big_n as f64)
        })
        .collect();
    targets
        .iter()
        .map(|&x| coeffs.iter().map(|(k, c)| c * C64::from_polar(1.0, k * x)).sum())
        .collect()
}

/// `max(sup|U₁ − e^{iθ}U₂|, |r₁ − r₂|)` minimised over the gauge phase `θ`.
/// `b2` is resampled onto the grid of `b1` when the grids differ.
pub fn compare_branches(b1: &Branch, b2: &Branch) -> Result<f64> {
    b1.require_converged()?;
    b2.require_converged()?;
    let u1 = b1.u.values();
    let u2: Vec<C64> = if b1.grid().n_nodes() == b2.grid().n_nodes() {
        b2.u.values().to_vec()
    } else {
        resample(&b2.u, b1.grid().nodes())
    };
    if u1.iter().chain(&u2).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(VortexError::InvalidState("branch holds non-finite samples".to_string()));
    }
    let sup_at = |theta: f64| {
        let rot = C64::from_polar(1.0, theta);
        u1.iter().zip(&u2).map(|(a, b)| (a - rot * b).norm()).fold(0.0, f64::max)
    };
    // The L²-optimal phase, refined by golden-section search on the sup norm.
    let inner: C64 = u1.iter().zip(&u2).map(|(a, b)| a * b.conj()).sum();
    let theta0 = if inner.norm() > 0.0 { inner.arg() } else { 0.0 };
    let (mut lo, mut hi) = (theta0 - 0.05, theta0 + 0.05);
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - golden * (hi - lo);
    let mut d = lo + golden * (hi - lo);
    let (mut fc, mut fd) = (sup_at(c), sup_at(d));
    for _ in 0..60 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - golden * (hi - lo);
            fc = sup_at(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + golden * (hi - lo);
            fd = sup_at(d);
        }
    }
    let best = sup_at(theta0).min(fc).min(fd);
    Ok(best.max((b1.r - b2.r).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature_kernel::make_grid;
    use crate::reduction::{fixed_point_solve, map_f, CoreParams};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rhs_examples() {
        let g = make_grid(65).unwrap();
        let rho = c(0.6, -1.1);
        assert_eq!(rhs_f(&GridFunction::zeros(g.clone()), rho, c(1.0, 0.0)).sup_norm(), 0.0);

        let v0 = GridFunction::from_fn(g.clone(), |_| c(0.5, 0.0));
        let f0 = rhs_f(&v0, rho, c(0.25, 0.0));
        assert!(f0.values()[g.mid()].norm() < 1e-16);

        let eps = c(0.3, 0.4);
        let v = GridFunction::from_fn(g.clone(), |_| eps);
        let f = rhs_f(&v, rho, c(0.75 * eps.norm_sqr(), 0.0));
        let expect = GridFunction::from_fn(g.clone(), |x| -rho / 4.0 * eps.norm_sqr() * eps * (3.0 * x).cos());
        assert!(f.sup_distance(&expect) < 1e-15);
        // Same as map_F(0) scaled by ε|ε|².
        let f_map = map_f(&GridFunction::zeros(g.clone()), rho).unwrap().scale(eps * eps.norm_sqr());
        assert!(f.sup_distance(&f_map) < 1e-12);
    }

    #[test]
    fn resample_is_exact_on_odd_harmonics() {
        let g = make_grid(33).unwrap();
        let u = GridFunction::from_fn(g, |x| c(x.cos(), 0.0) + c(0.0, 0.2) * (5.0 * x).cos() + 0.1 * (3.0 * x).sin());
        let xs = [-1.3, -0.2, 0.0, 0.77, 1.5];
        for (x, z) in xs.iter().zip(resample(&u, &xs)) {
            let exact = c(x.cos(), 0.0) + c(0.0, 0.2) * (5.0 * x).cos() + 0.1 * (3.0 * x).sin();
            assert!((z - exact).norm() < 1e-13);
        }
    }

    #[test]
    fn compare_self_and_rotated() {
        let rho = c(1.0, 0.5);
        let b = fixed_point_solve(&CoreParams::new(rho, c(1.0, 0.0))).unwrap();
        assert_eq!(compare_branches(&b, &b).unwrap(), 0.0);
        let rotated = fixed_point_solve(&CoreParams::new(rho, C64::from_polar(1.0, 0.9))).unwrap();
        assert!(compare_branches(&b, &rotated).unwrap() < 1e-12);
    }

    #[test]
    fn compare_across_grids() {
        let rho = c(1.0, 0.5);
        let a = fixed_point_solve(&CoreParams::new(rho, c(1.0, 0.0)).with_nodes(257)).unwrap();
        let b = fixed_point_solve(&CoreParams::new(rho, c(1.0, 0.0)).with_nodes(129)).unwrap();
        let d = compare_branches(&a, &b).unwrap();
        assert!(d < 5e-8, "{d:e}");
    }

    #[test]
    fn compare_needs_converged() {
        let mut b = fixed_point_solve(&CoreParams::new(c(1.0, 0.0), c(0.5, 0.0))).unwrap();
        let good = b.clone();
        b.converged = false;
        assert!(matches!(compare_branches(&good, &b), Err(VortexError::InvalidState(_))));
    }
}
