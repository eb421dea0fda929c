//! Collocation on the grid nodes with a Picard outer iteration.
//!
//! Each pass lags the cubic coefficient, `(−D₂ − 1 + ρ|U^k|²) U = ρ r U^k`,
//! and closes the system with the normalisation row `(2/π) Σ wᵢ Uᵢ cos xᵢ = ε`
//! (Simpson weights). The bordered system is solved by eliminating `r`:
//! `U = r y` with `T y = ρ U^k`.

use std::f64::consts::FRAC_2_PI;
use std::sync::Arc;

use super::tridiag::{solve_refined, Tridiagonal};
use crate::error::{Result, VortexError};
use crate::quadrature_kernel::{make_grid, Grid, GridFunction, DEFAULT_NODES, ENDPOINT_COS};
use crate::reduction::{compute_r, Branch, CoreParams, Method};
use crate::stencil::fitted_denominator;
use crate::C64;

#[derive(Debug, Clone)]
pub struct FdState {
    pub grid: Arc<Grid>,
    /// Bound on `sup|U^{k+1} − U^k|`, relative to `sup|U^{k+1}|`.
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Initial weight of the new iterate in `U^{k+1} = θ Û + (1 − θ) U^k`.
    /// `θ` shrinks by 0.7 whenever the increment grows five passes in a row.
    pub relax: f64,
}

impl FdState {
    pub fn new(n_nodes: usize) -> Result<Self> {
        Ok(FdState { grid: make_grid(n_nodes)?, picard_tol: 1e-12, picard_max: 2000, relax: 1.0 })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.picard_tol > 0.0) || self.picard_max == 0 {
            return Err(VortexError::invalid("picard_tol must be positive and picard_max >= 1"));
        }
        if !(self.relax > 0.0 && self.relax <= 1.0) {
            return Err(VortexError::invalid("relax must lie in (0, 1]"));
        }
        Ok(())
    }
}

impl Default for FdState {
    fn default() -> Self {
        FdState::new(DEFAULT_NODES).expect("default grid is valid")
    }
}

/// Picard iteration from `U⁰ = ε cos x`.
pub fn fd_solve(rho: C64, eps: C64, state: &FdState) -> Result<Branch> {
    let start = GridFunction::from_fn(state.grid.clone(), |x| eps * x.cos());
    fd_solve_from(rho, eps, state, &start)
}

/// Picard iteration from a given initial `U` on the state's grid.
pub fn fd_solve_from(rho: C64, eps: C64, state: &FdState, initial: &GridFunction) -> Result<Branch> {
    state.validate()?;
    if eps.norm() == 0.0 || !eps.re.is_finite() || !eps.im.is_finite() {
        return Err(VortexError::invalid("finite differences need finite eps != 0"));
    }
    let grid = state.grid.clone();
    if initial.grid().n_nodes() != grid.n_nodes() {
        return Err(VortexError::invalid("initial iterate lives on a different grid"));
    }
    let n = grid.n_nodes();
    let m = n - 2;
    let weights = grid.simpson_weights();
    let q: Vec<f64> = (1..n - 1).map(|i| FRAC_2_PI * weights[i] * grid.cos()[i]).collect();
    let params = CoreParams { tol_fp: state.picard_tol, max_iter: state.picard_max, ..CoreParams::new(rho, eps).with_nodes(n) };

    if rho.norm() == 0.0 {
        let cos = &grid.cos()[1..n - 1];
        let scale = eps / q.iter().zip(cos).map(|(a, b)| a * b).sum::<f64>();
        let u: Vec<C64> = cos.iter().map(|c| scale * c).collect();
        let v = v_from_interior(&grid, &u);
        let r = compute_r(&v, eps)?;
        return Ok(Branch::from_v(params, Method::FiniteDifference, r, v, 1, 0.0, true));
    }

    let inv_d = 1.0 / fitted_denominator(grid.h());
    let off = vec![C64::new(-inv_d, 0.0); m - 1];
    let mut u: Vec<C64> = initial.values()[1..n - 1].to_vec();
    let mut r = C64::new(0.0, 0.0);
    let mut change = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut theta = state.relax;
    let mut growing = 0;
    for k in 1..=state.picard_max {
        iterations = k;
        let t = Tridiagonal {
            sub: off.clone(),
            diag: u.iter().map(|z| 2.0 * inv_d - 1.0 + rho * z.norm_sqr()).collect(),
            sup: off.clone(),
        };
        let lu = t.factor()?;
        let rhs: Vec<C64> = u.iter().map(|z| rho * z).collect();
        let y = solve_refined(&t, &lu, &rhs);
        let qy: C64 = q.iter().zip(&y).map(|(a, b)| a * b).sum();
        if qy.norm() == 0.0 || !qy.re.is_finite() || !qy.im.is_finite() {
            return Err(VortexError::DegenerateSystem(
                "normalisation row is orthogonal to the Picard direction".to_string(),
            ));
        }
        r = eps / qy;
        let next: Vec<C64> = y.iter().zip(&u).map(|(z, old)| theta * r * z + (1.0 - theta) * old).collect();
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(VortexError::Diverged { iteration: k });
        }
        let scale = next.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let prev = change;
        change = u.iter().zip(&next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        u = next;
        growing = if change > prev { growing + 1 } else { 0 };
        if growing >= 5 && theta > 0.05 {
            theta *= 0.7;
            growing = 0;
        }
        if change <= state.picard_tol * scale {
            converged = true;
            break;
        }
    }
    let v = v_from_interior(&grid, &u);
    Ok(Branch::from_v(params, Method::FiniteDifference, r, v, iterations, change, converged))
}

/// `v = U/cos x` at interior nodes; endpoint values by cubic extrapolation.
fn v_from_interior(grid: &Arc<Grid>, u: &[C64]) -> GridFunction {
    let n = grid.n_nodes();
    let mut v = vec![C64::new(0.0, 0.0); n];
    for i in 1..n - 1 {
        let c = grid.cos()[i];
        v[i] = if c.abs() < ENDPOINT_COS { C64::new(0.0, 0.0) } else { u[i - 1] / c };
    }
    v[0] = 3.0 * v[1] - 3.0 * v[2] + v[3];
    v[n - 1] = 3.0 * v[n - 2] - 3.0 * v[n - 3] + v[n - 4];
    GridFunction::from_raw(grid.clone(), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{fixed_point_solve, project_p};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_rho_single_pass() {
        let eps = c(0.5, 0.5);
        let b = fd_solve(c(0.0, 0.0), eps, &FdState::default()).unwrap();
        assert!(b.converged && b.iterations == 1);
        let expect = GridFunction::from_fn(b.grid().clone(), |x| eps * x.cos());
        assert!(b.u.sup_distance(&expect) < 1e-13);
        assert!((b.r - 0.75 * eps.norm_sqr()).norm() < 1e-12);
    }

    #[test]
    fn matches_fixed_point() {
        let rho = c(1.0, 0.5);
        let eps = c(1.0, 0.0);
        let fd = fd_solve(rho, eps, &FdState::default()).unwrap();
        let fp = fixed_point_solve(&CoreParams::new(rho, eps)).unwrap();
        assert!(fd.converged);
        assert!((fd.r - fp.r).norm() < 1e-5, "{}", (fd.r - fp.r).norm());
        assert!(fd.u.sup_distance(&fp.u) < 1e-5);
        assert!(project_p(&fd.w).norm() < 1e-12);
        assert!(fd.ode_residual < 1e-10);
    }

    #[test]
    fn error_against_fixed_point_is_second_order() {
        let rho = c(1.0, 0.5);
        let eps = c(1.0, 0.0);
        let err = |n: usize| {
            let fd = fd_solve(rho, eps, &FdState::new(n).unwrap()).unwrap();
            let fp = fixed_point_solve(&CoreParams::new(rho, eps).with_nodes(n)).unwrap();
            (fd.r - fp.r).norm().max(fd.u.sup_distance(&fp.u))
        };
        let slope = (err(129) / err(257)).log2();
        assert!((slope - 2.0).abs() < 0.25, "slope {slope}");
    }

    #[test]
    fn relaxation_reaches_left_edge() {
        // Plain Picard oscillates here without settling.
        let rho = c(-3.5, 1.5);
        let eps = c(1.0, 0.0);
        let b = fd_solve(rho, eps, &FdState::default()).unwrap();
        assert!(b.converged, "{} iterations", b.iterations);
        let fp = fixed_point_solve(&CoreParams::new(rho, eps)).unwrap();
        assert!((b.r - fp.r).norm() < 1e-4);
        for relax in [0.0, 1.5, f64::NAN] {
            assert!(FdState { relax, ..FdState::default() }.validate().is_err());
        }
    }

    #[test]
    fn rejects_mismatched_start() {
        let state = FdState::new(33).unwrap();
        let start = GridFunction::zeros(make_grid(65).unwrap());
        assert!(fd_solve_from(c(1.0, 0.0), c(1.0, 0.0), &state, &start).is_err());
        assert!(fd_solve(c(1.0, 0.0), c(0.0, 0.0), &state).is_err());
    }
}
