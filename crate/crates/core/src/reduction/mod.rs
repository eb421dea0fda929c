//! Lyapunov–Schmidt reduction on J.
//!
//! With `U = v cos x`, `Pv = ε` and `v = ε(1 + w)`, the boundary-value problem
//! becomes the fixed-point equation `w = T_ε(w) = |ε|² L(F(w))` on the range of
//! `P' = I − P`. `L` inverts `−U'' − U` on `C₀(J)` and removes the `P`
//! component; `F` is the cubic nonlinearity with `r` eliminated through the
//! solvability condition.

mod asymptotics;

pub use asymptotics::{
    asymptotic_r, asymptotic_u, extract_phi, extract_phi_field, leading_phi, leading_phi_field,
};

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VortexError};
use crate::quadrature_kernel::{
    check_solvable, linear_solution, make_grid, project_to_c0, simpson, Grid, GridFunction,
    DEFAULT_NODES,
};
use crate::stencil::second_difference_interior;
use crate::C64;

pub const DEFAULT_SIGMA: f64 = 1.0;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_TOL_FP: f64 = 1e-12;

/// Bound on `|P w|` for `w` to count as an element of `P'C(J)`.
pub const TOL_RANGE: f64 = 1e-10;

/// Which solver produced a [`Branch`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FixedPoint,
    Shooting,
    FiniteDifference,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::FixedPoint => "fixed_point",
            Method::Shooting => "shooting",
            Method::FiniteDifference => "finite_difference",
        }
    }
}

/// Bifurcation inputs and iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreParams {
    pub rho: C64,
    pub eps: C64,
    /// Radius of the ball `B_σ` used for the contraction certificate.
    pub sigma: f64,
    pub max_iter: usize,
    pub tol_fp: f64,
    pub n_nodes: usize,
}

impl CoreParams {
    pub fn new(rho: C64, eps: C64) -> Self {
        CoreParams {
            rho,
            eps,
            sigma: DEFAULT_SIGMA,
            max_iter: DEFAULT_MAX_ITER,
            tol_fp: DEFAULT_TOL_FP,
            n_nodes: DEFAULT_NODES,
        }
    }

    pub fn with_nodes(mut self, n_nodes: usize) -> Self {
        self.n_nodes = n_nodes;
        self
    }

    pub fn with_tol(mut self, tol_fp: f64) -> Self {
        self.tol_fp = tol_fp;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |z: C64| z.re.is_finite() && z.im.is_finite();
        if !finite(self.rho) || !finite(self.eps) {
            return Err(VortexError::invalid("rho and eps must be finite"));
        }
        if !(self.sigma > 0.0) {
            return Err(VortexError::invalid(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.tol_fp > 0.0) {
            return Err(VortexError::invalid(format!("tol_fp must be positive, got {}", self.tol_fp)));
        }
        if self.max_iter == 0 {
            return Err(VortexError::invalid("max_iter must be at least 1"));
        }
        Grid::new(self.n_nodes).map(|_| ())
    }

    pub fn eps_sq(&self) -> f64 {
        self.eps.norm_sqr()
    }

    /// `|ε|² < δ(σ, |ρ|)`: the iteration is certified to contract in `B_σ`.
    pub fn is_certified(&self) -> bool {
        let rho_abs = self.rho.norm();
        if rho_abs == 0.0 {
            return true;
        }
        contraction_radius(self.sigma, rho_abs).is_ok_and(|delta| self.eps_sq() < delta)
    }
}

/// One computed solution `(r, U)` with `U = v cos x`, `v = ε(1 + w)`.
#[derive(Debug, Clone)]
pub struct Branch {
    pub params: CoreParams,
    pub method: Method,
    pub r: C64,
    pub w: GridFunction,
    pub v: GridFunction,
    pub u: GridFunction,
    pub iterations: usize,
    /// Fixed-point residual `‖w − T_ε(w)‖∞` for the contraction iteration; the
    /// final nonlinear residual (Newton or Picard update) for the direct solvers.
    pub fp_residual: f64,
    pub ode_residual: f64,
    pub converged: bool,
}

impl Branch {
    /// Fills `U = v cos x` and the collocated ODE residual.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        params: CoreParams,
        method: Method,
        r: C64,
        w: GridFunction,
        v: GridFunction,
        iterations: usize,
        fp_residual: f64,
        converged: bool,
    ) -> Branch {
        let u = v.weighted(v.grid().cos());
        let ode_residual = ode_residual(&u, params.rho, r);
        Branch { params, method, r, w, v, u, iterations, fp_residual, ode_residual, converged }
    }

    /// Builds a branch from `v`, taking `w = v/ε − 1`.
    pub(crate) fn from_v(
        params: CoreParams,
        method: Method,
        r: C64,
        v: GridFunction,
        iterations: usize,
        fp_residual: f64,
        converged: bool,
    ) -> Branch {
        let eps = params.eps;
        let w = v.map(|_, z| z / eps - 1.0);
        Branch::assemble(params, method, r, w, v, iterations, fp_residual, converged)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    pub(crate) fn require_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(VortexError::InvalidState(format!(
                "{} branch at rho = {} did not converge",
                self.method.as_str(),
                self.params.rho
            )))
        }
    }
}

/// `(2/π) ∫_J u cos² y dy`; the range of `P` is identified with ℂ.
pub fn project_p(u: &GridFunction) -> C64 {
    let grid = u.grid();
    let vals: Vec<C64> = u.values().iter().zip(grid.cos()).map(|(z, c)| z * (c * c)).collect();
    simpson(grid.h(), &vals) * (2.0 / PI)
}

/// `P' f = f − P f`.
pub fn project_p_complement(u: &GridFunction) -> GridFunction {
    u.add_constant(-project_p(u))
}

/// The operator `L : C₀(J) → P'C(J)`: the solution `v` with `v(−π/2) = 0`,
/// minus its projection. Satisfies `‖Lf‖∞ ≤ 3π ‖f‖∞`.
pub fn apply_l(f: &GridFunction) -> Result<GridFunction> {
    check_solvable(f)?;
    Ok(apply_l_unchecked(f))
}

fn apply_l_unchecked(f: &GridFunction) -> GridFunction {
    project_p_complement(&linear_solution(f, C64::new(0.0, 0.0)))
}

/// The nonlinear map
///
/// ```text
/// F(w)(x) = ρ [ (2/π) ∫_J |1+w|²(1+w) cos⁴y dy − |1+w(x)|² cos²x ] (1+w(x)) cos x,
/// ```
///
/// projected onto `C₀(J)` to remove quadrature drift.
pub fn map_f(w: &GridFunction, rho: C64) -> Result<GridFunction> {
    let pw = project_p(w).norm();
    if pw > TOL_RANGE {
        return Err(VortexError::invalid(format!(
            "map_f expects w in the range of P' (|P w| = {pw:.3e})"
        )));
    }
    Ok(map_f_unchecked(w, rho))
}

fn map_f_unchecked(w: &GridFunction, rho: C64) -> GridFunction {
    let grid = w.grid().clone();
    let cos = grid.cos();
    let one_plus: Vec<C64> = w.values().iter().map(|z| 1.0 + z).collect();
    let cubic_weighted: Vec<C64> = one_plus
        .iter()
        .zip(cos)
        .map(|(z, c)| z * z.norm_sqr() * c.powi(4))
        .collect();
    let mean = simpson(grid.h(), &cubic_weighted) * (2.0 / PI);
    let values = one_plus
        .iter()
        .zip(cos)
        .map(|(z, &c)| rho * (mean - z.norm_sqr() * c * c) * z * c)
        .collect();
    project_to_c0(&GridFunction::from_raw(grid, values))
}

/// `T_ε(w) = |ε|² L(F(w))`.
pub fn apply_t(w: &GridFunction, rho: C64, eps_sq: f64) -> Result<GridFunction> {
    let f = map_f(w, rho)?;
    Ok(apply_l(&f)?.scale(C64::new(eps_sq, 0.0)))
}

fn apply_t_unchecked(w: &GridFunction, rho: C64, eps_sq: f64) -> GridFunction {
    apply_l_unchecked(&map_f_unchecked(w, rho)).scale(C64::new(eps_sq, 0.0))
}

/// `r = (2/(επ)) ∫_J |v|² v cos⁴ y dy`.
pub fn compute_r(v: &GridFunction, eps: C64) -> Result<C64> {
    if eps.norm() == 0.0 {
        return Err(VortexError::invalid("compute_r needs eps != 0"));
    }
    let grid = v.grid();
    let vals: Vec<C64> = v
        .values()
        .iter()
        .zip(grid.cos())
        .map(|(z, c)| z * z.norm_sqr() * c.powi(4))
        .collect();
    Ok(simpson(grid.h(), &vals) * 2.0 / (eps * PI))
}

/// Bound on the operator norm of `L`.
pub const L_NORM_BOUND: f64 = 3.0 * PI;

/// `‖F(w)‖∞ ≤ |ρ|(2+σ)(1+σ)³` on `B_σ`.
pub fn map_f_bound(rho_abs: f64, sigma: f64) -> f64 {
    rho_abs * (2.0 + sigma) * (1.0 + sigma).powi(3)
}

/// Lipschitz constant of `F` on `B_σ`: `3|ρ|(2+σ)(1+σ)²`.
pub fn map_f_lipschitz(rho_abs: f64, sigma: f64) -> f64 {
    3.0 * rho_abs * (2.0 + sigma) * (1.0 + sigma).powi(2)
}

/// Lipschitz constant of `T_ε` on `B_σ`: `9π|ε|²|ρ|(2+σ)(1+σ)²`.
pub fn contraction_ratio_bound(eps_sq: f64, rho_abs: f64, sigma: f64) -> f64 {
    9.0 * PI * eps_sq * rho_abs * (2.0 + sigma) * (1.0 + sigma).powi(2)
}

/// `δ(σ) = min{σ/(1+σ), 1/3} / (3π|ρ|(2+σ)(1+σ)²)`: for `|ε|² < δ` the map
/// `T_ε` sends `B_σ` into itself and contracts.
pub fn contraction_radius(sigma: f64, rho_abs: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(rho_abs > 0.0) || !sigma.is_finite() || !rho_abs.is_finite() {
        return Err(VortexError::invalid(format!(
            "contraction radius needs sigma > 0 and |rho| > 0 (got {sigma}, {rho_abs})"
        )));
    }
    let scale = 1.0 / (3.0 * PI * rho_abs * (2.0 + sigma) * (1.0 + sigma).powi(2));
    Ok(scale * (sigma / (1.0 + sigma)).min(1.0 / 3.0))
}

/// `sup |−U'' − U − ρ(r − |U|²)U|` over interior nodes.
pub fn ode_residual(u: &GridFunction, rho: C64, r: C64) -> f64 {
    let vals = u.values();
    let d2 = second_difference_interior(vals, u.grid().h());
    d2.iter()
        .zip(&vals[1..vals.len() - 1])
        .map(|(d, &z)| (-d - z - rho * (r - z.norm_sqr()) * z).norm())
        .fold(0.0, f64::max)
}

/// Per-iteration record of the contraction iteration.
#[derive(Debug, Clone, Default)]
pub struct FixedPointTrace {
    /// `‖w_{k+1} − w_k‖∞` for each evaluation of `T_ε`.
    pub increments: Vec<f64>,
    /// Largest `‖w_k‖∞` over all iterates, including the last evaluation.
    pub max_iterate_norm: f64,
}

impl FixedPointTrace {
    /// Successive increment ratios, skipping pairs whose denominator is at
    /// rounding level.
    pub fn ratios(&self, floor: f64) -> Vec<f64> {
        self.increments
            .windows(2)
            .filter(|p| p[0] > floor && p[1] > floor)
            .map(|p| p[1] / p[0])
            .collect()
    }
}

/// Solves `w = T_ε(w)` by iteration from `w₀ = 0`.
pub fn fixed_point_solve(params: &CoreParams) -> Result<Branch> {
    fixed_point_solve_traced(params, None).map(|(b, _)| b)
}

/// Fixed-point iteration from an optional warm start, returning the
/// increment history alongside the branch.
///
/// The returned iterate `w` satisfies `‖w − T_ε(w)‖∞ = fp_residual`. Iterates
/// are not clamped to `B_σ`.
pub fn fixed_point_solve_traced(
    params: &CoreParams,
    initial: Option<&GridFunction>,
) -> Result<(Branch, FixedPointTrace)> {
    params.validate()?;
    let grid = make_grid(params.n_nodes)?;
    let eps_sq = params.eps_sq();
    if eps_sq == 0.0 {
        return Err(VortexError::invalid("fixed_point_solve needs eps != 0"));
    }
    let mut w = match initial {
        Some(w0) => {
            if w0.grid().n_nodes() != grid.n_nodes() {
                return Err(VortexError::invalid("warm start lives on a different grid"));
            }
            project_p_complement(w0)
        }
        None => GridFunction::zeros(grid.clone()),
    };
    let mut trace = FixedPointTrace { increments: Vec::new(), max_iterate_norm: w.sup_norm() };
    let mut converged = false;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    for k in 1..=params.max_iter {
        iterations = k;
        let next = apply_t_unchecked(&w, params.rho, eps_sq);
        if !next.is_finite() {
            return Err(VortexError::Diverged { iteration: k });
        }
        residual = next.sup_distance(&w);
        trace.increments.push(residual);
        trace.max_iterate_norm = trace.max_iterate_norm.max(next.sup_norm());
        if residual <= params.tol_fp {
            converged = true;
            break;
        }
        w = next;
    }

    let v = w.map(|_, z| params.eps * (1.0 + z));
    let r = compute_r(&v, params.eps)?;
    Ok((
        Branch::assemble(*params, Method::FixedPoint, r, w, v, iterations, residual, converged),
        trace,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature_kernel::{solvability_residual, solve_linear_inhomogeneous};

    fn real_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::from_fn(grid.clone(), |x| C64::new(f(x), 0.0))
    }

    #[test]
    fn projection_examples() {
        let g = make_grid(257).unwrap();
        assert!((project_p(&real_fn(&g, |_| 1.0)) - 1.0).norm() < 1e-14);
        let c2 = project_p(&real_fn(&g, |y| (2.0 * y).cos()));
        assert!((c2 - 0.5).norm() < 1e-12);
        let z = project_p(&real_fn(&g, |y| 2.0 * (2.0 * y).cos() - 1.0));
        assert!(z.norm() < 1e-12);
    }

    #[test]
    fn l_of_zero_and_cos3() {
        let g = make_grid(257).unwrap();
        assert_eq!(apply_l(&GridFunction::zeros(g.clone())).unwrap().sup_norm(), 0.0);

        // Oracle: the linear solve with v(−π/2) = 0 followed by P'.
        let f = real_fn(&g, |y| (3.0 * y).cos());
        let v = solve_linear_inhomogeneous(&f, C64::new(0.0, 0.0)).unwrap();
        let oracle = v.add_constant(-project_p(&v));
        let lf = apply_l(&f).unwrap();
        assert!(lf.sup_distance(&oracle) < 1e-15);
        // cos 3x / cos x = 2 cos 2x − 1, so 32 L(−cos 3y / 4) = −(2 cos 2x − 1).
        let scaled = apply_l(&f.scale(C64::new(-0.25, 0.0))).unwrap().scale(C64::new(32.0, 0.0));
        let target = real_fn(&g, |x| -(2.0 * (2.0 * x).cos() - 1.0));
        assert!(scaled.sup_distance(&target) < 1e-6);
        assert!(project_p(&lf).norm() < 1e-14);
    }

    #[test]
    fn l_rejects_unsolvable() {
        let g = make_grid(65).unwrap();
        assert!(matches!(
            apply_l(&real_fn(&g, f64::cos)),
            Err(VortexError::RejectedInput { .. })
        ));
    }

    #[test]
    fn f_at_zero_is_cos3() {
        let g = make_grid(257).unwrap();
        let rho = C64::new(1.3, -0.4);
        let f0 = map_f(&GridFunction::zeros(g.clone()), rho).unwrap();
        // Quadrature oracle: ρ(3/4 − cos²x) cos x evaluated directly.
        let direct = GridFunction::from_fn(g.clone(), |x| rho * (0.75 - x.cos().powi(2)) * x.cos());
        assert!(f0.sup_distance(&direct) < 1e-10);
        let closed = GridFunction::from_fn(g.clone(), |x| -rho / 4.0 * (3.0 * x).cos());
        assert!(f0.sup_distance(&closed) < 1e-10);
        assert!(solvability_residual(&f0).norm() < 1e-15);
    }

    #[test]
    fn f_vanishes_for_zero_rho() {
        let g = make_grid(65).unwrap();
        let w = project_p_complement(&GridFunction::from_fn(g, |x| C64::new(x.sin(), x * x)));
        assert_eq!(map_f(&w, C64::new(0.0, 0.0)).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn f_requires_range_of_p_complement() {
        let g = make_grid(65).unwrap();
        let w = real_fn(&g, |_| 0.5);
        assert!(map_f(&w, C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn radius_values() {
        let d = contraction_radius(1.0, 1.0).unwrap();
        assert!((d - 1.0 / (108.0 * PI)).abs() < 1e-17);
        assert!((d - 2.947e-3).abs() < 1e-6);
        let d2 = contraction_radius(1.0, 2.0).unwrap();
        assert!((d2 - d / 2.0).abs() < 1e-18);
        assert!(contraction_radius(1e-9, 1.0).unwrap() < 1e-9);
        assert!(contraction_radius(0.0, 1.0).is_err());
        assert!(contraction_radius(1.0, -1.0).is_err());
    }

    #[test]
    fn trivial_product_gives_cosine() {
        let params = CoreParams::new(C64::new(0.0, 0.0), C64::new(0.3, 0.4));
        let b = fixed_point_solve(&params).unwrap();
        assert!(b.converged);
        assert_eq!(b.iterations, 1);
        assert_eq!(b.w.sup_norm(), 0.0);
        assert!((b.r - 0.75 * 0.25).norm() < 1e-14);
        let expect = GridFunction::from_fn(b.grid().clone(), |x| C64::new(0.3, 0.4) * x.cos());
        assert!(b.u.sup_distance(&expect) < 1e-15);
    }

    #[test]
    fn r_for_constant_v() {
        let g = make_grid(257).unwrap();
        let eps = C64::new(0.2, -0.1);
        let v = GridFunction::from_fn(g.clone(), |_| eps);
        assert!((compute_r(&v, eps).unwrap() - 0.75 * eps.norm_sqr()).norm() < 1e-14);
        assert_eq!(compute_r(&GridFunction::zeros(g.clone()), eps).unwrap(), C64::new(0.0, 0.0));
        assert!(compute_r(&v, C64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn certified_iteration_contracts() {
        let rho = C64::new(0.8, 0.6);
        let sigma = 1.0;
        let delta = contraction_radius(sigma, 1.0).unwrap();
        let eps = C64::new((0.5 * delta).sqrt(), 0.0);
        let params = CoreParams { sigma, ..CoreParams::new(rho, eps) };
        assert!(params.is_certified());
        let (b, trace) = fixed_point_solve_traced(&params, None).unwrap();
        assert!(b.converged && b.fp_residual <= params.tol_fp);
        assert!(trace.max_iterate_norm <= sigma);
        let bound = contraction_ratio_bound(eps.norm_sqr(), 1.0, sigma);
        for q in trace.ratios(1e-14) {
            assert!(q <= bound, "ratio {q} > {bound}");
        }
        assert!(project_p(&b.w).norm() <= TOL_RANGE);
    }

    #[test]
    fn rectangle_corner_converges() {
        for rho in [C64::new(3.5, 1.5), C64::new(-3.5, 1.5), C64::new(-3.5, 0.0)] {
            let b = fixed_point_solve(&CoreParams::new(rho, C64::new(1.0, 0.0))).unwrap();
            assert!(b.converged, "rho = {rho}");
        }
    }

    #[test]
    fn divergence_is_an_error() {
        let params = CoreParams::new(C64::new(0.0, 400.0), C64::new(3.0, 0.0));
        match fixed_point_solve(&params) {
            Err(VortexError::Diverged { .. }) => {}
            Ok(b) => assert!(!b.converged),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn ode_residual_small_and_second_order() {
        let rho = C64::new(0.5, 0.2);
        let eps = C64::new(0.2, 0.0);
        let res = |n: usize| {
            fixed_point_solve(&CoreParams::new(rho, eps).with_nodes(n)).unwrap().ode_residual
        };
        let (a, b) = (res(257), res(513));
        assert!(a <= 1e-6 * eps.norm(), "residual {a}");
        let slope = (a / b).log2();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
    }

    #[test]
    fn gauge_rotation() {
        let rho = C64::new(1.0, 0.5);
        let eps = C64::new(0.9, 0.0);
        let phase = C64::from_polar(1.0, 0.7);
        let a = fixed_point_solve(&CoreParams::new(rho, eps)).unwrap();
        let b = fixed_point_solve(&CoreParams::new(rho, eps * phase)).unwrap();
        assert!((a.r - b.r).norm() < 1e-12);
        assert!(a.u.scale(phase).sup_distance(&b.u) < 1e-12);
    }
}
