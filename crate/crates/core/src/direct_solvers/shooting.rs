//! Shooting from `x = −π/2` with fixed-step RK4 and a damped Newton iteration
//! on the unknowns `(U'(−π/2), r) ∈ ℂ²`.

use std::f64::consts::{FRAC_2_PI, PI};
use std::sync::Arc;

use nalgebra::{Matrix4, Vector4};

use crate::error::{Result, VortexError};
use crate::quadrature_kernel::{make_grid, simpson, Grid, GridFunction, ENDPOINT_COS};
use crate::reduction::{asymptotic_r, compute_r, Branch, CoreParams, Method};
use crate::C64;

pub const DEFAULT_STEPS: usize = 1024;
pub const MIN_STEPS: usize = 64;
const JACOBIAN_STEP: f64 = 1e-7;
const MAX_HALVINGS: usize = 14;

/// Initial data and controls for [`shoot_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingState {
    /// Guess for `U'(−π/2)`.
    pub a: C64,
    pub r: C64,
    /// RK4 steps across J; a multiple of `n_nodes − 1`.
    pub step_count: usize,
    /// Bound on the sup-norm of the boundary residual, relative to `|ε|`.
    pub newton_tol: f64,
    pub newton_max: usize,
    pub n_nodes: usize,
}

impl ShootingState {
    /// Leading-order seed: `U ≈ ε cos x` gives `a = ε`, with `r` from the
    /// first-order expansion.
    pub fn seeded(rho: C64, eps: C64) -> Self {
        ShootingState {
            a: eps,
            r: asymptotic_r(rho, eps, 1).unwrap_or(C64::new(0.75 * eps.norm_sqr(), 0.0)),
            step_count: DEFAULT_STEPS,
            newton_tol: 1e-12,
            newton_max: 40,
            n_nodes: crate::quadrature_kernel::DEFAULT_NODES,
        }
    }

    pub fn with_nodes(mut self, n_nodes: usize) -> Self {
        self.n_nodes = n_nodes;
        let base = n_nodes.saturating_sub(1).max(1);
        self.step_count = DEFAULT_STEPS.div_ceil(base) * base;
        self
    }

    pub fn validate(&self) -> Result<()> {
        Grid::new(self.n_nodes)?;
        if self.step_count < MIN_STEPS || !self.step_count.is_multiple_of(self.n_nodes - 1) {
            return Err(VortexError::invalid(format!(
                "step_count must be >= {MIN_STEPS} and a multiple of n_nodes - 1 (got {})",
                self.step_count
            )));
        }
        if !(self.newton_tol > 0.0) || self.newton_max == 0 {
            return Err(VortexError::invalid("newton_tol must be positive and newton_max >= 1"));
        }
        Ok(())
    }
}

/// RK4 trajectory of `U'' = −U − ρ(r − |U|²)U`, `U(−π/2) = 0`, `U'(−π/2) = a`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `U` at every step point, `step_count + 1` values.
    pub u: Vec<C64>,
    /// `U'` at every step point.
    pub du: Vec<C64>,
}

pub fn integrate_ivp(rho: C64, r: C64, a: C64, step_count: usize) -> Trajectory {
    let h = PI / step_count as f64;
    let accel = |u: C64| -u - rho * (r - u.norm_sqr()) * u;
    let mut u = vec![C64::new(0.0, 0.0); step_count + 1];
    let mut du = vec![C64::new(0.0, 0.0); step_count + 1];
    du[0] = a;
    for k in 0..step_count {
        let (y, p) = (u[k], du[k]);
        let (k1u, k1p) = (p, accel(y));
        let (k2u, k2p) = (p + 0.5 * h * k1p, accel(y + 0.5 * h * k1u));
        let (k3u, k3p) = (p + 0.5 * h * k2p, accel(y + 0.5 * h * k2u));
        let (k4u, k4p) = (p + h * k3p, accel(y + h * k3u));
        u[k + 1] = y + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        du[k + 1] = p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    }
    Trajectory { u, du }
}

struct Shooter<'a> {
    rho: C64,
    eps: C64,
    grid: &'a Arc<Grid>,
    step_count: usize,
}

impl Shooter<'_> {
    fn stride(&self) -> usize {
        self.step_count / (self.grid.n_nodes() - 1)
    }

    fn node_values(&self, traj: &Trajectory) -> Vec<C64> {
        traj.u.iter().step_by(self.stride()).copied().collect()
    }

    /// `(U(π/2), (2/π)∫_J U cos − ε)`, with the integral taken by the same
    /// Simpson rule as the projection `P`.
    fn residual(&self, z: &Vector4<f64>) -> Option<Vector4<f64>> {
        let (a, r) = (C64::new(z[0], z[1]), C64::new(z[2], z[3]));
        let traj = integrate_ivp(self.rho, r, a, self.step_count);
        let end = traj.u[self.step_count];
        let ucos: Vec<C64> =
            self.node_values(&traj).iter().zip(self.grid.cos()).map(|(u, c)| u * c).collect();
        let norm = simpson(self.grid.h(), &ucos) * FRAC_2_PI - self.eps;
        let out = Vector4::new(end.re, end.im, norm.re, norm.im);
        out.iter().all(|t| t.is_finite()).then_some(out)
    }

    fn jacobian(&self, z: &Vector4<f64>, g: &Vector4<f64>) -> Option<Matrix4<f64>> {
        let mut jac = Matrix4::zeros();
        for j in 0..4 {
            let step = JACOBIAN_STEP * z[j].abs().max(1.0);
            let mut zz = *z;
            zz[j] += step;
            let gj = self.residual(&zz)?;
            jac.set_column(j, &((gj - g) / step));
        }
        Some(jac)
    }
}

struct NewtonOutcome {
    z: Vector4<f64>,
    iterations: usize,
    residual: f64,
    converged: bool,
}

fn damped_newton(shooter: &Shooter, z0: Vector4<f64>, state: &ShootingState) -> Result<NewtonOutcome> {
    let tol = state.newton_tol * shooter.eps.norm();
    let mut z = z0;
    let Some(mut g) = shooter.residual(&z) else {
        return Ok(NewtonOutcome { z, iterations: 0, residual: f64::INFINITY, converged: false });
    };
    for k in 0..state.newton_max {
        let norm = g.amax();
        if norm <= tol {
            return Ok(NewtonOutcome { z, iterations: k, residual: norm, converged: true });
        }
        let Some(jac) = shooter.jacobian(&z, &g) else {
            return Ok(NewtonOutcome { z, iterations: k, residual: norm, converged: false });
        };
        let step = jac.lu().solve(&(-g)).ok_or_else(|| {
            VortexError::DegenerateSystem("singular shooting Jacobian".to_string())
        })?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = z + lambda * step;
            if let Some(gt) = shooter.residual(&trial) {
                if gt.norm() < (1.0 - 1e-4 * lambda) * g.norm() {
                    accepted = Some((trial, gt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((zn, gn)) => {
                z = zn;
                g = gn;
            }
            None => {
                return Ok(NewtonOutcome { z, iterations: k + 1, residual: norm, converged: false })
            }
        }
    }
    let residual = g.amax();
    Ok(NewtonOutcome { z, iterations: state.newton_max, residual, converged: residual <= tol })
}

fn check_inputs(eps: C64, state: &ShootingState) -> Result<()> {
    state.validate()?;
    if eps.norm() == 0.0 || !eps.re.is_finite() || !eps.im.is_finite() {
        return Err(VortexError::invalid("shooting needs finite eps != 0"));
    }
    Ok(())
}

/// Newton shooting from the initial data in `init`.
pub fn shoot_solve(rho: C64, eps: C64, init: &ShootingState) -> Result<Branch> {
    check_inputs(eps, init)?;
    let grid = make_grid(init.n_nodes)?;
    if rho.norm() == 0.0 {
        return linear_branch(eps, init, &grid);
    }
    let shooter = Shooter { rho, eps, grid: &grid, step_count: init.step_count };
    let z0 = Vector4::new(init.a.re, init.a.im, init.r.re, init.r.im);
    let out = damped_newton(&shooter, z0, init)?;
    Ok(build_branch(&shooter, init, &out))
}

/// Homotopy in `ρ` along the segment from `0`: each step is a Newton solve
/// seeded by linear extrapolation of the previous two, with the step in
/// `ρ|ε|²` capped at one and halved on failure. Following the branch this way
/// keeps Newton from jumping to a neighbouring solution at large `|ρ|`.
pub fn shoot_follow(rho: C64, eps: C64, template: &ShootingState) -> Result<Branch> {
    check_inputs(eps, template)?;
    let grid = make_grid(template.n_nodes)?;
    if rho.norm() == 0.0 {
        return linear_branch(eps, template, &grid);
    }
    let load = rho.norm() * eps.norm_sqr();
    let max_dt = (1.0 / load).min(1.0);
    let min_dt = 1e-4 * max_dt;
    let to_vec = |a: C64, r: C64| Vector4::new(a.re, a.im, r.re, r.im);

    let mut history: Vec<(f64, Vector4<f64>)> = Vec::new();
    let mut t = 0.0;
    let mut dt = max_dt;
    let mut total = 0;
    let mut last = None;
    while t < 1.0 {
        let tn = (t + dt).min(1.0);
        let guess = match history.as_slice() {
            [] => to_vec(eps, asymptotic_r(rho * tn, eps, 1)?),
            [(_, z1)] => *z1,
            [.., (t0, z0), (t1, z1)] => z1 + (z1 - z0) * ((tn - t1) / (t1 - t0)),
        };
        let shooter = Shooter { rho: rho * tn, eps, grid: &grid, step_count: template.step_count };
        let out = damped_newton(&shooter, guess, template)?;
        total += out.iterations;
        if out.converged {
            t = tn;
            history.push((t, out.z));
            if history.len() > 2 {
                history.remove(0);
            }
            dt = (dt * 2.0).min(max_dt);
            last = Some(out);
        } else {
            dt *= 0.5;
            if dt < min_dt {
                last = Some(out);
                break;
            }
        }
    }
    let mut out = last.expect("at least one continuation step runs");
    if t < 1.0 {
        out.converged = false;
    }
    out.iterations = total;
    let shooter = Shooter { rho, eps, grid: &grid, step_count: template.step_count };
    Ok(build_branch(&shooter, template, &out))
}

fn build_branch(shooter: &Shooter, state: &ShootingState, out: &NewtonOutcome) -> Branch {
    let (a, r) = (C64::new(out.z[0], out.z[1]), C64::new(out.z[2], out.z[3]));
    let traj = integrate_ivp(shooter.rho, r, a, state.step_count);
    let v = v_from_trajectory(shooter, &traj);
    let params = params_for(shooter.rho, shooter.eps, state);
    Branch::from_v(params, Method::Shooting, r, v, out.iterations, out.residual, out.converged)
}

/// `v = U/cos x`; at `∓π/2` the limits are `±U'`.
fn v_from_trajectory(shooter: &Shooter, traj: &Trajectory) -> GridFunction {
    let grid = shooter.grid;
    let stride = shooter.stride();
    let values = (0..grid.n_nodes())
        .map(|i| {
            let c = grid.cos()[i];
            if c.abs() < ENDPOINT_COS {
                let slope = traj.du[i * stride];
                if grid.nodes()[i] < 0.0 {
                    slope
                } else {
                    -slope
                }
            } else {
                traj.u[i * stride] / c
            }
        })
        .collect();
    GridFunction::from_raw(grid.clone(), values)
}

fn params_for(rho: C64, eps: C64, state: &ShootingState) -> CoreParams {
    CoreParams { tol_fp: state.newton_tol, max_iter: state.newton_max, ..CoreParams::new(rho, eps).with_nodes(state.n_nodes) }
}

/// At `ρ = 0` the equation is linear: `U = a cos x` with `a` fixed by the
/// normalisation, and `r` reported as `compute_r(v, ε)`.
fn linear_branch(eps: C64, state: &ShootingState, grid: &Arc<Grid>) -> Result<Branch> {
    let zero = C64::new(0.0, 0.0);
    let unit = integrate_ivp(zero, zero, C64::new(1.0, 0.0), state.step_count);
    let shooter = Shooter { rho: zero, eps, grid, step_count: state.step_count };
    let ucos: Vec<C64> = shooter.node_values(&unit).iter().zip(grid.cos()).map(|(u, c)| u * c).collect();
    let scale = eps / (simpson(grid.h(), &ucos) * FRAC_2_PI);
    let traj = Trajectory {
        u: unit.u.iter().map(|u| u * scale).collect(),
        du: unit.du.iter().map(|u| u * scale).collect(),
    };
    let v = v_from_trajectory(&shooter, &traj);
    let r = compute_r(&v, eps)?;
    let end = traj.u[state.step_count].norm();
    let params = params_for(zero, eps, state);
    Ok(Branch::from_v(params, Method::Shooting, r, v, 1, end, true))
}
