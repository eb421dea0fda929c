use std::f64::consts::FRAC_PI_2;

use cgl_vortex::direct_solvers::{compare_branches, fd_solve, shoot_follow, FdState, ShootingState};
use cgl_vortex::output::{emit_results, Format};
use cgl_vortex::physics::{
    asymptotic_big_r, asymptotic_omega, cgl_residual, extend_solution, physical_from_r, physical_from_rho,
    rho_from_physical,
};
use cgl_vortex::quadrature_kernel::solvability_residual;
use cgl_vortex::reduction::{asymptotic_r, asymptotic_u, fixed_point_solve, map_f, project_p, project_p_complement};
use cgl_vortex::sweep::{conjugate_records, count_zeros, run_sweep, symmetry_defect, SweepMode, SweepSpec};
use cgl_vortex::{Branch, CoreParams, Method, Result, VortexError, C64};
use serde_json::{json, Value};

use crate::{ExpandArgs, FormatArg, ModeArg, PhysicalArgs, SolveArgs, Status, SweepArgs, VerifyArgs};

fn solve_with(rho: C64, eps: C64, method: Method, nodes: usize, tol: Option<f64>) -> Result<Branch> {
    match method {
        Method::FixedPoint => {
            let mut params = CoreParams::new(rho, eps).with_nodes(nodes);
            if let Some(t) = tol {
                params = params.with_tol(t);
            }
            fixed_point_solve(&params)
        }
        Method::Shooting => {
            let mut state = ShootingState::seeded(rho, eps).with_nodes(nodes);
            if let Some(t) = tol {
                state.newton_tol = t;
            }
            shoot_follow(rho, eps, &state)
        }
        Method::FiniteDifference => {
            let mut state = FdState::new(nodes)?;
            if let Some(t) = tol {
                state.picard_tol = t;
            }
            fd_solve(rho, eps, &state)
        }
    }
}

fn branch_summary(b: &Branch, dump: bool) -> Value {
    let mut out = json!({
        "method": b.method.as_str(),
        "rho_re": b.params.rho.re,
        "rho_im": b.params.rho.im,
        "eps_re": b.params.eps.re,
        "eps_im": b.params.eps.im,
        "converged": b.converged,
        "r_re": b.r.re,
        "r_im": b.r.im,
        "iterations": b.iterations,
        "residual": b.fp_residual,
        "ode_residual": b.ode_residual,
        "projection_w": project_p(&b.w).norm(),
        "sup_u": b.u.sup_norm(),
        "n_nodes": b.grid().n_nodes(),
        "h": b.grid().h(),
    });
    if dump {
        let u = b.u.values();
        out["x"] = json!(b.grid().nodes());
        out["U_re"] = json!(u.iter().map(|z| z.re).collect::<Vec<_>>());
        out["U_im"] = json!(u.iter().map(|z| z.im).collect::<Vec<_>>());
    }
    out
}

pub fn solve(a: &SolveArgs) -> Result<Status> {
    let branch = solve_with(a.rho.value(), a.eps.value(), a.method.into(), a.nodes, a.tol)?;
    println!("{}", serde_json::to_string_pretty(&branch_summary(&branch, a.dump))?);
    Ok(if branch.converged { Status::Ok } else { Status::NotConverged })
}

pub fn sweep(a: &SweepArgs) -> Result<Status> {
    let mode = match a.mode {
        ModeArg::Rect => SweepMode::Rectangle {
            re_min: a.re_min,
            re_max: a.re_max,
            im_min: a.im_min,
            im_max: a.im_max,
            re_steps: a.re_steps,
            im_steps: a.im_steps,
        },
        ModeArg::Arg => SweepMode::Arg {
            modulus: a.modulus,
            arg_min: a.arg_min,
            arg_max: a.arg_max,
            steps: a.steps.unwrap_or(64),
        },
        ModeArg::Mod => {
            SweepMode::Modulus { arg: a.arg, mod_min: a.mod_min, mod_max: a.mod_max, steps: a.steps.unwrap_or(32) }
        }
    };
    let spec = SweepSpec {
        mode,
        eps: a.eps.value(),
        method: a.method.into(),
        n_nodes: a.nodes,
        n: a.n,
        warm_start: a.warm_start,
        tol_zero: a.tol_zero,
    };
    let mut records = run_sweep(&spec)?;
    if a.conjugate {
        let mirrored = conjugate_records(&records);
        records.extend(mirrored);
    }
    let format = match a.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    emit_results(&records, format, &a.out)?;
    let converged = records.iter().filter(|r| r.converged).count();
    eprintln!("{converged}/{} points converged; wrote {}", records.len(), a.out.display());
    Ok(Status::Ok)
}

pub fn expand(a: &ExpandArgs) -> Result<Status> {
    if a.order > 2 {
        return Err(VortexError::InvalidArgument(format!("order must be 0, 1 or 2, got {}", a.order)));
    }
    if a.points < 2 {
        return Err(VortexError::InvalidArgument("need at least 2 sample points".to_string()));
    }
    let (rho, eps) = (a.rho.value(), a.eps.value());
    let r = asymptotic_r(rho, eps, a.order.min(1))?;
    let xs: Vec<f64> = (0..a.points).map(|i| -FRAC_PI_2 + i as f64 * 2.0 * FRAC_PI_2 / (a.points - 1) as f64).collect();
    let u = xs.iter().map(|&x| asymptotic_u(rho, eps, x, a.order)).collect::<Result<Vec<_>>>()?;
    let physical = physical_from_rho(rho, a.n).map(|(mu, nu)| physical_from_r(r, mu, nu, a.n)).transpose()?;
    let out = json!({
        "rho_re": rho.re,
        "rho_im": rho.im,
        "eps_re": eps.re,
        "eps_im": eps.im,
        "order": a.order,
        "r_re": r.re,
        "r_im": r.im,
        "n": a.n,
        "mu": physical.map(|p| p.mu),
        "nu": physical.map(|p| p.nu),
        "R": physical.map(|p| p.big_r),
        "omega": physical.map(|p| p.omega),
        "x": xs,
        "U_re": u.iter().map(|z| z.re).collect::<Vec<_>>(),
        "U_im": u.iter().map(|z| z.im).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(Status::Ok)
}

struct Check {
    name: String,
    value: f64,
    tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance }
    }

    fn pass(&self) -> bool {
        self.value <= self.tolerance
    }

    fn to_json(&self) -> Value {
        json!({ "name": self.name, "value": self.value, "tolerance": self.tolerance, "pass": self.pass() })
    }
}

/// A failed solve counts as an infinitely bad check.
fn or_inf(x: Result<f64>) -> f64 {
    x.unwrap_or(f64::INFINITY)
}

pub fn verify(a: &VerifyArgs) -> Result<Status> {
    let (rho, eps) = (a.rho.value(), a.eps.value());
    let fine = 2 * a.nodes - 1;
    let methods = [Method::FixedPoint, Method::Shooting, Method::FiniteDifference];
    let branches: Vec<Option<Branch>> = methods
        .iter()
        .map(|&m| solve_with(rho, eps, m, a.nodes, None).ok().filter(|b| b.converged))
        .collect();
    let mut checks = Vec::new();
    for (m, b) in methods.iter().zip(&branches) {
        checks.push(Check::new(format!("{} converged", m.as_str()), if b.is_some() { 0.0 } else { 1.0 }, 0.0));
        if let Some(b) = b {
            checks.push(Check::new(format!("{} |P w|", m.as_str()), project_p(&b.w).norm(), 1e-10));
        }
    }

    // The finite-difference error is estimated from one refinement.
    let fd_error = match (&branches[2], solve_with(rho, eps, Method::FiniteDifference, fine, None)) {
        (Some(coarse), Ok(f)) if f.converged => or_inf(compare_branches(coarse, &f)) * 4.0 / 3.0,
        _ => f64::INFINITY,
    };
    let gap = |i: usize, j: usize| match (&branches[i], &branches[j]) {
        (Some(x), Some(y)) => or_inf(compare_branches(x, y)),
        _ => f64::INFINITY,
    };
    checks.push(Check::new("fixed_point vs shooting", gap(0, 1), 1e-6));
    checks.push(Check::new("fixed_point vs finite_difference", gap(0, 2), 1e-6f64.max(2.0 * fd_error)));
    checks.push(Check::new("shooting vs finite_difference", gap(1, 2), 1e-6f64.max(2.0 * fd_error)));

    let mut residuals = Value::Null;
    if let Some(fp) = &branches[0] {
        let rotated = fixed_point_solve(&CoreParams::new(rho, eps * C64::from_polar(1.0, 0.7)).with_nodes(a.nodes));
        let gauge = or_inf(rotated.map(|b| (b.r - fp.r).norm()));
        checks.push(Check::new("gauge invariance of r", gauge, 1e-12 * fp.r.norm().max(1.0)));
        let solv = or_inf(map_f(&project_p_complement(&fp.w), rho).map(|f| solvability_residual(&f).norm()));
        checks.push(Check::new("solvability of F(w)", solv, 1e-10));
        checks.push(Check::new("symmetry defect", symmetry_defect(&fp.u), 1e-8));
        let zeros = extend_solution(fp, a.n, 0.0).map(|s| count_zeros(&s, cgl_vortex::sweep::DEFAULT_TOL_ZERO));
        let wrong = match zeros {
            Ok((count, extra)) => (count.abs_diff(2 * a.n as usize) + extra) as f64,
            Err(_) => f64::INFINITY,
        };
        checks.push(Check::new(format!("zero count equals {}", 2 * a.n), wrong, 0.0));

        if let Some((mu, nu)) = physical_from_rho(rho, a.n) {
            let residual_at = |b: &Branch| -> Result<f64> {
                let p = physical_from_r(b.r, mu, nu, a.n)?;
                cgl_residual(&extend_solution(b, a.n, p.omega)?, &p)
            };
            let coarse = or_inf(residual_at(fp));
            let refined = or_inf(
                fixed_point_solve(&CoreParams::new(rho, eps).with_nodes(fine)).and_then(|b| residual_at(&b)),
            );
            // Second order halves the spacing and quarters the residual.
            checks.push(Check::new("PDE residual refinement ratio", refined / coarse, 0.3));
            residuals = json!({ "mu": mu, "nu": nu, "coarse": coarse, "refined": refined });
        }
    }

    let pass = checks.iter().all(Check::pass);
    let out = json!({
        "rho_re": rho.re,
        "rho_im": rho.im,
        "eps_re": eps.re,
        "eps_im": eps.im,
        "nodes": a.nodes,
        "branches": branches.iter().flatten().map(|b| branch_summary(b, false)).collect::<Vec<_>>(),
        "cgl_residual": residuals,
        "checks": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
        "pass": pass,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(if pass { Status::Ok } else { Status::Invalid })
}

pub fn physical(a: &PhysicalArgs) -> Result<Status> {
    let rho = rho_from_physical(a.mu, a.nu, a.n)?;
    let eps = a.eps.value();
    let r_asym = asymptotic_r(rho, eps, 1)?;
    let big_r_asym = asymptotic_big_r(eps, a.mu, a.nu, a.n)?;
    let omega_asym = asymptotic_omega(eps, a.mu, a.nu, a.n)?;
    let branch = fixed_point_solve(&CoreParams::new(rho, eps).with_nodes(a.nodes))?;
    let p = physical_from_r(branch.r, a.mu, a.nu, a.n)?;

    println!("{:<10} {:>24} {:>24}", "quantity", "asymptotic", "numeric");
    let rows = [
        ("rho_re", rho.re, rho.re),
        ("rho_im", rho.im, rho.im),
        ("r_re", r_asym.re, branch.r.re),
        ("r_im", r_asym.im, branch.r.im),
        ("R", big_r_asym, p.big_r),
        ("omega", omega_asym, p.omega),
    ];
    for (name, x, y) in rows {
        println!("{name:<10} {x:>24.16e} {y:>24.16e}");
    }
    println!("{:<10} {:>24} {:>24}", "converged", "-", branch.converged);
    Ok(Status::Ok)
}
