//! Physical parameters of
//!
//! ```text
//! u_t = (1 + iν) u_xx + (R − (1 + iμ)|u|²) u
//! ```
//!
//! and their relation to the reduced problem through
//! `ρ = (1 + iμ)/((1 + iν)n²)` and `r = (R + iω − (1 + iν)n²)/(1 + iμ)`.

use serde::{Deserialize, Serialize};

use crate::direct_solvers::rhs_f;
use crate::error::{Result, VortexError};
use crate::quadrature_kernel::jump_increment;
use crate::reduction::Branch;
use crate::stencil::second_difference_periodic;
use crate::C64;

/// Bound on `|∫_J f sin y dy|` for `v` to extend π-periodically.
pub const TOL_JUMP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    #[serde(rename = "R")]
    pub big_r: f64,
    pub mu: f64,
    pub nu: f64,
    pub n: u32,
    pub omega: f64,
}

fn check_mode(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(VortexError::invalid("mode number n must be >= 1"));
    }
    Ok(f64::from(n) * f64::from(n))
}

/// `ρ = (1 + iμ)/((1 + iν)n²)`.
pub fn rho_from_physical(mu: f64, nu: f64, n: u32) -> Result<C64> {
    let n2 = check_mode(n)?;
    Ok(C64::new(1.0, mu) / (C64::new(1.0, nu) * n2))
}

/// The `(μ, ν)` with `ρ = (1 + iμ)/((1 + iν)n²)`, if any. Real `ρ` is reachable
/// only when `ρn² = 1`, in which case `μ = ν = 0` is returned.
pub fn physical_from_rho(rho: C64, n: u32) -> Option<(f64, f64)> {
    let n2 = check_mode(n).ok()?;
    let z = rho * n2;
    if z.im.abs() <= 1e-15 * z.norm() {
        return ((z.re - 1.0).abs() <= 1e-14).then_some((0.0, 0.0));
    }
    // (1 + iν) z = 1 + iμ: the real part fixes ν, the imaginary part μ.
    let nu = (z.re - 1.0) / z.im;
    let mu = z.im + nu * z.re;
    Some((mu, nu))
}

/// `r = (R + iω − (1 + iν)n²)/(1 + iμ)`.
pub fn r_from_physical(big_r: f64, omega: f64, mu: f64, nu: f64, n: u32) -> Result<C64> {
    let n2 = check_mode(n)?;
    Ok((C64::new(big_r, omega) - C64::new(1.0, nu) * n2) / C64::new(1.0, mu))
}

/// `R = n² + Re[(1 + iμ)r]`, `ω = νn² + Im[(1 + iμ)r]`.
pub fn physical_from_r(r: C64, mu: f64, nu: f64, n: u32) -> Result<PhysParams> {
    let n2 = check_mode(n)?;
    let z = C64::new(1.0, mu) * r;
    Ok(PhysParams { big_r: n2 + z.re, mu, nu, n, omega: nu * n2 + z.im })
}

/// `R` to second order in `|ε|²`.
pub fn asymptotic_big_r(eps: C64, mu: f64, nu: f64, n: u32) -> Result<f64> {
    let n2 = check_mode(n)?;
    let s = eps.norm_sqr();
    let coeff = (3.0 - mu * mu + 4.0 * mu * nu) / (96.0 * n2 * (1.0 + nu * nu));
    Ok(n2 + 0.75 * s * (1.0 - coeff * s))
}

/// `ω` to second order in `|ε|²`.
pub fn asymptotic_omega(eps: C64, mu: f64, nu: f64, n: u32) -> Result<f64> {
    let n2 = check_mode(n)?;
    let s = eps.norm_sqr();
    let coeff = (3.0 * mu * mu * nu + 4.0 * mu - nu) / (96.0 * n2 * (1.0 + nu * nu));
    Ok(nu * n2 + 0.75 * s * (mu - coeff * s))
}

/// `μR + (ν − μ)n²`, which `ω` matches up to `O((R − n²)²)`.
pub fn omega_linear_relation(big_r: f64, mu: f64, nu: f64, n: u32) -> Result<f64> {
    let n2 = check_mode(n)?;
    Ok(mu * big_r + (nu - mu) * n2)
}

/// `U(nx)` over one period `x ∈ [0, 2π)`, built from the branch on J with
/// `v(x + π) = v(x)`, so that `U(x + π) = −U(x)`.
#[derive(Debug, Clone)]
pub struct VortexSolution {
    /// Physical sample points `x_j = j·h/n`.
    pub x: Vec<f64>,
    /// `U(n x_j)`.
    pub u: Vec<C64>,
    /// `v(n x_j)`.
    pub v: Vec<C64>,
    pub n: u32,
    pub omega: f64,
    /// Grid spacing of the underlying branch in the scaled variable `nx`.
    pub h: f64,
    /// `∫_J f sin y dy` for the branch.
    pub jump: C64,
}

impl VortexSolution {
    pub fn sup_norm(&self) -> f64 {
        self.u.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Periodic extension of a converged branch to `u(x, t) = U(nx)e^{−iωt}`.
pub fn extend_solution(branch: &Branch, n: u32, omega: f64) -> Result<VortexSolution> {
    branch.require_converged()?;
    let f = rhs_f(&branch.v, branch.params.rho, branch.r);
    let jump = jump_increment(&f);
    let tolerance = TOL_JUMP * f.sup_norm().max(1.0);
    if jump.norm() > tolerance {
        return Err(VortexError::NonPeriodicExtension { jump: jump.norm(), tolerance });
    }
    extend_unchecked(branch, n, omega, jump)
}

fn extend_unchecked(branch: &Branch, n: u32, omega: f64, jump: C64) -> Result<VortexSolution> {
    check_mode(n)?;
    let grid = branch.grid();
    let period = grid.n_nodes() - 1;
    let mid = grid.mid();
    let h = grid.h();
    let count = 2 * n as usize * period;
    let (u_j, v_j) = (branch.u.values(), branch.v.values());
    let mut x = Vec::with_capacity(count);
    let mut u = Vec::with_capacity(count);
    let mut v = Vec::with_capacity(count);
    for j in 0..count {
        // n·x_j = −π/2 + m h with m = j + mid, folded into J by U(x + π) = −U(x).
        let m = j + mid;
        let k = m / period;
        let local = m - k * period;
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        x.push(j as f64 * h / f64::from(n));
        u.push(sign * u_j[local]);
        v.push(v_j[local]);
    }
    Ok(VortexSolution { x, u, v, n, omega, h, jump })
}

/// `sup |−iωU − (1 + iν)U_xx − (R − (1 + iμ)|U|²)U|` over the extended
/// samples, with `U_xx` from periodic second differences.
pub fn cgl_residual(sol: &VortexSolution, p: &PhysParams) -> Result<f64> {
    if sol.n != p.n {
        return Err(VortexError::invalid(format!(
            "solution has n = {} but parameters have n = {}",
            sol.n, p.n
        )));
    }
    let n2 = f64::from(p.n).powi(2);
    let d2 = second_difference_periodic(&sol.u, sol.h);
    let diff = C64::new(1.0, p.nu);
    let nonlin = C64::new(1.0, p.mu);
    Ok(sol
        .u
        .iter()
        .zip(&d2)
        .map(|(&z, &dz)| {
            let term = C64::new(0.0, -p.omega) * z - diff * n2 * dz - (p.big_r - nonlin * z.norm_sqr()) * z;
            term.norm()
        })
        .fold(0.0, f64::max))
}
