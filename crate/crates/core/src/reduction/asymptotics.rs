//! Small-amplitude expansions of the branch and the remainder functions
//! `φ(|ε|²)` and `Φ(|ε|², x)` defined by
//! `r = ¾|ε|²(1 + |ε|²φ)` and `U = ε(1 + |ε|²Φ) cos x`.
//!
//! The coefficients below hold for complex `ρ`. Second-order terms pick up
//! `ρ̄` through `|1 + w|²`; for real `ρ` they reduce to the familiar
//! `1 − ρ|ε|²/32` and `(ρ|ε|²/32)²(3 cos 3x + cos 5x)/cos x` forms.

use std::sync::Arc;

use crate::error::{Result, VortexError};
use crate::quadrature_kernel::{Grid, GridFunction};
use crate::C64;

use super::Branch;

/// `cos 3x / cos x = 4c² − 3`.
fn q3(c: f64) -> f64 {
    4.0 * c * c - 3.0
}

/// `cos 5x / cos x = 16c⁴ − 20c² + 5`.
fn q5(c: f64) -> f64 {
    let c2 = c * c;
    16.0 * c2 * c2 - 20.0 * c2 + 5.0
}

/// `φ(0) = −(2ρ + ρ̄)/96`.
pub fn leading_phi(rho: C64) -> C64 {
    -(2.0 * rho + rho.conj()) / 96.0
}

/// `Φ(0, x) = −(ρ/32)(2 cos 2x − 1)` sampled on `grid`.
pub fn leading_phi_field(rho: C64, grid: &Arc<Grid>) -> GridFunction {
    GridFunction::from_fn(grid.clone(), |x| -rho / 32.0 * q3(x.cos()))
}

/// Partial sums of the `r` expansion in powers of `|ε|²`.
pub fn asymptotic_r(rho: C64, eps: C64, order: u32) -> Result<C64> {
    let s = eps.norm_sqr();
    let lead = C64::new(0.75 * s, 0.0);
    match order {
        0 => Ok(lead),
        1 => Ok(lead * (1.0 + s * leading_phi(rho))),
        _ => Err(VortexError::invalid(format!("asymptotic_r supports orders 0 and 1, got {order}"))),
    }
}

/// Partial sums of the `U(x)` expansion in powers of `|ε|²`, finite at the
/// zeros of `cos x`.
pub fn asymptotic_u(rho: C64, eps: C64, x: f64, order: u32) -> Result<C64> {
    if order > 2 {
        return Err(VortexError::invalid(format!(
            "asymptotic_u supports orders 0, 1 and 2, got {order}"
        )));
    }
    let s = eps.norm_sqr();
    let c = x.cos();
    let mut factor = C64::new(1.0, 0.0);
    if order >= 1 {
        factor -= rho * s / 32.0 * q3(c);
    }
    if order >= 2 {
        let (a3, a5) = (q3(c), q5(c));
        let inner = rho * (3.0 * a3 + 2.0 * a5) + rho.conj() * (6.0 * a3 + a5);
        factor += rho * s * s / (32.0 * 96.0) * inner;
    }
    Ok(eps * c * factor)
}

/// `φ = (r/(¾|ε|²) − 1)/|ε|²` for a converged branch.
pub fn extract_phi(branch: &Branch) -> Result<C64> {
    branch.require_converged()?;
    let s = branch.params.eps_sq();
    if s == 0.0 {
        return Err(VortexError::invalid("extract_phi needs eps != 0"));
    }
    Ok((branch.r / (0.75 * s) - 1.0) / s)
}

/// `Φ = w/|ε|²` for a converged branch.
pub fn extract_phi_field(branch: &Branch) -> Result<GridFunction> {
    branch.require_converged()?;
    let s = branch.params.eps_sq();
    if s == 0.0 {
        return Err(VortexError::invalid("extract_phi_field needs eps != 0"));
    }
    Ok(branch.w.scale(C64::new(1.0 / s, 0.0)))
}
