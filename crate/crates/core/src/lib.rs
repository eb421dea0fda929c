//! Bifurcating vortex solutions of the complex Ginzburg–Landau equation
//!
//! ```text
//! u_t = (1 + iν) u_xx + (R − (1 + iμ)|u|²) u
//! ```
//!
//! Solutions of the form `u(x, t) = U(nx) e^{−iωt}` reduce to the boundary-value
//! problem `−U'' − U = ρ(r − |U|²)U` on `J = [−π/2, π/2]` with `U(±π/2) = 0`.
//! Writing `U = v cos x` and normalising `Pv = ε`, the branch bifurcating from
//! the trivial solution is the fixed point of `w = |ε|² L(F(w))`, where `L` is the
//! Green-kernel integral operator and `F` the cubic nonlinearity.
//!
//! Modules:
//!
//! - [`quadrature_kernel`]: grids, composite Simpson quadrature, the Green kernel
//!   and the integral representation of `v`.
//! - [`reduction`]: the projection `P`, operators `L` and `F`, the contraction
//!   iteration, and the small-amplitude expansions.
//! - [`direct_solvers`]: shooting and finite-difference solvers used as
//!   independent cross-checks.
//! - [`physics`]: maps between `(R, μ, ν, n, ω)` and `(ρ, r)`, periodic extension
//!   and the PDE residual.
//! - [`sweep`] and [`output`]: parameter sweeps over `ρ` and CSV/JSON emission.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod direct_solvers;
pub mod error;
pub mod output;
pub mod physics;
pub mod quadrature_kernel;
pub mod reduction;
pub mod stencil;
pub mod sweep;

pub use num_complex::Complex64 as C64;

pub use error::{Result, VortexError};
pub use quadrature_kernel::{Grid, GridFunction};
pub use reduction::{Branch, CoreParams, Method};
