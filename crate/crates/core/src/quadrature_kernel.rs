//! Grids on `J = [−π/2, π/2]`, composite Simpson quadrature, the Green kernel,
//! and the integral representation of solutions of `−U'' − U = f` with
//! `U = v cos x`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use crate::error::{Result, VortexError};
use crate::C64;

/// Default number of grid nodes on J.
pub const DEFAULT_NODES: usize = 257;

/// Relative tolerance on `|∫_J f cos| / ‖f‖∞` for membership in `C₀(J)`.
pub const TOL_SOLV: f64 = 1e-10;

/// Below this `|cos x|` the endpoint limit formula replaces `tan x · ∫ f cos`.
pub(crate) const ENDPOINT_COS: f64 = 1e-8;

/// Uniform grid on J with an odd number of nodes, symmetric about 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
    h: f64,
}

impl Grid {
    pub fn new(n_nodes: usize) -> Result<Self> {
        if n_nodes < 5 || n_nodes.is_multiple_of(2) {
            return Err(VortexError::invalid(format!(
                "grid needs an odd node count >= 5, got {n_nodes}"
            )));
        }
        let mid = (n_nodes - 1) / 2;
        let h = PI / (n_nodes - 1) as f64;
        // (i − mid)·h keeps the grid exactly symmetric and puts node `mid` at 0.
        let mut nodes: Vec<f64> = (0..n_nodes).map(|i| (i as f64 - mid as f64) * h).collect();
        nodes[0] = -FRAC_PI_2;
        nodes[n_nodes - 1] = FRAC_PI_2;
        let mut cos: Vec<f64> = nodes.iter().map(|x| x.cos()).collect();
        cos[0] = 0.0;
        cos[n_nodes - 1] = 0.0;
        let sin = nodes.iter().map(|x| x.sin()).collect();
        Ok(Grid { nodes, cos, sin, h })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `cos x` at the nodes, with exact zeros at `±π/2`.
    pub fn cos(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin(&self) -> &[f64] {
        &self.sin
    }

    /// Index of the node at `x = 0`.
    pub fn mid(&self) -> usize {
        (self.n_nodes() - 1) / 2
    }

    /// Index of the node at `−x_i`.
    pub fn mirror(&self, i: usize) -> usize {
        self.n_nodes() - 1 - i
    }

    /// Composite Simpson weights.
    pub fn simpson_weights(&self) -> Vec<f64> {
        let n = self.n_nodes();
        let third = self.h / 3.0;
        (0..n)
            .map(|i| {
                if i == 0 || i == n - 1 {
                    third
                } else if i % 2 == 1 {
                    4.0 * third
                } else {
                    2.0 * third
                }
            })
            .collect()
    }
}

/// Builds the uniform grid on J with `n_nodes` nodes.
pub fn make_grid(n_nodes: usize) -> Result<Arc<Grid>> {
    Grid::new(n_nodes).map(Arc::new)
}

/// Complex samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<C64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(VortexError::invalid(format!(
                "expected {} samples, got {}",
                grid.n_nodes(),
                values.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(VortexError::invalid("grid function has non-finite samples"));
        }
        Ok(GridFunction { grid, values })
    }

    /// Skips validation; callers guarantee the length.
    pub(crate) fn from_raw(grid: Arc<Grid>, values: Vec<C64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_nodes());
        GridFunction { grid, values }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        GridFunction { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.n_nodes();
        GridFunction { grid, values: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|_, z| c * z)
    }

    /// Pointwise map with access to the node coordinate.
    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> Self {
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&x, &z)| f(x, z))
            .collect();
        GridFunction { grid: self.grid.clone(), values }
    }

    /// Multiplies by a real node-wise weight such as `cos x`.
    pub fn weighted(&self, weight: &[f64]) -> Self {
        let values = self.values.iter().zip(weight).map(|(z, w)| z * w).collect();
        GridFunction { grid: self.grid.clone(), values }
    }

    pub fn sub(&self, other: &GridFunction) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        GridFunction { grid: self.grid.clone(), values }
    }

    pub fn add_constant(&self, c: C64) -> Self {
        self.map(|_, z| z + c)
    }

    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn simpson(h: f64, values: &[C64]) -> C64 {
    let n = values.len();
    debug_assert!(n % 2 == 1 && n >= 3);
    let mut odd = C64::new(0.0, 0.0);
    let mut even = C64::new(0.0, 0.0);
    for (i, z) in values.iter().enumerate().take(n - 1).skip(1) {
        if i % 2 == 1 {
            odd += z;
        } else {
            even += z;
        }
    }
    (values[0] + values[n - 1] + 4.0 * odd + 2.0 * even) * (h / 3.0)
}

/// `∫_{x_0}^{x_i} f` at every node: Simpson pairs for even `i`; odd `i` adds
/// one panel by the four-point cubic rule, so every entry is fourth order.
pub(crate) fn cumulative_left(h: f64, values: &[C64]) -> Vec<C64> {
    let n = values.len();
    let f = values;
    let mut out = vec![C64::new(0.0, 0.0); n];
    for i in 1..n {
        out[i] = if i % 2 == 0 {
            out[i - 2] + (f[i - 2] + 4.0 * f[i - 1] + f[i]) * (h / 3.0)
        } else if i == 1 {
            (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]) * (h / 24.0)
        } else {
            out[i - 1] + (13.0 * (f[i - 1] + f[i]) - f[i - 2] - f[i + 1]) * (h / 24.0)
        };
    }
    out
}

/// `∫_{x_i}^{x_last} f`, the mirror image of [`cumulative_left`].
pub(crate) fn cumulative_right(h: f64, values: &[C64]) -> Vec<C64> {
    let reversed: Vec<C64> = values.iter().rev().copied().collect();
    let mut out = cumulative_left(h, &reversed);
    out.reverse();
    out
}

/// Composite Simpson approximation of `∫_J f(y) dy`.
pub fn integrate(f: &GridFunction) -> C64 {
    simpson(f.grid.h(), &f.values)
}

/// Green kernel of `−U'' − U` on J with zeros at `±π/2`.
pub fn green_kernel(x: f64, y: f64) -> Result<f64> {
    let inside = |t: f64| t.is_finite() && t.abs() <= FRAC_PI_2 * (1.0 + 1e-14);
    if !inside(x) || !inside(y) {
        return Err(VortexError::invalid(format!("kernel arguments ({x}, {y}) outside J")));
    }
    Ok(if y <= x { x.cos() * y.sin() } else { x.sin() * y.cos() })
}

/// `∫_J f(y) cos y dy`; zero exactly when `f ∈ C₀(J)`.
pub fn solvability_residual(f: &GridFunction) -> C64 {
    integrate(&f.weighted(f.grid.cos()))
}

pub(crate) fn check_solvable(f: &GridFunction) -> Result<()> {
    let residual = solvability_residual(f).norm();
    let tolerance = TOL_SOLV * f.sup_norm();
    if residual <= tolerance || residual == 0.0 {
        Ok(())
    } else {
        Err(VortexError::RejectedInput { residual, tolerance })
    }
}

/// Removes the `cos x` component so that the solvability residual vanishes.
pub fn project_to_c0(f: &GridFunction) -> GridFunction {
    let grid = f.grid.clone();
    let cos2: Vec<C64> = grid.cos().iter().map(|c| C64::new(c * c, 0.0)).collect();
    let c = solvability_residual(f) / simpson(grid.h(), &cos2);
    let values = f.values.iter().zip(grid.cos()).map(|(z, cx)| z - c * cx).collect();
    GridFunction::from_raw(grid, values)
}

/// `∫_J f(y) sin y dy`, the increment `v(π/2) − v(−π/2)`.
pub fn jump_increment(f: &GridFunction) -> C64 {
    integrate(&f.weighted(f.grid.sin()))
}

/// Solves `−U'' − U = f` with `U = v cos x`, `v(−π/2) = v_left`, through
///
/// ```text
/// v(x) = v_left + ∫_{−π/2}^x f sin y dy + tan x ∫_x^{π/2} f cos y dy.
/// ```
///
/// For `x ≤ 0` the last term uses `−tan x ∫_{−π/2}^x f cos`, which is equal
/// under the solvability condition and avoids cancellation near `−π/2`.
pub fn solve_linear_inhomogeneous(f: &GridFunction, v_left: C64) -> Result<GridFunction> {
    check_solvable(f)?;
    Ok(linear_solution(f, v_left))
}

pub(crate) fn linear_solution(f: &GridFunction, v_left: C64) -> GridFunction {
    let grid = f.grid.clone();
    let h = grid.h();
    let n = grid.n_nodes();
    let f_sin: Vec<C64> = f.values.iter().zip(grid.sin()).map(|(z, s)| z * s).collect();
    let f_cos: Vec<C64> = f.values.iter().zip(grid.cos()).map(|(z, c)| z * c).collect();
    let sin_left = cumulative_left(h, &f_sin);
    let sin_right = cumulative_right(h, &f_sin);
    let cos_left = cumulative_left(h, &f_cos);
    let cos_right = cumulative_right(h, &f_cos);
    let jump = simpson(h, &f_sin);
    let mid = grid.mid();

    let values = (0..n)
        .map(|i| {
            let x = grid.nodes()[i];
            let c = grid.cos()[i];
            if c.abs() < ENDPOINT_COS {
                if x < 0.0 {
                    v_left
                } else {
                    v_left + jump
                }
            } else if i <= mid {
                v_left + sin_left[i] - x.tan() * cos_left[i]
            } else {
                v_left + jump - sin_right[i] + x.tan() * cos_right[i]
            }
        })
        .collect();
    GridFunction::from_raw(grid, values)
}
