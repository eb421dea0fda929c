//! Parameter sweeps over `ρ` and the per-point diagnostics: zero counts,
//! symmetry defect and the asymmetric-branch probe.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::direct_solvers::{fd_solve, fd_solve_from, rhs_f, shoot_follow, shoot_solve, FdState, ShootingState};
use crate::error::{Result, VortexError};
use crate::physics::{extend_solution, VortexSolution};
use crate::quadrature_kernel::{jump_increment, Grid, GridFunction, DEFAULT_NODES};
use crate::reduction::{fixed_point_solve_traced, Branch, CoreParams, Method};
use crate::C64;

pub const DEFAULT_TOL_ZERO: f64 = 1e-6;
/// Relative symmetry defect above which a converged branch counts as asymmetric.
pub const ASYMMETRY_FLAG: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SweepMode {
    Rectangle { re_min: f64, re_max: f64, im_min: f64, im_max: f64, re_steps: usize, im_steps: usize },
    Arg { modulus: f64, arg_min: f64, arg_max: f64, steps: usize },
    Modulus { arg: f64, mod_min: f64, mod_max: f64, steps: usize },
}

impl SweepMode {
    /// `[−3.5, 3.5] × [0, 1.5]` on a 15×7 grid.
    pub fn default_rectangle() -> Self {
        SweepMode::Rectangle { re_min: -3.5, re_max: 3.5, im_min: 0.0, im_max: 1.5, re_steps: 15, im_steps: 7 }
    }

    /// `arg ρ ∈ [0, π]` at fixed modulus, 64 steps.
    pub fn default_arg(modulus: f64) -> Self {
        SweepMode::Arg { modulus, arg_min: 0.0, arg_max: PI, steps: 64 }
    }

    /// `|ρ| ∈ [mod_min, mod_max]` along a ray, 32 steps.
    pub fn default_modulus(arg: f64, mod_min: f64, mod_max: f64) -> Self {
        SweepMode::Modulus { arg, mod_min, mod_max, steps: 32 }
    }

    fn validate(&self) -> Result<()> {
        let ordered = |lo: f64, hi: f64, what: &str| {
            if lo.is_finite() && hi.is_finite() && lo < hi {
                Ok(())
            } else {
                Err(VortexError::invalid(format!("{what} bounds must be finite and ordered, got [{lo}, {hi}]")))
            }
        };
        let steps = |k: usize| {
            if k >= 2 {
                Ok(())
            } else {
                Err(VortexError::invalid(format!("step counts must be >= 2, got {k}")))
            }
        };
        match *self {
            SweepMode::Rectangle { re_min, re_max, im_min, im_max, re_steps, im_steps } => {
                ordered(re_min, re_max, "Re rho")?;
                ordered(im_min, im_max, "Im rho")?;
                steps(re_steps)?;
                steps(im_steps)
            }
            SweepMode::Arg { modulus, arg_min, arg_max, steps: k } => {
                if !(modulus > 0.0 && modulus.is_finite()) {
                    return Err(VortexError::invalid(format!("modulus must be positive, got {modulus}")));
                }
                ordered(arg_min, arg_max, "arg")?;
                steps(k)
            }
            SweepMode::Modulus { arg, mod_min, mod_max, steps: k } => {
                if !arg.is_finite() {
                    return Err(VortexError::invalid("arg must be finite"));
                }
                ordered(mod_min, mod_max, "modulus")?;
                if mod_min < 0.0 {
                    return Err(VortexError::invalid("modulus bounds must be nonnegative"));
                }
                steps(k)
            }
        }
    }

    /// Grid points in output order. Rectangles run over `Re ρ` fastest.
    pub fn points(&self) -> Vec<C64> {
        let lin = |lo: f64, hi: f64, k: usize, i: usize| lo + (hi - lo) * i as f64 / (k - 1) as f64;
        match *self {
            SweepMode::Rectangle { re_min, re_max, im_min, im_max, re_steps, im_steps } => (0..im_steps)
                .flat_map(|j| {
                    (0..re_steps).map(move |i| {
                        C64::new(lin(re_min, re_max, re_steps, i), lin(im_min, im_max, im_steps, j))
                    })
                })
                .collect(),
            SweepMode::Arg { modulus, arg_min, arg_max, steps } => {
                (0..steps).map(|i| C64::from_polar(modulus, lin(arg_min, arg_max, steps, i))).collect()
            }
            SweepMode::Modulus { arg, mod_min, mod_max, steps } => {
                (0..steps).map(|i| C64::from_polar(lin(mod_min, mod_max, steps, i), arg)).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub mode: SweepMode,
    pub eps: C64,
    pub method: Method,
    pub n_nodes: usize,
    /// Mode number used for the periodic extension and zero count.
    pub n: u32,
    /// Warm-start each point from its predecessor instead of a cold start.
    pub warm_start: bool,
    pub tol_zero: f64,
}

impl SweepSpec {
    pub fn new(mode: SweepMode, method: Method) -> Self {
        SweepSpec {
            mode,
            eps: C64::new(1.0, 0.0),
            method,
            n_nodes: DEFAULT_NODES,
            n: 1,
            warm_start: false,
            tol_zero: DEFAULT_TOL_ZERO,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mode.validate()?;
        Grid::new(self.n_nodes)?;
        if self.eps.norm() == 0.0 || !self.eps.re.is_finite() || !self.eps.im.is_finite() {
            return Err(VortexError::invalid("sweep eps must be finite and nonzero"));
        }
        if self.n == 0 {
            return Err(VortexError::invalid("mode number n must be >= 1"));
        }
        if !(self.tol_zero > 0.0) {
            return Err(VortexError::invalid("tol_zero must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub rho: C64,
    pub method: Method,
    pub converged: bool,
    pub r: C64,
    pub iterations: usize,
    pub zero_count: usize,
    pub extra_zeros: usize,
    pub symmetry_defect: f64,
    pub min_abs_v: f64,
    pub ode_residual: f64,
}

impl SweepRecord {
    /// Record for a point whose solver returned an error.
    fn failed(rho: C64, method: Method) -> Self {
        let nan = f64::NAN;
        SweepRecord {
            rho,
            method,
            converged: false,
            r: C64::new(nan, nan),
            iterations: 0,
            zero_count: 0,
            extra_zeros: 0,
            symmetry_defect: nan,
            min_abs_v: nan,
            ode_residual: nan,
        }
    }

    pub fn from_branch(branch: &Branch, n: u32, tol_zero: f64) -> Self {
        let defect = symmetry_defect(&branch.u);
        let min_abs_v = branch.v.values().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        let (zero_count, extra_zeros) = if branch.converged {
            match extend_solution(branch, n, 0.0) {
                Ok(sol) => count_zeros(&sol, tol_zero),
                Err(_) => {
                    // No periodic extension: count the minima of |v| on J itself.
                    let extra = 2 * n as usize * v_minima(branch.v.values(), false, tol_zero);
                    (2 * n as usize + extra, extra)
                }
            }
        } else {
            (0, 0)
        };
        SweepRecord {
            rho: branch.params.rho,
            method: branch.method,
            converged: branch.converged,
            r: branch.r,
            iterations: branch.iterations,
            zero_count,
            extra_zeros,
            symmetry_defect: defect,
            min_abs_v,
            ode_residual: branch.ode_residual,
        }
    }
}

/// Local minima of `|v|` that come within `tol·sup|v|` of zero. Each discrete
/// minimum is refined by the distance from the origin to the adjacent
/// linear-interpolant segments.
fn v_minima(v: &[C64], periodic: bool, tol: f64) -> usize {
    let n = v.len();
    let sup = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if n < 3 || sup == 0.0 {
        return 0;
    }
    let seg = |a: C64, b: C64| {
        let d = b - a;
        let len2 = d.norm_sqr();
        let t = if len2 > 0.0 { (-(a.conj() * d).re / len2).clamp(0.0, 1.0) } else { 0.0 };
        (a + t * d).norm()
    };
    let range: Box<dyn Iterator<Item = usize>> = if periodic { Box::new(0..n) } else { Box::new(1..n - 1) };
    range
        .filter(|&i| {
            let prev = v[(i + n - 1) % n];
            let next = v[(i + 1) % n];
            let here = v[i].norm();
            here <= prev.norm() && here < next.norm() && seg(prev, v[i]).min(seg(v[i], next)) <= tol * sup
        })
        .count()
}

/// `(zero_count, extra_zeros)` per 2π period: the `2n` zeros of `cos(nx)`
/// plus the near-zero local minima of `|v|`.
pub fn count_zeros(sol: &VortexSolution, tol_zero: f64) -> (usize, usize) {
    let extra = v_minima(&sol.v, true, tol_zero);
    (2 * sol.n as usize + extra, extra)
}

/// `sup |U(x) − U(−x)|` over the grid.
pub fn symmetry_defect(u: &GridFunction) -> f64 {
    let grid = u.grid();
    let vals = u.values();
    (0..grid.n_nodes()).map(|i| (vals[i] - vals[grid.mirror(i)]).norm()).fold(0.0, f64::max)
}

/// Warm-start data carried between neighbouring sweep points.
enum Warm {
    None,
    Fixed(GridFunction),
    Shoot(ShootingState),
    Fd(GridFunction),
}

fn solve_point(rho: C64, spec: &SweepSpec, warm: &Warm) -> Result<Branch> {
    let eps = spec.eps;
    match spec.method {
        Method::FixedPoint => {
            let params = CoreParams::new(rho, eps).with_nodes(spec.n_nodes);
            let initial = match warm {
                Warm::Fixed(w) => Some(w),
                _ => None,
            };
            fixed_point_solve_traced(&params, initial).map(|(b, _)| b)
        }
        Method::Shooting => {
            let template = ShootingState::seeded(rho, eps).with_nodes(spec.n_nodes);
            match warm {
                Warm::Shoot(prev) => shoot_solve(rho, eps, prev),
                _ => shoot_follow(rho, eps, &template),
            }
        }
        Method::FiniteDifference => {
            let state = FdState::new(spec.n_nodes)?;
            match warm {
                Warm::Fd(u) => fd_solve_from(rho, eps, &state, u),
                _ => fd_solve(rho, eps, &state),
            }
        }
    }
}

fn warm_from(branch: &Branch) -> Warm {
    if !branch.converged {
        return Warm::None;
    }
    match branch.method {
        Method::FixedPoint => Warm::Fixed(branch.w.clone()),
        Method::FiniteDifference => Warm::Fd(branch.u.clone()),
        Method::Shooting => {
            // U'(−π/2) = v(−π/2); r carries over directly.
            Warm::Shoot(ShootingState {
                a: branch.v.values()[0],
                r: branch.r,
                ..ShootingState::seeded(branch.params.rho, branch.params.eps).with_nodes(branch.grid().n_nodes())
            })
        }
    }
}

fn record_for(rho: C64, spec: &SweepSpec, result: &Result<Branch>) -> SweepRecord {
    match result {
        Ok(b) => SweepRecord::from_branch(b, spec.n, spec.tol_zero),
        Err(_) => SweepRecord::failed(rho, spec.method),
    }
}

/// One record per grid point, in grid order. Cold-start points are solved in
/// parallel; warm-start sweeps are sequential along the point order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let points = spec.mode.points();
    if !spec.warm_start {
        return Ok(points
            .par_iter()
            .map(|&rho| record_for(rho, spec, &solve_point(rho, spec, &Warm::None)))
            .collect());
    }
    let mut warm = Warm::None;
    let mut out = Vec::with_capacity(points.len());
    for &rho in &points {
        let mut result = solve_point(rho, spec, &warm);
        if !matches!(warm, Warm::None) && !matches!(&result, Ok(b) if b.converged) {
            result = solve_point(rho, spec, &Warm::None);
        }
        if let Ok(b) = &result {
            warm = warm_from(b);
        }
        out.push(record_for(rho, spec, &result));
    }
    Ok(out)
}

/// Outcome of [`detect_asymmetric`].
#[derive(Debug, Clone, PartialEq)]
pub struct AsymmetryProbe {
    pub record: SweepRecord,
    /// Converged with `symmetry_defect > 10⁻³ sup|U|`.
    pub asymmetric: bool,
    /// `∫_J f sin y dy` of the converged branch; nonzero for asymmetric ones.
    pub jump: C64,
}

/// Finite differences from `ε cos x + η sin 2x`, `η = 0.1|ε|`.
pub fn detect_asymmetric(rho: C64, eps: C64, n_nodes: usize) -> Result<AsymmetryProbe> {
    let state = FdState::new(n_nodes)?;
    let eta = 0.1 * eps.norm();
    let start = GridFunction::from_fn(state.grid.clone(), |x| eps * x.cos() + eta * (2.0 * x).sin());
    let result = fd_solve_from(rho, eps, &state, &start);
    Ok(match result {
        Ok(b) => {
            let record = SweepRecord::from_branch(&b, 1, DEFAULT_TOL_ZERO);
            let scale = b.u.sup_norm();
            let asymmetric = b.converged && record.symmetry_defect > ASYMMETRY_FLAG * scale;
            let jump = jump_increment(&rhs_f(&b.v, rho, b.r));
            AsymmetryProbe { record, asymmetric, jump }
        }
        Err(_) => AsymmetryProbe {
            record: SweepRecord::failed(rho, Method::FiniteDifference),
            asymmetric: false,
            jump: C64::new(f64::NAN, f64::NAN),
        },
    })
}

/// Mirror records into the lower half plane: `ρ → ρ̄` maps solutions to
/// their conjugates, so `r → r̄` and every modulus-based field is unchanged.
pub fn conjugate_records(records: &[SweepRecord]) -> Vec<SweepRecord> {
    records
        .iter()
        .map(|rec| SweepRecord { rho: rec.rho.conj(), r: rec.r.conj(), ..rec.clone() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::extend_solution;
    use crate::quadrature_kernel::make_grid;
    use crate::reduction::fixed_point_solve;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cosine_branch() -> Branch {
        fixed_point_solve(&CoreParams::new(c(0.0, 0.0), c(1.0, 0.0))).unwrap()
    }

    #[test]
    fn zeros_of_cosine() {
        let b = cosine_branch();
        assert_eq!(count_zeros(&extend_solution(&b, 1, 0.0).unwrap(), DEFAULT_TOL_ZERO), (2, 0));
        assert_eq!(count_zeros(&extend_solution(&b, 3, 0.0).unwrap(), DEFAULT_TOL_ZERO), (6, 0));
    }

    #[test]
    fn vanishing_v_is_an_extra_zero() {
        let g = make_grid(65).unwrap();
        let v: Vec<C64> = g.nodes().iter().map(|x| c(x.sin(), 0.0)).collect();
        assert!(v_minima(&v, false, DEFAULT_TOL_ZERO) >= 1);
        // Minimum between nodes: v = x − h/3 changes sign off the grid.
        let shift = g.h() / 3.0;
        let v2: Vec<C64> = g.nodes().iter().map(|x| c(x - shift, 0.0)).collect();
        assert_eq!(v_minima(&v2, false, DEFAULT_TOL_ZERO), 1);
        let flat = vec![c(0.3, 0.4); 9];
        assert_eq!(v_minima(&flat, true, DEFAULT_TOL_ZERO), 0);
    }

    #[test]
    fn symmetry_defect_examples() {
        let g = make_grid(257).unwrap();
        assert_eq!(symmetry_defect(&GridFunction::from_fn(g.clone(), |x| c(x.cos(), 0.0))), 0.0);
        let u = GridFunction::from_fn(g.clone(), |x| c(x.cos() + 0.01 * (2.0 * x).sin() * x.cos(), 0.0));
        let odd_max = g.nodes().iter().map(|x| ((2.0 * x).sin() * x.cos()).abs()).fold(0.0, f64::max);
        assert!((symmetry_defect(&u) - 0.02 * odd_max).abs() < 1e-15);
        assert!((symmetry_defect(&u) - 0.0154).abs() < 1e-4);
    }

    #[test]
    fn spec_validation() {
        let mut spec = SweepSpec::new(SweepMode::default_rectangle(), Method::FixedPoint);
        assert!(spec.validate().is_ok());
        spec.mode = SweepMode::Arg { modulus: 1.0, arg_min: 1.0, arg_max: 1.0, steps: 8 };
        assert!(run_sweep(&spec).is_err());
        spec.mode = SweepMode::Modulus { arg: 0.0, mod_min: 0.0, mod_max: 1.0, steps: 1 };
        assert!(spec.validate().is_err());
        spec.mode = SweepMode::default_modulus(0.0, 1.0, 9.0);
        spec.n_nodes = 10;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn points_in_grid_order() {
        let pts = SweepMode::Rectangle { re_min: 0.0, re_max: 1.0, im_min: 0.0, im_max: 2.0, re_steps: 2, im_steps: 3 }
            .points();
        assert_eq!(pts, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0), c(0.0, 2.0), c(1.0, 2.0)]);
        assert_eq!(SweepMode::default_arg(2.0).points().len(), 64);
    }

    #[test]
    fn small_rectangle_is_deterministic() {
        let mode = SweepMode::Rectangle { re_min: -1.0, re_max: 1.0, im_min: 0.0, im_max: 0.5, re_steps: 3, im_steps: 2 };
        let spec = SweepSpec { n_nodes: 65, ..SweepSpec::new(mode, Method::FixedPoint) };
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep(&spec).unwrap();
        assert_eq!(a.len(), 6);
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.converged && r.extra_zeros == 0 && r.zero_count == 2));
    }

    #[test]
    fn warm_start_matches_cold() {
        let mode = SweepMode::Modulus { arg: 0.3, mod_min: 1.0, mod_max: 4.0, steps: 4 };
        let cold = SweepSpec { n_nodes: 65, ..SweepSpec::new(mode, Method::FiniteDifference) };
        let warm = SweepSpec { warm_start: true, ..cold.clone() };
        for (a, b) in run_sweep(&cold).unwrap().iter().zip(&run_sweep(&warm).unwrap()) {
            assert!(a.converged && b.converged);
            assert!((a.r - b.r).norm() < 1e-9);
        }
    }

    #[test]
    fn asymmetric_probe_on_symmetric_problems() {
        let p = detect_asymmetric(c(0.0, 0.0), c(1.0, 0.0), 129).unwrap();
        assert!(!p.asymmetric && p.record.symmetry_defect <= 1e-8);
        let p = detect_asymmetric(c(1.0, 0.0), c(1.0, 0.0), 129).unwrap();
        assert!(p.record.converged && !p.asymmetric);
        assert!(p.record.symmetry_defect <= 1e-8, "{}", p.record.symmetry_defect);
    }

    #[test]
    fn conjugation() {
        let rec = SweepRecord::from_branch(&cosine_branch(), 1, DEFAULT_TOL_ZERO);
        let rec = SweepRecord { rho: c(1.0, 0.5), r: c(0.7, 0.1), ..rec };
        let conj = conjugate_records(std::slice::from_ref(&rec));
        assert_eq!(conj[0].rho, c(1.0, -0.5));
        assert_eq!(conj[0].r, c(0.7, -0.1));
        assert_eq!(conj[0].zero_count, rec.zero_count);
    }
}
