use std::f64::consts::FRAC_PI_2;

use cgl_vortex::direct_solvers::{compare_branches, fd_solve, shoot_follow, FdState, ShootingState};
use cgl_vortex::output::{parse_csv, to_csv};
use cgl_vortex::sweep::{detect_asymmetric, run_sweep, SweepMode, SweepSpec};
use cgl_vortex::{Method, C64};

#[test]
fn shooting_along_positive_axis_up_to_nine() {
    let mode = SweepMode::Modulus { arg: 0.0, mod_min: 1.0, mod_max: 9.0, steps: 9 };
    let records = run_sweep(&SweepSpec::new(mode, Method::Shooting)).unwrap();
    assert_eq!(records.len(), 9);
    for rec in &records {
        assert!(rec.converged, "rho = {}", rec.rho);
        assert_eq!((rec.zero_count, rec.extra_zeros), (2, 0));
        assert!(rec.min_abs_v > 0.0);
        assert!(rec.symmetry_defect < 1e-8);
    }
}

#[test]
fn arc_sweep_is_bit_stable() {
    let spec = SweepSpec { n_nodes: 65, ..SweepSpec::new(SweepMode::default_arg(3.0), Method::FiniteDifference) };
    let first = to_csv(&run_sweep(&spec).unwrap());
    let second = to_csv(&run_sweep(&spec).unwrap());
    assert_eq!(first, second);
    assert_eq!(parse_csv(&first).unwrap().len(), 64);
}

#[test]
fn continuation_keeps_the_branch() {
    let mode = SweepMode::Modulus { arg: FRAC_PI_2, mod_min: 1.0, mod_max: 6.0, steps: 6 };
    let cold = run_sweep(&SweepSpec { n_nodes: 129, ..SweepSpec::new(mode, Method::FiniteDifference) }).unwrap();
    let warm = run_sweep(&SweepSpec {
        n_nodes: 129,
        warm_start: true,
        ..SweepSpec::new(mode, Method::FiniteDifference)
    })
    .unwrap();
    for (a, b) in cold.iter().zip(&warm) {
        assert!(a.converged && b.converged);
        assert!((a.r - b.r).norm() < 1e-9, "rho = {}", a.rho);
    }
}

#[test]
fn large_modulus_solvers_agree() {
    let rho = C64::from_polar(9.0, 0.5);
    let eps = C64::new(1.0, 0.0);
    let sh = shoot_follow(rho, eps, &ShootingState::seeded(rho, eps)).unwrap();
    let fd_coarse = fd_solve(rho, eps, &FdState::new(257).unwrap()).unwrap();
    let fd_fine = fd_solve(rho, eps, &FdState::new(513).unwrap()).unwrap();
    let coarse = compare_branches(&sh, &fd_coarse).unwrap();
    let fine = compare_branches(&sh, &fd_fine).unwrap();
    assert!(fine < coarse / 3.5, "{coarse:e} -> {fine:e}");
}

#[test]
fn probe_near_axis_reports_a_record() {
    let probe = detect_asymmetric(C64::new(0.5, 7.0), C64::new(1.0, 0.0), 129).unwrap();
    assert_eq!(probe.record.method, Method::FiniteDifference);
    if probe.asymmetric {
        assert!(probe.record.converged);
    }
}
