use std::path::PathBuf;
use std::process::ExitCode;

use cgl_vortex::{Method, VortexError, C64};
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Vortex branches of the complex Ginzburg-Landau equation bifurcating from U = 0.
#[derive(Parser, Debug)]
#[command(name = "cgl-vortex", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for one branch and print a JSON summary
    Solve(SolveArgs),
    /// Sweep rho over a rectangle, an arc or a ray and write one record per point
    Sweep(SweepArgs),
    /// Small-amplitude expansions of r, R, omega and U
    Expand(ExpandArgs),
    /// Cross-check all three solvers and run the invariant suite
    Verify(VerifyArgs),
    /// Map (mu, nu, n, eps) to rho, r, R and omega
    Physical(PhysicalArgs),
}

#[derive(Args, Debug, Clone, Copy)]
struct RhoArgs {
    #[arg(long, allow_negative_numbers = true)]
    rho_re: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    rho_im: f64,
}

impl RhoArgs {
    fn value(&self) -> C64 {
        C64::new(self.rho_re, self.rho_im)
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct EpsArgs {
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    eps_re: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    eps_im: f64,
}

impl EpsArgs {
    fn value(&self) -> C64 {
        C64::new(self.eps_re, self.eps_im)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum MethodArg {
    Fp,
    Shoot,
    Fd,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Fp => Method::FixedPoint,
            MethodArg::Shoot => Method::Shooting,
            MethodArg::Fd => Method::FiniteDifference,
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    rho: RhoArgs,
    #[command(flatten)]
    eps: EpsArgs,
    #[arg(long, value_enum, default_value = "fp")]
    method: MethodArg,
    /// Grid nodes on J (odd, at least 5)
    #[arg(long, default_value_t = 257)]
    nodes: usize,
    /// Convergence tolerance; the meaning depends on the method
    #[arg(long)]
    tol: Option<f64>,
    /// Include the grid and the U samples in the summary
    #[arg(long)]
    dump: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModeArg {
    Rect,
    Arg,
    Mod,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "fp")]
    method: MethodArg,
    #[command(flatten)]
    eps: EpsArgs,
    #[arg(long, default_value_t = 257)]
    nodes: usize,
    /// Mode number for the periodic extension and the zero count
    #[arg(long, default_value_t = 1)]
    n: u32,
    #[arg(long, allow_negative_numbers = true, default_value_t = -3.5)]
    re_min: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 3.5)]
    re_max: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    im_min: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.5)]
    im_max: f64,
    #[arg(long, default_value_t = 15)]
    re_steps: usize,
    #[arg(long, default_value_t = 7)]
    im_steps: usize,
    /// |rho| for arg sweeps
    #[arg(long, default_value_t = 1.0)]
    modulus: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    arg_min: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = std::f64::consts::PI)]
    arg_max: f64,
    /// arg rho for modulus sweeps
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    arg: f64,
    #[arg(long, default_value_t = 1.0)]
    mod_min: f64,
    #[arg(long, default_value_t = 9.0)]
    mod_max: f64,
    /// Points along an arg or modulus sweep (default 64 and 32)
    #[arg(long)]
    steps: Option<usize>,
    /// Relative threshold on |v| for counting extra zeros
    #[arg(long, default_value_t = cgl_vortex::sweep::DEFAULT_TOL_ZERO)]
    tol_zero: f64,
    /// Warm-start each point from the previous one
    #[arg(long = "continue")]
    warm_start: bool,
    /// Append the mirrored records for conj(rho)
    #[arg(long)]
    conjugate: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args, Debug)]
struct ExpandArgs {
    #[command(flatten)]
    rho: RhoArgs,
    #[command(flatten)]
    eps: EpsArgs,
    #[arg(long, default_value_t = 1)]
    order: u32,
    /// Mode number used to read off R and omega
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// Equally spaced U samples on J
    #[arg(long, default_value_t = 9)]
    points: usize,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    rho: RhoArgs,
    #[command(flatten)]
    eps: EpsArgs,
    #[arg(long, default_value_t = 257)]
    nodes: usize,
    #[arg(long, default_value_t = 1)]
    n: u32,
}

#[derive(Args, Debug)]
struct PhysicalArgs {
    #[arg(long, allow_negative_numbers = true)]
    mu: f64,
    #[arg(long, allow_negative_numbers = true)]
    nu: f64,
    #[arg(long)]
    n: u32,
    #[command(flatten)]
    eps: EpsArgs,
    #[arg(long, default_value_t = 257)]
    nodes: usize,
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Ok = 0,
    Invalid = 1,
    NotConverged = 2,
    Io = 3,
}

fn status_of(err: &VortexError) -> Status {
    match err {
        VortexError::Io { .. } | VortexError::Serialization(_) => Status::Io,
        VortexError::Diverged { .. } | VortexError::DegenerateSystem(_) => Status::NotConverged,
        _ => Status::Invalid,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::Invalid as u8 } else { Status::Ok as u8 });
        }
    };
    let result = match cli.command {
        Command::Solve(a) => commands::solve(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Expand(a) => commands::expand(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Physical(a) => commands::physical(&a),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(status_of(&e) as u8)
        }
    }
}
