//! Command-line harness for Szegő cocycle experiments.
//!
//! Exit codes: 0 success or PASS, 1 verification FAIL, 2 configuration
//! error, 3 numerical failure.

pub mod commands;
pub mod error;
pub mod settings;
pub mod svg;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use szego_core::{exponent_lower_bound, KernelFault};

use crate::commands::{MethodChoice, ScanConfig, DEFAULT_LADDER};
use crate::error::CliError;
use crate::settings::Settings;

#[derive(Debug, Parser)]
#[command(name = "szego", version, about = "Lyapunov exponents of almost periodic Szegő cocycles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print log((1 − ε²)^{1/2}/ε) and whether it is positive (ε < 1/√2).
    ///
    /// Default --eps 0.1,0.2,...,0.9.
    Bound(Flags),
    /// Estimate γ(z) on a uniform z grid and write one CSV row per estimate.
    ///
    /// Defaults: --eps 0.5 --k 1 --z-grid 16 --n 100000 --method birkhoff
    /// --seed 0 --grid 64. The perturbed family is used when --lambda or
    /// --coeffs is given (k ≥ 1, coefficients a_l for l = −k..k−1, default all 1).
    /// CSV goes to --out, or stdout.
    Scan(Flags),
    /// Check the finite-n phase-average inequality on every (ε, z).
    ///
    /// Defaults: --eps 0.1,0.2,...,0.9 --k 1 --z-grid 32 --n 6 --grid 2048
    /// --tol 1e-3. PASS iff every (1/n)·mean log‖A_n‖ ≥ bound − tol.
    #[command(name = "verify-t1")]
    VerifyT1(Flags),
    /// Sweep the perturbation strength and report the minimum over z of γ̂.
    ///
    /// Defaults: --eps 0.5 --k 2 --z-grid 16 --n 100000 --threshold 0.05,
    /// unit coefficients, --ladder 0,0.01,0.03,0.1,0.3,0.9 (fractions of
    /// lambda_max along the real axis). --lambda replaces the ladder with
    /// [0, λ]. The reported λ surrogate is empirical, not a proven threshold.
    /// Exits 1 when no rung with λ ≠ 0 stays above the threshold.
    #[command(name = "verify-t2")]
    VerifyT2(Flags),
    /// Mean-value inequality for the analytic conjugated product.
    ///
    /// Defaults: --eps 0.3,0.5,0.7 --k 1 --z-grid 4 --n 8 --grid 2048
    /// --tol 1e-3, both parities j0. PASS iff every slack ≥ −tol.
    Subharmonic(Flags),
}

/// Flags shared by all subcommands. Values stay as text until a command
/// resolves them against its own defaults and the optional config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Comma-separated ε values in (0, 1).
    #[arg(long)]
    pub eps: Option<String>,
    /// Nonzero frequency k.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    /// Rotation number in (0, 1), or `golden`.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Number of points z = e^{2πi m/size} on the unit circle.
    #[arg(long = "z-grid")]
    pub z_grid: Option<String>,
    /// Orbit length.
    #[arg(long)]
    pub n: Option<String>,
    /// birkhoff, phase or both.
    #[arg(long)]
    pub method: Option<String>,
    /// Perturbation strength as `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Perturbation coefficients a_l, l = −k..k−1, as `re,im;re,im;...`.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<String>,
    /// Seed for Birkhoff starting points.
    #[arg(long)]
    pub seed: Option<String>,
    /// CSV output path.
    #[arg(long)]
    pub out: Option<String>,
    /// SVG chart output path.
    #[arg(long)]
    pub svg: Option<String>,
    /// θ quadrature size (grid points or panels).
    #[arg(long)]
    pub grid: Option<String>,
    /// Tolerance of the pass criterion.
    #[arg(long)]
    pub tol: Option<String>,
    /// Positivity threshold for verify-t2.
    #[arg(long)]
    pub threshold: Option<String>,
    /// Ladder of |λ|/lambda_max fractions for verify-t2.
    #[arg(long)]
    pub ladder: Option<String>,
    /// Plain-text key=value file; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "inject-fault", hide = true)]
    pub inject_fault: Option<String>,
}

impl Flags {
    fn settings(&self) -> Result<Settings, CliError> {
        Settings::resolve(
            self.config.as_deref(),
            [
                ("eps", self.eps.clone()),
                ("k", self.k.clone()),
                ("alpha", self.alpha.clone()),
                ("z-grid", self.z_grid.clone()),
                ("n", self.n.clone()),
                ("method", self.method.clone()),
                ("lambda", self.lambda.clone()),
                ("coeffs", self.coeffs.clone()),
                ("seed", self.seed.clone()),
                ("out", self.out.clone()),
                ("svg", self.svg.clone()),
                ("grid", self.grid.clone()),
                ("tol", self.tol.clone()),
                ("threshold", self.threshold.clone()),
                ("ladder", self.ladder.clone()),
            ],
        )
    }

    fn fault(&self) -> Result<KernelFault, CliError> {
        match self.inject_fault.as_deref() {
            None | Some("none") => Ok(KernelFault::None),
            Some("sign-flip") => Ok(KernelFault::FlipNormalizationSign),
            Some(other) => Err(CliError::config(format!("unknown fault '{other}'"))),
        }
    }
}

const ALL_EPS: &[f64] = &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

struct Defaults {
    eps: &'static [f64],
    k: i64,
    z_grid: usize,
    n: usize,
    grid: usize,
    min_grid: usize,
}

fn scan_config(s: &Settings, d: Defaults) -> Result<ScanConfig, CliError> {
    Ok(ScanConfig {
        epsilons: s.eps(d.eps)?,
        z_grid: s.count("z-grid", d.z_grid, 1)?,
        k: s.k(d.k)?,
        rotation: s.rotation()?,
        n: s.count("n", d.n, 1)?,
        method: MethodChoice::parse(s.raw("method").unwrap_or("birkhoff"))?,
        lambda: s.lambda()?,
        coeffs: s.coeffs()?,
        seed: s.seed()?,
        grid: s.count("grid", d.grid, d.min_grid)?,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn io_err(source: std::io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source,
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = u8::try_from(e.exit_code()).unwrap_or(2);
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(&cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command; `Ok` carries 0 (PASS) or 1 (FAIL).
pub fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, CliError> {
    match command {
        Command::Bound(f) => cmd_bound(f, out),
        Command::Scan(f) => cmd_scan(f, out, err),
        Command::VerifyT1(f) => cmd_verify_t1(f, out),
        Command::VerifyT2(f) => cmd_verify_t2(f, out),
        Command::Subharmonic(f) => cmd_subharmonic(f, out),
    }
}

fn cmd_bound(f: &Flags, out: &mut dyn Write) -> Result<u8, CliError> {
    let eps = f.settings()?.eps(ALL_EPS)?;
    writeln!(out, "epsilon,bound,positive").map_err(io_err)?;
    for e in eps {
        let b = exponent_lower_bound(e);
        writeln!(out, "{},{},{}", table::fmt_real(e), table::fmt_real(b), e < std::f64::consts::FRAC_1_SQRT_2)
            .map_err(io_err)?;
    }
    Ok(0)
}

fn cmd_scan(f: &Flags, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, CliError> {
    let s = f.settings()?;
    let config = scan_config(
        &s,
        Defaults { eps: &[0.5], k: 1, z_grid: 16, n: 100_000, grid: 64, min_grid: 16 },
    )?;
    let rows = commands::scan(&config, f.fault()?)?;
    let csv = table::to_csv(&rows);
    match s.path("out") {
        Some(path) => {
            write_file(&path, &csv)?;
            let _ = writeln!(err, "wrote {} rows to {}", rows.len(), path.display());
        }
        None => out.write_all(csv.as_bytes()).map_err(io_err)?,
    }
    if let Some(path) = s.path("svg") {
        let title = format!("Lyapunov exponent scan, n = {}", config.n);
        write_file(&path, &svg::render(&rows, &title))?;
    }
    Ok(0)
}

fn cmd_verify_t1(f: &Flags, out: &mut dyn Write) -> Result<u8, CliError> {
    let s = f.settings()?;
    let config = scan_config(
        &s,
        Defaults { eps: ALL_EPS, k: 1, z_grid: 32, n: 6, grid: 2048, min_grid: 16 },
    )?;
    let tol = s.real("tol", 1e-3)?;
    let report = commands::verify_t1(&config, tol, f.fault()?)?;
    writeln!(
        out,
        "phase-average inequality: n = {}, theta grid = {}, {} (epsilon, z) points, tol = {tol:e}",
        report.n,
        report.grid,
        report.checks.len()
    )
    .map_err(io_err)?;
    for &eps in &config.epsilons {
        let worst = report
            .checks
            .iter()
            .filter(|c| c.epsilon == eps)
            .min_by(|a, b| a.margin().total_cmp(&b.margin()))
            .expect("every epsilon has checks");
        writeln!(
            out,
            "  epsilon {eps}: bound {:.6}, min gamma_hat {:.6} at z_arg {}, margin {:+.3e}",
            worst.bound,
            worst.gamma_hat,
            worst.z_arg,
            worst.margin()
        )
        .map_err(io_err)?;
    }
    let worst = report.worst().expect("nonempty");
    writeln!(
        out,
        "worst margin {:+.6e} at epsilon {}, z_arg {}",
        worst.margin(),
        worst.epsilon,
        worst.z_arg
    )
    .map_err(io_err)?;
    let passed = report.passed();
    writeln!(out, "{}", if passed { "PASS" } else { "FAIL" }).map_err(io_err)?;
    Ok(if passed { 0 } else { 1 })
}

fn cmd_verify_t2(f: &Flags, out: &mut dyn Write) -> Result<u8, CliError> {
    let s = f.settings()?;
    let config = scan_config(
        &s,
        Defaults { eps: &[0.5], k: 2, z_grid: 16, n: 100_000, grid: 64, min_grid: 16 },
    )?;
    let threshold = s.real("threshold", 0.05)?;
    if threshold <= 0.0 {
        return Err(CliError::config("--threshold must be positive"));
    }
    let ladder = match s.raw("ladder") {
        None => DEFAULT_LADDER.to_vec(),
        Some(v) => settings::parse_real_list(v)
            .filter(|l| !l.is_empty())
            .ok_or_else(|| CliError::config(format!("invalid value for --ladder: '{v}'")))?,
    };
    let reports = commands::verify_t2(&config, &ladder, threshold)?;
    let mut all_pass = true;
    for r in &reports {
        writeln!(
            out,
            "epsilon {}: lambda_max {:.6e}, reference bound {:.6}, n = {}, {} z points",
            r.epsilon,
            r.lambda_max,
            exponent_lower_bound(r.epsilon),
            config.n,
            config.z_grid
        )
        .map_err(io_err)?;
        writeln!(out, "  |lambda|        fraction  min_z gamma_hat  at z_arg  above {threshold}").map_err(io_err)?;
        for rung in &r.rungs {
            writeln!(
                out,
                "  {:<14.6e}  {:<8.4}  {:<15.6}  {:<8}  {}",
                rung.lambda.norm(),
                rung.fraction,
                rung.min_gamma,
                rung.argmin_z,
                rung.min_gamma > threshold
            )
            .map_err(io_err)?;
        }
        match r.lambda_surrogate() {
            Some(rung) => writeln!(
                out,
                "  empirical lambda_1 surrogate (non-rigorous): |lambda| = {:.6e}, gamma_- surrogate = {:.6}",
                rung.lambda.norm(),
                rung.min_gamma
            ),
            None => writeln!(out, "  empirical lambda_1 surrogate (non-rigorous): none, lambda = 0 already below threshold"),
        }
        .map_err(io_err)?;
        all_pass &= r.any_positive_rung();
    }
    writeln!(out, "{}", if all_pass { "PASS" } else { "FAIL" }).map_err(io_err)?;
    Ok(if all_pass { 0 } else { 1 })
}

fn cmd_subharmonic(f: &Flags, out: &mut dyn Write) -> Result<u8, CliError> {
    let s = f.settings()?;
    let config = scan_config(
        &s,
        Defaults { eps: &[0.3, 0.5, 0.7], k: 1, z_grid: 4, n: 8, grid: 2048, min_grid: 64 },
    )?;
    let tol = s.real("tol", 1e-3)?;
    let entries = commands::subharmonic(&config)?;
    writeln!(out, "epsilon,k,z_arg,j0,n,circle_average,center_value,slack,refine_delta").map_err(io_err)?;
    for e in &entries {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            e.epsilon,
            e.k,
            e.z_arg,
            e.j0,
            e.report.n,
            table::fmt_real(e.report.circle_average),
            table::fmt_real(e.report.center_value),
            table::fmt_real(e.report.slack()),
            table::fmt_real(e.refine_delta)
        )
        .map_err(io_err)?;
    }
    let min_slack = entries.iter().map(|e| e.report.slack()).fold(f64::INFINITY, f64::min);
    let max_delta = entries.iter().map(|e| e.refine_delta).fold(0.0, f64::max);
    writeln!(out, "min slack {min_slack:+.6e}, max refinement delta {max_delta:.3e}, tol {tol:e}").map_err(io_err)?;
    let passed = min_slack >= -tol;
    writeln!(out, "{}", if passed { "PASS" } else { "FAIL" }).map_err(io_err)?;
    Ok(if passed { 0 } else { 1 })
}
