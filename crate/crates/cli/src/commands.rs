//! The scan and verification runs behind each subcommand.
//!
//! Every run is split into independent jobs (one per `(ε, z)` pair or
//! parameter tuple), evaluated through [`szego_core::par`], and merged in job
//! order, so results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use szego_core::cocycle::{Cocycle, KernelFault, SpectralParameter};
use szego_core::lyapunov::{
    estimate_birkhoff, estimate_phase_average, exponent_lower_bound, subharmonic_check,
};
use szego_core::{
    lambda_max, par, CoefficientSource, Complex, ExpGenerator, Method, PerturbedGenerator,
    PhasePoint, Rotation, SubharmonicReport,
};

use crate::error::{numerical, CliError};
use crate::table::ScanRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Birkhoff,
    Phase,
    Both,
}

impl MethodChoice {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "birkhoff" => Ok(Self::Birkhoff),
            "phase" => Ok(Self::Phase),
            "both" => Ok(Self::Both),
            other => Err(CliError::config(format!(
                "--method must be birkhoff, phase or both, got '{other}'"
            ))),
        }
    }

    fn methods(&self) -> &'static [Method] {
        match self {
            Self::Birkhoff => &[Method::Birkhoff],
            Self::Phase => &[Method::PhaseAverage],
            Self::Both => &[Method::Birkhoff, Method::PhaseAverage],
        }
    }
}

/// Either generator family, chosen by whether a perturbation was configured.
#[derive(Debug, Clone)]
pub enum Source {
    Exp(ExpGenerator),
    Perturbed(PerturbedGenerator),
}

impl Source {
    pub fn build(
        epsilon: f64,
        k: i64,
        lambda: Option<Complex>,
        coeffs: Option<&[Complex]>,
    ) -> Result<Self, CliError> {
        if lambda.is_none() && coeffs.is_none() {
            let g = ExpGenerator::new(epsilon, k).map_err(|e| CliError::config(e.to_string()))?;
            return Ok(Source::Exp(g));
        }
        let k = u32::try_from(k)
            .ok()
            .filter(|&k| k >= 1)
            .ok_or_else(|| CliError::config("the perturbed family needs k >= 1"))?;
        let coeffs = coeffs.map_or_else(|| PerturbedGenerator::unit_coeffs(k), <[Complex]>::to_vec);
        let lambda = lambda.unwrap_or_default();
        PerturbedGenerator::new(epsilon, k, lambda, coeffs)
            .map(Source::Perturbed)
            .map_err(|e| CliError::config(format!("epsilon {epsilon}: {e}")))
    }

    pub fn lambda_abs(&self) -> f64 {
        match self {
            Source::Exp(_) => 0.0,
            Source::Perturbed(g) => g.lambda().norm(),
        }
    }
}

impl CoefficientSource for Source {
    fn coefficient(&self, p: PhasePoint) -> szego_core::Result<Complex> {
        match self {
            Source::Exp(g) => g.coefficient(p),
            Source::Perturbed(g) => g.coefficient(p),
        }
    }

    fn coupling(&self) -> Option<f64> {
        match self {
            Source::Exp(g) => g.coupling(),
            Source::Perturbed(g) => g.coupling(),
        }
    }
}

/// `z_m = e^{2πi·m/size}` as turns `m/size`.
pub fn z_grid(size: usize) -> Vec<f64> {
    (0..size).map(|m| m as f64 / size as f64).collect()
}

/// Birkhoff starting points drawn from a seeded stream, one per job.
pub fn start_points(seed: u64, count: usize) -> Vec<PhasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| PhasePoint::new(rng.gen::<f64>(), rng.gen_range(0..2)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub epsilons: Vec<f64>,
    pub z_grid: usize,
    pub k: i64,
    pub rotation: Rotation,
    pub n: usize,
    pub method: MethodChoice,
    pub lambda: Option<Complex>,
    pub coeffs: Option<Vec<Complex>>,
    pub seed: u64,
    /// θ grid for the phase-average estimator.
    pub grid: usize,
}

impl ScanConfig {
    pub fn exponential(epsilons: Vec<f64>, z_grid: usize, k: i64, n: usize) -> Self {
        Self {
            epsilons,
            z_grid,
            k,
            rotation: Rotation::golden(),
            n,
            method: MethodChoice::Birkhoff,
            lambda: None,
            coeffs: None,
            seed: 0,
            grid: 64,
        }
    }

    pub fn validate(&self) -> Result<Vec<Source>, CliError> {
        if self.epsilons.is_empty() {
            return Err(CliError::config("empty epsilon list"));
        }
        if self.z_grid == 0 || self.n == 0 {
            return Err(CliError::config("z grid and n must be at least 1"));
        }
        if self.method != MethodChoice::Birkhoff && self.grid < 16 {
            return Err(CliError::config("--grid must be at least 16"));
        }
        self.epsilons
            .iter()
            .map(|&eps| Source::build(eps, self.k, self.lambda, self.coeffs.as_deref()))
            .collect()
    }
}

/// One row per `(ε, z, method)`, ε-major, then z, then method.
pub fn scan(config: &ScanConfig, fault: KernelFault) -> Result<Vec<ScanRow>, CliError> {
    let sources = config.validate()?;
    let turns = z_grid(config.z_grid);
    let jobs: Vec<(usize, usize)> = (0..sources.len())
        .flat_map(|e| (0..turns.len()).map(move |m| (e, m)))
        .collect();
    let starts = start_points(config.seed, jobs.len());
    let results = par::map_range(jobs.len(), |i| {
        let (e, m) = jobs[i];
        let source = &sources[e];
        let eps = config.epsilons[e];
        let t = turns[m];
        let cocycle = Cocycle::new(source, SpectralParameter::from_turns(t)).with_fault(fault);
        let context = || format!("epsilon={eps}, z_arg={t}, lambda_abs={}", source.lambda_abs());
        config
            .method
            .methods()
            .iter()
            .map(|method| {
                let estimate = match method {
                    Method::Birkhoff => estimate_birkhoff(&cocycle, starts[i], &config.rotation, config.n),
                    Method::PhaseAverage => {
                        estimate_phase_average(&cocycle, &config.rotation, config.n, config.grid)
                    }
                }
                .map_err(|err| numerical(err, context()))?;
                Ok(ScanRow::new(
                    t,
                    eps,
                    source.lambda_abs(),
                    config.n,
                    *method,
                    estimate.gamma_hat,
                    exponent_lower_bound(eps),
                ))
            })
            .collect::<Result<Vec<_>, CliError>>()
    });
    let mut rows = Vec::with_capacity(jobs.len() * config.method.methods().len());
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCheck {
    pub epsilon: f64,
    pub z_arg: f64,
    pub gamma_hat: f64,
    pub bound: f64,
}

impl PhaseCheck {
    pub fn margin(&self) -> f64 {
        self.gamma_hat - self.bound
    }
}

#[derive(Debug, Clone)]
pub struct T1Report {
    pub n: usize,
    pub grid: usize,
    pub tol: f64,
    pub checks: Vec<PhaseCheck>,
}

impl T1Report {
    pub fn worst(&self) -> Option<&PhaseCheck> {
        self.checks.iter().min_by(|a, b| a.margin().total_cmp(&b.margin()))
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.margin() >= -self.tol)
    }
}

/// Finite-n phase-average inequality over every `(ε, z)` of the scan.
pub fn verify_t1(
    config: &ScanConfig,
    tol: f64,
    fault: KernelFault,
) -> Result<T1Report, CliError> {
    if config.lambda.is_some() || config.coeffs.is_some() {
        return Err(CliError::config("verify-t1 applies to the exponential family only"));
    }
    if config.grid < 16 {
        return Err(CliError::config("--grid must be at least 16"));
    }
    let sources = config.validate()?;
    let turns = z_grid(config.z_grid);
    let mut checks = Vec::with_capacity(sources.len() * turns.len());
    for (source, &eps) in sources.iter().zip(&config.epsilons) {
        for &t in &turns {
            let cocycle = Cocycle::new(source, SpectralParameter::from_turns(t)).with_fault(fault);
            let estimate = estimate_phase_average(&cocycle, &config.rotation, config.n, config.grid)
                .map_err(|err| numerical(err, format!("epsilon={eps}, z_arg={t}")))?;
            checks.push(PhaseCheck {
                epsilon: eps,
                z_arg: t,
                gamma_hat: estimate.gamma_hat,
                bound: exponent_lower_bound(eps),
            });
        }
    }
    Ok(T1Report {
        n: config.n,
        grid: config.grid,
        tol,
        checks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderRung {
    pub lambda: Complex,
    /// `|λ| / lambda_max`.
    pub fraction: f64,
    pub min_gamma: f64,
    pub argmin_z: f64,
}

#[derive(Debug, Clone)]
pub struct T2Report {
    pub epsilon: f64,
    pub lambda_max: f64,
    pub threshold: f64,
    pub rungs: Vec<LadderRung>,
}

impl T2Report {
    /// Largest rung such that it and every smaller rung keep the minimum over
    /// the z grid above the threshold. An empirical stand-in for λ₁, not a proof.
    pub fn lambda_surrogate(&self) -> Option<&LadderRung> {
        self.rungs.iter().take_while(|r| r.min_gamma > self.threshold).last()
    }

    pub fn any_positive_rung(&self) -> bool {
        self.rungs
            .iter()
            .any(|r| r.lambda.norm() > 0.0 && r.min_gamma > self.threshold)
    }
}

pub const DEFAULT_LADDER: &[f64] = &[0.0, 0.01, 0.03, 0.1, 0.3, 0.9];

/// Perturbation sweep: for each `λ` on the ladder, the minimum over the z grid
/// of the Birkhoff estimate. `config.lambda`, when set, fixes the direction and
/// the top rung (`[0, λ]`); otherwise the ladder is `fractions · lambda_max`
/// along the positive real axis.
pub fn verify_t2(
    config: &ScanConfig,
    fractions: &[f64],
    threshold: f64,
) -> Result<Vec<T2Report>, CliError> {
    if config.epsilons.is_empty() || config.z_grid == 0 || config.n == 0 {
        return Err(CliError::config("need at least one epsilon, z point and step"));
    }
    let k = u32::try_from(config.k)
        .ok()
        .filter(|&k| k >= 1)
        .ok_or_else(|| CliError::config("the perturbed family needs k >= 1"))?;
    let coeffs = config.coeffs.clone().unwrap_or_else(|| PerturbedGenerator::unit_coeffs(k));
    let mut reports = Vec::new();
    for &eps in &config.epsilons {
        let max = lambda_max(eps, &coeffs);
        if max.is_nan() || max <= 0.0 {
            return Err(CliError::config(format!(
                "lambda_max({eps}) = {max} is not positive"
            )));
        }
        let ladder: Vec<Complex> = match config.lambda {
            Some(l) => {
                if l.norm() >= max {
                    return Err(CliError::config(format!(
                        "|lambda| = {} is not below lambda_max = {max} at epsilon {eps}",
                        l.norm()
                    )));
                }
                if l.norm() == 0.0 {
                    vec![l]
                } else {
                    vec![Complex::new(0.0, 0.0), l]
                }
            }
            None => {
                if let Some(bad) = fractions.iter().find(|f| !(**f >= 0.0 && **f < 1.0)) {
                    return Err(CliError::config(format!("ladder fraction {bad} is outside [0, 1)")));
                }
                fractions.iter().map(|&f| Complex::new(f * max, 0.0)).collect()
            }
        };
        let mut rungs = Vec::with_capacity(ladder.len());
        for lambda in ladder {
            let rung_config = ScanConfig {
                epsilons: vec![eps],
                lambda: Some(lambda),
                coeffs: Some(coeffs.clone()),
                method: MethodChoice::Birkhoff,
                ..config.clone()
            };
            let rows = scan(&rung_config, KernelFault::None)?;
            let (argmin_z, min_gamma) = rows
                .iter()
                .map(|r| (r.z_arg, r.gamma_hat))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty z grid");
            rungs.push(LadderRung {
                lambda,
                fraction: lambda.norm() / max,
                min_gamma,
                argmin_z,
            });
        }
        reports.push(T2Report {
            epsilon: eps,
            lambda_max: max,
            threshold,
            rungs,
        });
    }
    Ok(reports)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubharmonicEntry {
    pub epsilon: f64,
    pub k: i64,
    pub z_arg: f64,
    pub j0: u8,
    pub report: SubharmonicReport,
    /// Change of the circle average when the panel count is doubled.
    pub refine_delta: f64,
}

/// Mean-value inequality for every `(ε, z, j0)` of the configuration.
pub fn subharmonic(config: &ScanConfig) -> Result<Vec<SubharmonicEntry>, CliError> {
    if config.lambda.is_some() || config.coeffs.is_some() {
        return Err(CliError::config("subharmonic applies to the exponential family only"));
    }
    if config.grid < 64 {
        return Err(CliError::config("--grid must be at least 64"));
    }
    let sources = config.validate()?;
    let turns = z_grid(config.z_grid);
    let mut entries = Vec::new();
    for (source, &eps) in sources.iter().zip(&config.epsilons) {
        let Source::Exp(g) = source else {
            unreachable!("validated as exponential")
        };
        for &t in &turns {
            let s = SpectralParameter::from_turns(t);
            for j0 in 0..2u8 {
                let context = || format!("epsilon={eps}, z_arg={t}, j0={j0}");
                let report = subharmonic_check(&config.rotation, g, &s, j0, config.n, config.grid)
                    .map_err(|e| numerical(e, context()))?;
                let refined =
                    subharmonic_check(&config.rotation, g, &s, j0, config.n, 2 * config.grid)
                        .map_err(|e| numerical(e, context()))?;
                entries.push(SubharmonicEntry {
                    epsilon: eps,
                    k: config.k,
                    z_arg: t,
                    j0,
                    report,
                    refine_delta: (refined.circle_average - report.circle_average).abs(),
                });
            }
        }
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_grid_turns() {
        assert_eq!(z_grid(4), vec![0.0, 0.25, 0.5, 0.75]);
    }

    #[test]
    fn start_points_are_seeded() {
        assert_eq!(start_points(7, 10), start_points(7, 10));
        assert_ne!(start_points(7, 10), start_points(8, 10));
    }

    #[test]
    fn method_parsing() {
        assert_eq!(MethodChoice::parse("both").unwrap(), MethodChoice::Both);
        assert!(MethodChoice::parse("qr").is_err());
    }

    #[test]
    fn empty_epsilons_is_config_error() {
        let cfg = ScanConfig::exponential(vec![], 4, 1, 10);
        let err = scan(&cfg, KernelFault::None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn scan_row_count_and_order() {
        let mut cfg = ScanConfig::exponential(vec![0.4, 0.6], 3, 1, 200);
        cfg.method = MethodChoice::Both;
        cfg.grid = 16;
        let rows = scan(&cfg, KernelFault::None).unwrap();
        assert_eq!(rows.len(), 12);
        assert_eq!((rows[0].epsilon, rows[0].z_arg, rows[0].method), (0.4, 0.0, Method::Birkhoff));
        assert_eq!(rows[1].method, Method::PhaseAverage);
        assert_eq!(rows[11].epsilon, 0.6);
        assert!(rows.iter().all(|r| r.gamma_hat >= -1e-9 && r.margin == r.gamma_hat - r.bound));
    }

    #[test]
    fn lambda_above_max_rejected() {
        let mut cfg = ScanConfig::exponential(vec![0.5], 2, 2, 100);
        let coeffs = PerturbedGenerator::unit_coeffs(2);
        cfg.lambda = Some(Complex::new(lambda_max(0.5, &coeffs) * 1.01, 0.0));
        assert_eq!(scan(&cfg, KernelFault::None).unwrap_err().exit_code(), 2);
        assert_eq!(verify_t2(&cfg, DEFAULT_LADDER, 0.05).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn t1_rejects_perturbed_family() {
        let mut cfg = ScanConfig::exponential(vec![0.5], 2, 1, 6);
        cfg.lambda = Some(Complex::new(0.0, 0.0));
        assert!(verify_t1(&cfg, 1e-3, KernelFault::None).is_err());
    }

    #[test]
    fn t1_small_run_passes() {
        let mut cfg = ScanConfig::exponential(vec![0.5, 0.95], 8, 1, 6);
        cfg.grid = 256;
        let report = verify_t1(&cfg, 1e-3, KernelFault::None).unwrap();
        assert!(report.passed());
        assert_eq!(report.checks.len(), 16);
    }

    #[test]
    fn surrogate_takes_prefix() {
        let rung = |l: f64, g: f64| LadderRung {
            lambda: Complex::new(l, 0.0),
            fraction: l,
            min_gamma: g,
            argmin_z: 0.0,
        };
        let report = T2Report {
            epsilon: 0.5,
            lambda_max: 1.0,
            threshold: 0.05,
            rungs: vec![rung(0.0, 0.6), rung(0.1, 0.5), rung(0.5, 0.01), rung(0.9, 0.2)],
        };
        assert_eq!(report.lambda_surrogate().unwrap().fraction, 0.1);
        assert!(report.any_positive_rung());
    }
}
