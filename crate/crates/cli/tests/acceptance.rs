//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary
//! (`harness = false`) so the lines appear in `cargo test` output.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use szego_cli::commands::{self, ScanConfig};
use szego_core::cocycle::{conjugated_step, conjugator, szego_matrix};
use szego_core::lyapunov::{
    estimate_birkhoff, estimate_phase_average, phase_average_profile, subharmonic_check,
};
use szego_core::{
    exponent_lower_bound, lambda_max, Cocycle, Complex, ExpGenerator, KernelFault, Mat2,
    PerturbedGenerator, PhasePoint, Rotation, SpectralParameter,
};

const ALGEBRA_TOL: f64 = 1e-12;
const FINITE_N_TOL: f64 = 1e-3;
const BIRKHOFF_TOL: f64 = 0.01;
const SLACK_TOL: f64 = 1e-3;
const REFINE_TOL: f64 = 1e-6;
const CROSS_TOL: f64 = 0.02;
const T2_THRESHOLD: f64 = 0.05;
const T2_MATCH_TOL: f64 = 0.02;
const NONNEG_TOL: f64 = 1e-9;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn max_entry_dist(x: &Mat2, y: &Mat2) -> f64 {
    x.entries()
        .iter()
        .zip(y.entries())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

/// `M^† J M` with `J = diag(1, −1)`, written out entrywise.
fn hermitian_form(m: &Mat2) -> [Complex; 4] {
    let [a, b, c, d] = m.entries();
    [
        a.conj() * a - c.conj() * c,
        a.conj() * b - c.conj() * d,
        b.conj() * a - d.conj() * c,
        b.conj() * b - d.conj() * d,
    ]
}

fn c1_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let mut worst = [0.0f64; 3];
    for _ in 0..1000 {
        let theta: f64 = rng.gen();
        let j: i64 = rng.gen_range(0..2);
        let s = SpectralParameter::from_turns(rng.gen());
        let eps = rng.gen_range(0.05..0.95);
        let k = [1i64, 2, 3][rng.gen_range(0..3)] * if rng.gen() { 1 } else { -1 };
        let g = ExpGenerator::new(eps, k).unwrap();
        let p = PhasePoint::new(theta, j);
        let a = szego_matrix(g.eval(p), &s).unwrap();

        let form = hermitian_form(&a);
        let j_form = [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0), Complex::new(0.0, 0.0), Complex::new(-1.0, 0.0)];
        let u11 = form.iter().zip(j_form).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let [a11, a12, a21, a22] = a.entries();
        let det = (a11 * a22 - a12 * a21 - s.z()).norm();
        let prev = conjugator(p.with_parity_shift(-1), &s).inverse().unwrap();
        let conj = max_entry_dist(&(conjugator(p, &s) * a * prev), &conjugated_step(p, &s, &g));
        for (w, v) in worst.iter_mut().zip([u11, det, conj]) {
            *w = w.max(v);
        }
    }
    outcome(
        worst.iter().all(|&w| w <= ALGEBRA_TOL),
        format!("max |A†JA − J| {:.2e}, |det A − z| {:.2e}, conjugation {:.2e}", worst[0], worst[1], worst[2]),
    )
}

fn c2_finite_n(gammas: &mut Vec<f64>) -> Outcome {
    let rotation = Rotation::golden();
    let mut worst = (f64::INFINITY, 0.0, 0, 0.0, 0);
    for k in [1i64, 2] {
        for e in 1..=7 {
            let eps = e as f64 / 10.0;
            let g = ExpGenerator::new(eps, k).unwrap();
            let bound = exponent_lower_bound(eps);
            for m in 0..32 {
                let t = m as f64 / 32.0;
                let cocycle = Cocycle::new(&g, SpectralParameter::from_turns(t));
                for est in phase_average_profile(&cocycle, &rotation, 8, 2048).unwrap() {
                    gammas.push(est.gamma_hat);
                    let margin = est.gamma_hat - bound;
                    if margin < worst.0 {
                        worst = (margin, eps, k, t, est.n);
                    }
                }
            }
        }
    }
    let (margin, eps, k, t, n) = worst;
    outcome(
        margin >= -FINITE_N_TOL,
        format!("worst margin {margin:+.4e} at epsilon {eps}, k {k}, z_arg {t}, n {n}"),
    )
}

fn birkhoff_scan(k: i64, lambda: Option<Complex>) -> Vec<szego_cli::table::ScanRow> {
    let mut config = ScanConfig::exponential(vec![0.5], 16, k, 100_000);
    if lambda.is_some() {
        config.lambda = lambda;
        config.coeffs = Some(PerturbedGenerator::unit_coeffs(k as u32));
    }
    commands::scan(&config, KernelFault::None).unwrap()
}

fn c3_birkhoff(gammas: &mut Vec<f64>) -> (Outcome, Vec<f64>) {
    let rows = birkhoff_scan(1, None);
    let values: Vec<f64> = rows.iter().map(|r| r.gamma_hat).collect();
    gammas.extend(&values);
    let target = 0.549306 - BIRKHOFF_TOL;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    (outcome(min >= target, format!("min gamma_hat {min:.6} over 16 z, need >= {target:.6}")), values)
}

fn c4_subharmonic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let rotation = Rotation::golden();
    let (mut min_slack, mut max_delta) = (f64::INFINITY, 0.0f64);
    for _ in 0..10 {
        let eps = rng.gen_range(0.05..0.95);
        let k = [1i64, 2, 3][rng.gen_range(0..3)] * if rng.gen() { 1 } else { -1 };
        let s = SpectralParameter::from_turns(rng.gen());
        let j0: u8 = rng.gen_range(0..2);
        let n = rng.gen_range(1..=8);
        let g = ExpGenerator::new(eps, k).unwrap();
        let coarse = subharmonic_check(&rotation, &g, &s, j0, n, 2048).unwrap();
        let fine = subharmonic_check(&rotation, &g, &s, j0, n, 4096).unwrap();
        // center value oracle: the product at w = 0 is diagonal with entries of modulus c^n and 1
        let center = n as f64 * (1.0 - eps * eps).sqrt().ln();
        assert!((coarse.center_value - center).abs() < 1e-12, "center value {} vs {center}", coarse.center_value);
        min_slack = min_slack.min(coarse.circle_average - center);
        max_delta = max_delta.max((fine.circle_average - coarse.circle_average).abs());
    }
    outcome(
        min_slack >= -SLACK_TOL && max_delta < REFINE_TOL,
        format!("min slack {min_slack:+.4e}, max refinement delta {max_delta:.2e}"),
    )
}

fn c5_cross(gammas: &mut Vec<f64>) -> Outcome {
    let rotation = Rotation::golden();
    let g = ExpGenerator::new(0.3, 1).unwrap();
    let cocycle = Cocycle::new(&g, SpectralParameter::from_turns(0.0));
    let b = estimate_birkhoff(&cocycle, PhasePoint::new(0.0, 0), &rotation, 10_000).unwrap().gamma_hat;
    let p = estimate_phase_average(&cocycle, &rotation, 10_000, 64).unwrap().gamma_hat;
    gammas.extend([b, p]);
    outcome((b - p).abs() <= CROSS_TOL, format!("birkhoff {b:.6}, phase average {p:.6}, diff {:.2e}", (b - p).abs()))
}

/// The λ = 0 run is compared with criterion 3 through the minimum over z:
/// criterion 3 uses k = 1, and γ(z) itself depends on k, so per-z values of
/// the two frequencies differ (reported, not judged). Per-z agreement is
/// judged against the unperturbed family at the same k.
fn c6_perturbed(gammas: &mut Vec<f64>, c3: &[f64]) -> Outcome {
    let max = lambda_max(0.5, &PerturbedGenerator::unit_coeffs(2));
    let perturbed = birkhoff_scan(2, Some(Complex::new(0.1 * max, 0.0)));
    let unperturbed = birkhoff_scan(2, Some(Complex::new(0.0, 0.0)));
    let exp_family = birkhoff_scan(2, None);
    gammas.extend(perturbed.iter().chain(&unperturbed).map(|r| r.gamma_hat));
    let min_of = |v: &mut dyn Iterator<Item = f64>| v.fold(f64::INFINITY, f64::min);
    let min = min_of(&mut perturbed.iter().map(|r| r.gamma_hat));
    let reduction = unperturbed
        .iter()
        .zip(&exp_family)
        .map(|(r, e)| (r.gamma_hat - e.gamma_hat).abs())
        .fold(0.0, f64::max);
    let min_gap = (min_of(&mut unperturbed.iter().map(|r| r.gamma_hat)) - min_of(&mut c3.iter().copied())).abs();
    let per_z_k1 = unperturbed
        .iter()
        .zip(c3)
        .map(|(r, v)| (r.gamma_hat - v).abs())
        .fold(0.0, f64::max);
    outcome(
        min > T2_THRESHOLD && reduction <= T2_MATCH_TOL && min_gap <= T2_MATCH_TOL,
        format!(
            "lambda = 0.1 lambda_max: min gamma_hat {min:.6} (threshold {T2_THRESHOLD}, empirical surrogate); \
             lambda = 0 vs exponential k = 2: max diff {reduction:.2e}; min over z vs criterion 3: diff {min_gap:.2e} \
             (per-z vs k = 1, informational: {per_z_k1:.2e})"
        ),
    )
}

fn run_scan(threads: Option<&str>) -> Vec<u8> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_szego"));
    cmd.args(["scan", "--eps", "0.3,0.6", "--z-grid", "8", "--n", "5000", "--method", "both", "--seed", "42"]);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t);
    }
    let out = cmd.output().expect("run szego");
    assert!(out.status.success(), "scan failed: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn c7_nonneg_determinism(gammas: &[f64]) -> Outcome {
    let runs = [run_scan(None), run_scan(None), run_scan(Some("1")), run_scan(Some("4"))];
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    let csv = String::from_utf8(runs[0].clone()).unwrap();
    let scan_gammas: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(5).unwrap().parse().unwrap()).collect();
    let min = gammas.iter().chain(&scan_gammas).copied().fold(f64::INFINITY, f64::min);
    outcome(
        identical && min >= -NONNEG_TOL && scan_gammas.len() == 32,
        format!(
            "min gamma_hat {min:.3e} over {} estimates; 4 scan runs byte-identical: {identical}",
            gammas.len() + scan_gammas.len()
        ),
    )
}

fn c8_mutation() -> Outcome {
    let verify = |fault: bool| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_szego"));
        cmd.args(["verify-t1", "--eps", "0.5", "--z-grid", "32"]);
        if fault {
            cmd.args(["--inject-fault", "sign-flip"]);
        }
        cmd.output().expect("run szego").status.code()
    };
    let (clean, faulty) = (verify(false), verify(true));
    outcome(clean == Some(0) && faulty == Some(1), format!("exit codes: clean {clean:?}, sign flip {faulty:?}"))
}

fn report(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    println!(
        "{} criterion {name} ({:.1}s): {}",
        if o.passed { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64(),
        o.detail
    );
    o.passed
}

fn main() -> ExitCode {
    let mut gammas = Vec::new();
    let mut all = true;
    all &= report("1 algebraic identities", c1_algebra);
    all &= report("2 finite-n phase-average inequality", || c2_finite_n(&mut gammas));
    let mut c3_values = Vec::new();
    all &= report("3 Birkhoff lower bound", || {
        let (o, v) = c3_birkhoff(&mut gammas);
        c3_values = v;
        o
    });
    all &= report("4 subharmonic mean value", c4_subharmonic);
    all &= report("5 cross-estimator consistency", || c5_cross(&mut gammas));
    all &= report("6 perturbed family positivity", || c6_perturbed(&mut gammas, &c3_values));
    all &= report("7 nonnegativity and determinism", || c7_nonneg_determinism(&gammas));
    all &= report("8 mutation sensitivity", c8_mutation);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
