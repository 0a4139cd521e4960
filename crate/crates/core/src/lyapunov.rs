//! Lyapunov exponent estimators and the subharmonic lower-bound check.
//!
//! Two estimators are provided:
//!
//! * [`estimate_birkhoff`] follows a single orbit, `γ̂ = (1/n) log ‖A_n(ω)‖`.
//! * [`estimate_phase_average`] averages `log ‖A_n(θ, j)‖` over a uniform θ
//!   grid and both parities, then divides by `n`. For the exponential family
//!   this finite-n quantity is already bounded below by
//!   [`exponent_lower_bound`], not only in the limit.
//!
//! The phase average uses the uniform rectangle rule, which is what stays
//! affordable at large `n`. `‖A_n‖ ≥ 1` keeps the integrand bounded, but at
//! small `n` it has narrow dips near the θ where `A_n` is almost unitary;
//! [`subharmonic_check`] and [`parity_log_norm_mean`] therefore accept an
//! adaptive [`Quadrature`].

use std::fmt;

use crate::cocycle::{Cocycle, ProductAccumulator, SpectralParameter};
use crate::dynamics::{unit_phase, CoefficientSource, ExpGenerator, PhasePoint, Rotation};
use crate::error::{Error, Result};
use crate::mat2c::{Complex, Mat2};
use crate::par;
use crate::quadrature::Quadrature;

/// `log((1 − ε²)^{1/2} / ε)`, positive exactly when `ε < 1/√2`.
pub fn exponent_lower_bound(epsilon: f64) -> f64 {
    ((1.0 - epsilon * epsilon).sqrt() / epsilon).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Birkhoff,
    PhaseAverage,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Birkhoff => "birkhoff",
            Method::PhaseAverage => "phase",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovEstimate {
    /// Estimated exponent, nats per step.
    pub gamma_hat: f64,
    pub method: Method,
    pub n: usize,
    /// Grid points or orbits averaged.
    pub samples: usize,
    /// Reference lower bound `log((1−ε²)^{1/2}/ε)` when the source has a coupling ε.
    pub bound: Option<f64>,
}

impl LyapunovEstimate {
    /// `gamma_hat − bound`.
    pub fn margin(&self) -> Option<f64> {
        self.bound.map(|b| self.gamma_hat - b)
    }
}

fn reference_bound<G: CoefficientSource>(cocycle: &Cocycle<G>) -> Option<f64> {
    cocycle.source().coupling().map(exponent_lower_bound)
}

fn check_steps(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    Ok(())
}

/// `(1/n) log ‖A^z_n(p0)‖` along one orbit.
pub fn estimate_birkhoff<G: CoefficientSource>(
    cocycle: &Cocycle<G>,
    p0: PhasePoint,
    rotation: &Rotation,
    n: usize,
) -> Result<LyapunovEstimate> {
    check_steps(n)?;
    let acc = cocycle.orbit_product(p0, rotation, n)?;
    Ok(LyapunovEstimate {
        gamma_hat: acc.log_norm() / n as f64,
        method: Method::Birkhoff,
        n,
        samples: 1,
        bound: reference_bound(cocycle),
    })
}

fn grid_point(index: usize, grid: usize) -> PhasePoint {
    PhasePoint::new((index % grid) as f64 / grid as f64, (index / grid) as i64)
}

fn check_grid(grid: usize, min: usize) -> Result<()> {
    if grid < min {
        return Err(Error::InvalidParameter(format!(
            "theta grid must have at least {min} points, got {grid}"
        )));
    }
    Ok(())
}

/// `(1/n) · mean over θ_i = i/grid, j ∈ {0, 1} of log ‖A^z_n(θ_i, j)‖`.
pub fn estimate_phase_average<G: CoefficientSource>(
    cocycle: &Cocycle<G>,
    rotation: &Rotation,
    n: usize,
    grid: usize,
) -> Result<LyapunovEstimate> {
    check_steps(n)?;
    check_grid(grid, 16)?;
    let logs = par::map_range(2 * grid, |i| {
        cocycle
            .orbit_product(grid_point(i, grid), rotation, n)
            .map(|acc| acc.log_norm())
    });
    let total = logs.into_iter().sum::<Result<f64>>()?;
    Ok(LyapunovEstimate {
        gamma_hat: total / (2 * grid) as f64 / n as f64,
        method: Method::PhaseAverage,
        n,
        samples: 2 * grid,
        bound: reference_bound(cocycle),
    })
}

/// Phase-average estimates for every `n = 1 … n_max`, sharing one pass per
/// grid point. Entry `m − 1` equals `estimate_phase_average(…, m, grid)`.
pub fn phase_average_profile<G: CoefficientSource>(
    cocycle: &Cocycle<G>,
    rotation: &Rotation,
    n_max: usize,
    grid: usize,
) -> Result<Vec<LyapunovEstimate>> {
    check_steps(n_max)?;
    check_grid(grid, 16)?;
    let profiles = par::map_range(2 * grid, |i| {
        cocycle.log_norm_profile(grid_point(i, grid), rotation, n_max)
    });
    let mut sums = vec![0.0; n_max];
    for profile in profiles {
        for (s, l) in sums.iter_mut().zip(profile?) {
            *s += l;
        }
    }
    let bound = reference_bound(cocycle);
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(m, s)| LyapunovEstimate {
            gamma_hat: s / (2 * grid) as f64 / (m + 1) as f64,
            method: Method::PhaseAverage,
            n: m + 1,
            samples: 2 * grid,
            bound,
        })
        .collect())
}

/// Mean over θ of `log ‖A^z_n(θ, parity)‖` (no division by `n`), using
/// `grid` panels of the given rule.
pub fn parity_log_norm_mean<G: CoefficientSource>(
    cocycle: &Cocycle<G>,
    rotation: &Rotation,
    parity: u8,
    n: usize,
    grid: usize,
    quadrature: Quadrature,
) -> Result<f64> {
    check_steps(n)?;
    quadrature.try_mean(grid, |theta| {
        let p = PhasePoint::new(theta, parity as i64);
        cocycle.orbit_product(p, rotation, n).map(|acc| acc.log_norm())
    })
}

/// Largest minus smallest Birkhoff estimate over the given starting points.
pub fn birkhoff_spread<G: CoefficientSource>(
    cocycle: &Cocycle<G>,
    starts: &[PhasePoint],
    rotation: &Rotation,
    n: usize,
) -> Result<f64> {
    let estimates = par::map_ordered(starts, |&p| estimate_birkhoff(cocycle, p, rotation, n));
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for e in estimates {
        let g = e?.gamma_hat;
        lo = lo.min(g);
        hi = hi.max(g);
    }
    Ok(hi - lo)
}

/// Factor `m` of the conjugated product after pulling out `ε^{−1} z^{1/2}` and
/// a unimodular phase, as a function of `w` (equal to `e^{2πiθ}` on the circle).
///
/// For `k > 0`:
/// `[[−c e^{2πikmα} w^{2k}, z^p w^k], [z^{−p} w^k, −c e^{−2πikmα}]]`,
/// with `c = (1 − ε²)^{1/2}` and `p = (j0 + m) mod 2`. For `k < 0` the powers
/// of `w` use `|k|` and move to the lower-right corner so the entries stay
/// polynomial in `w`.
pub fn analytic_factor(
    g: &ExpGenerator,
    s: &SpectralParameter,
    rotation: &Rotation,
    j0: u8,
    m: usize,
    w: Complex,
) -> Mat2 {
    let c = g.amplitude();
    let k = g.k();
    let kk = k.unsigned_abs() as i32;
    let drift = unit_phase(k as f64 * m as f64 * rotation.alpha());
    let parity = (j0 as usize + m) % 2;
    let zp = if parity == 0 { Complex::new(1.0, 0.0) } else { s.z() };
    let wk = w.powi(kk);
    let w2k = wk * wk;
    if k > 0 {
        Mat2::new(-drift * c * w2k, zp * wk, zp.conj() * wk, -drift.conj() * c)
    } else {
        Mat2::new(-drift * c, zp * wk, zp.conj() * wk, -drift.conj() * c * w2k)
    }
}

fn analytic_log_norm(
    g: &ExpGenerator,
    s: &SpectralParameter,
    rotation: &Rotation,
    j0: u8,
    n: usize,
    w: Complex,
) -> f64 {
    let mut acc = ProductAccumulator::new();
    for m in 0..n {
        // entries are bounded by 1 + c for |w| ≤ 1, so this cannot fail
        acc.accumulate(analytic_factor(g, s, rotation, j0, m, w))
            .expect("bounded factors");
    }
    acc.log_norm()
}

/// Mean-value inequality for `w ↦ log ‖∏_{m=n−1}^{0} factor_m(w)‖` on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubharmonicReport {
    pub n: usize,
    pub grid: usize,
    /// Quadrature mean of the log-norm over `w = e^{2πiθ}`.
    pub circle_average: f64,
    /// Log-norm of the same product evaluated at `w = 0`.
    pub center_value: f64,
}

impl SubharmonicReport {
    /// `circle_average − center_value`; nonnegative up to quadrature error.
    pub fn slack(&self) -> f64 {
        self.circle_average - self.center_value
    }
}

/// Evaluates the analytic product over the unit circle and at its center.
///
/// The circle average uses adaptive Gauss–Kronrod on `grid` uniform panels:
/// the log-norm has narrow dips where the product is nearly unitary, which a
/// plain uniform grid of a few thousand points does not resolve.
pub fn subharmonic_check(
    rotation: &Rotation,
    g: &ExpGenerator,
    s: &SpectralParameter,
    j0: u8,
    n: usize,
    grid: usize,
) -> Result<SubharmonicReport> {
    subharmonic_check_with(rotation, g, s, j0, n, grid, Quadrature::DEFAULT_ADAPTIVE)
}

pub fn subharmonic_check_with(
    rotation: &Rotation,
    g: &ExpGenerator,
    s: &SpectralParameter,
    j0: u8,
    n: usize,
    grid: usize,
    quadrature: Quadrature,
) -> Result<SubharmonicReport> {
    check_steps(n)?;
    check_grid(grid, 64)?;
    let j0 = j0 % 2;
    let circle_average =
        quadrature.mean(grid, |theta| analytic_log_norm(g, s, rotation, j0, n, unit_phase(theta)));
    let center_value = analytic_log_norm(g, s, rotation, j0, n, Complex::new(0.0, 0.0));
    Ok(SubharmonicReport {
        n,
        grid,
        circle_average,
        center_value,
    })
}
