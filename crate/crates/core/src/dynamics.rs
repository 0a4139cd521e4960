//! Base dynamics on Ω = T × Z₂ and the Verblunsky coefficient generators.
//!
//! The base map is `T(θ, j) = (θ + α, j + 1)`. Coefficients come from a
//! [`CoefficientSource`]; the two families provided are the pure exponential
//! [`ExpGenerator`] and its trigonometric perturbation [`PerturbedGenerator`].

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::mat2c::Complex;

/// Reduces `x` into `[0, 1)`.
pub fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// `e^{2πi·t}` with `t` reduced mod 1 first so large arguments keep precision.
pub fn unit_phase(t: f64) -> Complex {
    let (s, c) = (TAU * frac(t)).sin_cos();
    Complex::new(c, s)
}

/// A point `(θ, j)` of Ω, `θ ∈ [0, 1)`, `j ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    theta: f64,
    j: u8,
}

impl PhasePoint {
    /// Reduces `theta` mod 1 and `j` mod 2.
    pub fn new(theta: f64, j: i64) -> Self {
        Self {
            theta: frac(theta),
            j: j.rem_euclid(2) as u8,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn j(&self) -> u8 {
        self.j
    }

    /// Same θ, parity shifted by `delta` (mod 2).
    pub fn with_parity_shift(&self, delta: i64) -> Self {
        Self::new(self.theta, self.j as i64 + delta)
    }
}

/// Rotation number `α ∈ (0, 1)` of the base map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    alpha: f64,
}

impl Rotation {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rotation number must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    /// `α = (√5 − 1)/2`.
    pub fn golden() -> Self {
        Self {
            alpha: (5f64.sqrt() - 1.0) / 2.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// One application of the base map.
    pub fn step(&self, p: PhasePoint) -> PhasePoint {
        PhasePoint::new(p.theta + self.alpha, p.j as i64 + 1)
    }

    /// `Tⁿ p` in closed form: `(frac(θ + n·α), (j + n) mod 2)`.
    pub fn orbit_point(&self, p: PhasePoint, n: u64) -> PhasePoint {
        let shift = frac(n as f64 * self.alpha);
        PhasePoint::new(p.theta + shift, p.j as i64 + (n % 2) as i64)
    }

    /// Iterates the base map from `start`, yielding `start, T start, T² start, …`.
    pub fn orbit(&self, start: PhasePoint) -> Orbit {
        Orbit {
            alpha: self.alpha,
            theta: start.theta,
            carry: 0.0,
            j: start.j,
        }
    }
}

impl Default for Rotation {
    fn default() -> Self {
        Self::golden()
    }
}

/// Orbit iterator with Kahan-compensated angle accumulation.
#[derive(Debug, Clone)]
pub struct Orbit {
    alpha: f64,
    theta: f64,
    carry: f64,
    j: u8,
}

impl Iterator for Orbit {
    type Item = PhasePoint;

    fn next(&mut self) -> Option<PhasePoint> {
        let current = PhasePoint {
            theta: self.theta,
            j: self.j,
        };
        let y = self.alpha - self.carry;
        let t = self.theta + y;
        self.carry = (t - self.theta) - y;
        // t < 2, so subtracting 1 is exact
        self.theta = if t >= 1.0 { t - 1.0 } else { t };
        self.j ^= 1;
        Some(current)
    }
}

/// A map Ω → 𝔻 producing Verblunsky coefficients.
pub trait CoefficientSource: Sync {
    fn coefficient(&self, p: PhasePoint) -> Result<Complex>;

    /// The coupling ε of the family, when the family has one. It selects the
    /// reference lower bound reported next to Lyapunov estimates.
    fn coupling(&self) -> Option<f64> {
        None
    }
}

impl<G: CoefficientSource + ?Sized> CoefficientSource for &G {
    fn coefficient(&self, p: PhasePoint) -> Result<Complex> {
        (**self).coefficient(p)
    }

    fn coupling(&self) -> Option<f64> {
        (**self).coupling()
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )))
    }
}

/// `f(θ, 0) = (1 − ε²)^{1/2} e^{2πikθ}`, `f(θ, 1) = conj f(θ, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpGenerator {
    epsilon: f64,
    k: i64,
}

impl ExpGenerator {
    pub fn new(epsilon: f64, k: i64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if k == 0 {
            return Err(Error::InvalidParameter("frequency k must be nonzero".into()));
        }
        Ok(Self { epsilon, k })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    /// `(1 − ε²)^{1/2}`, the constant modulus of the coefficients.
    pub fn amplitude(&self) -> f64 {
        (1.0 - self.epsilon * self.epsilon).sqrt()
    }

    pub fn eval(&self, p: PhasePoint) -> Complex {
        let sign = if p.j == 0 { 1.0 } else { -1.0 };
        unit_phase(sign * self.k as f64 * p.theta) * self.amplitude()
    }
}

impl CoefficientSource for ExpGenerator {
    fn coefficient(&self, p: PhasePoint) -> Result<Complex> {
        Ok(self.eval(p))
    }

    fn coupling(&self) -> Option<f64> {
        Some(self.epsilon)
    }
}

/// Largest `|λ|` for which the triangle inequality alone keeps the perturbed
/// coefficients inside 𝔻: `((1 − ε²)^{−1/2} − 1) / Σ|a_l|`, or `+∞` when all
/// `a_l` vanish.
pub fn lambda_max(epsilon: f64, coeffs: &[Complex]) -> f64 {
    let total: f64 = coeffs.iter().map(|a| a.norm()).sum();
    if total == 0.0 {
        return f64::INFINITY;
    }
    (1.0 / (1.0 - epsilon * epsilon).sqrt() - 1.0) / total
}

/// `f_λ(θ, 0) = (1 − ε²)^{1/2} (e^{2πikθ} + λ Σ_{l=−k}^{k−1} a_l e^{2πilθ})`,
/// with every phase negated for `j = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedGenerator {
    epsilon: f64,
    k: u32,
    lambda: Complex,
    coeffs: Vec<Complex>,
}

impl PerturbedGenerator {
    /// `coeffs` holds `a_{−k}, …, a_{k−1}` (length `2k`). Rejects `λ` with
    /// `|λ| ≥ lambda_max(ε, coeffs)`.
    pub fn new(epsilon: f64, k: u32, lambda: Complex, coeffs: Vec<Complex>) -> Result<Self> {
        check_epsilon(epsilon)?;
        if k == 0 {
            return Err(Error::InvalidParameter(
                "perturbed family needs k >= 1".into(),
            ));
        }
        if coeffs.len() != 2 * k as usize {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients a_-k..a_(k-1), got {}",
                2 * k,
                coeffs.len()
            )));
        }
        if !lambda.is_finite() || coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("non-finite lambda or coefficient".into()));
        }
        let max = lambda_max(epsilon, &coeffs);
        if lambda.norm() >= max {
            return Err(Error::InvalidParameter(format!(
                "|lambda| = {} is not below lambda_max = {max}",
                lambda.norm()
            )));
        }
        Ok(Self {
            epsilon,
            k,
            lambda,
            coeffs,
        })
    }

    /// `a_l = 1` for every `l = −k … k−1`.
    pub fn unit_coeffs(k: u32) -> Vec<Complex> {
        vec![Complex::new(1.0, 0.0); 2 * k as usize]
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn lambda(&self) -> Complex {
        self.lambda
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    /// The unperturbed member of the family.
    pub fn base(&self) -> ExpGenerator {
        ExpGenerator {
            epsilon: self.epsilon,
            k: self.k as i64,
        }
    }

    pub fn eval(&self, p: PhasePoint) -> Result<Complex> {
        let sign = if p.j == 0 { 1.0 } else { -1.0 };
        let k = self.k as i64;
        let lead = unit_phase(sign * k as f64 * p.theta);
        let tail: Complex = self
            .coeffs
            .iter()
            .zip(-k..k)
            .map(|(a, l)| a * unit_phase(sign * l as f64 * p.theta))
            .sum();
        let amplitude = (1.0 - self.epsilon * self.epsilon).sqrt();
        let value = (lead + self.lambda * tail) * amplitude;
        if value.norm() >= 1.0 {
            return Err(Error::Admissibility {
                value,
                theta: p.theta,
                j: p.j,
            });
        }
        Ok(value)
    }
}

impl CoefficientSource for PerturbedGenerator {
    fn coefficient(&self, p: PhasePoint) -> Result<Complex> {
        self.eval(p)
    }

    fn coupling(&self) -> Option<f64> {
        Some(self.epsilon)
    }
}

/// A θ-independent coefficient; the free case `Constant(0)` has `A^z = diag(z, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(Complex);

impl Constant {
    pub fn new(value: Complex) -> Result<Self> {
        if value.norm().is_nan() || value.norm() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "constant coefficient {value} is not in the open unit disk"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> Complex {
        self.0
    }
}

impl CoefficientSource for Constant {
    fn coefficient(&self, _p: PhasePoint) -> Result<Complex> {
        Ok(self.0)
    }
}
