//! Szegő cocycle matrices, the unitary conjugators that put them in the
//! analytic form, and renormalized orbit products.

use crate::dynamics::{unit_phase, CoefficientSource, ExpGenerator, PhasePoint, Rotation};
use crate::error::{Error, Result};
use crate::mat2c::{Complex, Mat2, ONE, ZERO};

/// A point `z` on the unit circle together with the principal branch of `z^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParameter {
    z: Complex,
    sqrt_z: Complex,
}

impl SpectralParameter {
    /// Accepts `z` with `| |z| − 1 | ≤ 1e−12` and projects it onto the circle.
    pub fn new(z: Complex) -> Result<Self> {
        let r = z.norm();
        if r.is_nan() || (r - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "spectral parameter must lie on the unit circle, |z| = {r}"
            )));
        }
        Ok(Self::from_unit(z / r))
    }

    /// `z = e^{2πi·t}`.
    pub fn from_turns(t: f64) -> Self {
        Self::from_unit(unit_phase(t))
    }

    fn from_unit(z: Complex) -> Self {
        Self { z, sqrt_z: z.sqrt() }
    }

    pub fn z(&self) -> Complex {
        self.z
    }

    pub fn sqrt_z(&self) -> Complex {
        self.sqrt_z
    }

    /// Argument of `z` as a fraction of a full turn, in `[0, 1)`.
    pub fn turns(&self) -> f64 {
        crate::dynamics::frac(self.z.arg() / std::f64::consts::TAU)
    }

    /// `z^p` for `p ∈ {−1, 0, 1}`.
    fn pow_unit(&self, p: i8) -> Complex {
        match p {
            0 => ONE,
            1 => self.z,
            _ => self.z.conj(),
        }
    }
}

/// Fault injection for the cocycle kernel. Only used to check that the
/// verification harness rejects a broken kernel.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelFault {
    #[default]
    None,
    /// Uses `(1 + |f|²)^{−1/2}` as the normalization instead of `(1 − |f|²)^{−1/2}`.
    FlipNormalizationSign,
}

/// `A^z = (1 − |f|²)^{−1/2} [[z, −conj f], [−f z, 1]]`.
pub fn szego_matrix(f: Complex, s: &SpectralParameter) -> Result<Mat2> {
    faulty_szego_matrix(f, s, KernelFault::None)
}

fn faulty_szego_matrix(f: Complex, s: &SpectralParameter, fault: KernelFault) -> Result<Mat2> {
    let modulus_sq = f.norm_sqr();
    let gap = match fault {
        KernelFault::None => 1.0 - modulus_sq,
        KernelFault::FlipNormalizationSign => 1.0 + modulus_sq,
    };
    if gap.is_nan() || gap <= 0.0 || !f.is_finite() {
        return Err(Error::DegenerateCoefficient(f));
    }
    let z = s.z;
    let m = Mat2::new(z, -f.conj(), -f * z, ONE);
    Ok(m.scale(Complex::from(gap.sqrt().recip())))
}

/// `C^z(θ, j)`: the swap for `j = 0`, `diag(z^{1/2}, z^{−1/2})` for `j = 1`.
pub fn conjugator(p: PhasePoint, s: &SpectralParameter) -> Mat2 {
    if p.j() == 0 {
        Mat2::SWAP
    } else {
        Mat2::diag(s.sqrt_z, s.sqrt_z.conj())
    }
}

/// `C^z(θ, j) A^z(θ, j) C^z(θ, j − 1)^{−1}` in closed form for the exponential
/// family:
/// `(z^{1/2}/ε) [[−(1−ε²)^{1/2} e^{2πikθ}, z^j], [z^{−j}, −(1−ε²)^{1/2} e^{−2πikθ}]]`.
pub fn conjugated_step(p: PhasePoint, s: &SpectralParameter, g: &ExpGenerator) -> Mat2 {
    let amp = g.amplitude();
    let phase = unit_phase(g.k() as f64 * p.theta());
    let zj = s.pow_unit(p.j() as i8);
    let m = Mat2::new(-phase * amp, zj, zj.conj(), -phase.conj() * amp);
    m.scale(s.sqrt_z / g.epsilon())
}

/// Running product `A_n ⋯ A_1` kept at unit operator norm, with the stripped
/// scale accumulated as a logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductAccumulator {
    current: Mat2,
    log_scale: f64,
    steps: usize,
}

impl Default for ProductAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl ProductAccumulator {
    pub fn new() -> Self {
        Self {
            current: Mat2::IDENTITY,
            log_scale: 0.0,
            steps: 0,
        }
    }

    /// Normalized running product.
    pub fn current(&self) -> Mat2 {
        self.current
    }

    /// Sum of the logarithms of the stripped scale factors.
    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `log ‖product‖` of the unnormalized product.
    pub fn log_norm(&self) -> f64 {
        if self.log_scale == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        self.log_scale + self.current.op_norm().ln()
    }

    /// Multiplies `m` on the left and renormalizes.
    pub fn accumulate(&mut self, m: Mat2) -> Result<()> {
        let product = m * self.current;
        self.steps += 1;
        if !product.is_finite() {
            return Err(Error::NumericalBlowup { steps: self.steps });
        }
        let norm = product.op_norm();
        if norm == 0.0 {
            // the product is exactly zero and stays zero
            self.current = Mat2::new(ZERO, ZERO, ZERO, ZERO);
            self.log_scale = f64::NEG_INFINITY;
            return Ok(());
        }
        self.current = product.scale(Complex::from(norm.recip()));
        self.log_scale += norm.ln();
        Ok(())
    }

    /// By-value form of [`accumulate`](Self::accumulate).
    pub fn then(mut self, m: Mat2) -> Result<Self> {
        self.accumulate(m)?;
        Ok(self)
    }
}

/// A Szegő cocycle: a coefficient source evaluated at a fixed spectral parameter.
#[derive(Debug, Clone)]
pub struct Cocycle<G> {
    source: G,
    spectral: SpectralParameter,
    fault: KernelFault,
}

impl<G: CoefficientSource> Cocycle<G> {
    pub fn new(source: G, spectral: SpectralParameter) -> Self {
        Self {
            source,
            spectral,
            fault: KernelFault::None,
        }
    }

    #[doc(hidden)]
    pub fn with_fault(mut self, fault: KernelFault) -> Self {
        self.fault = fault;
        self
    }

    pub fn source(&self) -> &G {
        &self.source
    }

    pub fn spectral(&self) -> &SpectralParameter {
        &self.spectral
    }

    /// `A^z(p)`.
    pub fn matrix(&self, p: PhasePoint) -> Result<Mat2> {
        let f = self.source.coefficient(p)?;
        faulty_szego_matrix(f, &self.spectral, self.fault)
    }

    /// `A^z_n(p0) = A^z(T^{n−1} p0) ⋯ A^z(p0)`, newest factor on the left.
    pub fn orbit_product(
        &self,
        p0: PhasePoint,
        rotation: &Rotation,
        n: usize,
    ) -> Result<ProductAccumulator> {
        if n == 0 {
            return Err(Error::InvalidParameter("orbit length must be >= 1".into()));
        }
        let mut acc = ProductAccumulator::new();
        for p in rotation.orbit(p0).take(n) {
            acc.accumulate(self.matrix(p)?)?;
        }
        Ok(acc)
    }

    /// Records `log ‖A^z_m(p0)‖` for every `m = 1 … n` in one pass.
    pub fn log_norm_profile(&self, p0: PhasePoint, rotation: &Rotation, n: usize) -> Result<Vec<f64>> {
        let mut acc = ProductAccumulator::new();
        let mut out = Vec::with_capacity(n);
        for p in rotation.orbit(p0).take(n) {
            acc.accumulate(self.matrix(p)?)?;
            out.push(acc.log_norm());
        }
        Ok(out)
    }
}

/// `log ‖A^z_n(p0)‖` through the conjugated representation
/// `C^z(j0+n−1)^{−1} (∏_{m=n−1}^{0} B_m) C^z(j0−1)`, where `B_m` is the
/// conjugated step at `T^m p0`.
pub fn conjugated_log_norm(
    p0: PhasePoint,
    rotation: &Rotation,
    g: &ExpGenerator,
    s: &SpectralParameter,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("orbit length must be >= 1".into()));
    }
    let mut acc = ProductAccumulator::new();
    acc.accumulate(conjugator(p0.with_parity_shift(-1), s))?;
    for p in rotation.orbit(p0).take(n) {
        acc.accumulate(conjugated_step(p, s, g))?;
    }
    let last = p0.with_parity_shift(n as i64 - 1);
    acc.accumulate(conjugator(last, s).adjoint())?;
    Ok(acc.log_norm())
}
