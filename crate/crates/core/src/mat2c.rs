//! Complex 2×2 matrices.
//!
//! Every matrix appearing in the cocycle computations (single steps,
//! conjugators, running products) is a [`Mat2`]. Only the handful of
//! operations those computations need are provided; the operator norm is
//! computed in closed form from the Frobenius norm and the determinant.

use std::ops::Mul;

pub type Complex = num_complex::Complex64;

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);

/// Row-major 2×2 complex matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(ONE, ZERO, ZERO, ONE);
    /// The permutation `[[0, 1], [1, 0]]`.
    pub const SWAP: Mat2 = Mat2::new(ZERO, ONE, ONE, ZERO);
    /// The indefinite form `diag(1, -1)` preserved by U(1,1).
    pub const J: Mat2 = Mat2::new(ONE, ZERO, ZERO, Complex::new(-1.0, 0.0));

    pub const fn new(a: Complex, b: Complex, c: Complex, d: Complex) -> Self {
        Self { a, b, c, d }
    }

    pub const fn diag(a: Complex, d: Complex) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    /// Builds a matrix from real entries.
    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn entries(&self) -> [Complex; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }

    pub fn det(&self) -> Complex {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex {
        self.a + self.d
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat2 {
        Mat2::new(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    pub fn scale(&self, s: Complex) -> Mat2 {
        Mat2::new(s * self.a, s * self.b, s * self.c, s * self.d)
    }

    /// Inverse via the adjugate, `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det == ZERO || !det.is_finite() {
            return None;
        }
        let inv = det.inv();
        Some(Mat2::new(self.d, -self.b, -self.c, self.a).scale(inv))
    }

    /// Sum of squared moduli of the entries (squared Frobenius norm).
    pub fn frobenius_sq(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest singular value.
    ///
    /// With `F = Σ|m_ij|²` and `D = |det|²` the squared singular values are
    /// the roots of `s² − F s + D`, so `σ_max² = (F + √(F² − 4D)) / 2`. The
    /// discriminant is clamped at zero to absorb rounding.
    pub fn op_norm(&self) -> f64 {
        let f = self.frobenius_sq();
        let d = self.det().norm_sqr();
        let disc = (f * f - 4.0 * d).max(0.0);
        ((f + disc.sqrt()) / 2.0).sqrt()
    }

    /// Entrywise max-modulus distance.
    pub fn max_dist(&self, other: &Mat2) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// `x* J x == J` within `tol` (entrywise max modulus).
    pub fn is_u11(&self, tol: f64) -> bool {
        (self.adjoint() * Mat2::J * *self).max_dist(&Mat2::J) <= tol
    }

    /// `x* x == I` within `tol` (entrywise max modulus).
    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.adjoint() * *self).max_dist(&Mat2::IDENTITY) <= tol
    }
}

impl Default for Mat2 {
    fn default() -> Self {
        Mat2::IDENTITY
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    #[inline]
    fn mul(self, y: Mat2) -> Mat2 {
        Mat2::new(
            self.a * y.a + self.b * y.c,
            self.a * y.b + self.b * y.d,
            self.c * y.a + self.d * y.c,
            self.c * y.b + self.d * y.d,
        )
    }
}

impl Mul<Complex> for Mat2 {
    type Output = Mat2;

    fn mul(self, s: Complex) -> Mat2 {
        self.scale(s)
    }
}
