//! Almost periodic Szegő cocycles over the skew rotation on T × Z₂.
//!
//! The crate builds the cocycle matrices `A^z(θ, j)`, accumulates their
//! orbit products without overflow, and estimates Lyapunov exponents both
//! along single orbits and as phase averages. It also evaluates the
//! conjugated representation whose entries depend analytically on
//! `w = e^{2πiθ}`, which gives the lower bound `log((1 − ε²)^{1/2} / ε)`
//! through the mean-value inequality for subharmonic functions.

pub mod cocycle;
pub mod dynamics;
pub mod error;
pub mod lyapunov;
pub mod mat2c;
pub mod par;
pub mod quadrature;

pub use cocycle::{Cocycle, KernelFault, ProductAccumulator, SpectralParameter};
pub use dynamics::{
    lambda_max, CoefficientSource, Constant, ExpGenerator, PerturbedGenerator, PhasePoint,
    Rotation,
};
pub use error::{Error, Result};
pub use lyapunov::{exponent_lower_bound, LyapunovEstimate, Method, SubharmonicReport};
pub use mat2c::{Complex, Mat2};
pub use quadrature::Quadrature;
