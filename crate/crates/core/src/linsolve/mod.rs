//! Numerical kernels: sparse storage, fill-reducing ordering, band LU and
//! Cholesky factorizations, restarted GMRES, dense diagnostics.

mod band;
pub mod dense;
mod gmres;
mod ordering;
mod sparse;

pub use band::{BandCholesky, BandLu};
pub use gmres::{gmres, gmres_monitored, GmresOutcome, GmresSettings, GmresStep, LinearOperator};
pub use ordering::reverse_cuthill_mckee;
pub use sparse::{CsrMatrix, TripletBuilder};

use crate::C64;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Field scalar shared by the real and complex kernels.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    /// Modulus.
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        C64::conj(&self)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Euclidean inner product `y^* x`.
pub fn dot_c(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| b.conj() * a).sum()
}

pub fn norm_c(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}
