//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

use crate::linalg::SvdBackend;

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + std::fmt::Debug + SvdBackend + 'static
{
    /// Converts an `f64` literal into this scalar.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: RealField
        + Copy
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + std::fmt::Debug
        + SvdBackend
        + 'static
{
}

pub type Cx<T> = Complex<T>;
pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

pub(crate) fn czero<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::zero())
}

pub(crate) fn cone<T: Real>() -> Cx<T> {
    Complex::new(T::one(), T::zero())
}

pub(crate) fn creal<T: Real>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}

/// `exp(2πi · num/den)` with the numerator reduced modulo `den` first.
pub(crate) fn root_of_unity<T: Real>(num: u64, den: u64) -> Cx<T> {
    let k = num % den;
    // Exact values at quarter turns keep small cyclic examples exact.
    if 4 * k % den == 0 {
        return match 4 * k / den {
            0 => cone(),
            1 => cx(T::zero(), T::one()),
            2 => creal(-T::one()),
            _ => cx(T::zero(), -T::one()),
        };
    }
    let theta = T::two_pi() * T::lit(k as f64) / T::lit(den as f64);
    cx(theta.cos(), theta.sin())
}



/// Verdict tolerance and relative singular-value cutoff threaded through the
/// fiberwise routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    pub tol: T,
    pub rank_cutoff: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-9),
            rank_cutoff: T::lit(1e-8),
        }
    }
}
