//! Dense complex linear algebra helpers.
//!
//! Matrices are nalgebra types throughout; singular value decompositions are
//! delegated to faer, whose complex SVD stays backward stable on the
//! rank-deficient fiber matrices produced here.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::svd::{svd, svd_scratch, ComputeSvdVectors};
use faer::diag::Diag;
use faer::{Mat, Par};
use nalgebra::{Complex, DMatrix, RealField};

use crate::scalar::{CMatrix, Real};

/// Singular values (descending) and optionally thin factors `(U, V)`.
pub struct RawSvd<T: RealField> {
    pub sigma: Vec<T>,
    pub factors: Option<(CMatrix<T>, CMatrix<T>)>,
}

/// Scalars with an SVD backend; implemented for `f32` and `f64`.
pub trait SvdBackend: RealField + Copy {
    fn svd(m: &CMatrix<Self>, vectors: bool) -> RawSvd<Self>;
}

fn faer_svd<T>(m: &CMatrix<T>, vectors: bool) -> RawSvd<T>
where
    T: RealField + Copy,
    Complex<T>: faer::traits::ComplexField<Real = T>,
{
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return RawSvd {
            sigma: Vec::new(),
            factors: vectors.then(|| (DMatrix::zeros(r, 0), DMatrix::zeros(c, 0))),
        };
    }
    let a = Mat::<Complex<T>>::from_fn(r, c, |i, j| m[(i, j)]);
    let mut s = Diag::<Complex<T>>::zeros(k);
    let mut u = Mat::<Complex<T>>::zeros(r, if vectors { k } else { 0 });
    let mut v = Mat::<Complex<T>>::zeros(c, if vectors { k } else { 0 });
    let mode = if vectors {
        ComputeSvdVectors::Thin
    } else {
        ComputeSvdVectors::No
    };
    let mut buf = MemBuffer::new(svd_scratch::<Complex<T>>(
        r,
        c,
        mode,
        mode,
        Par::Seq,
        Default::default(),
    ));
    svd(
        a.as_ref(),
        s.as_mut(),
        vectors.then(|| u.as_mut()),
        vectors.then(|| v.as_mut()),
        Par::Seq,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .expect("svd of a finite matrix converges");
    let sigma = s.column_vector().iter().map(|x| x.re).collect();
    let factors = vectors.then(|| {
        (
            DMatrix::from_fn(r, k, |i, j| u[(i, j)]),
            DMatrix::from_fn(c, k, |i, j| v[(i, j)]),
        )
    });
    RawSvd { sigma, factors }
}

impl SvdBackend for f64 {
    fn svd(m: &CMatrix<Self>, vectors: bool) -> RawSvd<Self> {
        faer_svd(m, vectors)
    }
}

impl SvdBackend for f32 {
    fn svd(m: &CMatrix<Self>, vectors: bool) -> RawSvd<Self> {
        faer_svd(m, vectors)
    }
}

/// Singular-value threshold: values at or below `cutoff · max(1, σ_max)`
/// count as zero.
pub fn rank_threshold<T: Real>(sigma_max: T, cutoff: T) -> T {
    cutoff * sigma_max.max(T::one())
}

/// Thin SVD with singular values sorted in descending order.
pub struct SortedSvd<T: Real> {
    pub u: CMatrix<T>,
    pub sigma: Vec<T>,
    pub v_t: CMatrix<T>,
}

impl<T: Real> SortedSvd<T> {
    pub fn new(m: &CMatrix<T>) -> Self {
        let raw = T::svd(m, true);
        let (u, v) = raw.factors.expect("factors requested");
        Self {
            u,
            sigma: raw.sigma,
            v_t: v.adjoint(),
        }
    }

    pub fn sigma_max(&self) -> T {
        self.sigma.first().copied().unwrap_or_else(T::zero)
    }

    /// Numerical rank under the relative cutoff.
    pub fn rank(&self, cutoff: T) -> usize {
        let thr = rank_threshold(self.sigma_max(), cutoff);
        self.sigma.iter().take_while(|&&s| s > thr).count()
    }

    /// Orthonormal basis of the column space (first `rank` left vectors).
    pub fn range_basis(&self, cutoff: T) -> CMatrix<T> {
        let r = self.rank(cutoff);
        self.u.columns(0, r).into_owned()
    }

    pub fn pseudo_inverse(&self, cutoff: T) -> CMatrix<T> {
        let r = self.rank(cutoff);
        let mut v = self.v_t.rows(0, r).adjoint();
        for (j, mut col) in v.column_iter_mut().enumerate() {
            col /= Complex::new(self.sigma[j], T::zero());
        }
        v * self.u.columns(0, r).adjoint()
    }
}

/// Singular values in descending order.
pub fn singular_values<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    T::svd(m, false).sigma
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(m: &CMatrix<T>) -> T {
    singular_values(m).first().copied().unwrap_or_else(T::zero)
}

pub fn numerical_rank<T: Real>(m: &CMatrix<T>, cutoff: T) -> usize {
    let s = singular_values(m);
    let thr = rank_threshold(s.first().copied().unwrap_or_else(T::zero), cutoff);
    s.iter().take_while(|&&x| x > thr).count()
}

/// `Q Q*` for a matrix with orthonormal columns.
pub fn projector<T: Real>(q: &CMatrix<T>) -> CMatrix<T> {
    q * q.adjoint()
}

pub fn trace<T: Real>(m: &CMatrix<T>) -> Complex<T> {
    m.diagonal().iter().fold(Complex::new(T::zero(), T::zero()), |a, &b| a + b)
}
