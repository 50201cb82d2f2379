//! Frame and Riesz bounds of modulation systems `{M_λ φ : λ ∈ Λ, φ ∈ A}`.
//!
//! Sums over `Λ` carry the weight `1/|Λ|` (normalized Haar measure). Under
//! that weight the direct frame operator `S = |Λ|⁻¹ Σ_λ Σ_φ M_λφ ⊗ M_λφ` is
//! unitarily equivalent, through `Z̃`, to `⊕_x A(x) A(x)*`. With counting
//! measure instead, every direct bound picks up a factor `|Λ|`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariant::{generator_fibers, synthesis_matrix, ModInvariantSpace};
use crate::linalg::{self, SortedSvd};
use crate::ops::GroupOperator;
use crate::scalar::{creal, czero, CMatrix, Cx, Real, Tolerances};
use crate::transforms::{GroupVector, ModZak};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameKind {
    Parseval,
    Riesz,
    Frame,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberBounds<T> {
    pub fiber: usize,
    /// Smallest nonzero eigenvalue of `A(x) A(x)*`; zero on empty fibers.
    pub lower: T,
    pub upper: T,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameReport<T> {
    pub lower: T,
    pub upper: T,
    /// Empty for the direct computation.
    pub per_fiber: Vec<FiberBounds<T>>,
    /// Riesz bounds, present iff the system is linearly independent.
    pub riesz: Option<(T, T)>,
    pub kind: FrameKind,
}

/// Kind from bounds: parseval, then riesz, then frame.
pub fn classify<T: Real>(lower: T, upper: T, riesz: bool, tol: T) -> FrameKind {
    if lower <= tol {
        FrameKind::None
    } else if (lower - T::one()).abs() <= tol && (upper - T::one()).abs() <= tol {
        FrameKind::Parseval
    } else if riesz {
        FrameKind::Riesz
    } else {
        FrameKind::Frame
    }
}

fn require_generators<T: Real>(generators: &[GroupVector<T>]) -> Result<()> {
    if generators.is_empty() {
        return Err(Error::Shape {
            expected: "at least one generator".into(),
            found: "0".into(),
        });
    }
    Ok(())
}

/// Squared nonzero singular values, descending.
fn nonzero_eigenvalues<T: Real>(svd: &SortedSvd<T>, cutoff: T) -> Vec<T> {
    let r = svd.rank(cutoff);
    svd.sigma[..r].iter().map(|&s| s * s).collect()
}

/// Per-fiber bounds from `A(x)`. The global lower bound skips fibers with
/// `J(x) = {0}`; the system is Riesz iff every fiber has rank `|A|`.
pub fn fiber_frame_bounds<T: Real>(
    zak: &ModZak<T>,
    generators: &[GroupVector<T>],
    tols: &Tolerances<T>,
) -> Result<FrameReport<T>> {
    require_generators(generators)?;
    let fibers = generator_fibers(zak, generators)?;
    Ok(report_from_fibers(&fibers, tols))
}

/// Same as [`fiber_frame_bounds`] for the generators of `w`.
pub fn space_frame_bounds<T: Real>(
    w: &ModInvariantSpace<T>,
    tols: &Tolerances<T>,
) -> Result<FrameReport<T>> {
    fiber_frame_bounds(w.zak(), w.generators(), tols)
}

fn report_from_fibers<T: Real>(fibers: &[CMatrix<T>], tols: &Tolerances<T>) -> FrameReport<T> {
    let k = fibers.first().map_or(0, |a| a.ncols());
    let summaries: Vec<(FiberBounds<T>, T, T)> = fibers
        .par_iter()
        .enumerate()
        .map(|(p, a)| {
            let svd = SortedSvd::new(a);
            let ev = nonzero_eigenvalues(&svd, tols.rank_cutoff);
            let upper = ev.first().copied().unwrap_or_else(T::zero);
            let lower = ev.last().copied().unwrap_or_else(T::zero);
            // Gram eigenvalues: all k of them, zeros included.
            let gram_min = if ev.len() == k { lower } else { T::zero() };
            let b = FiberBounds {
                fiber: p,
                lower,
                upper,
                rank: ev.len(),
            };
            (b, gram_min, upper)
        })
        .collect();

    let mut lower: Option<T> = None;
    let mut upper = T::zero();
    let mut riesz_ok = k > 0;
    let mut riesz_lo: Option<T> = None;
    for (b, gram_min, _) in &summaries {
        if b.rank > 0 {
            lower = Some(lower.map_or(b.lower, |l| l.min(b.lower)));
        }
        upper = upper.max(b.upper);
        if b.rank < k {
            riesz_ok = false;
        }
        riesz_lo = Some(riesz_lo.map_or(*gram_min, |l| l.min(*gram_min)));
    }
    let lower = lower.unwrap_or_else(T::zero);
    let riesz = if riesz_ok {
        Some((riesz_lo.unwrap_or_else(T::zero), upper))
    } else {
        None
    };
    FrameReport {
        lower,
        upper,
        per_fiber: summaries.into_iter().map(|(b, _, _)| b).collect(),
        kind: classify(lower, upper, riesz.is_some(), tols.tol),
        riesz,
    }
}

/// Riesz bounds from the fiber Gram matrices `A(x)* A(x)`.
pub fn fiber_riesz_bounds<T: Real>(
    zak: &ModZak<T>,
    generators: &[GroupVector<T>],
    tols: &Tolerances<T>,
) -> Result<(T, T)> {
    let report = fiber_frame_bounds(zak, generators, tols)?;
    if let Some(b) = report.riesz {
        return Ok(b);
    }
    let bad = report
        .per_fiber
        .iter()
        .find(|b| b.rank < generators.len())
        .expect("a rank-deficient fiber exists");
    Err(Error::RieszRank {
        fiber: bad.fiber,
        rank: bad.rank,
        generators: generators.len(),
    })
}

/// Oracle: bounds of `|Λ|^{-1/2} Φ` where `Φ` is the synthesis matrix of the
/// full system on `L²(G)`, with no fiberization.
pub fn direct_frame_bounds<T: Real>(
    zak: &ModZak<T>,
    generators: &[GroupVector<T>],
    tols: &Tolerances<T>,
) -> Result<FrameReport<T>> {
    require_generators(generators)?;
    for g in generators {
        if g.group() != zak.group() {
            return Err(Error::GroupMismatch);
        }
    }
    let weight = creal(T::one() / T::lit(zak.lambda().order() as f64).sqrt());
    let phi = synthesis_matrix(zak, generators) * weight;
    let svd = SortedSvd::new(&phi);
    let ev = nonzero_eigenvalues(&svd, tols.rank_cutoff);
    let upper = ev.first().copied().unwrap_or_else(T::zero);
    let lower = ev.last().copied().unwrap_or_else(T::zero);
    let riesz = (ev.len() == phi.ncols()).then_some((lower, upper));
    Ok(FrameReport {
        lower,
        upper,
        per_fiber: Vec::new(),
        kind: classify(lower, upper, riesz.is_some(), tols.tol),
        riesz,
    })
}

/// `max_x ‖A(x) A(x)* − P_J(x)‖`; zero iff the system is a Parseval frame
/// for `W`.
pub fn parseval_defect<T: Real>(w: &ModInvariantSpace<T>) -> T {
    let rf = w.range_function();
    (0..rf.fiber_count())
        .into_par_iter()
        .map(|p| {
            let a = w.generator_fiber(p);
            linalg::spectral_norm(&(a * a.adjoint() - rf.projection(p)))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(T::zero(), |a, b| a.max(b))
}

/// `(Σ ‖U e‖², Σ ⟨U e, e⟩)` over the weighted Parseval system
/// `e = |Λ|^{-1/2} M_λ φ_n`. For Parseval pieces `φ_n` of `W` these equal
/// `‖U P_W‖²_HS` and `tr(U P_W)`.
pub fn parseval_hs_and_trace<T: Real>(
    u: &GroupOperator<T>,
    zak: &ModZak<T>,
    pieces: &[GroupVector<T>],
) -> (T, Cx<T>) {
    let weight = creal(T::one() / T::lit(zak.lambda().order() as f64).sqrt());
    let e = synthesis_matrix(zak, pieces) * weight;
    let ue = u.matrix() * &e;
    let hs = ue.norm_squared();
    let tr = ue
        .column_iter()
        .zip(e.column_iter())
        .map(|(a, b)| b.dotc(&a))
        .fold(czero(), |s, c| s + c);
    (hs, tr)
}
