//! Modulation-invariant subspaces `W = M^Λ(A)` of `L²(G)` and their range
//! functions `x ↦ J(x) ⊆ L²(D)`.
//!
//! `f ∈ W` exactly when `Z̃f(x) ∈ J(x)` for every fiber `x ∈ Π`, and
//! `J(x)` is the span of the generator fiber vectors `{Z̃φ(x) : φ ∈ A}`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::Transversal;
use crate::linalg::{self, rank_threshold, SortedSvd};
use crate::scalar::{creal, czero, CMatrix, CVector, Cx, Real};
use crate::transforms::{FiberedVector, GroupVector, ModZak};

/// Per-fiber orthogonal projections `P_J(x)`, stored through orthonormal
/// bases of `J(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeFunction<T: Real> {
    base: Arc<Transversal>,
    fiber_dim: usize,
    bases: Vec<CMatrix<T>>,
}

impl<T: Real> RangeFunction<T> {
    /// `J(x) = span` of the columns of `spans[x]`.
    pub fn from_fiber_spans(
        base: Arc<Transversal>,
        fiber_dim: usize,
        spans: &[CMatrix<T>],
        rank_cutoff: T,
    ) -> Result<Self> {
        if spans.len() != base.len() || spans.iter().any(|s| s.nrows() != fiber_dim) {
            return Err(Error::Shape {
                expected: format!("{} fibers of dimension {}", base.len(), fiber_dim),
                found: format!("{} fibers", spans.len()),
            });
        }
        let bases = spans
            .par_iter()
            .map(|a| SortedSvd::new(a).range_basis(rank_cutoff))
            .collect();
        Ok(Self {
            base,
            fiber_dim,
            bases,
        })
    }

    /// Accepts explicit projection matrices; each must satisfy
    /// `P² = P = P*` to `1e-10 · max(1, ‖P‖)`.
    pub fn from_projections(
        base: Arc<Transversal>,
        fiber_dim: usize,
        projections: &[CMatrix<T>],
    ) -> Result<Self> {
        if projections.len() != base.len() {
            return Err(Error::Shape {
                expected: format!("{} projections", base.len()),
                found: format!("{}", projections.len()),
            });
        }
        let tol = T::lit(1e-10);
        let mut bases = Vec::with_capacity(projections.len());
        for (x, p) in projections.iter().enumerate() {
            if p.shape() != (fiber_dim, fiber_dim) {
                return Err(Error::Shape {
                    expected: format!("{fiber_dim}x{fiber_dim} projection"),
                    found: format!("{}x{} on fiber {x}", p.nrows(), p.ncols()),
                });
            }
            let scale = p.norm().max(T::one());
            if (p * p - p).norm() > tol * scale || (p.adjoint() - p).norm() > tol * scale {
                return Err(Error::Format(format!(
                    "fiber {x}: matrix is not an orthogonal projection"
                )));
            }
            // Eigenvalues of a projection are 0 or 1; round the singular
            // values at 1/2 to read off the rank.
            let svd = SortedSvd::new(p);
            let rank = svd.sigma.iter().filter(|&&s| s > T::lit(0.5)).count();
            bases.push(svd.u.columns(0, rank).into_owned());
        }
        Ok(Self {
            base,
            fiber_dim,
            bases,
        })
    }

    pub fn base_section(&self) -> &Arc<Transversal> {
        &self.base
    }

    pub fn fiber_count(&self) -> usize {
        self.bases.len()
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    /// Orthonormal basis of `J(x)` for fiber position `p`, `|D| × rank`.
    pub fn basis(&self, p: usize) -> &CMatrix<T> {
        &self.bases[p]
    }

    pub fn projection(&self, p: usize) -> CMatrix<T> {
        linalg::projector(&self.bases[p])
    }

    pub fn projections(&self) -> Vec<CMatrix<T>> {
        (0..self.fiber_count()).map(|p| self.projection(p)).collect()
    }

    pub fn rank(&self, p: usize) -> usize {
        self.bases[p].ncols()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.bases.iter().map(|b| b.ncols()).collect()
    }

    /// `Σ_x dim J(x)`.
    pub fn dimension(&self) -> usize {
        self.bases.iter().map(|b| b.ncols()).sum()
    }

    /// Per-fiber spectral distance `‖P_J(x) − P_K(x)‖`.
    pub fn distance(&self, other: &Self) -> Result<Vec<T>> {
        if self.fiber_count() != other.fiber_count() || self.fiber_dim != other.fiber_dim {
            return Err(Error::Shape {
                expected: format!("{} fibers of dimension {}", self.fiber_count(), self.fiber_dim),
                found: format!("{} fibers of dimension {}", other.fiber_count(), other.fiber_dim),
            });
        }
        Ok((0..self.fiber_count())
            .map(|p| linalg::spectral_norm(&(self.projection(p) - other.projection(p))))
            .collect())
    }

    /// The block-diagonal projection `⊕_x P_J(x)` on the flattened fibered
    /// space.
    pub fn block_projection(&self) -> CMatrix<T> {
        let d = self.fiber_dim;
        let n = d * self.fiber_count();
        let mut out = DMatrix::from_element(n, n, czero());
        for p in 0..self.fiber_count() {
            out.view_mut((p * d, p * d), (d, d))
                .copy_from(&self.projection(p));
        }
        out
    }
}

/// Membership verdict for `f ∈ W`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Membership<T> {
    pub member: bool,
    /// `(Σ_x ‖(I − P_J(x)) Z̃f(x)‖²)^{1/2}`.
    pub residual: T,
}

/// `W = M^Λ(A)`, the smallest `Λ`-modulation-invariant subspace containing
/// the generators.
#[derive(Clone, Debug)]
pub struct ModInvariantSpace<T: Real> {
    zak: Arc<ModZak<T>>,
    generators: Vec<GroupVector<T>>,
    fibers: Vec<CMatrix<T>>,
    range: RangeFunction<T>,
    rank_cutoff: T,
}

/// Per-fiber generator matrices `A(x)` with columns `Z̃φ(x)`.
pub(crate) fn generator_fibers<T: Real>(
    zak: &ModZak<T>,
    generators: &[GroupVector<T>],
) -> Result<Vec<CMatrix<T>>> {
    let g = zak.group();
    for phi in generators {
        if phi.group() != g {
            return Err(Error::GroupMismatch);
        }
    }
    let k = generators.len();
    let cols = DMatrix::from_fn(g.order(), k, |i, j| generators[j].values()[i]);
    let fibered = zak.apply_columns(&cols);
    let d = zak.fiber_dim();
    Ok((0..zak.fiber_count())
        .map(|p| fibered.view((p * d, 0), (d, k)).into_owned())
        .collect())
}

/// Range function of `M^Λ(A)`: `J(x) = span{Z̃φ(x) : φ ∈ A}`.
pub fn range_function<T: Real>(
    zak: &ModZak<T>,
    generators: &[GroupVector<T>],
    rank_cutoff: T,
) -> Result<RangeFunction<T>> {
    let fibers = generator_fibers(zak, generators)?;
    RangeFunction::from_fiber_spans(
        zak.base_section().clone(),
        zak.fiber_dim(),
        &fibers,
        rank_cutoff,
    )
}

impl<T: Real> ModInvariantSpace<T> {
    pub fn new(zak: Arc<ModZak<T>>, generators: Vec<GroupVector<T>>, rank_cutoff: T) -> Result<Self> {
        let fibers = generator_fibers(&zak, &generators)?;
        let range = RangeFunction::from_fiber_spans(
            zak.base_section().clone(),
            zak.fiber_dim(),
            &fibers,
            rank_cutoff,
        )?;
        Ok(Self {
            zak,
            generators,
            fibers,
            range,
            rank_cutoff,
        })
    }

    /// The whole of `L²(G)`, generated by the point masses.
    pub fn full(zak: Arc<ModZak<T>>, rank_cutoff: T) -> Result<Self> {
        let g = zak.group().clone();
        let gens = (0..g.order()).map(|i| GroupVector::delta(&g, i)).collect();
        Self::new(zak, gens, rank_cutoff)
    }

    pub fn zak(&self) -> &Arc<ModZak<T>> {
        &self.zak
    }

    pub fn generators(&self) -> &[GroupVector<T>] {
        &self.generators
    }

    /// `A(x)` for fiber position `p`: columns are `Z̃φ(x)`.
    pub fn generator_fiber(&self, p: usize) -> &CMatrix<T> {
        &self.fibers[p]
    }

    pub fn range_function(&self) -> &RangeFunction<T> {
        &self.range
    }

    pub fn rank_cutoff(&self) -> T {
        self.rank_cutoff
    }

    pub fn dimension(&self) -> usize {
        self.range.dimension()
    }

    /// Columns `M_λ φ` for `λ ∈ Λ` (outer) and `φ ∈ A` (inner), computed
    /// directly on `L²(G)`.
    pub fn spanning_set(&self) -> CMatrix<T> {
        synthesis_matrix(&self.zak, &self.generators)
    }

    /// Numerical rank of the Gram matrix of `{M_λ φ}`.
    pub fn gram_rank(&self) -> usize {
        let s = self.spanning_set();
        linalg::numerical_rank(&s.ad_mul(&s), self.rank_cutoff)
    }

    /// Orthogonal projection onto `W` as a `|G| × |G|` matrix,
    /// `Z̃* (⊕_x P_J(x)) Z̃`.
    pub fn projection_operator(&self) -> CMatrix<T> {
        self.zak.defiberize_operator(&self.range.block_projection())
    }

    /// Orthonormal basis of `W`, one column per pair (fiber, basis vector
    /// of `J(x)`).
    pub fn orthonormal_basis(&self) -> CMatrix<T> {
        let d = self.zak.fiber_dim();
        let n = self.zak.group().order();
        let mut fibered = DMatrix::from_element(n, self.dimension(), czero());
        let mut col = 0;
        for p in 0..self.range.fiber_count() {
            let q = self.range.basis(p);
            for j in 0..q.ncols() {
                fibered.view_mut((p * d, col), (d, 1)).copy_from(&q.column(j));
                col += 1;
            }
        }
        self.zak.matrix().ad_mul(&fibered)
    }

    fn fibered_rows(&self, f: &GroupVector<T>) -> Result<FiberedVector<T>> {
        self.zak.apply(f)
    }

    /// Tests `Z̃f(x) ∈ J(x)` on every fiber; `member` iff the residual is at
    /// most `tol · ‖f‖`.
    pub fn membership(&self, f: &GroupVector<T>, tol: T) -> Result<Membership<T>> {
        let zf = self.fibered_rows(f)?;
        let sq = (0..self.range.fiber_count())
            .map(|p| {
                let v = zf.fiber(p);
                let q = self.range.basis(p);
                let r = &v - q * q.ad_mul(&v);
                r.norm_squared()
            })
            .fold(T::zero(), |a, b| a + b);
        let residual = sq.sqrt();
        Ok(Membership {
            member: residual <= tol * f.norm(),
            residual,
        })
    }

    /// Orthogonal projection of `f` onto `W`, applied fiberwise.
    pub fn project(&self, f: &GroupVector<T>) -> Result<GroupVector<T>> {
        let zf = self.fibered_rows(f)?;
        let d = self.zak.fiber_dim();
        let mut out = zf.values().clone();
        for p in 0..self.range.fiber_count() {
            let v = zf.fiber(p);
            let q = self.range.basis(p);
            let pv = q * q.ad_mul(&v);
            for j in 0..d {
                out[(p, j)] = pv[j];
            }
        }
        let fv = FiberedVector::new(zf.base_section().clone(), zf.fiber_section().clone(), out)?;
        self.zak.inverse(&fv)
    }

    /// Splits `W` into mutually orthogonal singly generated pieces
    /// `M^Λ(φ_1) ⊕ M^Λ(φ_2) ⊕ …`, each `{M_λ φ_n}` a Parseval frame.
    ///
    /// On every fiber the generator vectors are orthonormalized in input
    /// order, skipping those whose residual falls below the rank cutoff; the
    /// `n`-th accepted vector becomes `Z̃φ_n(x)`. Fibers with fewer accepted
    /// vectors leave `Z̃φ_n(x) = 0`.
    pub fn principal_decomposition(&self) -> Vec<GroupVector<T>> {
        let cutoff = self.rank_cutoff;
        let per_fiber: Vec<Vec<CVector<T>>> = self
            .fibers
            .par_iter()
            .map(|a| orthonormalize_columns(a, cutoff))
            .collect();
        let pieces = per_fiber.iter().map(Vec::len).max().unwrap_or(0);
        let d = self.zak.fiber_dim();
        let base = self.zak.base_section().clone();
        let fiber = self.zak.fiber_section().clone();
        (0..pieces)
            .map(|n| {
                let values = DMatrix::from_fn(base.len(), d, |p, j| {
                    per_fiber[p].get(n).map(|v| v[j]).unwrap_or_else(czero)
                });
                let fv = FiberedVector::new(base.clone(), fiber.clone(), values)
                    .expect("sections match by construction");
                self.zak.inverse(&fv).expect("sections match by construction")
            })
            .collect()
    }
}

/// Columns `M_λ φ` for `λ ∈ Λ` (outer) and `φ` (inner).
pub fn synthesis_matrix<T: Real>(zak: &ModZak<T>, generators: &[GroupVector<T>]) -> CMatrix<T> {
    let g = zak.group();
    let lambda = zak.lambda().members();
    let k = generators.len();
    DMatrix::from_fn(g.order(), lambda.len() * k, |x, c| {
        let (l, j) = (lambda[c / k], c % k);
        g.pairing_at::<T>(l, x) * generators[j].values()[x]
    })
}

/// Gram–Schmidt with one reorthogonalization pass, in column order.
fn orthonormalize_columns<T: Real>(a: &CMatrix<T>, cutoff: T) -> Vec<CVector<T>> {
    let thr = rank_threshold(linalg::spectral_norm(a), cutoff);
    let mut q: Vec<CVector<T>> = Vec::new();
    for col in a.column_iter() {
        let mut r: CVector<T> = col.into_owned();
        for _ in 0..2 {
            for e in &q {
                let c = e.dotc(&r);
                r -= e * c;
            }
        }
        let n = r.norm();
        if n > thr {
            q.push(r / creal(n));
        }
    }
    q
}

/// Outcome of a multiplicative-invariance check on the fibered space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Invariance<T> {
    pub holds: bool,
    /// Max over multipliers of `‖(I − QQ*) D Q‖` for an orthonormal basis
    /// `Q` of the subspace.
    pub defect: T,
}

/// Invariance of `span(basis)` (columns in flattened fibered coordinates)
/// under multiplication by each per-fiber function in `multipliers`.
pub fn check_invariance_under<T: Real>(
    zak: &ModZak<T>,
    basis: &CMatrix<T>,
    multipliers: &[Vec<Cx<T>>],
    tol: T,
    rank_cutoff: T,
) -> Result<Invariance<T>> {
    let n = zak.group().order();
    if basis.nrows() != n {
        return Err(Error::Shape {
            expected: format!("{n} rows"),
            found: format!("{} rows", basis.nrows()),
        });
    }
    let q = SortedSvd::new(basis).range_basis(rank_cutoff);
    let mut defect = T::zero();
    for m in multipliers {
        if m.len() != zak.fiber_count() {
            return Err(Error::Shape {
                expected: format!("{} fiber values", zak.fiber_count()),
                found: format!("{}", m.len()),
            });
        }
        let d = zak.fiber_dim();
        let dq = DMatrix::from_fn(n, q.ncols(), |i, j| m[i / d] * q[(i, j)]);
        let r = &dq - &q * q.ad_mul(&dq);
        defect = defect.max(linalg::spectral_norm(&r));
    }
    Ok(Invariance {
        holds: defect <= tol,
        defect,
    })
}

/// Invariance under the determining set `{X_λ|_Π}`, checked on the
/// generators of `Λ`.
pub fn check_multiplicative_invariance<T: Real>(
    zak: &ModZak<T>,
    basis: &CMatrix<T>,
    tol: T,
    rank_cutoff: T,
) -> Result<Invariance<T>> {
    let chars: Vec<Vec<Cx<T>>> = zak
        .lambda()
        .generator_indices()
        .iter()
        .map(|&l| zak.character_on_fibers(l))
        .collect();
    check_invariance_under(zak, basis, &chars, tol, rank_cutoff)
}

impl<T: Real> ModInvariantSpace<T> {
    /// `Z̃(W)` in flattened fibered coordinates.
    pub fn fibered_basis(&self) -> CMatrix<T> {
        self.zak.matrix() * self.orthonormal_basis()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FiniteAbelianGroup, Subgroup};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Cx<f64>;
    const CUT: f64 = 1e-8;

    fn zak(orders: Vec<usize>, gens: &[&[i64]]) -> Arc<ModZak<f64>> {
        let g = FiniteAbelianGroup::new(orders).unwrap();
        let gens: Vec<_> = gens.iter().map(|c| g.element(c).unwrap()).collect();
        ModZak::shared(&Subgroup::generate(&g, &gens).unwrap())
    }

    fn random_vector(g: &FiniteAbelianGroup, rng: &mut ChaCha8Rng) -> GroupVector<f64> {
        let v = (0..g.order())
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        GroupVector::new(g, v).unwrap()
    }

    #[test]
    fn range_function_of_delta() {
        let z = zak(vec![4], &[&[2]]);
        let g = z.group().clone();
        let rf = range_function(&z, &[GroupVector::delta(&g, 0)], CUT).unwrap();
        assert_eq!(rf.ranks(), vec![1, 0]);
        let expect = CMatrix::<f64>::from_element(2, 2, C::new(0.5, 0.0));
        assert!((rf.projection(0) - expect).norm() < 1e-12);
        assert!(rf.projection(1).norm() < 1e-15);
    }

    #[test]
    fn range_function_full_and_zero() {
        let z = zak(vec![2, 4], &[&[0, 2]]);
        let g = z.group().clone();
        let full = ModInvariantSpace::full(z.clone(), CUT).unwrap();
        for p in 0..full.range_function().fiber_count() {
            let id = CMatrix::<f64>::identity(z.fiber_dim(), z.fiber_dim());
            assert!((full.range_function().projection(p) - id).norm() < 1e-12);
        }
        let zero = range_function(&z, &[GroupVector::zeros(&g)], CUT).unwrap();
        assert!(zero.ranks().iter().all(|&r| r == 0));
    }

    #[test]
    fn membership_examples() {
        let z = zak(vec![6], &[&[2]]);
        let g = z.group().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phi = random_vector(&g, &mut rng);
        let w = ModInvariantSpace::new(z.clone(), vec![phi.clone()], CUT).unwrap();
        for &l in z.lambda().members() {
            let m = w.membership(&phi.modulate(l), 1e-10).unwrap();
            assert!(m.member && m.residual <= 1e-10);
        }
        let f = random_vector(&g, &mut rng);
        let perp = GroupVector::from_dvector(
            &g,
            f.values() - w.project(&f).unwrap().values(),
        )
        .unwrap();
        let m = w.membership(&perp, 1e-10).unwrap();
        assert!(!m.member);
        assert!((m.residual - perp.norm()).abs() < 1e-10);
        let m = w.membership(&GroupVector::zeros(&g), 1e-10).unwrap();
        assert!(m.member && m.residual == 0.0);
    }

    #[test]
    fn projection_examples() {
        let z = zak(vec![6], &[&[3]]);
        let g = z.group().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = random_vector(&g, &mut rng);
        let w = ModInvariantSpace::new(z.clone(), vec![phi.clone()], CUT).unwrap();
        let member = phi.modulate(3);
        assert!((w.project(&member).unwrap().values() - member.values()).norm() < 1e-12);

        let f = random_vector(&g, &mut rng);
        let pf = w.project(&f).unwrap();
        let rest = f.values() - pf.values();
        assert!((f.norm().powi(2) - pf.norm().powi(2) - rest.norm_squared()).abs() < 1e-12);
        let perp = GroupVector::from_dvector(&g, rest).unwrap();
        assert!(w.project(&perp).unwrap().norm() < 1e-12);
        assert!(w.membership(&pf, 1e-10).unwrap().residual <= 1e-10);

        let p = w.projection_operator();
        assert!((&p * &p - &p).norm() < 1e-12);
        assert!((p.adjoint() - &p).norm() < 1e-12);
    }

    #[test]
    fn dimension_matches_gram_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (orders, gens) in [
            (vec![12], vec![vec![3i64]]),
            (vec![2, 6], vec![vec![1i64, 2]]),
            (vec![4, 4], vec![vec![2i64, 0], vec![0, 2]]),
        ] {
            let g = FiniteAbelianGroup::new(orders).unwrap();
            let gens: Vec<_> = gens.iter().map(|c| g.element(c).unwrap()).collect();
            let z = ModZak::shared(&Subgroup::generate(&g, &gens).unwrap());
            let a = vec![random_vector(&g, &mut rng), random_vector(&g, &mut rng)];
            let w = ModInvariantSpace::new(z, a, CUT).unwrap();
            assert_eq!(w.dimension(), w.gram_rank());
        }
    }

    #[test]
    fn decomposition_single_generator_normalizes_fibers() {
        let z = zak(vec![8], &[&[2]]);
        let g = z.group().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let phi = random_vector(&g, &mut rng);
        let w = ModInvariantSpace::new(z.clone(), vec![phi.clone()], CUT).unwrap();
        let pieces = w.principal_decomposition();
        assert_eq!(pieces.len(), 1);
        let zphi = z.apply(&phi).unwrap();
        let zp = z.apply(&pieces[0]).unwrap();
        for p in 0..z.fiber_count() {
            let v = zphi.fiber(p);
            let expect = &v / C::new(v.norm(), 0.0);
            assert!((zp.fiber(p) - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn decomposition_of_full_space() {
        let z = zak(vec![2, 4], &[&[1, 0]]);
        let w = ModInvariantSpace::full(z.clone(), CUT).unwrap();
        let pieces = w.principal_decomposition();
        assert_eq!(pieces.len(), z.fiber_dim());
        let fibered: Vec<_> = pieces.iter().map(|p| z.apply(p).unwrap()).collect();
        for p in 0..z.fiber_count() {
            let m = DMatrix::from_fn(z.fiber_dim(), pieces.len(), |i, j| fibered[j].fiber(p)[i]);
            let id = CMatrix::<f64>::identity(pieces.len(), pieces.len());
            assert!((m.ad_mul(&m) - id).norm() < 1e-12);
        }
    }

    #[test]
    fn decomposition_of_zero_space_is_empty() {
        let z = zak(vec![6], &[&[2]]);
        let g = z.group().clone();
        let w = ModInvariantSpace::new(z, vec![GroupVector::zeros(&g)], CUT).unwrap();
        assert!(w.principal_decomposition().is_empty());
        assert_eq!(w.dimension(), 0);
    }

    #[test]
    fn decomposition_pieces_are_orthogonal_and_complete() {
        let z = zak(vec![3, 4], &[&[1, 2]]);
        let g = z.group().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a: Vec<_> = (0..3).map(|_| random_vector(&g, &mut rng)).collect();
        let w = ModInvariantSpace::new(z.clone(), a, CUT).unwrap();
        let pieces = w.principal_decomposition();
        let spaces: Vec<_> = pieces
            .iter()
            .map(|p| ModInvariantSpace::new(z.clone(), vec![p.clone()], CUT).unwrap())
            .collect();
        let total: usize = spaces.iter().map(|s| s.dimension()).sum();
        assert_eq!(total, w.dimension());
        for i in 0..spaces.len() {
            for j in i + 1..spaces.len() {
                let cross = spaces[i].orthonormal_basis().ad_mul(&spaces[j].orthonormal_basis());
                assert!(cross.norm() < 1e-10);
            }
        }
        let joined = ModInvariantSpace::new(z, pieces, CUT).unwrap();
        let dist = joined.range_function().distance(w.range_function()).unwrap();
        assert!(dist.iter().all(|&d| d < 1e-10));
    }

    #[test]
    fn multiplicative_invariance_examples() {
        let z = zak(vec![2, 4], &[&[0, 1]]);
        let g = z.group().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let w = ModInvariantSpace::new(z.clone(), vec![random_vector(&g, &mut rng)], CUT).unwrap();
        assert!(check_multiplicative_invariance(&z, &w.fibered_basis(), 1e-10, CUT).unwrap().holds);

        // One vector spread over two fibers whose characters differ.
        let d = z.fiber_dim();
        let mut v = CMatrix::<f64>::from_element(g.order(), 1, czero());
        v[(0, 0)] = C::new(1.0, 0.0);
        v[(d, 0)] = C::new(0.0, 1.0);
        let chars = z.character_on_fibers(z.lambda().generator_indices()[0]);
        assert!((chars[0] - chars[1]).norm() > 1e-3);
        let inv = check_multiplicative_invariance(&z, &v, 1e-10, CUT).unwrap();
        assert!(!inv.holds && inv.defect > 0.1);

        let empty = CMatrix::<f64>::zeros(g.order(), 0);
        assert!(check_multiplicative_invariance(&z, &empty, 1e-10, CUT).unwrap().holds);
    }

    #[test]
    fn invariance_upgrades_to_arbitrary_fiber_multipliers() {
        let z = zak(vec![12], &[&[4]]);
        let g = z.group().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let a = vec![random_vector(&g, &mut rng), random_vector(&g, &mut rng)];
        let w = ModInvariantSpace::new(z.clone(), a, CUT).unwrap();
        let basis = w.fibered_basis();
        let multipliers: Vec<Vec<C>> = (0..10)
            .map(|_| {
                (0..z.fiber_count())
                    .map(|_| C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                    .collect()
            })
            .collect();
        let inv = check_invariance_under(&z, &basis, &multipliers, 1e-10, CUT).unwrap();
        assert!(inv.holds, "defect {}", inv.defect);
    }

    #[test]
    fn projections_are_validated() {
        let z = zak(vec![4], &[&[2]]);
        let bad = vec![CMatrix::<f64>::identity(2, 2) * C::new(2.0, 0.0); 2];
        assert!(RangeFunction::from_projections(z.base_section().clone(), 2, &bad).is_err());
        let good = vec![
            CMatrix::<f64>::from_element(2, 2, C::new(0.5, 0.0)),
            CMatrix::<f64>::zeros(2, 2),
        ];
        let rf = RangeFunction::from_projections(z.base_section().clone(), 2, &good).unwrap();
        assert_eq!(rf.ranks(), vec![1, 0]);
    }
}
