//! Range operators: the fiberwise form `Z̃(Uφ)(x) = R(x) Z̃φ(x)` of a
//! modulation-preserving operator `U` on a modulation-invariant space `W`.
//!
//! Conventions:
//! - `R(x)` is stored as a `|D| × |D|` matrix with `R(x) = R(x) P_J(x)`,
//!   i.e. extended by zero on `J(x)⊥`.
//! - A reconstructed `U` acts as `0` on `W⊥`, so identities comparing `U`
//!   and `R` are stated for `U` restricted to `W`, i.e. for `U P_W`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::Transversal;
use crate::invariant::{ModInvariantSpace, RangeFunction};
use crate::linalg::{self, SortedSvd};
use crate::ops::{is_modulation_preserving, GroupOperator};
use crate::scalar::{czero, CMatrix, Cx, Real};

/// Tolerance for domain agreement between a range operator and a space.
const DOMAIN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct RangeOperator<T: Real> {
    base: Arc<Transversal>,
    fibers: Vec<CMatrix<T>>,
    residuals: Vec<T>,
    domain: RangeFunction<T>,
}

impl<T: Real> RangeOperator<T> {
    /// Wraps per-fiber matrices, restricting each to its domain
    /// (`R(x) ← R(x) P_J(x)`).
    pub fn from_fibers(domain: RangeFunction<T>, fibers: Vec<CMatrix<T>>) -> Result<Self> {
        let d = domain.fiber_dim();
        if fibers.len() != domain.fiber_count() {
            return Err(Error::Shape {
                expected: format!("{} fiber matrices", domain.fiber_count()),
                found: format!("{}", fibers.len()),
            });
        }
        let mut restricted = Vec::with_capacity(fibers.len());
        for (p, r) in fibers.into_iter().enumerate() {
            if r.shape() != (d, d) {
                return Err(Error::Shape {
                    expected: format!("{d}x{d} fiber matrix"),
                    found: format!("{}x{} on fiber {p}", r.nrows(), r.ncols()),
                });
            }
            restricted.push(r * domain.projection(p));
        }
        let n = restricted.len();
        Ok(Self {
            base: domain.base_section().clone(),
            fibers: restricted,
            residuals: vec![T::zero(); n],
            domain,
        })
    }

    /// The identity on each `J(x)`, i.e. `R(x) = P_J(x)`.
    pub fn identity_on(domain: &RangeFunction<T>) -> Self {
        let fibers = domain.projections();
        Self {
            base: domain.base_section().clone(),
            residuals: vec![T::zero(); fibers.len()],
            fibers,
            domain: domain.clone(),
        }
    }

    pub fn base_section(&self) -> &Arc<Transversal> {
        &self.base
    }

    pub fn domain(&self) -> &RangeFunction<T> {
        &self.domain
    }

    pub fn fibers(&self) -> &[CMatrix<T>] {
        &self.fibers
    }

    pub fn fiber(&self, p: usize) -> &CMatrix<T> {
        &self.fibers[p]
    }

    /// Well-definedness residuals from extraction (zero for constructed
    /// operators).
    pub fn residuals(&self) -> &[T] {
        &self.residuals
    }

    /// `‖R(x)‖` per fiber.
    pub fn norm_profile(&self) -> Vec<T> {
        self.fibers.par_iter().map(linalg::spectral_norm).collect()
    }

    /// `max_x ‖R(x)‖`, which equals `‖U P_W‖`.
    pub fn sup_norm(&self) -> T {
        self.norm_profile()
            .into_iter()
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Full singular-value list per fiber. In finite dimensions every fiber
    /// is compact, so this is reported rather than tested.
    pub fn singular_value_profile(&self) -> Vec<Vec<T>> {
        self.fibers.par_iter().map(linalg::singular_values).collect()
    }

    /// `‖R(x)‖_HS` per fiber.
    pub fn hs_profile(&self) -> Vec<T> {
        self.fibers.iter().map(|r| r.norm()).collect()
    }

    /// `(Σ_x ‖R(x)‖²_HS)^{1/2}`.
    pub fn hs_norm_fiberwise(&self) -> T {
        self.fibers
            .iter()
            .map(|r| r.norm_squared())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// `Σ_x tr R(x)`; because `R(x) = R(x) P_J(x)` this is the trace over
    /// `J(x)`.
    pub fn trace_fiberwise(&self) -> Cx<T> {
        self.fibers
            .iter()
            .map(linalg::trace)
            .fold(czero(), |a, b| a + b)
    }

    /// Per-fiber defect `‖R(x)* R(x) − P_J(x)‖`.
    pub fn isometry_defects(&self) -> Vec<T> {
        (0..self.fibers.len())
            .map(|p| {
                let r = &self.fibers[p];
                linalg::spectral_norm(&(r.ad_mul(r) - self.domain.projection(p)))
            })
            .collect()
    }

    /// `R(x)` is isometric on `J(x)` for every fiber.
    pub fn is_isometry_fiberwise(&self, tol: T) -> bool {
        self.isometry_defects().into_iter().all(|d| d <= tol)
    }

    /// Per-fiber defect `‖R(x) − R(x)*‖`. Zero forces `R(x)` to map `J(x)`
    /// into itself.
    pub fn self_adjoint_defects(&self) -> Vec<T> {
        self.fibers
            .iter()
            .map(|r| linalg::spectral_norm(&(r - r.adjoint())))
            .collect()
    }

    pub fn is_self_adjoint_fiberwise(&self, tol: T) -> bool {
        self.self_adjoint_defects().into_iter().all(|d| d <= tol)
    }

    /// Per-fiber `‖(I − P_J(x)) R(x)‖`, zero iff `R(x) J(x) ⊆ J(x)`.
    pub fn invariance_defects(&self) -> Vec<T> {
        (0..self.fibers.len())
            .map(|p| {
                let r = &self.fibers[p];
                linalg::spectral_norm(&(r - self.domain.projection(p) * r))
            })
            .collect()
    }

    /// Fiberwise `P_J(x) R(x)* P_J(x)`, the range operator of `U*` on `W`.
    /// Requires `R(x) J(x) ⊆ J(x)` on every fiber.
    pub fn adjoint(&self, tol: T) -> Result<Self> {
        for (p, d) in self.invariance_defects().into_iter().enumerate() {
            if d > tol * linalg::spectral_norm(&self.fibers[p]).max(T::one()) {
                return Err(Error::DomainNotInvariant {
                    fiber: p,
                    defect: d.to_f64_lossy(),
                });
            }
        }
        let fibers = (0..self.fibers.len())
            .map(|p| {
                let pj = self.domain.projection(p);
                &pj * self.fibers[p].adjoint() * &pj
            })
            .collect();
        Ok(Self {
            base: self.base.clone(),
            fibers,
            residuals: vec![T::zero(); self.fibers.len()],
            domain: self.domain.clone(),
        })
    }

    /// Block-diagonal operator `⊕_x R(x)` on the flattened fibered space.
    pub fn block_matrix(&self) -> CMatrix<T> {
        let d = self.domain.fiber_dim();
        let n = d * self.fibers.len();
        let mut out = DMatrix::from_element(n, n, czero());
        for (p, r) in self.fibers.iter().enumerate() {
            out.view_mut((p * d, p * d), (d, d)).copy_from(r);
        }
        out
    }

    /// Largest per-fiber `‖R(x) − S(x)‖`.
    pub fn max_fiber_distance(&self, other: &Self) -> T {
        self.fibers
            .iter()
            .zip(&other.fibers)
            .map(|(a, b)| linalg::spectral_norm(&(a - b)))
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// Extracts `R(x) = B(x) A(x)⁺` where `A(x)` holds the generator fiber
/// vectors `Z̃φ(x)` and `B(x)` the image fiber vectors `Z̃(Uφ)(x)`.
///
/// Fails with [`Error::NotPreserving`] if `U` does not commute with the
/// modulations on `W`, and with [`Error::WellDefinedness`] if some fiber
/// has `‖B − R A‖ / max(1, ‖A‖) > tol`.
pub fn extract_range_operator<T: Real>(
    u: &GroupOperator<T>,
    w: &ModInvariantSpace<T>,
    tol: T,
) -> Result<RangeOperator<T>> {
    let zak = w.zak();
    if u.group() != zak.group() {
        return Err(Error::GroupMismatch);
    }
    // U only needs to commute with M_λ on W; since P_W commutes with every
    // M_λ this is the same as U P_W commuting with them.
    let restricted = GroupOperator::new(u.group(), u.matrix() * w.projection_operator())?;
    let pres = is_modulation_preserving(&restricted, zak.lambda(), tol);
    if !pres.holds {
        return Err(Error::NotPreserving {
            defect: pres.defect.to_f64_lossy(),
            threshold: pres.threshold.to_f64_lossy(),
        });
    }

    let g = zak.group();
    let k = w.generators().len();
    let images = DMatrix::from_fn(g.order(), k, |i, j| w.generators()[j].values()[i]);
    let fibered_images = zak.apply_columns(&(u.matrix() * images));
    let d = zak.fiber_dim();
    let cutoff = w.rank_cutoff();

    let per_fiber: Vec<(CMatrix<T>, T)> = (0..zak.fiber_count())
        .into_par_iter()
        .map(|p| {
            let a = w.generator_fiber(p);
            let b = fibered_images.view((p * d, 0), (d, k)).into_owned();
            let svd = SortedSvd::new(a);
            let r = &b * svd.pseudo_inverse(cutoff);
            let scale = svd.sigma_max().max(T::one());
            let residual = linalg::spectral_norm(&(&b - &r * a)) / scale;
            (r, residual)
        })
        .collect();

    for (p, (_, residual)) in per_fiber.iter().enumerate() {
        if *residual > tol {
            return Err(Error::WellDefinedness {
                fiber: p,
                residual: residual.to_f64_lossy(),
                tol: tol.to_f64_lossy(),
            });
        }
    }
    let (fibers, residuals): (Vec<_>, Vec<_>) = per_fiber.into_iter().unzip();
    Ok(RangeOperator {
        base: zak.base_section().clone(),
        fibers,
        residuals,
        domain: w.range_function().clone(),
    })
}

/// `U = Z̃* (⊕_x R(x)) Z̃`, acting as `0` on `W⊥`.
pub fn reconstruct_operator<T: Real>(
    r: &RangeOperator<T>,
    w: &ModInvariantSpace<T>,
) -> Result<GroupOperator<T>> {
    let dist = r.domain.distance(w.range_function())?;
    for (p, d) in dist.into_iter().enumerate() {
        if d > T::lit(DOMAIN_TOL) {
            return Err(Error::DomainMismatch {
                fiber: p,
                distance: d.to_f64_lossy(),
            });
        }
    }
    let zak = w.zak();
    GroupOperator::new(zak.group(), zak.defiberize_operator(&r.block_matrix()))
}

/// `U P_W`, the operator restricted to `W` and extended by zero.
pub fn restrict_to<T: Real>(u: &GroupOperator<T>, w: &ModInvariantSpace<T>) -> GroupOperator<T> {
    GroupOperator::new(u.group(), u.matrix() * w.projection_operator())
        .expect("projection has the operator's shape")
}

/// `‖P_W U* U P_W − P_W‖`: zero iff `U` is isometric on `W`.
pub fn isometry_defect_on<T: Real>(u: &GroupOperator<T>, w: &ModInvariantSpace<T>) -> T {
    let p = w.projection_operator();
    let up = u.matrix() * &p;
    linalg::spectral_norm(&(up.ad_mul(&up) - p))
}

/// `‖U P_W − (U P_W)*‖`: zero iff `U` maps `W` into `W` and is
/// self-adjoint there.
pub fn self_adjoint_defect_on<T: Real>(u: &GroupOperator<T>, w: &ModInvariantSpace<T>) -> T {
    let up = u.matrix() * w.projection_operator();
    linalg::spectral_norm(&(&up - up.adjoint()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FiniteAbelianGroup, Subgroup};
    use crate::transforms::{GroupVector, ModZak};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Cx<f64>;
    const CUT: f64 = 1e-8;

    fn setup(orders: Vec<usize>, gens: &[&[i64]]) -> Arc<ModZak<f64>> {
        let g = FiniteAbelianGroup::new(orders).unwrap();
        let gens: Vec<_> = gens.iter().map(|c| g.element(c).unwrap()).collect();
        ModZak::shared(&Subgroup::generate(&g, &gens).unwrap())
    }

    fn rc(rng: &mut ChaCha8Rng) -> C {
        C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    fn random_vector(g: &FiniteAbelianGroup, rng: &mut ChaCha8Rng) -> GroupVector<f64> {
        GroupVector::new(g, (0..g.order()).map(|_| rc(rng)).collect()).unwrap()
    }

    /// Random operator commuting with every `M_λ`: entries vanish unless
    /// `x − y ∈ Λ*`.
    fn random_preserving(z: &ModZak<f64>, rng: &mut ChaCha8Rng) -> GroupOperator<f64> {
        let g = z.group();
        let ann = z.annihilator();
        let m = DMatrix::from_fn(g.order(), g.order(), |x, y| {
            if ann.contains_index(g.sub(x, y)) {
                rc(rng)
            } else {
                czero()
            }
        });
        GroupOperator::new(g, m).unwrap()
    }

    fn cis(t: f64) -> C {
        C::new(t.cos(), t.sin())
    }

    #[test]
    fn identity_gives_projections() {
        let z = setup(vec![2, 4], &[&[0, 2]]);
        let g = z.group().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = ModInvariantSpace::new(z.clone(), vec![random_vector(&g, &mut rng)], CUT).unwrap();
        let r = extract_range_operator(&GroupOperator::identity(&g), &w, 1e-9).unwrap();
        for p in 0..z.fiber_count() {
            assert!((r.fiber(p) - w.range_function().projection(p)).norm() < 1e-10);
        }
        assert!(r.is_isometry_fiberwise(1e-9) && r.is_self_adjoint_fiberwise(1e-9));
        assert_eq!(r.trace_fiberwise().re.round() as usize, w.dimension());
        assert!((r.hs_norm_fiberwise().powi(2) - w.dimension() as f64).abs() < 1e-9);
        let norms = r.norm_profile();
        for (p, n) in norms.iter().enumerate() {
            let expect = if w.range_function().rank(p) > 0 { 1.0 } else { 0.0 };
            assert!((n - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn one_plus_modulation_on_cyclic_group() {
        let n = 16;
        let z = setup(vec![n], &[&[1]]);
        let g = z.group().clone();
        let w = ModInvariantSpace::full(z.clone(), CUT).unwrap();
        let u = GroupOperator::identity(&g).plus(&GroupOperator::modulation(&g, 1));
        let r = extract_range_operator(&u, &w, 1e-9).unwrap();
        assert_eq!(z.fiber_dim(), 1);
        for (p, &x) in z.base_section().reps().iter().enumerate() {
            let expect = C::new(1.0, 0.0) + cis(2.0 * std::f64::consts::PI * x as f64 / n as f64);
            assert!((r.fiber(p)[(0, 0)] - expect).norm() < 1e-12);
        }
        assert!((r.sup_norm() - 2.0).abs() < 1e-12);
        assert!((r.hs_norm_fiberwise().powi(2) - 2.0 * n as f64).abs() < 1e-9);
        let adj = r.adjoint(1e-9).unwrap();
        for p in 0..n {
            assert!((adj.fiber(p)[(0, 0)] - r.fiber(p)[(0, 0)].conj()).norm() < 1e-12);
        }
        let from_adjoint = extract_range_operator(&u.adjoint(), &w, 1e-9).unwrap();
        assert!(adj.max_fiber_distance(&from_adjoint) < 1e-10);
    }

    #[test]
    fn modulation_gives_character_times_projection() {
        let z = setup(vec![12], &[&[3]]);
        let g = z.group().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = ModInvariantSpace::new(
            z.clone(),
            vec![random_vector(&g, &mut rng), random_vector(&g, &mut rng)],
            CUT,
        )
        .unwrap();
        let l0 = 6;
        let r = extract_range_operator(&GroupOperator::modulation(&g, l0), &w, 1e-9).unwrap();
        let chars = z.character_on_fibers(l0);
        for p in 0..z.fiber_count() {
            let expect = w.range_function().projection(p) * chars[p];
            assert!((r.fiber(p) - expect).norm() < 1e-10);
        }
        assert!(r.is_isometry_fiberwise(1e-9));
        // Characters of order 2: values ±1, so self-adjoint as well.
        assert!(r.is_self_adjoint_fiberwise(1e-9));
        let r = extract_range_operator(&GroupOperator::modulation(&g, 3), &w, 1e-9).unwrap();
        assert!(r.is_isometry_fiberwise(1e-9));
        assert!(!r.is_self_adjoint_fiberwise(1e-9));
    }

    #[test]
    fn rejects_non_preserving() {
        let z = setup(vec![6], &[&[1]]);
        let g = z.group().clone();
        let w = ModInvariantSpace::full(z, CUT).unwrap();
        let err = extract_range_operator(&GroupOperator::translation(&g, 1), &w, 1e-9);
        assert!(matches!(err, Err(Error::NotPreserving { .. })));
    }

    #[test]
    fn round_trip_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = setup(vec![2, 4], &[&[1, 2]]);
        let g = z.group().clone();
        for _ in 0..5 {
            let w = ModInvariantSpace::new(z.clone(), vec![random_vector(&g, &mut rng)], CUT).unwrap();
            let u = random_preserving(&z, &mut rng);
            let r = extract_range_operator(&u, &w, 1e-9).unwrap();
            let back = reconstruct_operator(&r, &w).unwrap();
            assert!((back.matrix() - restrict_to(&u, &w).matrix()).norm() < 1e-10);
            let again = extract_range_operator(&back, &w, 1e-9).unwrap();
            assert!(again.max_fiber_distance(&r) < 1e-10);
            assert!((r.sup_norm() - restrict_to(&u, &w).operator_norm()).abs() < 1e-9);
            assert!(is_modulation_preserving(&back, z.lambda(), 1e-9).holds);
        }
    }

    #[test]
    fn reconstruct_examples() {
        let z = setup(vec![6], &[&[2]]);
        let g = z.group().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = ModInvariantSpace::new(z.clone(), vec![random_vector(&g, &mut rng)], CUT).unwrap();
        let id = RangeOperator::identity_on(w.range_function());
        let p = reconstruct_operator(&id, &w).unwrap();
        assert!((p.matrix() - w.projection_operator()).norm() < 1e-12);

        let c = C::new(0.5, -2.0);
        let scaled = RangeOperator::from_fibers(
            w.range_function().clone(),
            vec![CMatrix::<f64>::identity(z.fiber_dim(), z.fiber_dim()) * c; z.fiber_count()],
        )
        .unwrap();
        let u = reconstruct_operator(&scaled, &w).unwrap();
        assert!((u.matrix() - w.projection_operator() * c).norm() < 1e-12);

        let other = ModInvariantSpace::full(z, CUT).unwrap();
        assert!(matches!(
            reconstruct_operator(&scaled, &other),
            Err(Error::DomainMismatch { .. })
        ));
    }

    #[test]
    fn rank_one_fiber_hs_and_trace() {
        let z = setup(vec![4], &[&[1]]);
        let w = ModInvariantSpace::full(z.clone(), CUT).unwrap();
        let mut fibers = vec![CMatrix::<f64>::zeros(1, 1); 4];
        fibers[2][(0, 0)] = C::new(3.0, 0.0);
        let r = RangeOperator::from_fibers(w.range_function().clone(), fibers).unwrap();
        assert!((r.hs_norm_fiberwise() - 3.0).abs() < 1e-12);
        assert!((r.trace_fiberwise().norm() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_range_operator() {
        let z = setup(vec![6], &[&[3]]);
        let w = ModInvariantSpace::full(z.clone(), CUT).unwrap();
        let d = z.fiber_dim();
        let r = RangeOperator::from_fibers(
            w.range_function().clone(),
            vec![CMatrix::<f64>::zeros(d, d); z.fiber_count()],
        )
        .unwrap();
        assert!(r.norm_profile().iter().all(|&n| n == 0.0));
        assert_eq!(r.sup_norm(), 0.0);
    }

    #[test]
    fn adjoint_requires_invariance() {
        let z = setup(vec![4], &[&[2]]);
        let g = z.group().clone();
        let w = ModInvariantSpace::new(z.clone(), vec![GroupVector::delta(&g, 0)], CUT).unwrap();
        // J(x_0) = span (1,1)/√2; map it onto (1,-1)/√2, outside J.
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[C::new(0.5, 0.0), C::new(0.5, 0.0), C::new(-0.5, 0.0), C::new(-0.5, 0.0)],
        );
        let r = RangeOperator::from_fibers(
            w.range_function().clone(),
            vec![m, CMatrix::<f64>::zeros(2, 2)],
        )
        .unwrap();
        assert!(matches!(r.adjoint(1e-9), Err(Error::DomainNotInvariant { .. })));
    }

    #[test]
    fn random_adjoint_matches_extracted_adjoint() {
        let z = setup(vec![4], &[&[2]]);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let w = ModInvariantSpace::full(z.clone(), CUT).unwrap();
        let fibers = (0..z.fiber_count())
            .map(|_| DMatrix::from_fn(2, 2, |_, _| rc(&mut rng)))
            .collect();
        let r = RangeOperator::from_fibers(w.range_function().clone(), fibers).unwrap();
        let u = reconstruct_operator(&r, &w).unwrap();
        let extracted = extract_range_operator(&u.adjoint(), &w, 1e-9).unwrap();
        assert!(r.adjoint(1e-9).unwrap().max_fiber_distance(&extracted) < 1e-10);
    }

    #[test]
    fn per_fiber_norm_bounded_by_operator_norm() {
        let z = setup(vec![3, 4], &[&[0, 1]]);
        let g = z.group().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = ModInvariantSpace::new(
            z.clone(),
            vec![random_vector(&g, &mut rng), random_vector(&g, &mut rng)],
            CUT,
        )
        .unwrap();
        let u = random_preserving(&z, &mut rng);
        let r = extract_range_operator(&u, &w, 1e-9).unwrap();
        let bound = u.operator_norm();
        assert!(r.norm_profile().iter().all(|&n| n <= bound + 1e-9));
        assert!(r.residuals().iter().all(|&e| e <= 1e-10));
        assert_eq!(r.singular_value_profile().len(), z.fiber_count());
    }
}
