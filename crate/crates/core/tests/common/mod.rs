//! Independent reference computations and random instance generators.
//!
//! Every oracle here works from element coordinates and dense matrices on
//! `L²(G)` directly; none of them goes through fiberization.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use fiberkit::linalg::{self, SortedSvd};
use fiberkit::{CMatrix, Cx, FiniteAbelianGroup, GroupOperator, GroupVector, ModZak, Subgroup};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type C = Cx<f64>;

pub fn cis(t: f64) -> C {
    C::new(t.cos(), t.sin())
}

/// `exp(2πi Σ a_j x_j / n_j)` from coordinates.
pub fn pairing(g: &FiniteAbelianGroup, a: usize, x: usize) -> C {
    let (ca, cx) = (g.element_at(a), g.element_at(x));
    let t: f64 = g
        .orders()
        .iter()
        .zip(ca.coords().iter().zip(cx.coords()))
        .map(|(&n, (&p, &q))| (p * q) as f64 / n as f64)
        .sum();
    cis(2.0 * PI * t)
}

pub fn modulation(g: &FiniteAbelianGroup, l: usize) -> CMatrix<f64> {
    let n = g.order();
    CMatrix::from_fn(n, n, |x, y| if x == y { pairing(g, l, x) } else { C::new(0.0, 0.0) })
}

/// `T_γ f(x) = f(x − γ)`, built from coordinates.
pub fn translation(g: &FiniteAbelianGroup, gamma: usize) -> CMatrix<f64> {
    let n = g.order();
    let cg = g.element_at(gamma);
    CMatrix::from_fn(n, n, |x, y| {
        let cx = g.element_at(x);
        let diff: Vec<i64> = cx
            .coords()
            .iter()
            .zip(cg.coords())
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect();
        let src = g.index_of(&g.element(&diff).unwrap()).unwrap();
        if src == y {
            C::new(1.0, 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    })
}

/// `F[χ, x] = |G|^{-1/2} conj⟨χ, x⟩`.
pub fn fourier(g: &FiniteAbelianGroup) -> CMatrix<f64> {
    let n = g.order();
    let s = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |c, x| pairing(g, c, x).conj() * s)
}

/// `Λ*` by brute force over `G`.
pub fn annihilator_mask(g: &FiniteAbelianGroup, lambda: &Subgroup) -> Vec<bool> {
    (0..g.order())
        .map(|x| {
            lambda
                .members()
                .iter()
                .all(|&l| (pairing(g, l, x) - C::new(1.0, 0.0)).norm() < 1e-9)
        })
        .collect()
}

/// Columns `M_λ φ`, `λ` outer and `φ` inner.
pub fn synthesis(g: &FiniteAbelianGroup, lambda: &Subgroup, gens: &[GroupVector<f64>]) -> CMatrix<f64> {
    let mem = lambda.members();
    let k = gens.len();
    CMatrix::from_fn(g.order(), mem.len() * k, |x, c| {
        pairing(g, mem[c / k], x) * gens[c % k].values()[x]
    })
}

/// Orthonormal basis of `W` and the projection onto it.
pub fn space_basis(
    g: &FiniteAbelianGroup,
    lambda: &Subgroup,
    gens: &[GroupVector<f64>],
) -> (CMatrix<f64>, CMatrix<f64>) {
    let q = SortedSvd::new(&synthesis(g, lambda, gens)).range_basis(1e-8);
    let p = &q * q.adjoint();
    (q, p)
}

/// Bounds `(lower, upper)` of `|Λ|^{-1} ΦΦ*` on its range.
pub fn frame_bounds(g: &FiniteAbelianGroup, lambda: &Subgroup, gens: &[GroupVector<f64>]) -> (f64, f64) {
    let phi = synthesis(g, lambda, gens);
    let svd = SortedSvd::new(&phi);
    let r = svd.rank(1e-8);
    if r == 0 {
        return (0.0, 0.0);
    }
    let w = lambda.order() as f64;
    (svd.sigma[r - 1].powi(2) / w, svd.sigma[0].powi(2) / w)
}

pub fn commutator_norm(a: &CMatrix<f64>, b: &CMatrix<f64>) -> f64 {
    linalg::spectral_norm(&(a * b - b * a))
}

pub fn spectral(a: &CMatrix<f64>) -> f64 {
    linalg::spectral_norm(a)
}

pub fn rc(rng: &mut ChaCha8Rng) -> C {
    C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix<f64> {
    CMatrix::from_fn(r, c, |_, _| rc(rng))
}

pub fn random_vector(g: &FiniteAbelianGroup, rng: &mut ChaCha8Rng) -> GroupVector<f64> {
    GroupVector::new(g, (0..g.order()).map(|_| rc(rng)).collect()).unwrap()
}

/// Group with order in `lo..=hi`, rank 1 to 3.
pub fn random_group(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> FiniteAbelianGroup {
    loop {
        let rank = rng.gen_range(1..=3);
        let orders: Vec<usize> = (0..rank).map(|_| rng.gen_range(2..=12)).collect();
        let n: usize = orders.iter().product();
        if (lo..=hi).contains(&n) {
            return FiniteAbelianGroup::new(orders).unwrap();
        }
    }
}

/// Subgroup generated by 0 to 2 random elements.
pub fn random_subgroup(rng: &mut ChaCha8Rng, g: &FiniteAbelianGroup) -> Subgroup {
    let k = rng.gen_range(0..=2);
    let gens: Vec<usize> = (0..k).map(|_| rng.gen_range(0..g.order())).collect();
    Subgroup::from_generator_indices(g, gens)
}

/// Subgroup other than `{0}` and `Ĝ`.
pub fn random_proper_subgroup(rng: &mut ChaCha8Rng, g: &FiniteAbelianGroup) -> Subgroup {
    loop {
        let h = random_subgroup(rng, g);
        if h.order() > 1 && h.order() < g.order() {
            return h;
        }
    }
}

/// Random `(G, Λ)` with `Λ` proper, so spaces and operators have structure.
pub fn random_setting(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> Arc<ModZak<f64>> {
    loop {
        let g = random_group(rng, lo, hi);
        if g.order() < 4 {
            continue;
        }
        // Prime cyclic groups have no proper nontrivial subgroups.
        let h = (0..20)
            .map(|_| random_subgroup(rng, &g))
            .find(|h| h.order() > 1 && h.order() < g.order());
        if let Some(h) = h {
            return ModZak::shared(&h);
        }
    }
}

/// Random operator commuting with every `M_λ`: `U[x, y] = 0` unless
/// `x − y ∈ Λ*`.
pub fn random_preserving(
    rng: &mut ChaCha8Rng,
    g: &FiniteAbelianGroup,
    lambda: &Subgroup,
) -> GroupOperator<f64> {
    let mask = annihilator_mask(g, lambda);
    let m = CMatrix::from_fn(g.order(), g.order(), |x, y| {
        if mask[g.sub(x, y)] {
            rc(rng)
        } else {
            C::new(0.0, 0.0)
        }
    });
    GroupOperator::new(g, m).unwrap()
}

/// Random unitary of size `n` from the polar factor of a random matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix<f64> {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let svd = SortedSvd::new(&random_matrix(rng, n, n));
    &svd.u * &svd.v_t
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix<f64> {
    let a = random_matrix(rng, n, n);
    (&a + a.adjoint()) * C::new(0.5, 0.0)
}
