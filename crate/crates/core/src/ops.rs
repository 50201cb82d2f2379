//! Bounded operators on `L²(G)` as dense matrices, the translation and
//! modulation families, and commutation predicates.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, Subgroup};
use crate::linalg;
use crate::scalar::{cone, czero, CMatrix, Cx, Real};
use crate::transforms::{FourierTransform, GroupVector};

#[derive(Clone, Debug, PartialEq)]
pub struct GroupOperator<T: Real> {
    group: FiniteAbelianGroup,
    matrix: CMatrix<T>,
}

/// Outcome of a commutation check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preservation<T> {
    pub holds: bool,
    /// Max over generators of the spectral norm of the commutator.
    pub defect: T,
    /// `tol · max(1, ‖U‖)`.
    pub threshold: T,
}

impl<T: Real> GroupOperator<T> {
    pub fn new(group: &FiniteAbelianGroup, matrix: CMatrix<T>) -> Result<Self> {
        let n = group.order();
        if matrix.shape() != (n, n) {
            return Err(Error::Shape {
                expected: format!("{n}x{n} operator"),
                found: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        Ok(Self {
            group: group.clone(),
            matrix,
        })
    }

    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        let n = group.order();
        Self {
            group: group.clone(),
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(group: &FiniteAbelianGroup) -> Self {
        let n = group.order();
        Self {
            group: group.clone(),
            matrix: DMatrix::from_element(n, n, czero()),
        }
    }

    /// `T_γ f(x) = f(x − γ)`, a permutation matrix.
    pub fn translation(group: &FiniteAbelianGroup, gamma: usize) -> Self {
        let n = group.order();
        let mut matrix = DMatrix::from_element(n, n, czero());
        for x in 0..n {
            matrix[(x, group.sub(x, gamma))] = cone();
        }
        Self {
            group: group.clone(),
            matrix,
        }
    }

    /// `M_λ f(x) = <λ, x> f(x)`.
    pub fn modulation(group: &FiniteAbelianGroup, lambda: usize) -> Self {
        let diag = DVector::from_fn(group.order(), |x, _| group.pairing_at::<T>(lambda, x));
        Self {
            group: group.clone(),
            matrix: DMatrix::from_diagonal(&diag),
        }
    }

    /// Multiplication by a function on `G`.
    pub fn multiplication(group: &FiniteAbelianGroup, values: &[Cx<T>]) -> Result<Self> {
        let v = GroupVector::new(group, values.to_vec())?;
        Ok(Self {
            group: group.clone(),
            matrix: DMatrix::from_diagonal(v.values()),
        })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn apply(&self, f: &GroupVector<T>) -> Result<GroupVector<T>> {
        if f.group() != &self.group {
            return Err(Error::GroupMismatch);
        }
        GroupVector::from_dvector(&self.group, &self.matrix * f.values())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            group: self.group.clone(),
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self {
            group: self.group.clone(),
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn scaled(&self, c: Cx<T>) -> Self {
        Self {
            group: self.group.clone(),
            matrix: &self.matrix * c,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            group: self.group.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> T {
        linalg::spectral_norm(&self.matrix)
    }

    /// Frobenius norm.
    pub fn hs_norm(&self) -> T {
        self.matrix.norm()
    }

    pub fn trace(&self) -> Cx<T> {
        linalg::trace(&self.matrix)
    }
}

fn commutator_defect<T: Real>(u: &CMatrix<T>, v: &CMatrix<T>) -> T {
    linalg::spectral_norm(&(u * v - v * u))
}

fn preservation<T: Real>(
    u: &GroupOperator<T>,
    family: impl Iterator<Item = GroupOperator<T>>,
    tol: T,
) -> Preservation<T> {
    let defect = family
        .map(|m| commutator_defect(u.matrix(), m.matrix()))
        .fold(T::zero(), |a, b| a.max(b));
    let threshold = tol * u.operator_norm().max(T::one());
    Preservation {
        holds: defect <= threshold,
        defect,
        threshold,
    }
}

/// `U M_λ = M_λ U` for every `λ ∈ Λ`, checked on the generators of `Λ`.
pub fn is_modulation_preserving<T: Real>(
    u: &GroupOperator<T>,
    lambda: &Subgroup,
    tol: T,
) -> Preservation<T> {
    let g = u.group().clone();
    preservation(
        u,
        lambda
            .generator_indices()
            .iter()
            .map(move |&l| GroupOperator::modulation(&g, l)),
        tol,
    )
}

/// `U T_γ = T_γ U` for every `γ ∈ Γ`, checked on the generators of `Γ`.
pub fn is_translation_preserving<T: Real>(
    u: &GroupOperator<T>,
    gamma: &Subgroup,
    tol: T,
) -> Preservation<T> {
    let g = u.group().clone();
    preservation(
        u,
        gamma
            .generator_indices()
            .iter()
            .map(move |&l| GroupOperator::translation(&g, l)),
        tol,
    )
}

/// `F U F⁻¹`, an operator on `L²(Ĝ)`. Modulations conjugate to
/// translations, `F M_λ F⁻¹ = T_λ`.
pub fn fourier_conjugate<T: Real>(u: &GroupOperator<T>) -> GroupOperator<T> {
    fourier_conjugate_with(&FourierTransform::new(u.group()), u)
}

pub fn fourier_conjugate_with<T: Real>(
    fourier: &FourierTransform<T>,
    u: &GroupOperator<T>,
) -> GroupOperator<T> {
    let f = fourier.matrix();
    GroupOperator {
        group: u.group().clone(),
        matrix: (f * u.matrix()) * f.adjoint(),
    }
}
