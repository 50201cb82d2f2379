//! Fourier transform on `L²(G)`, the Zak transform with respect to a
//! subgroup, and the modulation-side fiberization `Z̃ = Z ∘ F`.
//!
//! All three are materialized once as dense unitary matrices. Fibered data
//! is laid out row-major: row `p` is the fiber over the `p`-th representative
//! of the base section, column `q` is the coordinate at the `q`-th
//! representative of the fiber section.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, Subgroup, Transversal};
use crate::scalar::{creal, czero, CMatrix, CVector, Cx, Real};

/// An element of `L²(G)` indexed by the canonical element enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupVector<T: Real> {
    group: FiniteAbelianGroup,
    values: CVector<T>,
}

impl<T: Real> GroupVector<T> {
    pub fn new(group: &FiniteAbelianGroup, values: Vec<Cx<T>>) -> Result<Self> {
        Self::from_dvector(group, DVector::from_vec(values))
    }

    pub fn from_dvector(group: &FiniteAbelianGroup, values: CVector<T>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::Shape {
                expected: format!("vector of length {}", group.order()),
                found: format!("length {}", values.len()),
            });
        }
        Ok(Self {
            group: group.clone(),
            values,
        })
    }

    pub fn zeros(group: &FiniteAbelianGroup) -> Self {
        Self {
            group: group.clone(),
            values: DVector::from_element(group.order(), czero()),
        }
    }

    /// Indicator of the element with canonical index `idx`.
    pub fn delta(group: &FiniteAbelianGroup, idx: usize) -> Self {
        let mut v = Self::zeros(group);
        v.values[idx] = creal(T::one());
        v
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn values(&self) -> &CVector<T> {
        &self.values
    }

    pub fn into_values(self) -> CVector<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> T {
        self.values.norm()
    }

    /// `<self, other>`, conjugate-linear in `other`.
    pub fn inner(&self, other: &Self) -> Cx<T> {
        other.values.dotc(&self.values)
    }

    /// `T_γ f(x) = f(x − γ)`.
    pub fn translate(&self, gamma: usize) -> Self {
        let g = &self.group;
        let values = DVector::from_fn(g.order(), |x, _| self.values[g.sub(x, gamma)]);
        Self {
            group: g.clone(),
            values,
        }
    }

    /// `M_λ f(x) = <λ, x> f(x)`.
    pub fn modulate(&self, lambda: usize) -> Self {
        let g = &self.group;
        let values =
            DVector::from_fn(g.order(), |x, _| g.pairing_at::<T>(lambda, x) * self.values[x]);
        Self {
            group: g.clone(),
            values,
        }
    }
}

/// Data over a base section (rows) and a fiber section (columns).
#[derive(Clone, Debug, PartialEq)]
pub struct FiberedVector<T: Real> {
    base: Arc<Transversal>,
    fiber: Arc<Transversal>,
    values: CMatrix<T>,
}

impl<T: Real> FiberedVector<T> {
    pub fn new(base: Arc<Transversal>, fiber: Arc<Transversal>, values: CMatrix<T>) -> Result<Self> {
        if values.shape() != (base.len(), fiber.len()) {
            return Err(Error::Shape {
                expected: format!("{}x{} fibered matrix", base.len(), fiber.len()),
                found: format!("{}x{}", values.nrows(), values.ncols()),
            });
        }
        Ok(Self {
            base,
            fiber,
            values,
        })
    }

    fn from_flat(base: Arc<Transversal>, fiber: Arc<Transversal>, flat: &CVector<T>) -> Self {
        let cols = fiber.len();
        let values = DMatrix::from_fn(base.len(), cols, |p, q| flat[p * cols + q]);
        Self {
            base,
            fiber,
            values,
        }
    }

    pub fn base_section(&self) -> &Arc<Transversal> {
        &self.base
    }

    pub fn fiber_section(&self) -> &Arc<Transversal> {
        &self.fiber
    }

    pub fn values(&self) -> &CMatrix<T> {
        &self.values
    }

    /// Fiber vector over the `p`-th base representative.
    pub fn fiber(&self, p: usize) -> CVector<T> {
        self.values.row(p).transpose()
    }

    pub fn norm(&self) -> T {
        self.values.norm()
    }

    /// Row-major flattening, the coordinate order of the transform matrices.
    pub fn flatten(&self) -> CVector<T> {
        let cols = self.values.ncols();
        DVector::from_fn(self.values.len(), |i, _| self.values[(i / cols, i % cols)])
    }

    /// Multiplies fiber `p` by `factors[p]`.
    pub fn multiply_fibers(&self, factors: &[Cx<T>]) -> Self {
        let mut out = self.clone();
        for (p, mut row) in out.values.row_iter_mut().enumerate() {
            row *= factors[p];
        }
        out
    }

    fn same_sections(&self, base: &Transversal, fiber: &Transversal) -> bool {
        *self.base == *base && *self.fiber == *fiber
    }
}

/// Unitary Fourier transform `Ff(χ) = |G|^{-1/2} Σ_x f(x) conj(<χ, x>)`.
#[derive(Clone, Debug)]
pub struct FourierTransform<T: Real> {
    group: FiniteAbelianGroup,
    matrix: CMatrix<T>,
}

impl<T: Real> FourierTransform<T> {
    pub fn new(group: &FiniteAbelianGroup) -> Self {
        let n = group.order();
        let s = T::one() / T::lit(n as f64).sqrt();
        let matrix = DMatrix::from_fn(n, n, |chi, x| group.pairing_at::<T>(chi, x).conj() * s);
        Self {
            group: group.clone(),
            matrix,
        }
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn apply(&self, f: &GroupVector<T>) -> Result<GroupVector<T>> {
        check_group(&self.group, f.group())?;
        GroupVector::from_dvector(&self.group, &self.matrix * f.values())
    }

    pub fn inverse(&self, f: &GroupVector<T>) -> Result<GroupVector<T>> {
        check_group(&self.group, f.group())?;
        GroupVector::from_dvector(&self.group, self.matrix.ad_mul(f.values()))
    }
}

fn check_group(expected: &FiniteAbelianGroup, found: &FiniteAbelianGroup) -> Result<()> {
    if expected != found {
        return Err(Error::GroupMismatch);
    }
    Ok(())
}

/// Zak transform of `L²(A)` with respect to a subgroup `H ≤ A`:
/// `Zg(ω)(c) = |H|^{-1/2} Σ_{h∈H} g(c + h) <ω, h>`,
/// with `ω` running over a section of `A / H*` and `c` over a section of
/// `A / H`. With this kernel `Z(T_h g) = <·, h> Z(g)` for `h ∈ H`.
#[derive(Clone, Debug)]
pub struct ZakTransform<T: Real> {
    group: FiniteAbelianGroup,
    subgroup: Subgroup,
    omega: Arc<Transversal>,
    cosets: Arc<Transversal>,
    matrix: CMatrix<T>,
}

impl<T: Real> ZakTransform<T> {
    /// Zak transform with canonical sections.
    pub fn new(subgroup: &Subgroup) -> Self {
        let omega = Transversal::new(&subgroup.annihilator());
        let cosets = Transversal::new(subgroup);
        Self::build(subgroup, Arc::new(omega), Arc::new(cosets))
    }

    /// Zak transform with caller-supplied sections. `omega` must be a
    /// transversal of `A / H*`, so that restriction to `H` hits every
    /// character of `H` exactly once, and `cosets` a transversal of `A / H`.
    pub fn with_sections(
        subgroup: &Subgroup,
        omega: Transversal,
        cosets: Transversal,
    ) -> Result<Self> {
        if *omega.subgroup() != subgroup.annihilator() {
            return Err(Error::InconsistentSections(
                "fiber variable section is not a transversal of A/H*".into(),
            ));
        }
        if cosets.subgroup() != subgroup {
            return Err(Error::InconsistentSections(
                "coordinate section is not a transversal of A/H".into(),
            ));
        }
        Ok(Self::build(subgroup, Arc::new(omega), Arc::new(cosets)))
    }

    fn build(subgroup: &Subgroup, omega: Arc<Transversal>, cosets: Arc<Transversal>) -> Self {
        let g = subgroup.parent();
        let n = g.order();
        let ncols = cosets.len();
        let s = T::one() / T::lit(subgroup.order() as f64).sqrt();
        let mut matrix = DMatrix::from_element(n, n, czero());
        for (p, &w) in omega.reps().iter().enumerate() {
            for (q, &c) in cosets.reps().iter().enumerate() {
                let row = p * ncols + q;
                for &h in subgroup.members() {
                    matrix[(row, g.add(c, h))] = g.pairing_at::<T>(w, h) * s;
                }
            }
        }
        Self {
            group: g.clone(),
            subgroup: subgroup.clone(),
            omega,
            cosets,
            matrix,
        }
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    pub fn omega(&self) -> &Arc<Transversal> {
        &self.omega
    }

    pub fn cosets(&self) -> &Arc<Transversal> {
        &self.cosets
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn apply(&self, g: &GroupVector<T>) -> Result<FiberedVector<T>> {
        check_group(&self.group, g.group())?;
        let flat = &self.matrix * g.values();
        Ok(FiberedVector::from_flat(
            self.omega.clone(),
            self.cosets.clone(),
            &flat,
        ))
    }

    pub fn inverse(&self, z: &FiberedVector<T>) -> Result<GroupVector<T>> {
        if !z.same_sections(&self.omega, &self.cosets) {
            return Err(Error::Shape {
                expected: "fibered vector over this transform's sections".into(),
                found: "different sections".into(),
            });
        }
        GroupVector::from_dvector(&self.group, self.matrix.ad_mul(&z.flatten()))
    }

    /// Values `<ω_p, h>` of the multiplier that `T_h` becomes on fibers.
    pub fn character_on_fibers(&self, h: usize) -> Vec<Cx<T>> {
        self.omega
            .reps()
            .iter()
            .map(|&w| self.group.pairing_at(w, h))
            .collect()
    }
}

/// The modulation-side fiberization `Z̃ = Z ∘ F : L²(G) → L²(Π, L²(D))` for
/// a subgroup `Λ ≤ Ĝ`, with `Π` a section of `G/Λ*` and `D` a section of
/// `Ĝ/Λ`. Modulations become character multiplications:
/// `Z̃(M_λ f)(x) = <λ, x> Z̃f(x)`.
#[derive(Clone, Debug)]
pub struct ModZak<T: Real> {
    group: FiniteAbelianGroup,
    lambda: Subgroup,
    fourier: FourierTransform<T>,
    zak: ZakTransform<T>,
    matrix: CMatrix<T>,
}

impl<T: Real> ModZak<T> {
    pub fn new(lambda: &Subgroup) -> Self {
        let group = lambda.parent().clone();
        let fourier = FourierTransform::new(&group);
        let zak = ZakTransform::new(lambda);
        let matrix = zak.matrix() * fourier.matrix();
        Self {
            group,
            lambda: lambda.clone(),
            fourier,
            zak,
            matrix,
        }
    }

    pub fn shared(lambda: &Subgroup) -> Arc<Self> {
        Arc::new(Self::new(lambda))
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn lambda(&self) -> &Subgroup {
        &self.lambda
    }

    /// `Λ* ⊆ G`.
    pub fn annihilator(&self) -> &Subgroup {
        self.zak.omega().subgroup()
    }

    /// `Π`, the section of `G/Λ*` indexing fibers.
    pub fn base_section(&self) -> &Arc<Transversal> {
        self.zak.omega()
    }

    /// `D`, the section of `Ĝ/Λ` indexing coordinates within a fiber.
    pub fn fiber_section(&self) -> &Arc<Transversal> {
        self.zak.cosets()
    }

    pub fn fiber_count(&self) -> usize {
        self.base_section().len()
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_section().len()
    }

    /// Row range of fiber `p` in the flattened layout.
    pub fn fiber_rows(&self, p: usize) -> std::ops::Range<usize> {
        let d = self.fiber_dim();
        p * d..(p + 1) * d
    }

    pub fn fourier(&self) -> &FourierTransform<T> {
        &self.fourier
    }

    pub fn zak(&self) -> &ZakTransform<T> {
        &self.zak
    }

    /// The unitary matrix of `Z̃`.
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn apply(&self, f: &GroupVector<T>) -> Result<FiberedVector<T>> {
        check_group(&self.group, f.group())?;
        Ok(FiberedVector::from_flat(
            self.base_section().clone(),
            self.fiber_section().clone(),
            &(&self.matrix * f.values()),
        ))
    }

    pub fn inverse(&self, z: &FiberedVector<T>) -> Result<GroupVector<T>> {
        if !z.same_sections(self.base_section(), self.fiber_section()) {
            return Err(Error::Shape {
                expected: "fibered vector over this transform's sections".into(),
                found: "different sections".into(),
            });
        }
        GroupVector::from_dvector(&self.group, self.matrix.ad_mul(&z.flatten()))
    }

    /// `Z̃` applied to every column of `m`.
    pub fn apply_columns(&self, m: &CMatrix<T>) -> CMatrix<T> {
        &self.matrix * m
    }

    /// `X_λ(x) = <λ, x>` for every fiber representative `x ∈ Π`.
    pub fn character_on_fibers(&self, lambda: usize) -> Vec<Cx<T>> {
        self.zak.character_on_fibers(lambda)
    }

    /// Diagonal operator on the fibered space multiplying fiber `p` by
    /// `factors[p]`.
    pub fn fiber_multiplier(&self, factors: &[Cx<T>]) -> CMatrix<T> {
        let d = self.fiber_dim();
        let diag = DVector::from_fn(self.group.order(), |i, _| factors[i / d]);
        DMatrix::from_diagonal(&diag)
    }

    /// `Z̃ U Z̃*`, the operator `U` transported to the fibered space.
    pub fn fiberize_operator(&self, u: &CMatrix<T>) -> CMatrix<T> {
        (&self.matrix * u) * self.matrix.adjoint()
    }

    /// `Z̃* V Z̃`.
    pub fn defiberize_operator(&self, v: &CMatrix<T>) -> CMatrix<T> {
        self.matrix.ad_mul(&(v * &self.matrix))
    }
}
