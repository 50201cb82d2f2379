//! Fiberization of modulation-preserving operators on finite abelian groups.
//!
//! A subgroup `Λ ⊆ Ĝ` acts on `L²(G)` by modulations `M_λ f(x) = ⟨λ, x⟩ f(x)`.
//! The modulation Zak transform `Z̃` ([`ModZak`]) maps `L²(G)` unitarily onto
//! functions on `Π = G/Λ*` with values in `ℂ^{|Ĝ/Λ|}`, turning each `M_λ`
//! into pointwise multiplication. Operators commuting with every `M_λ` then
//! become block diagonal, and the blocks form the range operator
//! ([`RangeOperator`]).
//!
//! Numeric types are generic over [`Real`] (`f32`, `f64`); the aliases below
//! fix the scalar.

pub mod error;
pub mod frames;
pub mod group;
pub mod invariant;
pub mod io;
pub mod linalg;
pub mod ops;
pub mod range_ops;
pub mod scalar;
pub mod transforms;

pub use error::{Error, Result};
pub use frames::{
    classify, direct_frame_bounds, fiber_frame_bounds, fiber_riesz_bounds, parseval_defect,
    parseval_hs_and_trace, space_frame_bounds, FiberBounds, FrameKind, FrameReport,
};
pub use group::{
    DualElement, Element, FiniteAbelianGroup, GroupElement, Subgroup, Transversal, MAX_GROUP_ORDER,
};
pub use invariant::{
    check_invariance_under, check_multiplicative_invariance, range_function, synthesis_matrix,
    Invariance, Membership, ModInvariantSpace, RangeFunction,
};
pub use ops::{
    fourier_conjugate, fourier_conjugate_with, is_modulation_preserving,
    is_translation_preserving, GroupOperator, Preservation,
};
pub use range_ops::{
    extract_range_operator, isometry_defect_on, reconstruct_operator, restrict_to,
    self_adjoint_defect_on, RangeOperator,
};
pub use scalar::{CMatrix, CVector, Cx, Real, Tolerances};
pub use transforms::{FiberedVector, FourierTransform, GroupVector, ModZak, ZakTransform};

pub type GroupVector64 = GroupVector<f64>;
pub type GroupVector32 = GroupVector<f32>;
pub type FiberedVector64 = FiberedVector<f64>;
pub type FiberedVector32 = FiberedVector<f32>;
pub type GroupOperator64 = GroupOperator<f64>;
pub type GroupOperator32 = GroupOperator<f32>;
pub type ModZak64 = ModZak<f64>;
pub type ModZak32 = ModZak<f32>;
pub type ModInvariantSpace64 = ModInvariantSpace<f64>;
pub type ModInvariantSpace32 = ModInvariantSpace<f32>;
pub type RangeFunction64 = RangeFunction<f64>;
pub type RangeFunction32 = RangeFunction<f32>;
pub type RangeOperator64 = RangeOperator<f64>;
pub type RangeOperator32 = RangeOperator<f32>;
pub type FrameReport64 = FrameReport<f64>;
pub type FrameReport32 = FrameReport<f32>;
