//! Exact arithmetic: scalars over the rationals extended by declared
//! irrationals, integer matrices, and the expansion-adapted norm.

mod basis;
mod fixed;
mod matrix;
mod norm;
mod scalar;

pub use basis::{Evaluator, IrrationalBasis, SqrtEvaluator, Symbol};
pub use fixed::Approx;
pub use matrix::{commute, is_expanding, mat_apply, IntMatrix, RatMatrix, EXPANSION_MARGIN};
pub use norm::{adapted_norm, adapted_norm_with_samples, AdaptedNorm, DEFAULT_SPHERE_SAMPLES};
pub use scalar::{common_denominator, parse_rational, FracPart, Scalar, TorusPoint};

pub(crate) use basis::pow2;
pub(crate) use fixed::scaled_to_f64;
pub(crate) use scalar::{format_rational, frac_rational, rational_to_f64};

/// `scalar_add` of the exact layer.
pub fn scalar_add(a: &Scalar, b: &Scalar) -> crate::Result<Scalar> {
    a.checked_add(b)
}

/// `scalar_scale` of the exact layer.
pub fn scalar_scale(q: &num_rational::BigRational, a: &Scalar) -> Scalar {
    a.scale(q)
}
