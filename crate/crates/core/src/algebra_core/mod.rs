//! Exact arithmetic: finite fields, truncated Laurent series, matrices, Smith normal form.

pub mod finite_field;
pub mod matrix;
pub mod series;
pub mod snf;

pub use finite_field::{FieldError, FiniteField, FiniteFieldElement};
pub use matrix::{MatrixError, RingElement, RingMatrix};
pub use series::{series_valuation, LocalSeriesElement, Valuation, DEFAULT_PRECISION};
pub use snf::{determinant_valuation, smith_normal_form, SmithDecomposition, SnfError, SnfRing};

/// x ↦ x^(q^f) where q is the base field order of `x`'s field.
pub fn frobenius(x: &FiniteFieldElement, f: u32) -> FiniteFieldElement {
    x.frobenius(f)
}
