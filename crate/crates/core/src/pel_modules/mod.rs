//! Signed-basis modules over the local maximal order, the relation module R_E,
//! the quotient (M ⊗ Mᵗ)/R_E, and the image exponent of ψ.

mod global;
mod local;

pub use global::{global_rank_lemma, GlobalRankReport, QuadraticRing};
pub use local::{
    act, image_exponent, quotient_structure, relation_generators, separates, separating_element, span_contains, BarMode, Generator, InstanceType,
    Label, PairLabel, PelError, QuotientStructure, ScalarElement, SignedBasisModule, TensorVector, Twist,
};
