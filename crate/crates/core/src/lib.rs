//! Exact local computations over F_q[[π]] and numerical period-lattice checks
//! relating the Hodge bundle to the canonical bundle for PEL data.

pub mod abelian_lattice;
pub mod algebra_core;
pub mod cyclic_algebra;
pub mod ks_pipeline;
pub mod numeric;
pub mod pel_modules;
pub mod symmetric_domains;

/// Scalar used by the archimedean modules.
pub trait Real: nalgebra::RealField + Copy + num_traits::FromPrimitive {}
impl<T: nalgebra::RealField + Copy + num_traits::FromPrimitive> Real for T {}

pub type Complex64 = num_complex::Complex<f64>;
pub type CMatrix = numeric::CMat<f64>;
pub type SiegelPoint = symmetric_domains::SiegelPoint<f64>;
pub type HermitianPoint = symmetric_domains::HermitianPoint<f64>;
pub type BoundedPoint = symmetric_domains::BoundedPoint<f64>;
pub type DomainGroupElement = symmetric_domains::DomainGroupElement<f64>;
