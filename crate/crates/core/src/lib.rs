//! Curvature of homogeneous metrics along inverse-linear deformations.
//!
//! The crate builds chains of compact matrix Lie algebras `h ⊂ k ⊂ g`,
//! evaluates the curvature of `G/H` along paths `Φ_t = (I - tΨ)^{-1}` both
//! from closed-form series and from an independent Koszul-formula oracle, and
//! certifies curvature signs and structural constants by seeded multistart
//! optimization.

pub mod algebra;
pub mod certify;
pub mod curvature;
pub mod error;
pub mod homogeneous;
pub mod linalg;
pub mod report;
pub mod series;

pub use algebra::{AlgebraElement, AlgebraMap, MatrixLieAlgebra, Octonion};
pub use certify::{Certificate, CertificateKind, OptimizerConfig, Status};
pub use curvature::{Deformation, MetricAtT};
pub use error::{Error, Result};
pub use homogeneous::{Chain, NamedChain, Part};
pub use series::{BracketTerms, CurvatureSeries, TSplitCoeffs};
