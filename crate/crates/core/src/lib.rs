//! Structural and dynamical analysis of Lotka-Volterra interaction matrices.
//!
//! The crate decides (stable) dissipativity of an interaction matrix with an
//! exact diagonal certificate, builds the black-and-white interaction graph,
//! runs the Redheffer reduction rules, computes the rank of a stably
//! dissipative graph by trimming, and derives the invariant foliation and
//! equilibria set of the associated system. All structural computation is
//! exact over the rationals; only time integration and the leaf/equilibria
//! Newton solve use floating point.
//!
//! Matrices and vectors are generic over a [`Scalar`]; the aliases at the
//! crate root fix the exact rational instantiation used by the structural
//! modules and the `f64` instantiation used by the dynamics.

pub mod certify;
pub mod dynamics;
pub mod error;
pub mod foliation;
pub mod genlab;
pub mod graph;
pub mod linalg;
pub mod matrix;
pub mod model;
pub mod reduction;
pub mod report;
pub mod scalar;
pub mod trim;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::{ExactScalar, Scalar};

/// Arbitrary-precision rational number; every matrix entry of the structural layer.
pub type Rational = num_rational::BigRational;

/// Square interaction matrix with exact rational entries.
pub type InteractionMatrix = Matrix<Rational>;

/// Binary64 matrix used by the numerical layer.
pub type FloatMatrix = Matrix<f64>;

/// Single-precision matrix, mostly useful for cheap screening.
pub type FloatMatrix32 = Matrix<f32>;

pub use certify::{Certificate, CertifyOutcome};
pub use foliation::{EquilibriaSet, KernelBasis, Leaf};

pub use graph::{Color, ColoredGraph, EdgeKind};
pub use model::{GrowthRates, LvSystem, MatrixDocument};
pub use reduction::{AttractorClass, Mark, MarkedGraph};
pub use trim::{TrimReport, TrimStep};
