//! Exact and numerical tools for Carnot groups and their hypersurfaces.

pub mod catalog;
pub mod error;
pub mod group;
pub mod hypersurface;
pub mod liealg;
pub mod metrics;
pub mod symbolic;

pub use error::{Error, Result};
pub use liealg::{AlgebraSpec, StratifiedAlgebra, Subalgebra};
pub use symbolic::{MultiPoly, PolyVectorField, Scalar};
