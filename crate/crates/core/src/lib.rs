//! Grassmann-algebra arithmetic, canonical forms of super Riemannian metric
//! matrices, local isometry algebras, and the covering group of the isometry
//! group realized as a semi-direct product with a quasi-nilpotent factor.

pub mod bch;
pub mod cli;
pub mod error;
pub mod grassmann;
pub mod group;
pub mod isometry;
pub mod json;
pub mod metric;
pub mod random;
pub mod scalar;
pub mod supermatrix;
pub mod verify;

pub use error::{Error, Result};
pub use grassmann::{AlgebraConfig, MultiIndex, Parity, Supernumber};
pub use scalar::{CoefficientMode, RealMatrix, Scalar};
pub use supermatrix::{BlockShape, ParityClass, SuperMatrix};
