//! Iteration of holomorphic correspondences `G(z, w) = 0`: fibers and
//! branches, contraction certificates, equidistribution of pushforward
//! measures, and minimal Hutchinson invariant sets of differential operators.

pub mod algebra;
pub mod cli;
pub mod correspondence;
pub mod diffop;
pub mod error;
pub mod invset;
pub mod io;
pub mod measure;

pub use correspondence::{Certificate, Correspondence, FamilySpec};
pub use diffop::{DiffOperator, TnBuild};
pub use error::{Error, Result};
pub use measure::PointMeasure;
