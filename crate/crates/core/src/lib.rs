//! Convex geometry of quantum maps on `M_N`: Choi-matrix transforms,
//! membership oracles for the positive/decomposable/CP/PPT/separable cones
//! and their slices, and Monte Carlo volume and mean-width estimators.

pub mod cones;
pub mod error;
pub mod geometry;
pub mod matcore;
pub mod randgen;

pub use error::{Error, Result};
