//! Stochastic subgradient methods for problems with many convex constraints,
//! using random projections onto a few sampled constraints per iteration.
//!
//! The crate is `no_std` and only needs `alloc`.
//!
//! * [`geometry`]: vectors, halfspaces, balls and constraint families.
//! * [`polyproj`]: projection onto small polyhedra.
//! * [`problems`]: the sampling oracle and benchmark scenarios.
//! * [`solver`]: the iterate-update schemes and the trial loop.
//! * [`metrics`]: reference projections, error metrics and rate fits.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod geometry;
mod linalg;
pub mod metrics;
pub mod polyproj;
pub mod problems;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{gram_spectral_norm, Ball, ConstraintFamily, ConvexSet, Halfspace, Vector};
pub use rng::{RngStream, DATA_STREAM};
