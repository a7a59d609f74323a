//! Pseudospectral laboratory for the quartic generalized KdV equation
//! `u_t + u_xxx + (u^4)_x = 0` on a periodic domain: exact-dispersion
//! integrating-factor time stepping, Gevrey norms, radius-of-analyticity
//! estimation, a windowed space-time norm proxy, almost-conservation
//! experiments, an exponential-symbol inequality fuzzer, and the
//! continuation schedule that ties them together.

// validation deliberately uses `!(x > 0)` so NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bourgain;
pub mod checkpoint;
pub mod config;
pub mod conservation;
pub mod datum;
pub mod error;
pub mod gevrey;
pub mod report;
pub mod schedule;
pub mod solver;
pub mod spectral;
pub mod symbol;

pub use error::{Error, Result};
pub use gevrey::{estimate_radius, gevrey_norm, measure_a, GevreyParams, RadiusEstimate};
pub use solver::{evolve, SolverConfig, Trajectory};
pub use spectral::{dealiased_product4, inner_l2, Grid, RealField, SpectralField};
