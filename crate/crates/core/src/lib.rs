//! Envy-free allocation of indivisible goods together with a divisible cake.
//!
//! Utilities are exact rationals throughout. The solvers compute EFM
//! allocations (envy-free up to one good toward cake-free bundles, envy-free
//! toward the rest) for piecewise-linear cake densities, a two-agent
//! variant, and ε-EFM allocations through Robertson–Webb queries. The
//! [`oracle`] module holds brute-force searches for small instances.

// Errors carry the offending exact values.
#![allow(clippy::result_large_err)]

pub mod cake_ops;
pub mod exec;
pub mod fairness;
pub mod gen;
pub mod io;
pub mod model;
pub mod oracle;
pub mod samples;
pub mod scalar;
pub mod solvers;

pub use fairness::{Allocation, Bundle, EnvyGraph, FairnessReport, IntervalSet};
pub use model::{Density, DensitySegment, Instance};
pub use scalar::Scalar;
