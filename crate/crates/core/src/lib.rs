//! Gradient-variance analysis of QUBO energy landscapes.
//!
//! The crate builds QUBO instances (Gaussian synthetic matrices and
//! reductions of Max Cut, Graph Partitioning, Number Partitioning and Set
//! Cover), measures the variance of single-flip energy changes, runs
//! classical and path-integral annealing solvers, rewrites instances to raise
//! their gradient variance without changing their optima, and turns the
//! measurement into a solver recommendation.

pub mod advisor;
pub mod bench;
pub mod error;
pub mod generators;
pub mod landscape;
pub mod qubo;
pub mod reformulate;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use qubo::{Assignment, IsingInstance, QuboInstance};
