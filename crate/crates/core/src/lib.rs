//! Discretization of relaxed spectral-clustering solutions.
//!
//! The pipeline is: build a similarity [`graph`], compute the bottom-`c`
//! eigenvectors of its Laplacian ([`relaxed`]), then map that continuous
//! solution back to hard labels with one of the methods in [`discretize`].
//! The gradient-aware first-order discretizer optimizes the cut objective
//! itself instead of a Euclidean proxy.
//!
//! [`oracle`] enumerates all partitions of tiny graphs for ground truth,
//! [`theory`] checks the inequalities relating k-means, spectral rotation and
//! the cut objective, and [`metrics`] scores labelings against ground truth.

pub mod dataset_io;
pub mod discretize;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod metrics;
pub mod numerics;
pub mod oracle;
pub mod relaxed;
pub mod seeding;
pub mod theory;

pub use error::{Error, Result};
pub use graph::{CutKind, Graph};
pub use numerics::DenseMatrix;
pub use relaxed::{Assignment, RelaxedSolution};
