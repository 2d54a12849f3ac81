//! Definite-integral estimation against zero-order stochastic oracles.
//!
//! The crate provides tensor-product Gaussian Quadrature and Simpson's Rule
//! estimators that only see a function through a noisy, unbiased query
//! channel, the closed-form error bounds for both methods, the packing-set
//! ensemble used to argue minimax lower bounds, and an experiment harness that
//! measures empirical error against the theory.

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod ensemble;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod integrand;
pub mod oracle;
pub mod seed;
pub mod signs;

pub use bounds::BoundValue;
pub use ensemble::{EnsembleParams, PackingSet, RecoveryConfig, RecoverySummary};
pub use error::{Error, Result};
pub use estimators::{Budget, EstimateReport, Method, NodeSet};
pub use integrand::{FourthDerivBound, Polynomial, Region};
pub use oracle::{OracleInstance, OracleKind, OracleSpec, QueryLog};
pub use signs::SignVector;
