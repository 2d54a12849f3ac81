//! Integrands, integration regions, and their closed-form integrals.

mod polynomial;
mod region;

pub use polynomial::{FourthDerivBound, Polynomial, DEFAULT_RANDOM_TERM_CAP};
pub use region::Region;
