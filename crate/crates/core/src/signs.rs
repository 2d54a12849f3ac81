use std::fmt;

use crate::error::{Error, Result};

/// A vector in {-1, +1}^d.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::InvalidParameter("sign vector must be nonempty".into()));
        }
        if let Some(bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter(format!("sign vector entries must be +1 or -1, found {bad}")));
        }
        Ok(SignVector(signs))
    }

    pub fn all_positive(d: usize) -> Self {
        SignVector(vec![1; d])
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        SignVector(bits.into_iter().map(|b| if b { 1 } else { -1 }).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        f64::from(self.0[i])
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().map(|&s| i64::from(s)).sum()
    }

    pub fn hamming(&self, other: &SignVector) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}
