use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Axis-aligned hyperrectangle `[a_1, b_1] x ... x [a_d, b_d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    bounds: Vec<(f64, f64)>,
}

impl Region {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidRegion("region needs at least one dimension".into()));
        }
        for (i, &(a, b)) in bounds.iter().enumerate() {
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::InvalidRegion(format!("bounds of axis {i} are not finite")));
            }
            if a >= b {
                return Err(Error::InvalidRegion(format!("axis {i} has a = {a} >= b = {b}")));
            }
        }
        Ok(Region { bounds })
    }

    /// The centered cube `[-r, r]^d`.
    pub fn cube(d: usize, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidRegion(format!("cube radius must be positive, got {r}")));
        }
        Region::new(vec![(-r, r); d])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| b - a).product()
    }

    /// Largest side length.
    pub fn max_width(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| b - a).fold(0.0, f64::max)
    }

    pub fn is_cube(&self, r: f64) -> bool {
        r > 0.0 && self.bounds.iter().all(|&(a, b)| a == -r && b == r)
    }

    /// Radius `r` when the region is `[-r, r]^d`.
    pub fn cube_radius(&self) -> Option<f64> {
        let r = self.bounds[0].1;
        self.is_cube(r).then_some(r)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.bounds).all(|(&v, &(a, b))| a <= v && v <= b)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.cube_radius() {
            return write!(f, "cube:{}:{}", self.dim(), r);
        }
        let parts: Vec<String> = self.bounds.iter().map(|(a, b)| format!("{a},{b}")).collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// Parses `cube:d:r` or `a1,b1;a2,b2;...`.
impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: String| Error::Parse { line: 1, msg };
        if let Some(rest) = s.strip_prefix("cube:") {
            let (d, r) = rest.split_once(':').ok_or_else(|| bad(format!("expected cube:d:r, got {s:?}")))?;
            let d: usize = d.trim().parse().map_err(|_| bad(format!("bad cube dimension {d:?}")))?;
            let r: f64 = r.trim().parse().map_err(|_| bad(format!("bad cube radius {r:?}")))?;
            if d == 0 {
                return Err(Error::InvalidRegion("cube dimension must be at least 1".into()));
            }
            return Region::cube(d, r);
        }
        let mut bounds = Vec::new();
        for part in s.split(';').filter(|p| !p.trim().is_empty()) {
            let (a, b) = part.split_once(',').ok_or_else(|| bad(format!("expected a,b interval, got {part:?}")))?;
            let a: f64 = a.trim().parse().map_err(|_| bad(format!("bad lower bound {a:?}")))?;
            let b: f64 = b.trim().parse().map_err(|_| bad(format!("bad upper bound {b:?}")))?;
            bounds.push((a, b));
        }
        Region::new(bounds)
    }
}
