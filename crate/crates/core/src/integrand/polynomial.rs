use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::ops::{Add, Mul};
use std::str::FromStr;

use rand::Rng;

use super::Region;
use crate::error::{check_dim, Error, Result};
use crate::seed;

/// Term cap for [`Polynomial::random_cubic`] once the full cubic tensor basis
/// (4^d exponent vectors) gets larger than this.
pub const DEFAULT_RANDOM_TERM_CAP: usize = 200;

/// Upper bound `K` on `|d^4 f / dx_i^4|` over a region, for every axis `i`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FourthDerivBound(pub f64);

impl FourthDerivBound {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }
}

/// Sparse multivariate polynomial: exponent vector -> coefficient.
///
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    /// The zero polynomial in `dim` variables.
    pub fn zero(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("polynomial dimension must be at least 1".into()));
        }
        Ok(Polynomial { dim, terms: BTreeMap::new() })
    }

    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        Polynomial::from_terms(dim, [(vec![0; dim], c)])
    }

    /// Builds a polynomial, summing coefficients of repeated exponent vectors.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Polynomial::zero(dim)?;
        for (exps, coeff) in terms {
            check_dim(dim, exps.len())?;
            if !coeff.is_finite() {
                return Err(Error::InvalidParameter(format!("coefficient {coeff} is not finite")));
            }
            *p.terms.entry(exps).or_insert(0.0) += coeff;
        }
        p.terms.retain(|_, c| *c != 0.0);
        Ok(p)
    }

    pub fn monomial(coeff: f64, exps: Vec<u32>) -> Result<Self> {
        let dim = exps.len();
        Polynomial::from_terms(dim, [(exps, coeff)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(k, &c)| (k.as_slice(), c))
    }

    pub fn coefficient(&self, exps: &[u32]) -> f64 {
        self.terms.get(exps).copied().unwrap_or(0.0)
    }

    pub fn max_per_dim_degree(&self, i: usize) -> u32 {
        self.terms.keys().map(|k| k[i]).max().unwrap_or(0)
    }

    pub fn is_cubic_per_dim(&self) -> bool {
        self.terms.keys().all(|k| k.iter().all(|&e| e <= 3))
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let max_deg = self.terms.keys().flat_map(|k| k.iter().copied()).max().unwrap_or(0) as usize;
        let stride = max_deg + 1;
        // pows[i * stride + k] = x_i^k
        let mut pows = vec![1.0; self.dim * stride];
        for (i, &xi) in x.iter().enumerate() {
            for k in 1..stride {
                pows[i * stride + k] = pows[i * stride + k - 1] * xi;
            }
        }
        self.terms
            .iter()
            .map(|(exps, &c)| exps.iter().enumerate().fold(c, |acc, (i, &k)| acc * pows[i * stride + k as usize]))
            .sum()
    }

    /// Closed-form integral over an axis-aligned box.
    pub fn exact_integral(&self, region: &Region) -> Result<f64> {
        check_dim(self.dim, region.dim())?;
        Ok(self
            .terms
            .iter()
            .map(|(exps, &c)| {
                exps.iter().zip(region.bounds()).fold(c, |acc, (&k, &(a, b))| {
                    let k1 = k as i32 + 1;
                    acc * (b.powi(k1) - a.powi(k1)) / f64::from(k1)
                })
            })
            .sum())
    }

    /// Coefficient-magnitude bound on every pure fourth partial derivative
    /// over `region`. Exactly zero for cubic-per-dimension polynomials.
    pub fn fourth_derivative_bound(&self, region: &Region) -> FourthDerivBound {
        if self.is_cubic_per_dim() {
            return FourthDerivBound(0.0);
        }
        let reach: Vec<f64> = region.bounds().iter().map(|&(a, b)| a.abs().max(b.abs())).collect();
        let k = (0..self.dim)
            .map(|i| {
                self.terms
                    .iter()
                    .filter(|(exps, _)| exps[i] >= 4)
                    .map(|(exps, &c)| {
                        let ki = f64::from(exps[i]);
                        let falling = ki * (ki - 1.0) * (ki - 2.0) * (ki - 3.0);
                        let scale: f64 = exps
                            .iter()
                            .enumerate()
                            .map(|(j, &kj)| {
                                let e = if j == i { kj - 4 } else { kj };
                                reach.get(j).copied().unwrap_or(0.0).powi(e as i32)
                            })
                            .product();
                        c.abs() * falling * scale
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        FourthDerivBound(k)
    }

    /// Random polynomial of per-dimension degree at most 3 with coefficients
    /// drawn i.i.d. uniform on [-1, 1]. Uses every exponent vector in
    /// {0,1,2,3}^d when there are at most [`DEFAULT_RANDOM_TERM_CAP`] of them,
    /// otherwise that many distinct vectors sampled uniformly.
    pub fn random_cubic(d: usize, seed: u64) -> Result<Self> {
        Polynomial::random_cubic_with_cap(d, seed, DEFAULT_RANDOM_TERM_CAP)
    }

    pub fn random_cubic_with_cap(d: usize, seed: u64, cap: usize) -> Result<Self> {
        Polynomial::random_per_dim(d, 3, seed, cap)
    }

    /// Like [`Polynomial::random_cubic`] but with per-dimension degree at most
    /// `max_degree`.
    pub fn random_per_dim(d: usize, max_degree: u32, seed: u64, cap: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if cap == 0 {
            return Err(Error::InvalidParameter("term cap must be at least 1".into()));
        }
        let base = u64::from(max_degree) + 1;
        let mut rng = seed::rng(seed::derive(seed, &[d as u64, u64::from(max_degree)]));
        let full = base.checked_pow(d as u32).filter(|&n| n <= cap as u64);
        let exponents: Vec<Vec<u32>> = match full {
            Some(n) => (0..n).map(|idx| digits(idx, base, d)).collect(),
            None => {
                let mut chosen = BTreeSet::new();
                while chosen.len() < cap {
                    let v: Vec<u32> = (0..d).map(|_| rng.random_range(0..=max_degree)).collect();
                    chosen.insert(v);
                }
                chosen.into_iter().collect()
            }
        };
        let terms = exponents.into_iter().map(|e| (e, rng.random_range(-1.0..=1.0))).collect::<Vec<_>>();
        Polynomial::from_terms(d, terms)
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        let mut terms = self.terms.clone();
        terms.values_mut().for_each(|v| *v *= c);
        terms.retain(|_, v| *v != 0.0);
        Polynomial { dim: self.dim, terms }
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial> {
        check_dim(self.dim, other.dim)?;
        Polynomial::from_terms(self.dim, self.terms.iter().chain(&other.terms).map(|(k, &c)| (k.clone(), c)))
    }

    /// One term per line, `coeff k1 ... kd`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.terms.is_empty() {
            let zeros = vec!["0"; self.dim].join(" ");
            let _ = writeln!(out, "0 {zeros}");
        }
        for (exps, c) in &self.terms {
            let _ = write!(out, "{c}");
            for k in exps {
                let _ = write!(out, " {k}");
            }
            out.push('\n');
        }
        out
    }
}

fn digits(mut idx: u64, base: u64, d: usize) -> Vec<u32> {
    let mut v = vec![0u32; d];
    for slot in v.iter_mut().rev() {
        *slot = (idx % base) as u32;
        idx /= base;
    }
    v
}

impl Add for &Polynomial {
    type Output = Polynomial;

    /// Panics on dimension mismatch; use [`Polynomial::checked_add`] otherwise.
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.checked_add(rhs).expect("polynomial dimensions must match")
    }
}

impl Mul<f64> for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: f64) -> Polynomial {
        self.scale(rhs)
    }
}

/// Parses the text form: one `coeff k1 ... kd` term per line, `#` starts a
/// comment. The dimension is taken from the first term.
impl FromStr for Polynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut dim = None;
        let mut terms = Vec::new();
        for (n, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let coeff_text = fields.next().unwrap_or_default();
            let coeff: f64 = coeff_text
                .parse()
                .map_err(|_| Error::Parse { line: n + 1, msg: format!("bad coefficient {coeff_text:?}") })?;
            let exps = fields
                .map(|f| f.parse::<u32>().map_err(|_| Error::Parse { line: n + 1, msg: format!("bad exponent {f:?}") }))
                .collect::<Result<Vec<u32>>>()?;
            if exps.is_empty() {
                return Err(Error::Parse { line: n + 1, msg: "term has no exponents".into() });
            }
            match dim {
                None => dim = Some(exps.len()),
                Some(d) if d != exps.len() => {
                    return Err(Error::Parse {
                        line: n + 1,
                        msg: format!("expected {d} exponents, found {}", exps.len()),
                    })
                }
                _ => {}
            }
            terms.push((exps, coeff));
        }
        let dim = dim.ok_or(Error::Parse { line: 0, msg: "no terms found".into() })?;
        Polynomial::from_terms(dim, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn p(dim: usize, terms: &[(f64, &[u32])]) -> Polynomial {
        Polynomial::from_terms(dim, terms.iter().map(|(c, e)| (e.to_vec(), *c))).unwrap()
    }

    /// Midpoint rule on a uniform grid with `n` cells per axis.
    fn midpoint_sum(f: &Polynomial, region: &Region, n: usize) -> f64 {
        let d = region.dim();
        let h: Vec<f64> = region.bounds().iter().map(|(a, b)| (b - a) / n as f64).collect();
        let cell: f64 = h.iter().product();
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        let mut total = 0.0;
        loop {
            for i in 0..d {
                x[i] = region.bounds()[i].0 + (idx[i] as f64 + 0.5) * h[i];
            }
            total += f.evaluate(&x).unwrap();
            let mut i = 0;
            loop {
                if i == d {
                    return total * cell;
                }
                idx[i] += 1;
                if idx[i] < n {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(Polynomial::constant(2, 1.0).unwrap().evaluate(&[3.0, -2.0]).unwrap(), 1.0);
        assert_eq!(p(2, &[(1.0, &[3, 3])]).evaluate(&[1.0, 2.0]).unwrap(), 8.0);
        assert_eq!(p(2, &[(2.0, &[2, 0]), (-1.0, &[0, 1])]).evaluate(&[2.0, 5.0]).unwrap(), 3.0);
    }

    #[test]
    fn evaluate_rejects_wrong_dimension() {
        let q = Polynomial::constant(2, 1.0).unwrap();
        assert!(matches!(q.evaluate(&[1.0]), Err(Error::DimensionMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let q = p(1, &[(1.0, &[2]), (-1.0, &[2]), (0.0, &[1])]);
        assert_eq!(q.num_terms(), 0);
        assert_eq!(q.evaluate(&[3.0]).unwrap(), 0.0);
    }

    #[test]
    fn exact_integral_examples() {
        let r = 1.7;
        for d in 1..=4 {
            let one = Polynomial::constant(d, 1.0).unwrap();
            let cube = Region::cube(d, r).unwrap();
            assert_relative_eq!(one.exact_integral(&cube).unwrap(), (2.0 * r).powi(d as i32), max_relative = 1e-12);
        }
        let x = p(1, &[(1.0, &[1])]);
        assert_eq!(x.exact_integral(&Region::cube(1, r).unwrap()).unwrap(), 0.0);

        let q = p(2, &[(1.0, &[2, 1]), (4.0, &[0, 0])]);
        let cube = Region::cube(2, 1.0).unwrap();
        assert_relative_eq!(q.exact_integral(&cube).unwrap(), 16.0, max_relative = 1e-12);
        // step 1e-3 per axis
        let riemann = midpoint_sum(&q, &cube, 2000);
        assert_relative_eq!(riemann, 16.0, max_relative = 1e-9);
    }

    #[test]
    fn exact_integral_matches_midpoint_on_rectangle() {
        let q = p(2, &[(0.5, &[4, 1]), (-2.0, &[1, 3]), (1.0, &[0, 2])]);
        let region = Region::new(vec![(-0.5, 1.25), (0.3, 2.0)]).unwrap();
        let exact = q.exact_integral(&region).unwrap();
        let approx = midpoint_sum(&q, &region, 1500);
        assert_abs_diff_eq!(exact, approx, epsilon = 1e-5);
    }

    #[test]
    fn fourth_derivative_examples() {
        let unit = Region::cube(1, 1.0).unwrap();
        assert_eq!(p(1, &[(1.0, &[4])]).fourth_derivative_bound(&unit).value(), 24.0);
        let two = Region::cube(1, 2.0).unwrap();
        assert_eq!(p(1, &[(1.0, &[5])]).fourth_derivative_bound(&two).value(), 240.0);
        // dense grid of |f''''| = 120|x| on [-2, 2]
        let grid_max = (0..=4000).map(|i| 120.0 * (-2.0 + i as f64 * 1e-3_f64).abs()).fold(0.0, f64::max);
        assert_relative_eq!(grid_max, 240.0, max_relative = 1e-12);

        let cubic = Polynomial::random_cubic(3, 11).unwrap();
        assert!(cubic.fourth_derivative_bound(&Region::cube(3, 5.0).unwrap()).is_zero());
    }

    #[test]
    fn random_cubic_is_deterministic_and_cubic() {
        let a = Polynomial::random_cubic(3, 5).unwrap();
        let b = Polynomial::random_cubic(3, 5).unwrap();
        let c = Polynomial::random_cubic(3, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.is_cubic_per_dim());
        assert_eq!(a.num_terms(), 64);
        let one = Polynomial::random_cubic(1, 5).unwrap();
        assert!(one.max_per_dim_degree(0) <= 3);
    }

    #[test]
    fn random_cubic_caps_terms_in_high_dimension() {
        let q = Polynomial::random_cubic(12, 3).unwrap();
        assert_eq!(q.num_terms(), DEFAULT_RANDOM_TERM_CAP);
        assert!(q.is_cubic_per_dim());
        let small = Polynomial::random_cubic_with_cap(6, 3, 10).unwrap();
        assert_eq!(small.num_terms(), 10);
    }

    #[test]
    fn text_round_trip_and_errors() {
        let src = "# f = 2 x^2 y - 0.5\n2 2 1\n-0.5 0 0  # constant\n\n";
        let q: Polynomial = src.parse().unwrap();
        assert_eq!(q.dim(), 2);
        assert_eq!(q.coefficient(&[2, 1]), 2.0);
        assert_eq!(q.to_text().parse::<Polynomial>().unwrap(), q);

        assert!(matches!("1 0\n2 1 1".parse::<Polynomial>(), Err(Error::Parse { line: 2, .. })));
        assert!(matches!("x 1".parse::<Polynomial>(), Err(Error::Parse { line: 1, .. })));
        assert!("# nothing".parse::<Polynomial>().is_err());
        let zero: Polynomial = "0 0 0 0".parse().unwrap();
        assert_eq!(zero.dim(), 3);
        assert_eq!(zero.to_text().parse::<Polynomial>().unwrap(), zero);
    }
}
