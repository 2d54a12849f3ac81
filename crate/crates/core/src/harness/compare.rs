use rayon::prelude::*;
use serde::Serialize;

use super::{mean_and_stderr, with_workers};
use crate::bounds::{self, BoundValue};
use crate::error::{Error, Result};
use crate::estimators::{estimate, gq_nodes, sr_nodes, Method};
use crate::integrand::{Polynomial, Region};
use crate::oracle::{OracleInstance, OracleSpec};
use crate::seed;

/// Gauss quadrature against Simpson's rule on the same cube `[-r, r]^d`
/// (side `B = 2r`), both spending `m` queries per node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub d: usize,
    pub r: f64,
    pub sigma: f64,
    pub m: u64,
    pub k: f64,
    pub polynomials: usize,
    pub gq_queries: u64,
    pub sr_queries: u64,
    /// `sr_queries / gq_queries = (3/2)^d`.
    pub query_ratio: f64,
    pub gq_mean_abs_error: f64,
    pub gq_std_error: f64,
    pub sr_mean_abs_error: f64,
    pub sr_std_error: f64,
    pub gq_bound: BoundValue,
    pub sr_bound: BoundValue,
    pub gq_noise_term: f64,
    pub sr_noise_term: f64,
    pub noise_terms_match: bool,
    pub gq_bias_term: f64,
    pub sr_bias_term: f64,
    /// `sr_bias_term / gq_bias_term`, when `K > 0`.
    pub bias_ratio: Option<f64>,
    /// `6 r^2 / 7`.
    pub expected_bias_ratio: f64,
}

/// Runs both estimators on `polynomials` shared random cubics and evaluates
/// both upper bounds at fourth-derivative bound `k`.
#[allow(clippy::too_many_arguments)]
pub fn compare_gq_sr(
    d: usize,
    r: f64,
    sigma: f64,
    m: u64,
    k: f64,
    polynomials: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<ComparisonReport> {
    if polynomials == 0 || m == 0 {
        return Err(Error::InvalidParameter("need m >= 1 and at least one polynomial".into()));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let cube = Region::cube(d, r)?;
    let gq = gq_nodes(d, r)?;
    let sr = sr_nodes(&cube)?;
    let gq_queries = m * Method::Gq.node_count(d).unwrap_or(u64::MAX);
    let sr_queries = m * Method::Sr.node_count(d).unwrap_or(u64::MAX);

    let pairs: Vec<(f64, f64)> = with_workers(workers, || {
        (0..polynomials)
            .into_par_iter()
            .map(|j| {
                let j = j as u64;
                let f = Polynomial::random_cubic(d, seed::derive(seed, &[0, j]))?;
                let mut go = OracleInstance::new(OracleSpec::gaussian(sigma, seed::derive(seed, &[2, j, 0])))?;
                let mut so = OracleInstance::new(OracleSpec::gaussian(sigma, seed::derive(seed, &[2, j, 1])))?;
                let a = estimate(&gq, &mut go, &f, m)?.abs_error.unwrap_or(f64::NAN);
                let b = estimate(&sr, &mut so, &f, m)?.abs_error.unwrap_or(f64::NAN);
                Ok((a, b))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let (gq_mean, gq_se) = mean_and_stderr(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let (sr_mean, sr_se) = mean_and_stderr(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());

    let b = 2.0 * r;
    let gq_bound = bounds::gq_upper_bound(d, r, sigma, gq_queries as f64, k);
    let sr_bound = bounds::sr_upper_bound(d, b, sigma, sr_queries as f64, k);
    let gq_noise_term = bounds::gq_upper_bound(d, r, sigma, gq_queries as f64, 0.0).value;
    let sr_noise_term = bounds::sr_upper_bound(d, b, sigma, sr_queries as f64, 0.0).value;
    let gq_bias_term = gq_bound.value - gq_noise_term;
    let sr_bias_term = sr_bound.value - sr_noise_term;
    Ok(ComparisonReport {
        d,
        r,
        sigma,
        m,
        k,
        polynomials,
        gq_queries,
        sr_queries,
        query_ratio: sr_queries as f64 / gq_queries as f64,
        gq_mean_abs_error: gq_mean,
        gq_std_error: gq_se,
        sr_mean_abs_error: sr_mean,
        sr_std_error: sr_se,
        noise_terms_match: (gq_noise_term - sr_noise_term).abs() <= 1e-12 * gq_noise_term.abs(),
        gq_noise_term,
        sr_noise_term,
        bias_ratio: (k > 0.0).then(|| sr_bias_term / gq_bias_term),
        gq_bias_term,
        sr_bias_term,
        expected_bias_ratio: 6.0 * r * r / 7.0,
        gq_bound,
        sr_bound,
    })
}
