//! The restricted linear ensemble behind the minimax lower bound.
//!
//! Members are `g_alpha(x) = (delta / d) sum_i alpha_i (x_i + r)` for sign
//! vectors `alpha` drawn from a packing set whose members are pairwise at
//! Hamming distance at least `ceil(d / 4)`. Recovering `alpha` from an
//! integral estimate is the identification problem that Fano's inequality
//! lower-bounds.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{check_dim, Error, Result};
use crate::estimators::{self, budget_split, Method};
use crate::harness::with_workers;
use crate::integrand::Polynomial;
use crate::oracle::{OracleInstance, OracleSpec};
use crate::seed;
use crate::signs::SignVector;

/// Sign vectors with pairwise Hamming distance at least `min_separation`.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingSet {
    d: usize,
    members: Vec<SignVector>,
    min_separation: usize,
    target: usize,
    attempts: u64,
}

impl PackingSet {
    /// Randomized greedy construction that stops at the target cardinality or
    /// after `max_attempts` samples, whichever comes first. Never fails; check
    /// [`PackingSet::is_complete`].
    pub fn greedy(d: usize, seed: u64, max_attempts: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("packing dimension must be at least 1".into()));
        }
        let min_separation = d.div_ceil(4);
        let target = packing_target(d);
        let mut rng = seed::rng(seed::derive(seed, &[d as u64]));
        let mut members: Vec<SignVector> = Vec::new();
        let mut attempts = 0;
        while members.len() < target && attempts < max_attempts {
            attempts += 1;
            let candidate = SignVector::from_bools((0..d).map(|_| rng.random::<bool>()));
            if members.iter().all(|m| m.hamming(&candidate) >= min_separation) {
                members.push(candidate);
            }
        }
        Ok(PackingSet { d, members, min_separation, target, attempts })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn members(&self) -> &[SignVector] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn min_separation(&self) -> usize {
        self.min_separation
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn attempts(&self) -> u64 {
        self.attempts
    }

    pub fn is_complete(&self) -> bool {
        self.members.len() >= self.target
    }

    /// Smallest Hamming distance over all distinct pairs, by exhaustive check.
    pub fn min_pairwise_distance(&self) -> Option<usize> {
        let n = self.members.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.members[i].hamming(&self.members[j]))
            .min()
    }

    pub fn verify(&self) -> bool {
        self.members.iter().all(|m| m.dim() == self.d)
            && self.min_pairwise_distance().is_none_or(|m| m >= self.min_separation)
    }
}

/// `ceil((2 / sqrt e)^(d/2))`.
pub fn packing_target(d: usize) -> usize {
    // guard against 2.0000000001 rounding up to 3
    (bounds::packing_cardinality_bound(d) - 1e-9).ceil().max(1.0) as usize
}

/// Builds a packing set, failing if the target cardinality is not reached.
pub fn build_packing_set(d: usize, seed: u64, max_attempts: u64) -> Result<PackingSet> {
    let set = PackingSet::greedy(d, seed, max_attempts)?;
    if set.is_complete() {
        Ok(set)
    } else {
        Err(Error::PackingConstruction { achieved: set.len(), target: set.target, attempts: set.attempts })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleParams {
    pub delta: f64,
    pub r: f64,
    pub d: usize,
}

impl EnsembleParams {
    pub fn new(d: usize, delta: f64, r: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if !(delta > 0.0 && delta <= 0.25) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1/4], got {delta}")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
        }
        Ok(EnsembleParams { delta, r, d })
    }
}

pub fn g_alpha_eval(params: &EnsembleParams, alpha: &SignVector, x: &[f64]) -> Result<f64> {
    check_dim(params.d, alpha.dim())?;
    check_dim(params.d, x.len())?;
    let sum: f64 = x.iter().enumerate().map(|(i, xi)| alpha.get(i) * (xi + params.r)).sum();
    Ok(params.delta / params.d as f64 * sum)
}

/// `g_alpha` written out as a degree-1 polynomial.
pub fn g_alpha_polynomial(params: &EnsembleParams, alpha: &SignVector) -> Result<Polynomial> {
    check_dim(params.d, alpha.dim())?;
    let scale = params.delta / params.d as f64;
    let d = params.d;
    let linear = (0..d).map(|i| {
        let mut e = vec![0; d];
        e[i] = 1;
        (e, scale * alpha.get(i))
    });
    let constant = (vec![0; d], scale * params.r * alpha.sum() as f64);
    Polynomial::from_terms(d, linear.chain(std::iter::once(constant)))
}

/// Integral of `g_alpha` over `[-r, r]^d`: `(delta/d) 2^d r^(d+1) sum_i alpha_i`.
pub fn g_alpha_integral(params: &EnsembleParams, alpha: &SignVector) -> Result<f64> {
    check_dim(params.d, alpha.dim())?;
    Ok(params.delta / params.d as f64 * per_axis_integral(params) * alpha.sum() as f64)
}

/// `int_{[-r,r]^d} (x_i + r) dx = 2^d r^(d+1)`.
fn per_axis_integral(params: &EnsembleParams) -> f64 {
    (params.d as f64).exp2() * params.r.powi(params.d as i32 + 1)
}

/// Lower bound on the integral gap between distinct members,
/// `(delta / 2) 2^d r^(d+1)`; used as the operative discrepancy.
pub fn discrepancy_bound(params: &EnsembleParams) -> f64 {
    params.delta / 2.0 * per_axis_integral(params)
}

/// Exact per-query KL divergence between the coordinate-Bernoulli channels
/// for `alpha` and `beta`: `(1/d) sum_j KL(Bern(1/2 + alpha_j delta) || Bern(1/2 + beta_j delta))`.
pub fn channel_kl(alpha: &SignVector, beta: &SignVector, delta: f64) -> Result<f64> {
    check_dim(alpha.dim(), beta.dim())?;
    let d = alpha.dim() as f64;
    Ok((0..alpha.dim())
        .map(|j| bounds::bernoulli_kl(0.5 + alpha.get(j) * delta, 0.5 + beta.get(j) * delta))
        .sum::<f64>()
        / d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub index: usize,
    pub alpha: SignVector,
    /// Members whose integral lies within `psi / 3` of the estimate.
    pub qualifying: usize,
    /// True when no member qualified and the answer is a uniform draw.
    pub fallback: bool,
}

/// Decodes an integral estimate `estimate` back to a packing member.
///
/// Picks the qualifying member (integral within `psi/3`) nearest to the
/// estimate, breaking exact ties (equal coordinate sums share an integral)
/// toward the lexicographically smallest vector. With no qualifying member,
/// returns a uniform draw from `set` seeded by `seed`.
pub fn recover_alpha(set: &PackingSet, params: &EnsembleParams, estimate: f64, seed: u64) -> Result<Recovery> {
    if set.is_empty() {
        return Err(Error::InvalidParameter("packing set is empty".into()));
    }
    let threshold = discrepancy_bound(params) / 3.0;
    let mut best: Option<(f64, usize)> = None;
    let mut qualifying = 0;
    for (i, alpha) in set.members().iter().enumerate() {
        let gap = (estimate - g_alpha_integral(params, alpha)?).abs();
        if gap > threshold {
            continue;
        }
        qualifying += 1;
        let better = match best {
            None => true,
            Some((g, j)) => gap < g || (gap == g && alpha < &set.members()[j]),
        };
        if better {
            best = Some((gap, i));
        }
    }
    let (index, fallback) = match best {
        Some((_, i)) => (i, false),
        None => (seed::rng(seed).random_range(0..set.len()), true),
    };
    Ok(Recovery { index, alpha: set.members()[index].clone(), qualifying, fallback })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    pub d: usize,
    pub delta: f64,
    pub r: f64,
    pub sigma: f64,
    /// Total queries per trial; must be a multiple of `2^d`.
    pub t: u64,
    pub trials: usize,
    pub seed: u64,
    pub max_attempts: u64,
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl RecoveryConfig {
    pub fn new(d: usize, delta: f64, r: f64, sigma: f64, t: u64, trials: usize, seed: u64) -> Self {
        RecoveryConfig { d, delta, r, sigma, t, trials, seed, max_attempts: 1_000_000, workers: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverySummary {
    pub trials: usize,
    /// Trials where the decoded vector differs from the true one.
    pub failures: usize,
    pub failure_rate: f64,
    pub fano_bound: f64,
    pub mean_abs_error: f64,
    pub psi_third: f64,
    /// Trials where more than one member qualified.
    pub ties: usize,
    /// Trials where the decoded vector has a different coordinate sum, and
    /// hence a different integral, from the true one.
    pub sum_failures: usize,
    pub sum_failure_rate: f64,
    /// Largest strict failure rate over the true members that were drawn.
    pub max_member_failure_rate: f64,
    pub fallbacks: usize,
    pub psi: f64,
    pub packing_size: usize,
    pub packing_complete: bool,
    pub reference_one_third: f64,
}

impl RecoverySummary {
    /// Whether the mean estimation error is within `psi / 9`.
    pub fn error_precondition_met(&self) -> bool {
        self.mean_abs_error <= self.psi / 9.0
    }

    /// Three standard errors of a binomial proportion estimate.
    pub fn binomial_slack(rate: f64, trials: usize) -> f64 {
        3.0 * (rate * (1.0 - rate) / trials as f64).sqrt()
    }

    pub const CSV_HEADER: &'static str = "trials,failures,failure_rate,fano_bound,mean_abs_error,psi_third,ties,\
sum_failures,sum_failure_rate,max_member_failure_rate,fallbacks,psi,packing_size,packing_complete";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.trials,
            self.failures,
            self.failure_rate,
            self.fano_bound,
            self.mean_abs_error,
            self.psi_third,
            self.ties,
            self.sum_failures,
            self.sum_failure_rate,
            self.max_member_failure_rate,
            self.fallbacks,
            self.psi,
            self.packing_size,
            self.packing_complete
        )
    }
}

struct TrialOutcome {
    truth: usize,
    strict_fail: bool,
    sum_fail: bool,
    abs_error: f64,
    tie: bool,
    fallback: bool,
}

/// Runs the identification game: draw a true member, let the Gauss estimator
/// spend `t` queries on the coordinate-Bernoulli oracle for it, then decode.
pub fn recovery_experiment(cfg: &RecoveryConfig) -> Result<RecoverySummary> {
    let params = EnsembleParams::new(cfg.d, cfg.delta, cfg.r)?;
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let nodes = estimators::gq_nodes(cfg.d, cfg.r)?;
    let budget = budget_split(cfg.t, Method::Gq.node_count(cfg.d).unwrap_or(u64::MAX))?;
    let set = PackingSet::greedy(cfg.d, seed::derive(cfg.seed, &[0]), cfg.max_attempts)?;
    let integrals = set.members().iter().map(|a| g_alpha_integral(&params, a)).collect::<Result<Vec<_>>>()?;
    // fail fast on invalid oracle parameters
    OracleSpec::coordinate_bernoulli(SignVector::all_positive(cfg.d), cfg.delta, cfg.r, cfg.sigma, 0).validate()?;

    let run_trial = |trial: usize| -> Result<TrialOutcome> {
        let trial = trial as u64;
        let truth = seed::rng(seed::derive(cfg.seed, &[1, trial, 0])).random_range(0..set.len());
        let alpha = &set.members()[truth];
        let spec = OracleSpec::coordinate_bernoulli(
            alpha.clone(),
            cfg.delta,
            cfg.r,
            cfg.sigma,
            seed::derive(cfg.seed, &[1, trial, 1]),
        );
        let mut oracle = OracleInstance::new(spec)?.with_budget(budget.total);
        let f = g_alpha_polynomial(&params, alpha)?;
        let report = estimators::estimate(&nodes, &mut oracle, &f, budget.per_node)?;
        let decoded = recover_alpha(&set, &params, report.estimate, seed::derive(cfg.seed, &[1, trial, 2]))?;
        Ok(TrialOutcome {
            truth,
            strict_fail: decoded.index != truth,
            sum_fail: decoded.alpha.sum() != alpha.sum(),
            abs_error: (report.estimate - integrals[truth]).abs(),
            tie: decoded.qualifying > 1,
            fallback: decoded.fallback,
        })
    };
    let outcomes: Vec<TrialOutcome> =
        with_workers(cfg.workers, || (0..cfg.trials).into_par_iter().map(run_trial).collect::<Result<Vec<_>>>())??;

    let n = cfg.trials as f64;
    let failures = outcomes.iter().filter(|o| o.strict_fail).count();
    let sum_failures = outcomes.iter().filter(|o| o.sum_fail).count();
    let mut per_member: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for o in &outcomes {
        let e = per_member.entry(o.truth).or_default();
        e.0 += 1;
        e.1 += usize::from(o.strict_fail);
    }
    let max_member_failure_rate =
        per_member.values().map(|&(seen, failed)| failed as f64 / seen as f64).fold(0.0, f64::max);
    let psi = discrepancy_bound(&params);
    Ok(RecoverySummary {
        trials: cfg.trials,
        failures,
        failure_rate: failures as f64 / n,
        fano_bound: bounds::fano_lower(cfg.d, cfg.t as f64, cfg.delta).value,
        mean_abs_error: outcomes.iter().map(|o| o.abs_error).sum::<f64>() / n,
        psi_third: psi / 3.0,
        ties: outcomes.iter().filter(|o| o.tie).count(),
        sum_failures,
        sum_failure_rate: sum_failures as f64 / n,
        max_member_failure_rate,
        fallbacks: outcomes.iter().filter(|o| o.fallback).count(),
        psi,
        packing_size: set.len(),
        packing_complete: set.is_complete(),
        reference_one_third: 1.0 / 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::Region;
    use crate::oracle::bernoulli_oracle_mean;
    use approx::assert_relative_eq;

    fn params(d: usize, delta: f64, r: f64) -> EnsembleParams {
        EnsembleParams::new(d, delta, r).unwrap()
    }

    #[test]
    fn packing_small_dimensions() {
        let set = build_packing_set(4, 1, 1000).unwrap();
        assert_eq!(set.target(), 2);
        assert_eq!(set.min_separation(), 1);
        assert_eq!(set.len(), 2);
        assert_ne!(set.members()[0], set.members()[1]);
        assert!(set.verify());
    }

    #[test]
    fn packing_d16() {
        let set = build_packing_set(16, 9, 1_000_000).unwrap();
        assert_eq!(set.target(), 5);
        assert_eq!(set.len(), 5);
        assert!(set.min_pairwise_distance().unwrap() >= 4);
        assert!(set.verify());
    }

    #[test]
    fn packing_reports_shortfall() {
        match build_packing_set(16, 9, 1) {
            Err(Error::PackingConstruction { achieved: 1, target: 5, attempts: 1 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let partial = PackingSet::greedy(16, 9, 1).unwrap();
        assert!(!partial.is_complete());
    }

    #[test]
    fn packing_targets() {
        assert_eq!(packing_target(1), 2);
        assert_eq!(packing_target(4), 2);
        assert_eq!(packing_target(16), 5);
        assert_eq!(packing_target(24), 11);
    }

    #[test]
    fn g_alpha_examples() {
        let p = params(3, 0.2, 1.5);
        let plus = SignVector::all_positive(3);
        assert_eq!(g_alpha_eval(&p, &plus, &[-1.5; 3]).unwrap(), 0.0);
        assert_relative_eq!(g_alpha_eval(&p, &plus, &[0.0; 3]).unwrap(), 0.2 * 1.5, max_relative = 1e-15);
    }

    #[test]
    fn g_alpha_agrees_with_oracle_mean_and_polynomial() {
        let p = params(4, 0.15, 0.7);
        let alpha = SignVector::new(vec![1, -1, -1, 1]).unwrap();
        let poly = g_alpha_polynomial(&p, &alpha).unwrap();
        let mut rng = seed::rng(3);
        for _ in 0..50 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-0.7..0.7)).collect();
            let direct = g_alpha_eval(&p, &alpha, &x).unwrap();
            assert_relative_eq!(direct, bernoulli_oracle_mean(&alpha, 0.15, 0.7, &x).unwrap(), max_relative = 1e-12);
            assert_relative_eq!(direct, poly.evaluate(&x).unwrap(), max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn g_alpha_integral_examples() {
        let p = params(4, 0.2, 1.0);
        let balanced = SignVector::new(vec![1, -1, 1, -1]).unwrap();
        assert_eq!(g_alpha_integral(&p, &balanced).unwrap(), 0.0);

        let p = params(3, 0.1, 0.8);
        let plus = SignVector::all_positive(3);
        let closed = 0.1 * 8.0 * 0.8f64.powi(4);
        assert_relative_eq!(g_alpha_integral(&p, &plus).unwrap(), closed, max_relative = 1e-12);
        let poly = g_alpha_polynomial(&p, &plus).unwrap();
        let via_poly = poly.exact_integral(&Region::cube(3, 0.8).unwrap()).unwrap();
        assert_relative_eq!(via_poly, closed, max_relative = 1e-12);

        let one = params(1, 0.25, 1.0);
        assert_eq!(g_alpha_integral(&one, &SignVector::all_positive(1)).unwrap(), 0.5);
    }

    #[test]
    fn discrepancy_examples() {
        assert_eq!(discrepancy_bound(&params(1, 0.25, 1.0)), 0.25);
        assert_relative_eq!(
            discrepancy_bound(&params(5, 0.2, 1.0)),
            2.0 * discrepancy_bound(&params(5, 0.1, 1.0)),
            max_relative = 1e-15
        );
        assert_relative_eq!(discrepancy_bound(&params(5, 0.1, 0.5)), 0.1 * 16.0 * 0.5f64.powi(6), max_relative = 1e-15);
    }

    fn small_set() -> PackingSet {
        PackingSet {
            d: 4,
            members: vec![
                SignVector::new(vec![1, 1, 1, 1]).unwrap(),
                SignVector::new(vec![1, 1, -1, 1]).unwrap(),
                SignVector::new(vec![-1, 1, -1, 1]).unwrap(),
                SignVector::new(vec![1, -1, 1, -1]).unwrap(),
            ],
            min_separation: 1,
            target: 2,
            attempts: 0,
        }
    }

    #[test]
    fn recover_exact_integral_gives_same_sum() {
        let set = small_set();
        let p = params(4, 0.2, 1.0);
        for (i, alpha) in set.members().iter().enumerate() {
            let got = recover_alpha(&set, &p, g_alpha_integral(&p, alpha).unwrap(), 1).unwrap();
            assert_eq!(got.alpha.sum(), alpha.sum(), "member {i}");
            assert!(!got.fallback);
        }
        // members 2 and 3 share sum 0; tie goes to the lexicographically smaller
        let got = recover_alpha(&set, &p, 0.0, 1).unwrap();
        assert_eq!(got.index, 2);
        assert_eq!(got.qualifying, 2);
    }

    #[test]
    fn recover_perturbed_integral_picks_unique_member() {
        let set = small_set();
        let p = params(4, 0.2, 1.0);
        let psi = discrepancy_bound(&p);
        let target = g_alpha_integral(&p, &set.members()[0]).unwrap();
        let got = recover_alpha(&set, &p, target + psi / 6.0, 1).unwrap();
        assert_eq!(got.index, 0);
        assert_eq!(got.qualifying, 1);
    }

    #[test]
    fn recover_falls_back_to_uniform_draw() {
        let set = small_set();
        let p = params(4, 0.2, 1.0);
        let mut seen = [0usize; 4];
        for s in 0..400 {
            let got = recover_alpha(&set, &p, 100.0, s).unwrap();
            assert!(got.fallback);
            assert_eq!(got.qualifying, 0);
            seen[got.index] += 1;
        }
        assert!(seen.iter().all(|&c| c > 50), "{seen:?}");
        let a = recover_alpha(&set, &p, 100.0, 5).unwrap();
        assert_eq!(a, recover_alpha(&set, &p, 100.0, 5).unwrap());
    }

    #[test]
    fn channel_kl_is_below_bound() {
        let set = build_packing_set(8, 2, 100_000).unwrap();
        for delta in [0.01, 0.1, 0.25] {
            for a in set.members() {
                for b in set.members() {
                    let kl = channel_kl(a, b, delta).unwrap();
                    assert!(kl >= 0.0);
                    assert!(kl <= bounds::kl_bound(1.0, delta).value);
                }
            }
        }
    }

    #[test]
    fn recovery_uninformative_oracle_fails_like_a_guess() {
        // tiny delta: all integrals collapse to ~0, so decoding is a coin toss
        let mut cfg = RecoveryConfig::new(8, 1e-6, 0.5, 1.0, 256, 400, 3);
        cfg.workers = Some(2);
        let s = recovery_experiment(&cfg).unwrap();
        assert_eq!(s.packing_size, 3);
        let chance = (s.packing_size as f64 - 1.0) / s.packing_size as f64;
        let slack = RecoverySummary::binomial_slack(chance, s.trials);
        assert!((s.failure_rate - chance).abs() <= slack, "{} vs {chance}", s.failure_rate);
        assert!(s.failure_rate >= s.fano_bound - slack);
    }

    #[test]
    fn recovery_is_deterministic_across_worker_counts() {
        let mut cfg = RecoveryConfig::new(6, 0.2, 0.5, 1.0, 64 * 4, 60, 11);
        cfg.workers = Some(1);
        let a = recovery_experiment(&cfg).unwrap();
        cfg.workers = Some(3);
        let b = recovery_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv_row(), b.to_csv_row());
    }

    #[test]
    fn recovery_rejects_bad_budget() {
        let cfg = RecoveryConfig::new(4, 0.1, 0.5, 1.0, 17, 5, 0);
        assert!(matches!(recovery_experiment(&cfg), Err(Error::IndivisibleBudget { .. })));
    }
}
