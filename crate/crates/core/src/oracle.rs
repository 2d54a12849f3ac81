//! Zero-order stochastic oracles: noise-free, Gaussian, and the
//! coordinate-Bernoulli channel used by the lower-bound ensemble.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::integrand::Polynomial;
use crate::seed;
use crate::signs::SignVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    NoiseFree,
    Gaussian,
    CoordinateBernoulli,
}

impl OracleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OracleKind::NoiseFree => "noise_free",
            OracleKind::Gaussian => "gaussian",
            OracleKind::CoordinateBernoulli => "coordinate_bernoulli",
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "none" | "noise_free" | "noisefree" => Ok(OracleKind::NoiseFree),
            "gaussian" => Ok(OracleKind::Gaussian),
            "coordinate_bernoulli" | "bernoulli" => Ok(OracleKind::CoordinateBernoulli),
            other => Err(Error::InvalidParameter(format!("unknown oracle kind {other:?}"))),
        }
    }
}

/// Parameters of the coordinate-Bernoulli channel.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliParams {
    pub alpha: SignVector,
    pub delta: f64,
    /// Radius defining `h_i(z) = z + r`; queries must lie in `[-r, r]^d`.
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpec {
    pub kind: OracleKind,
    /// Standard deviation bound: `Var(phi) <= sigma^2`.
    pub sigma: f64,
    pub seed: u64,
    pub bernoulli: Option<BernoulliParams>,
}

impl OracleSpec {
    pub fn noise_free() -> Self {
        OracleSpec { kind: OracleKind::NoiseFree, sigma: 0.0, seed: 0, bernoulli: None }
    }

    pub fn gaussian(sigma: f64, seed: u64) -> Self {
        OracleSpec { kind: OracleKind::Gaussian, sigma, seed, bernoulli: None }
    }

    pub fn coordinate_bernoulli(alpha: SignVector, delta: f64, r: f64, sigma: f64, seed: u64) -> Self {
        OracleSpec {
            kind: OracleKind::CoordinateBernoulli,
            sigma,
            seed,
            bernoulli: Some(BernoulliParams { alpha, delta, r }),
        }
    }

    /// Checks the parameter invariants. Returns advisory notes for
    /// configurations that are accepted but sit outside the strict regime.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut notes = Vec::new();
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        match self.kind {
            OracleKind::NoiseFree => {}
            OracleKind::Gaussian => {
                if self.sigma <= 0.0 {
                    return Err(Error::InvalidParameter("gaussian oracle needs sigma > 0".into()));
                }
            }
            OracleKind::CoordinateBernoulli => {
                let p = self.bernoulli.as_ref().ok_or_else(|| {
                    Error::InvalidParameter("coordinate-Bernoulli oracle needs alpha, delta and r".into())
                })?;
                if !(p.delta > 0.0 && p.delta <= 0.25) {
                    return Err(Error::InvalidParameter(format!("delta must lie in (0, 1/4], got {}", p.delta)));
                }
                if !(p.r > 0.0 && p.r.is_finite()) {
                    return Err(Error::InvalidParameter(format!("r must be positive, got {}", p.r)));
                }
                if p.r > 2.0 * self.sigma {
                    return Err(Error::InvalidParameter(format!(
                        "variance infeasible: r = {} exceeds 2 sigma = {}",
                        p.r,
                        2.0 * self.sigma
                    )));
                }
                if p.r > self.sigma {
                    notes.push(format!(
                        "r = {} exceeds sigma = {}: the per-query variance r^2 can exceed sigma^2; \
                         only the weaker sup|x| <= 2 sigma condition holds",
                        p.r, self.sigma
                    ));
                }
            }
        }
        Ok(notes)
    }

    /// Flat `oracle.key = value` form (valid TOML dotted keys).
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "oracle.kind = \"{}\"", self.kind);
        let _ = writeln!(out, "oracle.sigma = {:?}", self.sigma);
        let _ = writeln!(out, "oracle.seed = {}", self.seed);
        if let Some(p) = &self.bernoulli {
            let alpha: Vec<String> = p.alpha.as_slice().iter().map(|s| s.to_string()).collect();
            let _ = writeln!(out, "oracle.delta = {:?}", p.delta);
            let _ = writeln!(out, "oracle.alpha = [{}]", alpha.join(", "));
            let _ = writeln!(out, "oracle.r = {:?}", p.r);
        }
        out
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Parse { line: 0, msg };
        let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| bad(e.to_string()))?;
        let table = doc.get("oracle").and_then(|v| v.as_table()).ok_or_else(|| bad("missing oracle.* keys".into()))?;
        let float = |key: &str| -> Result<Option<f64>> {
            match table.get(key) {
                None => Ok(None),
                Some(toml::Value::Float(f)) => Ok(Some(*f)),
                Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
                Some(v) => Err(bad(format!("oracle.{key} must be a number, got {v}"))),
            }
        };
        let kind: OracleKind = table
            .get("kind")
            .and_then(|v| v.as_str())
            .ok_or_else(|| bad("oracle.kind must be a string".into()))?
            .parse()?;
        let sigma = float("sigma")?.unwrap_or(0.0);
        let seed = match table.get("seed") {
            None => 0,
            Some(toml::Value::Integer(i)) if *i >= 0 => *i as u64,
            Some(v) => return Err(bad(format!("oracle.seed must be a nonnegative integer, got {v}"))),
        };
        let bernoulli = if kind == OracleKind::CoordinateBernoulli {
            let alpha = table
                .get("alpha")
                .and_then(|v| v.as_array())
                .ok_or_else(|| bad("oracle.alpha must be a list of +1/-1".into()))?
                .iter()
                .map(|v| v.as_integer().map(|i| i as i8).ok_or_else(|| bad(format!("bad alpha entry {v}"))))
                .collect::<Result<Vec<i8>>>()?;
            Some(BernoulliParams {
                alpha: SignVector::new(alpha)?,
                delta: float("delta")?.ok_or_else(|| bad("missing oracle.delta".into()))?,
                r: float("r")?.ok_or_else(|| bad("missing oracle.r".into()))?,
            })
        } else {
            None
        };
        let spec = OracleSpec { kind, sigma, seed, bernoulli };
        spec.validate()?;
        Ok(spec)
    }
}

/// Number of queries made, in total and per distinct point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QueryLog {
    count: u64,
    per_point: HashMap<Vec<u64>, u64>,
}

impl QueryLog {
    fn record(&mut self, x: &[f64], n: u64) {
        self.count += n;
        *self.per_point.entry(point_key(x)).or_insert(0) += n;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn count_at(&self, x: &[f64]) -> u64 {
        self.per_point.get(&point_key(x)).copied().unwrap_or(0)
    }

    pub fn distinct_points(&self) -> usize {
        self.per_point.len()
    }

    pub fn per_point_total(&self) -> u64 {
        self.per_point.values().sum()
    }
}

fn point_key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

/// A live oracle: a spec bound to its own seeded random stream.
#[derive(Debug, Clone)]
pub struct OracleInstance {
    spec: OracleSpec,
    rng: ChaCha8Rng,
    log: QueryLog,
    budget: Option<u64>,
    coin: Vec<Bernoulli>,
}

impl OracleInstance {
    pub fn new(spec: OracleSpec) -> Result<Self> {
        spec.validate()?;
        let coin = match &spec.bernoulli {
            Some(p) if spec.kind == OracleKind::CoordinateBernoulli => (0..p.alpha.dim())
                .map(|i| {
                    Bernoulli::new(0.5 + p.alpha.get(i) * p.delta).map_err(|e| Error::InvalidParameter(e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?,
            _ => Vec::new(),
        };
        Ok(OracleInstance { rng: seed::rng(spec.seed), spec, log: QueryLog::default(), budget: None, coin })
    }

    /// Caps the total number of queries; exceeding it is an error.
    pub fn with_budget(mut self, total: u64) -> Self {
        self.budget = Some(total);
        self
    }

    pub fn spec(&self) -> &OracleSpec {
        &self.spec
    }

    pub fn log(&self) -> &QueryLog {
        &self.log
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    /// Declared variance bound `sigma^2`.
    pub fn variance_bound(&self) -> f64 {
        self.spec.sigma * self.spec.sigma
    }

    fn admit(&mut self, f: &Polynomial, x: &[f64], n: u64) -> Result<()> {
        check_dim(f.dim(), x.len())?;
        if let Some(p) = &self.spec.bernoulli {
            check_dim(p.alpha.dim(), x.len())?;
            if x.iter().any(|v| v.abs() > p.r) {
                return Err(Error::OutOfRegion { point: x.to_vec(), radius: p.r });
            }
        }
        if let Some(budget) = self.budget {
            if self.log.count + n > budget {
                return Err(Error::BudgetExhausted { used: self.log.count, requested: n, budget });
            }
        }
        self.log.record(x, n);
        Ok(())
    }

    /// One query `phi(x, f)`.
    pub fn query(&mut self, f: &Polynomial, x: &[f64]) -> Result<f64> {
        self.admit(f, x, 1)?;
        let fx = match self.spec.kind {
            OracleKind::CoordinateBernoulli => 0.0,
            _ => f.eval_unchecked(x),
        };
        Ok(self.draw(fx, x))
    }

    /// Mean of `m` independent queries at `x`. Consumes the random stream in
    /// exactly the same order as `m` calls to [`OracleInstance::query`], but
    /// evaluates `f` only once.
    pub fn query_mean(&mut self, f: &Polynomial, x: &[f64], m: u64) -> Result<f64> {
        if m == 0 {
            return Err(Error::InvalidParameter("need at least one query".into()));
        }
        self.admit(f, x, m)?;
        let fx = match self.spec.kind {
            OracleKind::CoordinateBernoulli => 0.0,
            _ => f.eval_unchecked(x),
        };
        let total: f64 = (0..m).map(|_| self.draw(fx, x)).sum();
        Ok(total / m as f64)
    }

    fn draw(&mut self, fx: f64, x: &[f64]) -> f64 {
        match self.spec.kind {
            OracleKind::NoiseFree => fx,
            OracleKind::Gaussian => {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                fx + self.spec.sigma * z
            }
            OracleKind::CoordinateBernoulli => {
                let p = self.spec.bernoulli.as_ref().expect("validated");
                let i = self.rng.random_range(0..p.alpha.dim());
                let h = x[i] + p.r;
                if self.coin[i].sample(&mut self.rng) {
                    h / 2.0
                } else {
                    -h / 2.0
                }
            }
        }
    }
}

/// Analytic mean of the coordinate-Bernoulli oracle,
/// `(delta / d) * sum_i alpha_i (x_i + r)`.
pub fn bernoulli_oracle_mean(alpha: &SignVector, delta: f64, r: f64, x: &[f64]) -> Result<f64> {
    check_dim(alpha.dim(), x.len())?;
    let d = alpha.dim() as f64;
    Ok(delta / d * x.iter().enumerate().map(|(i, xi)| alpha.get(i) * (xi + r)).sum::<f64>())
}

/// `(1/4) sup_{z in [-r, r]} (z + r)^2 = r^2`, the worst-case per-query
/// variance of the coordinate-Bernoulli oracle. Independent of `d`.
pub fn bernoulli_oracle_variance_bound(r: f64, _d: usize) -> f64 {
    let h_max = 2.0 * r;
    h_max * h_max / 4.0
}
