//! Tensor-product Gaussian Quadrature and Simpson's Rule estimators that
//! average `m` oracle queries per node.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bounds::{self, BoundValue};
use crate::error::{check_dim, Error, Result};
use crate::integrand::{Polynomial, Region};
use crate::oracle::OracleInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gq,
    Sr,
}

impl Method {
    pub fn nodes_per_axis(self) -> u64 {
        match self {
            Method::Gq => 2,
            Method::Sr => 3,
        }
    }

    pub fn node_count(self, d: usize) -> Option<u64> {
        self.nodes_per_axis().checked_pow(d as u32)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Gq => "gq",
            Method::Sr => "sr",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gq" | "gauss" => Ok(Method::Gq),
            "sr" | "simpson" => Ok(Method::Sr),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// Query points and weights of a tensor-product rule, in lexicographic order.
#[derive(Debug, Clone)]
pub struct NodeSet {
    method: Method,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
    region: Region,
}

impl NodeSet {
    pub fn method(&self) -> Method {
        self.method
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    /// Quadrature sum with exact function values.
    pub fn apply(&self, f: &Polynomial) -> Result<f64> {
        check_dim(self.dim(), f.dim())?;
        Ok(self.nodes.iter().zip(&self.weights).map(|(v, w)| w * f.eval_unchecked(v)).sum())
    }
}

/// The `2^d` points `(+-r/sqrt3, ..., +-r/sqrt3)`, each with weight `r^d`.
/// The first coordinate varies slowest and `-` precedes `+`.
pub fn gq_nodes(d: usize, r: f64) -> Result<NodeSet> {
    let region = Region::cube(d, r)?;
    let count = Method::Gq
        .node_count(d)
        .filter(|&n| n <= 1 << 30)
        .ok_or_else(|| Error::InvalidParameter(format!("2^{d} nodes is too many")))?;
    let a = r / 3f64.sqrt();
    let nodes =
        (0..count).map(|idx| (0..d).map(|i| if idx >> (d - 1 - i) & 1 == 1 { a } else { -a }).collect()).collect();
    let w = r.powi(d as i32);
    Ok(NodeSet { method: Method::Gq, nodes, weights: vec![w; count as usize], region })
}

/// The `3^d` grid over `{a_i, (a_i+b_i)/2, b_i}` with weights
/// `4^(midpoint count) * prod (b_i - a_i)/6`.
pub fn sr_nodes(region: &Region) -> Result<NodeSet> {
    let d = region.dim();
    let count = Method::Sr
        .node_count(d)
        .filter(|&n| n <= 1 << 30)
        .ok_or_else(|| Error::InvalidParameter(format!("3^{d} nodes is too many")))?;
    let base: f64 = region.bounds().iter().map(|(a, b)| (b - a) / 6.0).product();
    let mut nodes = Vec::with_capacity(count as usize);
    let mut weights = Vec::with_capacity(count as usize);
    let mut digits = vec![0u8; d];
    for _ in 0..count {
        let mut mids = 0;
        let point = digits
            .iter()
            .zip(region.bounds())
            .map(|(&k, &(a, b))| match k {
                0 => a,
                1 => {
                    mids += 1;
                    (a + b) / 2.0
                }
                _ => b,
            })
            .collect();
        nodes.push(point);
        weights.push(4f64.powi(mids) * base);
        for slot in digits.iter_mut().rev() {
            *slot += 1;
            if *slot < 3 {
                break;
            }
            *slot = 0;
        }
    }
    Ok(NodeSet { method: Method::Sr, nodes, weights, region: region.clone() })
}

/// Decomposition `T = m * node_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub total: u64,
    pub per_node: u64,
    pub node_count: u64,
}

impl Budget {
    pub fn from_repeats(per_node: u64, node_count: u64) -> Result<Self> {
        if per_node == 0 || node_count == 0 {
            return Err(Error::InvalidParameter("m and node count must be at least 1".into()));
        }
        let total =
            per_node.checked_mul(node_count).ok_or_else(|| Error::InvalidParameter("query budget overflows".into()))?;
        Ok(Budget { total, per_node, node_count })
    }
}

/// Splits a total budget evenly across nodes. Indivisible budgets are an
/// error that names the nearest valid budgets.
pub fn budget_split(total: u64, node_count: u64) -> Result<Budget> {
    if node_count == 0 {
        return Err(Error::InvalidParameter("node count must be at least 1".into()));
    }
    if total < node_count {
        return Err(Error::BudgetTooSmall { total, nodes: node_count });
    }
    if !total.is_multiple_of(node_count) {
        let below = total / node_count * node_count;
        return Err(Error::IndivisibleBudget { total, nodes: node_count, below, above: below + node_count });
    }
    Budget::from_repeats(total / node_count, node_count)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub method: Method,
    pub estimate: f64,
    pub budget: Budget,
    pub exact: Option<f64>,
    pub abs_error: Option<f64>,
    pub bound_values: BTreeMap<&'static str, BoundValue>,
}

impl EstimateReport {
    pub fn with_exact(mut self, exact: f64) -> Self {
        self.exact = Some(exact);
        self.abs_error = Some((self.estimate - exact).abs());
        self
    }

    pub fn csv_header() -> &'static str {
        "method,estimate,exact,abs_error,total_queries,per_node,node_count,bound,bound_value"
    }

    /// One CSV line (no header); the headline bound is the method's upper bound.
    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let key = match self.method {
            Method::Gq => "gq_upper",
            Method::Sr => "sr_upper",
        };
        let bound = self.bound_values.get(key).map(|b| b.value.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.method,
            self.estimate,
            opt(self.exact),
            opt(self.abs_error),
            self.budget.total,
            self.budget.per_node,
            self.budget.node_count,
            key,
            bound
        )
    }
}

/// Queries every node `m` times, averages, and returns the weighted sum.
///
/// The report carries the exact integral of `f` and the bounds evaluated at
/// the oracle's declared `sigma` and the module-computed fourth-derivative
/// bound of `f`.
pub fn estimate(ns: &NodeSet, oracle: &mut OracleInstance, f: &Polynomial, m: u64) -> Result<EstimateReport> {
    check_dim(ns.dim(), f.dim())?;
    let budget = Budget::from_repeats(m, ns.len() as u64)?;
    let mut total = 0.0;
    for (v, w) in ns.nodes.iter().zip(&ns.weights) {
        total += w * oracle.query_mean(f, v, m)?;
    }
    let region = ns.region();
    let k = f.fourth_derivative_bound(region).value();
    let sigma = oracle.spec().sigma;
    let d = ns.dim();
    let t = budget.total as f64;
    let mut bound_values = BTreeMap::new();
    match ns.method {
        Method::Gq => {
            let r = region.cube_radius().expect("gauss nodes live on a cube");
            bound_values.insert("gq_upper", bounds::gq_upper_bound(d, r, sigma, t, k));
            bound_values.insert("gq_gaussian", bounds::gq_gaussian_error(d, r, sigma, t, k, None));
        }
        Method::Sr => {
            bound_values.insert("sr_upper", bounds::sr_upper_bound(d, region.max_width(), sigma, t, k));
        }
    }
    let report =
        EstimateReport { method: ns.method, estimate: total, budget, exact: None, abs_error: None, bound_values };
    Ok(report.with_exact(f.exact_integral(region)?))
}

/// Builds the node set for `method` over `region`. Gauss quadrature only
/// supports centered cubes.
pub fn node_set(method: Method, region: &Region) -> Result<NodeSet> {
    match method {
        Method::Gq => {
            let r = region.cube_radius().ok_or_else(|| {
                Error::InvalidRegion(format!("gauss quadrature needs a centered cube [-r, r]^d, got {region}"))
            })?;
            gq_nodes(region.dim(), r)
        }
        Method::Sr => sr_nodes(region),
    }
}
