//! Closed-form error bounds and information-theoretic quantities.
//!
//! Every evaluator is a pure function. Violated preconditions never raise;
//! they come back as a [`BoundValue`] with `valid == false` and a note, so a
//! parameter sweep can render the cell as N/A. Logarithms are natural.

use std::f64::consts::{FRAC_2_PI, LN_2, SQRT_2};

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundValue {
    pub name: &'static str,
    pub value: f64,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundValue {
    fn ok(name: &'static str, value: f64) -> Self {
        BoundValue { name, value, valid: true, note: None }
    }

    fn invalid(name: &'static str, value: f64, note: impl Into<String>) -> Self {
        BoundValue { name, value, valid: false, note: Some(note.into()) }
    }

    fn with_note(mut self, note: Option<String>) -> Self {
        if note.is_some() {
            self.note = note;
        }
        self
    }
}

/// `ln(2 / sqrt(e)) = ln 2 - 1/2`.
pub fn ln_two_over_sqrt_e() -> f64 {
    LN_2 - 0.5
}

fn pow2(e: f64) -> f64 {
    e.exp2()
}

fn budget_note(t: f64, nodes: f64) -> Option<String> {
    let m = t / nodes;
    (m.fract() != 0.0 || m < 1.0).then(|| format!("T = {t} is not a positive multiple of the node count {nodes}"))
}

/// Hermite-interpolation constant of the two-point Gauss rule on `[-r, r]`:
/// `int ((x - r/sqrt3)(x + r/sqrt3))^2 dx = 8 r^5 / 45`.
pub fn gq_hermite_constant(r: f64) -> f64 {
    8.0 * r.powi(5) / 45.0
}

/// Hermite-interpolation constant of Simpson's rule on `[a, b]`:
/// `int ((x - a)(x - (a+b)/2)(x - b))^2 dx = (b - a)^7 / 840`.
pub fn sr_hermite_constant(a: f64, b: f64) -> f64 {
    (b - a).powi(7) / 840.0
}

/// Non-noisy Gauss quadrature error bound `c 2^d r^d K / 4!` with
/// `c = 8 r^5 / 45`.
pub fn gq_deterministic_error_bound(d: usize, r: f64, k: f64) -> f64 {
    gq_hermite_constant(r) * (2.0 * r).powi(d as i32) * k / 24.0
}

/// Non-noisy Simpson error bound `(c / 4!) K prod(b_i - a_i)` with
/// `c = max_i (b_i - a_i)^7 / 840`.
pub fn sr_deterministic_error_bound(bounds: &[(f64, f64)], k: f64) -> f64 {
    let c = bounds.iter().map(|&(a, b)| sr_hermite_constant(a, b)).fold(0.0, f64::max);
    let volume: f64 = bounds.iter().map(|(a, b)| b - a).product();
    c / 24.0 * k * volume
}

/// Variance of the noisy Gauss estimator when every query has variance
/// `sigma^2`: `2^d r^(2d) sigma^2 / m`.
pub fn gq_estimator_variance(d: usize, r: f64, sigma: f64, m: u64) -> f64 {
    pow2(d as f64) * r.powi(2 * d as i32) * sigma * sigma / m as f64
}

/// Minimax lower bound with the explicit constant from the Fano argument:
/// `2^d r^(d+1) sqrt((d ln(2/sqrt e) - 3 ln 2) / (324 * 3 * 16 * T))`.
///
/// Invalid when the radicand is nonpositive, which happens for `d <= 10`.
pub fn lower_bound(d: usize, r: f64, t: f64) -> BoundValue {
    const NAME: &str = "lower";
    if d == 0 || !(r > 0.0) || !(t >= 1.0) {
        return BoundValue::invalid(NAME, f64::NAN, "requires d >= 1, r > 0, T >= 1");
    }
    let numerator = d as f64 * ln_two_over_sqrt_e() - 3.0 * LN_2;
    if numerator <= 0.0 {
        return BoundValue::invalid(
            NAME,
            f64::NAN,
            format!("radicand d ln(2/sqrt e) - 3 ln 2 = {numerator} is nonpositive"),
        );
    }
    let radicand = numerator / (324.0 * 3.0 * 16.0 * t);
    BoundValue::ok(NAME, pow2(d as f64) * r.powi(d as i32 + 1) * radicand.sqrt())
}

/// Gauss quadrature upper bound
/// `2^(d+1) r^d sigma / sqrt(T) + 2^(d+1) r^(d+5) K / (6 * 45)`.
pub fn gq_upper_bound(d: usize, r: f64, sigma: f64, t: f64, k: f64) -> BoundValue {
    const NAME: &str = "gq_upper";
    if d == 0 || !(r > 0.0) || !(t > 0.0) || sigma < 0.0 || k < 0.0 {
        return BoundValue::invalid(NAME, f64::NAN, "requires d >= 1, r > 0, T > 0, sigma >= 0, K >= 0");
    }
    let noise = pow2(d as f64 + 1.0) * r.powi(d as i32) * sigma / t.sqrt();
    let bias = if k == 0.0 { 0.0 } else { pow2(d as f64 + 1.0) * r.powi(d as i32 + 5) * k / (6.0 * 45.0) };
    BoundValue::ok(NAME, noise + bias).with_note(budget_note(t, pow2(d as f64)))
}

/// Expected absolute error of the Gauss estimator under a Gaussian oracle.
///
/// With `K = 0` this is `2^d r^d sigma sqrt(2/pi) / sqrt(T)`. With `K > 0` it is
/// the equality case of the Hermite error term,
/// `(2^d r^d sigma / sqrt T) exp(-c1 2^d / sigma^2) sqrt(2/pi)
///  + c2 2^(3d/2) r^d / sqrt(T) erf(c3 2^(d/2) / sigma)`
/// with `c1 = c^2/48`, `c2 = c/4!`, `c3 = c/(24 sqrt 2)`. `c` defaults to the
/// worst case `8 r^5 / 45`; `K` itself only selects the branch. The exact
/// folded-normal mean has `c^2/1152` in the exponent; `c1` keeps the published
/// constant.
pub fn gq_gaussian_error(d: usize, r: f64, sigma: f64, t: f64, k: f64, c: Option<f64>) -> BoundValue {
    const NAME: &str = "gq_gaussian";
    if d == 0 || !(r > 0.0) || !(t > 0.0) || sigma < 0.0 || k < 0.0 {
        return BoundValue::invalid(NAME, f64::NAN, "requires d >= 1, r > 0, T > 0, sigma >= 0, K >= 0");
    }
    let df = d as f64;
    let note = budget_note(t, pow2(df));
    let scale = pow2(df) * r.powi(d as i32) / t.sqrt();
    if k == 0.0 {
        return BoundValue::ok(NAME, scale * sigma * FRAC_2_PI.sqrt()).with_note(note);
    }
    let c = c.unwrap_or_else(|| gq_hermite_constant(r));
    if c < 0.0 {
        return BoundValue::invalid(NAME, f64::NAN, "Hermite constant c must be nonnegative");
    }
    let c1 = c * c / 48.0;
    let c2 = c / 24.0;
    let c3 = c / (24.0 * SQRT_2);
    let value = if sigma == 0.0 {
        // sigma -> 0 limit: exp term vanishes, erf -> 1
        c2 * pow2(1.5 * df) * r.powi(d as i32) / t.sqrt()
    } else {
        scale * sigma * (-c1 * pow2(df) / (sigma * sigma)).exp() * FRAC_2_PI.sqrt()
            + c2 * pow2(1.5 * df) * r.powi(d as i32) / t.sqrt() * libm::erf(c3 * pow2(df / 2.0) / sigma)
    };
    BoundValue::ok(NAME, value).with_note(note)
}

/// Simpson's rule upper bound
/// `3^(d/2) B^d sigma / (2^(d/2 - 1) sqrt T) + B^(d+7) K / (840 * 4!)`
/// where `B` bounds every side length.
pub fn sr_upper_bound(d: usize, b: f64, sigma: f64, t: f64, k: f64) -> BoundValue {
    const NAME: &str = "sr_upper";
    if d == 0 || !(b > 0.0) || !(t > 0.0) || sigma < 0.0 || k < 0.0 {
        return BoundValue::invalid(NAME, f64::NAN, "requires d >= 1, B > 0, T > 0, sigma >= 0, K >= 0");
    }
    let df = d as f64;
    let noise = 3f64.powf(df / 2.0) * b.powi(d as i32) * sigma / (pow2(df / 2.0 - 1.0) * t.sqrt());
    let bias = if k == 0.0 { 0.0 } else { b.powi(d as i32 + 7) * k / (840.0 * 24.0) };
    BoundValue::ok(NAME, noise + bias).with_note(budget_note(t, 3f64.powi(d as i32)))
}

/// Exact KL divergence between Bernoulli(p) and Bernoulli(q), in nats.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    term(p, q) + term(1.0 - p, 1.0 - q)
}

/// `16 T delta^2`, the KL bound between any two coordinate-Bernoulli query
/// transcripts of length `T`. Valid for `0 < delta <= 1/4`.
pub fn kl_bound(t: f64, delta: f64) -> BoundValue {
    const NAME: &str = "kl";
    let value = 16.0 * t * delta * delta;
    if !(delta > 0.0 && delta <= 0.25) {
        return BoundValue::invalid(NAME, value, format!("delta = {delta} outside (0, 1/4]"));
    }
    BoundValue::ok(NAME, value)
}

/// Fano lower bound on the probability of misidentifying the packing member,
/// `1 - (16 T delta^2 + ln 2) / ((d/2) ln(2/sqrt e))`, clamped to [0, 1].
pub fn fano_lower(d: usize, t: f64, delta: f64) -> BoundValue {
    const NAME: &str = "fano";
    if d == 0 {
        return BoundValue::invalid(NAME, f64::NAN, "requires d >= 1");
    }
    let raw = 1.0 - (16.0 * t * delta * delta + LN_2) / (d as f64 / 2.0 * ln_two_over_sqrt_e());
    let clamped = raw.clamp(0.0, 1.0);
    if !(delta > 0.0 && delta <= 0.25) {
        return BoundValue::invalid(NAME, clamped, format!("delta = {delta} outside (0, 1/4]; raw = {raw}"));
    }
    let note = (raw != clamped).then(|| format!("raw = {raw}"));
    BoundValue::ok(NAME, clamped).with_note(note)
}

/// Guaranteed packing cardinality `(2 / sqrt e)^(d/2)`.
pub fn packing_cardinality_bound(d: usize) -> f64 {
    (d as f64 / 2.0 * ln_two_over_sqrt_e()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lower_bound_validity_threshold() {
        let at10 = lower_bound(10, 1.0, 100.0);
        assert!(!at10.valid);
        assert!(at10.value.is_nan());
        assert!(lower_bound(11, 1.0, 100.0).valid);
    }

    #[test]
    fn lower_bound_value_and_scaling() {
        // independent evaluation with the constants written out
        let d = 11.0_f64;
        let expected = 2f64.powf(d) * ((d * (2f64.ln() - 0.5) - 3.0 * 2f64.ln()) / (15552.0 * 15552.0)).sqrt();
        let got = lower_bound(11, 1.0, 15552.0);
        assert_relative_eq!(got.value, expected, max_relative = 1e-12);
        let quarter = lower_bound(11, 1.0, 4.0 * 15552.0);
        assert_relative_eq!(quarter.value, got.value / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn gq_upper_examples() {
        assert_relative_eq!(gq_upper_bound(1, 1.0, 1.0, 4.0, 0.0).value, 2.0);
        let v = gq_upper_bound(10, 5.0, 1.0, 1024.0, 0.0).value;
        assert_relative_eq!(v, 64.0 * 5f64.powi(10), max_relative = 1e-14);
        let ratio = gq_upper_bound(3, 2.0, 1.0, 64.0, 0.0).value / gq_upper_bound(3, 1.0, 1.0, 64.0, 0.0).value;
        assert_relative_eq!(ratio, 8.0, max_relative = 1e-14);
        let with_k = gq_upper_bound(1, 1.0, 1.0, 4.0, 2.0).value;
        assert_relative_eq!(with_k, 2.0 + 4.0 * 2.0 / 270.0, max_relative = 1e-14);
        assert!(gq_upper_bound(2, 1.0, 1.0, 6.0, 0.0).note.is_some());
        assert!(gq_upper_bound(2, 1.0, 1.0, 8.0, 0.0).note.is_none());
    }

    #[test]
    fn gq_gaussian_figure_constants() {
        let t = 4096.0;
        let fig1 = gq_gaussian_error(10, 5.0, 1.0, t, 0.0, None).value * t.sqrt();
        assert_relative_eq!(fig1, 7.9788456e9, max_relative = 1e-6);
        for d in 1..=16 {
            let t = 4.0 * 2f64.powi(d);
            let v = gq_gaussian_error(d as usize, 5.0, 1.0, t, 0.0, None).value;
            assert_relative_eq!(v, 0.3989422804 * 50f64.sqrt().powi(d), max_relative = 1e-6);
        }
        for k in -5..=10 {
            let r = 2f64.powi(k);
            let v = gq_gaussian_error(10, r, 1.0, 4096.0, 0.0, None).value;
            assert_relative_eq!(v, 12.76615297 * r.powi(10), max_relative = 1e-6);
        }
    }

    #[test]
    fn gq_gaussian_is_scaled_upper_first_term() {
        for (d, r, s, t) in [(1, 1.0, 1.0, 2.0), (4, 0.5, 3.0, 64.0), (7, 2.0, 0.1, 1280.0)] {
            let ratio = gq_gaussian_error(d, r, s, t, 0.0, None).value / gq_upper_bound(d, r, s, t, 0.0).value;
            assert_relative_eq!(ratio, FRAC_2_PI.sqrt() / 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn gq_gaussian_positive_k_branch() {
        let (d, r, sigma, t): (usize, f64, f64, f64) = (2, 1.0, 1.0, 16.0);
        let c = gq_hermite_constant(r);
        // Folded normal E|N(S, s^2)| = s exp(-S^2/2s^2) sqrt(2/pi) + S erf(S / (sqrt2 s))
        // with S = c 2^d r^d / (4! sqrt m) and s^2 = 2^d r^2d sigma^2 / m.
        let m = t / 4.0;
        let s = (4.0 * sigma * sigma / m).sqrt();
        let shift = c * 4.0 / (24.0 * m.sqrt());
        let got = gq_gaussian_error(d, r, sigma, t, 1.0, None).value;
        let erf_part = shift * libm::erf(shift / (SQRT_2 * s));
        // exponent uses the stated c1 = c^2 / 48, not S^2 / (2 s^2) = c^2 2^d / 1152
        let exp_part = s * (-c * c / 48.0 * 4.0 / (sigma * sigma)).exp() * FRAC_2_PI.sqrt();
        assert_relative_eq!(got, exp_part + erf_part, max_relative = 1e-12);
        assert!(gq_gaussian_error(d, r, 0.0, t, 1.0, None).valid);
    }

    #[test]
    fn sr_upper_examples() {
        assert_relative_eq!(sr_upper_bound(1, 1.0, 1.0, 3.0, 0.0).value, SQRT_2, max_relative = 1e-14);
        let ratio = sr_upper_bound(3, 2.0, 1.0, 27.0, 0.0).value / sr_upper_bound(3, 1.0, 1.0, 27.0, 0.0).value;
        assert_relative_eq!(ratio, 8.0, max_relative = 1e-14);
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_bound(1.0, 0.25).value, 1.0);
        assert!(!kl_bound(1.0, 0.3).valid);
        for i in 1..=25 {
            let delta = i as f64 / 100.0;
            let exact = bernoulli_kl(0.5 + delta, 0.5 - delta);
            assert_relative_eq!(exact, 2.0 * delta * ((0.5 + delta) / (0.5 - delta)).ln(), max_relative = 1e-12);
            assert!(exact <= 16.0 * delta * delta);
        }
        assert_eq!(bernoulli_kl(0.3, 0.3), 0.0);
    }

    #[test]
    fn fano_examples() {
        let big_t = fano_lower(16, 1e6, 0.1);
        assert_eq!(big_t.value, 0.0);
        assert!(big_t.note.is_some());
        let zero_t = fano_lower(100, 0.0, 0.1).value;
        assert_relative_eq!(zero_t, 1.0 - LN_2 / (50.0 * (LN_2 - 0.5)), max_relative = 1e-14);
        assert!(zero_t < 1.0);
        let mut prev = f64::INFINITY;
        for t in [0.0, 1.0, 10.0, 50.0, 100.0] {
            let v = fano_lower(200, t, 0.05).value;
            assert!(v <= prev);
            prev = v;
        }
        assert!(!fano_lower(10, 1.0, 0.5).valid);
    }

    #[test]
    fn packing_examples() {
        assert_relative_eq!(packing_cardinality_bound(2), 2.0 / 1f64.exp().sqrt(), max_relative = 1e-14);
        assert_relative_eq!(packing_cardinality_bound(2), 1.2130613, max_relative = 1e-7);
        assert_eq!(packing_cardinality_bound(0), 1.0);
        assert!((1..40).all(|d| packing_cardinality_bound(d + 1) > packing_cardinality_bound(d)));
    }

    #[test]
    fn deterministic_bounds() {
        assert_eq!(gq_deterministic_error_bound(1, 1.0, 24.0), 16.0 / 45.0);
        assert_relative_eq!(
            sr_deterministic_error_bound(&[(0.0, 2.0)], 24.0),
            2f64.powi(7) / 840.0 * 2.0,
            max_relative = 1e-14
        );
        assert_eq!(gq_estimator_variance(2, 1.0, 1.0, 4), 1.0);
    }
}
