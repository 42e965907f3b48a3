//! Leading-order collision and filter-survival rates.
//!
//! Every function here drops the `o(1)` (or `O(c^2)`) correction of the
//! underlying asymptotic statement and returns the leading term only. The
//! large-`b` rate and the above-threshold survival rate are only
//! log-asymptotic: their relative error need not shrink at all, only the
//! error in the exponent.

mod beta;

pub use beta::{binomial, log_beta, log_binomial, log_gamma, regularized_incomplete_beta};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{functionals, polar_sine, squared_shortest_dual_diagonal, TupleConfig};
use crate::numint::chi_tail;

/// The two configuration functionals that drive the asymptotic rates,
/// together with the hash parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticInputs {
    pub alpha: f64,
    pub delta: f64,
    pub k: usize,
    pub a: usize,
    pub b: usize,
}

impl AsymptoticInputs {
    pub fn new(alpha: f64, delta: f64, k: usize, a: usize, b: usize) -> Result<Self> {
        if !(alpha >= 1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!("alpha must be >= 1, got {alpha}")));
        }
        if !(delta > 0.0 && delta <= 1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "polar sine must lie in (0, 1], got {delta}"
            )));
        }
        if k == 0 || a == 0 || b == 0 {
            return Err(Error::InvalidParameter(format!(
                "need k, a, b >= 1, got k={k} a={a} b={b}"
            )));
        }
        Ok(Self { alpha, delta, k, a, b })
    }

    /// Reads `alpha` and `delta` off a positive definite configuration.
    pub fn from_config(config: &TupleConfig, a: usize, b: usize) -> Result<Self> {
        let f = functionals(config)?;
        Self::new(f.alpha, f.delta, config.k(), a, b)
    }
}

/// Large-`b` rate: `B(alpha a, b) / B(a, b)` and its power-law form
/// `b^((1 - alpha) a)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LargeBRate {
    pub p: f64,
    pub power_law: f64,
}

pub fn rate_large_b(inputs: &AsymptoticInputs) -> LargeBRate {
    let (a, b) = (inputs.a as f64, inputs.b as f64);
    let log_p = log_beta(inputs.alpha * a, b).expect("positive arguments")
        - log_beta(a, b).expect("positive arguments");
    LargeBRate {
        p: log_p.exp().min(1.0),
        power_law: ((1.0 - inputs.alpha) * a * b.ln()).exp(),
    }
}

/// Large-`a` rate: `delta^-b C(a + b, b)^-(k - 1)`.
pub fn rate_large_a(inputs: &AsymptoticInputs) -> f64 {
    let (a, b) = (inputs.a as f64, inputs.b as f64);
    let direct = inputs.delta.powf(-b) * naive_rate(inputs.k, inputs.a, inputs.b);
    if direct.is_normal() {
        return direct;
    }
    let log_c = log_binomial(a + b, b).expect("valid binomial");
    (-b * inputs.delta.ln() - (inputs.k as f64 - 1.0) * log_c).exp()
}

/// Naive rate `C(h, a)^-(k - 1)` of `k` independent uniform hash values.
pub fn naive_rate(k: usize, a: usize, b: usize) -> f64 {
    let c = binomial((a + b) as u64, a as u64);
    match c.powi(k as i32 - 1) {
        x if x.is_finite() => 1.0 / x,
        _ => {
            let log_c = log_binomial((a + b) as f64, a as f64).expect("valid binomial");
            (-(k as f64 - 1.0) * log_c).exp()
        }
    }
}

/// Probability that one Gaussian direction passes `|v . r| > c` for every
/// vector of the tuple, to leading order: `(1 - Phi_k(c))^alpha`.
pub fn survival_above(alpha: f64, k: usize, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("threshold must be positive, got {c}")));
    }
    Ok(chi_tail(k, c).powf(alpha))
}

/// Probability that one Gaussian direction passes `|v . r| < c` for every
/// vector of the tuple, to leading order: `(2 c^2 / pi)^(k/2) / delta`.
pub fn survival_below(delta: f64, k: usize, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("threshold must be positive, got {c}")));
    }
    if !(delta > 0.0) {
        return Err(Error::Degenerate(format!("polar sine {delta} is not positive")));
    }
    Ok((2.0 * c * c / std::f64::consts::PI).powf(k as f64 / 2.0) / delta)
}

/// Both sides of
/// `C(a + b, a) b B(1 + alpha a, b) = alpha (a + b) / (alpha a + b) * B(alpha a, b) / B(a, b)`,
/// each evaluated through its own Beta functions.
pub fn beta_identity_check(alpha: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!(
            "identity needs positive arguments, got ({alpha}, {a}, {b})"
        )));
    }
    let lhs = (log_binomial(a + b, a)? + b.ln() + log_beta(1.0 + alpha * a, b)?).exp();
    let rhs = alpha * (a + b) / (alpha * a + b)
        * (log_beta(alpha * a, b)? - log_beta(a, b)?).exp();
    Ok((lhs, rhs))
}

/// Convenience: `alpha` and `delta` of a configuration, failing on
/// degenerate tuples.
pub fn config_functionals(config: &TupleConfig) -> Result<(f64, f64)> {
    Ok((squared_shortest_dual_diagonal(config)?, polar_sine(config)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn large_b_examples() {
        let identity = AsymptoticInputs::new(1.0, 1.0, 1, 3, 50).unwrap();
        assert!((rate_large_b(&identity).p - 1.0).abs() < 1e-12);

        // orthogonal pair, a = 1: B(2, 99) / B(1, 99) = 1 / 100 by B(x+1, y) = B(x, y) x / (x + y)
        let pair = AsymptoticInputs::new(2.0, 1.0, 2, 1, 99).unwrap();
        assert!(rel(rate_large_b(&pair).p, 1.0 / 100.0) < 1e-12);
        assert!(rel(rate_large_b(&pair).power_law, 1.0 / 99.0) < 1e-12);
    }

    #[test]
    fn large_b_exponent_trend_for_pairs() {
        // -ln p / ln b -> (alpha - 1) a
        let c: f64 = -0.5;
        let alpha = 2.0 / (1.0 + c.abs());
        let gap = |b: usize| {
            let p = rate_large_b(&AsymptoticInputs::new(alpha, 1.0, 2, 1, b).unwrap()).p;
            (-p.ln() / (b as f64).ln() - (alpha - 1.0)).abs()
        };
        let gaps: Vec<f64> = [10, 100, 1_000, 10_000, 100_000].map(gap).to_vec();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps[4] < 0.05);
    }

    #[test]
    fn large_a_examples() {
        let ortho = AsymptoticInputs::new(3.0, 1.0, 3, 4, 2).unwrap();
        assert!(rel(rate_large_a(&ortho), 15f64.powi(-2)) < 1e-12);
        assert!(rel(rate_large_a(&ortho), naive_rate(3, 4, 2)) < 1e-12);

        let boundary = TupleConfig::uniform(3, -1.0 / 3.0).unwrap();
        let inputs = AsymptoticInputs::from_config(&boundary, 9, 1).unwrap();
        let expected = (27.0f64 / 16.0).sqrt() / 100.0;
        assert!(rel(rate_large_a(&inputs), expected) < 1e-12);
        assert!((rate_large_a(&inputs) - 0.01299).abs() < 5e-6);

        let p = |delta| rate_large_a(&AsymptoticInputs::new(3.0, delta, 3, 5, 2).unwrap());
        assert!(p(0.5) > p(0.7) && p(0.7) > p(0.9));
    }

    #[test]
    fn rates_never_nan_for_large_arguments() {
        for &(a, b) in &[(1, 1_000_000), (1_000_000, 1), (1_000_000, 1_000_000), (3, 7)] {
            let inputs = AsymptoticInputs::new(2.7, 0.3, 4, a, b).unwrap();
            for p in [rate_large_b(&inputs).p, rate_large_a(&inputs).min(1.0)] {
                assert!((0.0..=1.0).contains(&p), "{a} {b} {p}");
            }
        }
    }

    #[test]
    fn survival_examples() {
        assert!((survival_above(1.0, 1, 2.0).unwrap() - 0.045_500_263_896_358_4).abs() < 1e-14);
        let small = survival_below(1.0, 1, 0.1).unwrap();
        assert!((small - (2.0 / std::f64::consts::PI).sqrt() * 0.1).abs() < 1e-15);
        let erf = libm::erf(0.1 / std::f64::consts::SQRT_2);
        assert!(((small - erf) / erf).abs() < 0.1 * 0.1);
        assert!(rel(survival_below(0.35, 3, 0.05).unwrap(), 2.0 * survival_below(0.7, 3, 0.05).unwrap()) < 1e-14);
        assert!(survival_below(1.0, 2, 0.0).is_err());
        assert!(survival_above(1.0, 2, -1.0).is_err());
    }

    #[test]
    fn chi_tail_power_matches_gaussian_tail_power() {
        // ln(1 - Phi_k(C)) / ln(1 - Phi_1(C)) -> 1
        let ratio = |c: f64| (survival_above(2.0, 2, c).unwrap().ln()) / (survival_above(2.0, 1, c).unwrap().ln());
        let gaps: Vec<f64> = [2.0, 4.0, 8.0, 16.0, 24.0].map(|c| (ratio(c) - 1.0).abs()).to_vec();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps[4] < 0.02);
    }

    #[test]
    fn identity_examples() {
        let (l, r) = beta_identity_check(1.0, 1.0, 1.0).unwrap();
        assert!((l - 1.0).abs() < 1e-14 && (r - 1.0).abs() < 1e-14);
        let (l, r) = beta_identity_check(2.0, 1.0, 10.0).unwrap();
        assert!(rel(l, r) < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn identity_holds(alpha in 1.0f64..5.0, a in 0.1f64..200.0, b in 0.1f64..200.0) {
            let (l, r) = beta_identity_check(alpha, a, b).unwrap();
            prop_assert!(rel(l, r) < 1e-9);
        }
    }
}
