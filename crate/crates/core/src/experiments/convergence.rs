//! Monte-Carlo rates against the large-`a` and large-`b` asymptotics.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{rate_large_a, rate_large_b, AsymptoticInputs};
use crate::error::{Error, Result};
use crate::experiments::estimate_collision_rate;
use crate::geometry::TupleConfig;
use crate::hash::{Directions, HashFamilyParams};
use crate::seeding::{derive_seed, domain};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `a` varies over the range, `b` is fixed.
    LargeA,
    /// `b` varies over the range, `a` is fixed.
    LargeB,
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "large-a" => Ok(Self::LargeA),
            "large-b" => Ok(Self::LargeB),
            other => Err(Error::InvalidParameter(format!("unknown regime {other:?}"))),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::LargeA => "large-a",
            Self::LargeB => "large-b",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSpec {
    pub regime: Regime,
    pub config: TupleConfig,
    /// The parameter that does not vary (`b` for large-`a`, `a` for large-`b`).
    pub fixed: usize,
    pub range: Vec<usize>,
    pub d: usize,
    pub trials: u64,
    pub seed: u64,
    pub directions: Directions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub regime: Regime,
    pub k: usize,
    pub a: usize,
    pub b: usize,
    pub h: usize,
    pub trials: u64,
    pub collisions: u64,
    pub p_mc: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p_asymptotic: f64,
    /// `p_mc / p_asymptotic`.
    pub ratio: f64,
    /// `ln p_mc / ln p_asymptotic`; absent when either rate is 0 or 1.
    pub log_ratio: Option<f64>,
    /// `|ln p_mc - ln p_asymptotic| / ln n` for the varying parameter `n`.
    pub scaled_log_gap: Option<f64>,
}

/// One Monte-Carlo estimate per entry of the range, each with its own seed
/// `derive_seed(seed, CONVERGENCE, n)`.
pub fn convergence(spec: &ConvergenceSpec) -> Result<Vec<ConvergenceRow>> {
    if spec.range.is_empty() {
        return Err(Error::InvalidParameter("empty parameter range".into()));
    }
    let k = spec.config.k();
    spec.range
        .iter()
        .map(|&n| {
            let (a, b) = match spec.regime {
                Regime::LargeA => (n, spec.fixed),
                Regime::LargeB => (spec.fixed, n),
            };
            let inputs = AsymptoticInputs::from_config(&spec.config, a, b)?;
            let p_asymptotic = match spec.regime {
                Regime::LargeA => rate_large_a(&inputs),
                Regime::LargeB => rate_large_b(&inputs).p,
            };
            let seed = derive_seed(spec.seed, domain::CONVERGENCE, n as u64);
            let params = HashFamilyParams::new(spec.d, a, b, seed)?.with_directions(spec.directions);
            let est = estimate_collision_rate(&spec.config, &params, spec.trials)?;
            let in_open_unit = |p: f64| p > 0.0 && p < 1.0;
            let logs_defined = in_open_unit(est.p_hat) && in_open_unit(p_asymptotic);
            Ok(ConvergenceRow {
                regime: spec.regime,
                k,
                a,
                b,
                h: a + b,
                trials: est.trials,
                collisions: est.collisions,
                p_mc: est.p_hat,
                ci_low: est.ci_low,
                ci_high: est.ci_high,
                p_asymptotic,
                ratio: est.p_hat / p_asymptotic,
                log_ratio: logs_defined.then(|| est.p_hat.ln() / p_asymptotic.ln()),
                scaled_log_gap: (logs_defined && n >= 2)
                    .then(|| (est.p_hat.ln() - p_asymptotic.ln()).abs() / (n as f64).ln()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_pair_tracks_one_over_h() {
        let spec = ConvergenceSpec {
            regime: Regime::LargeB,
            config: TupleConfig::identity(2),
            fixed: 1,
            range: vec![2, 4, 8],
            d: 2,
            trials: 100_000,
            seed: 9,
            directions: Directions::Gaussian,
        };
        for row in convergence(&spec).unwrap() {
            let p = 1.0 / row.h as f64;
            let se = (p * (1.0 - p) / row.trials as f64).sqrt();
            assert!((row.p_mc - p).abs() < 3.5 * se, "{row:?}");
            // B(2, b) / B(1, b) = 1 / (b + 1) = 1 / h
            assert!((row.p_asymptotic - p).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_range_rejected() {
        let spec = ConvergenceSpec {
            regime: Regime::LargeA,
            config: TupleConfig::identity(3),
            fixed: 1,
            range: vec![],
            d: 3,
            trials: 10,
            seed: 0,
            directions: Directions::Gaussian,
        };
        assert!(matches!(convergence(&spec), Err(Error::InvalidParameter(_))));
    }
}
