//! Survival rates of the threshold filter predicates.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{run_chunks, sampler_for, BinomialEstimate};
use crate::geometry::TupleConfig;
use crate::hash::{predicate_above, predicate_below};
use crate::seeding::{derive_seed, domain, keyed_stream};

/// A filter predicate on `|v . r|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "threshold", rename_all = "lowercase")]
pub enum Predicate {
    /// `|v . r| > C`.
    Above(f64),
    /// `|v . r| < c`.
    Below(f64),
}

impl Predicate {
    pub fn threshold(&self) -> f64 {
        match *self {
            Self::Above(c) | Self::Below(c) => c,
        }
    }

    pub fn passes(&self, r: &[f64], v: &[f64]) -> bool {
        match *self {
            Self::Above(c) => predicate_above(r, c, v),
            Self::Below(c) => predicate_below(r, c, v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    pub trials: u64,
    pub passes: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub predicate: Predicate,
    pub config: TupleConfig,
    pub d: usize,
    pub seed: u64,
}

impl SurvivalEstimate {
    pub fn binomial(&self) -> BinomialEstimate {
        BinomialEstimate::new(self.passes, self.trials)
    }
}

/// Fraction of standard Gaussian directions `r` in `R^d` for which the
/// predicate holds for every vector of a tuple with Gram matrix `config`.
/// Each chunk of trials draws its own uniformly oriented tuple.
pub fn survival_rate(
    config: &TupleConfig,
    d: usize,
    predicate: Predicate,
    trials: u64,
    seed: u64,
) -> Result<SurvivalEstimate> {
    if !(predicate.threshold() > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold must be positive, got {}",
            predicate.threshold()
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let k = config.k();
    let sampler = sampler_for(config, d)?;
    let passes = run_chunks(trials, |c, len| {
        let mut rng = keyed_stream(derive_seed(seed, domain::SURVIVAL, c), 0);
        let mut frame = Vec::new();
        let mut flat = vec![0.0; k * d];
        sampler.sample_into(&mut rng, &mut frame, &mut flat);
        let mut r = vec![0.0; d];
        let mut hits = 0;
        for _ in 0..len {
            r.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
            hits += flat.chunks_exact(d).all(|v| predicate.passes(&r, v)) as u64;
        }
        Ok(hits)
    })?;
    let est = BinomialEstimate::new(passes, trials);
    Ok(SurvivalEstimate {
        trials,
        passes,
        p_hat: est.p_hat,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        predicate,
        config: config.clone(),
        d,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn assert_in_band(est: &SurvivalEstimate, p: f64) {
        let se = (p * (1.0 - p) / est.trials as f64).sqrt();
        assert!((est.p_hat - p).abs() < 3.5 * se, "{} vs {p}", est.p_hat);
    }

    #[test]
    fn single_vector_closed_forms() {
        let one = TupleConfig::identity(1);
        let below = survival_rate(&one, 4, Predicate::Below(0.1), 400_000, 1).unwrap();
        assert_in_band(&below, libm::erf(0.1 / SQRT_2));
        let above = survival_rate(&one, 4, Predicate::Above(2.0), 400_000, 2).unwrap();
        assert_in_band(&above, libm::erfc(2.0 / SQRT_2));
    }

    #[test]
    fn orthogonal_pair_is_a_product() {
        let pair = TupleConfig::identity(2);
        let est = survival_rate(&pair, 5, Predicate::Below(0.5), 400_000, 3).unwrap();
        assert_in_band(&est, libm::erf(0.5 / SQRT_2).powi(2));
    }

    #[test]
    fn nonpositive_threshold_rejected() {
        let one = TupleConfig::identity(1);
        assert!(survival_rate(&one, 2, Predicate::Below(-1.0), 10, 0).is_err());
        assert!(survival_rate(&one, 2, Predicate::Above(0.0), 10, 0).is_err());
    }

    #[test]
    fn predicate_serialises_with_mode_tag() {
        let json = serde_json::to_string(&Predicate::Below(0.05)).unwrap();
        assert_eq!(json, r#"{"mode":"below","threshold":0.05}"#);
    }
}
