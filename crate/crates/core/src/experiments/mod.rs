//! Monte-Carlo estimation of k-way collision and filter-survival rates.
//!
//! Trials are grouped into fixed chunks of [`TRIAL_CHUNK`]. Every random
//! quantity in a chunk is keyed on the master seed and the trial or chunk
//! index, and chunk results are reduced as integer counts, so estimates do
//! not depend on the number of worker threads.

mod convergence;
mod detect;
mod survival;
mod sweep;

pub use convergence::{convergence, ConvergenceRow, ConvergenceSpec, Regime};
pub use detect::{
    detect_planted, detect_study, paired_sign_test, DetectReport, DetectSpec, DetectStudy,
};
pub use survival::{survival_rate, Predicate, SurvivalEstimate};
pub use sweep::{sweep, sweep_cell, SkippedCell, SweepRow, SweepResult, SweepSpec};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{TupleConfig, TupleSampler};
use crate::hash::{HashFamilyParams, HashInstance};
use crate::seeding::{derive_seed, domain, keyed_stream};
use crate::tolerances::Z_95;

/// Trials per work unit.
pub const TRIAL_CHUNK: u64 = 4096;

/// Wilson score interval at confidence `z` for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (centre - half).clamp(0.0, p) };
    let hi = if successes == trials { 1.0 } else { (centre + half).clamp(p, 1.0) };
    (lo, hi)
}

/// A binomial proportion with its 95% Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinomialEstimate {
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl BinomialEstimate {
    pub fn new(successes: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, trials, Z_95);
        Self {
            trials,
            successes,
            p_hat: successes as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }

    /// Plug-in standard error `sqrt(p (1 - p) / n)`.
    pub fn standard_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }

    /// `(p_self - p_other)` in units of the joint standard error.
    pub fn z_difference(&self, other: &Self) -> f64 {
        let se = self.standard_error().hypot(other.standard_error());
        (self.p_hat - other.p_hat) / se
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionEstimate {
    pub trials: u64,
    pub collisions: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub params: HashFamilyParams,
    pub config: TupleConfig,
    pub d: usize,
    pub k: usize,
}

impl CollisionEstimate {
    pub fn binomial(&self) -> BinomialEstimate {
        BinomialEstimate::new(self.collisions, self.trials)
    }
}

/// A tuple sampler for `config`, falling back to the semidefinite factor for
/// singular Gram matrices (repeated or coplanar vectors).
pub(crate) fn sampler_for(config: &TupleConfig, d: usize) -> Result<TupleSampler> {
    if config.is_positive_definite() {
        TupleSampler::new(config, d)
    } else {
        TupleSampler::semidefinite(config, d)
    }
}

/// Runs `chunk(index, len)` over the chunks covering `trials` and sums the
/// counts.
pub(crate) fn run_chunks<F>(trials: u64, chunk: F) -> Result<u64>
where
    F: Fn(u64, u64) -> Result<u64> + Sync,
{
    let chunks = trials.div_ceil(TRIAL_CHUNK);
    let counts: Vec<Result<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| chunk(c, TRIAL_CHUNK.min(trials - c * TRIAL_CHUNK)))
        .collect();
    counts.into_iter().sum()
}

/// Fraction of trials in which a fresh hash instance and a fresh uniformly
/// oriented tuple with Gram matrix `config` give a k-way collision.
///
/// The tuple lives in `R^d` with `d = params.d`; trial `t` uses the hash
/// instance of seed `derive_seed(params.seed, HASH_INSTANCE, t)`.
pub fn estimate_collision_rate(
    config: &TupleConfig,
    params: &HashFamilyParams,
    trials: u64,
) -> Result<CollisionEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let (k, d) = (config.k(), params.d);
    let sampler = sampler_for(config, d)?;
    let collisions = run_chunks(trials, |c, len| {
        let mut inst = HashInstance::sample(*params);
        let mut rng = keyed_stream(derive_seed(params.seed, domain::TUPLE, c), 0);
        let mut frame = Vec::new();
        let mut flat = vec![0.0; k * d];
        let mut hits = 0;
        for t in c * TRIAL_CHUNK..c * TRIAL_CHUNK + len {
            inst.resample(derive_seed(params.seed, domain::HASH_INSTANCE, t));
            sampler.sample_into(&mut rng, &mut frame, &mut flat);
            let vectors: Vec<&[f64]> = flat.chunks_exact(d).collect();
            hits += inst.k_collision(&vectors)? as u64;
        }
        Ok(hits)
    })?;
    let est = BinomialEstimate::new(collisions, trials);
    Ok(CollisionEstimate {
        trials,
        collisions,
        p_hat: est.p_hat,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        params: *params,
        config: config.clone(),
        d,
        k,
    })
}

/// Chernoff sample size for estimating `p` to relative error `rel_err` with
/// the given two-sided confidence: `ceil(3 ln(2 / (1 - confidence)) / (rel_err^2 p))`.
pub fn required_trials(p_guess: f64, rel_err: f64, confidence: f64) -> Result<u64> {
    if !(p_guess > 0.0 && p_guess < 1.0) {
        return Err(Error::Domain(format!("p_guess must lie in (0, 1), got {p_guess}")));
    }
    if !(rel_err > 0.0) || !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Domain(format!(
            "need rel_err > 0 and confidence in (0, 1), got {rel_err}, {confidence}"
        )));
    }
    let n = 3.0 * (2.0 / (1.0 - confidence)).ln() / (rel_err * rel_err * p_guess);
    Ok(n.ceil() as u64)
}

/// `ln p_x / ln p_y`.
pub fn log_ratio(p_x: f64, p_y: f64) -> Result<f64> {
    for p in [p_x, p_y] {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("log ratio needs rates in (0, 1), got {p}")));
        }
    }
    Ok(p_x.ln() / p_y.ln())
}
