//! Bucketing a database with one hash instance and checking whether planted
//! reducible tuples land in a common bucket more often than random tuples.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{log_binomial, naive_rate};
use crate::error::{Error, Result};
use crate::experiments::sampler_for;
use crate::geometry::{dot, min_sign_quadratic, TupleConfig};
use crate::hash::{HashFamilyParams, HashInstance};
use crate::seeding::{derive_seed, domain, keyed_stream};
use crate::tolerances::{REDUCIBLE_MARGIN, SUBSET_SCAN_CAP};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectSpec {
    pub db_size: usize,
    pub n_planted: usize,
    pub params: HashFamilyParams,
    pub planted: TupleConfig,
    /// Largest number of k-subsets enumerated per bucket.
    pub scan_cap: u64,
}

impl DetectSpec {
    pub fn new(db_size: usize, n_planted: usize, params: HashFamilyParams, planted: TupleConfig) -> Self {
        Self {
            db_size,
            n_planted,
            params,
            planted,
            scan_cap: SUBSET_SCAN_CAP,
        }
    }

    pub fn with_scan_cap(mut self, cap: u64) -> Self {
        self.scan_cap = cap;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectReport {
    pub db_size: usize,
    pub n_planted: usize,
    pub k: usize,
    pub d: usize,
    pub a: usize,
    pub b: usize,
    pub seed: u64,
    /// Number of non-empty buckets.
    pub buckets: usize,
    pub largest_bucket: usize,
    pub planted_co_bucketed: usize,
    /// Fraction of planted tuples whose vectors share a bucket; absent
    /// without planted tuples.
    pub recall: Option<f64>,
    /// Fraction of all k-subsets of background vectors that share a bucket.
    pub background_rate: Option<f64>,
    pub naive_rate: f64,
    pub candidates_scanned: u64,
    pub candidates_reducible: u64,
    /// Planted tuples found among the scanned candidates.
    pub planted_recovered: usize,
    /// Fraction of scanned candidates that fail the reducibility check.
    pub false_candidate_rate: Option<f64>,
    pub scan_truncated: bool,
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    log_binomial(n as f64, k as f64).expect("valid binomial").exp()
}

/// Advances `idx` to the next k-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
        return false;
    };
    idx[i] += 1;
    for j in i + 1..k {
        idx[j] = idx[j - 1] + 1;
    }
    true
}

/// Builds the database, buckets it and scans the buckets.
///
/// Vectors `t k .. (t + 1) k` form planted tuple `t`; the rest are uniform
/// on the sphere.
pub fn detect_planted(spec: &DetectSpec) -> Result<DetectReport> {
    let (k, params) = (spec.planted.k(), spec.params);
    let d = params.d;
    if spec.n_planted * k > spec.db_size {
        return Err(Error::InvalidParameter(format!(
            "{} planted {k}-tuples do not fit in a database of {}",
            spec.n_planted, spec.db_size
        )));
    }
    let sampler = sampler_for(&spec.planted, d)?;
    let mut db = vec![0.0; spec.db_size * d];
    let planted_len = spec.n_planted * k * d;
    let mut frame = Vec::new();
    for (t, out) in db[..planted_len].chunks_exact_mut(k * d).enumerate() {
        let mut rng = keyed_stream(derive_seed(params.seed, domain::DATABASE, t as u64), 0);
        sampler.sample_into(&mut rng, &mut frame, out);
    }
    let mut rng = keyed_stream(derive_seed(params.seed, domain::BACKGROUND, 0), 0);
    for v in db[planted_len..].chunks_exact_mut(d) {
        loop {
            v.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
            let norm = dot(v, v).sqrt();
            if norm > 1e-8 {
                v.iter_mut().for_each(|x| *x /= norm);
                break;
            }
        }
    }

    let inst = HashInstance::sample(params);
    let mut proj = Vec::with_capacity(params.h());
    let mut hashes = Vec::with_capacity(spec.db_size);
    for v in db.chunks_exact(d) {
        let mut out = Vec::with_capacity(params.a);
        inst.hash_into(v, &mut proj, &mut out)?;
        hashes.push(out);
    }
    let mut buckets: BTreeMap<&[usize], Vec<usize>> = BTreeMap::new();
    for (i, h) in hashes.iter().enumerate() {
        buckets.entry(h.as_slice()).or_default().push(i);
    }

    let n_planted_vectors = spec.n_planted * k;
    let planted_co_bucketed = (0..spec.n_planted)
        .filter(|t| hashes[t * k..(t + 1) * k].iter().all(|h| *h == hashes[t * k]))
        .count();
    let n_bg = spec.db_size - n_planted_vectors;
    let background_rate = (n_bg >= k).then(|| {
        let together: f64 = buckets
            .values()
            .map(|members| binomial_f64(members.iter().filter(|&&i| i >= n_planted_vectors).count(), k))
            .sum();
        together / binomial_f64(n_bg, k)
    });

    let mut scanned = 0u64;
    let mut reducible = 0u64;
    let mut recovered = 0usize;
    let mut truncated = false;
    let mut gram = DMatrix::identity(k, k);
    for members in buckets.values() {
        if members.len() < k {
            continue;
        }
        if binomial_f64(members.len(), k) > spec.scan_cap as f64 {
            truncated = true;
            log::warn!(
                "bucket of {} vectors has more than {} {k}-subsets; scan truncated",
                members.len(),
                spec.scan_cap
            );
        }
        let mut idx: Vec<usize> = (0..k).collect();
        let mut count = 0u64;
        loop {
            if count >= spec.scan_cap {
                break;
            }
            count += 1;
            let ids: Vec<usize> = idx.iter().map(|&p| members[p]).collect();
            for p in 0..k {
                for q in 0..p {
                    let g = dot(&db[ids[p] * d..(ids[p] + 1) * d], &db[ids[q] * d..(ids[q] + 1) * d]);
                    gram[(p, q)] = g;
                    gram[(q, p)] = g;
                }
            }
            let (dmin_sq, _) = min_sign_quadratic(&gram)?;
            if dmin_sq < 1.0 - REDUCIBLE_MARGIN {
                reducible += 1;
                let t = ids[0] / k;
                if ids[k - 1] < n_planted_vectors && ids.iter().all(|&i| i / k == t) {
                    recovered += 1;
                }
            }
            if !next_combination(&mut idx, members.len()) {
                break;
            }
        }
        scanned += count;
    }

    Ok(DetectReport {
        db_size: spec.db_size,
        n_planted: spec.n_planted,
        k,
        d,
        a: params.a,
        b: params.b,
        seed: params.seed,
        buckets: buckets.len(),
        largest_bucket: buckets.values().map(Vec::len).max().unwrap_or(0),
        planted_co_bucketed,
        recall: (spec.n_planted > 0).then(|| planted_co_bucketed as f64 / spec.n_planted as f64),
        background_rate,
        naive_rate: naive_rate(k, params.a, params.b),
        candidates_scanned: scanned,
        candidates_reducible: reducible,
        planted_recovered: recovered,
        false_candidate_rate: (scanned > 0).then(|| (scanned - reducible) as f64 / scanned as f64),
        scan_truncated: truncated,
    })
}

/// One-sided exact sign test: `P(X >= wins)` for `X ~ Bin(wins + losses, 1/2)`.
pub fn paired_sign_test(wins: usize, losses: usize) -> f64 {
    let n = wins + losses;
    if wins == 0 {
        return 1.0;
    }
    let terms: Vec<f64> = (wins..=n)
        .map(|x| log_binomial(n as f64, x as f64).expect("valid binomial") - n as f64 * std::f64::consts::LN_2)
        .collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()).exp().min(1.0)
}

/// Recall against background co-bucketing over independent instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectStudy {
    pub instances: usize,
    pub mean_recall: f64,
    pub mean_background_rate: f64,
    /// Instances with recall above, below and equal to the background rate.
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    pub p_value: f64,
    pub reports: Vec<DetectReport>,
}

/// Runs [`detect_planted`] on `instances` databases, instance `i` seeded by
/// `derive_seed(seed, DETECT_INSTANCE, i)`, and applies the paired sign test.
pub fn detect_study(spec: &DetectSpec, instances: usize) -> Result<DetectStudy> {
    if spec.n_planted == 0 || instances == 0 {
        return Err(Error::InvalidParameter(
            "a detection study needs planted tuples and at least one instance".into(),
        ));
    }
    let reports: Vec<DetectReport> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(spec.params.seed, domain::DETECT_INSTANCE, i as u64);
            let mut s = spec.clone();
            s.params = s.params.with_seed(seed);
            detect_planted(&s)
        })
        .collect::<Result<_>>()?;
    let (mut wins, mut losses, mut ties) = (0, 0, 0);
    let (mut recall_sum, mut bg_sum) = (0.0, 0.0);
    for r in &reports {
        let recall = r.recall.expect("planted tuples present");
        let bg = r.background_rate.ok_or_else(|| {
            Error::InvalidParameter("too few background vectors for a background rate".into())
        })?;
        recall_sum += recall;
        bg_sum += bg;
        match recall.partial_cmp(&bg).expect("finite rates") {
            std::cmp::Ordering::Greater => wins += 1,
            std::cmp::Ordering::Less => losses += 1,
            std::cmp::Ordering::Equal => ties += 1,
        }
    }
    Ok(DetectStudy {
        instances,
        mean_recall: recall_sum / instances as f64,
        mean_background_rate: bg_sum / instances as f64,
        wins,
        losses,
        ties,
        p_value: paired_sign_test(wins, losses),
        reports,
    })
}
