//! Grid sweeps over triple configurations with a fixed sum of dot products.
//!
//! For a target `sigma` the triple `(alpha, beta, gamma) = (M12, M13, M23)`
//! satisfies `2 (alpha + beta + gamma) = sigma`. The grid is anchored at the
//! centre `alpha = beta = gamma = sigma / 6`:
//! `alpha = c + i step`, `beta = c + j step`, `gamma = sigma / 2 - alpha - beta`,
//! restricted to cells with all three dot products negative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::estimate_collision_rate;
use crate::geometry::TupleConfig;
use crate::hash::HashFamilyParams;
use crate::seeding::{derive_seed, domain};

/// A dot product must be below `-NEGATIVE_MARGIN` to count as negative.
const NEGATIVE_MARGIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub sigma: f64,
    pub grid_step: f64,
    pub params: HashFamilyParams,
    pub trials: u64,
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        if !(self.sigma < 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma must be negative, got {}",
                self.sigma
            )));
        }
        if !(self.grid_step > 0.0) || !self.grid_step.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid step must be positive, got {}",
                self.grid_step
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("need at least one trial".into()));
        }
        Ok(())
    }

    fn centre(&self) -> f64 {
        self.sigma / 6.0
    }

    /// `(alpha, beta, gamma)` of grid cell `(i, j)`.
    pub fn cell(&self, i: i64, j: i64) -> (f64, f64, f64) {
        let alpha = self.centre() + i as f64 * self.grid_step;
        let beta = self.centre() + j as f64 * self.grid_step;
        (alpha, beta, self.sigma / 2.0 - alpha - beta)
    }

    /// Seed of the estimate in cell `(i, j)`; keyed on the cell so the grid
    /// extent does not affect any single cell.
    pub fn cell_seed(&self, i: i64, j: i64) -> u64 {
        let zigzag = |x: i64| ((x << 1) ^ (x >> 63)) as u64;
        derive_seed(self.params.seed, domain::SWEEP_CELL, zigzag(i) << 32 | zigzag(j))
    }
}

/// One CSV row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a: usize,
    pub b: usize,
    pub d: usize,
    pub k: usize,
    pub trials: u64,
    pub collisions: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

/// A grid cell with all-negative dot products whose Gram matrix is not
/// positive semidefinite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub sigma: f64,
    pub grid_step: f64,
    pub params: HashFamilyParams,
    pub trials: u64,
    pub rows: Vec<SweepRow>,
    pub skipped: Vec<SkippedCell>,
}

impl SweepResult {
    /// The row at `alpha = beta = gamma = sigma / 6`.
    pub fn centre(&self) -> Option<&SweepRow> {
        let c = self.sigma / 6.0;
        self.rows
            .iter()
            .find(|r| (r.alpha - c).abs() < 1e-12 && (r.beta - c).abs() < 1e-12)
    }
}

/// Estimates the collision rate of grid cell `(i, j)`.
pub fn sweep_cell(spec: &SweepSpec, i: i64, j: i64) -> Result<SweepRow> {
    spec.validate()?;
    let (alpha, beta, gamma) = spec.cell(i, j);
    let config = TupleConfig::triple(alpha, beta, gamma)?;
    let seed = spec.cell_seed(i, j);
    let params = spec.params.with_seed(seed);
    let est = estimate_collision_rate(&config, &params, spec.trials)?;
    Ok(SweepRow {
        sigma: spec.sigma,
        alpha,
        beta,
        gamma,
        a: params.a,
        b: params.b,
        d: params.d,
        k: 3,
        trials: est.trials,
        collisions: est.collisions,
        p_hat: est.p_hat,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        seed,
    })
}

/// Every grid cell with `alpha, beta, gamma < 0`, ordered by `(i, j)`.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let span = (spec.centre().abs() / spec.grid_step).ceil() as i64 + 1;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for i in -2 * span..=span {
        for j in -2 * span..=span {
            let (alpha, beta, gamma) = spec.cell(i, j);
            if [alpha, beta, gamma].iter().any(|&x| x >= -NEGATIVE_MARGIN) {
                continue;
            }
            match TupleConfig::triple(alpha, beta, gamma) {
                Ok(_) => rows.push(sweep_cell(spec, i, j)?),
                Err(e) => skipped.push(SkippedCell {
                    alpha,
                    beta,
                    gamma,
                    reason: e.to_string(),
                }),
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Domain(format!(
            "no feasible grid cell at sigma {} with step {}",
            spec.sigma, spec.grid_step
        )));
    }
    Ok(SweepResult {
        sigma: spec.sigma,
        grid_step: spec.grid_step,
        params: spec.params,
        trials: spec.trials,
        rows,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(sigma: f64, step: f64) -> SweepSpec {
        SweepSpec {
            sigma,
            grid_step: step,
            params: HashFamilyParams::new(6, 1, 2, 3).unwrap(),
            trials: 200,
        }
    }

    #[test]
    fn rows_respect_the_sum_and_sign_constraints() {
        let result = sweep(&spec(-2.0, 0.1)).unwrap();
        for r in &result.rows {
            assert!((2.0 * (r.alpha + r.beta + r.gamma) - r.sigma).abs() < 1e-12);
            assert!(r.alpha < 0.0 && r.beta < 0.0 && r.gamma < 0.0);
            assert!(r.ci_low <= r.p_hat && r.p_hat <= r.ci_high);
        }
        let centre = result.centre().unwrap();
        assert!((centre.gamma + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_cells_are_listed() {
        // at sigma = -3 only the centre is PSD among nearby cells
        let result = sweep(&spec(-3.0, 0.25)).unwrap();
        assert!(result.centre().is_some());
        assert!(!result.skipped.is_empty());
        for s in &result.skipped {
            assert!(TupleConfig::triple(s.alpha, s.beta, s.gamma).is_err());
        }
    }

    #[test]
    fn cell_estimates_do_not_depend_on_grid_extent() {
        let coarse = sweep(&spec(-1.2, 0.1)).unwrap();
        let centre = sweep_cell(&spec(-1.2, 0.1), 0, 0).unwrap();
        assert_eq!(coarse.centre().unwrap(), &centre);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(matches!(sweep(&spec(0.5, 0.1)), Err(Error::InvalidParameter(_))));
        assert!(matches!(sweep(&spec(-1.0, 0.0)), Err(Error::InvalidParameter(_))));
        let mut s = spec(-1.0, 0.1);
        s.trials = 0;
        assert!(sweep(&s).is_err());
        assert!(matches!(sweep(&spec(-4.0, 0.1)), Err(Error::Domain(_))));
    }
}
