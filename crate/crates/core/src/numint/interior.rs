//! Gaussian mass of boxes in the coordinates `mu_n = r . v_n`.
//!
//! For standard Gaussian `r` the vector `mu` is `N(0, M)`. Writing
//! `mu = L z` with `L` the Cholesky factor of `M`, the constraint on `mu_j`
//! becomes an interval for `z_j` given `z_0..z_{j-1}`, so the box mass is a
//! nested integral of standard normal densities whose innermost level is a
//! difference of normal CDFs. The outer levels use composite Gauss-Legendre
//! quadrature.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::geometry::TupleConfig;
use crate::numint::quadrature::GaussLegendre;

/// Standard normal mass beyond this many deviations is below 1e-18.
const Z_CUTOFF: f64 = 9.0;
const PANEL_WIDTH: f64 = 1.5;
const MIN_PANEL_WIDTH: f64 = 0.1;
const PANEL_NODES: usize = 10;

/// `P(a < Z < b)` for standard normal `Z`, without cancellation in the tails.
pub fn normal_interval(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if a >= 0.0 {
        0.5 * (libm::erfc(a / SQRT_2) - libm::erfc(b / SQRT_2))
    } else if b <= 0.0 {
        0.5 * (libm::erfc(-b / SQRT_2) - libm::erfc(-a / SQRT_2))
    } else {
        1.0 - 0.5 * libm::erfc(-a / SQRT_2) - 0.5 * libm::erfc(b / SQRT_2)
    }
}

fn normal_density(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Probability that `N(0, L L^T)` lies in the box `lo <= mu <= hi`
/// (bounds may be infinite).
#[derive(Clone, Debug)]
pub struct BoxMass {
    k: usize,
    factor: Vec<f64>,
    /// Panel width per level, matched to how fast the deeper levels vary.
    widths: Vec<f64>,
    rule: GaussLegendre,
}

impl BoxMass {
    pub fn new(config: &TupleConfig) -> Result<Self> {
        let l = config.cholesky_factor()?;
        let k = config.k();
        let mut factor = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                factor[i * k + j] = l[(i, j)];
            }
        }
        // level i moves by |L_ij| per unit of z_j and varies on its own scale L_ii
        let widths = (0..k)
            .map(|j| {
                (j + 1..k)
                    .filter(|&i| factor[i * k + j] != 0.0)
                    .map(|i| 1.5 * factor[i * k + i] / factor[i * k + j].abs())
                    .fold(PANEL_WIDTH, f64::min)
                    .max(MIN_PANEL_WIDTH)
            })
            .collect();
        Ok(Self {
            k,
            factor,
            widths,
            rule: GaussLegendre::new(PANEL_NODES),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn eval(&self, lo: &[f64], hi: &[f64]) -> f64 {
        assert!(lo.len() == self.k && hi.len() == self.k);
        let mut z = vec![0.0; self.k];
        self.level(0, lo, hi, &mut z)
    }

    fn level(&self, j: usize, lo: &[f64], hi: &[f64], z: &mut [f64]) -> f64 {
        let k = self.k;
        let row = &self.factor[j * k..j * k + j];
        let shift: f64 = row.iter().zip(&z[..j]).map(|(l, z)| l * z).sum();
        let pivot = self.factor[j * k + j];
        let a = (lo[j] - shift) / pivot;
        let b = (hi[j] - shift) / pivot;
        if j + 1 == k {
            return normal_interval(a, b);
        }
        let (a, b) = (a.max(-Z_CUTOFF), b.min(Z_CUTOFF));
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        let panels = ((b - a) / self.widths[j]).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let left = a + p as f64 * h;
            for (x, w) in self.rule.mapped(left, left + h) {
                z[j] = x;
                total += w * normal_density(x) * self.level(j + 1, lo, hi, z);
            }
        }
        total
    }
}

/// Interior mass evaluator: `P(|r . v_n| < |lambda_n| for all n)`.
#[derive(Clone, Debug)]
pub struct InteriorMass {
    boxes: BoxMass,
}

impl InteriorMass {
    pub fn new(config: &TupleConfig) -> Result<Self> {
        if !(2..=4).contains(&config.k()) {
            return Err(Error::Unsupported(format!(
                "interior mass is implemented for 2 <= k <= 4, got k = {}",
                config.k()
            )));
        }
        Ok(Self {
            boxes: BoxMass::new(config)?,
        })
    }

    pub fn eval(&self, lambdas: &[f64]) -> Result<f64> {
        if lambdas.len() != self.boxes.k() {
            return Err(Error::DimensionMismatch {
                expected: self.boxes.k(),
                found: lambdas.len(),
            });
        }
        if lambdas.contains(&0.0) {
            return Ok(0.0);
        }
        let hi: Vec<f64> = lambdas.iter().map(|l| l.abs()).collect();
        let lo: Vec<f64> = hi.iter().map(|l| -l).collect();
        Ok(self.boxes.eval(&lo, &hi).clamp(0.0, 1.0))
    }
}

/// `F(lambda) = P(|r . v_n| < |lambda_n| for all n)`: the Gaussian mass of
/// the interior of the parallelepiped with corners `w . v_n = +-lambda_n`.
pub fn interior_mass_f(config: &TupleConfig, lambdas: &[f64]) -> Result<f64> {
    InteriorMass::new(config)?.eval(lambdas)
}
