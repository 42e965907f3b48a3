//! Collision probabilities for `b = 1` and `a = 1` as `k`-dimensional
//! integrals over the projections `lambda = (r_1 . v_n)_n` of one direction.
//!
//! With `b = 1` the hash is determined by the direction with the smallest
//! `|r . v|`, so the tuple collides iff one direction is the minimiser for
//! every vector: `P = h E[G(lambda)^(h-1)]`. With `a = 1` the maximiser
//! plays that role and `P = h E[F(lambda)^(h-1)]`. `lambda` is `N(0, M)`,
//! giving
//!
//! `P = h / (delta (2 pi)^(k/2)) * int mass(lambda)^(h-1) exp(-lambda^T M^-1 lambda / 2) d lambda`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{polar_sine, TupleConfig};
use crate::numint::exterior::ExteriorMass;
use crate::numint::interior::InteriorMass;
use crate::numint::quadrature::GaussLegendre;
use crate::tolerances::{DEFAULT_QUADRATURE_TOL, RADIAL_TOL};

/// Which extreme projection decides the hash.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexMode {
    /// `b = 1`: the single rejected index is the smallest `|r . v|`.
    MinIndex,
    /// `a = 1`: the single retained index is the largest `|r . v|`.
    MaxIndex,
}

impl IndexMode {
    /// The mode matching `(a, b)`, if either is 1. For `a = b = 1` both
    /// describe the same hash; the interior form is chosen since it covers
    /// more tuple sizes.
    pub fn for_params(a: usize, b: usize) -> Option<Self> {
        if a == 1 {
            Some(Self::MaxIndex)
        } else if b == 1 {
            Some(Self::MinIndex)
        } else {
            None
        }
    }

    pub fn supports(self, k: usize) -> bool {
        match self {
            Self::MinIndex => k == 3,
            Self::MaxIndex => (2..=4).contains(&k),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Target absolute error of the collision probability.
    pub tolerance: f64,
    /// Half-width of the integration box in each `|lambda_n|`; chosen so the
    /// neglected mass is below `tolerance / 10` when `None`.
    pub truncation: Option<f64>,
    /// Panel width of the composite rule per axis, before scaling by the
    /// square root of the smallest eigenvalue of `M`.
    pub panel_width: f64,
    /// Gauss-Legendre nodes per panel, tried in order until two successive
    /// estimates agree within `tolerance`.
    pub node_schedule: Vec<usize>,
    /// Absolute tolerance of the radial integrals inside the exterior mass.
    pub radial_tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_QUADRATURE_TOL,
            truncation: None,
            panel_width: 1.25,
            node_schedule: vec![3, 4, 6, 8, 12],
            radial_tolerance: RADIAL_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericEstimate {
    pub p: f64,
    /// Difference between the last two refinements plus the truncation bound.
    pub error: f64,
    pub nodes_per_panel: usize,
    pub truncation: f64,
    pub mode: IndexMode,
    pub h: usize,
}

enum Mass {
    Exterior(ExteriorMass),
    Interior(InteriorMass),
}

impl Mass {
    fn eval(&self, l: &[f64]) -> Result<f64> {
        match self {
            Self::Exterior(g) => g.eval(l),
            Self::Interior(f) => f.eval(l),
        }
    }
}

/// Bound on the probability mass outside `[-t, t]^k`, times `h`.
fn truncation_bound(h: usize, k: usize, t: f64) -> f64 {
    (h * k) as f64 * libm::erfc(t / std::f64::consts::SQRT_2)
}

pub fn collision_prob_numeric(
    config: &TupleConfig,
    h: usize,
    mode: IndexMode,
    spec: &QuadratureSpec,
) -> Result<NumericEstimate> {
    let k = config.k();
    if h < 2 {
        return Err(Error::InvalidParameter(format!("need h >= 2, got {h}")));
    }
    if !(spec.tolerance > 0.0) || spec.node_schedule.is_empty() || !(spec.panel_width > 0.0) {
        return Err(Error::InvalidParameter("invalid quadrature specification".into()));
    }
    if !mode.supports(k) {
        return Err(Error::Unsupported(format!(
            "numerical collision probability for {mode:?} is not available for k = {k}"
        )));
    }
    let inv = config.inverse()?;
    let delta = polar_sine(config);
    let mass = match mode {
        IndexMode::MinIndex => Mass::Exterior(
            ExteriorMass::new(config)?.with_radial_tolerance(spec.radial_tolerance),
        ),
        IndexMode::MaxIndex => Mass::Interior(InteriorMass::new(config)?),
    };

    let t = spec.truncation.unwrap_or_else(|| {
        let mut t = 2.0;
        while truncation_bound(h, k, t) >= spec.tolerance / 10.0 {
            t += 0.05;
        }
        t
    });
    let eig_min = config.gram().clone().symmetric_eigenvalues().min();
    let width = spec.panel_width * eig_min.sqrt().min(1.0);
    let panels = (t / width).ceil().max(1.0) as usize;

    // lambda and -lambda have the same density; sign patterns with s_0 = +1
    let patterns: Vec<Vec<f64>> = (0..1usize << (k - 1))
        .map(|m| {
            (0..k)
                .map(|n| if n > 0 && m >> (n - 1) & 1 == 1 { -1.0 } else { 1.0 })
                .collect()
        })
        .collect();
    let density = |l: &[f64]| -> f64 {
        patterns
            .iter()
            .map(|s| {
                let mut q = 0.0;
                for i in 0..k {
                    for j in 0..k {
                        q += s[i] * s[j] * l[i] * l[j] * inv[(i, j)];
                    }
                }
                2.0 * (-0.5 * q).exp()
            })
            .sum()
    };
    let prefactor =
        h as f64 / (delta * (2.0 * std::f64::consts::PI).powf(k as f64 / 2.0));

    let mut previous: Option<f64> = None;
    for &n in &spec.node_schedule {
        let rule = GaussLegendre::new(n);
        let step = t / panels as f64;
        let axis: Vec<(f64, f64)> = (0..panels)
            .flat_map(|p| rule.mapped(p as f64 * step, (p + 1) as f64 * step).collect::<Vec<_>>())
            .collect();
        let m = axis.len();
        let points = m.pow(k as u32);
        // contributions this small cannot move the sum by tolerance / 1000
        let negligible = spec.tolerance * 1e-3 / (points as f64 * prefactor);
        let partial: Vec<Result<f64>> = (0..m)
            .into_par_iter()
            .map(|first| {
                let mut idx = vec![0usize; k];
                idx[0] = first;
                let mut l = vec![0.0; k];
                let mut sum = 0.0;
                for rest in 0..points / m {
                    let mut r = rest;
                    let mut weight = axis[first].1;
                    l[0] = axis[first].0;
                    for slot in 1..k {
                        idx[slot] = r % m;
                        r /= m;
                        l[slot] = axis[idx[slot]].0;
                        weight *= axis[idx[slot]].1;
                    }
                    let wd = weight * density(&l);
                    if wd < negligible {
                        continue;
                    }
                    sum += wd * mass.eval(&l)?.powi(h as i32 - 1);
                }
                Ok(sum)
            })
            .collect();
        let mut total = 0.0;
        for s in partial {
            total += s?;
        }
        let p = prefactor * total;
        if let Some(prev) = previous {
            let diff = (p - prev).abs();
            if diff < spec.tolerance / 2.0 {
                return Ok(NumericEstimate {
                    p,
                    error: diff + truncation_bound(h, k, t),
                    nodes_per_panel: n,
                    truncation: t,
                    mode,
                    h,
                });
            }
        }
        previous = Some(p);
    }
    let estimate = previous.unwrap_or(f64::NAN);
    Err(Error::ToleranceNotMet {
        estimate,
        error: f64::NAN,
        target: spec.tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_triple_gives_naive_rate() {
        let config = TupleConfig::identity(3);
        let spec = QuadratureSpec::default();
        for mode in [IndexMode::MinIndex, IndexMode::MaxIndex] {
            let est = collision_prob_numeric(&config, 3, mode, &spec).unwrap();
            assert!((est.p - 1.0 / 9.0).abs() < 1e-4, "{mode:?}: {}", est.p);
        }
    }

    #[test]
    fn orthonormal_pair_gives_naive_rate() {
        let est = collision_prob_numeric(&TupleConfig::identity(2), 5, IndexMode::MaxIndex, &QuadratureSpec::default())
            .unwrap();
        assert!((est.p - 0.2).abs() < 1e-4);
    }

    #[test]
    fn unsupported_combinations_rejected() {
        let spec = QuadratureSpec::default();
        assert!(matches!(
            collision_prob_numeric(&TupleConfig::identity(4), 3, IndexMode::MinIndex, &spec),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            collision_prob_numeric(&TupleConfig::identity(5), 3, IndexMode::MaxIndex, &spec),
            Err(Error::Unsupported(_))
        ));
        assert_eq!(IndexMode::for_params(2, 2), None);
        assert_eq!(IndexMode::for_params(1, 3), Some(IndexMode::MaxIndex));
        assert_eq!(IndexMode::for_params(3, 1), Some(IndexMode::MinIndex));
    }
}
