//! Gaussian mass beyond all the slabs `|r . v_n| <= |lambda_n|` of a triple.
//!
//! In coordinates of `span(V)` the vector `r` is a 3-dimensional standard
//! Gaussian. The event `|r . v_n| > |lambda_n|` for all `n` splits into the
//! eight exterior angles `{s_n r . v_n > |lambda_n|}` at the conjugate corners
//! of the parallelepiped; `s` and `-s` carry equal mass. The mass of one
//! angle is a radial integral of the fraction `eta(rho)` of the radius-`rho`
//! sphere inside it, which is a triple spherical-cap intersection.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::TupleConfig;
use crate::numint::quadrature::adaptive_gauss_kronrod;
use crate::numint::sphere::{caps_intersection_area, dot3, Cap, Vec3};
use crate::tolerances::RADIAL_TOL;

/// Chi radial density for three degrees of freedom, `sqrt(2/pi) rho^2 exp(-rho^2/2)`.
pub fn chi3_density(rho: f64) -> f64 {
    (2.0 / PI).sqrt() * rho * rho * (-0.5 * rho * rho).exp()
}

/// Beyond this radius the chi-3 mass is below 1e-20.
const RADIAL_CUTOFF: f64 = 10.0;

/// The tuple vectors as coordinates in an orthonormal basis of their span.
pub(crate) fn span_coordinates(config: &TupleConfig) -> Result<[Vec3; 3]> {
    if config.k() != 3 {
        return Err(Error::Unsupported(format!(
            "exterior mass is implemented for triples, got k = {}",
            config.k()
        )));
    }
    let l = config.cholesky_factor()?;
    Ok([
        [l[(0, 0)], 0.0, 0.0],
        [l[(1, 0)], l[(1, 1)], 0.0],
        [l[(2, 0)], l[(2, 1)], l[(2, 2)]],
    ])
}

/// Norm of the point of `{x : a_n . x >= l_n}` nearest the origin. The
/// minimiser is `sum_{n in S} mu_n a_n` for the active set `S` with all
/// `mu_n >= 0` that satisfies every constraint; each `S` is tried.
fn nearest_point_norm(a: &[Vec3; 3], l: &[f64; 3]) -> f64 {
    let mut best = f64::INFINITY;
    for mask in 0u8..8 {
        let active: Vec<usize> = (0..3).filter(|i| mask >> i & 1 == 1).collect();
        let n = active.len();
        let mu: Vec<f64> = match n {
            0 => vec![],
            1 => vec![l[active[0]]],
            _ => {
                let g = nalgebra::DMatrix::from_fn(n, n, |p, q| dot3(&a[active[p]], &a[active[q]]));
                let rhs = nalgebra::DVector::from_iterator(n, active.iter().map(|&i| l[i]));
                match g.lu().solve(&rhs) {
                    Some(x) => x.iter().copied().collect(),
                    None => continue,
                }
            }
        };
        if mu.iter().any(|&m| m < -1e-14) {
            continue;
        }
        let mut x = [0.0; 3];
        for (m, &i) in mu.iter().zip(&active) {
            for c in 0..3 {
                x[c] += m * a[i][c];
            }
        }
        if (0..3).all(|i| dot3(&a[i], &x) >= l[i] - 1e-12) {
            best = best.min(dot3(&x, &x).sqrt());
        }
    }
    best
}

/// Exterior mass evaluator for one configuration.
#[derive(Clone, Debug)]
pub struct ExteriorMass {
    vectors: [Vec3; 3],
    radial_tol: f64,
}

impl ExteriorMass {
    pub fn new(config: &TupleConfig) -> Result<Self> {
        Ok(Self {
            vectors: span_coordinates(config)?,
            radial_tol: RADIAL_TOL,
        })
    }

    pub fn with_radial_tolerance(mut self, tol: f64) -> Self {
        self.radial_tol = tol;
        self
    }

    /// Fraction of the radius-`rho` sphere in the exterior angle with signs
    /// `signs`: the caps centred on `s_n v_n` with `cos(radius) = |lambda_n| / rho`.
    fn corner_fraction(&self, signs: [f64; 3], l: &[f64; 3], rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let caps: [Cap; 3] = std::array::from_fn(|n| Cap {
            centre: [
                signs[n] * self.vectors[n][0],
                signs[n] * self.vectors[n][1],
                signs[n] * self.vectors[n][2],
            ],
            kappa: l[n] / rho,
        });
        caps_intersection_area(&caps) / (4.0 * PI)
    }

    /// Gaussian mass of one exterior angle.
    fn corner_mass(&self, signs: [f64; 3], l: &[f64; 3]) -> Result<f64> {
        let a: [Vec3; 3] = std::array::from_fn(|n| {
            [
                signs[n] * self.vectors[n][0],
                signs[n] * self.vectors[n][1],
                signs[n] * self.vectors[n][2],
            ]
        });
        let rho_min = nearest_point_norm(&a, l);
        if rho_min >= RADIAL_CUTOFF {
            return Ok(0.0);
        }
        if rho_min == 0.0 {
            // all lambda zero: a cone, eta is constant
            return Ok(self.corner_fraction(signs, l, 1.0));
        }
        let mut breaks = vec![rho_min];
        for step in [0.05, 0.25, 1.0, 2.5] {
            if rho_min + step < RADIAL_CUTOFF {
                breaks.push(rho_min + step);
            }
        }
        breaks.push(RADIAL_CUTOFF);
        let (mass, _) = adaptive_gauss_kronrod(
            |rho| self.corner_fraction(signs, l, rho) * chi3_density(rho),
            &breaks,
            self.radial_tol,
        )?;
        Ok(mass)
    }

    /// `P(|r . v_n| > |lambda_n|, n = 1, 2, 3)` for standard Gaussian `r`.
    pub fn eval(&self, lambdas: &[f64]) -> Result<f64> {
        if lambdas.len() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, found: lambdas.len() });
        }
        let l = [lambdas[0].abs(), lambdas[1].abs(), lambdas[2].abs()];
        let mut total = 0.0;
        for mask in 0..4u8 {
            let signs = [1.0, if mask & 1 == 1 { -1.0 } else { 1.0 }, if mask & 2 == 2 { -1.0 } else { 1.0 }];
            total += 2.0 * self.corner_mass(signs, &l)?;
        }
        Ok(total.clamp(0.0, 1.0))
    }

    /// Fraction of the radius-`rho` sphere in the exterior angle at the corner
    /// whose dot products with the tuple are exactly `lambdas`.
    pub fn cap_fraction(&self, lambdas: &[f64; 3], rho: f64) -> f64 {
        if lambdas.iter().any(|l| l.abs() > rho) {
            return 0.0;
        }
        let signs = lambdas.map(|x| if x < 0.0 { -1.0 } else { 1.0 });
        self.corner_fraction(signs, &lambdas.map(f64::abs), rho)
    }
}

/// Fraction of the sphere of radius `rho` inside the exterior angle at the
/// corner `w` with `w . v_n = lambda_n`: three caps centred on
/// `sign(lambda_n) v_n` with angular radii `acos(|lambda_n| / rho)`.
pub fn triple_cap_fraction(config: &TupleConfig, lambdas: &[f64; 3], rho: f64) -> Result<f64> {
    Ok(ExteriorMass::new(config)?.cap_fraction(lambdas, rho))
}

/// `G(lambda) = P(|r . v_n| > |lambda_n| for all n)` for a triple.
pub fn exterior_mass_g(config: &TupleConfig, lambdas: &[f64]) -> Result<f64> {
    ExteriorMass::new(config)?.eval(lambdas)
}
