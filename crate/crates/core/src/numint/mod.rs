//! Deterministic quadrature of k-way collision probabilities.
//!
//! For `b = 1` the collision probability of a triple is an integral of the
//! exterior mass `G`, the Gaussian mass beyond every slab
//! `|r . v_n| <= |lambda_n|`; for `a = 1` it is an integral of the interior
//! mass `F` inside all of them. `G` is computed from areas of triple
//! spherical-cap intersections integrated against the chi-3 radial law, `F`
//! by sequential conditioning of the Gaussian in Cholesky coordinates.

mod chi;
mod collision;
mod exterior;
mod interior;
pub mod quadrature;
mod sphere;

pub use chi::{chi_tail, phi_k};
pub use collision::{collision_prob_numeric, IndexMode, NumericEstimate, QuadratureSpec};
pub use exterior::{chi3_density, exterior_mass_g, triple_cap_fraction, ExteriorMass};
pub use interior::{interior_mass_f, normal_interval, BoxMass, InteriorMass};
pub use sphere::spherical_angle;
