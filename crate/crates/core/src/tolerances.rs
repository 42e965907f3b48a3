//! Every numerical threshold the crate uses, in one place.

/// Maximum deviation of a tuple vector's norm from 1.
pub const UNIT_NORM: f64 = 1e-9;

/// A Gram determinant at or below this is treated as linearly dependent.
pub const GRAM_DET_MIN: f64 = 1e-12;

/// Largest negative Cholesky pivot accepted (and clamped to zero) when a
/// Gram matrix is only required to be positive semidefinite.
pub const PSD_PIVOT: f64 = 1e-12;

/// Symmetry and unit-diagonal tolerance for Gram matrices.
pub const GRAM_ENTRY: f64 = 1e-12;

/// `dmin_sq` must undercut 1 by more than this for a tuple to be reducible.
pub const REDUCIBLE_MARGIN: f64 = 1e-12;

/// Biorthogonality tolerance of a computed dual basis.
pub const DUAL_BASIS: f64 = 1e-9;

/// Largest tuple size for which sign vectors are enumerated exhaustively.
pub const SIGN_ENUM_MAX_K: usize = 20;

/// Distance to a case boundary below which the spherical-cap area routine
/// gives up on the closed-form route and integrates instead.
pub const CAP_BOUNDARY: f64 = 1e-9;

/// Default absolute tolerance of the collision-probability quadrature.
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-4;

/// Absolute tolerance of the inner radial integral for the exterior mass.
pub const RADIAL_TOL: f64 = 1e-10;

/// Per-bucket cap on enumerated k-subsets in the planted-tuple scan.
pub const SUBSET_SCAN_CAP: u64 = 1_000_000;

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;
