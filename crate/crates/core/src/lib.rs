//! Random projection hashing for reducible k-tuples of unit vectors.
//!
//! A hash from the family `H(R, a, b)` draws `h = a + b` random directions and
//! records the set of `a` indices whose directions have the largest absolute
//! projection onto the input. Tuples of vectors whose pairwise dot products
//! make them nearly linearly dependent collide more often than the naive rate
//! `C(h, a)^-(k-1)`, which makes k-way collisions a cheap statistical test for
//! reducible tuples.
//!
//! The crate offers three independent ways to get at the k-way collision rate:
//!
//! * [`experiments`]: seeded, thread-count independent Monte-Carlo estimation;
//! * [`numint`]: deterministic quadrature of the `(k+1)`-dimensional integral
//!   representation that exists when `a = 1` or `b = 1`;
//! * [`asymptotics`]: closed-form leading-order rates for large `b` (governed
//!   by the squared shortest dual diagonal) and large `a` (governed by the
//!   polar sine), plus the matching filter-predicate survival rates.
//!
//! [`geometry`] holds the configuration functionals of a tuple and [`hash`]
//! the hash family itself.

// `!(x > 0.0)` also rejects NaN; tabulated constants keep their source digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod asymptotics;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod hash;
pub mod numint;
pub mod seeding;
pub mod tolerances;

/// Version of this library, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use asymptotics::AsymptoticInputs;
pub use error::{Error, Result};
pub use experiments::{BinomialEstimate, CollisionEstimate, DetectReport, SurvivalEstimate, SweepResult};
pub use geometry::{ConfigFunctionals, Reducibility, TupleConfig, UnitTuple};
pub use hash::{Directions, HashFamilyParams, HashInstance, HashValue};
pub use numint::{IndexMode, QuadratureSpec};

