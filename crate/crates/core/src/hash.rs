//! The random projection hash family `H(R, a, b)` and the two threshold
//! filter predicates.
//!
//! An instance holds `h = a + b` random directions `r_1..r_h`. The hash of a
//! vector `v` is the set `A` of the `a` indices with the largest `|r_i . v|`;
//! ties go to the smaller index. The hash depends only on the line through
//! `v`, so `v`, `-v` and `2v` hash identically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, UnitTuple};
use crate::seeding::{derive_seed, domain, splitmix64};

/// Distribution of the instance directions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Directions {
    /// i.i.d. standard Gaussian components.
    #[default]
    Gaussian,
    /// Gaussian directions scaled to unit length, i.e. uniform on the sphere.
    Spherical,
}

impl std::str::FromStr for Directions {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "spherical" => Ok(Self::Spherical),
            other => Err(Error::InvalidParameter(format!(
                "unknown direction distribution {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for Directions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Gaussian => "gaussian",
            Self::Spherical => "spherical",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HashFamilyParams {
    pub d: usize,
    pub a: usize,
    pub b: usize,
    pub seed: u64,
    #[serde(default)]
    pub directions: Directions,
}

impl HashFamilyParams {
    pub fn new(d: usize, a: usize, b: usize, seed: u64) -> Result<Self> {
        if d == 0 || a == 0 || b == 0 {
            return Err(Error::InvalidParameter(format!(
                "hash family needs d, a, b >= 1, got d={d} a={a} b={b}"
            )));
        }
        Ok(Self {
            d,
            a,
            b,
            seed,
            directions: Directions::Gaussian,
        })
    }

    pub fn with_directions(mut self, directions: Directions) -> Self {
        self.directions = directions;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn h(&self) -> usize {
        self.a + self.b
    }
}

/// The sorted set `A` of retained indices, 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HashValue(Vec<usize>);

impl HashValue {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// The indices numbered from 1, as in `{1..h}`.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    /// The rejected set `B = {0..h} \ A`.
    pub fn complement(&self, h: usize) -> Vec<usize> {
        (0..h).filter(|i| self.0.binary_search(i).is_err()).collect()
    }
}

/// Standard normal variate at counter position `(vector, component)` of the
/// stream keyed by `key`. Each position is computed independently of all
/// others, so any direction can be regenerated on its own.
pub fn gaussian_at(key: u64, vector: u64, component: u64) -> f64 {
    let x = splitmix64(key ^ splitmix64(vector ^ splitmix64(component)));
    let y = splitmix64(x);
    // u1 in (0, 1], u2 in [0, 1)
    let u1 = ((x >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = (y >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0f64 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// One draw of the hash family: `h` directions in `R^d`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct HashInstance {
    params: HashFamilyParams,
    dirs: Vec<f64>,
}

impl HashInstance {
    /// Regenerates the directions from `params.seed`.
    pub fn sample(params: HashFamilyParams) -> Self {
        let mut inst = Self {
            params,
            dirs: Vec::new(),
        };
        inst.resample(params.seed);
        inst
    }

    /// Replaces the directions by those of seed `seed`, reusing storage.
    pub fn resample(&mut self, seed: u64) {
        self.params.seed = seed;
        let (h, d) = (self.params.h(), self.params.d);
        let key = derive_seed(seed, domain::HASH_INSTANCE, 0);
        self.dirs.resize(h * d, 0.0);
        for (i, row) in self.dirs.chunks_exact_mut(d).enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = gaussian_at(key, i as u64, j as u64);
            }
            if self.params.directions == Directions::Spherical {
                let norm = dot(row, row).sqrt();
                row.iter_mut().for_each(|x| *x /= norm);
            }
        }
    }

    /// An instance with explicitly given directions.
    pub fn from_vectors(params: HashFamilyParams, vectors: &[Vec<f64>]) -> Result<Self> {
        if vectors.len() != params.h() {
            return Err(Error::DimensionMismatch {
                expected: params.h(),
                found: vectors.len(),
            });
        }
        let mut dirs = Vec::with_capacity(params.h() * params.d);
        for v in vectors {
            if v.len() != params.d {
                return Err(Error::DimensionMismatch {
                    expected: params.d,
                    found: v.len(),
                });
            }
            dirs.extend_from_slice(v);
        }
        Ok(Self { params, dirs })
    }

    pub fn params(&self) -> &HashFamilyParams {
        &self.params
    }

    pub fn direction(&self, i: usize) -> &[f64] {
        let d = self.params.d;
        &self.dirs[i * d..(i + 1) * d]
    }

    fn check_input(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.params.d {
            return Err(Error::DimensionMismatch {
                expected: self.params.d,
                found: v.len(),
            });
        }
        if v.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(())
    }

    /// Writes `(|r_i . v|, i)` for every direction into `proj`.
    fn project(&self, v: &[f64], proj: &mut Vec<(f64, usize)>) {
        proj.clear();
        proj.extend(
            self.dirs
                .chunks_exact(self.params.d)
                .enumerate()
                .map(|(i, r)| (dot(r, v).abs(), i)),
        );
    }

    pub fn hash_value(&self, v: &[f64]) -> Result<HashValue> {
        let mut proj = Vec::with_capacity(self.params.h());
        let mut out = Vec::with_capacity(self.params.a);
        self.hash_into(v, &mut proj, &mut out)?;
        Ok(HashValue(out))
    }

    /// Allocation-free form of [`hash_value`](Self::hash_value): the sorted
    /// retained indices are written to `out`, `proj` is scratch space.
    pub fn hash_into(&self, v: &[f64], proj: &mut Vec<(f64, usize)>, out: &mut Vec<usize>) -> Result<()> {
        self.check_input(v)?;
        self.project(v, proj);
        let a = self.params.a;
        // larger |projection| first, then smaller index
        proj.select_nth_unstable_by(a - 1, |x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        out.clear();
        out.extend(proj[..a].iter().map(|p| p.1));
        out.sort_unstable();
        Ok(())
    }

    /// The rejected set `B` computed directly as the `b` smallest
    /// projections, ties sending the larger index to `B`.
    pub fn rejected_set(&self, v: &[f64]) -> Result<Vec<usize>> {
        self.check_input(v)?;
        let mut proj = Vec::with_capacity(self.params.h());
        self.project(v, &mut proj);
        let b = self.params.b;
        proj.select_nth_unstable_by(b - 1, |x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)));
        let mut out: Vec<usize> = proj[..b].iter().map(|p| p.1).collect();
        out.sort_unstable();
        Ok(out)
    }

    /// True iff all vectors receive the same hash value.
    pub fn k_collision<V: AsRef<[f64]>>(&self, vectors: &[V]) -> Result<bool> {
        let mut proj = Vec::with_capacity(self.params.h());
        let mut first = Vec::with_capacity(self.params.a);
        let mut other = Vec::with_capacity(self.params.a);
        let Some((head, rest)) = vectors.split_first() else {
            return Ok(true);
        };
        self.hash_into(head.as_ref(), &mut proj, &mut first)?;
        for v in rest {
            self.hash_into(v.as_ref(), &mut proj, &mut other)?;
            if other != first {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn tuple_collision(&self, tuple: &UnitTuple) -> Result<bool> {
        self.k_collision(tuple.vectors())
    }
}

pub fn sample_instance(params: HashFamilyParams) -> HashInstance {
    HashInstance::sample(params)
}

/// Filter predicate `|v . r| > c`.
pub fn predicate_above(r: &[f64], c: f64, v: &[f64]) -> bool {
    dot(v, r).abs() > c
}

/// Filter predicate `|v . r| < c`.
pub fn predicate_below(r: &[f64], c: f64, v: &[f64]) -> bool {
    dot(v, r).abs() < c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn basis_instance(a: usize, b: usize) -> HashInstance {
        let h = a + b;
        let params = HashFamilyParams::new(h, a, b, 0).unwrap();
        let vs: Vec<Vec<f64>> = (0..h)
            .map(|i| (0..h).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        HashInstance::from_vectors(params, &vs).unwrap()
    }

    #[test]
    fn same_seed_same_directions() {
        let p = HashFamilyParams::new(20, 1, 2, 42).unwrap();
        assert_eq!(HashInstance::sample(p), HashInstance::sample(p));
        assert_ne!(HashInstance::sample(p), HashInstance::sample(p.with_seed(43)));
    }

    #[test]
    fn directions_regenerate_individually() {
        let p = HashFamilyParams::new(7, 2, 3, 9).unwrap();
        let inst = HashInstance::sample(p);
        let key = derive_seed(9, domain::HASH_INSTANCE, 0);
        assert_eq!(inst.direction(4)[5], gaussian_at(key, 4, 5));
    }

    #[test]
    fn gaussian_components_have_zero_mean_unit_variance() {
        let n = 1_000_000u64;
        let (mut s, mut s2) = (0.0, 0.0);
        for i in 0..n {
            let x = gaussian_at(123, i / 20, i % 20);
            s += x;
            s2 += x * x;
        }
        let mean = s / n as f64;
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((s2 / n as f64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn spherical_directions_are_unit() {
        let p = HashFamilyParams::new(20, 1, 2, 1)
            .unwrap()
            .with_directions(Directions::Spherical);
        let inst = HashInstance::sample(p);
        for i in 0..3 {
            let r = inst.direction(i);
            assert!((dot(r, r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hash_value_examples() {
        let v = [0.9, 0.1, 0.2];
        assert_eq!(basis_instance(1, 2).hash_value(&v).unwrap().one_based(), vec![1]);
        assert_eq!(basis_instance(2, 1).hash_value(&v).unwrap().one_based(), vec![1, 3]);
        let neg = [-0.9, -0.1, -0.2];
        assert_eq!(
            basis_instance(2, 1).hash_value(&neg).unwrap(),
            basis_instance(2, 1).hash_value(&v).unwrap()
        );
        let tie = [0.5, 0.5, 0.1];
        assert_eq!(basis_instance(1, 2).hash_value(&tie).unwrap().one_based(), vec![1]);
        assert_eq!(
            basis_instance(1, 2).hash_value(&[0.0, 0.0, 0.0]),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn collision_examples() {
        let inst = HashInstance::sample(HashFamilyParams::new(5, 2, 2, 3).unwrap());
        let v = vec![0.1, -0.3, 0.5, 0.2, 0.7];
        assert!(inst.k_collision(&[v.clone(), v]).unwrap());

        let params = HashFamilyParams::new(2, 1, 1, 0).unwrap();
        let inst =
            HashInstance::from_vectors(params, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(!inst.k_collision(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap());
    }

    #[test]
    fn predicate_examples() {
        let e1 = [1.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0];
        assert!(predicate_above(&e1, 0.5, &e1));
        assert!(!predicate_above(&e2, 1e-300, &e1));
        assert!(predicate_below(&e2, 1e-300, &e1));
        assert!(!predicate_below(&e1, 0.5, &e1));
    }

    fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        (0..d).map(|_| rng.sample(StandardNormal)).collect()
    }

    /// Orthogonal matrix from Gram-Schmidt on Gaussian columns.
    fn random_rotation(rng: &mut ChaCha8Rng, d: usize) -> Vec<Vec<f64>> {
        let mut q: Vec<Vec<f64>> = Vec::new();
        while q.len() < d {
            let mut v = random_vec(rng, d);
            for u in &q {
                let p = dot(u, &v);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= p * y);
            }
            let n = dot(&v, &v).sqrt();
            q.push(v.into_iter().map(|x| x / n).collect());
        }
        q
    }

    fn apply(q: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
        q.iter().map(|row| dot(row, v)).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn scale_and_sign_invariance(seed in any::<u64>(), a in 1usize..5, b in 1usize..5, lambda in -1e3f64..1e3) {
            prop_assume!(lambda.abs() > 1e-3);
            let d = 6;
            let inst = HashInstance::sample(HashFamilyParams::new(d, a, b, seed).unwrap());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = random_vec(&mut rng, d);
            let w: Vec<f64> = v.iter().map(|x| lambda * x).collect();
            prop_assert_eq!(inst.hash_value(&v).unwrap(), inst.hash_value(&w).unwrap());
        }

        #[test]
        fn rotation_equivariance(seed in any::<u64>(), a in 1usize..4, b in 1usize..4) {
            let d = 5;
            let params = HashFamilyParams::new(d, a, b, seed).unwrap();
            let inst = HashInstance::sample(params);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = random_rotation(&mut rng, d);
            let rotated: Vec<Vec<f64>> =
                (0..a + b).map(|i| apply(&q, inst.direction(i))).collect();
            let rot_inst = HashInstance::from_vectors(params, &rotated).unwrap();
            let v = random_vec(&mut rng, d);
            prop_assert_eq!(
                inst.hash_value(&v).unwrap(),
                rot_inst.hash_value(&apply(&q, &v)).unwrap()
            );
        }

        #[test]
        fn retained_and_rejected_sets_partition(seed in any::<u64>(), a in 1usize..6, b in 1usize..6) {
            let d = 4;
            let inst = HashInstance::sample(HashFamilyParams::new(d, a, b, seed).unwrap());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = random_vec(&mut rng, d);
            let value = inst.hash_value(&v).unwrap();
            prop_assert_eq!(value.indices().len(), a);
            prop_assert!(value.indices().windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(inst.rejected_set(&v).unwrap(), value.complement(a + b));
        }
    }

    #[test]
    fn complement_duality_with_ties() {
        // all projections tie; smaller indices are retained, larger rejected
        let inst = basis_instance(2, 3);
        let v = [1.0; 5];
        assert_eq!(inst.hash_value(&v).unwrap().indices(), &[0, 1]);
        assert_eq!(inst.rejected_set(&v).unwrap(), vec![2, 3, 4]);
    }

    #[test]
    fn orthogonal_pair_collides_at_naive_rate() {
        let (a, b, d) = (1, 3, 6);
        let trials = 40_000u64;
        let mut params = HashFamilyParams::new(d, a, b, 0).unwrap();
        let e1: Vec<f64> = (0..d).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect();
        let e2: Vec<f64> = (0..d).map(|j| if j == 1 { 1.0 } else { 0.0 }).collect();
        let mut hits = 0u64;
        for t in 0..trials {
            params.seed = t;
            if HashInstance::sample(params).k_collision(&[&e1, &e2]).unwrap() {
                hits += 1;
            }
        }
        let p = 0.25;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        let p_hat = hits as f64 / trials as f64;
        assert!((p_hat - p).abs() < 3.0 * se, "p_hat {p_hat}");
    }
}
