//! Configuration functionals of k-tuples of unit vectors.
//!
//! Everything the collision rates depend on is a function of the Gram matrix
//! `M_ij = v_i . v_j`, so most of this module works on [`TupleConfig`] and only
//! touches actual vectors when building or dualising a tuple.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::{
    DUAL_BASIS, GRAM_DET_MIN, GRAM_ENTRY, PSD_PIVOT, REDUCIBLE_MARGIN, SIGN_ENUM_MAX_K, UNIT_NORM,
};

/// `k` linearly independent unit vectors in `R^d`, `2 <= k <= d`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitTuple {
    vectors: Vec<Vec<f64>>,
    dim: usize,
}

impl UnitTuple {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let k = vectors.len();
        if k < 2 {
            return Err(Error::InvalidParameter(format!(
                "a tuple needs at least two vectors, got {k}"
            )));
        }
        let dim = vectors[0].len();
        if k > dim {
            return Err(Error::InvalidParameter(format!(
                "{k} vectors cannot be independent in dimension {dim}"
            )));
        }
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            let norm = dot(v, v).sqrt();
            if (norm - 1.0).abs() > UNIT_NORM {
                return Err(Error::NotUnit { index, norm });
            }
        }
        let det = raw_gram(&vectors).determinant();
        if det <= GRAM_DET_MIN {
            return Err(Error::Degenerate(format!(
                "Gram determinant {det:e} of the tuple is not positive"
            )));
        }
        Ok(Self { vectors, dim })
    }

    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<Vec<f64>> {
        self.vectors
    }
}

/// Gram matrix of a tuple: symmetric, unit diagonal, positive semidefinite.
///
/// Operations that need an invertible Gram matrix (the dual quantities) check
/// [`TupleConfig::is_positive_definite`] themselves and fail with
/// [`Error::Degenerate`]; a merely semidefinite configuration is still a valid
/// input for sampling and Monte-Carlo estimation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigRepr", into = "ConfigRepr")]
pub struct TupleConfig {
    gram: DMatrix<f64>,
}

/// Wire form: `{"k": 3, "gram": [m11, m12, m13, m22, m23, m33]}`, the
/// row-major upper triangle including the diagonal.
#[derive(Serialize, Deserialize)]
struct ConfigRepr {
    k: usize,
    gram: Vec<f64>,
}

impl TryFrom<ConfigRepr> for TupleConfig {
    type Error = Error;

    fn try_from(repr: ConfigRepr) -> Result<Self> {
        TupleConfig::from_upper_triangle(repr.k, &repr.gram)
    }
}

impl From<TupleConfig> for ConfigRepr {
    fn from(config: TupleConfig) -> Self {
        let k = config.k();
        let mut gram = Vec::with_capacity(k * (k + 1) / 2);
        for i in 0..k {
            for j in i..k {
                gram.push(config.gram[(i, j)]);
            }
        }
        ConfigRepr { k, gram }
    }
}

impl TupleConfig {
    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        let k = gram.nrows();
        if k == 0 || gram.ncols() != k {
            return Err(Error::InvalidParameter(format!(
                "Gram matrix must be square and non-empty, got {}x{}",
                gram.nrows(),
                gram.ncols()
            )));
        }
        for i in 0..k {
            if (gram[(i, i)] - 1.0).abs() > GRAM_ENTRY {
                return Err(Error::InvalidParameter(format!(
                    "Gram diagonal entry {i} is {}, expected 1",
                    gram[(i, i)]
                )));
            }
            for j in 0..i {
                let (x, y) = (gram[(i, j)], gram[(j, i)]);
                if !x.is_finite() || (x - y).abs() > GRAM_ENTRY {
                    return Err(Error::InvalidParameter(format!(
                        "Gram matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let mut gram = gram;
        for i in 0..k {
            gram[(i, i)] = 1.0;
            for j in 0..i {
                gram[(j, i)] = gram[(i, j)];
            }
        }
        if let Err(Error::CholeskyFail { pivot, value }) = cholesky(&gram, true) {
            return Err(Error::Degenerate(format!(
                "Gram matrix is not positive semidefinite (pivot {pivot} is {value:e})"
            )));
        }
        Ok(Self { gram })
    }

    /// Builds a configuration from the row-major upper triangle, diagonal
    /// included (`k (k + 1) / 2` entries).
    pub fn from_upper_triangle(k: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != k * (k + 1) / 2 {
            return Err(Error::InvalidParameter(format!(
                "upper triangle of a {k}x{k} matrix has {} entries, got {}",
                k * (k + 1) / 2,
                entries.len()
            )));
        }
        let mut gram = DMatrix::zeros(k, k);
        let mut it = entries.iter();
        for i in 0..k {
            for j in i..k {
                let x = *it.next().expect("length checked");
                gram[(i, j)] = x;
                gram[(j, i)] = x;
            }
        }
        Self::new(gram)
    }

    /// Builds a configuration from the strict upper triangle (off-diagonal
    /// dot products, row-major); `k` is inferred from the entry count.
    pub fn from_off_diagonals(entries: &[f64]) -> Result<Self> {
        let n = entries.len();
        let k = (1..=64)
            .find(|&k| k * (k - 1) / 2 == n)
            .filter(|&k| k >= 2)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "{n} off-diagonal entries do not fill a strict upper triangle"
                ))
            })?;
        let mut gram = DMatrix::identity(k, k);
        let mut it = entries.iter();
        for i in 0..k {
            for j in i + 1..k {
                let x = *it.next().expect("length checked");
                gram[(i, j)] = x;
                gram[(j, i)] = x;
            }
        }
        Self::new(gram)
    }

    pub fn identity(k: usize) -> Self {
        assert!(k >= 1, "empty configuration");
        Self {
            gram: DMatrix::identity(k, k),
        }
    }

    /// Every pair of vectors has dot product `c`.
    pub fn uniform(k: usize, c: f64) -> Result<Self> {
        let gram = DMatrix::from_fn(k, k, |i, j| if i == j { 1.0 } else { c });
        Self::new(gram)
    }

    /// A triple with `v1.v2 = m12`, `v1.v3 = m13`, `v2.v3 = m23`.
    pub fn triple(m12: f64, m13: f64, m23: f64) -> Result<Self> {
        Self::from_off_diagonals(&[m12, m13, m23])
    }

    pub fn k(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.gram[(i, j)]
    }

    /// Strict upper triangle, row-major.
    pub fn off_diagonals(&self) -> Vec<f64> {
        let k = self.k();
        let mut out = Vec::with_capacity(k * (k - 1) / 2);
        for i in 0..k {
            for j in i + 1..k {
                out.push(self.gram[(i, j)]);
            }
        }
        out
    }

    /// Sum over the `2 C(k,2)` ordered pairs of distinct vectors.
    pub fn sigma(&self) -> f64 {
        2.0 * self.off_diagonals().iter().sum::<f64>()
    }

    pub fn determinant(&self) -> f64 {
        self.gram.determinant()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.determinant() > GRAM_DET_MIN && cholesky(&self.gram, false).is_ok()
    }

    fn require_positive_definite(&self) -> Result<()> {
        let det = self.determinant();
        if det <= GRAM_DET_MIN {
            return Err(Error::Degenerate(format!(
                "Gram determinant {det:e} is not positive"
            )));
        }
        Ok(())
    }

    /// `M^-1`; fails with [`Error::Degenerate`] unless `M` is positive definite.
    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        self.require_positive_definite()?;
        let chol = nalgebra::Cholesky::new(self.gram.clone())
            .ok_or_else(|| Error::Degenerate("Gram matrix is not positive definite".into()))?;
        Ok(chol.inverse())
    }

    /// Lower-triangular `L` with `L L^T = M`; requires positive definiteness.
    pub fn cholesky_factor(&self) -> Result<DMatrix<f64>> {
        cholesky(&self.gram, false)
    }

    /// Lower-triangular `L` with `L L^T = M`, zero pivots allowed.
    pub fn semidefinite_factor(&self) -> Result<DMatrix<f64>> {
        cholesky(&self.gram, true)
    }

    /// The configuration of `(v_perm[0], ..., v_perm[k-1])`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let k = self.k();
        assert_eq!(perm.len(), k);
        Self {
            gram: DMatrix::from_fn(k, k, |i, j| self.gram[(perm[i], perm[j])]),
        }
    }

    /// The configuration of `(s_0 v_0, ..., s_{k-1} v_{k-1})`, i.e. `D M D`.
    pub fn sign_flipped(&self, signs: &[f64]) -> Self {
        let k = self.k();
        assert_eq!(signs.len(), k);
        Self {
            gram: DMatrix::from_fn(k, k, |i, j| signs[i] * signs[j] * self.gram[(i, j)]),
        }
    }
}

/// Cholesky without pivoting. With `semidefinite`, pivots in
/// `[-PSD_PIVOT, PSD_PIVOT]` are clamped to zero and the column below them
/// must vanish.
fn cholesky(m: &DMatrix<f64>, semidefinite: bool) -> Result<DMatrix<f64>> {
    let k = m.nrows();
    let mut l = DMatrix::<f64>::zeros(k, k);
    for j in 0..k {
        let mut s = m[(j, j)];
        for p in 0..j {
            s -= l[(j, p)] * l[(j, p)];
        }
        let pivot = if s > PSD_PIVOT {
            s.sqrt()
        } else if semidefinite && s >= -PSD_PIVOT {
            0.0
        } else {
            return Err(Error::CholeskyFail { pivot: j, value: s });
        };
        l[(j, j)] = pivot;
        for i in j + 1..k {
            let mut t = m[(i, j)];
            for p in 0..j {
                t -= l[(i, p)] * l[(j, p)];
            }
            if pivot > 0.0 {
                l[(i, j)] = t / pivot;
            } else if t.abs() > PSD_PIVOT.sqrt() {
                return Err(Error::CholeskyFail { pivot: j, value: s });
            }
        }
    }
    Ok(l)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn raw_gram(vectors: &[Vec<f64>]) -> DMatrix<f64> {
    let k = vectors.len();
    DMatrix::from_fn(k, k, |i, j| dot(&vectors[i], &vectors[j]))
}

/// Gram matrix of a tuple.
pub fn gram_matrix(tuple: &UnitTuple) -> Result<TupleConfig> {
    for (index, v) in tuple.vectors.iter().enumerate() {
        let norm = dot(v, v).sqrt();
        if (norm - 1.0).abs() > UNIT_NORM {
            return Err(Error::NotUnit { index, norm });
        }
    }
    let config = TupleConfig::new(raw_gram(&tuple.vectors))?;
    config.require_positive_definite()?;
    Ok(config)
}

/// Minimum of `e^T A e` over sign vectors `e` in `{+1,-1}^k`, with a
/// minimising sign vector. `e` and `-e` give the same value, so only the
/// `2^(k-1)` vectors with `e_0 = +1` are visited, in Gray-code order.
pub fn min_sign_quadratic(a: &DMatrix<f64>) -> Result<(f64, Vec<i8>)> {
    let k = a.nrows();
    if k == 0 || k > SIGN_ENUM_MAX_K {
        return Err(Error::Unsupported(format!(
            "sign enumeration supports 1 <= k <= {SIGN_ENUM_MAX_K}, got {k}"
        )));
    }
    let mut signs = vec![1.0f64; k];
    let mut y: Vec<f64> = (0..k).map(|i| a.row(i).sum()).collect();
    let mut q: f64 = y.iter().sum();
    let mut best = q;
    let mut best_signs = signs.clone();
    for step in 1u64..(1u64 << (k - 1)) {
        let m = step.trailing_zeros() as usize + 1;
        let s = signs[m];
        q += -4.0 * s * y[m] + 4.0 * a[(m, m)];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi -= 2.0 * s * a[(i, m)];
        }
        signs[m] = -s;
        if q < best {
            best = q;
            best_signs.copy_from_slice(&signs);
        }
    }
    // the running value accumulates rounding; re-evaluate the winner exactly
    let mut exact = 0.0;
    for i in 0..k {
        for j in 0..k {
            exact += best_signs[i] * best_signs[j] * a[(i, j)];
        }
    }
    Ok((exact, best_signs.iter().map(|&s| s as i8).collect()))
}

/// Squared shortest dual diagonal: `min_e e^T M^-1 e` over sign vectors.
///
/// For a pair with dot product `c` this is `2 / (1 + |c|)`, i.e.
/// `4 / (4 - tau^2)` with `tau^2 = 2 - 2|c|`.
pub fn squared_shortest_dual_diagonal(config: &TupleConfig) -> Result<f64> {
    let inv = config.inverse()?;
    Ok(min_sign_quadratic(&inv)?.0)
}

/// Polar sine `sqrt(det M)`: the volume of the parallelepiped spanned by the
/// unit vectors. Degenerate configurations give 0.
pub fn polar_sine(config: &TupleConfig) -> f64 {
    config.determinant().max(0.0).sqrt()
}

/// Dual basis `u_1..u_k` of `span(V)`, with `v_i . u_j = delta_ij`.
pub fn dual_basis(tuple: &UnitTuple) -> Result<Vec<Vec<f64>>> {
    let config = gram_matrix(tuple)?;
    let inv = config.inverse()?;
    let k = tuple.k();
    let d = tuple.dim();
    let mut dual = vec![vec![0.0; d]; k];
    for (j, u) in dual.iter_mut().enumerate() {
        for (i, v) in tuple.vectors.iter().enumerate() {
            let w = inv[(j, i)];
            for (x, vi) in u.iter_mut().zip(v) {
                *x += w * vi;
            }
        }
    }
    for (i, v) in tuple.vectors.iter().enumerate() {
        for (j, u) in dual.iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.0 };
            if (dot(v, u) - expected).abs() > DUAL_BASIS {
                return Err(Error::Degenerate(
                    "dual basis is numerically unstable for this tuple".into(),
                ));
            }
        }
    }
    Ok(dual)
}

/// Shortest `+-1` combination of the tuple vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reducibility {
    pub best_signs: Vec<i8>,
    /// `|sum_i e_i v_i|^2 = k + sum_{i != j} e_i e_j M_ij`, minimised over `e`.
    pub dmin_sq: f64,
    /// Some `+-1` combination is strictly shorter than the unit vectors.
    pub is_reducible: bool,
}

pub fn reducibility(config: &TupleConfig) -> Reducibility {
    let (dmin_sq, best_signs) =
        min_sign_quadratic(config.gram()).expect("tuple size within enumeration limit");
    Reducibility {
        best_signs,
        dmin_sq,
        is_reducible: dmin_sq < 1.0 - REDUCIBLE_MARGIN,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigFunctionals {
    pub alpha: f64,
    pub delta: f64,
    pub best_signs: Vec<i8>,
    pub dmin_sq: f64,
}

pub fn functionals(config: &TupleConfig) -> Result<ConfigFunctionals> {
    let alpha = squared_shortest_dual_diagonal(config)?;
    let red = reducibility(config);
    Ok(ConfigFunctionals {
        alpha,
        delta: polar_sine(config),
        best_signs: red.best_signs,
        dmin_sq: red.dmin_sq,
    })
}

/// Draws tuples with a fixed Gram matrix in uniformly random orientation.
///
/// An orthonormal frame comes from Gram-Schmidt on `k` Gaussian `d`-vectors;
/// row `i` of the Cholesky factor of `M` gives the frame coordinates of `v_i`.
#[derive(Clone, Debug)]
pub struct TupleSampler {
    k: usize,
    d: usize,
    factor: Vec<f64>,
}

impl TupleSampler {
    /// Requires `M` positive definite.
    pub fn new(config: &TupleConfig, d: usize) -> Result<Self> {
        let factor = config.cholesky_factor()?;
        Self::from_factor(factor, d)
    }

    /// Accepts semidefinite `M`, e.g. coplanar or repeated vectors.
    pub fn semidefinite(config: &TupleConfig, d: usize) -> Result<Self> {
        let factor = config.semidefinite_factor()?;
        Self::from_factor(factor, d)
    }

    fn from_factor(factor: DMatrix<f64>, d: usize) -> Result<Self> {
        let k = factor.nrows();
        if d < k {
            return Err(Error::InvalidParameter(format!(
                "dimension {d} is smaller than the tuple size {k}"
            )));
        }
        let mut rows = Vec::with_capacity(k * k);
        for i in 0..k {
            let norm = (0..k).map(|j| factor[(i, j)].powi(2)).sum::<f64>().sqrt();
            rows.extend((0..k).map(|j| factor[(i, j)] / norm));
        }
        Ok(Self { k, d, factor: rows })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Writes the `k` vectors, row-major, into `out` (`k * d` entries).
    /// `frame` is scratch space and is resized as needed.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, frame: &mut Vec<f64>, out: &mut [f64]) {
        let (k, d) = (self.k, self.d);
        assert_eq!(out.len(), k * d);
        frame.resize(k * d, 0.0);
        let mut j = 0;
        while j < k {
            let (done, rest) = frame.split_at_mut(j * d);
            let e = &mut rest[..d];
            for x in e.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
            // two passes of modified Gram-Schmidt keep the frame orthonormal
            // to ~1e-15
            for _ in 0..2 {
                for prev in done.chunks_exact(d) {
                    let p = dot(prev, e);
                    for (x, y) in e.iter_mut().zip(prev) {
                        *x -= p * y;
                    }
                }
            }
            let norm = dot(e, e).sqrt();
            if norm < 1e-8 {
                continue;
            }
            for x in e.iter_mut() {
                *x /= norm;
            }
            j += 1;
        }
        out.fill(0.0);
        for i in 0..k {
            let v = &mut out[i * d..(i + 1) * d];
            for j in 0..=i {
                let c = self.factor[i * k + j];
                if c != 0.0 {
                    for (x, y) in v.iter_mut().zip(&frame[j * d..(j + 1) * d]) {
                        *x += c * y;
                    }
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<f64>> {
        let mut frame = Vec::new();
        let mut flat = vec![0.0; self.k * self.d];
        self.sample_into(rng, &mut frame, &mut flat);
        flat.chunks_exact(self.d).map(<[f64]>::to_vec).collect()
    }
}

/// A uniformly oriented tuple in `R^d` with Gram matrix exactly `config`.
pub fn make_tuple<R: Rng + ?Sized>(config: &TupleConfig, d: usize, rng: &mut R) -> Result<UnitTuple> {
    let sampler = TupleSampler::new(config, d)?;
    UnitTuple::new(sampler.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_force_min(a: &DMatrix<f64>) -> f64 {
        let k = a.nrows();
        (0u32..1 << k)
            .map(|mask| {
                let e: Vec<f64> = (0..k)
                    .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                    .collect();
                let mut q = 0.0;
                for i in 0..k {
                    for j in 0..k {
                        q += e[i] * e[j] * a[(i, j)];
                    }
                }
                q
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn random_config(k: usize, seed: u64) -> TupleConfig {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let vs: Vec<Vec<f64>> = (0..k)
                .map(|_| {
                    let v: Vec<f64> = (0..k + 2).map(|_| rng.sample(StandardNormal)).collect();
                    let n = dot(&v, &v).sqrt();
                    v.into_iter().map(|x| x / n).collect()
                })
                .collect();
            let config = TupleConfig::new(raw_gram(&vs)).unwrap();
            if config.determinant() > 1e-4 {
                return config;
            }
        }
    }

    fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in permutations(k - 1) {
            for pos in 0..k {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }

    fn ortho(d: usize, k: usize) -> UnitTuple {
        UnitTuple::new(
            (0..k)
                .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn orthonormal_triple_has_identity_gram() {
        let config = gram_matrix(&ortho(5, 3)).unwrap();
        assert_eq!(config.gram(), &DMatrix::identity(3, 3));
        assert_eq!(config.sigma(), 0.0);
    }

    #[test]
    fn repeated_vector_is_degenerate() {
        let v = vec![0.6, 0.8, 0.0];
        assert!(matches!(
            UnitTuple::new(vec![v.clone(), v]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn non_unit_vector_rejected() {
        let err = UnitTuple::new(vec![vec![1.0, 0.0], vec![0.0, 1.1]]).unwrap_err();
        assert!(matches!(err, Error::NotUnit { index: 1, .. }));
    }

    #[test]
    fn alpha_known_values() {
        let pair = TupleConfig::uniform(2, 0.0).unwrap();
        assert!((squared_shortest_dual_diagonal(&pair).unwrap() - 2.0).abs() < 1e-12);

        let boundary = TupleConfig::uniform(3, -1.0 / 3.0).unwrap();
        let alpha = squared_shortest_dual_diagonal(&boundary).unwrap();
        assert!((alpha - 3.0).abs() < 1e-12);
        assert!((alpha - brute_force_min(&boundary.inverse().unwrap())).abs() < 1e-12);

        for k in 1..=6 {
            let alpha = squared_shortest_dual_diagonal(&TupleConfig::identity(k)).unwrap();
            assert!((alpha - k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_for_pairs_matches_distance_form() {
        for &c in &[-0.9, -0.5, -0.1, 0.0, 0.3, 0.7] {
            let config = TupleConfig::uniform(2, c).unwrap();
            let tau_sq = 2.0 - 2.0 * f64::abs(c);
            let expected = 4.0 / (4.0 - tau_sq);
            assert!((squared_shortest_dual_diagonal(&config).unwrap() - expected).abs() < 1e-12);
        }
        let alpha = |c| squared_shortest_dual_diagonal(&TupleConfig::uniform(2, c).unwrap()).unwrap();
        assert!(alpha(0.9) < alpha(0.5) && alpha(0.5) < alpha(0.0));
    }

    #[test]
    fn polar_sine_values() {
        assert_eq!(polar_sine(&TupleConfig::identity(4)), 1.0);
        let c: f64 = 0.6;
        let pair = TupleConfig::uniform(2, c).unwrap();
        assert!((polar_sine(&pair) - (1.0 - c * c).sqrt()).abs() < 1e-12);
        let boundary = TupleConfig::uniform(3, -1.0 / 3.0).unwrap();
        assert!((polar_sine(&boundary) - (16.0f64 / 27.0).sqrt()).abs() < 1e-12);
        let coplanar = TupleConfig::uniform(3, -0.5).unwrap();
        assert!(polar_sine(&coplanar) < 1e-7);
    }

    #[test]
    fn dual_basis_properties() {
        let t = ortho(4, 3);
        let dual = dual_basis(&t).unwrap();
        for (u, v) in dual.iter().zip(t.vectors()) {
            for (x, y) in u.iter().zip(v) {
                assert!((x - y).abs() < 1e-12);
            }
        }

        let c: f64 = -0.4;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pair = make_tuple(&TupleConfig::uniform(2, c).unwrap(), 6, &mut rng).unwrap();
        let dual = dual_basis(&pair).unwrap();
        assert!((dot(&dual[0], &dual[0]) - 1.0 / (1.0 - c * c)).abs() < 1e-9);
    }

    #[test]
    fn reducibility_examples() {
        let boundary = reducibility(&TupleConfig::uniform(3, -1.0 / 3.0).unwrap());
        assert!((boundary.dmin_sq - 1.0).abs() < 1e-12);
        assert!(!boundary.is_reducible);

        let inside = reducibility(&TupleConfig::uniform(3, -0.4).unwrap());
        assert!((inside.dmin_sq - 0.6).abs() < 1e-12);
        assert!(inside.is_reducible);
        assert_eq!(inside.best_signs, vec![1, 1, 1]);

        let pair = reducibility(&TupleConfig::identity(2));
        assert!((pair.dmin_sq - 2.0).abs() < 1e-12);
        assert!(!pair.is_reducible);
    }

    #[test]
    fn make_tuple_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = make_tuple(&TupleConfig::identity(3), 20, &mut rng).unwrap();
        let g = gram_matrix(&t).unwrap();
        for &x in &g.off_diagonals() {
            assert!(x.abs() < 1e-10);
        }

        let target = TupleConfig::triple(-0.3, -0.3, -0.4).unwrap();
        let t = make_tuple(&target, 20, &mut rng).unwrap();
        let g = gram_matrix(&t).unwrap();
        assert!((g.gram() - target.gram()).amax() < 1e-10);

        assert!(matches!(
            make_tuple(&TupleConfig::identity(3), 2, &mut rng),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn semidefinite_configs_sample_but_do_not_make_tuples() {
        let coplanar = TupleConfig::uniform(3, -0.5).unwrap();
        assert!(!coplanar.is_positive_definite());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(make_tuple(&coplanar, 10, &mut rng).is_err());
        let vs = TupleSampler::semidefinite(&coplanar, 10).unwrap().sample(&mut rng);
        let sum: Vec<f64> = (0..10).map(|j| vs.iter().map(|v| v[j]).sum()).collect();
        assert!(dot(&sum, &sum) < 1e-20);

        let repeated = TupleConfig::uniform(3, 1.0).unwrap();
        let vs = TupleSampler::semidefinite(&repeated, 5).unwrap().sample(&mut rng);
        assert_eq!(vs[0], vs[1]);
        assert_eq!(vs[1], vs[2]);

        assert!(matches!(
            TupleConfig::uniform(3, -0.6),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn json_round_trip_uses_upper_triangle() {
        let config = TupleConfig::triple(-0.3, -0.2, -0.4).unwrap();
        let json = serde_json::to_string(&config).unwrap();
        assert_eq!(json, r#"{"k":3,"gram":[1.0,-0.3,-0.2,1.0,-0.4,1.0]}"#);
        let back: TupleConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, config);
        assert!(serde_json::from_str::<TupleConfig>(r#"{"k":3,"gram":[1.0,0.2]}"#).is_err());
    }

    #[test]
    fn invariance_under_signs_and_permutations_exhaustive() {
        for k in 2..=3 {
            for seed in 0..10 {
                let config = random_config(k, 100 + seed);
                let alpha = squared_shortest_dual_diagonal(&config).unwrap();
                let delta = polar_sine(&config);
                let dmin = reducibility(&config).dmin_sq;
                for perm in permutations(k) {
                    for mask in 0..1u32 << k {
                        let signs: Vec<f64> = (0..k)
                            .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                            .collect();
                        let t = config.permuted(&perm).sign_flipped(&signs);
                        assert!((squared_shortest_dual_diagonal(&t).unwrap() - alpha).abs() < 1e-10);
                        assert!((polar_sine(&t) - delta).abs() < 1e-12);
                        assert!((reducibility(&t).dmin_sq - dmin).abs() < 1e-12);
                    }
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sign_enumeration_matches_brute_force(k in 1usize..=10, seed in any::<u64>()) {
            let config = random_config(k.max(1), seed);
            let inv = config.inverse().unwrap();
            let (alpha, signs) = min_sign_quadratic(&inv).unwrap();
            prop_assert!((alpha - brute_force_min(&inv)).abs() < 1e-9 * alpha.max(1.0));
            prop_assert!(alpha >= 1.0 - 1e-12);
            prop_assert_eq!(signs[0], 1);
            let red = reducibility(&config);
            prop_assert!((red.dmin_sq - brute_force_min(config.gram())).abs() < 1e-12);
        }

        #[test]
        fn make_tuple_round_trips(k in 2usize..=5, extra in 0usize..10, seed in any::<u64>()) {
            let config = random_config(k, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            let t = make_tuple(&config, k + extra, &mut rng).unwrap();
            let g = gram_matrix(&t).unwrap();
            prop_assert!((g.gram() - config.gram()).amax() < 1e-10);
        }

        #[test]
        fn dual_of_dual_is_identity(k in 2usize..=4, seed in any::<u64>()) {
            let config = random_config(k, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = make_tuple(&config, k, &mut rng).unwrap();
            let dual = dual_basis(&t).unwrap();
            let dual_gram = raw_gram(&dual);
            prop_assert!((dual_gram - config.inverse().unwrap()).amax() < 1e-8);
            // duals are not unit vectors; dualise through the raw Gram matrix
            let inv = raw_gram(&dual).try_inverse().unwrap();
            for i in 0..k {
                for (x, v) in t.vectors()[i].iter().enumerate() {
                    let back: f64 = (0..k).map(|j| inv[(i, j)] * dual[j][x]).sum();
                    prop_assert!((back - v).abs() < 1e-8);
                }
            }
        }
    }
}
