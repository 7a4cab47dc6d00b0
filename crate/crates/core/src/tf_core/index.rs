use std::collections::{HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::C64;

/// A time-frequency point `λ = (k, l) ∈ Z_n × Z_n`; `k` shifts time, `l` frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TFIndex {
    pub k: usize,
    pub l: usize,
}

impl TFIndex {
    pub fn new(k: usize, l: usize, n: usize) -> Self {
        assert!(n > 0, "TFIndex needs n >= 1");
        Self { k: k % n, l: l % n }
    }

    /// Column of `Ψ_g` holding `π(λ)g`.
    pub fn column(self, n: usize) -> usize {
        self.k * n + self.l
    }

    pub fn from_column(column: usize, n: usize) -> Self {
        Self {
            k: column / n,
            l: column % n,
        }
    }
}

impl std::fmt::Display for TFIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.k, self.l)
    }
}

/// An ordered set `Λ` of distinct time-frequency points. The order fixes the
/// row/column order of Gram submatrices and of coefficient vectors on `Λ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSet {
    indices: Vec<TFIndex>,
    n: usize,
}

impl SupportSet {
    pub fn new(indices: Vec<TFIndex>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("dimension n must be >= 1".into()));
        }
        let indices: Vec<TFIndex> = indices
            .into_iter()
            .map(|i| TFIndex::new(i.k, i.l, n))
            .collect();
        let mut seen = HashSet::with_capacity(indices.len());
        for idx in &indices {
            if !seen.insert(*idx) {
                return Err(Error::InvalidInput(format!("duplicate index {idx} in support")));
            }
        }
        Ok(Self { indices, n })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            indices: Vec::new(),
            n,
        }
    }

    pub fn from_columns(columns: &[usize], n: usize) -> Result<Self> {
        if let Some(&c) = columns.iter().find(|&&c| c >= n * n) {
            return Err(Error::InvalidInput(format!("column {c} out of range for n = {n}")));
        }
        Self::new(columns.iter().map(|&c| TFIndex::from_column(c, n)).collect(), n)
    }

    /// Uniform random subset of size `s` drawn without replacement by a
    /// partial Fisher-Yates shuffle of the `n²` columns. Swapped positions are
    /// tracked sparsely, so memory is `O(s)`.
    pub fn random<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> Result<Self> {
        let total = n * n;
        if s > total {
            return Err(Error::Domain(format!("support size {s} exceeds n² = {total}")));
        }
        let mut swapped: HashMap<usize, usize> = HashMap::with_capacity(2 * s);
        let mut columns = Vec::with_capacity(s);
        for i in 0..s {
            let j = rng.random_range(i..total);
            let at_j = *swapped.get(&j).unwrap_or(&j);
            let at_i = *swapped.get(&i).unwrap_or(&i);
            swapped.insert(j, at_i);
            columns.push(at_j);
        }
        Self::from_columns(&columns, n)
    }

    pub fn indices(&self) -> &[TFIndex] {
        &self.indices
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, idx: TFIndex) -> bool {
        self.indices.contains(&idx)
    }

    pub fn columns(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i.column(self.n)).collect()
    }

    /// `R_Λ x`: gather the entries of a full coefficient vector.
    pub fn restrict(&self, full: &[C64]) -> Result<Vec<C64>> {
        check_len(self.n * self.n, full.len())?;
        Ok(self.indices.iter().map(|i| full[i.column(self.n)]).collect())
    }

    /// `E_Λ v`: scatter values on `Λ` into a zero vector of length `n²`.
    pub fn extend(&self, values: &[C64]) -> Result<Vec<C64>> {
        check_len(self.len(), values.len())?;
        let mut full = vec![C64::default(); self.n * self.n];
        for (i, v) in self.indices.iter().zip(values) {
            full[i.column(self.n)] = *v;
        }
        Ok(full)
    }
}

/// A sparse coefficient vector on `Z_n × Z_n`. Stored values are all nonzero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseCoeffs {
    support: SupportSet,
    values: Vec<C64>,
}

impl SparseCoeffs {
    /// Builds the vector, dropping entries that are exactly zero.
    pub fn new(support: SupportSet, values: Vec<C64>) -> Result<Self> {
        check_len(support.len(), values.len())?;
        let n = support.n();
        let (idx, vals): (Vec<_>, Vec<_>) = support
            .indices
            .into_iter()
            .zip(values)
            .filter(|(_, v)| *v != C64::default())
            .unzip();
        Ok(Self {
            support: SupportSet { indices: idx, n },
            values: vals,
        })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            support: SupportSet::empty(n),
            values: Vec::new(),
        }
    }

    /// Keeps the entries of `full` with modulus strictly above `threshold`, in column order.
    pub fn from_dense(full: &[C64], n: usize, threshold: f64) -> Result<Self> {
        check_len(n * n, full.len())?;
        let (cols, vals): (Vec<usize>, Vec<C64>) = full
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm() > threshold)
            .map(|(c, v)| (c, *v))
            .unzip();
        Self::new(SupportSet::from_columns(&cols, n)?, vals)
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.support.n()
    }

    /// `‖x‖₀`.
    pub fn sparsity(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self) -> Vec<C64> {
        self.support
            .extend(&self.values)
            .expect("support and values are aligned")
    }

    /// `sgn(x)` on the support: `x_λ / |x_λ|`.
    pub fn signs(&self) -> Vec<C64> {
        self.values.iter().map(|v| v / v.norm()).collect()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::new(
            self.support.clone(),
            self.values.iter().map(|v| v * c).collect(),
        )
        .expect("aligned")
    }
}

/// `sgn(x)` of a full vector: `x_k/|x_k|` where nonzero, 0 elsewhere.
pub fn sign_vector(x: &[C64]) -> Vec<C64> {
    x.iter()
        .map(|v| {
            let r = v.norm();
            if r > 0.0 {
                v / r
            } else {
                C64::default()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn index_reduces_mod_n() {
        let i = TFIndex::new(7, 9, 4);
        assert_eq!(i, TFIndex { k: 3, l: 1 });
        assert_eq!(i.column(4), 13);
        assert_eq!(TFIndex::from_column(13, 4), i);
    }

    #[test]
    fn duplicates_are_rejected() {
        let r = SupportSet::new(vec![TFIndex::new(1, 1, 4), TFIndex::new(5, 1, 4)], 4);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn random_support_is_distinct_and_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        let s1 = SupportSet::random(8, 20, &mut a).unwrap();
        let s2 = SupportSet::random(8, 20, &mut b).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.len(), 20);
        let full = SupportSet::random(3, 9, &mut a).unwrap();
        let mut cols = full.columns();
        cols.sort();
        assert_eq!(cols, (0..9).collect::<Vec<_>>());
        assert!(SupportSet::random(3, 10, &mut a).is_err());
    }

    #[test]
    fn random_support_is_roughly_uniform() {
        // every column of a 2x2 grid should be picked about half the time at s = 2
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 4];
        for _ in 0..4000 {
            for c in SupportSet::random(2, 2, &mut rng).unwrap().columns() {
                counts[c] += 1;
            }
        }
        for c in counts {
            assert!((1850..2150).contains(&c), "{counts:?}");
        }
    }

    #[test]
    fn sparse_coeffs_drop_zeros() {
        let sup = SupportSet::from_columns(&[0, 5, 9], 4).unwrap();
        let x = SparseCoeffs::new(
            sup,
            vec![C64::new(1.0, 0.0), C64::default(), C64::new(0.0, -2.0)],
        )
        .unwrap();
        assert_eq!(x.sparsity(), 2);
        assert_eq!(x.support().columns(), vec![0, 9]);
        let dense = x.to_dense();
        assert_eq!(dense.len(), 16);
        assert_eq!(dense[9], C64::new(0.0, -2.0));
        assert_eq!(x.signs(), vec![C64::new(1.0, 0.0), C64::new(0.0, -1.0)]);
    }

    #[test]
    fn sign_vector_moduli() {
        let s = sign_vector(&[C64::new(3.0, 4.0), C64::default(), C64::new(-2.0, 0.0)]);
        let mods: Vec<f64> = s.iter().map(|z| z.norm()).collect();
        assert_eq!(mods[1], 0.0);
        assert!((mods[0] - 1.0).abs() < 1e-15 && (mods[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn restrict_and_extend_are_adjoint() {
        let sup = SupportSet::from_columns(&[2, 7], 3).unwrap();
        let v = vec![C64::new(1.0, 1.0), C64::new(2.0, 0.0)];
        assert_eq!(sup.restrict(&sup.extend(&v).unwrap()).unwrap(), v);
        assert!(sup.restrict(&[C64::default(); 4]).is_err());
    }
}
