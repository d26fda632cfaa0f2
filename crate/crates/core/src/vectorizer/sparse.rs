use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A sparse real vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SparseRepr", into = "SparseRepr")]
pub struct SparseVector {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SparseRepr {
    dim: usize,
    entries: Vec<(u32, f64)>,
}

impl TryFrom<SparseRepr> for SparseVector {
    type Error = Error;
    fn try_from(r: SparseRepr) -> Result<Self> {
        SparseVector::new(r.dim, r.entries)
    }
}

impl From<SparseVector> for SparseRepr {
    fn from(v: SparseVector) -> Self {
        SparseRepr {
            dim: v.dim,
            entries: v.iter().collect(),
        }
    }
}

impl SparseVector {
    /// Validates sorted, in-range, finite entries. Explicit zeros are dropped.
    pub fn new(dim: usize, entries: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (i, v) in entries {
            if (i as usize) >= dim {
                return Err(Error::InvalidVector(format!("index {i} out of range for dim {dim}")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidVector(format!("non-finite weight at {i}")));
            }
            if let Some(&last) = indices.last() {
                if i <= last {
                    return Err(Error::InvalidVector("indices not strictly increasing".into()));
                }
            }
            if v != 0.0 {
                indices.push(i);
                values.push(v);
            }
        }
        Ok(SparseVector { dim, indices, values })
    }

    /// Sums duplicate indices and sorts. Panics on out-of-range indices.
    pub fn from_unsorted(dim: usize, mut entries: Vec<(u32, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        let mut indices: Vec<u32> = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            assert!((i as usize) < dim, "index {i} out of range for dim {dim}");
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        let mut out = SparseVector { dim, indices, values };
        out.retain_nonzero();
        out
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, &v)| (i as u32, v));
        SparseVector::new(values.len(), entries).expect("dense input must be finite")
    }

    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    fn retain_nonzero(&mut self) {
        let mut k = 0;
        for j in 0..self.indices.len() {
            if self.values[j] != 0.0 {
                self.indices[k] = self.indices[j];
                self.values[k] = self.values[j];
                k += 1;
            }
        }
        self.indices.truncate(k);
        self.values.truncate(k);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: u32) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(k) => self.values[k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i as usize] = v;
        }
        out
    }

    pub fn check_dim(&self, other: &SparseVector) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        Ok(())
    }

    /// Inner product over the shared support, summed in index order.
    pub fn dot(&self, other: &SparseVector) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let (mut a, mut b) = (0, 0);
        let mut acc = 0.0;
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }

    pub fn try_dot(&self, other: &SparseVector) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self.dot(other))
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, alpha: f64) -> SparseVector {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= alpha;
        }
        out.retain_nonzero();
        out
    }

    /// Scales to unit L2 norm; the zero vector stays zero.
    pub fn normalized(&self) -> SparseVector {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        self.scaled(1.0 / n)
    }

    fn merge(&self, other: &SparseVector, f: impl Fn(f64, f64) -> f64) -> SparseVector {
        debug_assert_eq!(self.dim, other.dim);
        let mut indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        let (mut a, mut b) = (0, 0);
        loop {
            let ia = self.indices.get(a).copied();
            let ib = other.indices.get(b).copied();
            let (i, v) = match (ia, ib) {
                (None, None) => break,
                (Some(i), None) => {
                    a += 1;
                    (i, f(self.values[a - 1], 0.0))
                }
                (None, Some(j)) => {
                    b += 1;
                    (j, f(0.0, other.values[b - 1]))
                }
                (Some(i), Some(j)) if i < j => {
                    a += 1;
                    (i, f(self.values[a - 1], 0.0))
                }
                (Some(i), Some(j)) if j < i => {
                    b += 1;
                    (j, f(0.0, other.values[b - 1]))
                }
                (Some(i), Some(_)) => {
                    a += 1;
                    b += 1;
                    (i, f(self.values[a - 1], other.values[b - 1]))
                }
            };
            if v != 0.0 {
                indices.push(i);
                values.push(v);
            }
        }
        SparseVector {
            dim: self.dim,
            indices,
            values,
        }
    }

    /// `self - other`.
    pub fn sub(&self, other: &SparseVector) -> SparseVector {
        self.merge(other, |x, y| x - y)
    }

    pub fn add(&self, other: &SparseVector) -> SparseVector {
        self.merge(other, |x, y| x + y)
    }

    /// Elementwise `|self - other|`.
    pub fn abs_diff(&self, other: &SparseVector) -> SparseVector {
        self.merge(other, |x, y| (x - y).abs())
    }

    /// Elementwise product.
    pub fn hadamard(&self, other: &SparseVector) -> SparseVector {
        self.merge(other, |x, y| x * y)
    }

    /// `[self, other]` with `other`'s indices shifted by `self.dim()`.
    pub fn concat(&self, other: &SparseVector) -> SparseVector {
        let shift = self.dim as u32;
        let mut indices = self.indices.clone();
        indices.extend(other.indices.iter().map(|i| i + shift));
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        SparseVector {
            dim: self.dim + other.dim,
            indices,
            values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_malformed_entries() {
        assert!(SparseVector::new(2, [(1, 1.0), (0, 1.0)]).is_err());
        assert!(SparseVector::new(2, [(2, 1.0)]).is_err());
        assert!(SparseVector::new(2, [(0, f64::NAN)]).is_err());
        assert_eq!(SparseVector::new(3, [(0, 0.0), (2, 1.0)]).unwrap().nnz(), 1);
    }

    #[test]
    fn elementwise_ops() {
        let u = SparseVector::from_dense(&[1.0, 0.0, 2.0]);
        let v = SparseVector::from_dense(&[0.0, 3.0, 2.0]);
        assert_eq!(u.sub(&v).to_dense(), [1.0, -3.0, 0.0]);
        assert_eq!(u.sub(&v).nnz(), 2);
        assert_eq!(u.abs_diff(&v).to_dense(), [1.0, 3.0, 0.0]);
        assert_eq!(u.hadamard(&v).to_dense(), [0.0, 0.0, 4.0]);
        assert_eq!(u.concat(&v).to_dense(), [1.0, 0.0, 2.0, 0.0, 3.0, 2.0]);
        assert_eq!(u.dot(&v), 4.0);
    }

    #[test]
    fn json_roundtrip_validates() {
        let u = SparseVector::from_dense(&[0.5, 0.0, -1.5]);
        let json = serde_json::to_string(&u).unwrap();
        assert_eq!(serde_json::from_str::<SparseVector>(&json).unwrap(), u);
        assert!(serde_json::from_str::<SparseVector>(r#"{"dim":1,"entries":[[3,1.0]]}"#).is_err());
    }

    proptest! {
        #[test]
        fn sparse_matches_dense(a in proptest::collection::vec(-3i32..3, 1..12), seed in 0u64..1000) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = a.iter().enumerate().map(|(i, x)| ((i as u64 * 7 + seed) % 5) as f64 - 2.0 - x).collect();
            let (sa, sb) = (SparseVector::from_dense(&a), SparseVector::from_dense(&b));
            let dense_dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            prop_assert_eq!(sa.dot(&sb), dense_dot);
            let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            prop_assert_eq!(sa.sub(&sb).to_dense(), diff);
        }
    }
}
