use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted `(index, value)` pairs over a fixed feature space.
///
/// Indices are strictly increasing and values are nonzero. Vectors produced
/// by [`crate::TfidfModel::transform`] additionally have unit Euclidean norm.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a vector from parallel arrays, checking the ordering and
    /// nonzero invariants.
    pub fn new(indices: Vec<u32>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::LengthMismatch(format!(
                "{} indices vs {} values",
                indices.len(),
                values.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "sparse indices must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "sparse values must be finite and nonzero".into(),
            ));
        }
        Ok(Self { indices, values })
    }

    /// Builds from unsorted pairs; duplicate indices are summed and zeros dropped.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        let (indices, values) = indices
            .into_iter()
            .zip(values)
            .filter(|&(_, v)| v != 0.0)
            .unzip();
        Self { indices, values }
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<u32>, values: Vec<f64>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices, values }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| (i as usize, v))
    }

    /// One past the largest index, or 0 for the empty vector.
    pub fn min_dimension(&self) -> usize {
        self.indices.last().map_or(0, |&i| i as usize + 1)
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.squared_norm().sqrt()
    }

    /// Dot product with a dense vector, summed in increasing index order.
    ///
    /// Panics if an index is out of range; callers validate dimensions first.
    #[inline]
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            acc += dense[i as usize] * v;
        }
        acc
    }

    /// `dense += scale * self`
    #[inline]
    pub fn axpy_into(&self, scale: f64, dense: &mut [f64]) {
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            dense[i as usize] += scale * v;
        }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }

    pub fn check_dimension(&self, dim: usize) -> Result<()> {
        match self.indices.last() {
            Some(&i) if i as usize >= dim => Err(Error::DimensionMismatch {
                index: i as usize,
                dim,
            }),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_and_zero() {
        assert!(SparseVector::new(vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseVector::new(vec![1, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseVector::new(vec![1], vec![0.0]).is_err());
        assert!(SparseVector::new(vec![1], vec![]).is_err());
    }

    #[test]
    fn from_pairs_merges_duplicates() {
        let v = SparseVector::from_pairs(vec![(3, 1.0), (1, 2.0), (3, -1.0), (0, 0.5)]);
        assert_eq!(v.indices(), &[0, 1]);
        assert_eq!(v.values(), &[0.5, 2.0]);
    }

    #[test]
    fn dense_ops() {
        let v = SparseVector::new(vec![0, 2], vec![3.0, 4.0]).unwrap();
        assert_eq!(v.norm(), 5.0);
        assert_eq!(v.dot_dense(&[1.0, 10.0, 2.0]), 11.0);
        let mut d = vec![0.0; 3];
        v.axpy_into(2.0, &mut d);
        assert_eq!(d, vec![6.0, 0.0, 8.0]);
        assert!(v.check_dimension(3).is_ok());
        assert!(v.check_dimension(2).is_err());
    }
}
