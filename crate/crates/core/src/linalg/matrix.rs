//! Matrices over Λ = ℤ/nℤ with three interchangeable storage layouts.
//!
//! Coboundary matrices have at most degree+2 nonzeros per row, so sparse
//! rows are the default below a 25% fill threshold; n = 2 matrices are
//! always bit-packed. Every operation must produce identical results across
//! layouts; the test suite checks this on random matrices.

use serde::{Deserialize, Serialize};

use super::residue::{add_mod, mul_mod};
use crate::error::{Error, Result};

/// Fill ratio above which a matrix is stored densely.
const DENSE_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Repr {
    Dense,
    Sparse,
    Packed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Store {
    Dense(Vec<u64>),
    Sparse(Vec<Vec<(u32, u64)>>),
    /// One bit per entry, row-major, for n = 2.
    Packed { words_per_row: usize, words: Vec<u64> },
}

#[derive(Debug, Clone)]
pub struct LambdaMatrix {
    n: u64,
    rows: usize,
    cols: usize,
    store: Store,
}

impl PartialEq for LambdaMatrix {
    fn eq(&self, other: &Self) -> bool {
        if self.n != other.n || self.rows != other.rows || self.cols != other.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) != other.get(i, j) {
                    return false;
                }
            }
        }
        true
    }
}
impl Eq for LambdaMatrix {}

impl LambdaMatrix {
    pub fn from_rows(n: u64, cols: usize, rows: &[Vec<u64>]) -> Self {
        assert!(n >= 2, "modulus must be at least 2");
        for r in rows {
            assert_eq!(r.len(), cols, "row length mismatch");
        }
        let nnz: usize = rows
            .iter()
            .map(|r| r.iter().filter(|&&v| v % n != 0).count())
            .sum();
        let total = rows.len().max(1) * cols.max(1);
        let repr = if n == 2 {
            Repr::Packed
        } else if (nnz as f64) / (total as f64) > DENSE_THRESHOLD {
            Repr::Dense
        } else {
            Repr::Sparse
        };
        Self::from_rows_with_repr(n, cols, rows, repr)
    }

    pub fn from_rows_with_repr(n: u64, cols: usize, rows: &[Vec<u64>], repr: Repr) -> Self {
        assert!(n >= 2);
        let nrows = rows.len();
        let store = match repr {
            Repr::Dense => {
                let mut data = Vec::with_capacity(nrows * cols);
                for r in rows {
                    for &v in r {
                        data.push(v % n);
                    }
                }
                Store::Dense(data)
            }
            Repr::Sparse => {
                let mut data = Vec::with_capacity(nrows);
                for r in rows {
                    let mut row = Vec::new();
                    for (j, &v) in r.iter().enumerate() {
                        if v % n != 0 {
                            row.push((j as u32, v % n));
                        }
                    }
                    data.push(row);
                }
                Store::Sparse(data)
            }
            Repr::Packed => {
                assert_eq!(n, 2, "packed layout requires n = 2");
                let wpr = cols.div_ceil(64);
                let mut words = vec![0u64; nrows * wpr];
                for (i, r) in rows.iter().enumerate() {
                    for (j, &v) in r.iter().enumerate() {
                        if v % 2 == 1 {
                            words[i * wpr + j / 64] |= 1u64 << (j % 64);
                        }
                    }
                }
                Store::Packed {
                    words_per_row: wpr,
                    words,
                }
            }
        };
        LambdaMatrix {
            n,
            rows: nrows,
            cols,
            store,
        }
    }

    pub fn zeros(n: u64, rows: usize, cols: usize) -> Self {
        Self::from_rows(n, cols, &vec![vec![0; cols]; rows])
    }

    pub fn identity(n: u64, k: usize) -> Self {
        let mut rows = vec![vec![0u64; k]; k];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1;
        }
        Self::from_rows(n, k, &rows)
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn repr(&self) -> Repr {
        match self.store {
            Store::Dense(_) => Repr::Dense,
            Store::Sparse(_) => Repr::Sparse,
            Store::Packed { .. } => Repr::Packed,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        debug_assert!(i < self.rows && j < self.cols);
        match &self.store {
            Store::Dense(d) => d[i * self.cols + j],
            Store::Sparse(s) => s[i]
                .binary_search_by_key(&(j as u32), |&(c, _)| c)
                .map(|k| s[i][k].1)
                .unwrap_or(0),
            Store::Packed {
                words_per_row,
                words,
            } => (words[i * words_per_row + j / 64] >> (j % 64)) & 1,
        }
    }

    pub fn row(&self, i: usize) -> Vec<u64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn to_row_vecs(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn with_repr(&self, repr: Repr) -> Self {
        Self::from_rows_with_repr(self.n, self.cols, &self.to_row_vecs(), repr)
    }

    pub fn transpose(&self) -> Self {
        let rows: Vec<Vec<u64>> = (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).collect())
            .collect();
        Self::from_rows(self.n, self.rows, &rows)
    }

    pub fn is_zero(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j) == 0))
    }

    /// Matrix product; both factors must share the modulus.
    pub fn mul(&self, other: &LambdaMatrix) -> Result<LambdaMatrix> {
        if self.n != other.n {
            return Err(Error::invalid(format!(
                "matrix product: modulus mismatch {} vs {}",
                self.n, other.n
            )));
        }
        if self.cols != other.rows {
            return Err(Error::invalid(format!(
                "matrix product: shape mismatch {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = vec![vec![0u64; other.cols]; self.rows];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for (j, o) in out[i].iter_mut().enumerate() {
                    *o = add_mod(*o, mul_mod(a, other.get(k, j), self.n), self.n);
                }
            }
        }
        Ok(LambdaMatrix::from_rows(self.n, other.cols, &out))
    }

    /// Apply to a column vector.
    pub fn apply(&self, x: &[u64]) -> Result<Vec<u64>> {
        if x.len() != self.cols {
            return Err(Error::invalid(format!(
                "apply: vector length {} does not match {} columns",
                x.len(),
                self.cols
            )));
        }
        let mut out = vec![0u64; self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0u64;
            for j in 0..self.cols {
                acc = add_mod(acc, mul_mod(self.get(i, j), x[j] % self.n, self.n), self.n);
            }
            *o = acc;
        }
        Ok(out)
    }

    pub fn vstack(&self, other: &LambdaMatrix) -> Result<LambdaMatrix> {
        if self.n != other.n || self.cols != other.cols {
            return Err(Error::invalid("vstack: incompatible shapes"));
        }
        let mut rows = self.to_row_vecs();
        rows.extend(other.to_row_vecs());
        Ok(LambdaMatrix::from_rows(self.n, self.cols, &rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repr_selection() {
        let m = LambdaMatrix::from_rows(2, 3, &[vec![1, 0, 1]]);
        assert_eq!(m.repr(), Repr::Packed);
        let sparse = LambdaMatrix::from_rows(4, 8, &[vec![0, 0, 0, 0, 0, 0, 0, 1]]);
        assert_eq!(sparse.repr(), Repr::Sparse);
        let dense = LambdaMatrix::from_rows(4, 2, &[vec![1, 2], vec![3, 1]]);
        assert_eq!(dense.repr(), Repr::Dense);
    }

    #[test]
    fn get_agrees_across_reprs() {
        let rows = vec![vec![0u64, 3, 1, 0], vec![2, 0, 0, 1]];
        let a = LambdaMatrix::from_rows_with_repr(4, 4, &rows, Repr::Dense);
        let b = LambdaMatrix::from_rows_with_repr(4, 4, &rows, Repr::Sparse);
        assert_eq!(a, b);
        let r2 = vec![vec![1u64, 0, 1], vec![0, 1, 1]];
        let p = LambdaMatrix::from_rows_with_repr(2, 3, &r2, Repr::Packed);
        let d = LambdaMatrix::from_rows_with_repr(2, 3, &r2, Repr::Dense);
        assert_eq!(p, d);
    }

    #[test]
    fn product_and_apply() {
        let a = LambdaMatrix::from_rows(6, 2, &[vec![1, 2], vec![3, 4]]);
        let b = LambdaMatrix::from_rows(6, 2, &[vec![5, 0], vec![1, 1]]);
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab.row(0), vec![1, 2]); // [5+2, 2] mod 6
        assert_eq!(ab.row(1), vec![1, 4]); // [15+4, 4] mod 6
        assert_eq!(a.apply(&[1, 1]).unwrap(), vec![3, 1]);
    }
}
