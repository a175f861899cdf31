//! Minimal real matrix containers used throughout the crate.
//!
//! Inertial states are small (`2^N x 2^N`, N <= 5 in practice) and are kept
//! dense. Accelerated states live in a large (bitstring x Fock) basis but are
//! extremely sparse, so they are stored as the upper triangle of a symmetric
//! matrix, which makes exact symmetry a structural property.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from row slices; all rows must have length `rows.len()`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::Validation(format!(
                    "matrix is not square: row of length {} in {n}x{n} matrix",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    /// Projector `|v><v|`.
    pub fn outer(v: &[f64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = v[i] * v[j];
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Elementwise `self + other`. Panics on dimension mismatch.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Real symmetric matrix stored as its upper triangle (diagonal included).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseSymMatrix {
    dim: usize,
    rows: Vec<BTreeMap<usize, f64>>,
}

impl SparseSymMatrix {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            rows: vec![BTreeMap::new(); dim],
        }
    }

    /// Takes every exactly-nonzero entry of the upper triangle of `m`.
    ///
    /// The lower triangle is ignored, so `m` is assumed symmetric.
    pub fn from_dense_upper(m: &DenseMatrix) -> Self {
        let mut s = Self::new(m.dim());
        for i in 0..m.dim() {
            for j in i..m.dim() {
                let v = m.get(i, j);
                if v != 0.0 {
                    s.rows[i].insert(j, v);
                }
            }
        }
        s
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `value` to entry `(i, j)` (and therefore to `(j, i)`).
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        *self.rows[a].entry(b).or_insert(0.0) += value;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.rows[a].get(&b).copied().unwrap_or(0.0)
    }

    /// Upper-triangle entries `(i, j, value)` with `i <= j`, in row-major order.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(&j, &v)| (i, j, v)))
    }

    pub fn nnz_upper(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(i, row)| row.get(&i))
            .sum()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.dim);
        for (i, j, v) in self.upper_entries() {
            m.set(i, j, v);
            m.set(j, i, v);
        }
        m
    }

    /// Dense principal submatrix on the given (ordered) index set.
    pub fn submatrix(&self, indices: &[usize]) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(indices.len());
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate().skip(a) {
                let v = self.get(i, j);
                m.set(a, b, v);
                m.set(b, a, v);
            }
        }
        m
    }

    /// `alpha * self + beta * other`. Panics on dimension mismatch.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = Self::new(self.dim);
        for (i, j, v) in self.upper_entries() {
            out.add(i, j, alpha * v);
        }
        for (i, j, v) in other.upper_entries() {
            out.add(i, j, beta * v);
        }
        out
    }
}
