//! Dense row-major `f32` linear algebra.
//!
//! Accumulation always runs left to right over the shared dimension, so every
//! result is reproducible bit for bit on a given platform.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "matrix",
                expected: rows * cols,
                found: data.len(),
            });
        }
        check_finite("matrix", &data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    op: "matrix rows",
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[f32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f32 {
        self.data[r * self.cols + c]
    }

    /// Panics if `value` is not finite or the index is out of bounds.
    pub fn set(&mut self, r: usize, c: usize, value: f32) {
        assert!(value.is_finite(), "matrix entries must be finite");
        assert!(r < self.rows && c < self.cols, "matrix index out of bounds");
        self.data[r * self.cols + c] = value;
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            op: "matmul",
            expected: a.cols,
            found: b.rows,
        });
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for r in 0..a.rows {
        let dst = &mut out.data[r * b.cols..(r + 1) * b.cols];
        for (k, &x) in a.row(r).iter().enumerate() {
            for (o, &y) in dst.iter_mut().zip(b.row(k)) {
                *o += x * y;
            }
        }
    }
    check_finite("matmul", &out.data)?;
    Ok(out)
}

/// Row vector times matrix, same accumulation order as [`matmul`].
pub fn vec_mat(v: &[f32], m: &Matrix) -> Result<Vec<f32>> {
    if v.len() != m.rows {
        return Err(Error::DimensionMismatch {
            op: "vec_mat",
            expected: m.rows,
            found: v.len(),
        });
    }
    check_finite("vec_mat", v)?;
    let mut out = vec![0.0f32; m.cols];
    for (k, &x) in v.iter().enumerate() {
        for (o, &y) in out.iter_mut().zip(m.row(k)) {
            *o += x * y;
        }
    }
    check_finite("vec_mat", &out)?;
    Ok(out)
}

pub fn dot(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// In-place `a += b`.
pub fn add_assign(a: &mut [f32], b: &[f32]) {
    debug_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

pub fn check_finite(op: &'static str, values: &[f32]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(op))
    }
}

/// One entry of an additive attention mask: 0 when allowed, −∞ when blocked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskEntry {
    Allowed,
    Blocked,
}

impl MaskEntry {
    pub fn is_allowed(self) -> bool {
        self == MaskEntry::Allowed
    }

    /// The additive value applied to a score before exponentiation.
    pub fn additive(self) -> f32 {
        match self {
            MaskEntry::Allowed => 0.0,
            MaskEntry::Blocked => f32::NEG_INFINITY,
        }
    }
}

impl From<bool> for MaskEntry {
    fn from(allowed: bool) -> Self {
        if allowed {
            MaskEntry::Allowed
        } else {
            MaskEntry::Blocked
        }
    }
}

/// Softmax of `scores + mask`. Blocked outputs are exactly zero.
///
/// The normalising sum is accumulated in `f64` so the allowed weights sum to
/// one within a few `f32` ulps regardless of row length.
pub fn masked_softmax(scores: &[f32], mask: &[MaskEntry]) -> Result<Vec<f32>> {
    if scores.len() != mask.len() {
        return Err(Error::DimensionMismatch {
            op: "masked_softmax",
            expected: scores.len(),
            found: mask.len(),
        });
    }
    check_finite("masked_softmax", scores)?;
    let max = scores
        .iter()
        .zip(mask)
        .filter(|(_, m)| m.is_allowed())
        .map(|(&s, _)| s)
        .fold(f32::NEG_INFINITY, f32::max);
    if max == f32::NEG_INFINITY {
        return Err(Error::AllBlocked);
    }

    let exps: Vec<f64> = scores
        .iter()
        .zip(mask)
        .map(|(&s, m)| {
            let shifted = s + m.additive() - max;
            if shifted == f32::NEG_INFINITY {
                0.0
            } else {
                libm::exp(shifted as f64)
            }
        })
        .collect();
    let total: f64 = exps.iter().sum();
    Ok(exps
        .iter()
        .zip(mask)
        .map(|(&e, m)| if m.is_allowed() { (e / total) as f32 } else { 0.0 })
        .collect())
}

/// Unmasked softmax over a whole row.
pub fn softmax(scores: &[f32]) -> Result<Vec<f32>> {
    let mask = vec![MaskEntry::Allowed; scores.len()];
    masked_softmax(scores, &mask)
}
