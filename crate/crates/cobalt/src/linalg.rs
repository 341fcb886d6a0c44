//! Minimal dense linear algebra for GP inference.
//!
//! Hand-rolled so the Cholesky factor can be extended one row at a time (the
//! surrogate appends one observation per iteration) and so the jitter
//! escalation policy is explicit and testable.

use crate::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(&row);
        }
        Matrix { rows: r, cols: c, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn mean_diag(&self) -> f64 {
        let n = self.rows.min(self.cols);
        if n == 0 {
            return 0.0;
        }
        (0..n).map(|i| self.get(i, i)).sum::<f64>() / n as f64
    }
}

/// Relative jitter escalation: none, then `1e-10 * mean(diag)` growing by
/// factors of ten up to `1e-4 * mean(diag)`.
const JITTER_START_REL: f64 = 1e-10;
const JITTER_MAX_REL: f64 = 1e-4;

/// Lower-triangular Cholesky factor, stored as ragged rows so it can grow.
#[derive(Debug, Clone, Default)]
pub struct CholeskyFactor {
    rows: Vec<Vec<f64>>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// Factor a symmetric positive (semi-)definite matrix. Tries no jitter
    /// first, then escalates. Returns the factor and the jitter that was
    /// actually added to the diagonal.
    pub fn factor(a: &Matrix, function: &str) -> Result<(Self, f64)> {
        assert_eq!(a.nrows(), a.ncols(), "cholesky needs a square matrix");
        let scale = a.mean_diag().abs();
        let mut jitter = 0.0;
        loop {
            match Self::try_factor(a, jitter) {
                Some(l) => return Ok((l, jitter)),
                None => {
                    jitter = if jitter == 0.0 {
                        JITTER_START_REL * scale
                    } else {
                        jitter * 10.0
                    };
                    if scale == 0.0 || jitter > JITTER_MAX_REL * scale {
                        return Err(Error::Degeneracy {
                            function: function.to_string(),
                            detail: format!(
                                "factorization failed after jitter escalation to {jitter:.3e} \
                                 (mean diagonal {scale:.3e})"
                            ),
                        });
                    }
                }
            }
        }
    }

    fn try_factor(a: &Matrix, jitter: f64) -> Option<Self> {
        let n = a.nrows();
        let mut l = CholeskyFactor { rows: Vec::with_capacity(n) };
        for i in 0..n {
            let mut row = vec![0.0; i + 1];
            for j in 0..i {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= row[k] * l.rows[j][k];
                }
                row[j] = s / l.rows[j][j];
            }
            let mut s = a.get(i, i) + jitter;
            for k in 0..i {
                s -= row[k] * row[k];
            }
            if s <= 0.0 || !s.is_finite() {
                return None;
            }
            row[i] = s.sqrt();
            l.rows.push(row);
        }
        Some(l)
    }

    /// Append one row/column to the factored matrix: `cross[i] = a(new, i)`
    /// for existing indices and `diag = a(new, new)`. Fails (without
    /// modifying `self`) when the extended matrix is not positive definite.
    pub fn extend(&mut self, cross: &[f64], diag: f64, function: &str) -> Result<()> {
        assert_eq!(cross.len(), self.dim(), "cross length must match dimension");
        let mut row = Vec::with_capacity(self.dim() + 1);
        for j in 0..self.dim() {
            let mut s = cross[j];
            for k in 0..j {
                s -= row[k] * self.rows[j][k];
            }
            row.push(s / self.rows[j][j]);
        }
        let pivot = diag - row.iter().map(|v| v * v).sum::<f64>();
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(Error::Degeneracy {
                function: function.to_string(),
                detail: format!("non-positive pivot {pivot:.3e} on rank-one extension"),
            });
        }
        row.push(pivot.sqrt());
        self.rows.push(row);
        Ok(())
    }

    /// Append a row whose forward-substituted prefix `l12 = L^{-1} c` is
    /// already known, together with the new pivot. Used by the incremental
    /// surrogate, which maintains `L^{-1}`-projected columns anyway.
    pub(crate) fn push_row(&mut self, mut l12: Vec<f64>, pivot_sqrt: f64) {
        debug_assert_eq!(l12.len(), self.dim());
        l12.push(pivot_sqrt);
        self.rows.push(l12);
    }

    /// Solve `L x = b` (forward substitution).
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.rows[i][k] * x[k];
            }
            x[i] = s / self.rows[i][i];
        }
        x
    }

    /// Solve `L^T x = b` (backward substitution).
    pub fn solve_upper(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            x[i] /= self.rows[i][i];
            for k in 0..i {
                x[k] -= self.rows[i][k] * x[i];
            }
        }
        x
    }

    /// Solve `(L L^T) x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `log det(L L^T) = 2 * sum(log diag(L))`.
    pub fn log_det(&self) -> f64 {
        2.0 * self.rows.iter().enumerate().map(|(i, r)| r[i].ln()).sum::<f64>()
    }

    /// Multiply `L v` (used when sampling from a prior).
    pub fn mul_lower(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for k in 0..=i {
                    s += self.rows[i][k] * v[k];
                }
                s
            })
            .collect()
    }
}
