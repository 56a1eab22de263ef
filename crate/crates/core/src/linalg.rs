//! Cholesky factorization for (semi)definite covariance matrices.

use crate::error::{FbmError, Result};

/// Lower-triangular factor `L` with `A = L Lᵀ`, stored row-packed.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    n: usize,
    // Row i occupies packed[i(i+1)/2 .. i(i+1)/2 + i + 1].
    packed: Vec<f64>,
}

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

impl CholeskyFactor {
    /// Factorizes a symmetric row-major `n × n` matrix.
    ///
    /// Pivots within `rel_tol · max_diag` of zero are treated as exact zeros, so
    /// singular PSD matrices (repeated coordinates, a constant zero coordinate)
    /// factorize. A pivot below `−rel_tol · max_diag` is an error.
    pub fn factorize(a: &[f64], n: usize, rel_tol: f64) -> Result<Self> {
        if a.len() != n * n {
            return Err(FbmError::DimensionMismatch(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                a.len()
            )));
        }
        let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
        let eps = rel_tol * scale;
        let mut packed = vec![0.0; row_start(n)];
        for i in 0..n {
            let ri = row_start(i);
            for j in 0..=i {
                let rj = row_start(j);
                let dot: f64 = packed[ri..ri + j]
                    .iter()
                    .zip(&packed[rj..rj + j])
                    .map(|(x, y)| x * y)
                    .sum();
                let s = a[i * n + j] - dot;
                if i == j {
                    if s < -eps {
                        return Err(FbmError::NotPositiveSemidefinite { row: i, pivot: s });
                    }
                    packed[ri + i] = if s <= eps { 0.0 } else { s.sqrt() };
                } else {
                    let d = packed[rj + j];
                    packed[ri + j] = if d == 0.0 { 0.0 } else { s / d };
                }
            }
        }
        Ok(Self { n, packed })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `L[i][j]` for `j ≤ i`, zero above the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.packed[row_start(i) + j]
        }
    }

    /// `out = L z`.
    pub fn mul_vec(&self, z: &[f64], out: &mut [f64]) {
        debug_assert_eq!(z.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for (i, o) in out.iter_mut().enumerate() {
            let r = row_start(i);
            *o = self.packed[r..=r + i]
                .iter()
                .zip(z)
                .map(|(l, x)| l * x)
                .sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(f: &CholeskyFactor) -> Vec<f64> {
        let n = f.dim();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| f.get(i, k) * f.get(j, k)).sum();
            }
        }
        a
    }

    #[test]
    fn factors_definite_matrix() {
        let a = [4.0, 2.0, 0.4, 2.0, 2.0, 0.5, 0.4, 0.5, 3.0];
        let f = CholeskyFactor::factorize(&a, 3, 1e-12).unwrap();
        for (x, y) in reconstruct(&f).iter().zip(&a) {
            assert!((x - y).abs() < 1e-14);
        }
        let mut out = [0.0; 3];
        f.mul_vec(&[1.0, 0.0, 0.0], &mut out);
        assert_eq!(out, [2.0, 1.0, 0.2]);
    }

    #[test]
    fn tolerates_singular_psd() {
        // Two identical coordinates plus a zero coordinate.
        let a = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0];
        let f = CholeskyFactor::factorize(&a, 3, 1e-12).unwrap();
        for (x, y) in reconstruct(&f).iter().zip(&a) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = [1.0, 2.0, 2.0, 1.0];
        match CholeskyFactor::factorize(&a, 2, 1e-12) {
            Err(FbmError::NotPositiveSemidefinite { row: 1, pivot }) => assert!(pivot < 0.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            CholeskyFactor::factorize(&a, 3, 1e-12),
            Err(FbmError::DimensionMismatch(_))
        ));
    }
}
