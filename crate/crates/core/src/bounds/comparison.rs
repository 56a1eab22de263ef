//! Comparison of expected maxima of Gaussian vectors through their pairwise
//! increment variances `d_ij = E(Z_i − Z_j)²`.

use crate::error::{FbmError, Result};
use crate::process::HurstParam;

const SYMMETRY_TOL: f64 = 1e-12;

/// Pairwise increment variances of a centred Gaussian vector of length `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementTable {
    n: usize,
    d: Vec<f64>,
}

impl IncrementTable {
    /// Validates a row-major `N × N` table: symmetric, zero diagonal, nonnegative.
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * n {
            return Err(FbmError::DimensionMismatch(format!(
                "table for N = {n} needs {} entries, got {}",
                n * n,
                d.len()
            )));
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(FbmError::Precondition(format!("d[{i}][{i}] = {} is not zero", d[i * n + i])));
            }
            for j in 0..i {
                let (a, b) = (d[i * n + j], d[j * n + i]);
                if !(a >= 0.0 && b >= 0.0) {
                    return Err(FbmError::Precondition(format!("d[{i}][{j}] is negative or NaN")));
                }
                if (a - b).abs() > SYMMETRY_TOL * a.max(b) {
                    return Err(FbmError::Precondition(format!("table is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, d })
    }

    /// Builds a table from `d(i, j)` for `i < j` (zero-based).
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Self { n, d }
    }

    /// All coordinates equal: `d ≡ 0`.
    pub fn zero(n: usize) -> Self {
        Self { n, d: vec![0.0; n * n] }
    }

    /// fBm on the grid `i/N`, `i = 1..N`: `d_ij = (|i − j|/N)^{2H}`.
    pub fn fbm_grid(h: HurstParam, n: usize) -> Self {
        let nf = n as f64;
        Self::from_fn(n, |i, j| ((j - i) as f64 / nf).powf(h.two_h()))
    }

    /// The coarse vector `Y_i = B(⌈i/m⌉/n)`, `i = 1..nm`, aligned with the fine grid of size `nm`.
    pub fn fbm_coarsened(h: HurstParam, n: usize, m: usize) -> Self {
        let nf = n as f64;
        // Zero-based index i is the one-based i + 1, whose block is ⌈(i+1)/m⌉ = i/m + 1.
        Self::from_fn(n * m, |i, j| ((j / m - i / m) as f64 / nf).powf(h.two_h()))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    /// Covariance of `(Z_i − Z_0)_i`, which has the same expected maximum as `Z`
    /// for any centred `Z` with these increment variances:
    /// `G_ij = ½(d_0i + d_0j − d_ij)`.
    pub fn anchored_gram(&self) -> Vec<f64> {
        let n = self.n;
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = 0.5 * (self.get(0, i) + self.get(0, j) - self.get(i, j));
            }
        }
        g
    }
}

/// `γ = max_{i<j} |dX_ij − dY_ij|`.
pub fn max_discrepancy(dx: &IncrementTable, dy: &IncrementTable) -> Result<f64> {
    if dx.n != dy.n {
        return Err(FbmError::DimensionMismatch(format!(
            "tables have dimensions {} and {}",
            dx.n, dy.n
        )));
    }
    let n = dx.n;
    let mut gamma: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            gamma = gamma.max((dx.get(i, j) - dy.get(i, j)).abs());
        }
    }
    Ok(gamma)
}

/// `|E max X − E max Y| ≤ (γ ln N)^{1/2}` for centred Gaussian vectors.
pub fn chatterjee_bound(dx: &IncrementTable, dy: &IncrementTable) -> Result<f64> {
    let gamma = max_discrepancy(dx, dy)?;
    Ok((gamma * (dx.n as f64).ln()).sqrt())
}

/// `n^{-2H}(1 − 1/m)^{2H}`: bound on `γ` between the grid of size `nm` and its
/// `m`-fold coarsening. At refinement level `k` multiply by `m^{-2Hk}`.
pub fn gamma_k_bound(h: HurstParam, n: u64, m: u64) -> f64 {
    let a = h.two_h();
    (n as f64).powf(-a) * (1.0 - 1.0 / m as f64).powf(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(h: f64) -> HurstParam {
        HurstParam::new(h).unwrap()
    }

    #[test]
    fn identical_tables_and_single_coordinate() {
        let t = IncrementTable::fbm_grid(hp(0.3), 6);
        assert_eq!(chatterjee_bound(&t, &t).unwrap(), 0.0);
        let one = IncrementTable::zero(1);
        assert_eq!(chatterjee_bound(&one, &one).unwrap(), 0.0);
        assert!(chatterjee_bound(&t, &IncrementTable::zero(5)).is_err());
    }

    #[test]
    fn two_point_example() {
        let dx = IncrementTable::new(2, vec![0.0, 2.0, 2.0, 0.0]).unwrap();
        let dy = IncrementTable::zero(2);
        let b = chatterjee_bound(&dx, &dy).unwrap();
        assert!((b - (2.0 * 2f64.ln()).sqrt()).abs() < 1e-15);
        assert_eq!(b, chatterjee_bound(&dy, &dx).unwrap());
    }

    #[test]
    fn validation() {
        assert!(IncrementTable::new(2, vec![0.0, 1.0, 1.0]).is_err());
        assert!(IncrementTable::new(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(IncrementTable::new(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
        assert!(IncrementTable::new(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
    }

    #[test]
    fn gamma_examples() {
        assert!((gamma_k_bound(hp(0.25), 4, 4) - 0.433_012_701_892_219_3).abs() < 1e-15);
        let big = gamma_k_bound(hp(0.3), 16, 1 << 40);
        assert!((big - 16f64.powf(-0.6)).abs() < 1e-12);
    }

    // The closed-form γ bound dominates the exact maximum over all pairs.
    #[test]
    fn gamma_bound_dominates_exhaustive_maximum() {
        for &h in &[0.1, 0.3, 0.49] {
            for &(n, m) in &[(3usize, 3usize), (2, 2), (4, 5), (1, 7)] {
                let h = hp(h);
                let dx = IncrementTable::fbm_grid(h, n * m);
                let dy = IncrementTable::fbm_coarsened(h, n, m);
                let gamma = max_discrepancy(&dx, &dy).unwrap();
                let bound = gamma_k_bound(h, n as u64, m as u64);
                assert!(gamma <= bound * (1.0 + 1e-12), "h={h} n={n} m={m}: {gamma} > {bound}");
            }
        }
    }

    #[test]
    fn coarsened_table_blocks() {
        // n = 2, m = 3: coordinates 0..2 share block 1, 3..5 share block 2.
        let t = IncrementTable::fbm_coarsened(hp(0.5), 2, 3);
        assert_eq!(t.get(0, 2), 0.0);
        assert_eq!(t.get(2, 3), 0.5);
        assert_eq!(t.get(0, 5), 0.5);
    }

    #[test]
    fn anchored_gram_reproduces_increments() {
        let t = IncrementTable::fbm_grid(hp(0.2), 5);
        let g = t.anchored_gram();
        for i in 0..5 {
            for j in 0..5 {
                let d = g[i * 5 + i] + g[j * 5 + j] - 2.0 * g[i * 5 + j];
                assert!((d - t.get(i, j)).abs() < 1e-14);
            }
        }
    }
}
