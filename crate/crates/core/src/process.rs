//! Fractional Brownian motion on the uniform grid `t_i = i/n, i = 1..n`.
//!
//! The process is centred with `E B_s B_t = ½(s^{2H} + t^{2H} − |s−t|^{2H})`,
//! equivalently `B_0 = 0` and `E (B_s − B_t)² = |s − t|^{2H}`.

use serde::{Deserialize, Serialize};

use crate::error::{FbmError, Result};

/// Increment-correlation regime of an fBm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `H < 1/2`: negatively correlated increments.
    Rough,
    /// `H = 1/2`: standard Brownian motion.
    Brownian,
    /// `H > 1/2`: positively correlated increments.
    Persistent,
}

/// A validated Hurst exponent in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HurstParam(f64);

impl HurstParam {
    pub fn new(h: f64) -> Result<Self> {
        if h.is_finite() && h > 0.0 && h <= 1.0 {
            Ok(Self(h))
        } else {
            Err(FbmError::InvalidHurst(h))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `2H`, the exponent of the increment variance.
    #[inline]
    pub fn two_h(self) -> f64 {
        2.0 * self.0
    }

    pub fn regime(self) -> Regime {
        if self.0 < 0.5 {
            Regime::Rough
        } else if self.0 == 0.5 {
            Regime::Brownian
        } else {
            Regime::Persistent
        }
    }
}

impl TryFrom<f64> for HurstParam {
    type Error = FbmError;

    fn try_from(h: f64) -> Result<Self> {
        Self::new(h)
    }
}

impl From<HurstParam> for f64 {
    fn from(h: HurstParam) -> f64 {
        h.0
    }
}

impl std::fmt::Display for HurstParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// The grid `{i/n : i = 1..n}`; `t = 0` is excluded since `B_0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformGrid {
    n: usize,
}

impl UniformGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(FbmError::EmptyGrid);
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false; a grid holds at least one point.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// `t_i` for a one-based index `i`.
    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.n).map(|i| self.point(i))
    }
}

/// One realization of `(B_{1/n}, …, B_{n/n})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbmPath {
    pub h: HurstParam,
    pub grid: UniformGrid,
    pub values: Vec<f64>,
}

impl FbmPath {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(t, value)` pairs, without the implicit origin.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.points().zip(self.values.iter().copied())
    }
}

/// `E (B_s − B_t)² = |s − t|^{2H}`.
#[inline]
pub fn increment_variance(h: HurstParam, s: f64, t: f64) -> f64 {
    (s - t).abs().powf(h.two_h())
}

/// `E B_s B_t`.
#[inline]
pub fn covariance(h: HurstParam, s: f64, t: f64) -> f64 {
    let a = h.two_h();
    0.5 * (s.abs().powf(a) + t.abs().powf(a) - (s - t).abs().powf(a))
}

/// Dense symmetric covariance matrix of the fBm sampled on a grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl CovMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Zero-based `(row, col)`; row `i` corresponds to `t = (i+1)/n`.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }
}

/// Covariance of `(B_{1/n}, …, B_{n/n})`.
///
/// Entries are evaluated as `½((i/n)^{2H} + (j/n)^{2H} − (|i−j|/n)^{2H})`, so the
/// diagonal is exactly `(i/n)^{2H}` and the matrix is exactly symmetric.
pub fn cov_matrix(h: HurstParam, grid: UniformGrid) -> CovMatrix {
    let n = grid.len();
    let a = h.two_h();
    let nf = n as f64;
    // (k/n)^{2H} for k = 0..=n covers both the marginals and the lag terms.
    let pow: Vec<f64> = (0..=n).map(|k| (k as f64 / nf).powf(a)).collect();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        entries[i * n + i] = pow[i + 1];
        for j in 0..i {
            let c = 0.5 * (pow[i + 1] + pow[j + 1] - pow[i - j]);
            entries[i * n + j] = c;
            entries[j * n + i] = c;
        }
    }
    CovMatrix { n, entries }
}

/// Autocovariance of the grid increments (fractional Gaussian noise scaled to step `1/n`):
/// `ρ(k) = ½(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H}) n^{−2H}`.
pub fn increment_autocovariance(h: HurstParam, n: usize, lag: usize) -> f64 {
    let a = h.two_h();
    let k = lag as f64;
    let scale = (n as f64).powf(-a);
    0.5 * ((k + 1.0).powf(a) - 2.0 * k.powf(a) + (k - 1.0).abs().powf(a)) * scale
}
