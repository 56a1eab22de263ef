//! Exact samplers for discrete fBm paths.
//!
//! Two methods draw from the exact law `N(0, cov_matrix(h, grid))`:
//!
//! * [`CholeskySampler`] multiplies a standard normal vector by the Cholesky
//!   factor of the path covariance. `O(n²)` per path, `O(n³)` setup.
//! * [`CirculantPlan`] embeds the Toeplitz covariance of the grid increments in
//!   a circulant matrix of size `M = 2^⌈log₂ 2(n−1)⌉`, diagonalizes it with an
//!   FFT and cumulates the resulting increments. One complex FFT yields two
//!   independent paths (real and imaginary parts).
//!
//! [`FbmSampler`] wraps both and falls back from circulant to Cholesky when the
//! embedding has a significantly negative eigenvalue.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{FbmError, Result};
use crate::linalg::CholeskyFactor;
use crate::process::{cov_matrix, increment_autocovariance, FbmPath, HurstParam, UniformGrid};
use crate::rng::RandomStream;

/// Largest grid the Cholesky sampler accepts unless overridden.
pub const DEFAULT_CHOLESKY_LIMIT: usize = 1 << 13;

/// Eigenvalues below `-NEGATIVE_EIGEN_TOL * max` reject the embedding; those in
/// `[-NEGATIVE_EIGEN_TOL * max, 0)` are clamped to zero.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-10;

const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMethod {
    Cholesky,
    Circulant,
}

impl std::fmt::Display for SamplerMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Cholesky => "cholesky",
            Self::Circulant => "circulant",
        })
    }
}

impl std::str::FromStr for SamplerMethod {
    type Err = FbmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cholesky" => Ok(Self::Cholesky),
            "circulant" => Ok(Self::Circulant),
            other => Err(FbmError::Precondition(format!(
                "unknown sampler method '{other}' (expected cholesky or circulant)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CholeskySampler {
    factor: CholeskyFactor,
}

impl CholeskySampler {
    pub fn new(h: HurstParam, grid: UniformGrid) -> Result<Self> {
        Self::with_limit(h, grid, DEFAULT_CHOLESKY_LIMIT)
    }

    pub fn with_limit(h: HurstParam, grid: UniformGrid, limit: usize) -> Result<Self> {
        let n = grid.len();
        if n > limit {
            return Err(FbmError::GridTooLarge { n, limit });
        }
        let cov = cov_matrix(h, grid);
        let factor = CholeskyFactor::factorize(cov.as_slice(), n, PIVOT_TOL).map_err(|e| match e {
            FbmError::NotPositiveSemidefinite { row, pivot } => FbmError::CovarianceFactorization {
                h: h.get(),
                n,
                row,
                pivot,
            },
            other => other,
        })?;
        Ok(Self { factor })
    }

    /// Builds a sampler for an arbitrary covariance matrix (row-major, `n × n`).
    pub fn from_covariance(cov: &[f64], n: usize) -> Result<Self> {
        Ok(Self {
            factor: CholeskyFactor::factorize(cov, n, PIVOT_TOL)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    /// Draws one vector into `out`, using `z` as scratch for the normals.
    pub fn sample_into(&self, stream: &mut RandomStream, z: &mut [f64], out: &mut [f64]) {
        stream.fill_normal(z);
        self.factor.mul_vec(z, out);
    }

    /// Maps given standard normals `z` to `L z`.
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        self.factor.mul_vec(z, out);
    }
}

/// Circulant embedding of a stationary Gaussian sequence of length `n`.
#[derive(Clone)]
pub struct CirculantPlan {
    n: usize,
    size: usize,
    /// `sqrt(λ_k / M)` for each circulant eigenvalue `λ_k`.
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantPlan")
            .field("n", &self.n)
            .field("size", &self.size)
            .finish_non_exhaustive()
    }
}

/// Smallest power of two `≥ 2(n − 1)` (and at least 1).
pub fn embedding_size(n: usize) -> usize {
    (2 * n.saturating_sub(1)).max(1).next_power_of_two()
}

impl CirculantPlan {
    /// Embeds the autocovariance `acov(lag)` of a stationary sequence of length `n`.
    pub fn from_autocovariance(n: usize, acov: impl Fn(usize) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(FbmError::EmptyGrid);
        }
        let size = embedding_size(n);
        let mut row: Vec<Complex<f64>> = (0..size)
            .map(|j| Complex::new(acov(j.min(size - j)), 0.0))
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(size);
        fft.process(&mut row);

        let max = row.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        let min = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        if min < -NEGATIVE_EIGEN_TOL * max.abs() {
            return Err(FbmError::NegativeEigenvalue { min, max });
        }
        let m = size as f64;
        let scale = row.iter().map(|c| (c.re.max(0.0) / m).sqrt()).collect();
        Ok(Self { n, size, scale, fft })
    }

    pub fn fbm(h: HurstParam, grid: UniformGrid) -> Result<Self> {
        let n = grid.len();
        Self::from_autocovariance(n, |k| increment_autocovariance(h, n, k))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn embedding_size(&self) -> usize {
        self.size
    }

    pub fn scratch(&self) -> CirculantScratch {
        let zero = Complex::new(0.0, 0.0);
        CirculantScratch {
            buf: vec![zero; self.size],
            fft: vec![zero; self.fft.get_inplace_scratch_len()],
        }
    }

    /// Two independent stationary sequences of length `n`.
    pub fn sample_sequences(
        &self,
        stream: &mut RandomStream,
        scratch: &mut CirculantScratch,
        first: &mut [f64],
        second: &mut [f64],
    ) {
        let buf = &mut scratch.buf;
        for (w, s) in buf.iter_mut().zip(&self.scale) {
            let re = stream.normal();
            let im = stream.normal();
            *w = Complex::new(s * re, s * im);
        }
        self.fft.process_with_scratch(buf, &mut scratch.fft);
        for ((a, b), w) in first.iter_mut().zip(second.iter_mut()).zip(buf.iter()) {
            *a = w.re;
            *b = w.im;
        }
    }

    /// Two independent fBm paths: the increment sequences, cumulated.
    pub fn sample_paths(
        &self,
        stream: &mut RandomStream,
        scratch: &mut CirculantScratch,
        first: &mut [f64],
        second: &mut [f64],
    ) {
        self.sample_sequences(stream, scratch, first, second);
        cumulate(first);
        cumulate(second);
    }
}

#[derive(Debug, Clone)]
pub struct CirculantScratch {
    buf: Vec<Complex<f64>>,
    fft: Vec<Complex<f64>>,
}

fn cumulate(xs: &mut [f64]) {
    let mut acc = 0.0;
    for x in xs {
        acc += *x;
        *x = acc;
    }
}

#[derive(Debug, Clone)]
enum Engine {
    Cholesky(CholeskySampler),
    Circulant(CirculantPlan),
}

/// A prepared exact fBm sampler for a fixed `(h, grid)`.
#[derive(Debug, Clone)]
pub struct FbmSampler {
    h: HurstParam,
    grid: UniformGrid,
    engine: Engine,
    fallback: Option<FbmError>,
}

/// Per-worker scratch space for [`FbmSampler::draw`].
#[derive(Debug, Clone)]
pub struct SamplerScratch {
    normals: Vec<f64>,
    circulant: Option<CirculantScratch>,
}

impl FbmSampler {
    pub fn new(h: HurstParam, grid: UniformGrid, method: SamplerMethod) -> Result<Self> {
        let engine = match method {
            SamplerMethod::Cholesky => Ok(Engine::Cholesky(CholeskySampler::new(h, grid)?)),
            SamplerMethod::Circulant => CirculantPlan::fbm(h, grid).map(Engine::Circulant),
        };
        Self::from_engine(h, grid, engine)
    }

    fn from_engine(h: HurstParam, grid: UniformGrid, engine: Result<Engine>) -> Result<Self> {
        match engine {
            Ok(engine) => Ok(Self { h, grid, engine, fallback: None }),
            Err(err @ FbmError::NegativeEigenvalue { .. }) => Ok(Self {
                h,
                grid,
                engine: Engine::Cholesky(CholeskySampler::new(h, grid)?),
                fallback: Some(err),
            }),
            Err(err) => Err(err),
        }
    }

    pub fn hurst(&self) -> HurstParam {
        self.h
    }

    pub fn grid(&self) -> UniformGrid {
        self.grid
    }

    /// The method actually in use (after any fallback).
    pub fn method(&self) -> SamplerMethod {
        match self.engine {
            Engine::Cholesky(_) => SamplerMethod::Cholesky,
            Engine::Circulant(_) => SamplerMethod::Circulant,
        }
    }

    /// Why the circulant embedding was abandoned, if it was.
    pub fn fallback(&self) -> Option<&FbmError> {
        self.fallback.as_ref()
    }

    /// Number of paths produced by one call to [`draw`](Self::draw).
    pub fn paths_per_draw(&self) -> usize {
        match self.engine {
            Engine::Cholesky(_) => 1,
            Engine::Circulant(_) => 2,
        }
    }

    pub fn scratch(&self) -> SamplerScratch {
        match &self.engine {
            Engine::Cholesky(_) => SamplerScratch {
                normals: vec![0.0; self.grid.len()],
                circulant: None,
            },
            Engine::Circulant(plan) => SamplerScratch {
                normals: Vec::new(),
                circulant: Some(plan.scratch()),
            },
        }
    }

    /// Fills `out` (length `paths_per_draw() * n`) with consecutive paths.
    pub fn draw(&self, stream: &mut RandomStream, scratch: &mut SamplerScratch, out: &mut [f64]) {
        let n = self.grid.len();
        debug_assert_eq!(out.len(), self.paths_per_draw() * n);
        match &self.engine {
            Engine::Cholesky(s) => s.sample_into(stream, &mut scratch.normals, out),
            Engine::Circulant(plan) => {
                let (a, b) = out.split_at_mut(n);
                let cs = scratch
                    .circulant
                    .get_or_insert_with(|| plan.scratch());
                plan.sample_paths(stream, cs, a, b);
            }
        }
    }

    /// Draws a single path; with the circulant engine the second path is discarded.
    pub fn sample(&self, stream: &mut RandomStream) -> FbmPath {
        let n = self.grid.len();
        let mut scratch = self.scratch();
        let mut out = vec![0.0; self.paths_per_draw() * n];
        self.draw(stream, &mut scratch, &mut out);
        out.truncate(n);
        FbmPath { h: self.h, grid: self.grid, values: out }
    }
}

pub fn sample_cholesky(h: HurstParam, grid: UniformGrid, stream: &mut RandomStream) -> Result<FbmPath> {
    Ok(FbmSampler::new(h, grid, SamplerMethod::Cholesky)?.sample(stream))
}

/// Circulant-embedding path; silently uses Cholesky if the embedding is rejected
/// (use [`FbmSampler`] directly to observe the fallback).
pub fn sample_circulant(h: HurstParam, grid: UniformGrid, stream: &mut RandomStream) -> Result<FbmPath> {
    Ok(FbmSampler::new(h, grid, SamplerMethod::Circulant)?.sample(stream))
}
