//! Monte Carlo estimation of grid maxima and of the quantities the bounds control.
//!
//! Samples are processed in batches of [`BATCH_SIZE`]; batch `b` draws all its
//! randomness from `RandomStream::new(seed, b)` and batch accumulators are merged
//! in batch order. Results are therefore bit-identical for any number of rayon
//! workers.
//!
//! Whenever two maxima are compared (a grid and its refinement, two Gaussian
//! vectors) they are computed on the same draw, so the per-path difference of
//! nested-grid maxima is nonnegative exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{chatterjee_bound, gamma_k_bound, IncrementTable};
use crate::error::{precondition, Result};
use crate::process::{increment_variance, HurstParam, UniformGrid};
use crate::rng::{derive_seed, RandomStream};
use crate::sampler::{CholeskySampler, FbmSampler, SamplerMethod};
use crate::stats::{Moments, Z_975};

/// Paths per random stream.
pub const BATCH_SIZE: u64 = 1024;

/// Sampling settings shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub method: SamplerMethod,
}

impl McConfig {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        Self { n_samples, seed, method: SamplerMethod::Circulant }
    }

    pub fn with_method(mut self, method: SamplerMethod) -> Self {
        self.method = method;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n_samples: u64,
    pub ci_halfwidth_95: f64,
    pub seed: u64,
    /// Sampler actually used.
    pub method: SamplerMethod,
    /// Set when the requested method was abandoned for `method`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_from: Option<SamplerMethod>,
}

impl McEstimate {
    fn from_moments(m: &Moments, seed: u64, method: SamplerMethod, requested: SamplerMethod) -> Self {
        let std_err = m.std_err();
        Self {
            mean: m.mean(),
            std_err,
            n_samples: m.count(),
            ci_halfwidth_95: Z_975 * std_err,
            seed,
            method,
            fallback_from: (method != requested).then_some(requested),
        }
    }
}

/// Coupled estimate of the maxima over a grid of size `n` and its `m`-fold refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncrementEstimate {
    pub n: u64,
    pub m: u64,
    pub coarse: McEstimate,
    pub fine: McEstimate,
    pub diff_mean: f64,
    pub diff_std_err: f64,
    /// Paths on which the coarse maximum exceeded the fine one (always 0).
    pub coupling_violations: u64,
    /// `(γ ln(nm))^{1/2}` with `γ = n^{-2H}(1 − 1/m)^{2H}`.
    pub chatterjee_rhs: f64,
}

impl IncrementEstimate {
    /// `diff_mean − k·SE ≤ rhs`.
    pub fn within_bound(&self, k_se: f64) -> bool {
        self.diff_mean - k_se * self.diff_std_err <= self.chatterjee_rhs
    }
}

/// Coupled estimate of `M_{n_ref} − M_n`, a lower estimate of `Δₙ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaProxy {
    pub n: u64,
    pub n_ref: u64,
    pub proxy: f64,
    pub se: f64,
    pub coarse: McEstimate,
    pub fine: McEstimate,
    pub coupling_violations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChatterjeeCheck {
    pub n: usize,
    /// `|Ê max X − Ê max Y|`.
    pub lhs: f64,
    pub lhs_se: f64,
    /// `(γ ln N)^{1/2}`.
    pub rhs: f64,
    pub max_x: McEstimate,
    pub max_y: McEstimate,
    /// `lhs − 4·SE ≤ rhs`.
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IidMaxEstimate {
    pub n: u64,
    pub estimate: McEstimate,
    /// `√(2 ln n)`.
    pub bound: f64,
    /// `2^{-1/2} Ê max ξᵢ`, the `H → 0` limit of `Mₙᴴ`.
    pub m0: f64,
}

/// Grid maxima over nested sub-grids of one fine grid, from the same paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedMaxima {
    pub sizes: Vec<u64>,
    pub estimates: Vec<McEstimate>,
    /// Paths on which a coarser maximum exceeded a finer one (always 0).
    pub monotonicity_violations: u64,
}

/// Per-pair empirical increment variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncrementVarianceStat {
    pub s: f64,
    pub t: f64,
    pub mean: f64,
    pub std_err: f64,
    pub expected: f64,
}

impl IncrementVarianceStat {
    pub fn z_score(&self) -> f64 {
        (self.mean - self.expected) / self.std_err
    }
}

struct BatchAcc {
    moments: Vec<Moments>,
    violations: u64,
}

impl BatchAcc {
    fn new(k: usize) -> Self {
        Self { moments: vec![Moments::new(); k], violations: 0 }
    }

    fn merge(&mut self, other: &BatchAcc) {
        for (a, b) in self.moments.iter_mut().zip(&other.moments) {
            a.merge(b);
        }
        self.violations += other.violations;
    }
}

/// Runs `batch(stream, count)` for every batch in parallel; results in batch order.
fn run_batches<A, F>(n_samples: u64, seed: u64, batch: F) -> Vec<A>
where
    A: Send,
    F: Fn(RandomStream, u64) -> A + Sync,
{
    let batches = n_samples.div_ceil(BATCH_SIZE);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = BATCH_SIZE.min(n_samples - b * BATCH_SIZE);
            batch(RandomStream::new(seed, b), count)
        })
        .collect()
}

/// Feeds every sampled path to `visit`, accumulating `k` statistics.
fn accumulate_paths(
    sampler: &FbmSampler,
    cfg: &McConfig,
    k: usize,
    visit: impl Fn(&[f64], &mut BatchAcc) + Sync,
) -> BatchAcc {
    let n = sampler.grid().len();
    let per_draw = sampler.paths_per_draw();
    let parts = run_batches(cfg.n_samples, cfg.seed, |mut stream, count| {
        let mut acc = BatchAcc::new(k);
        let mut scratch = sampler.scratch();
        let mut buf = vec![0.0; per_draw * n];
        let mut done = 0u64;
        while done < count {
            sampler.draw(&mut stream, &mut scratch, &mut buf);
            for path in buf.chunks_exact(n) {
                if done == count {
                    break;
                }
                visit(path, &mut acc);
                done += 1;
            }
        }
        acc
    });
    let mut total = BatchAcc::new(k);
    for p in &parts {
        total.merge(p);
    }
    total
}

#[inline]
fn max_of(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(f64::NEG_INFINITY, f64::max)
}

/// Maximum over the sub-grid of size `path.len() / stride` (indices `stride−1, 2·stride−1, …`).
#[inline]
fn strided_max(path: &[f64], stride: usize) -> f64 {
    max_of(path.iter().skip(stride - 1).step_by(stride).copied())
}

fn check_samples(cfg: &McConfig, min: u64) -> Result<()> {
    precondition(cfg.n_samples >= min, || {
        format!("need at least {min} samples, got {}", cfg.n_samples)
    })
}

fn grid(n: u64) -> Result<UniformGrid> {
    UniformGrid::new(usize::try_from(n).map_err(|_| {
        crate::FbmError::Precondition(format!("grid size {n} does not fit in memory"))
    })?)
}

/// `Ê f(max_i B_{i/n})`.
pub fn estimate_max_functional(
    h: HurstParam,
    n: u64,
    cfg: &McConfig,
    f: impl Fn(f64) -> f64 + Sync,
) -> Result<McEstimate> {
    check_samples(cfg, 2)?;
    let sampler = FbmSampler::new(h, grid(n)?, cfg.method)?;
    let acc = accumulate_paths(&sampler, cfg, 1, |path, acc| {
        acc.moments[0].push(f(max_of(path.iter().copied())));
    });
    Ok(McEstimate::from_moments(&acc.moments[0], cfg.seed, sampler.method(), cfg.method))
}

/// `Mₙᴴ = E max_{1≤i≤n} B_{i/n}`.
pub fn estimate_mn(h: HurstParam, n: u64, cfg: &McConfig) -> Result<McEstimate> {
    check_samples(cfg, 100)?;
    estimate_max_functional(h, n, cfg, |x| x)
}

fn coupled_refinement(h: HurstParam, n: u64, m: u64, cfg: &McConfig) -> Result<(BatchAcc, SamplerMethod)> {
    precondition(m >= 1, || "refinement factor must be at least 1".into())?;
    let sampler = FbmSampler::new(h, grid(n * m)?, cfg.method)?;
    let stride = m as usize;
    let acc = accumulate_paths(&sampler, cfg, 3, |path, acc| {
        let fine = max_of(path.iter().copied());
        let coarse = strided_max(path, stride);
        acc.moments[0].push(coarse);
        acc.moments[1].push(fine);
        acc.moments[2].push(fine - coarse);
        if coarse > fine {
            acc.violations += 1;
        }
    });
    Ok((acc, sampler.method()))
}

/// `M_{nm} − M_n` estimated on shared paths of the fine grid.
pub fn estimate_increment(h: HurstParam, n: u64, m: u64, cfg: &McConfig) -> Result<IncrementEstimate> {
    check_samples(cfg, 2)?;
    precondition(n >= 1, || "grid size must be at least 1".into())?;
    let (acc, method) = coupled_refinement(h, n, m, cfg)?;
    let est = |i: usize| McEstimate::from_moments(&acc.moments[i], cfg.seed, method, cfg.method);
    let chatterjee_rhs = if m >= 2 {
        (gamma_k_bound(h, n, m) * ((n * m) as f64).ln()).sqrt()
    } else {
        0.0
    };
    Ok(IncrementEstimate {
        n,
        m,
        coarse: est(0),
        fine: est(1),
        diff_mean: acc.moments[2].mean(),
        diff_std_err: acc.moments[2].std_err(),
        coupling_violations: acc.violations,
        chatterjee_rhs,
    })
}

/// `M_{n_ref} − M_n` on shared paths; since `Mₙ ↑ Mᴴ`, a lower estimate of `Δₙ`.
///
/// `n_ref` must be a multiple of `n` with `n_ref/n ≥ 16`, or equal to `n`.
pub fn delta_proxy(h: HurstParam, n: u64, n_ref: u64, cfg: &McConfig) -> Result<DeltaProxy> {
    check_samples(cfg, 2)?;
    precondition(n >= 1 && n_ref.is_multiple_of(n), || format!("n_ref = {n_ref} must be a multiple of n = {n}"))?;
    let ratio = n_ref / n;
    precondition(ratio == 1 || ratio >= 16, || {
        format!("n_ref/n = {ratio} must be at least 16 for a useful proxy")
    })?;
    let (acc, method) = coupled_refinement(h, n, ratio, cfg)?;
    let est = |i: usize| McEstimate::from_moments(&acc.moments[i], cfg.seed, method, cfg.method);
    Ok(DeltaProxy {
        n,
        n_ref,
        proxy: acc.moments[2].mean(),
        se: acc.moments[2].std_err(),
        coarse: est(0),
        fine: est(1),
        coupling_violations: acc.violations,
    })
}

/// Maxima over the grids of the given sizes, all dividing the largest one,
/// computed on the same paths.
pub fn estimate_nested_maxima(h: HurstParam, sizes: &[u64], cfg: &McConfig) -> Result<NestedMaxima> {
    check_samples(cfg, 2)?;
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let fine = *sizes.last().ok_or_else(|| crate::FbmError::Precondition("no grid sizes".into()))?;
    precondition(sizes[0] >= 1 && sizes.iter().all(|&s| fine % s == 0), || {
        format!("grid sizes {sizes:?} must all divide {fine}")
    })?;
    let strides: Vec<usize> = sizes.iter().map(|&s| (fine / s) as usize).collect();
    let sampler = FbmSampler::new(h, grid(fine)?, cfg.method)?;
    let k = sizes.len();
    let acc = accumulate_paths(&sampler, cfg, k, |path, acc| {
        let mut prev = f64::NEG_INFINITY;
        for (i, &stride) in strides.iter().enumerate() {
            let mx = strided_max(path, stride);
            acc.moments[i].push(mx);
            // Only nested pairs are guaranteed ordered.
            if i > 0 && strides[i - 1].is_multiple_of(stride) && mx < prev {
                acc.violations += 1;
            }
            prev = mx;
        }
    });
    let estimates = acc
        .moments
        .iter()
        .map(|m| McEstimate::from_moments(m, cfg.seed, sampler.method(), cfg.method))
        .collect();
    Ok(NestedMaxima { sizes, estimates, monotonicity_violations: acc.violations })
}

/// Per-path maxima in sample order, for distributional comparisons.
pub fn sample_maxima(h: HurstParam, n: u64, cfg: &McConfig) -> Result<Vec<f64>> {
    let sampler = FbmSampler::new(h, grid(n)?, cfg.method)?;
    let n = sampler.grid().len();
    let per_draw = sampler.paths_per_draw();
    let parts = run_batches(cfg.n_samples, cfg.seed, |mut stream, count| {
        let mut scratch = sampler.scratch();
        let mut buf = vec![0.0; per_draw * n];
        let mut out = Vec::with_capacity(count as usize);
        while (out.len() as u64) < count {
            sampler.draw(&mut stream, &mut scratch, &mut buf);
            for path in buf.chunks_exact(n).take((count - out.len() as u64) as usize) {
                out.push(max_of(path.iter().copied()));
            }
        }
        out
    });
    Ok(parts.concat())
}

/// Empirical `E (B_t − B_s)²` for all `0 ≤ s < t` on the grid (with `B_0 = 0`).
pub fn increment_variance_check(h: HurstParam, n: u64, cfg: &McConfig) -> Result<Vec<IncrementVarianceStat>> {
    check_samples(cfg, 2)?;
    let g = grid(n)?;
    let sampler = FbmSampler::new(h, g, cfg.method)?;
    let np = g.len() + 1;
    let acc = accumulate_paths(&sampler, cfg, np * (np - 1) / 2, |path, acc| {
        let at = |i: usize| if i == 0 { 0.0 } else { path[i - 1] };
        let mut k = 0;
        for i in 0..np {
            let bi = at(i);
            for j in i + 1..np {
                let d = at(j) - bi;
                acc.moments[k].push(d * d);
                k += 1;
            }
        }
    });
    let mut out = Vec::with_capacity(acc.moments.len());
    let mut k = 0;
    for i in 0..np {
        for j in i + 1..np {
            let (s, t) = (i as f64 / g.len() as f64, g.point(j));
            let m = &acc.moments[k];
            out.push(IncrementVarianceStat {
                s,
                t,
                mean: m.mean(),
                std_err: m.std_err(),
                expected: increment_variance(h, s, t),
            });
            k += 1;
        }
    }
    Ok(out)
}

/// Monte Carlo check of `|E max X − E max Y| ≤ (γ ln N)^{1/2}`.
///
/// `X` and `Y` are realized through their anchored Gram matrices and driven by
/// the same normals.
pub fn empirical_chatterjee(dx: &IncrementTable, dy: &IncrementTable, cfg: &McConfig) -> Result<ChatterjeeCheck> {
    check_samples(cfg, 2)?;
    let rhs = chatterjee_bound(dx, dy)?;
    let n = dx.dim();
    let sx = CholeskySampler::from_covariance(&dx.anchored_gram(), n)?;
    let sy = CholeskySampler::from_covariance(&dy.anchored_gram(), n)?;
    let parts = run_batches(cfg.n_samples, cfg.seed, |mut stream, count| {
        let mut acc = BatchAcc::new(3);
        let mut z = vec![0.0; n];
        let (mut x, mut y) = (vec![0.0; n], vec![0.0; n]);
        for _ in 0..count {
            stream.fill_normal(&mut z);
            sx.apply(&z, &mut x);
            sy.apply(&z, &mut y);
            let mx = max_of(x.iter().copied());
            let my = max_of(y.iter().copied());
            acc.moments[0].push(mx);
            acc.moments[1].push(my);
            acc.moments[2].push(mx - my);
        }
        acc
    });
    let mut total = BatchAcc::new(3);
    for p in &parts {
        total.merge(p);
    }
    let est = |i: usize| {
        McEstimate::from_moments(&total.moments[i], cfg.seed, SamplerMethod::Cholesky, SamplerMethod::Cholesky)
    };
    let lhs = total.moments[2].mean().abs();
    let lhs_se = total.moments[2].std_err();
    Ok(ChatterjeeCheck {
        n,
        lhs,
        lhs_se,
        rhs,
        max_x: est(0),
        max_y: est(1),
        holds: lhs - 4.0 * lhs_se <= rhs,
    })
}

/// `E max_{1≤i≤n} ξᵢ` for i.i.d. standard normals, with the bound `√(2 ln n)`.
pub fn estimate_max_iid_normals(n: u64, cfg: &McConfig) -> Result<IidMaxEstimate> {
    check_samples(cfg, 2)?;
    precondition(n >= 1, || "need at least one normal".into())?;
    // Separate seed space from the fBm estimators sharing `cfg.seed`.
    let seed = derive_seed(cfg.seed, 0x11D);
    let parts = run_batches(cfg.n_samples, seed, |mut stream, count| {
        let mut m = Moments::new();
        for _ in 0..count {
            m.push(max_of((0..n).map(|_| stream.normal())));
        }
        m
    });
    let mut total = Moments::new();
    for p in &parts {
        total.merge(p);
    }
    let mut estimate = McEstimate::from_moments(&total, cfg.seed, SamplerMethod::Cholesky, SamplerMethod::Cholesky);
    estimate.seed = cfg.seed;
    Ok(IidMaxEstimate {
        n,
        bound: (2.0 * (n as f64).ln()).sqrt(),
        m0: estimate.mean / std::f64::consts::SQRT_2,
        estimate,
    })
}
