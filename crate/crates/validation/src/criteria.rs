//! The numbered acceptance criteria. Each returns a report whose measurements
//! all have to pass; diagnostics are informational and never affect the verdict.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use fbm_extremes::bounds::{
    alpha_star, delta_lower, delta_upper, delta_upper_lerch, delta_upper_old, l_constant, mh_upper,
    mh_upper_derivation_default, mn_upper, pickands_ours, pickands_shao, IncrementTable, MH_UPPER_COEFF,
    SIEGMUND_BETA,
};
use fbm_extremes::montecarlo::{
    delta_proxy, empirical_chatterjee, estimate_increment, estimate_max_iid_normals, estimate_mn,
    estimate_nested_maxima, increment_variance_check, sample_maxima, McConfig,
};
use fbm_extremes::output::{estimates_table, json_document, EstimateRow, RunMeta};
use fbm_extremes::rng::derive_seed;
use fbm_extremes::sampler::SamplerMethod;
use fbm_extremes::stats::ks_two_sample;
use fbm_extremes::HurstParam;

use crate::oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Formula values against oracles; seconds.
    ClosedForm,
    /// Law of the sampled paths.
    Sampling,
    /// Monte Carlo estimates against exact values and bounds.
    MonteCarlo,
    /// Bitwise reproducibility across worker counts.
    Determinism,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::ClosedForm, Suite::Sampling, Suite::MonteCarlo, Suite::Determinism];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::ClosedForm => "closed_form",
            Suite::Sampling => "sampling",
            Suite::MonteCarlo => "monte_carlo",
            Suite::Determinism => "determinism",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| format!("unknown suite '{s}' (expected closed_form, sampling, monte_carlo or determinism)"))
    }
}

/// One checked quantity: passes iff `lower ≤ value ≤ upper` (or strict, when flagged).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Measurement {
    /// `|value − target| ≤ tol`.
    pub fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: Some(target),
            lower: Some(target - tol),
            upper: Some(target + tol),
            passed: (value - target).abs() <= tol,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, upper: f64) -> Self {
        Self { name: name.into(), value, target: None, lower: None, upper: Some(upper), passed: value <= upper }
    }

    pub fn at_least(name: impl Into<String>, value: f64, lower: f64) -> Self {
        Self { name: name.into(), value, target: None, lower: Some(lower), upper: None, passed: value >= lower }
    }

    pub fn closed(name: impl Into<String>, value: f64, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: None,
            lower: Some(lower),
            upper: Some(upper),
            passed: lower <= value && value <= upper,
        }
    }

    pub fn open(name: impl Into<String>, value: f64, lower: f64, upper: f64) -> Self {
        Self { passed: lower < value && value < upper, ..Self::closed(name, value, lower, upper) }
    }

    /// A count that must be zero.
    pub fn zero(name: impl Into<String>, count: u64) -> Self {
        Self::at_most(name, count as f64, 0.0)
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), value: ok as u8 as f64, target: Some(1.0), lower: None, upper: None, passed: ok }
    }
}

impl fmt::Display for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={:.6e}", self.name, self.value)?;
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => write!(f, " in [{l:.6e}, {u:.6e}]")?,
            (None, Some(u)) => write!(f, " <= {u:.6e}")?,
            (Some(l), None) => write!(f, " >= {l:.6e}")?,
            (None, None) => {}
        }
        if !self.passed {
            f.write_str(" (violated)")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: String,
    pub suite: Suite,
    pub passed: bool,
    pub measurements: Vec<Measurement>,
    /// Extra comparisons reported alongside; they do not affect `passed`.
    pub diagnostics: Vec<Measurement>,
    pub notes: Vec<String>,
    /// Wall-clock seconds; excluded from serialized reports to keep them reproducible.
    #[serde(skip)]
    pub elapsed_secs: f64,
}

impl CriterionReport {
    fn new(c: &Criterion, measurements: Vec<Measurement>) -> Self {
        Self {
            id: c.id,
            title: c.title.into(),
            suite: c.suite,
            passed: !measurements.is_empty() && measurements.iter().all(|m| m.passed),
            measurements,
            diagnostics: Vec::new(),
            notes: Vec::new(),
            elapsed_secs: 0.0,
        }
    }

    fn with_diagnostics(mut self, d: Vec<Measurement>) -> Self {
        self.diagnostics = d;
        self
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// `criterion N [suite] PASS|FAIL title`.
    pub fn summary_line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {} {} ({:.1} s)",
            self.id,
            self.suite,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed_secs
        )
    }

    /// Summary line followed by indented measurements, diagnostics and notes.
    pub fn detail(&self) -> String {
        let mut s = self.summary_line();
        for m in &self.measurements {
            s.push_str(&format!("\n    {m}"));
        }
        for m in &self.diagnostics {
            s.push_str(&format!("\n    diagnostic: {m}"));
        }
        for n in &self.notes {
            s.push_str(&format!("\n    note: {n}"));
        }
        s
    }
}

/// Seed and sample scale shared by all criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub seed: u64,
    /// Multiplies every Monte Carlo sample count (1 = the stated scale).
    pub scale: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { seed: 20_160_517, scale: 1.0 }
    }
}

impl ValidationConfig {
    fn samples(&self, base: u64) -> u64 {
        ((base as f64 * self.scale).round() as u64).max(1000)
    }

    /// Config for the estimator indexed by `tag`, with its own seed.
    fn mc(&self, base: u64, tag: u64) -> McConfig {
        McConfig::new(self.samples(base), derive_seed(self.seed, tag))
    }
}

pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub suite: Suite,
    run: fn(&Criterion, &ValidationConfig) -> CriterionReport,
}

impl Criterion {
    pub fn run(&self, cfg: &ValidationConfig) -> CriterionReport {
        let start = Instant::now();
        let mut r = (self.run)(self, cfg);
        r.elapsed_secs = start.elapsed().as_secs_f64();
        r
    }
}

pub fn all_criteria() -> Vec<Criterion> {
    use Suite::*;
    let c = |id, title, suite, run| Criterion { id, title, suite, run };
    vec![
        c(1, "constant re-derivations", ClosedForm, c01_constants),
        c(2, "derivation of the 1.695 coefficient", ClosedForm, c02_mh_coefficient),
        c(3, "Pickands bound ratios", ClosedForm, c03_pickands_ratios),
        c(4, "closed forms against double-double oracle", ClosedForm, c04_oracle_grid),
        c(5, "exact series below geometric majorant", ClosedForm, c05_series_vs_majorant),
        c(6, "sampler law", Sampling, c06_sampler_law),
        c(7, "H = 1/2 calibration", MonteCarlo, c07_brownian_calibration),
        c(8, "coupled refinement increments", MonteCarlo, c08_refinement_increments),
        c(9, "Gaussian comparison inequality", MonteCarlo, c09_chatterjee),
        c(10, "maxima of i.i.d. normals", MonteCarlo, c10_iid_normals),
        c(11, "upper bound dominates the refinement proxy", MonteCarlo, c11_upper_dominance),
        c(12, "monotonicity in n and in H", MonteCarlo, c12_monotonicity),
        c(13, "determinism across worker counts", Determinism, c13_determinism),
    ]
}

/// Runs the criteria in `suites` (all when `None`), in id order.
pub fn run_criteria(cfg: &ValidationConfig, suites: Option<&[Suite]>) -> Vec<CriterionReport> {
    all_criteria()
        .iter()
        .filter(|c| suites.is_none_or(|s| s.contains(&c.suite)))
        .map(|c| c.run(cfg))
        .collect()
}

pub fn run_criterion(id: u32, cfg: &ValidationConfig) -> Option<CriterionReport> {
    all_criteria().iter().find(|c| c.id == id).map(|c| c.run(cfg))
}

fn hp(h: f64) -> HurstParam {
    HurstParam::new(h).expect("criterion parameters are in (0, 1]")
}

fn rel_err(value: f64, reference: f64) -> f64 {
    if value == reference {
        0.0
    } else {
        ((value - reference) / reference).abs()
    }
}

/// Grid shared by criteria 4 and 5.
pub const GRID_H: [f64; 5] = [0.05, 0.1, 0.2, 0.3, 0.45];
pub const GRID_N: [u64; 5] = [2, 8, 16, 100, 1024];
pub const GRID_ALPHA: [f64; 3] = [0.5, 2.0, 8.0];

const ORACLE_REL_TOL: f64 = 1e-12;

fn c01_constants(c: &Criterion, _: &ValidationConfig) -> CriterionReport {
    let l = l_constant();
    let a = alpha_star(1e-10).unwrap_or(f64::NAN);
    let pickands_base = (std::f64::consts::SQRT_2 * std::f64::consts::E * MH_UPPER_COEFF).powi(2);
    CriterionReport::new(
        c,
        vec![
            Measurement::within("L", l, 0.2055, 1e-3),
            Measurement::within("alpha_star", a, 7.48704, 1e-4),
            Measurement::closed("(sqrt2 e 1.695)^2", pickands_base, 42.45, 42.47),
        ],
    )
    .with_diagnostics(vec![
        Measurement::within("L vs oracle", l, oracle::l_const().to_f64(), 1e-15),
        Measurement::within("alpha_star vs oracle", a, oracle::alpha_star().to_f64(), 1e-9),
    ])
}

fn c02_mh_coefficient(c: &Criterion, _: &ValidationConfig) -> CriterionReport {
    let h = hp(0.25);
    let d = mh_upper_derivation_default(h);
    let derived = d.bracket * 4f64.ln().sqrt();
    let library = mh_upper(h).value * h.get().sqrt();
    CriterionReport::new(
        c,
        vec![
            Measurement::open("bracket*sqrt(ln 4)", derived, 1.6940, 1.6950),
            // The constant used by the bound must dominate the derivation, tightly.
            Measurement::open("library coefficient - derived", library - derived, 0.0, 1e-3),
        ],
    )
}

fn c03_pickands_ratios(c: &Criterion, _: &ValidationConfig) -> CriterionReport {
    let ratio = |h: f64| pickands_ours(hp(h)) / pickands_shao(hp(h));
    CriterionReport::new(
        c,
        vec![
            Measurement::within("ratio at H=0.45", ratio(0.45), 0.344, 0.005),
            Measurement::within("ratio at H=0.15", ratio(0.15), 0.046, 0.002),
        ],
    )
}

fn c04_oracle_grid(c: &Criterion, _: &ValidationConfig) -> CriterionReport {
    let (mut old, mut upper, mut lower, mut mn) = (0f64, 0f64, 0f64, 0f64);
    let mut m_mismatch = 0;
    let mut points = 0;
    for &h in &GRID_H {
        for &n in &GRID_N {
            old = old.max(rel_err(delta_upper_old(hp(h), n).value, oracle::gap_upper_prior(h, n).to_f64()));
            lower = lower.max(rel_err(
                delta_lower(hp(h), n).map_or(f64::NAN, |r| r.value),
                oracle::gap_lower(h, n).to_f64(),
            ));
            mn = mn.max(rel_err(
                mn_upper(hp(h), n).map_or(f64::NAN, |r| r.value),
                oracle::grid_max_upper(h, n).to_f64(),
            ));
            for &alpha in &GRID_ALPHA {
                points += 1;
                let (v, m, _) = oracle::gap_upper(h, n, alpha);
                match delta_upper(hp(h), n, alpha) {
                    Ok(r) => {
                        upper = upper.max(rel_err(r.value, v.to_f64()));
                        if r.parameter("m") != Some(m.to_f64()) {
                            m_mismatch += 1;
                        }
                    }
                    Err(_) => upper = f64::NAN,
                }
            }
        }
    }
    CriterionReport::new(
        c,
        vec![
            Measurement::at_most("max rel err delta_upper_old", old, ORACLE_REL_TOL),
            Measurement::at_most("max rel err delta_upper", upper, ORACLE_REL_TOL),
            Measurement::at_most("max rel err delta_lower", lower, ORACLE_REL_TOL),
            Measurement::at_most("max rel err mn_upper", mn, ORACLE_REL_TOL),
            Measurement::zero("coarsening factor mismatches", m_mismatch),
        ],
    )
    .with_note(format!("{points} (h, n, alpha) points"))
}

fn c05_series_vs_majorant(c: &Criterion, _: &ValidationConfig) -> CriterionReport {
    let mut valid = 0u64;
    let mut above = 0u64;
    let mut not_strict = 0u64;
    let mut series_err = 0f64;
    let mut min_rel_gap = f64::INFINITY;
    for &h in &GRID_H {
        for &n in &GRID_N {
            for &alpha in &GRID_ALPHA {
                let Ok(major) = delta_upper(hp(h), n, alpha) else { continue };
                if !major.valid {
                    continue;
                }
                valid += 1;
                let series = delta_upper_lerch(hp(h), n, alpha, 1e-15).map_or(f64::NAN, |r| r.value);
                // A NaN series value counts as a failure.
                if series.is_nan() || series > major.value {
                    above += 1;
                }
                // The gap is second order in m^{-H} and can fall below double
                // precision, so strictness is decided in double-double.
                let (major_dd, _, _) = oracle::gap_upper(h, n, alpha);
                match oracle::gap_upper_series(h, n, alpha) {
                    Some(series_dd) => {
                        series_err = series_err.max(rel_err(series, series_dd.to_f64()));
                        let gap = ((major_dd - series_dd) / major_dd).to_f64();
                        if gap.is_nan() || gap <= 0.0 {
                            not_strict += 1;
                        }
                        min_rel_gap = min_rel_gap.min(gap);
                    }
                    None => not_strict += 1,
                }
            }
        }
    }
    CriterionReport::new(
        c,
        vec![
            Measurement::at_least("valid grid points", valid as f64, 1.0),
            Measurement::zero("points with series > majorant", above),
            Measurement::at_most("max rel err series vs oracle", series_err, ORACLE_REL_TOL),
            Measurement::zero("points without a strict gap (double-double)", not_strict),
        ],
    )
    .with_diagnostics(vec![Measurement::at_least("min relative gap (double-double)", min_rel_gap, 0.0)])
}

fn c06_sampler_law(c: &Criterion, cfg: &ValidationConfig) -> CriterionReport {
    let mut ms = Vec::new();
    let mut diag = Vec::new();
    for (i, &(h, n)) in [(0.2, 32u64), (0.3, 64), (0.5, 64)].iter().enumerate() {
        let mut maxima = Vec::new();
        for (j, method) in [SamplerMethod::Cholesky, SamplerMethod::Circulant].into_iter().enumerate() {
            let mc = cfg.mc(100_000, 600 + 10 * i as u64 + j as u64).with_method(method);
            let label = format!("H={h} n={n} {method}");
            match increment_variance_check(hp(h), n, &mc) {
                Ok(stats) => {
                    let outside = stats.iter().filter(|s| s.z_score().abs() > 4.0).count() as u64;
                    let worst = stats.iter().map(|s| s.z_score().abs()).fold(0.0, f64::max);
                    ms.push(Measurement::zero(format!("{label}: pairs beyond 4 SE"), outside));
                    diag.push(Measurement::at_most(format!("{label}: max |z|"), worst, 4.0));
                }
                Err(e) => ms.push(Measurement::flag(format!("{label}: {e}"), false)),
            }
            let mc = cfg.mc(100_000, 650 + 10 * i as u64 + j as u64).with_method(method);
            maxima.push(sample_maxima(hp(h), n, &mc).unwrap_or_default());
        }
        let ks = ks_two_sample(&maxima[0], &maxima[1]);
        ms.push(Measurement::at_least(format!("H={h} n={n}: KS p-value"), ks.p_value, 0.001));
        diag.push(Measurement::at_least(format!("H={h} n={n}: KS statistic"), ks.statistic, 0.0));
    }
    CriterionReport::new(c, ms).with_diagnostics(diag)
}

fn c07_brownian_calibration(c: &Criterion, cfg: &ValidationConfig) -> CriterionReport {
    let half = hp(0.5);
    let stated_limit = (std::f64::consts::PI / 2.0).sqrt();
    let mut ms = Vec::new();
    let mut diag = Vec::new();

    match estimate_mn(half, 1024, &cfg.mc(1_000_000, 700)) {
        Ok(e) => {
            let tol = 4.0 * e.std_err;
            ms.push(Measurement::within("M_1024 vs sqrt(pi/2) - beta/32", e.mean, stated_limit - SIEGMUND_BETA / 32.0, tol));
            diag.push(Measurement::within("M_1024 vs exact grid maximum", e.mean, oracle::brownian_grid_max(1024), tol));
            diag.push(Measurement::within(
                "M_1024 vs sqrt(2/pi) - beta/32",
                e.mean,
                oracle::brownian_max() - SIEGMUND_BETA / 32.0,
                tol,
            ));
        }
        Err(e) => ms.push(Measurement::flag(format!("estimate_mn: {e}"), false)),
    }
    match delta_proxy(half, 64, 4096, &cfg.mc(1_000_000, 701)) {
        Ok(p) => {
            let tol = 4.0 * p.se;
            ms.push(Measurement::within("proxy vs beta(64^-1/2 - 4096^-1/2)", p.proxy, SIEGMUND_BETA * (0.125 - 1.0 / 64.0), tol));
            diag.push(Measurement::within(
                "proxy vs exact M_4096 - M_64",
                p.proxy,
                oracle::brownian_grid_max(4096) - oracle::brownian_grid_max(64),
                tol,
            ));
        }
        Err(e) => ms.push(Measurement::flag(format!("delta_proxy: {e}"), false)),
    }
    CriterionReport::new(c, ms)
        .with_diagnostics(diag)
        .with_note("E max of Brownian motion on [0,1] is sqrt(2/pi) = 0.79788 (reflection principle), not sqrt(pi/2)")
        .with_note(format!(
            "the grid gap at H=1/2 is beta n^-1/2 + O(1/n), beta = {}; the first-order proxy target omits the O(1/n) term",
            oracle::BROWNIAN_GAP_COEFF
        ))
}

fn c08_refinement_increments(c: &Criterion, cfg: &ValidationConfig) -> CriterionReport {
    let mut ms = Vec::new();
    let mut diag = Vec::new();
    for (i, &(h, n, m)) in [(0.2, 8u64, 4u64), (0.3, 16, 4), (0.4, 16, 2)].iter().enumerate() {
        let label = format!("H={h} n={n} m={m}");
        match estimate_increment(hp(h), n, m, &cfg.mc(1_000_000, 800 + i as u64)) {
            Ok(e) => {
                ms.push(Measurement::at_most(
                    format!("{label}: diff_mean - 4 SE"),
                    e.diff_mean - 4.0 * e.diff_std_err,
                    e.chatterjee_rhs,
                ));
                ms.push(Measurement::zero(format!("{label}: paths with coarse > fine"), e.coupling_violations));
                diag.push(Measurement::at_least(format!("{label}: diff_mean"), e.diff_mean, 0.0));
            }
            Err(e) => ms.push(Measurement::flag(format!("{label}: {e}"), false)),
        }
    }
    CriterionReport::new(c, ms).with_diagnostics(diag)
}

fn c09_chatterjee(c: &Criterion, cfg: &ValidationConfig) -> CriterionReport {
    let h = hp(0.3);
    let cases = [
        ("N=12 refinement pair (H=0.3, n=3, m=4)", IncrementTable::fbm_grid(h, 12), IncrementTable::fbm_coarsened(h, 3, 4)),
        (
            "N=2 closed form",
            IncrementTable::new(2, vec![0.0, 2.0, 2.0, 0.0]).expect("valid table"),
            IncrementTable::zero(2),
        ),
    ];
    let mut ms = Vec::new();
    let mut diag = Vec::new();
    for (i, (label, dx, dy)) in cases.iter().enumerate() {
        match empirical_chatterjee(dx, dy, &cfg.mc(1_000_000, 900 + i as u64)) {
            Ok(r) => {
                ms.push(Measurement::at_most(format!("{label}: lhs - 4 SE"), r.lhs - 4.0 * r.lhs_se, r.rhs));
                if dx.dim() == 2 {
                    let tol = 4.0 * r.lhs_se;
                    diag.push(Measurement::within(format!("{label}: lhs vs 1/sqrt(pi)"), r.lhs, 1.0 / std::f64::consts::PI.sqrt(), tol));
                    diag.push(Measurement::within(format!("{label}: rhs"), r.rhs, (2.0 * 2f64.ln()).sqrt(), 1e-12));
                }
            }
            Err(e) => ms.push(Measurement::flag(format!("{label}: {e}"), false)),
        }
    }
    CriterionReport::new(c, ms).with_diagnostics(diag)
}

fn c10_iid_normals(c: &Criterion, cfg: &ValidationConfig) -> CriterionReport {
    let mut ms = Vec::new();
    for &n in &[1u64, 2, 10, 100] {
        match estimate_max_iid_normals(n, &cfg.mc(1_000_000, 1000 + n)) {
            Ok(r) => {
                let tol = 4.0 * r.estimate.std_err;
                ms.push(Measurement::within(format!("n={n}: mean vs quadrature"), r.estimate.mean, oracle::iid_normal_max(n), tol));
                ms.push(Measurement::at_most(format!("n={n}: mean vs sqrt(2 ln n) + 4 SE"), r.estimate.mean, r.bound + tol));
            }
            Err(e) => ms.push(Measurement::flag(format!("n={n}: {e}"), false)),
        }
    }
    CriterionReport::new(c, ms)
}

/// `α` for criterion 11; any `α ≥ α*` keeps the lower bound admissible on the same range.
pub const DOMINANCE_ALPHA: f64 = 8.0;

fn c11_upper_dominance(c: &Criterion, cfg: &ValidationConfig) -> CriterionReport {
    let mut ms = Vec::new();
    let mut diag = Vec::new();
    let a_star = alpha_star(1e-10).unwrap_or(f64::NAN);
    ms.push(Measurement::at_least("alpha - alpha*", DOMINANCE_ALPHA - a_star, 0.0));
    for (i, &(h, n)) in [(0.2, 16u64), (0.3, 16), (0.4, 32)].iter().enumerate() {
        let label = format!("H={h} n={n}");
        let bound = match delta_upper(hp(h), n, DOMINANCE_ALPHA) {
            Ok(b) => b,
            Err(e) => {
                ms.push(Measurement::flag(format!("{label}: {e}"), false));
                continue;
            }
        };
        ms.push(Measurement::flag(format!("{label}: bound conditions hold"), bound.valid));
        match delta_proxy(hp(h), n, 64 * n, &cfg.mc(1_000_000, 1100 + i as u64)) {
            Ok(p) => {
                ms.push(Measurement::at_most(format!("{label}: proxy"), p.proxy, bound.value + 4.0 * p.se));
                diag.push(Measurement::at_least(format!("{label}: proxy"), p.proxy, 0.0));
            }
            Err(e) => ms.push(Measurement::flag(format!("{label}: {e}"), false)),
        }
    }
    CriterionReport::new(c, ms).with_diagnostics(diag)
}

fn c12_monotonicity(c: &Criterion, cfg: &ValidationConfig) -> CriterionReport {
    let hs = [0.1, 0.2, 0.3, 0.4, 0.5];
    let sizes: Vec<u64> = (0..=8).map(|k| 1u64 << k).collect();
    let mut ms = Vec::new();
    let mut diag = Vec::new();
    for (i, &h) in hs.iter().enumerate() {
        match estimate_nested_maxima(hp(h), &sizes, &cfg.mc(100_000, 1200 + i as u64)) {
            Ok(r) => {
                ms.push(Measurement::zero(format!("H={h}: per-path decreases over nested grids"), r.monotonicity_violations));
                let drops = r.estimates.windows(2).filter(|w| w[1].mean < w[0].mean).count() as u64;
                diag.push(Measurement::zero(format!("H={h}: mean decreases over nested grids"), drops));
            }
            Err(e) => ms.push(Measurement::flag(format!("H={h}: {e}"), false)),
        }
    }
    // One seed for every H: the paths share their driving noise.
    let shared = cfg.mc(1_000_000, 1250);
    let est: Vec<_> = hs.iter().map(|&h| estimate_mn(hp(h), 256, &shared)).collect();
    for (k, w) in est.windows(2).enumerate() {
        match (&w[0], &w[1]) {
            (Ok(a), Ok(b)) => {
                let se = a.std_err.hypot(b.std_err);
                ms.push(Measurement::at_most(
                    format!("M_256 at H={} minus H={} - 4 SE", hs[k + 1], hs[k]),
                    b.mean - a.mean - 4.0 * se,
                    0.0,
                ));
            }
            _ => ms.push(Measurement::flag(format!("estimate_mn at H={} or {}", hs[k], hs[k + 1]), false)),
        }
    }
    CriterionReport::new(c, ms).with_diagnostics(diag)
}

/// Estimator output serialized exactly as the command-line tool writes it.
fn determinism_artifacts(cfg: &ValidationConfig, threads: usize) -> Result<(Vec<u8>, Vec<u8>), String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
    pool.install(|| {
        let mc = cfg.mc(200_000, 1300);
        let h = hp(0.35);
        let inc = estimate_increment(h, 16, 4, &mc).map_err(|e| e.to_string())?;
        let mn = estimate_mn(h, 100, &mc).map_err(|e| e.to_string())?;
        let meta = RunMeta::new("validate determinism", &mc).map_err(|e| e.to_string())?;
        let json = json_document(&meta, &(inc, mn)).map_err(|e| e.to_string())?;
        let rows = [EstimateRow::from_estimate(Some(0.35), 100, "mn", &mn)];
        let csv = estimates_table(&rows).to_bytes(&meta).map_err(|e| e.to_string())?;
        Ok((json, csv))
    })
}

fn c13_determinism(c: &Criterion, cfg: &ValidationConfig) -> CriterionReport {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return CriterionReport::new(c, vec![Measurement::flag(format!("temp dir: {e}"), false)]),
    };
    let mut files = Vec::new();
    let mut ms = Vec::new();
    for threads in [1usize, 4] {
        match determinism_artifacts(cfg, threads) {
            Ok((json, csv)) => {
                let pj = dir.path().join(format!("estimate_{threads}.json"));
                let pc = dir.path().join(format!("estimate_{threads}.csv"));
                let written = std::fs::write(&pj, json).and_then(|_| std::fs::write(&pc, csv));
                if let Err(e) = written {
                    ms.push(Measurement::flag(format!("write outputs: {e}"), false));
                }
                files.push((pj, pc));
            }
            Err(e) => ms.push(Measurement::flag(format!("{threads} workers: {e}"), false)),
        }
    }
    if files.len() == 2 {
        let read = |p: &std::path::Path| std::fs::read(p).unwrap_or_default();
        let json_same = read(&files[0].0) == read(&files[1].0) && !read(&files[0].0).is_empty();
        let csv_same = read(&files[0].1) == read(&files[1].1) && !read(&files[0].1).is_empty();
        ms.push(Measurement::flag("JSON identical at 1 and 4 workers", json_same));
        ms.push(Measurement::flag("CSV identical at 1 and 4 workers", csv_same));
    }
    CriterionReport::new(c, ms)
}
