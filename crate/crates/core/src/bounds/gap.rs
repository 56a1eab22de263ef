//! Bounds on the discretization gap `Δₙ = Mᴴ − Mₙᴴ`.

use serde::{Deserialize, Serialize};

use super::{l_constant, BoundKind, BoundReport, Condition};
use crate::error::{precondition, FbmError, Result};
use crate::process::HurstParam;

/// Bisection bracket for [`alpha_star`].
pub const ALPHA_STAR_BRACKET: (f64, f64) = (0.1, 100.0);
pub const ALPHA_STAR_MAX_ITER: usize = 200;

/// Interval quoted in the literature for `H = 0.01, α = 16`; it does not follow
/// from `L = 1/√(4πe ln 2)` and is carried only as an annotation.
pub const REPORTED_INTERVAL_H001_A16: (f64, f64) = (7.534, 20.085);

const SERIES_MAX_TERMS: usize = 50_000_000;

/// `m = ⌊n^α⌋`, snapping to the nearest integer when `n^α` is within a few ulps of it.
pub fn coarsening_factor(n: u64, alpha: f64) -> f64 {
    let x = (n as f64).powf(alpha);
    let r = x.round();
    if (x - r).abs() <= 4.0 * f64::EPSILON * x {
        r
    } else {
        x.floor()
    }
}

/// `1 + α/(1 + α)`, the ratio of the geometric majorant of `(1 + α + αk)^{1/2}`.
#[inline]
fn growth(alpha: f64) -> f64 {
    1.0 + alpha / (1.0 + alpha)
}

/// `n^{-H} (ln n)^{1/2}`, the common normalization of the gap bounds.
#[inline]
fn rate(h: f64, n: f64) -> f64 {
    n.powf(-h) * n.ln().sqrt()
}

/// Earlier bound `Δₙ ≤ 2(ln n)^{1/2} n^{-H} (1 + 4n^{-H} + 0.0074 (ln n)^{-3/2})`
/// for `n ≥ 2^{1/H}`.
pub fn delta_upper_old(h: HurstParam, n: u64) -> BoundReport {
    let hv = h.get();
    let nf = n as f64;
    let ln_n = nf.ln();
    let n_h = nf.powf(-hv);
    let value = 2.0 * ln_n.sqrt() * n_h * (1.0 + 4.0 * n_h + 0.0074 / ln_n.powf(1.5));
    let report = BoundReport::new(
        BoundKind::GapUpperPrior,
        value,
        vec![Condition::at_least("n >= 2^(1/H)", nf, (1.0 / hv).exp2())],
    );
    if hv >= 0.5 {
        report.with_warning("bound is stated for H < 1/2")
    } else {
        report
    }
}

fn upper_conditions(h: f64, nf: f64, alpha: f64, denominator: f64) -> Vec<Condition> {
    vec![
        Condition::at_most("H <= 1/2", h, 0.5),
        Condition::at_least("n >= 2^(1/alpha)", nf, (1.0 / alpha).exp2()),
        Condition::at_least(
            "n >= (1+alpha/(1+alpha))^(1/(2 alpha H))",
            nf,
            growth(alpha).powf(1.0 / (2.0 * alpha * h)),
        ),
        Condition::greater("denominator > 0", denominator, 0.0),
    ]
}

/// Upper bound on `Δₙ` with `m = ⌊n^α⌋`:
///
/// `Δₙ ≤ n^{-H}(ln n)^{1/2} (1 − 1/m)^H (1+α)^{1/2} / (1 − m^{-H}(1 + α/(1+α))^{1/2})`.
///
/// The denominator is checked separately: `n ≥ (1+α/(1+α))^{1/(2αH)}` bounds
/// `n^α`, not `⌊n^α⌋`, so for non-integer `n^α` it does not imply positivity.
pub fn delta_upper(h: HurstParam, n: u64, alpha: f64) -> Result<BoundReport> {
    precondition(alpha > 0.0 && alpha.is_finite(), || format!("alpha must be positive, got {alpha}"))?;
    let hv = h.get();
    let nf = n as f64;
    let m = coarsening_factor(n, alpha);
    let denominator = 1.0 - m.powf(-hv) * growth(alpha).sqrt();
    let value = rate(hv, nf) * (1.0 - 1.0 / m).powf(hv) * (1.0 + alpha).sqrt() / denominator;
    Ok(BoundReport::new(BoundKind::GapUpper, value, upper_conditions(hv, nf, alpha, denominator))
        .with_parameter("m", m))
}

/// The same bound with `Σ_{k≥0} (1+α+αk)^{1/2} m^{-kH}` summed directly instead
/// of its geometric majorant. Summation stops once a certified bound on the
/// remaining tail falls below `tol` times the partial sum.
pub fn delta_upper_lerch(h: HurstParam, n: u64, alpha: f64, tol: f64) -> Result<BoundReport> {
    precondition(alpha > 0.0 && alpha.is_finite(), || format!("alpha must be positive, got {alpha}"))?;
    precondition(tol > 0.0, || format!("tol must be positive, got {tol}"))?;
    let hv = h.get();
    let nf = n as f64;
    let m = coarsening_factor(n, alpha);
    let z = m.powf(-hv);
    let denominator = 1.0 - z * growth(alpha).sqrt();
    let conditions = upper_conditions(hv, nf, alpha, denominator);

    if z >= 1.0 {
        // m ≤ 1: the series diverges.
        return Ok(BoundReport::new(BoundKind::GapUpperSeries, f64::NAN, conditions)
            .with_parameter("m", m)
            .with_warning("series diverges for m < 2"));
    }
    let (sum, terms, tail) = lerch_series(alpha, z, tol)?;
    let value = rate(hv, nf) * (1.0 - 1.0 / m).powf(hv) * sum;
    Ok(BoundReport::new(BoundKind::GapUpperSeries, value, conditions)
        .with_parameter("m", m)
        .with_parameter("terms", terms as f64)
        .with_parameter("tail_bound", tail))
}

/// `Σ_{k≥0} (1+α+αk)^{1/2} z^k` for `0 ≤ z < 1`: returns (partial sum, terms, tail bound).
fn lerch_series(alpha: f64, z: f64, tol: f64) -> Result<(f64, usize, f64)> {
    let term = |k: usize| (1.0 + alpha + alpha * k as f64).sqrt() * z.powi(k as i32);
    let r = z * growth(alpha).sqrt();
    let head = (1.0 + alpha).sqrt();
    let mut sum = 0.0;
    let mut zk = 1.0;
    for k in 0..SERIES_MAX_TERMS {
        sum += (1.0 + alpha + alpha * k as f64).sqrt() * zk;
        zk *= z;
        // Bound on Σ_{j>k} terms.
        let tail = if r < 1.0 {
            head * r.powi(k as i32 + 1) / (1.0 - r)
        } else {
            // Term ratios decrease towards z; the ratio at j = k+1 bounds all later ones.
            let j = (k + 1) as f64;
            let ratio = z * ((1.0 + alpha + alpha * (j + 1.0)) / (1.0 + alpha + alpha * j)).sqrt();
            if ratio < 1.0 {
                term(k + 1) / (1.0 - ratio)
            } else {
                f64::INFINITY
            }
        };
        if tail < tol * sum || zk == 0.0 {
            return Ok((sum, k + 1, tail));
        }
    }
    Err(FbmError::Internal(format!("series with z = {z} did not converge")))
}

/// Lower bound `Δₙ ≥ (ln n)^{1/2} (L/(H ln n)^{1/2} − 1)⁺`, valid for all `H ∈ (0, 1)`, `n ≥ 2`.
pub fn delta_lower(h: HurstParam, n: u64) -> Result<BoundReport> {
    precondition(n >= 2, || format!("lower bound needs n >= 2, got {n}"))?;
    let hv = h.get();
    let l = l_constant();
    let ln_n = (n as f64).ln();
    let value = if hv * ln_n >= l * l {
        0.0
    } else {
        ln_n.sqrt() * (l / (hv * ln_n).sqrt() - 1.0)
    };
    Ok(BoundReport::new(
        BoundKind::GapLower,
        value,
        vec![Condition::less("H < 1", hv, 1.0), Condition::at_least("n >= 2", n as f64, 2.0)],
    ))
}

/// `q(α) = (1 + α/(1+α))^{1/α}`, strictly decreasing from `e` to 1 on `(0, ∞)`.
fn validity_ratio(alpha: f64) -> f64 {
    (growth(alpha).ln() / alpha).exp()
}

/// Root `α*` of `(1 + α/(1+α))^{1/α} = exp(2L²)` by bisection on [`ALPHA_STAR_BRACKET`].
pub fn alpha_star(tol: f64) -> Result<f64> {
    precondition(tol > 0.0, || format!("tol must be positive, got {tol}"))?;
    let target = (2.0 * l_constant().powi(2)).exp();
    let g = |a: f64| validity_ratio(a) - target;
    let (mut lo, mut hi) = ALPHA_STAR_BRACKET;
    if !(g(lo) > 0.0 && g(hi) < 0.0) {
        return Err(FbmError::Internal("alpha* is not bracketed".into()));
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..ALPHA_STAR_MAX_ITER {
        mid = 0.5 * (lo + hi);
        let v = g(mid);
        if v.abs() < tol && hi - lo < tol {
            break;
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Range of `n` on which both gap bounds hold and the lower one is non-trivial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityRegion {
    pub h: f64,
    pub alpha: f64,
    /// `max(2^{1/α}, (1 + α/(1+α))^{1/(2αH)})`.
    pub n_lower: f64,
    /// `exp(L²/H)`.
    pub n_upper: f64,
    /// Inclusive range of the integers strictly inside `(n_lower, n_upper)`.
    pub feasible: Option<(u64, u64)>,
}

impl ValidityRegion {
    pub fn feasible_count(&self) -> u64 {
        self.feasible.map_or(0, |(a, b)| b - a + 1)
    }

    pub fn feasible_integers(&self) -> Vec<u64> {
        self.feasible.map_or_else(Vec::new, |(a, b)| (a..=b).collect())
    }
}

pub fn validity_region(h: HurstParam, alpha: f64) -> Result<ValidityRegion> {
    let hv = h.get();
    precondition(hv < 0.5, || format!("validity region needs H < 1/2, got {hv}"))?;
    precondition(alpha > 0.0 && alpha.is_finite(), || format!("alpha must be positive, got {alpha}"))?;
    let n_lower = (1.0 / alpha).exp2().max(growth(alpha).powf(1.0 / (2.0 * alpha * hv)));
    let n_upper = (l_constant().powi(2) / hv).exp();
    let first = n_lower.floor() + 1.0;
    let last = n_upper.ceil() - 1.0;
    let feasible = (first <= last && last < u64::MAX as f64).then_some((first as u64, last as u64));
    Ok(ValidityRegion { h: hv, alpha, n_lower, n_upper, feasible })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(h: f64) -> HurstParam {
        HurstParam::new(h).unwrap()
    }

    #[test]
    fn old_bound_threshold() {
        assert!(!delta_upper_old(hp(0.25), 15).valid);
        assert!(delta_upper_old(hp(0.25), 16).valid);
        let r = delta_upper_old(hp(0.5), 4);
        assert!(r.valid);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn upper_bound_examples() {
        let r = delta_upper(hp(0.25), 16, 2.0).unwrap();
        assert!(r.valid);
        assert_eq!(r.parameter("m"), Some(256.0));
        assert!((r.value - 2.1272).abs() < 1e-3, "{}", r.value);

        let r = delta_upper(hp(0.01), 8, 16.0).unwrap();
        assert!(r.valid, "{:?}", r.failed_conditions());

        let r = delta_upper(hp(0.25), 1, 3.0).unwrap();
        assert!(!r.valid);
        assert!(delta_upper(hp(0.25), 16, 0.0).is_err());
    }

    // n ≥ (1+α/(1+α))^{1/(2αH)} holds but ⌊n^α⌋ is too small for the series
    // majorant to converge; the explicit denominator check catches it.
    #[test]
    fn floor_can_break_the_denominator() {
        let r = delta_upper(hp(0.1), 18, 0.5).unwrap();
        assert_eq!(r.parameter("m"), Some(4.0));
        let failed = r.failed_conditions();
        assert_eq!(failed, vec!["denominator > 0"]);
        assert!(!r.valid);
    }

    #[test]
    fn series_below_majorant() {
        let closed = delta_upper(hp(0.25), 16, 2.0).unwrap();
        let series = delta_upper_lerch(hp(0.25), 16, 2.0, 1e-14).unwrap();
        assert!(series.valid);
        assert!(series.value < closed.value);
    }

    #[test]
    fn series_truncation_is_stable() {
        let a = delta_upper_lerch(hp(0.3), 32, 2.0, 1e-14).unwrap().value;
        let b = delta_upper_lerch(hp(0.3), 32, 2.0, 1e-6).unwrap().value;
        assert!(((a - b) / a).abs() < 1e-5);
    }

    #[test]
    fn series_vanishing_ratio_keeps_first_term() {
        // m = 1024^8 = 2^80, z = 2^-36: every term past k = 0 is negligible.
        let r = delta_upper_lerch(hp(0.45), 1024, 8.0, 1e-16).unwrap();
        let m: f64 = 2f64.powi(80);
        let first = 1024f64.powf(-0.45) * 1024f64.ln().sqrt() * (1.0 - 1.0 / m).powf(0.45) * 3.0;
        assert!(((r.value - first) / first).abs() < 1e-10);
    }

    #[test]
    fn series_converges_when_majorant_does_not() {
        let r = delta_upper_lerch(hp(0.1), 18, 0.5, 1e-12).unwrap();
        assert!(r.value.is_finite() && r.value > 0.0);
        assert!(!r.valid);
        let r = delta_upper_lerch(hp(0.3), 1, 2.0, 1e-12).unwrap();
        assert!(r.value.is_nan() && !r.valid);
    }

    #[test]
    fn lower_bound_examples() {
        let l = l_constant();
        let r = delta_lower(hp(0.01), 8).unwrap();
        let expected = 8f64.ln().sqrt() * (l / (0.01 * 8f64.ln()).sqrt() - 1.0);
        assert_eq!(r.value, expected);
        assert!((r.value - 0.6132).abs() < 1e-3);
        assert_eq!(delta_lower(hp(0.5), 2).unwrap().value, 0.0);
        let n_cut = (l * l / 0.02).exp().ceil() as u64;
        assert_eq!(n_cut, 9);
        assert_eq!(delta_lower(hp(0.02), n_cut).unwrap().value, 0.0);
        assert!(delta_lower(hp(0.02), n_cut - 1).unwrap().value > 0.0);
        assert!(delta_lower(hp(0.2), 1).is_err());
        assert!(!delta_lower(hp(1.0), 4).unwrap().valid);
    }

    #[test]
    fn alpha_star_root() {
        let a = alpha_star(1e-10).unwrap();
        assert!((a - 7.48704).abs() < 1e-4, "{a}");
        let target = (2.0 * l_constant().powi(2)).exp();
        assert!((validity_ratio(a) - target).abs() < 1e-9);
        assert!(validity_ratio(1.0) > target && target > validity_ratio(100.0));
        assert_eq!(validity_ratio(1.0), 1.5);
        assert!(alpha_star(0.0).is_err());
    }

    #[test]
    fn validity_region_examples() {
        let r = validity_region(hp(0.01), 16.0).unwrap();
        assert!((r.n_lower - 7.95).abs() < 0.01, "{}", r.n_lower);
        assert!((r.n_upper - 68.3).abs() < 0.1, "{}", r.n_upper);
        assert_eq!(r.feasible, Some((8, 68)));
        assert_eq!(r.feasible_count(), 61);

        let r = validity_region(hp(0.3), 8.0).unwrap();
        assert!((r.n_lower - 1.1417).abs() < 1e-3 && (r.n_upper - 1.1512).abs() < 1e-3);
        assert!(r.feasible_integers().is_empty());

        // The interval closes at α = α*, H = α* L²/ln 2.
        let a = alpha_star(1e-12).unwrap();
        let h_edge = a * l_constant().powi(2) / std::f64::consts::LN_2;
        let r = validity_region(hp(h_edge * (1.0 - 1e-9)), a).unwrap();
        assert!(((r.n_upper - r.n_lower) / r.n_upper).abs() < 1e-6);

        assert!(validity_region(hp(0.5), 8.0).is_err());
    }
}
