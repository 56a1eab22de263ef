//! Bounds on `E f(max B) − E f(max over the grid)` for nondecreasing `f ≥ 0`.
//!
//! All of them involve the exact `Mᴴ`, which is unknown for `H ≠ 1/2`; callers
//! pass a surrogate explicitly and the report records it. Substituting an upper
//! bound for `Mᴴ` is not known to preserve the inequality.

use super::{BoundKind, BoundReport, Condition};
use crate::error::{precondition, Result};
use crate::process::HurstParam;
use crate::quad::integrate_tail;

/// Inputs shared by the functional gap bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSetup {
    pub h: HurstParam,
    pub n: u64,
    /// The gap `Δₙᴴ` (or a bound on it, e.g. from [`delta_upper`](super::delta_upper)).
    pub delta: f64,
    /// Value used in place of `Mᴴ`.
    pub mh_surrogate: f64,
}

impl GapSetup {
    /// `|2 ln δ|^{1/2}`.
    fn log_scale(&self) -> f64 {
        (2.0 * self.delta.ln()).abs().sqrt()
    }

    fn annotate(&self, report: BoundReport) -> BoundReport {
        report
            .with_parameter("h", self.h.get())
            .with_parameter("n", self.n as f64)
            .with_parameter("delta", self.delta)
            .with_parameter("mh_surrogate", self.mh_surrogate)
            .with_warning(format!("M^H replaced by the surrogate {}", self.mh_surrogate))
    }
}

/// Threshold `M = Mᴴ + a + |2 ln δ|^{1/2}` balancing the two terms for `f = e^{ax}`.
pub fn exp_threshold(setup: &GapSetup, a: f64) -> f64 {
    setup.mh_surrogate + a + setup.log_scale()
}

/// Threshold `M = Mᴴ + |2 ln δ|^{1/2}` used for `f = x^p`.
pub fn pow_threshold(setup: &GapSetup) -> f64 {
    setup.mh_surrogate + setup.log_scale()
}

/// `ω_{δ,M}(f) + ∫_M^∞ f(x)(x − Mᴴ) exp(−(x − Mᴴ)²/2) dx`, the tail integral
/// evaluated numerically to relative tolerance `quad_tol`.
///
/// `modulus(δ, M)` must return the continuity modulus of `f` on `[0, M]` at step `δ`.
/// `f` must satisfy `f(x) = o(exp((x − Mᴴ)²/2))`.
pub fn delta_f_generic(
    setup: &GapSetup,
    threshold: f64,
    f: impl Fn(f64) -> f64,
    modulus: impl Fn(f64, f64) -> f64,
    quad_tol: f64,
) -> Result<BoundReport> {
    let mu = setup.mh_surrogate;
    precondition(setup.delta > 0.0 && setup.delta.is_finite(), || {
        format!("delta must be positive and finite, got {}", setup.delta)
    })?;
    precondition(threshold > mu, || {
        format!("threshold {threshold} must exceed the M^H surrogate {mu}")
    })?;
    precondition(quad_tol > 0.0, || format!("quad_tol must be positive, got {quad_tol}"))?;
    let tail = integrate_tail(
        |x| {
            let y = x - mu;
            f(x) * y * (-0.5 * y * y).exp()
        },
        threshold,
        quad_tol,
    )?;
    let omega = modulus(setup.delta, threshold);
    let report = BoundReport::new(
        BoundKind::FunctionalGap,
        omega + tail.value,
        vec![Condition::greater("M > M^H surrogate", threshold, mu)],
    )
    .with_parameter("threshold", threshold)
    .with_parameter("modulus", omega)
    .with_parameter("tail", tail.value);
    Ok(setup.annotate(report))
}

/// Closed form for `f(x) = e^{ax}`:
/// `e^{aMᴴ + a²/2} (1 + e^{a²/2 + a|2 ln δ|^{1/2}} + a/|2 ln δ|^{1/2}) δ`.
pub fn delta_f_exp(setup: &GapSetup, a: f64) -> Result<BoundReport> {
    precondition(a > 0.0, || format!("a must be positive, got {a}"))?;
    let delta = setup.delta;
    precondition(delta > 0.0 && delta < 1.0, || format!("delta must lie in (0, 1), got {delta}"))?;
    let s = setup.log_scale();
    let half_a2 = 0.5 * a * a;
    let value = (a * setup.mh_surrogate + half_a2).exp() * (1.0 + (half_a2 + a * s).exp() + a / s) * delta;
    let report = BoundReport::new(
        BoundKind::FunctionalGap,
        value,
        vec![Condition::less("delta < 1", delta, 1.0)],
    )
    .with_parameter("a", a)
    .with_parameter("threshold", exp_threshold(setup, a));
    Ok(setup.annotate(report))
}

/// Closed form for `f(x) = x^p`, `p ≥ 1`, valid for `δ < e^{−p/2}`:
/// `(Mᴴ + |2 ln δ|^{1/2})^{p−1} (p + (Mᴴ + |2 ln δ|^{1/2})/(1 − p|2 ln δ|^{−1})) δ`.
pub fn delta_f_pow(setup: &GapSetup, p: f64) -> Result<BoundReport> {
    precondition(p >= 1.0, || format!("p must be at least 1, got {p}"))?;
    let delta = setup.delta;
    let cap = (-0.5 * p).exp();
    precondition(delta > 0.0 && delta < cap, || {
        format!("delta must lie in (0, e^(-p/2)) = (0, {cap}), got {delta}")
    })?;
    let s2 = (2.0 * delta.ln()).abs();
    let big_m = pow_threshold(setup);
    let value = big_m.powf(p - 1.0) * (p + big_m / (1.0 - p / s2)) * delta;
    let report = BoundReport::new(
        BoundKind::FunctionalGap,
        value,
        vec![Condition::less("delta < e^(-p/2)", delta, cap)],
    )
    .with_parameter("p", p)
    .with_parameter("threshold", big_m);
    Ok(setup.annotate(report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(delta: f64, mu: f64) -> GapSetup {
        GapSetup { h: HurstParam::new(0.25).unwrap(), n: 16, delta, mh_surrogate: mu }
    }

    #[test]
    fn constant_function_has_gaussian_tail() {
        let s = setup(0.01, 1.2);
        let c = 3.5;
        let m = 2.7;
        let r = delta_f_generic(&s, m, |_| c, |_, _| 0.0, 1e-12).unwrap();
        let expected = c * (-0.5 * (m - 1.2f64).powi(2)).exp();
        assert!(((r.value - expected) / expected).abs() < 1e-10);
        assert_eq!(r.parameter("mh_surrogate"), Some(1.2));
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn generic_preconditions() {
        let s = setup(0.01, 1.2);
        assert!(delta_f_generic(&s, 1.0, |_| 1.0, |_, _| 0.0, 1e-10).is_err());
        assert!(delta_f_generic(&setup(0.0, 1.2), 2.0, |_| 1.0, |_, _| 0.0, 1e-10).is_err());
    }

    #[test]
    fn exp_examples() {
        let r = delta_f_exp(&setup((-2.0f64).exp(), 1.0), 1.0).unwrap();
        let expected = 1.5f64.exp() * (1.0 + 2.5f64.exp() + 0.5) * (-2.0f64).exp();
        assert!((r.value - expected).abs() < 1e-12);
        assert!((r.value - 8.2989).abs() < 1e-3, "{}", r.value);

        // a → 0⁺: bracket → 2.
        let d = 0.05;
        let r = delta_f_exp(&setup(d, 1.0), 1e-9).unwrap();
        assert!((r.value / d - 2.0).abs() < 1e-6);

        assert!(delta_f_exp(&setup(1.0, 1.0), 1.0).is_err());
        assert!(delta_f_exp(&setup(0.5, 1.0), 0.0).is_err());
    }

    #[test]
    fn exp_monotone_in_delta() {
        let mut prev = 0.0;
        for k in 1..=50 {
            let d = (-1.0f64).exp() * k as f64 / 50.0;
            let v = delta_f_exp(&setup(d, 0.8), 0.7).unwrap().value;
            assert!(v > prev, "k={k}");
            prev = v;
        }
    }

    // The generic quadrature at the balancing threshold never exceeds the
    // Mills-ratio closed form, and the modulus terms coincide exactly.
    #[test]
    fn exp_generic_below_closed_form() {
        for &(a, d, mu) in &[(1.0, 0.01, 1.0), (0.3, 1e-4, 2.0), (2.0, 0.2, 0.5)] {
            let s = setup(d, mu);
            let m = exp_threshold(&s, a);
            let generic = delta_f_generic(&s, m, |x| (a * x).exp(), |dl, mm| (a * mm).exp() * dl, 1e-12).unwrap();
            let closed = delta_f_exp(&s, a).unwrap();
            assert!(generic.value <= closed.value * (1.0 + 1e-12), "a={a} d={d}");
            let sc = (2.0 * d.ln()).abs().sqrt();
            let modulus_closed = (a * mu + 0.5 * a * a).exp() * (0.5 * a * a + a * sc).exp() * d;
            let omega = generic.parameter("modulus").unwrap();
            assert!(((omega - modulus_closed) / omega).abs() < 1e-12);
        }
    }

    #[test]
    fn pow_examples() {
        let d = (-4.0f64).exp();
        let r = delta_f_pow(&setup(d, 1.5), 2.0).unwrap();
        let m = 1.5 + 8f64.sqrt();
        let expected = m * (2.0 + m / 0.75) * d;
        assert!((r.value - expected).abs() < 1e-14);
        assert!((r.value - 0.61609).abs() < 1e-5, "{}", r.value);

        // p = 1: leading power is 1.
        let d = 0.1;
        let r = delta_f_pow(&setup(d, 1.0), 1.0).unwrap();
        let s2 = (2.0 * d.ln()).abs();
        assert!((r.value - (1.0 + (1.0 + s2.sqrt()) / (1.0 - 1.0 / s2)) * d).abs() < 1e-14);

        assert!(delta_f_pow(&setup((-1.0f64).exp(), 1.0), 2.0).is_err());
        assert!(delta_f_pow(&setup(0.01, 1.0), 0.5).is_err());
    }

    #[test]
    fn pow_generic_below_closed_form() {
        for &(p, d, mu) in &[(1.0, 0.05, 1.0), (2.0, 0.01, 1.5), (3.5, 1e-3, 0.7)] {
            let s = setup(d, mu);
            let m = pow_threshold(&s);
            let f = |x: f64| x.max(0.0).powf(p);
            let generic = delta_f_generic(&s, m, f, |dl, mm| p * mm.powf(p - 1.0) * dl, 1e-12).unwrap();
            let closed = delta_f_pow(&s, p).unwrap();
            assert!(generic.value <= closed.value, "p={p}: {} > {}", generic.value, closed.value);
        }
    }
}
