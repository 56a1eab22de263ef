//! Bounds on `Mᴴ`, on `Mₙᴴ`, and on Pickands' constant.

use serde::{Deserialize, Serialize};

use super::{l_constant, BoundKind, BoundReport, Condition, MH_UPPER_COEFF, PICKANDS_BASE};
use crate::error::{precondition, Result};
use crate::process::HurstParam;

/// `Mₙᴴ ≤ ((1 − n^{-2H}) ln n)^{1/2}`, from comparing the grid values with a zero vector.
pub fn mn_upper(h: HurstParam, n: u64) -> Result<BoundReport> {
    precondition(n >= 1, || "grid size must be at least 1".into())?;
    let nf = n as f64;
    let value = ((1.0 - nf.powf(-h.two_h())) * nf.ln()).sqrt();
    Ok(BoundReport::new(BoundKind::MnUpper, value, vec![]))
}

/// `Mᴴ ≥ L H^{-1/2}`.
pub fn mh_lower(h: HurstParam) -> f64 {
    l_constant() / h.get().sqrt()
}

pub fn mh_lower_report(h: HurstParam) -> BoundReport {
    BoundReport::new(
        BoundKind::MhLower,
        mh_lower(h),
        vec![Condition::less("H < 1", h.get(), 1.0)],
    )
}

/// `Mᴴ < 1.695 H^{-1/2}` when `2^{2/H}` is an integer.
///
/// Otherwise `H` is replaced by the largest `H̃ < H` with `2^{2/H̃}` integer,
/// `H̃ = 2/log₂⌈2^{2/H}⌉`, which is admissible because `Mᴴ` is non-increasing in `H`.
/// `2^{2/H}` counts as an integer within a relative distance of `1e-9`.
pub fn mh_upper(h: HurstParam) -> BoundReport {
    let hv = h.get();
    let x = (2.0 / hv).exp2();
    // Beyond 2^53 every double is an integer; overflow is treated the same way.
    let integral = !x.is_finite() || x >= 9.007_199_254_740_992e15 || (x - x.round()).abs() <= 1e-9 * x;
    let effective = if integral { hv } else { 2.0 / x.ceil().log2() };
    let power = (2.0 / effective).exp2();
    let mut report = BoundReport::new(
        BoundKind::MhUpper,
        MH_UPPER_COEFF / effective.sqrt(),
        vec![
            Condition::at_most("H <= 1/2", hv, 0.5),
            Condition {
                name: "2^(2/H_eff) integer".into(),
                required: power.round(),
                actual: power,
                satisfied: !power.is_finite() || (power - power.round()).abs() <= 1e-9 * power,
            },
        ],
    )
    .with_parameter("h_effective", effective);
    if !integral {
        report = report.with_warning(format!(
            "2^(2/H) = {x} is not an integer; substituted H~ = {effective}"
        ));
    }
    report
}

/// The bracket behind the `1.695` coefficient:
/// `n^{-H}(1+α)^{1/2}/(1 − m^{-H}(1+α/(1+α))^{1/2}) + (1 − n^{-2H})^{1/2}` with `m = n^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MhDerivation {
    pub h: f64,
    pub alpha: f64,
    pub ln_n: f64,
    pub bracket: f64,
    /// `bracket · (ln n)^{1/2}`, an upper bound on `Mᴴ`.
    pub bound: f64,
    /// `bound · H^{1/2}`, the coefficient of `H^{-1/2}`.
    pub coefficient: f64,
}

/// Evaluates the bracket for a grid of size `n = exp(ln_n)` (passed in log form
/// since `4^{1/H}` overflows for small `H`).
pub fn mh_upper_derivation(h: HurstParam, alpha: f64, ln_n: f64) -> Result<MhDerivation> {
    precondition(alpha > 0.0, || format!("alpha must be positive, got {alpha}"))?;
    precondition(ln_n > 0.0, || format!("need n > 1, got ln n = {ln_n}"))?;
    let hv = h.get();
    let n_h = (-hv * ln_n).exp();
    let m_h = (-alpha * hv * ln_n).exp();
    let bracket = n_h * (1.0 + alpha).sqrt() / (1.0 - m_h * (1.0 + alpha / (1.0 + alpha)).sqrt())
        + (1.0 - n_h * n_h).sqrt();
    let bound = bracket * ln_n.sqrt();
    Ok(MhDerivation { h: hv, alpha, ln_n, bracket, bound, coefficient: bound * hv.sqrt() })
}

/// The choice `n = 4^{1/H}`, `α = 2` that yields the `1.695` coefficient.
pub fn mh_upper_derivation_default(h: HurstParam) -> MhDerivation {
    mh_upper_derivation(h, 2.0, 4f64.ln() / h.get()).expect("default arguments are admissible")
}

/// `ℋ_H < (42.46 H)^{1/(2H)}`.
pub fn pickands_ours(h: HurstParam) -> f64 {
    let hv = h.get();
    (PICKANDS_BASE * hv).powf(1.0 / (2.0 * hv))
}

/// `ℋ_H ≤ {1.54H + 4.82 H^{1/2} (4.4 − H ln(0.4 + 1.25/H))^{1/2}}^{1/H}`.
pub fn pickands_shao(h: HurstParam) -> f64 {
    let hv = h.get();
    let inner = 4.4 - hv * (0.4 + 1.25 / hv).ln();
    (1.54 * hv + 4.82 * hv.sqrt() * inner.sqrt()).powf(1.0 / hv)
}

/// `ℋ_H ≤ (2^{1/2} e H Mᴴ)^{1/H}` for any upper bound `mh_bound ≥ Mᴴ`.
pub fn pickands_from_mh(h: HurstParam, mh_bound: f64) -> Result<f64> {
    let hv = h.get();
    let floor = mh_lower(h);
    precondition(mh_bound >= floor, || {
        format!("M^H bound {mh_bound} is below the lower bound {floor}")
    })?;
    Ok((std::f64::consts::SQRT_2 * std::f64::consts::E * hv * mh_bound).powf(1.0 / hv))
}

fn pickands_conditions(h: HurstParam) -> Vec<Condition> {
    vec![Condition::at_most("H <= 1/2", h.get(), 0.5)]
}

pub fn pickands_ours_report(h: HurstParam) -> BoundReport {
    BoundReport::new(BoundKind::PickandsImproved, pickands_ours(h), pickands_conditions(h))
}

pub fn pickands_shao_report(h: HurstParam) -> BoundReport {
    BoundReport::new(BoundKind::PickandsShao, pickands_shao(h), pickands_conditions(h))
}

/// Pickands bound from [`mh_upper`] (including any `H̃` substitution).
pub fn pickands_from_mh_report(h: HurstParam) -> BoundReport {
    let mh = mh_upper(h);
    let value = pickands_from_mh(h, mh.value).unwrap_or(f64::NAN);
    BoundReport::new(BoundKind::PickandsFromMh, value, pickands_conditions(h))
        .with_parameter("mh_bound", mh.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(h: f64) -> HurstParam {
        HurstParam::new(h).unwrap()
    }

    #[test]
    fn mn_upper_examples() {
        assert_eq!(mn_upper(hp(0.3), 1).unwrap().value, 0.0);
        let v = mn_upper(hp(0.25), 256).unwrap().value;
        assert!((v - (0.9375 * 256f64.ln()).sqrt()).abs() < 1e-15);
        assert!((v - 2.28).abs() < 1e-4);
        assert!((mn_upper(hp(0.5), 10).unwrap().value - 1.43956).abs() < 1e-5);
        assert!(mn_upper(hp(0.5), 0).is_err());
    }

    #[test]
    fn mh_lower_examples() {
        let l = l_constant();
        assert!((mh_lower(hp(0.04)) - l / 0.2).abs() < 1e-15);
        assert_eq!(mh_lower(hp(1.0)), l);
        assert!(mh_lower(hp(0.5)) < (2.0 / std::f64::consts::PI).sqrt());
    }

    #[test]
    fn mh_upper_dyadic_and_substituted() {
        let r = mh_upper(hp(0.25));
        assert!(r.valid && r.warnings.is_empty());
        assert!((r.value - 3.39).abs() < 1e-12);
        let r = mh_upper(hp(0.5));
        assert!((r.value - 1.695 * 2f64.sqrt()).abs() < 1e-12);

        let r = mh_upper(hp(0.3));
        assert!(r.valid);
        assert_eq!(r.warnings.len(), 1);
        let h_eff = r.parameter("h_effective").unwrap();
        assert!((h_eff - 2.0 / 102f64.log2()).abs() < 1e-15);
        assert!(h_eff < 0.3);
        assert!((r.value - 3.0960).abs() < 1e-3, "{}", r.value);

        assert!(!mh_upper(hp(0.6)).valid);
        // 2^(2/H) overflows: treated as integral.
        assert!(mh_upper(hp(0.001)).value.is_finite());
    }

    #[test]
    fn default_derivation_reproduces_coefficient() {
        let d = mh_upper_derivation_default(hp(0.2));
        assert!(d.coefficient > 1.694 && d.coefficient < MH_UPPER_COEFF, "{}", d.coefficient);
        // The coefficient does not depend on H at the default choice.
        let e = mh_upper_derivation_default(hp(0.05));
        assert!((d.coefficient - e.coefficient).abs() < 1e-12);
        let explore = mh_upper_derivation(hp(0.2), 3.0, 4f64.ln() / 0.2).unwrap();
        assert!(explore.bracket.is_finite());
    }

    #[test]
    fn pickands_examples() {
        assert!((pickands_ours(hp(0.5)) - 21.23).abs() < 1e-10);
        assert!((pickands_ours(hp(0.45)) - 26.5).abs() < 0.05);
        assert!((pickands_ours(hp(0.15)) - 478.7).abs() < 0.5);
        assert!((pickands_ours(hp(0.45)) / pickands_shao(hp(0.45)) - 0.344).abs() < 0.005);
        assert!((pickands_ours(hp(0.15)) / pickands_shao(hp(0.15)) - 0.046).abs() < 0.002);
        assert!(pickands_shao(hp(0.5)).is_finite());
    }

    #[test]
    fn pickands_from_upper_bound_matches_rounded_constant() {
        for i in 1..=10 {
            let h = hp(0.05 * i as f64);
            let v = pickands_from_mh(h, MH_UPPER_COEFF / h.get().sqrt()).unwrap();
            let ratio = v / pickands_ours(h);
            assert!((0.999..=1.001).contains(&ratio), "h={h} ratio={ratio}");
        }
        let h = hp(0.5);
        let v = pickands_from_mh(h, (std::f64::consts::PI / 2.0).sqrt()).unwrap();
        assert!((v - 5.8034).abs() < 1e-3, "{v}");
        assert!(pickands_from_mh(h, 0.1).is_err());
        assert!(pickands_from_mh(h, mh_lower(h)).unwrap() < v);
    }
}
