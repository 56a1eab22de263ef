//! Reference values computed without the library's formulas: double-double
//! re-evaluations of the closed forms, the exact Brownian grid maximum, and
//! quadrature for maxima of i.i.d. normals.

use statrs::function::erf::erfc;

use crate::dd::Dd;

/// Relative distance below which a double-double power is taken to be an integer.
const INTEGER_SNAP: f64 = 1e-26;

/// `L = (4πe ln 2)^{-1/2}`.
pub fn l_const() -> Dd {
    (Dd::from(4.0) * Dd::PI * Dd::E * Dd::LN2).sqrt().recip()
}

fn ln_u(n: u64) -> Dd {
    Dd::from(n).ln()
}

/// `n^{-x}` for real `x`.
fn pow_neg(n: u64, x: Dd) -> Dd {
    (-(x * ln_u(n))).exp()
}

/// `2(ln n)^{1/2} n^{-H}(1 + 4n^{-H} + 0.0074(ln n)^{-3/2})`.
pub fn gap_upper_prior(h: f64, n: u64) -> Dd {
    let ln_n = ln_u(n);
    let nh = pow_neg(n, Dd::from(h));
    let c = Dd::ratio(74, 10_000);
    let tail = c / (ln_n * ln_n.sqrt());
    Dd::from(2.0) * ln_n.sqrt() * nh * (Dd::ONE + Dd::from(4.0) * nh + tail)
}

/// `⌊n^α⌋`, rounding to the nearest integer when `n^α` is one up to working precision.
pub fn floor_pow(n: u64, alpha: f64) -> Dd {
    let x = (Dd::from(alpha) * ln_u(n)).exp();
    let r = Dd::from(x.hi.round());
    if ((x - r).to_f64() / x.to_f64()).abs() < INTEGER_SNAP {
        r
    } else {
        x.floor()
    }
}

/// New upper gap bound: `(value, m, denominator)`.
pub fn gap_upper(h: f64, n: u64, alpha: f64) -> (Dd, Dd, Dd) {
    let hd = Dd::from(h);
    let ad = Dd::from(alpha);
    let m = floor_pow(n, alpha);
    let m_h = (-(hd * m.ln())).exp();
    let q = Dd::ONE + ad / (Dd::ONE + ad);
    let denominator = Dd::ONE - m_h * q.sqrt();
    let one_minus = Dd::ONE - m.recip();
    let shrink = if one_minus.hi > 0.0 { (hd * one_minus.ln()).exp() } else { Dd::ZERO };
    let value = pow_neg(n, hd) * ln_u(n).sqrt() * shrink * (Dd::ONE + ad).sqrt() / denominator;
    (value, m, denominator)
}

/// The same bound with the exact series `Σ_{k≥0} (1+α+αk)^{1/2} m^{-kH}` in
/// place of its geometric majorant; `None` when `m^{-H} ≥ 1`.
pub fn gap_upper_series(h: f64, n: u64, alpha: f64) -> Option<Dd> {
    let hd = Dd::from(h);
    let ad = Dd::from(alpha);
    let m = floor_pow(n, alpha);
    let z = (-(hd * m.ln())).exp();
    if z.hi >= 1.0 {
        return None;
    }
    let mut sum = Dd::ZERO;
    let mut zk = Dd::ONE;
    let mut k = 0u64;
    loop {
        let term = (Dd::ONE + ad + ad * Dd::from(k)).sqrt() * zk;
        sum = sum + term;
        // Term ratios tend to z < 1, so the neglected tail is a small multiple of this term.
        if term.hi < 1e-38 * sum.hi {
            break;
        }
        zk = zk * z;
        k += 1;
    }
    let one_minus = Dd::ONE - m.recip();
    let shrink = (hd * one_minus.ln()).exp();
    Some(pow_neg(n, hd) * ln_u(n).sqrt() * shrink * sum)
}

/// `(ln n)^{1/2}(L/(H ln n)^{1/2} − 1)⁺`.
pub fn gap_lower(h: f64, n: u64) -> Dd {
    let ln_n = ln_u(n);
    let inner = l_const() / (Dd::from(h) * ln_n).sqrt() - Dd::ONE;
    ln_n.sqrt() * inner.max(Dd::ZERO)
}

/// `((1 − n^{-2H}) ln n)^{1/2}`.
pub fn grid_max_upper(h: f64, n: u64) -> Dd {
    let ln_n = ln_u(n);
    ((Dd::ONE - pow_neg(n, Dd::from(2.0 * h))) * ln_n).sqrt()
}

/// Root of `(1 + α/(1+α))^{1/α} = exp(2L²)` by bisection in double-double.
pub fn alpha_star() -> Dd {
    let target = (Dd::from(2.0) * l_const().sqr()).exp();
    let g = |a: Dd| ((Dd::ONE + a / (Dd::ONE + a)).ln() / a).exp() - target;
    let (mut lo, mut hi) = (Dd::from(1.0), Dd::from(50.0));
    for _ in 0..110 {
        let mid = (lo + hi) * Dd::from(0.5);
        if g(mid).hi > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * Dd::from(0.5)
}

/// Exact `E max_{1≤i≤n} W_{i/n}` for standard Brownian motion:
/// `(2πn)^{-1/2} Σ_{k=1}^{n−1} k^{-1/2}` (Spitzer's identity for the Gaussian walk).
pub fn brownian_grid_max(n: u64) -> f64 {
    let mut s = Dd::ZERO;
    for k in 1..n {
        s = s + Dd::from(k).sqrt().recip();
    }
    (s / (Dd::from(2.0) * Dd::PI * Dd::from(n)).sqrt()).to_f64()
}

/// `E max_{t∈[0,1]} W_t = (2/π)^{1/2}` by the reflection principle.
pub fn brownian_max() -> f64 {
    (Dd::from(2.0) / Dd::PI).sqrt().to_f64()
}

/// `−ζ(1/2)/(2π)^{1/2}`, the leading coefficient of `E max W − E max_{grid} W` in `n^{-1/2}`.
pub const BROWNIAN_GAP_COEFF: f64 = 0.582_597_157_939_010_7;

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `E max_{1≤i≤n} ξᵢ = ∫ x n φ(x) Φ(x)^{n−1} dx` for i.i.d. standard normals,
/// by the trapezoid rule on `[−12, 12]`. Accuracy is limited to about `1e-10`
/// by the `erfc` implementation, far below any Monte Carlo standard error.
pub fn iid_normal_max(n: u64) -> f64 {
    const HALF_WIDTH: f64 = 12.0;
    const STEPS: usize = 24_000;
    let step = 2.0 * HALF_WIDTH / STEPS as f64;
    let nf = n as f64;
    let mut sum = 0.0;
    for i in 0..=STEPS {
        let x = -HALF_WIDTH + i as f64 * step;
        let w = if i == 0 || i == STEPS { 0.5 } else { 1.0 };
        sum += w * x * nf * std_normal_pdf(x) * std_normal_cdf(x).powf(nf - 1.0);
    }
    sum * step
}

/// `∫_A^∞ y e^{−y²/2 + ay} dy = e^{a²/2}(e^{−(A−a)²/2} + a(2π)^{1/2} Q(A − a))`,
/// to about `1e-10` relative.
pub fn exp_tail_integral(a: f64, lower: f64) -> f64 {
    let b = lower - a;
    let q = 0.5 * erfc(b / std::f64::consts::SQRT_2);
    (0.5 * a * a).exp() * ((-0.5 * b * b).exp() + a * (2.0 * std::f64::consts::PI).sqrt() * q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l_matches_reference() {
        // mpmath: 0.2055110113655951407509549..., split into (hi, lo).
        let l = l_const();
        assert!((l - Dd::new(0.20551101136559513, 9.81124528351669e-18)).abs().to_f64() < 1e-30);
    }

    #[test]
    fn floor_pow_snaps_exact_powers() {
        assert_eq!(floor_pow(16, 0.5), Dd::from(4.0));
        assert_eq!(floor_pow(100, 0.5), Dd::from(10.0));
        assert_eq!(floor_pow(8, 2.0), Dd::from(64.0));
        assert_eq!(floor_pow(2, 0.5), Dd::from(1.0));
        assert_eq!(floor_pow(1024, 8.0), Dd::from(2f64.powi(80)));
    }

    #[test]
    fn series_below_majorant_at_second_order() {
        // First-order terms in z = m^{-H} coincide, so the gap is O(z²).
        let (major, _, _) = gap_upper(0.45, 1024, 8.0);
        let series = gap_upper_series(0.45, 1024, 8.0).unwrap();
        let gap = ((major - series) / major).to_f64();
        assert!(gap > 0.0 && gap < 1e-20, "{gap}");
        assert!(gap_upper_series(0.1, 2, 0.5).is_none());
    }

    #[test]
    fn brownian_references() {
        assert_eq!(brownian_grid_max(1), 0.0);
        // Two points: E max(W_{1/2}, W_1) = E (W_{1/2} + max(0, W_1 − W_{1/2})) = (4π)^{-1/2}.
        assert!((brownian_grid_max(2) - 1.0 / (4.0 * std::f64::consts::PI).sqrt()).abs() < 1e-16);
        assert!((brownian_max() - 0.797_884_560_802_865_4).abs() < 1e-16);
        // mpmath value of the n = 1024 sum.
        assert!((brownian_grid_max(1024) - 0.779_483_587_729_378).abs() < 1e-15);
    }

    #[test]
    fn iid_references() {
        assert!(iid_normal_max(1).abs() < 1e-14);
        assert!((iid_normal_max(2) - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-10);
        // E max of three normals is 3/(2√π).
        assert!((iid_normal_max(3) - 1.5 / std::f64::consts::PI.sqrt()).abs() < 1e-10);
        // mpmath quadrature.
        assert!((iid_normal_max(100) - 2.507_593_636_441_684).abs() < 1e-9);
    }

    #[test]
    fn exp_tail_limits() {
        // a = 0: ∫_A^∞ y e^{−y²/2} dy = e^{−A²/2}.
        assert!((exp_tail_integral(0.0, 1.3) - (-0.5f64 * 1.69).exp()).abs() < 1e-15);
    }
}
