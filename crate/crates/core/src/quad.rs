//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{FbmError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_82,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Width of one panel of a semi-infinite integration.
pub const TAIL_PANEL: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (k, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]` by bisecting the segment with the largest error
/// estimate until the total error is below `max(abs_tol, rel_tol · |value|)`.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_segments: usize,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(FbmError::Quadrature(format!("non-finite limits [{a}, {b}]")));
    }
    let mut segments = vec![gk15(&f, a, b)];
    let mut evaluations = 15;
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if !value.is_finite() {
            return Err(FbmError::Quadrature(format!("integrand not finite on [{a}, {b}]")));
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(QuadResult { value, abs_error: error, evaluations });
        }
        if segments.len() >= max_segments {
            return Err(FbmError::Quadrature(format!(
                "{max_segments} segments exhausted on [{a}, {b}]: value {value}, error {error}"
            )));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        segments.push(gk15(&f, s.a, mid));
        segments.push(gk15(&f, mid, s.b));
        evaluations += 30;
    }
}

/// Integrates `f` over `[a, ∞)` in panels of width [`TAIL_PANEL`], adding panels
/// while the last one still contributes more than `rel_tol` of the running total.
pub fn integrate_tail(f: impl Fn(f64) -> f64, a: f64, rel_tol: f64) -> Result<QuadResult> {
    const MAX_PANELS: usize = 64;
    let mut total = QuadResult { value: 0.0, abs_error: 0.0, evaluations: 0 };
    let mut lo = a;
    for _ in 0..MAX_PANELS {
        let panel = integrate(&f, lo, lo + TAIL_PANEL, rel_tol, 1e-300, 4096)?;
        total.value += panel.value;
        total.abs_error += panel.abs_error;
        total.evaluations += panel.evaluations;
        if panel.value.abs() <= rel_tol * total.value.abs() || panel.value == 0.0 {
            return Ok(total);
        }
        lo += TAIL_PANEL;
    }
    Err(FbmError::Quadrature(format!(
        "tail integral from {a} did not settle after {MAX_PANELS} panels"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, 1e-14, 0.0, 10).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn gaussian_tail() {
        // ∫_1^∞ y e^{-y²/2} dy = e^{-1/2}
        let r = integrate_tail(|y| y * (-0.5 * y * y).exp(), 1.0, 1e-12).unwrap();
        assert!((r.value - (-0.5f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn slowly_decaying_tail_extends_panels() {
        // ∫_0^∞ e^{-x/30} dx = 30 needs several panels.
        let r = integrate_tail(|x| (-x / 30.0).exp(), 0.0, 1e-10).unwrap();
        assert!((r.value - 30.0).abs() < 1e-7, "{}", r.value);
    }

    #[test]
    fn reports_failure() {
        assert!(integrate(|x| 1.0 / x, 0.0, 1.0, 1e-12, 0.0, 50).is_err());
        assert!(integrate_tail(|_| 1.0, 0.0, 1e-6).is_err());
    }
}
