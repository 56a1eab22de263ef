use fbm_extremes::bounds::{
    alpha_star, chatterjee_bound, delta_lower, delta_upper, delta_upper_lerch, l_constant, mh_lower, mh_upper,
    pickands_from_mh, pickands_ours, validity_region, IncrementTable, MH_UPPER_COEFF,
};
use fbm_extremes::HurstParam;
use proptest::prelude::*;

fn hp(h: f64) -> HurstParam {
    HurstParam::new(h).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn valid_reports_are_finite(h in 0.01f64..0.5, n in 1u64..100_000, alpha in 0.1f64..20.0) {
        for r in [delta_upper(hp(h), n, alpha).unwrap(), delta_upper_lerch(hp(h), n, alpha, 1e-12).unwrap()] {
            prop_assert_eq!(r.valid, r.conditions.iter().all(|c| c.satisfied));
            if r.valid {
                prop_assert!(r.value.is_finite() && r.value > 0.0);
            }
        }
    }

    #[test]
    fn series_below_majorant(h in 0.01f64..0.5, n in 2u64..100_000, alpha in 0.1f64..20.0) {
        let major = delta_upper(hp(h), n, alpha).unwrap();
        prop_assume!(major.valid);
        let series = delta_upper_lerch(hp(h), n, alpha, 1e-13).unwrap();
        // Both agree to first order in m^{-H}; the remaining gap may be below f64 resolution.
        prop_assert!(series.value <= major.value * (1.0 + 1e-12), "{} > {}", series.value, major.value);
    }

    #[test]
    fn lower_bound_nonnegative_and_zero_exactly_past_cutoff(h in 0.005f64..1.0, n in 2u64..1_000_000) {
        let r = delta_lower(hp(h), n).unwrap();
        prop_assert!(r.value >= 0.0);
        let past = h * (n as f64).ln() >= l_constant().powi(2);
        prop_assert_eq!(r.value == 0.0, past);
    }

    #[test]
    fn lower_below_upper_on_validity_region(h in 0.005f64..0.45, alpha in 7.5f64..30.0) {
        let alpha = alpha.max(alpha_star(1e-12).unwrap() + 1e-9);
        let region = validity_region(hp(h), alpha).unwrap();
        for n in region.feasible_integers().into_iter().take(200) {
            let up = delta_upper(hp(h), n, alpha).unwrap();
            let lo = delta_lower(hp(h), n).unwrap();
            if up.valid && lo.value > 0.0 {
                prop_assert!(lo.value <= up.value, "n = {}: {} > {}", n, lo.value, up.value);
            }
        }
    }

    #[test]
    fn enclosure_of_continuous_maximum_nonempty(h in 0.001f64..=0.5) {
        prop_assert!(mh_lower(hp(h)) < mh_upper(hp(h)).value);
    }

    // 42.46 is rounded from 42.4579; the relative gap is raised to the power 1/(2H),
    // so the 0.1% tolerance holds down to H = 0.025.
    #[test]
    fn pickands_constant_rederived(h in 0.03f64..=0.5) {
        let from = pickands_from_mh(hp(h), MH_UPPER_COEFF / h.sqrt()).unwrap();
        prop_assert!((from / pickands_ours(hp(h)) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn chatterjee_bound_symmetric(d in proptest::collection::vec(0.0f64..4.0, 15), e in proptest::collection::vec(0.0f64..4.0, 15)) {
        let idx = |i: usize, j: usize| i * (11 - i) / 2 + (j - i - 1);
        let x = IncrementTable::from_fn(6, |i, j| d[idx(i, j)]);
        let y = IncrementTable::from_fn(6, |i, j| e[idx(i, j)]);
        prop_assert_eq!(chatterjee_bound(&x, &y).unwrap(), chatterjee_bound(&y, &x).unwrap());
        prop_assert_eq!(chatterjee_bound(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn pure(h in 0.01f64..0.5, n in 2u64..10_000, alpha in 0.5f64..10.0) {
        let a = delta_upper_lerch(hp(h), n, alpha, 1e-12).unwrap();
        let b = delta_upper_lerch(hp(h), n, alpha, 1e-12).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}

#[test]
fn normalized_upper_bound_decreases_in_n() {
    for &h in &[0.1, 0.25, 0.4] {
        for &alpha in &[0.5, 2.0, 8.0] {
            let ratios: Vec<f64> = (1..=30)
                .map(|k| {
                    let n = 1u64 << k;
                    let r = delta_upper(hp(h), n, alpha).unwrap();
                    (r, n as f64)
                })
                .filter(|(r, _)| r.valid)
                .map(|(r, n)| r.value / (n.powf(-h) * n.ln().sqrt()))
                .collect();
            assert!(ratios.len() > 5, "h = {h}, alpha = {alpha}");
            // Once the ratio reaches its limit only rounding noise remains.
            let tol = 4.0 * f64::EPSILON;
            assert!(ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + tol)), "h = {h}, alpha = {alpha}: {ratios:?}");
            let limit = (1.0 + alpha).sqrt();
            assert!(ratios.iter().all(|&r| r >= limit * (1.0 - tol)));
        }
    }
}
