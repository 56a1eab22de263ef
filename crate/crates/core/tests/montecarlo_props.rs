use fbm_extremes::montecarlo::{
    estimate_increment, estimate_max_iid_normals, estimate_mn, estimate_nested_maxima, McConfig,
};
use fbm_extremes::rng::RandomStream;
use fbm_extremes::sampler::{FbmSampler, SamplerMethod};
use fbm_extremes::{HurstParam, UniformGrid};
use proptest::prelude::*;

fn hp(h: f64) -> HurstParam {
    HurstParam::new(h).unwrap()
}

fn method() -> impl Strategy<Value = SamplerMethod> {
    prop_oneof![Just(SamplerMethod::Cholesky), Just(SamplerMethod::Circulant)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn refinement_never_lowers_a_path_maximum(h in 0.05f64..1.0, n in 1u64..40, m in 1u64..6, seed: u64, method in method()) {
        let cfg = McConfig::new(300, seed).with_method(method);
        let e = estimate_increment(hp(h), n, m, &cfg).unwrap();
        prop_assert_eq!(e.coupling_violations, 0);
        prop_assert!(e.diff_mean >= 0.0);
        prop_assert!(e.fine.mean >= e.coarse.mean);
    }

    #[test]
    fn nested_maxima_nondecreasing(h in 0.05f64..1.0, k in 1u32..8, seed: u64) {
        let sizes: Vec<u64> = (0..=k).map(|j| 1u64 << j).collect();
        let r = estimate_nested_maxima(hp(h), &sizes, &McConfig::new(256, seed)).unwrap();
        prop_assert_eq!(r.monotonicity_violations, 0);
        prop_assert!(r.estimates.windows(2).all(|w| w[0].mean <= w[1].mean));
    }

    #[test]
    fn estimates_reproducible(h in 0.05f64..1.0, n in 1u64..64, seed: u64, method in method()) {
        let cfg = McConfig::new(500, seed).with_method(method);
        let a = estimate_mn(hp(h), n, &cfg).unwrap();
        let b = estimate_mn(hp(h), n, &cfg).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!((a.ci_halfwidth_95 - 1.959964 * a.std_err).abs() <= 1e-6 * a.std_err);
    }

    #[test]
    fn sampler_streams_reproducible(h in 0.05f64..1.0, n in 1usize..64, seed: u64, stream: u64, method in method()) {
        let s = FbmSampler::new(hp(h), UniformGrid::new(n).unwrap(), method).unwrap();
        let a = s.sample(&mut RandomStream::new(seed, stream));
        let b = s.sample(&mut RandomStream::new(seed, stream));
        prop_assert_eq!(a.values.len(), n);
        prop_assert_eq!(a.values, b.values);
    }

    #[test]
    fn iid_maximum_below_sqrt_two_log(n in 2u64..5000, seed: u64) {
        let r = estimate_max_iid_normals(n, &McConfig::new(2000, seed)).unwrap();
        prop_assert!(r.estimate.mean <= r.bound + 4.0 * r.estimate.std_err);
    }
}

#[test]
fn coordinates_centred() {
    let h = hp(0.3);
    let n = 16;
    for method in [SamplerMethod::Cholesky, SamplerMethod::Circulant] {
        let s = FbmSampler::new(h, UniformGrid::new(n).unwrap(), method).unwrap();
        let mut sum = vec![0.0; n];
        let mut sq = vec![0.0; n];
        let paths = 100_000u64;
        let mut stream = RandomStream::new(77, 0);
        for _ in 0..paths {
            for (i, v) in s.sample(&mut stream).values.iter().enumerate() {
                sum[i] += v;
                sq[i] += v * v;
            }
        }
        for i in 0..n {
            let mean = sum[i] / paths as f64;
            let var = sq[i] / paths as f64 - mean * mean;
            assert!(mean.abs() < 4.0 * (var / paths as f64).sqrt(), "{method} coordinate {i}: {mean}");
        }
    }
}

#[test]
fn grid_maximum_decreasing_in_h() {
    let hs = [0.1, 0.2, 0.3, 0.4, 0.5];
    let cfg = McConfig::new(20_000, 11);
    let est: Vec<_> = hs.iter().map(|&h| estimate_mn(hp(h), 256, &cfg).unwrap()).collect();
    for w in est.windows(2) {
        let se = w[0].std_err.hypot(w[1].std_err);
        assert!(w[1].mean <= w[0].mean + 4.0 * se, "{} then {}", w[0].mean, w[1].mean);
    }
}
