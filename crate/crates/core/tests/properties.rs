mod common;

use ccorder::cca::{
    economy_svd, full_canonical_correlations, pca_reduce, reduced_canonical_correlations,
    spectrum_table, Complex64, DataMatrixPair,
};
use ccorder::datagen::random_unitary;
use ccorder::detectors::{
    glrt_lambda, mdl_ic, min_step_ht, min_step_mdl_ic, min_step_mdl_threshold,
    DetectorConfig, MaxMinDetector, Method,
};
use ccorder::stats::{chi2_cdf, chi2_quantile};
use common::{qr_canonical_correlations, random_pair, random_spectrum};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixture(seed: u64) -> DataMatrixPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 + (seed % 9) as usize;
    let m = 2 + (seed / 9 % 9) as usize;
    let samples = n.max(m) + 2 + (seed / 81 % 20) as usize;
    random_pair(n, m, samples, (seed % 3) as usize, &mut rng)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn two_paths_agree(seed in any::<u64>()) {
        let pair = fixture(seed);
        let cache = economy_svd(&pair).unwrap();
        let r_max = cache.default_r_max();
        for r_x in 1..=r_max {
            for r_y in 1..=r_max {
                let fast = reduced_canonical_correlations(&cache, r_x, r_y).unwrap();
                let reduced = pca_reduce(&pair, &cache, r_x, r_y).unwrap();
                let oracle = qr_canonical_correlations(reduced.x(), reduced.y());
                prop_assert!(close(fast.values(), &oracle, 1e-9), "{:?} vs {:?}", fast.values(), oracle);
            }
        }
    }

    #[test]
    fn correlations_are_monotone_in_ranks(seed in any::<u64>()) {
        let pair = fixture(seed);
        let cache = economy_svd(&pair).unwrap();
        let table = spectrum_table(&cache, cache.default_r_max()).unwrap();
        let r_max = table.r_max();
        for r_x in 1..=r_max {
            for r_y in 1..=r_max {
                let k = table.get(r_x, r_y).unwrap().values();
                prop_assert!(k.iter().all(|v| (0.0..=1.0).contains(v)));
                prop_assert!(k.windows(2).all(|w| w[0] >= w[1]));
                for bigger in [table.get(r_x + 1, r_y), table.get(r_x, r_y + 1)].into_iter().flatten() {
                    for (small, large) in k.iter().zip(bigger.values()) {
                        prop_assert!(*large >= small - 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn spectrum_is_invariant_to_unitary_mixing_and_scale(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let pair = fixture(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let qx = random_unitary(pair.n(), &mut rng);
        let qy = random_unitary(pair.m(), &mut rng);
        let moved = DataMatrixPair::new(
            qx * pair.x() * Complex64::new(scale, 0.0),
            qy * pair.y(),
        ).unwrap();
        let a = full_canonical_correlations(&pair).unwrap();
        let b = full_canonical_correlations(&moved).unwrap();
        prop_assert!(close(a.values(), b.values(), 1e-7));
        // PCA subspaces rotate along with the data
        let ca = economy_svd(&pair).unwrap();
        let cb = economy_svd(&moved).unwrap();
        let r = ca.default_r_max();
        let ka = reduced_canonical_correlations(&ca, r, r).unwrap();
        let kb = reduced_canonical_correlations(&cb, r, r).unwrap();
        prop_assert!(close(ka.values(), kb.values(), 1e-7));
    }

    #[test]
    fn full_rank_reduction_matches_full_cca(seed in any::<u64>()) {
        let pair = fixture(seed);
        let cache = economy_svd(&pair).unwrap();
        let full = full_canonical_correlations(&pair).unwrap();
        let oracle = qr_canonical_correlations(pair.x(), pair.y());
        prop_assert!(close(full.values(), &oracle, 1e-8));
        if pair.n() + pair.m() <= pair.samples() {
            let k = reduced_canonical_correlations(&cache, pair.n().min(pair.m()), pair.n().min(pair.m()));
            if pair.n() == pair.m() {
                prop_assert!(close(k.unwrap().values(), full.values(), 1e-8));
            }
        }
    }

    #[test]
    fn min_steps_are_ordered_and_bounded(seed in any::<u64>(), p_fa in 0.001f64..0.2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (k, samples) = random_spectrum(&mut rng);
        let d2 = min_step_mdl_threshold(&k, samples).unwrap();
        let d3 = min_step_mdl_ic(&k, samples).unwrap();
        prop_assert!(d3 >= d2);
        prop_assert!(d3 <= k.r());
        if let Ok(d1) = min_step_ht(&k, samples, p_fa) {
            prop_assert!(d1 <= k.r());
        }
    }

    #[test]
    fn mdl_differences_are_glrt_tests(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (k, samples) = random_spectrum(&mut rng);
        let r = k.r();
        let top = mdl_ic(&k, samples, r).unwrap();
        for s in 0..=r {
            let lhs = top - mdl_ic(&k, samples, s).unwrap();
            let rhs = glrt_lambda(&k, samples, s).unwrap()
                + (samples as f64).ln() * ((k.r_x - s) * (k.r_y - s)) as f64;
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn max_min_picks_the_best_pair(seed in any::<u64>()) {
        let pair = fixture(seed);
        let cache = economy_svd(&pair).unwrap();
        let r_max = cache.default_r_max();
        let table = spectrum_table(&cache, r_max).unwrap();
        for method in [Method::MaxMinHt, Method::MaxMinMdlThreshold, Method::MaxMinMdlIc] {
            let cfg = DetectorConfig::new(method);
            let Ok(sel) = MaxMinDetector::new(&cfg, r_max, pair.samples()).unwrap().select(&table) else {
                continue;
            };
            prop_assert!(sel.d_hat <= sel.r_x.min(sel.r_y));
            prop_assert!(sel.r_x <= r_max && sel.r_y <= r_max);
        }
    }

    #[test]
    fn chi2_quantile_inverts_cdf(nu in 1u64..=512, q in 1e-6f64..0.999_999) {
        let x = chi2_quantile(q, nu).unwrap();
        prop_assert!((chi2_cdf(x, nu).unwrap() - q).abs() <= 1e-8);
    }
}
