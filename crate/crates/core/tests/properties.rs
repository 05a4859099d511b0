//! Randomized properties of the public beamforming API on small arrays.

use iosvb::baselines::{exhaustive_search, mrt};
use iosvb::beamcore::{
    build_candidates, correlation_matrix, enumerate_selections, extract_beamformers, interference_upper_bound, iosvb,
    objective, sigma_sums, submatrix,
};
use iosvb::channel::{generate, ArrayGeometry, ChannelModelConfig, ChannelRealization};
use iosvb::metrics::{sum_rate_value, total_interference, LinkBudget};
use iosvb::numkernel::{frobenius_norm, ComplexMatrix};
use proptest::prelude::*;

fn channel(k: usize, seed: u64, clustered: bool) -> ChannelRealization {
    let g = ArrayGeometry::new((3, 3), (2, 2));
    let model = if clustered {
        ChannelModelConfig::clustered(g)
    } else {
        ChannelModelConfig::rayleigh(g)
    };
    generate(&model, k, seed).unwrap()
}

/// (K, N_s, N_c) with N_s <= N_c <= 4.
fn shape() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=3, 1usize..=2).prop_flat_map(|(k, n_s)| (Just(k), Just(n_s), n_s..=4))
}

fn orthonormality_error(m: &ComplexMatrix) -> f64 {
    frobenius_norm(&(&m.adjoint_mul(m) - &ComplexMatrix::identity(m.cols())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn iosvb_is_the_feasible_minimum(
        (k, n_s, n_c) in shape(),
        seed in any::<u64>(),
        gamma in 0.05f64..0.95,
        clustered in any::<bool>(),
    ) {
        let ch = channel(k, seed, clustered);
        let sol = iosvb(&ch, n_s, n_c, gamma).unwrap();
        let cs = build_candidates(&ch, n_c, n_s).unwrap();
        let lc = correlation_matrix(&cs);

        let (sel_gain, max_gain) = sigma_sums(&cs, &sol.selection);
        prop_assert_eq!(sol.constraint_satisfied, sel_gain > gamma * max_gain);
        let f = objective(&submatrix(&lc, &sol.selection).unwrap());
        prop_assert!((f - sol.objective_f).abs() <= 1e-12 * f.max(1.0));

        for sel in enumerate_selections(n_c, n_s, k).unwrap() {
            let (g, _) = sigma_sums(&cs, &sel);
            if sol.constraint_satisfied && g <= gamma * max_gain {
                continue;
            }
            let other = objective(&submatrix(&lc, &sel).unwrap());
            prop_assert!(sol.objective_f <= other + 1e-12 * other.max(1.0));
        }
    }

    #[test]
    fn beams_are_orthonormal_and_respect_the_bound(
        (k, n_s, n_c) in shape(),
        seed in any::<u64>(),
        gamma in 0.05f64..0.95,
    ) {
        let ch = channel(k, seed, true);
        let sol = iosvb(&ch, n_s, n_c, gamma).unwrap();
        for j in 0..k {
            prop_assert!(orthonormality_error(&sol.beams.precoders[j]) < 1e-10);
            prop_assert!(orthonormality_error(&sol.beams.combiners[j]) < 1e-10);
        }
        let cs = build_candidates(&ch, n_c, n_s).unwrap();
        let bound = interference_upper_bound(&submatrix(&correlation_matrix(&cs), &sol.selection).unwrap());
        prop_assert!(total_interference(&ch, &sol.beams) <= bound + 1e-9 * bound.max(1.0));
    }

    #[test]
    fn exhaustive_dominates_iosvb_and_mrt(
        (k, n_s, n_c) in shape(),
        seed in any::<u64>(),
        gamma in 0.05f64..0.95,
        snr_db in -10.0f64..25.0,
    ) {
        let ch = channel(k, seed, true);
        let lb = LinkBudget::from_snr_db(snr_db);
        let best = sum_rate_value(&ch, &exhaustive_search(&ch, n_s, n_c, &lb).unwrap().beams, &lb).unwrap();
        let io = sum_rate_value(&ch, &iosvb(&ch, n_s, n_c, gamma).unwrap().beams, &lb).unwrap();
        let top = sum_rate_value(&ch, &mrt(&ch, n_s, &lb).unwrap().beams, &lb).unwrap();
        prop_assert!(io >= 0.0);
        prop_assert!(best >= io - 1e-12 * best);
        prop_assert!(best >= top - 1e-12 * best);
    }

    #[test]
    fn rate_grows_with_snr(
        (k, n_s, n_c) in shape(),
        seed in any::<u64>(),
        snr_db in -10.0f64..20.0,
        step in 0.5f64..10.0,
    ) {
        let ch = channel(k, seed, false);
        let cs = build_candidates(&ch, n_c, n_s).unwrap();
        let beams = extract_beamformers(&cs, &cs.top_selection());
        let lo = sum_rate_value(&ch, &beams, &LinkBudget::from_snr_db(snr_db)).unwrap();
        let hi = sum_rate_value(&ch, &beams, &LinkBudget::from_snr_db(snr_db + step)).unwrap();
        prop_assert!(hi >= lo - 1e-10 * hi.max(1.0));
    }

    #[test]
    fn objective_never_worsens_with_more_candidates(
        k in 1usize..=3,
        seed in any::<u64>(),
        gamma in 0.05f64..0.95,
    ) {
        let ch = channel(k, seed, true);
        let mut prev = f64::INFINITY;
        for n_c in 2..=4 {
            let sol = iosvb(&ch, 2, n_c, gamma).unwrap();
            prop_assert!(sol.constraint_satisfied);
            prop_assert!(sol.objective_f <= prev * (1.0 + 1e-12));
            prev = sol.objective_f;
        }
    }
}
