use std::f64::consts::PI;

use proptest::prelude::*;

use noisyq::channels::{apply_channel, build_channel, ChannelParams, NoiseConfig, NoiseKind};
use noisyq::featuremaps::{FeatureMap, FeatureMapKind};
use noisyq::kernels::{encode_state, kernel_matrix};
use noisyq::simulator::born_probabilities;

fn kind() -> impl Strategy<Value = NoiseKind> {
    prop::sample::select(
        NoiseKind::ALL
            .into_iter()
            .filter(|k| *k != NoiseKind::ThermalRelaxation)
            .collect::<Vec<_>>(),
    )
}

fn map() -> impl Strategy<Value = FeatureMap> {
    prop::sample::select(FeatureMapKind::ALL.to_vec()).prop_map(FeatureMap::new)
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=PI, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noisy_encodings_are_valid_states(x in point(4), fm in map(), kind in kind(), level in 0.0..=1.0f64) {
        let rho = encode_state(&x, &fm, Some(&NoiseConfig::new(kind, level))).unwrap();
        let report = rho.validate_default();
        prop_assert!(report.is_valid(), "{report:?}");
        let purity = rho.purity();
        prop_assert!((1.0 / 16.0 - 1e-12..=1.0 + 1e-12).contains(&purity));
        let probs = born_probabilities(&rho).probs;
        prop_assert!(probs.iter().all(|p| (0.0..=1.0).contains(p)));
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn channels_never_raise_purity_of_pure_inputs(x in point(2), kind in kind(), level in 0.0..=1.0f64, q in 0usize..2) {
        let rho = encode_state(&x, &FeatureMap::new(FeatureMapKind::ZZMap).with_reps(1), None).unwrap();
        let ch = build_channel(kind, ChannelParams::from_level(kind, level)).unwrap();
        let out = apply_channel(&rho, &ch, q).unwrap();
        prop_assert!(out.purity() <= rho.purity() + 1e-12);
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernels_are_symmetric_bounded_and_psd(
        rows in prop::collection::vec(point(3), 2..8),
        fm in map(),
        level in 0.0..=0.5f64,
    ) {
        let noise = NoiseConfig::new(NoiseKind::Depolarizing, level);
        let k = kernel_matrix(&rows, &fm, Some(&noise)).unwrap();
        prop_assert!(k.symmetry_deviation() <= 1e-12);
        prop_assert!(k.min_eigenvalue() >= -1e-8);
        for i in 0..rows.len() {
            for j in 0..rows.len() {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&k.get(i, j)));
            }
        }
    }
}
