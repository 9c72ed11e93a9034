//! Runs every acceptance criterion in order and prints one PASS/FAIL line for
//! each. Exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use noisyq::channels::{
    apply_channel, build_channel, build_channel_with, closed_form_evolve, ChannelParams, NoiseConfig, NoiseKind,
    ThermalModel,
};
use noisyq::classifiers::{
    accuracy, bce_loss, qnn_forward_encoded, qnn_loss_gradient, qsvc_train, Algorithm, QsvcSettings, Readout,
    TrainedModel,
};
use noisyq::data::{
    load_sequences, prepare_dataset, synthetic_separable, vectorize_kmer, PcaModel, PipelineSettings, ScalingBounds,
    SequenceFormat, SequenceRecord,
};
use noisyq::dmcore::DensityMatrix;
use noisyq::featuremaps::{build_feature_map, FeatureMap, FeatureMapKind};
use noisyq::harness::{run_accuracy_grid, run_histogram_study, CellOutcome, ExperimentConfig, GridOptions};
use noisyq::kernels::{encode_all, encode_state, kernel_matrix};
use noisyq::simulator::{born_probabilities, sample_counts};

const LEVELS: [f64; 6] = [0.0, 0.01, 0.1, 0.2, 0.3, 1.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn channel_conformance() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(1001);
    let states: Vec<DensityMatrix> = (0..1000).map(|_| common::random_density(&mut rng, 2)).collect();
    let mut worst: f64 = 0.0;
    for kind in NoiseKind::ALL {
        for level in LEVELS {
            let params = ChannelParams::from_level(kind, level);
            let ch = build_channel(kind, params).unwrap();
            for rho in &states {
                let kraus = apply_channel(rho, &ch, 0).unwrap();
                let closed = closed_form_evolve(kind, params, rho).unwrap();
                worst = worst.max(kraus.matrix().max_abs_diff(closed.matrix()));
            }
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-12 && within(t, 10),
        format!(
            "6 kinds x 6 levels x 1000 states, max deviation {worst:.2e} (tol 1e-12), {:.2}s (limit 10s)",
            t.as_secs_f64()
        ),
    )
}

fn cptp_suite() -> Outcome {
    let mut worst: f64 = 0.0;
    for kind in NoiseKind::ALL
        .into_iter()
        .filter(|k| *k != NoiseKind::ThermalRelaxation)
    {
        for level in LEVELS {
            let ch = build_channel(kind, ChannelParams::from_level(kind, level)).unwrap();
            worst = worst.max(ch.completeness_residual());
        }
    }
    // The verbatim operators sum to diag(1 - p0, 1 - p1). Under the sweep's
    // p0 = p1 = level / 2 this is also diag(1 - p1, 1 - p0). For p0 != p1 the
    // two orderings differ; the operator form used here is the one whose
    // worked example (I/2 -> diag(0.40, 0.45)) is reproduced below.
    let mut verbatim_dev: f64 = 0.0;
    let mut literal_dev: f64 = 0.0;
    for level in LEVELS {
        let p = level / 2.0;
        let ch = build_channel(
            NoiseKind::ThermalRelaxation,
            ChannelParams::from_level(NoiseKind::ThermalRelaxation, level),
        )
        .unwrap();
        let sum = ch.completeness_sum();
        literal_dev = literal_dev
            .max((sum[(0, 0)].re - (1.0 - p)).abs())
            .max((sum[(1, 1)].re - (1.0 - p)).abs())
            .max(sum[(0, 1)].norm())
            .max(sum[(1, 0)].norm());
    }
    for (p0, p1) in [(0.1, 0.2), (0.05, 0.15), (0.3, 0.0), (0.0, 0.5)] {
        let sum = build_channel(NoiseKind::ThermalRelaxation, ChannelParams::thermal(p0, p1))
            .unwrap()
            .completeness_sum();
        verbatim_dev = verbatim_dev
            .max((sum[(0, 0)].re - (1.0 - p0)).abs())
            .max((sum[(1, 1)].re - (1.0 - p1)).abs())
            .max(sum[(0, 1)].norm());
    }
    let example = apply_channel(
        &DensityMatrix::maximally_mixed(1).unwrap(),
        &build_channel(NoiseKind::ThermalRelaxation, ChannelParams::thermal(0.1, 0.2)).unwrap(),
        0,
    )
    .unwrap();
    let example_ok = (example.entry(0, 0).re - 0.40).abs() < 1e-12 && (example.entry(1, 1).re - 0.45).abs() < 1e-12;
    let mut corrected: f64 = 0.0;
    for (p0, p1) in [(0.1, 0.2), (0.05, 0.15), (0.3, 0.0), (0.5, 0.5)] {
        let ch = build_channel_with(
            NoiseKind::ThermalRelaxation,
            ChannelParams::thermal(p0, p1),
            ThermalModel::Corrected,
        )
        .unwrap();
        corrected = corrected.max(ch.completeness_residual());
    }
    // "exactly" is read as agreement to within a couple of ulps
    let exact = 1e-15;
    outcome(
        worst <= 1e-12 && literal_dev <= exact && verbatim_dev <= exact && example_ok && corrected <= 1e-12,
        format!(
            "TP residual {worst:.1e}; verbatim sum at sweep levels {literal_dev:.1e}, diag(1-p0,1-p1) for p0!=p1 {verbatim_dev:.1e}, \
             I/2 example {}; corrected residual {corrected:.1e}",
            if example_ok { "ok" } else { "wrong" }
        ),
    )
}

fn reference_state(fm: &FeatureMap, x: &[f64]) -> Vec<num_complex::Complex64> {
    let mut psi = common::zero_vector(x.len());
    common::sv_run(&build_feature_map(fm, x).unwrap(), &mut psi);
    psi
}

fn kernel_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(1003);
    let rows = common::random_rows(&mut rng, 20, 4);
    let (mut dev, mut sym, mut diag, mut min_eig): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, f64::INFINITY);
    for kind in FeatureMapKind::ALL {
        let fm = FeatureMap::new(kind);
        let k = kernel_matrix(&rows, &fm, None).unwrap();
        let psis: Vec<_> = rows.iter().map(|x| reference_state(&fm, x)).collect();
        for i in 0..rows.len() {
            for j in 0..rows.len() {
                dev = dev.max((k.get(i, j) - common::inner(&psis[i], &psis[j]).norm_sqr()).abs());
            }
            diag = diag.max((k.get(i, i) - 1.0).abs());
        }
        sym = sym.max(k.symmetry_deviation());
        min_eig = min_eig.min(k.min_eigenvalue());
    }
    let t = start.elapsed();
    outcome(
        dev <= 1e-10 && sym <= 1e-10 && diag <= 1e-10 && min_eig >= -1e-8 && within(t, 30),
        format!(
            "20 points x 3 maps: oracle {dev:.1e}, symmetry {sym:.1e}, diagonal {diag:.1e}, min eigenvalue {min_eig:.2e}, {:.2}s",
            t.as_secs_f64()
        ),
    )
}

fn born_sampling() -> Outcome {
    let mut rng = common::rng(1004);
    let shots = 1_000_000u64;
    let kinds = [FeatureMapKind::ZMap, FeatureMapKind::ZZMap, FeatureMapKind::PauliMap];
    let noises = [
        None,
        Some(NoiseConfig::new(NoiseKind::Depolarizing, 0.1)),
        Some(NoiseConfig::new(NoiseKind::AmplitudeDamping, 0.2)),
    ];
    let (mut violations, mut reproducible) = (0usize, true);
    for c in 0..10 {
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..std::f64::consts::PI)).collect();
        let fm = FeatureMap::new(kinds[c % 3]);
        let rho = encode_state(&x, &fm, noises[c % 3].as_ref()).unwrap();
        let probs = born_probabilities(&rho).probs;
        let seed = 500 + c as u64;
        let counts = sample_counts(&rho, shots, seed).unwrap();
        for (f, p) in counts.frequencies().iter().zip(&probs) {
            if (f - p).abs() > 5.0 * (p * (1.0 - p) / shots as f64).sqrt() + 1e-6 {
                violations += 1;
            }
        }
        reproducible &= sample_counts(&rho, shots, seed).unwrap() == counts;
    }
    outcome(
        violations == 0 && reproducible,
        format!("10 circuits x 1e6 shots: {violations} labels outside 5 sigma + 1e-6, reseeded counts identical: {reproducible}"),
    )
}

fn histogram_trends() -> Outcome {
    let start = Instant::now();
    let config = ExperimentConfig::from_json(
        r#"{"noise_kinds": ["Depolarizing", "AmplitudeDamping"], "levels": [0.01, 0.1, 0.2, 0.3], "shots": [1024]}"#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let study = run_histogram_study(&config, dir.path()).unwrap();
    let (mut tv_ok, mut p0_ok) = (true, true);
    for kind in FeatureMapKind::ALL {
        let label = FeatureMap::new(kind).label();
        let series = |noise: NoiseKind| {
            let mut r: Vec<_> = study
                .records
                .iter()
                .filter(|r| r.feature_map == label && r.noise.is_none_or(|k| k == noise))
                .collect();
            r.sort_by(|a, b| a.level.total_cmp(&b.level));
            r
        };
        tv_ok &= series(NoiseKind::Depolarizing)
            .windows(2)
            .all(|w| w[1].tv_to_uniform <= w[0].tv_to_uniform + 1e-12);
        p0_ok &= series(NoiseKind::AmplitudeDamping)
            .windows(2)
            .all(|w| w[1].p_zero >= w[0].p_zero - 1e-12);
    }

    // phase noise applied after encoding leaves the measured populations alone
    let mut diag_dev: f64 = 0.0;
    for kind in FeatureMapKind::ALL {
        let rho = encode_state(&study.probe, &FeatureMap::new(kind), None).unwrap();
        let before = rho.diagonal();
        for noise in [NoiseKind::Dephasing, NoiseKind::PhaseFlip] {
            for level in [0.01, 0.1, 0.2, 0.3] {
                let ch = build_channel(noise, ChannelParams::from_level(noise, level)).unwrap();
                let mut out = rho.clone();
                for q in 0..4 {
                    out = apply_channel(&out, &ch, q).unwrap();
                }
                for (a, b) in out.diagonal().iter().zip(&before) {
                    diag_dev = diag_dev.max((a - b).abs());
                }
            }
        }
    }
    let t = start.elapsed();
    outcome(
        tv_ok && p0_ok && diag_dev <= 1e-12 && within(t, 60),
        format!(
            "probe {}: depolarizing TV non-increasing {tv_ok}, damping P(0000) non-decreasing {p0_ok}, phase-noise diagonal {diag_dev:.1e}, {:.2}s",
            study.probe_id,
            t.as_secs_f64()
        ),
    )
}

fn classifier_correctness() -> Outcome {
    let start = Instant::now();
    let (train, _) = synthetic_separable(40, 10, 4, 0).unwrap();
    let mut train_acc = Vec::new();
    let (mut agree, mut total) = (0usize, 0usize);
    for kind in FeatureMapKind::ALL {
        let fm = FeatureMap::new(kind);
        for algorithm in [Algorithm::Qsvc, Algorithm::PegQsvc] {
            let model = TrainedModel::fit(algorithm, &Default::default(), &train, &fm, None, 0).unwrap();
            train_acc.push(accuracy(&model.predict(&train.features).unwrap(), &train.labels));
        }
        let k = kernel_matrix(&train.features, &fm, None).unwrap();
        let model = qsvc_train(&k, &train.labels, &QsvcSettings::default()).unwrap();
        let rows: Vec<Vec<f64>> = (0..k.n()).map(|i| k.row(i).to_vec()).collect();
        let y = train.signed_labels();
        let (alpha, bias) = common::reference_dual(&rows, &y, 1.0, 20_000);
        for row in &rows {
            let reference: f64 = alpha
                .iter()
                .zip(&y)
                .zip(row)
                .map(|((a, yj), kij)| a * yj * kij)
                .sum::<f64>()
                + bias;
            total += 1;
            agree += usize::from(reference.signum() == model.decision_value(row).unwrap().signum());
        }
    }

    let (small, _) = synthetic_separable(8, 0, 4, 1).unwrap();
    let fm = FeatureMap::new(FeatureMapKind::ZMap);
    let encoded = encode_all(&small.features, &fm, None).unwrap();
    let loss = |theta: &[f64]| {
        let probs: Vec<f64> = encoded
            .iter()
            .map(|e| qnn_forward_encoded(e, theta, 2, Readout::Qubit(0), None).unwrap())
            .collect();
        bce_loss(&probs, &small.labels)
    };
    let mut rng = common::rng(1006);
    let mut grad_dev: f64 = 0.0;
    for _ in 0..3 {
        let theta: Vec<f64> = (0..12).map(|_| rng.random_range(-3.0..3.0)).collect();
        let (_, grad) = qnn_loss_gradient(&encoded, &small.labels, &theta, 2, Readout::Qubit(0), None).unwrap();
        for (k, g) in grad.iter().enumerate() {
            let h = 1e-4;
            let (mut plus, mut minus) = (theta.clone(), theta.clone());
            plus[k] += h;
            minus[k] -= h;
            grad_dev = grad_dev.max((g - (loss(&plus) - loss(&minus)) / (2.0 * h)).abs());
        }
    }
    let t = start.elapsed();
    let min_train = train_acc.iter().copied().fold(1.0, f64::min);
    let share = agree as f64 / total as f64;
    outcome(
        min_train == 1.0 && share >= 0.99 && grad_dev <= 1e-6 && within(t, 120),
        format!(
            "min noiseless train accuracy {min_train:.3}, sign agreement {:.1}%, parameter-shift vs FD {grad_dev:.1e}, {:.2}s",
            100.0 * share,
            t.as_secs_f64()
        ),
    )
}

/// Per (algorithm, feature map, noise) pair: accuracies at level 0.01 and 0.3.
type Series = BTreeMap<(String, String, String), [Vec<f64>; 2]>;

fn exceeding(series: &Series) -> Vec<String> {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    series
        .iter()
        .filter(|(_, [low, high])| mean(high) > mean(low) + 0.05)
        .map(|((alg, fm, noise), _)| format!("{alg}/{fm}/{noise}"))
        .collect()
}

fn degradation_ordering() -> Outcome {
    let start = Instant::now();
    let config = ExperimentConfig::from_json(
        r#"{"dataset": {"source": "synthetic", "n_train": 40, "n_test": 10},
            "algorithms": ["QSVC", "PegQSVC", "QNN", "VQC"],
            "noise_kinds": ["Depolarizing", "AmplitudeDamping"],
            "levels": [0.01, 0.3], "include_noiseless": false,
            "shots": [1024], "seeds": [0, 1, 2, 3, 4]}"#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = run_accuracy_grid(&config, dir.path(), &GridOptions::default()).unwrap();
    // Variational classifiers are scored on measured (1024-shot) readout,
    // kernel classifiers on their exact decision values.
    let mut measured = Series::new();
    let mut exact = Series::new();
    let mut failed = 0;
    for cell in &report.cells {
        let CellOutcome::Ok {
            test_accuracy,
            ref shot_accuracy,
            ..
        } = cell.outcome
        else {
            failed += 1;
            continue;
        };
        let key = (
            cell.coords.algorithm.to_string(),
            cell.coords.feature_map.label(),
            cell.coords.noise.map(|k| k.to_string()).unwrap_or_default(),
        );
        let slot = usize::from(cell.coords.level > 0.1);
        let sampled = shot_accuracy
            .iter()
            .find(|s| s.shots == 1024)
            .map_or(test_accuracy, |s| s.test_accuracy);
        measured.entry(key.clone()).or_default()[slot].push(sampled);
        exact.entry(key).or_default()[slot].push(test_accuracy);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    for (key, [low, high]) in &measured {
        let [elow, ehigh] = &exact[key];
        println!(
            "    {:8} {:7} {:18} measured 0.01: {:.3}  0.3: {:.3}   exact 0.01: {:.3}  0.3: {:.3}",
            key.0,
            key.1,
            key.2,
            mean(low),
            mean(high),
            mean(elow),
            mean(ehigh)
        );
    }
    let violations = exceeding(&measured);
    let exact_violations = exceeding(&exact);
    let t = start.elapsed();
    outcome(
        violations.is_empty() && failed == 0 && measured.len() == 24 && within(t, 900),
        format!(
            "{} pairs x 5 seeds, {failed} failed cells, slack 0.05 exceeded by [{}]; \
             with exact readout for every algorithm exceeded by [{}], {:.1}s (limit 900s)",
            measured.len(),
            violations.join(", "),
            exact_violations.join(", "),
            t.as_secs_f64()
        ),
    )
}

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/sequences.csv")
}

fn determinism_and_leakage() -> Outcome {
    let config = ExperimentConfig::from_json(
        r#"{"dataset": {"source": "synthetic", "n_train": 16, "n_test": 6}, "n_qubits": 3,
            "algorithms": ["QSVC", "PegQSVC", "QNN", "VQC"], "noise_kinds": ["Depolarizing"], "levels": [0.1],
            "shots": [128], "seeds": [3], "hyperparameters": {"epochs": 5}}"#,
    )
    .unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_accuracy_grid(&config, a.path(), &GridOptions::default()).unwrap();
    let second = run_accuracy_grid(&config, b.path(), &GridOptions::default()).unwrap();
    let identical = first.body_json() == second.body_json();

    let records = load_sequences(&fixture(), SequenceFormat::Csv).unwrap();
    let settings = PipelineSettings::default();
    let prepared = prepare_dataset(&records, &settings).unwrap();
    let by_id: BTreeMap<&str, &SequenceRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let train: Vec<SequenceRecord> = prepared.train.ids.iter().map(|id| by_id[id.as_str()].clone()).collect();
    let raw = vectorize_kmer(&train, settings.k).unwrap();
    let pca = PcaModel::fit(&raw, settings.dims).unwrap();
    let scaling = ScalingBounds::fit(&pca.transform(&raw).unwrap()).unwrap();
    let stored = &prepared.preprocessing;
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let mut dev = diff(&pca.mean, &stored.pca.mean)
        .max(diff(&scaling.min, &stored.scaling.min))
        .max(diff(&scaling.max, &stored.scaling.max));
    for (x, y) in pca.components.iter().zip(&stored.pca.components) {
        dev = dev.max(diff(x, y));
    }
    outcome(
        identical && dev <= 1e-12,
        format!(
            "{} cells, report bodies identical: {identical}; train-only refit deviation {dev:.1e}",
            first.cells.len()
        ),
    )
}

fn end_to_end() -> Outcome {
    let records = load_sequences(&fixture(), SequenceFormat::Csv).unwrap();
    let prepared = prepare_dataset(&records, &PipelineSettings::default()).unwrap();
    let ones = prepared.train.labels.iter().filter(|&&y| y == 1).count();
    let majority = u8::from(2 * ones > prepared.train.len());
    let baseline = prepared.test.labels.iter().filter(|&&y| y == majority).count() as f64 / prepared.test.len() as f64;
    let fm = FeatureMap::new(FeatureMapKind::ZMap);
    let mut accs = Vec::new();
    for algorithm in Algorithm::ALL {
        match TrainedModel::fit(algorithm, &Default::default(), &prepared.train, &fm, None, 0)
            .and_then(|m| m.predict(&prepared.test.features))
        {
            Ok(p) => accs.push((algorithm, accuracy(&p, &prepared.test.labels))),
            Err(e) => return outcome(false, format!("{algorithm} failed: {e}")),
        }
    }
    let qsvc = accs.iter().find(|(a, _)| *a == Algorithm::Qsvc).unwrap().1;
    let listed: Vec<String> = accs.iter().map(|(a, v)| format!("{a} {v:.3}")).collect();
    outcome(
        records.len() == 250 && qsvc > baseline,
        format!(
            "{} sequences, {} train / {} test; test accuracy {}; majority baseline {baseline:.3}",
            records.len(),
            prepared.train.len(),
            prepared.test.len(),
            listed.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("channel conformance", channel_conformance),
        ("CPTP suite", cptp_suite),
        ("kernel oracle equivalence", kernel_oracle),
        ("Born sampling", born_sampling),
        ("histogram trends", histogram_trends),
        ("classifier correctness", classifier_correctness),
        ("noise degradation ordering", degradation_ordering),
        ("determinism and leakage", determinism_and_leakage),
        ("end-to-end sequences", end_to_end),
    ];
    let only: Option<usize> = std::env::var("NOISYQ_ACCEPTANCE_ONLY")
        .ok()
        .and_then(|s| s.parse().ok());
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failures += usize::from(!result.pass);
        println!(
            "criterion {n} [{}] {name}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
