use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::grid::level_tag;
use super::write_atomic;
use crate::channels::{NoiseConfig, NoiseKind};
use crate::error::{io_err, Error, Result};
use crate::kernels::encode_state;
use crate::simulator::{born_probabilities, sample_counts, total_variation};

/// One histogram cell of the study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRecord {
    pub feature_map: String,
    pub noise: Option<NoiseKind>,
    pub level: f64,
    pub shots: u64,
    pub seed: u64,
    /// Relative to the run directory.
    pub path: String,
    /// Exact Born distribution of the probe state.
    pub probabilities: Vec<f64>,
    pub tv_to_noiseless: f64,
    /// Same distance measured on sampled frequencies.
    pub tv_to_noiseless_sampled: f64,
    pub tv_to_uniform: f64,
    /// Probability of the all-zeros outcome.
    pub p_zero: f64,
    pub purity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramStudy {
    pub config_hash: String,
    /// Training example used as the probe input.
    pub probe_id: String,
    pub probe: Vec<f64>,
    pub records: Vec<HistogramRecord>,
}

/// Encodes the probe (training example 0) under every feature map and noise
/// setting, samples `shots[0]` counts with `seeds[0]`, and writes one CSV per
/// setting plus `histograms/summary.csv`.
pub fn run_histogram_study(config: &ExperimentConfig, run_dir: &Path) -> Result<HistogramStudy> {
    config.validate()?;
    let dir = run_dir.join("histograms");
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let splits = config.prepare_splits()?;
    let probe = splits
        .train
        .features
        .first()
        .cloned()
        .ok_or_else(|| Error::InvalidData("empty training split".into()))?;
    let probe_id = splits.train.ids[0].clone();
    let shots = config.shots[0];
    let seed = config.seeds[0];
    let dim = 1usize << config.n_qubits;
    let uniform = vec![1.0 / dim as f64; dim];

    let mut records = Vec::new();
    for fm in &config.feature_maps {
        let mut settings: Vec<(Option<NoiseKind>, f64)> = vec![(None, 0.0)];
        for &kind in &config.noise_kinds {
            settings.extend(config.levels.iter().map(|&l| (Some(kind), l)));
        }
        let mut baseline: Option<(Vec<f64>, Vec<f64>)> = None;
        for (kind, level) in settings {
            let noise = kind.map(|k| NoiseConfig::new(k, level).with_thermal_model(config.thermal_model));
            let rho = encode_state(&probe, fm, noise.as_ref())?;
            let born = born_probabilities(&rho);
            let counts = sample_counts(&rho, shots, seed)?;
            let freqs = counts.frequencies();
            let (base_p, base_f) = baseline.get_or_insert_with(|| (born.probs.clone(), freqs.clone()));

            let name = format!(
                "{}_{}_{}.csv",
                fm.label(),
                kind.map_or("none", NoiseKind::slug),
                level_tag(level)
            );
            let metadata = [
                ("feature_map", fm.label()),
                ("noise", kind.map_or("none".to_string(), |k| k.slug().to_string())),
                ("level", level_tag(level)),
                ("probe_id", probe_id.clone()),
            ];
            counts.write_csv(&dir.join(&name), &metadata)?;
            records.push(HistogramRecord {
                feature_map: fm.label(),
                noise: kind,
                level,
                shots,
                seed,
                path: format!("histograms/{name}"),
                tv_to_noiseless: total_variation(&born.probs, base_p),
                tv_to_noiseless_sampled: total_variation(&freqs, base_f),
                tv_to_uniform: total_variation(&born.probs, &uniform),
                p_zero: born.probs[0],
                probabilities: born.probs,
                purity: rho.purity(),
            });
        }
    }

    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record([
        "feature_map",
        "noise",
        "level",
        "shots",
        "seed",
        "tv_to_noiseless",
        "tv_to_noiseless_sampled",
        "tv_to_uniform",
        "p_zero",
        "purity",
        "file",
    ])?;
    for r in &records {
        csv.write_record([
            r.feature_map.clone(),
            r.noise.map_or("none".into(), |k| k.slug().to_string()),
            level_tag(r.level),
            r.shots.to_string(),
            r.seed.to_string(),
            format!("{:.12}", r.tv_to_noiseless),
            format!("{:.12}", r.tv_to_noiseless_sampled),
            format!("{:.12}", r.tv_to_uniform),
            format!("{:.12}", r.p_zero),
            format!("{:.12}", r.purity),
            r.path.clone(),
        ])?;
    }
    let bytes = csv.into_inner().map_err(|e| Error::Io {
        path: dir.join("summary.csv"),
        source: e.into_error(),
    })?;
    write_atomic(&dir.join("summary.csv"), &bytes)?;

    Ok(HistogramStudy {
        config_hash: config.hash(),
        probe_id,
        probe,
        records,
    })
}
