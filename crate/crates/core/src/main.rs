use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use noisyq::classifiers::{accuracy, TrainedModel};
use noisyq::data::{load_sequences, SequenceFormat};
use noisyq::harness::{
    create_run_dir, emit_summary, report_path, run_accuracy_grid, run_histogram_study, write_config, write_summary,
    ExperimentConfig, GridOptions, RunReport,
};
use noisyq::Error;

/// Noise sweeps for quantum kernel and variational classifiers.
#[derive(Parser)]
#[command(name = "noisyq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON); defaults apply when omitted.
    #[arg(long, env = "NOISYQ_CONFIG")]
    config: Option<PathBuf>,
    /// Base output directory (overrides `output_dir`).
    #[arg(long, env = "NOISYQ_OUT")]
    out: Option<PathBuf>,
    /// Replace the seed list with this single seed.
    #[arg(long, env = "NOISYQ_SEED")]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "NOISYQ_JOBS")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample output histograms of a probe input under every noise setting.
    RunHistograms(RunArgs),
    /// Train and evaluate every algorithm x feature map x noise x level x seed cell.
    RunGrid {
        #[command(flatten)]
        run: RunArgs,
        /// Continue an existing run directory instead of creating a new one.
        #[arg(long, env = "NOISYQ_RESUME")]
        resume: Option<PathBuf>,
        /// Also write training Gram matrices as CSV.
        #[arg(long)]
        write_kernels: bool,
    },
    /// Pivot a grid report into summary.csv and summary.txt.
    Summarize {
        /// A grid/report.json file or the run directory containing it.
        #[arg(long)]
        report: PathBuf,
        /// Directory for the summary files (defaults to the run directory).
        #[arg(long, env = "NOISYQ_OUT")]
        out: Option<PathBuf>,
    },
    /// Predict labels with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// CSV of `id,sequence[,label]` or `id,<features>[,label]`.
        #[arg(long)]
        input: PathBuf,
        /// Predictions CSV; printed to stdout when omitted.
        #[arg(long, env = "NOISYQ_OUT")]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => Failure::Config(msg),
            Error::ParameterOutOfRange { .. } => Failure::Config(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

fn load_config(run: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut config = match &run.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text).map_err(|e| match Failure::from(e) {
                Failure::Config(msg) | Failure::Run(msg) => Failure::Config(format!("{}: {msg}", path.display())),
            })?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &run.out {
        config.output_dir = out.clone();
    }
    if let Some(seed) = run.seed {
        config.seeds = vec![seed];
    }
    if run.jobs == Some(0) {
        return Err(Failure::Config("--jobs must be at least 1".into()));
    }
    config.validate().map_err(|e| match Failure::from(e) {
        Failure::Config(msg) | Failure::Run(msg) => Failure::Config(msg),
    })?;
    Ok(config)
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::RunHistograms(run) => {
            let config = load_config(&run)?;
            if let Some(jobs) = run.jobs {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
            }
            let dir = create_run_dir(&config.output_dir, &config)?;
            let study = run_histogram_study(&config, &dir)?;
            println!(
                "wrote {} histograms for probe {} to {}",
                study.records.len(),
                study.probe_id,
                dir.join("histograms").display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::RunGrid {
            run,
            resume,
            write_kernels,
        } => {
            let config = load_config(&run)?;
            let dir = match resume {
                Some(dir) => {
                    write_config(&dir, &config)?;
                    dir
                }
                None => create_run_dir(&config.output_dir, &config)?,
            };
            let options = GridOptions {
                jobs: run.jobs,
                write_kernels,
            };
            let report = run_accuracy_grid(&config, &dir, &options)?;
            let summary = emit_summary(&report)?;
            write_summary(&dir, &summary)?;
            print!("{}", summary.to_text());
            println!("run directory: {}", dir.display());
            if report.any_failed() {
                Ok(ExitCode::from(1))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Summarize { report, out } => {
            let path = if report.is_dir() { report_path(&report) } else { report };
            let loaded = RunReport::load(&path)?;
            let summary = emit_summary(&loaded)?;
            let dir = out.unwrap_or_else(|| run_dir_of(&path));
            fs::create_dir_all(&dir).map_err(|e| Failure::Run(format!("{}: {e}", dir.display())))?;
            write_summary(&dir, &summary)?;
            print!("{}", summary.to_text());
            Ok(ExitCode::SUCCESS)
        }
        Command::Predict { model, input, out } => {
            let model = TrainedModel::load(&model)?;
            let (ids, rows, labels) = read_prediction_input(&model, &input)?;
            let predicted = model.predict(&rows)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["id", "prediction"]).map_err(Error::from)?;
            for (id, p) in ids.iter().zip(&predicted) {
                w.write_record([id.as_str(), &p.to_string()]).map_err(Error::from)?;
            }
            let bytes = w.into_inner().map_err(|e| Failure::Run(e.to_string()))?;
            match out {
                Some(path) => fs::write(&path, &bytes).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?,
                None => print!("{}", String::from_utf8_lossy(&bytes)),
            }
            if let Some(labels) = labels {
                eprintln!("accuracy: {:.4}", accuracy(&predicted, &labels));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// `<run>/grid/report.json` -> `<run>`.
fn run_dir_of(report: &Path) -> PathBuf {
    report
        .parent()
        .and_then(Path::parent)
        .map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

type PredictionInput = (Vec<String>, Vec<Vec<f64>>, Option<Vec<u8>>);

fn read_prediction_input(model: &TrainedModel, input: &Path) -> Result<PredictionInput, Failure> {
    let mut reader = csv::Reader::from_path(input).map_err(Error::from)?;
    let header = reader.headers().map_err(Error::from)?.clone();
    if header.iter().any(|h| h.eq_ignore_ascii_case("sequence")) {
        let pre = model
            .preprocessing
            .as_ref()
            .ok_or_else(|| Failure::Run("model has no sequence preprocessing; pass scaled features".into()))?;
        let records = load_sequences(input, SequenceFormat::Csv)?;
        let rows = pre.apply(&records)?;
        let ids = records.iter().map(|r| r.id.clone()).collect();
        let labels = records.iter().map(|r| r.label).collect();
        return Ok((ids, rows, Some(labels)));
    }
    let id_col = header.iter().position(|h| h == "id");
    let label_col = header.iter().position(|h| h == "label");
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(Error::from)?;
        let line = i + 2;
        let mut row = Vec::new();
        for (c, field) in rec.iter().enumerate() {
            if Some(c) == id_col || Some(c) == label_col {
                continue;
            }
            row.push(field.trim().parse::<f64>().map_err(|_| Error::Parse {
                path: input.to_path_buf(),
                line,
                reason: format!("'{field}' is not a number"),
            })?);
        }
        ids.push(
            id_col
                .and_then(|c| rec.get(c))
                .map_or_else(|| format!("row{i}"), str::to_string),
        );
        if let Some(c) = label_col {
            labels.push(rec.get(c).and_then(|s| s.trim().parse().ok()).unwrap_or(u8::MAX));
        }
        rows.push(row);
    }
    let labels = (label_col.is_some() && labels.iter().all(|&y| y <= 1)).then_some(labels);
    Ok((ids, rows, labels))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("NOISYQ_LOG", "info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("error: invalid config: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
