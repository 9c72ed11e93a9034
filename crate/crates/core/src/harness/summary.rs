use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::grid::{level_tag, CellOutcome, RunReport};
use crate::channels::NoiseKind;
use crate::error::{Error, Result};

/// Mean and sample standard deviation over seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Zero when only one seed contributed.
    pub sd: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, sd, n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub noise: Option<NoiseKind>,
    pub level: f64,
    /// One entry per column; `None` when every seed of that cell failed.
    pub test: Vec<Option<Stat>>,
    pub train: Vec<Option<Stat>>,
}

/// Pivot of a report: rows (noise kind, level), columns algorithm x feature map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// `ALGORITHM/featuremap` labels.
    pub columns: Vec<String>,
    pub rows: Vec<SummaryRow>,
    pub failed_cells: usize,
}

fn noise_label(noise: Option<NoiseKind>) -> &'static str {
    noise.map_or("none", NoiseKind::slug)
}

pub fn emit_summary(report: &RunReport) -> Result<Summary> {
    if report.cells.is_empty() {
        return Err(Error::InvalidData("report has no cells".into()));
    }
    let mut columns: Vec<(crate::classifiers::Algorithm, String)> = Vec::new();
    let mut values: BTreeMap<((u8, Option<NoiseKind>), u64, usize), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let mut failed = 0;
    for cell in &report.cells {
        let col_id = (cell.coords.algorithm, cell.coords.feature_map.label());
        let col = match columns.iter().position(|c| *c == col_id) {
            Some(i) => i,
            None => {
                columns.push(col_id);
                columns.len() - 1
            }
        };
        // none sorts before every noise kind
        let noise_key = (u8::from(cell.coords.noise.is_some()), cell.coords.noise);
        let entry = values.entry((noise_key, cell.coords.level.to_bits(), col)).or_default();
        match &cell.outcome {
            CellOutcome::Ok {
                train_accuracy,
                test_accuracy,
                ..
            } => {
                entry.0.push(*train_accuracy);
                entry.1.push(*test_accuracy);
            }
            CellOutcome::Failed { .. } => failed += 1,
        }
    }

    let mut rows: Vec<SummaryRow> = Vec::new();
    for (((_, noise), level_bits, col), (train, test)) in values {
        let level = f64::from_bits(level_bits);
        let needs_row = rows
            .last()
            .is_none_or(|r| r.noise != noise || r.level.to_bits() != level_bits);
        if needs_row {
            rows.push(SummaryRow {
                noise,
                level,
                test: vec![None; columns.len()],
                train: vec![None; columns.len()],
            });
        }
        let row = rows.last_mut().expect("row pushed");
        row.train[col] = Stat::of(&train);
        row.test[col] = Stat::of(&test);
    }
    // levels are non-negative, so bit order equals numeric order
    Ok(Summary {
        columns: columns.iter().map(|(a, fm)| format!("{}/{fm}", a.name())).collect(),
        rows,
        failed_cells: failed,
    })
}

impl Summary {
    /// Aligned text table of test accuracy `mean±sd`.
    pub fn to_text(&self) -> String {
        let fmt_stat = |s: &Option<Stat>| s.map_or("failed".to_string(), |s| format!("{:.3}±{:.3}", s.mean, s.sd));
        let mut header = vec!["noise".to_string(), "level".to_string()];
        header.extend(self.columns.iter().cloned());
        let mut table: Vec<Vec<String>> = vec![header];
        for row in &self.rows {
            let mut line = vec![noise_label(row.noise).to_string(), level_tag(row.level)];
            line.extend(row.test.iter().map(fmt_stat));
            table.push(line);
        }
        let widths: Vec<usize> = (0..table[0].len())
            .map(|c| table.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::from("test accuracy (mean±sd over seeds)\n");
        for r in &table {
            let cells: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        if self.failed_cells > 0 {
            let _ = writeln!(out, "{} cell(s) failed", self.failed_cells);
        }
        out
    }

    /// CSV pivot with `_test_mean`, `_test_sd`, `_train_mean`, `_train_sd` per column.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["noise".to_string(), "level".to_string()];
        for c in &self.columns {
            for suffix in ["test_mean", "test_sd", "train_mean", "train_sd", "n_seeds"] {
                header.push(format!("{c}_{suffix}"));
            }
        }
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![noise_label(row.noise).to_string(), level_tag(row.level)];
            for (test, train) in row.test.iter().zip(&row.train) {
                match (test, train) {
                    (Some(te), Some(tr)) => rec.extend([
                        format!("{:.6}", te.mean),
                        format!("{:.6}", te.sd),
                        format!("{:.6}", tr.mean),
                        format!("{:.6}", tr.sd),
                        te.n.to_string(),
                    ]),
                    _ => rec.extend(["".into(), "".into(), "".into(), "".into(), "0".into()]),
                }
            }
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
