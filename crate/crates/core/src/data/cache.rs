use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::LabeledDataset;
use crate::error::{io_err, Error, Result};

/// Header block written above cached feature matrices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheProvenance {
    pub source_sha256: String,
    pub k: usize,
    pub dims: usize,
    pub seed: u64,
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Writes `# key=value` provenance lines, then `id,split,label,f0..`.
pub fn write_feature_cache(
    path: &Path,
    provenance: &CacheProvenance,
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<()> {
    let mut out = format!(
        "# source_sha256={}\n# k={}\n# dims={}\n# seed={}\n",
        provenance.source_sha256, provenance.k, provenance.dims, provenance.seed
    );
    let width = train.n_features();
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string(), "split".into(), "label".into()];
    header.extend((0..width).map(|j| format!("f{j}")));
    writer.write_record(&header)?;
    for (split, data) in [("train", train), ("test", test)] {
        for ((id, row), y) in data.ids.iter().zip(&data.features).zip(&data.labels) {
            let mut rec = vec![id.clone(), split.to_string(), y.to_string()];
            rec.extend(row.iter().map(|x| format!("{x:?}")));
            writer.write_record(&rec)?;
        }
    }
    let body = writer.into_inner().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.into_error(),
    })?;
    out.push_str(&String::from_utf8_lossy(&body));
    fs::write(path, out).map_err(io_err(path))
}

/// Reads a cache back. Returns `None` when the provenance differs from `expected`.
pub fn read_feature_cache(path: &Path, expected: &CacheProvenance) -> Result<Option<(LabeledDataset, LabeledDataset)>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut found = CacheProvenance {
        source_sha256: String::new(),
        k: 0,
        dims: 0,
        seed: 0,
    };
    let mut header_lines = 0;
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        header_lines += 1;
        let Some((key, value)) = line.trim_start_matches('#').trim().split_once('=') else {
            continue;
        };
        let bad = |_| Error::Parse {
            path: path.to_path_buf(),
            line: header_lines,
            reason: format!("bad value for {key}"),
        };
        match key {
            "source_sha256" => found.source_sha256 = value.to_string(),
            "k" => found.k = value.parse().map_err(bad)?,
            "dims" => found.dims = value.parse().map_err(bad)?,
            "seed" => {
                found.seed = value.parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: header_lines,
                    reason: "bad seed".into(),
                })?
            }
            _ => {}
        }
    }
    if &found != expected {
        return Ok(None);
    }
    let body: String = text.lines().skip(header_lines).map(|l| format!("{l}\n")).collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let mut parts: [(Vec<String>, Vec<Vec<f64>>, Vec<u8>); 2] = Default::default();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = header_lines + i + 2;
        let parse_err = |reason: &str| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason: reason.into(),
        };
        let slot = match row.get(1) {
            Some("train") => 0,
            Some("test") => 1,
            _ => return Err(parse_err("split must be train or test")),
        };
        let label: u8 = row
            .get(2)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err("bad label"))?;
        let features = row
            .iter()
            .skip(3)
            .map(|s| s.parse::<f64>().map_err(|_| parse_err("bad feature value")))
            .collect::<Result<Vec<_>>>()?;
        parts[slot].0.push(row.get(0).unwrap_or_default().to_string());
        parts[slot].1.push(features);
        parts[slot].2.push(label);
    }
    let [train, test] = parts;
    Ok(Some((
        LabeledDataset::with_ids(train.0, train.1, train.2)?,
        LabeledDataset::with_ids(test.0, test.1, test.2)?,
    )))
}
