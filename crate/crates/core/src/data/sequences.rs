use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub id: String,
    /// Upper-case over `{A, C, G, T, N}`.
    pub sequence: String,
    pub label: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceFormat {
    /// Header `id,sequence,label`.
    Csv,
    /// FASTA records plus a `<name>.labels.csv` file with header `id,label`.
    FastaWithSidecar,
}

impl SequenceFormat {
    /// Guesses the format from the file extension.
    pub fn from_path(path: &Path) -> Self {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("fa" | "fasta" | "fna") => SequenceFormat::FastaWithSidecar,
            _ => SequenceFormat::Csv,
        }
    }
}

/// `reads.fasta` -> `reads.labels.csv` next to it.
pub fn sidecar_path(fasta: &Path) -> PathBuf {
    let stem = fasta.file_stem().and_then(|s| s.to_str()).unwrap_or("sequences");
    fasta.with_file_name(format!("{stem}.labels.csv"))
}

fn parse_error(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn parse_label(raw: &str) -> std::result::Result<u8, String> {
    match raw.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(format!("label '{other}' is not 0 or 1")),
    }
}

fn normalize_sequence(raw: &str) -> std::result::Result<String, String> {
    let seq = raw.trim().to_ascii_uppercase();
    if seq.is_empty() {
        return Err("empty sequence".into());
    }
    if let Some(bad) = seq.chars().find(|c| !matches!(c, 'A' | 'C' | 'G' | 'T' | 'N')) {
        return Err(format!("unexpected character '{bad}' in sequence"));
    }
    Ok(seq)
}

/// Reads labelled sequences. Any malformed row aborts the load with its line number.
pub fn load_sequences(path: &Path, format: SequenceFormat) -> Result<Vec<SequenceRecord>> {
    let records = match format {
        SequenceFormat::Csv => load_csv(path)?,
        SequenceFormat::FastaWithSidecar => load_fasta(path)?,
    };
    if records.is_empty() {
        return Err(parse_error(path, 0, "no records"));
    }
    Ok(records)
}

fn load_csv(path: &Path) -> Result<Vec<SequenceRecord>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| parse_error(path, 1, format!("missing column '{name}'")))
    };
    let (id_col, seq_col, label_col) = (column("id")?, column("sequence")?, column("label")?);

    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(path, line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| row.get(i).ok_or_else(|| parse_error(path, line, "too few fields"));
        let id = field(id_col)?.to_string();
        let sequence = normalize_sequence(field(seq_col)?).map_err(|r| parse_error(path, line, r))?;
        let label = parse_label(field(label_col)?).map_err(|r| parse_error(path, line, r))?;
        out.push(SequenceRecord { id, sequence, label });
    }
    Ok(out)
}

fn load_fasta(path: &Path) -> Result<Vec<SequenceRecord>> {
    let sidecar = sidecar_path(path);
    let labels_text = fs::read_to_string(&sidecar).map_err(io_err(&sidecar))?;
    let mut labels = HashMap::new();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(labels_text.as_bytes());
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let (Some(id), Some(label)) = (row.get(0), row.get(1)) else {
            return Err(parse_error(&sidecar, line, "expected id,label"));
        };
        let label = parse_label(label).map_err(|r| parse_error(&sidecar, line, r))?;
        labels.insert(id.to_string(), label);
    }

    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    let mut current: Option<(String, usize, String)> = None;
    let finish = |entry: (String, usize, String), out: &mut Vec<SequenceRecord>| -> Result<()> {
        let (id, line, seq) = entry;
        let sequence = normalize_sequence(&seq).map_err(|r| parse_error(path, line, r))?;
        let label = *labels
            .get(&id)
            .ok_or_else(|| parse_error(path, line, format!("no label for '{id}' in {}", sidecar.display())))?;
        out.push(SequenceRecord { id, sequence, label });
        Ok(())
    };
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            if let Some(entry) = current.take() {
                finish(entry, &mut out)?;
            }
            let id = header.split_whitespace().next().unwrap_or("").to_string();
            if id.is_empty() {
                return Err(parse_error(path, line_no, "empty FASTA header"));
            }
            current = Some((id, line_no, String::new()));
        } else {
            match current.as_mut() {
                Some((_, _, seq)) => seq.push_str(line),
                None => return Err(parse_error(path, line_no, "sequence data before the first header")),
            }
        }
    }
    if let Some(entry) = current.take() {
        finish(entry, &mut out)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_two_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        fs::write(&path, "id,sequence,label\na,ACGT,0\nb,ggnt,1\n").unwrap();
        let recs = load_sequences(&path, SequenceFormat::Csv).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].sequence, "GGNT");
        assert_eq!(recs[1].label, 1);
    }

    #[test]
    fn bad_label_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        fs::write(&path, "id,sequence,label\na,ACGT,0\nb,ACGT,2\n").unwrap();
        match load_sequences(&path, SequenceFormat::Csv) {
            Err(Error::Parse { line, reason, .. }) => {
                assert_eq!(line, 3);
                assert!(reason.contains("'2'"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_file_and_bad_characters() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        fs::write(&path, "id,sequence,label\n").unwrap();
        assert!(load_sequences(&path, SequenceFormat::Csv).is_err());
        fs::write(&path, "id,sequence,label\na,ACXT,0\n").unwrap();
        assert!(load_sequences(&path, SequenceFormat::Csv).is_err());
        assert!(load_sequences(&dir.path().join("missing.csv"), SequenceFormat::Csv).is_err());
    }

    #[test]
    fn fasta_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("reads.fasta");
        fs::write(&path, ">r1 first\nACG\nTT\n>r2\nNNAC\n").unwrap();
        fs::write(dir.path().join("reads.labels.csv"), "id,label\nr1,1\nr2,0\n").unwrap();
        assert_eq!(SequenceFormat::from_path(&path), SequenceFormat::FastaWithSidecar);
        let recs = load_sequences(&path, SequenceFormat::FastaWithSidecar).unwrap();
        assert_eq!(recs[0].sequence, "ACGTT");
        assert_eq!(recs[0].label, 1);
        assert_eq!(recs[1].label, 0);
    }
}
