//! Writes a labelled `id,sequence,label` CSV of synthetic sequences.
//!
//! cargo run --example make_fixture -- <out.csv> [n] [length] [seed]

use std::env;
use std::process::ExitCode;

use noisyq::data::synthetic_sequences;

fn main() -> ExitCode {
    let args: Vec<String> = env::args().skip(1).collect();
    let Some(out) = args.first() else {
        eprintln!("usage: make_fixture <out.csv> [n] [length] [seed]");
        return ExitCode::from(2);
    };
    let num = |i: usize, default: u64| args.get(i).map_or(Ok(default), |s| s.parse::<u64>());
    let (Ok(n), Ok(length), Ok(seed)) = (num(1, 250), num(2, 200), num(3, 2024)) else {
        eprintln!("n, length and seed must be non-negative integers");
        return ExitCode::from(2);
    };
    let records = synthetic_sequences(n as usize, length as usize, seed);
    let mut w = match csv::Writer::from_path(out) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("{out}: {e}");
            return ExitCode::from(1);
        }
    };
    let written = w.write_record(["id", "sequence", "label"]).and_then(|_| {
        records
            .iter()
            .try_for_each(|r| w.write_record([r.id.as_str(), &r.sequence, &r.label.to_string()]))
    });
    if let Err(e) = written.and_then(|_| w.flush().map_err(csv::Error::from)) {
        eprintln!("{out}: {e}");
        return ExitCode::from(1);
    }
    println!("wrote {} sequences to {out}", records.len());
    ExitCode::SUCCESS
}
