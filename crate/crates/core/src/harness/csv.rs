use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::HarnessError;
use crate::history::{ConvergenceHistory, HistoryRow};

pub const CSV_HEADER: [&str; 6] = [
    "cumulative_inner_iters",
    "cumulative_matvecs",
    "outer_iter",
    "phase",
    "residual_norm",
    "relative_residual",
];

/// 17 significant digits: enough to parse back to the identical `f64`.
fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(history: &ConvergenceHistory, w: W) -> Result<(), HarnessError> {
    if history.is_empty() {
        return Err(HarnessError::EmptyHistory);
    }
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for row in &history.rows {
        wtr.write_record([
            row.cumulative_inner_iters.to_string(),
            row.cumulative_matvecs.to_string(),
            row.outer_iter.to_string(),
            row.phase.to_string(),
            fmt_real(row.residual_norm),
            fmt_real(row.relative_residual),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes one history as a CSV file with the standard header.
pub fn emit_csv(history: &ConvergenceHistory, path: impl AsRef<Path>) -> Result<(), HarnessError> {
    let file = File::create(path.as_ref()).map_err(|e| HarnessError::Output {
        path: path.as_ref().to_path_buf(),
        source: e,
    })?;
    write_csv(history, file)
}

pub fn read_csv<R: Read>(r: R) -> Result<ConvergenceHistory, HarnessError> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(HarnessError::Parse(format!(
            "unexpected CSV header `{header:?}`"
        )));
    }
    let mut history = ConvergenceHistory::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let bad = |what: &str| HarnessError::Parse(format!("row {}: bad {what}", i + 1));
        history.rows.push(HistoryRow {
            cumulative_inner_iters: field(0)
                .parse()
                .map_err(|_| bad("cumulative_inner_iters"))?,
            cumulative_matvecs: field(1).parse().map_err(|_| bad("cumulative_matvecs"))?,
            outer_iter: field(2).parse().map_err(|_| bad("outer_iter"))?,
            phase: field(3).parse().map_err(|_| bad("phase"))?,
            residual_norm: field(4).parse().map_err(|_| bad("residual_norm"))?,
            relative_residual: field(5).parse().map_err(|_| bad("relative_residual"))?,
        });
    }
    Ok(history)
}

pub fn read_csv_path(path: impl AsRef<Path>) -> Result<ConvergenceHistory, HarnessError> {
    read_csv(File::open(path)?)
}
