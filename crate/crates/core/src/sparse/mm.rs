//! Matrix Market coordinate format (`%%MatrixMarket matrix coordinate ...`).
//!
//! Only square real or integer matrices are accepted. Symmetric and
//! skew-symmetric files are expanded to both triangles on read; `pattern`,
//! `complex` and `hermitian` files are rejected.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use super::{SparseMatrixCsr, TripletList};

#[derive(Error, Debug)]
pub enum MmError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed header: {0}")]
    Header(String),

    #[error("unsupported field type `{0}` (only real and integer are accepted)")]
    UnsupportedField(String),

    #[error("unsupported symmetry `{0}`")]
    UnsupportedSymmetry(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("line {line}: entry ({row}, {col}) is outside a {n}x{n} matrix")]
    IndexOutOfBounds {
        line: usize,
        row: usize,
        col: usize,
        n: usize,
    },

    #[error("line {line}: cannot parse `{text}`")]
    Parse { line: usize, text: String },

    #[error("declared {declared} entries but found {found}")]
    Truncated { declared: usize, found: usize },

    #[error("line {line}: more entries than the declared {declared}")]
    TooManyEntries { line: usize, declared: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

fn parse_header(line: &str) -> Result<Symmetry, MmError> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(MmError::Header(format!(
            "expected `%%MatrixMarket matrix coordinate <field> <symmetry>`, got `{}`",
            line.trim()
        )));
    }
    if tokens[1] != "matrix" {
        return Err(MmError::Header(format!(
            "unsupported object `{}`",
            tokens[1]
        )));
    }
    if tokens[2] != "coordinate" {
        return Err(MmError::Header(format!(
            "unsupported format `{}`",
            tokens[2]
        )));
    }
    match tokens[3].as_str() {
        "real" | "integer" => {}
        "pattern" | "complex" => return Err(MmError::UnsupportedField(tokens[3].clone())),
        other => return Err(MmError::Header(format!("unknown field `{other}`"))),
    }
    match tokens[4].as_str() {
        "general" => Ok(Symmetry::General),
        "symmetric" => Ok(Symmetry::Symmetric),
        "skew-symmetric" => Ok(Symmetry::SkewSymmetric),
        other => Err(MmError::UnsupportedSymmetry(other.to_string())),
    }
}

fn parse_usize(tok: Option<&str>, line: usize, text: &str) -> Result<usize, MmError> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| MmError::Parse {
            line,
            text: text.to_string(),
        })
}

/// Reads a Matrix Market coordinate stream into CSR form.
pub fn mm_read<R: BufRead>(reader: R) -> Result<SparseMatrixCsr, MmError> {
    let mut lines = reader.lines().enumerate();

    let symmetry = match lines.next() {
        Some((_, line)) => parse_header(&line?)?,
        None => return Err(MmError::Header("empty input".into())),
    };

    let mut size: Option<(usize, usize)> = None;
    let mut triplets = TripletList::new(0);
    let mut found = 0usize;

    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }
        let mut tok = text.split_whitespace();

        let Some((n, declared)) = size else {
            let rows = parse_usize(tok.next(), lineno, text)?;
            let cols = parse_usize(tok.next(), lineno, text)?;
            let nnz = parse_usize(tok.next(), lineno, text)?;
            if tok.next().is_some() {
                return Err(MmError::Parse {
                    line: lineno,
                    text: text.to_string(),
                });
            }
            if rows != cols {
                return Err(MmError::NonSquare { rows, cols });
            }
            size = Some((rows, nnz));
            let cap = if symmetry == Symmetry::General {
                nnz
            } else {
                2 * nnz
            };
            triplets = TripletList::with_capacity(rows, cap);
            continue;
        };

        if found == declared {
            return Err(MmError::TooManyEntries {
                line: lineno,
                declared,
            });
        }
        let row = parse_usize(tok.next(), lineno, text)?;
        let col = parse_usize(tok.next(), lineno, text)?;
        let value: f64 = tok
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| MmError::Parse {
                line: lineno,
                text: text.to_string(),
            })?;
        if row == 0 || col == 0 || row > n || col > n {
            return Err(MmError::IndexOutOfBounds {
                line: lineno,
                row,
                col,
                n,
            });
        }
        let (i, k) = (row - 1, col - 1);
        triplets.push(i, k, value);
        if i != k {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => triplets.push(k, i, value),
                Symmetry::SkewSymmetric => triplets.push(k, i, -value),
            }
        }
        found += 1;
    }

    let Some((_, declared)) = size else {
        return Err(MmError::Header("missing size line".into()));
    };
    if found < declared {
        return Err(MmError::Truncated { declared, found });
    }
    // indices were validated above
    Ok(SparseMatrixCsr::from_triplets(&triplets).expect("validated indices"))
}

/// Reads a `.mtx` file from disk.
pub fn mm_read_path(path: impl AsRef<Path>) -> Result<SparseMatrixCsr, MmError> {
    mm_read(BufReader::new(File::open(path)?))
}

/// Writes `a` as a `general` real coordinate file.
///
/// Values use the shortest representation that parses back to the same
/// `f64`, so reading the output reproduces `a` exactly.
pub fn mm_write<W: Write>(a: &SparseMatrixCsr, mut w: W) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.n(), a.n(), a.nnz())?;
    for (i, k, v) in a.iter() {
        writeln!(w, "{} {} {:e}", i + 1, k + 1, v)?;
    }
    w.flush()
}

pub fn mm_write_path(a: &SparseMatrixCsr, path: impl AsRef<Path>) -> io::Result<()> {
    mm_write(a, BufWriter::new(File::create(path)?))
}
