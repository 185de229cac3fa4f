//! Matrix Market exchange format: `matrix coordinate real general|symmetric`.
//!
//! ASCII, 1-based indices, `%` comment lines. Symmetric storage is expanded
//! to the full matrix on read; duplicate entries are summed. Only square real
//! coordinate matrices are accepted.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::sparse::CsrMatrix;

#[derive(Debug, Error)]
pub enum MatrixMarketError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(
        "line {line}: unsupported matrix kind `{kind}` (only coordinate real general/symmetric)"
    )]
    Unsupported { line: usize, kind: String },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}

fn parse_err(line: usize, msg: impl Into<String>) -> MatrixMarketError {
    MatrixMarketError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parse a Matrix Market coordinate stream into a CSR matrix.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<CsrMatrix, MatrixMarketError> {
    let mut lines = reader.lines().enumerate();

    // Header: %%MatrixMarket matrix coordinate real general|symmetric
    let (lineno, header) = match lines.next() {
        Some((i, l)) => (i + 1, l?),
        None => return Err(parse_err(1, "empty input")),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5 || !fields[0].eq_ignore_ascii_case("%%MatrixMarket") {
        return Err(parse_err(
            lineno,
            "expected `%%MatrixMarket matrix coordinate real <symmetry>` header",
        ));
    }
    if !fields[1].eq_ignore_ascii_case("matrix") || !fields[2].eq_ignore_ascii_case("coordinate") {
        return Err(MatrixMarketError::Unsupported {
            line: lineno,
            kind: format!("{} {}", fields[1], fields[2]),
        });
    }
    if !fields[3].eq_ignore_ascii_case("real") {
        return Err(MatrixMarketError::Unsupported {
            line: lineno,
            kind: fields[3].to_string(),
        });
    }
    let symmetric = if fields[4].eq_ignore_ascii_case("general") {
        false
    } else if fields[4].eq_ignore_ascii_case("symmetric") {
        true
    } else {
        return Err(MatrixMarketError::Unsupported {
            line: lineno,
            kind: fields[4].to_string(),
        });
    };

    // Size line (first non-comment, non-blank line after the header).
    let mut dims: Option<(usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut stored = 0usize;
    let mut last_line = lineno;
    for (idx, line) in lines {
        let lineno = idx + 1;
        last_line = lineno;
        let line = line?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('%') {
            continue;
        }
        let mut it = body.split_whitespace();
        match dims {
            None => {
                let rows: usize = it
                    .next()
                    .ok_or_else(|| parse_err(lineno, "missing row count"))?
                    .parse()
                    .map_err(|_| parse_err(lineno, "cannot parse row count"))?;
                let cols: usize = it
                    .next()
                    .ok_or_else(|| parse_err(lineno, "missing column count"))?
                    .parse()
                    .map_err(|_| parse_err(lineno, "cannot parse column count"))?;
                let nnz: usize = it
                    .next()
                    .ok_or_else(|| parse_err(lineno, "missing nonzero count"))?
                    .parse()
                    .map_err(|_| parse_err(lineno, "cannot parse nonzero count"))?;
                if rows != cols {
                    return Err(MatrixMarketError::NotSquare { rows, cols });
                }
                dims = Some((rows, nnz));
                triplets.reserve(if symmetric { 2 * nnz } else { nnz });
            }
            Some((n, nnz)) => {
                if stored >= nnz {
                    return Err(parse_err(lineno, "more entries than declared"));
                }
                let i: usize = it
                    .next()
                    .ok_or_else(|| parse_err(lineno, "missing row index"))?
                    .parse()
                    .map_err(|_| parse_err(lineno, "cannot parse row index"))?;
                let j: usize = it
                    .next()
                    .ok_or_else(|| parse_err(lineno, "missing column index"))?
                    .parse()
                    .map_err(|_| parse_err(lineno, "cannot parse column index"))?;
                let v: f64 = it
                    .next()
                    .ok_or_else(|| parse_err(lineno, "missing value"))?
                    .parse()
                    .map_err(|_| parse_err(lineno, "cannot parse value"))?;
                if i < 1 || i > n || j < 1 || j > n {
                    return Err(parse_err(
                        lineno,
                        format!("index ({i}, {j}) out of range for dimension {n}"),
                    ));
                }
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
                stored += 1;
            }
        }
    }

    let (n, nnz) = dims.ok_or_else(|| parse_err(last_line, "missing size line"))?;
    if stored != nnz {
        return Err(parse_err(
            last_line,
            format!("expected {nnz} entries, found {stored}"),
        ));
    }

    CsrMatrix::from_triplets(n, &triplets)
        .map_err(|e| parse_err(0, format!("invalid coordinate data: {e}")))
}

/// Write a CSR matrix as `matrix coordinate real general`.
///
/// Values are printed with Rust's shortest round-trip formatting, so reading
/// the output back reproduces the stored values exactly.
pub fn write_matrix_market<W: Write>(m: &CsrMatrix, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.dim(), m.dim(), m.nnz())?;
    for i in 0..m.dim() {
        let (cols, vals) = m.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}
