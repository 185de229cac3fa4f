//! Matrix and right-hand-side loading for the CLI.
//!
//! A matrix source is either a generator spec (`gen:stencil:M:CONV` or
//! `gen:random:N:DENSITY:SEED`) or a Matrix Market file path; relative paths
//! that do not resolve are retried under `$KRYLOV_MATRIX_DIR`.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use bilanczos::{generate_random, generate_stencil, read_matrix_market, CsrMatrix};

/// Environment variable naming an extra directory to search for matrix files.
pub const MATRIX_DIR_ENV: &str = "KRYLOV_MATRIX_DIR";

pub fn load_matrix(spec: &str) -> Result<CsrMatrix, String> {
    if let Some(rest) = spec.strip_prefix("gen:") {
        return generate(rest);
    }
    let path = resolve_path(spec).ok_or_else(|| {
        format!("matrix file `{spec}` not found (also searched ${MATRIX_DIR_ENV})")
    })?;
    let file = File::open(&path).map_err(|e| format!("cannot open {}: {e}", path.display()))?;
    read_matrix_market(BufReader::new(file)).map_err(|e| format!("{}: {e}", path.display()))
}

fn resolve_path(spec: &str) -> Option<PathBuf> {
    let direct = Path::new(spec);
    if direct.exists() {
        return Some(direct.to_path_buf());
    }
    if direct.is_relative() {
        if let Ok(dir) = std::env::var(MATRIX_DIR_ENV) {
            let candidate = Path::new(&dir).join(direct);
            if candidate.exists() {
                return Some(candidate);
            }
        }
    }
    None
}

fn generate(rest: &str) -> Result<CsrMatrix, String> {
    let parts: Vec<&str> = rest.split(':').collect();
    match parts.as_slice() {
        ["stencil", m, conv] => {
            let m: usize = m.parse().map_err(|_| format!("bad grid size `{m}`"))?;
            let conv: f64 = conv.parse().map_err(|_| format!("bad convection `{conv}`"))?;
            if m < 2 {
                return Err("stencil grid must be at least 2".into());
            }
            Ok(generate_stencil(m, conv))
        }
        ["random", n, density, seed] => {
            let n: usize = n.parse().map_err(|_| format!("bad dimension `{n}`"))?;
            let density: f64 = density.parse().map_err(|_| format!("bad density `{density}`"))?;
            let seed: u64 = seed.parse().map_err(|_| format!("bad seed `{seed}`"))?;
            if n == 0 || density <= 0.0 || density > 1.0 || density.is_nan() {
                return Err("random generator needs n >= 1 and density in (0, 1]".into());
            }
            Ok(generate_random(n, density, seed))
        }
        _ => Err(format!(
            "unknown generator `gen:{rest}` (expected gen:stencil:M:CONV or gen:random:N:DENSITY:SEED)"
        )),
    }
}

/// Right-hand-side modes: `ones-solution` (b = A*1, the all-ones exact
/// solution), `unit` (b = e_1) or `file:PATH` (whitespace-separated values).
pub fn build_rhs(mode: &str, a: &CsrMatrix) -> Result<Vec<f64>, String> {
    let n = a.dim();
    match mode {
        "ones-solution" => Ok(a.matvec(&vec![1.0; n])),
        "unit" => {
            let mut b = vec![0.0; n];
            b[0] = 1.0;
            Ok(b)
        }
        other => {
            let path = other.strip_prefix("file:").ok_or_else(|| {
                format!("unknown rhs mode `{other}` (ones-solution, unit, file:PATH)")
            })?;
            let text =
                std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
            let values: Result<Vec<f64>, _> =
                text.split_whitespace().map(str::parse::<f64>).collect();
            let values = values.map_err(|e| format!("{path}: bad value: {e}"))?;
            if values.len() != n {
                return Err(format!(
                    "{path}: expected {n} values, found {}",
                    values.len()
                ));
            }
            Ok(values)
        }
    }
}
