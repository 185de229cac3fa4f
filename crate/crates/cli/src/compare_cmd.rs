//! `compare`: run several variants on one matrix, emit a wide CSV of their
//! traces and a machine-readable verdict per variant pair.

use std::io::Write;

use bilanczos::{rel_dev, Preconditioner, SolveResult, SolverConfig};

use crate::fmt::g17;
use crate::source::{build_rhs, load_matrix};
use crate::variants::Variant;
use crate::{PrecondKind, EXIT_INPUT, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareMode {
    /// Plot-style comparison of `alpha_k`/`beta_k` over a fixed iteration
    /// window (no convergence stop).
    AlphaBeta,
    /// Comparison of the adjusted relative residual histories under the
    /// normal stopping criterion.
    Relres,
}

pub struct CompareOpts {
    pub matrix: String,
    pub variants: Vec<Variant>,
    pub k_max: usize,
    pub precond: PrecondKind,
    pub mode: CompareMode,
    pub tol: f64,
    pub agree_tol: f64,
    pub differ_tol: f64,
    pub output: Option<std::path::PathBuf>,
}

pub fn run(opts: &CompareOpts) -> i32 {
    let a = match load_matrix(&opts.matrix) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let b = match build_rhs("ones-solution", &a) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let p: Box<dyn Preconditioner> = match opts.precond.build(&a) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let x0 = vec![0.0; a.dim()];
    // Runs stop at --tol or at the k_max window, whichever comes first;
    // iterating past residual stagnation would compare rounding noise.
    let cfg = match opts.mode {
        CompareMode::AlphaBeta => SolverConfig {
            tol: opts.tol,
            max_iter: Some(opts.k_max),
            record_vectors: false,
            breakdown_tol: 1e-14,
        },
        CompareMode::Relres => SolverConfig {
            tol: opts.tol,
            max_iter: None,
            record_vectors: false,
            breakdown_tol: 1e-14,
        },
    };

    let mut runs: Vec<(String, Option<SolveResult>)> = Vec::new();
    for v in &opts.variants {
        match v.run(&a, &b, &x0, p.as_ref(), &cfg) {
            Ok(r) => runs.push((v.label(), Some(r))),
            Err(e) => {
                eprintln!("warning: {}: {e}", v.label());
                runs.push((v.label(), None));
            }
        }
    }
    if runs.iter().all(|(_, r)| r.is_none()) {
        eprintln!("error: every variant failed");
        return EXIT_INPUT;
    }

    if let Err(e) = write_csv(opts, &runs) {
        eprintln!("error: cannot write output: {e}");
        return EXIT_INPUT;
    }
    print_verdicts(opts, &runs);
    EXIT_OK
}

fn write_csv(opts: &CompareOpts, runs: &[(String, Option<SolveResult>)]) -> std::io::Result<()> {
    let mut out: Box<dyn Write> = match &opts.output {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    };

    let cell = |series: Option<&[f64]>, k: usize| -> String {
        series
            .and_then(|s| s.get(k))
            .map(|v| g17(*v))
            .unwrap_or_default()
    };

    match opts.mode {
        CompareMode::AlphaBeta => {
            let mut header = String::from("k");
            for (label, _) in runs {
                header.push_str(&format!(",alpha_{label}"));
            }
            for (label, _) in runs {
                header.push_str(&format!(",beta_{label}"));
            }
            writeln!(out, "{header}")?;
            for k in 0..opts.k_max {
                let mut row = k.to_string();
                for (_, r) in runs {
                    row.push(',');
                    row.push_str(&cell(r.as_ref().map(|r| r.trace.alphas.as_slice()), k));
                }
                for (_, r) in runs {
                    row.push(',');
                    row.push_str(&cell(r.as_ref().map(|r| r.trace.betas.as_slice()), k));
                }
                writeln!(out, "{row}")?;
            }
        }
        CompareMode::Relres => {
            let mut header = String::from("k");
            for (label, _) in runs {
                header.push_str(&format!(",relres_{label}"));
            }
            writeln!(out, "{header}")?;
            let longest = runs
                .iter()
                .filter_map(|(_, r)| r.as_ref().map(|r| r.iterations))
                .max()
                .unwrap_or(0);
            for k in 0..longest {
                let mut row = k.to_string();
                for (_, r) in runs {
                    row.push(',');
                    row.push_str(&cell(r.as_ref().map(|r| r.trace.relres_alg.as_slice()), k));
                }
                writeln!(out, "{row}")?;
            }
        }
    }
    out.flush()
}

/// One line per pair: `verdict,<v1>,<v2>,<agree|differ|neither>,<max_rel_dev>`.
/// `agree` means every compared entry is within `agree_tol`, `differ` means
/// some entry deviates beyond `differ_tol`.
fn print_verdicts(opts: &CompareOpts, runs: &[(String, Option<SolveResult>)]) {
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let (l1, r1) = &runs[i];
            let (l2, r2) = &runs[j];
            let (Some(r1), Some(r2)) = (r1.as_ref(), r2.as_ref()) else {
                println!("verdict,{l1},{l2},unavailable,");
                continue;
            };
            let k_cmp = opts.k_max.min(r1.iterations).min(r2.iterations);
            let mut worst = 0.0f64;
            for k in 0..k_cmp {
                let dev = match opts.mode {
                    CompareMode::AlphaBeta => rel_dev(r1.trace.alphas[k], r2.trace.alphas[k])
                        .max(rel_dev(r1.trace.betas[k], r2.trace.betas[k])),
                    CompareMode::Relres => rel_dev(r1.trace.relres_alg[k], r2.trace.relres_alg[k]),
                };
                worst = worst.max(dev);
            }
            let class = if worst <= opts.agree_tol {
                "agree"
            } else if worst > opts.differ_tol {
                "differ"
            } else {
                "neither"
            };
            println!("verdict,{l1},{l2},{class},{}", g17(worst));
        }
    }
}
