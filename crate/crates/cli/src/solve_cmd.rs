//! `solve`: run one method on one matrix and emit the per-iteration trace
//! as CSV (`k,alpha,beta,relres_alg,relres_true`).

use std::io::Write;

use bilanczos::{IterationTrace, Preconditioner, SolveStatus, SolverConfig, SolverError};

use crate::fmt::g17;
use crate::source::{build_rhs, load_matrix};
use crate::variants::Variant;
use crate::{exit_code, PrecondKind, EXIT_BREAKDOWN, EXIT_INPUT};

pub struct SolveOpts {
    pub matrix: String,
    pub variant: Variant,
    pub precond: PrecondKind,
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub rhs: String,
    pub output: Option<std::path::PathBuf>,
}

pub fn run(opts: &SolveOpts) -> i32 {
    let a = match load_matrix(&opts.matrix) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let b = match build_rhs(&opts.rhs, &a) {
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
            return EXIT_BREAKDOWN;
        }
    };
    let cfg = SolverConfig {
        tol: opts.tol,
        max_iter: opts.max_iter,
        record_vectors: false,
        breakdown_tol: 1e-14,
    };
    let x0 = vec![0.0; a.dim()];

    let result = match opts.variant.run(&a, &b, &x0, p.as_ref(), &cfg) {
        Ok(r) => r,
        Err(e @ SolverError::InitialShadowDegenerate { .. }) => {
            eprintln!("error: {e}");
            return EXIT_BREAKDOWN;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };

    if let Err(e) = write_csv(&result.trace, opts.output.as_deref()) {
        eprintln!("error: cannot write output: {e}");
        return EXIT_INPUT;
    }
    match &result.status {
        SolveStatus::Converged => {
            eprintln!("converged in {} iterations", result.iterations)
        }
        SolveStatus::MaxIter => eprintln!(
            "iteration limit reached after {} iterations (relres {})",
            result.iterations,
            result
                .trace
                .relres_alg
                .last()
                .map_or_else(|| "n/a".into(), |v| g17(*v))
        ),
        SolveStatus::Breakdown { stage, k } => {
            eprintln!("breakdown ({stage}) at iteration {k}")
        }
    }
    exit_code(&result.status)
}

fn write_csv(trace: &IterationTrace, path: Option<&std::path::Path>) -> std::io::Result<()> {
    let mut out: Box<dyn Write> = match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(out, "k,alpha,beta,relres_alg,relres_true")?;
    for k in 0..trace.iterations() {
        writeln!(
            out,
            "{k},{},{},{},{}",
            g17(trace.alphas[k]),
            g17(trace.betas[k]),
            g17(trace.relres_alg[k]),
            g17(trace.relres_true[k])
        )?;
    }
    out.flush()
}
