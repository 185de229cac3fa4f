//! Command-line harness for the bilanczos solver library.
//!
//! Exit codes: 0 converged / all checks passed, 1 input error, 2 iteration
//! limit, 3 numerical breakdown, 4 verification failure.

mod compare_cmd;
mod fmt;
mod solve_cmd;
mod source;
mod variants;
mod verify_cmd;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use bilanczos::{ilu0_factorize, CsrMatrix, IdentityPrec, Preconditioner, SolveStatus};

use compare_cmd::CompareMode;
use variants::{IsrvName, Variant};

pub(crate) const EXIT_OK: i32 = 0;
pub(crate) const EXIT_INPUT: i32 = 1;
pub(crate) const EXIT_MAXITER: i32 = 2;
pub(crate) const EXIT_BREAKDOWN: i32 = 3;
pub(crate) const EXIT_VERIFY: i32 = 4;

pub(crate) fn exit_code(status: &SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged => EXIT_OK,
        SolveStatus::MaxIter => EXIT_MAXITER,
        SolveStatus::Breakdown { .. } => EXIT_BREAKDOWN,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum PrecondKind {
    None,
    Ilu0,
}

impl PrecondKind {
    pub(crate) fn build(&self, a: &CsrMatrix) -> Result<Box<dyn Preconditioner>, String> {
        match self {
            PrecondKind::None => Ok(Box::new(IdentityPrec)),
            PrecondKind::Ilu0 => ilu0_factorize(a)
                .map(|f| Box::new(f) as Box<dyn Preconditioner>)
                .map_err(|e| e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    AlphaBeta,
    Relres,
}

#[derive(Parser)]
#[command(
    name = "bilanczos",
    version,
    about = "Preconditioned BiCG/BiCR solver harness"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one system and emit the iteration trace as CSV.
    Solve {
        /// Matrix Market file, or gen:stencil:M:CONV / gen:random:N:DENSITY:SEED.
        #[arg(long)]
        matrix: String,
        /// bicg, bicg-conv, pbicg-right, pbicg-left, pbicg-std, pbicg-impr2, bicr.
        #[arg(long)]
        method: String,
        /// Initial shadow residual vector (bicg and pbicg-std only):
        /// r0, isrv1, isrv2, isrv3, atr0.
        #[arg(long)]
        isrv: Option<String>,
        /// Conversion side for bicg-conv: none, left, right, two-sided.
        #[arg(long)]
        side: Option<String>,
        #[arg(long, value_enum, default_value_t = PrecondKind::None)]
        precond: PrecondKind,
        /// Relative residual threshold.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Iteration cap (default 2n).
        #[arg(long)]
        max_iter: Option<usize>,
        /// ones-solution (b = A*1), unit (b = e_1) or file:PATH.
        #[arg(long, default_value = "ones-solution")]
        rhs: String,
        /// CSV destination (default stdout).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run several variants and compare their traces pairwise.
    Compare {
        #[arg(long)]
        matrix: String,
        /// Comma-separated variant tokens, e.g.
        /// pbicg-left,pbicg-std:isrv1,pbicg-impr2.
        #[arg(long, value_delimiter = ',', required = true)]
        variants: Vec<String>,
        /// Iteration window for the comparison.
        #[arg(long, default_value_t = 30)]
        k_max: usize,
        #[arg(long, value_enum, default_value_t = PrecondKind::Ilu0)]
        precond: PrecondKind,
        /// alpha-beta compares the coefficient series over the fixed window;
        /// relres compares adjusted residual histories under --tol.
        #[arg(long, value_enum, default_value_t = ModeArg::AlphaBeta)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Pairs within this deviation are reported as `agree`.
        #[arg(long, default_value_t = 1e-8)]
        agree_tol: f64,
        /// Pairs beyond this deviation are reported as `differ`.
        #[arg(long, default_value_t = 1e-2)]
        differ_tol: f64,
        /// CSV destination (default stdout); verdicts always go to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the structural verification suites on generated matrices.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Stencil grid sizes; each size m also adds a random matrix of
        /// dimension m*m.
        #[arg(long, value_delimiter = ',', default_values_t = [6usize, 10usize])]
        sizes: Vec<usize>,
        /// Corrupt one recorded alpha to prove the suites catch it.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

/// Combine --method with the optional --isrv/--side flags, enforcing which
/// methods accept which.
fn build_variant(method: &str, isrv: Option<&str>, side: Option<&str>) -> Result<Variant, String> {
    if method.contains(':') {
        if isrv.is_some() || side.is_some() {
            return Err(
                "use either `--method name:arg` or the --isrv/--side flags, not both".into(),
            );
        }
        return Variant::parse(method);
    }
    let isrv_name = isrv.map(IsrvName::parse).transpose()?;
    match method {
        "bicg" => {
            reject_side(side, method)?;
            Ok(Variant::Bicg(isrv_name.unwrap_or(IsrvName::R0)))
        }
        "pbicg-std" => {
            reject_side(side, method)?;
            Ok(Variant::PbicgStd(isrv_name.unwrap_or(IsrvName::Isrv1)))
        }
        "bicg-conv" => {
            if isrv_name.is_some() {
                return Err(
                    "bicg-conv fixes the ISRV to the converted r_0; --isrv does not apply".into(),
                );
            }
            let side = side.ok_or("bicg-conv needs --side (none, left, right, two-sided)")?;
            Variant::parse(&format!("bicg-conv:{side}"))
        }
        "pbicg-right" | "pbicg-left" | "pbicg-impr2" | "bicr" => {
            reject_side(side, method)?;
            if isrv_name.is_some() {
                return Err(format!("{method} fixes its ISRV; --isrv does not apply"));
            }
            Variant::parse(method)
        }
        other => Err(format!("unknown method `{other}`")),
    }
}

fn reject_side(side: Option<&str>, method: &str) -> Result<(), String> {
    if side.is_some() {
        return Err(format!("--side only applies to bicg-conv, not {method}"));
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Solve {
            matrix,
            method,
            isrv,
            side,
            precond,
            tol,
            max_iter,
            rhs,
            output,
        } => match build_variant(&method, isrv.as_deref(), side.as_deref()) {
            Ok(variant) => solve_cmd::run(&solve_cmd::SolveOpts {
                matrix,
                variant,
                precond,
                tol,
                max_iter,
                rhs,
                output,
            }),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_INPUT
            }
        },
        Cmd::Compare {
            matrix,
            variants,
            k_max,
            precond,
            mode,
            tol,
            agree_tol,
            differ_tol,
            output,
        } => {
            let parsed: Result<Vec<Variant>, String> =
                variants.iter().map(|t| Variant::parse(t)).collect();
            match parsed {
                Ok(variants) => compare_cmd::run(&compare_cmd::CompareOpts {
                    matrix,
                    variants,
                    k_max,
                    precond,
                    mode: match mode {
                        ModeArg::AlphaBeta => CompareMode::AlphaBeta,
                        ModeArg::Relres => CompareMode::Relres,
                    },
                    tol,
                    agree_tol,
                    differ_tol,
                    output,
                }),
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_INPUT
                }
            }
        }
        Cmd::Verify {
            seed,
            sizes,
            inject_fault,
        } => verify_cmd::run(&verify_cmd::VerifyOpts {
            seed,
            sizes,
            inject_fault,
        }),
    };
    std::process::exit(code);
}
