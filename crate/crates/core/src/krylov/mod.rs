//! Bi-Lanczos iterative solvers with full per-iteration traces.
//!
//! All methods share the coupled two-term BiCG recurrence
//!
//! ```text
//! p_k  = r_k  + beta_{k-1} p_{k-1}
//! p*_k = r*_k + beta_{k-1} p*_{k-1}
//! alpha_k = <r*_k, r_k> / <p*_k, A p_k>
//! x_{k+1}  = x_k  + alpha_k p_k
//! r_{k+1}  = r_k  - alpha_k A p_k
//! r*_{k+1} = r*_k - alpha_k A^T p*_k
//! beta_k = <r*_{k+1}, r_{k+1}> / <r*_k, r_k>
//! ```
//!
//! run either directly on a converted system (choose the conversion with
//! [`PrecSide`](crate::precond::PrecSide), see [`bicg_converted`]) or in one
//! of the four preconditioned shapes that keep the iteration in original
//! variables ([`pbicg_right`], [`pbicg_left`], [`pbicg_standard`],
//! [`pbicg_improved2`]). The construction of the initial shadow residual
//! vector is a first-class parameter ([`IsrvSpec`]); picking `P^{-1} r_0`,
//! `P^T r_0` or `U^T (L^{-1} r_0)` steers [`pbicg_standard`] into the left,
//! right or two-sided system, and `A^T r_0` turns plain [`bicg`] into the
//! conjugate-residual analogue implemented directly by [`bicr`].
//!
//! Every solver records `alpha_k`, `beta_k`, its own (adjusted) relative
//! residual norm and the true relative residual `||b - A x_k|| / ||b||`
//! recomputed from scratch, plus optional vector history for the
//! verification oracles in [`crate::verify`]. Runs are strictly sequential
//! and bit-reproducible.

mod bicr;
mod pbicg;
mod tilde;

pub use bicr::bicr;
pub use pbicg::{pbicg_improved2, pbicg_left, pbicg_right, pbicg_standard};
pub use tilde::{bicg, bicg_converted, bicg_converted_split};

use thiserror::Error;

use crate::precond::{Preconditioner, SplitOp};
use crate::sparse::{norm2, CsrMatrix};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("initial shadow residual is degenerate: <r*_0, r_0> = {value:e}")]
    InitialShadowDegenerate { value: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

/// Stopping and bookkeeping knobs shared by all solvers.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Relative residual threshold (each method measures it in its own norm).
    pub tol: f64,
    /// Iteration cap; `None` means `2 n`.
    pub max_iter: Option<usize>,
    /// Keep the full `r / r* / p / p* / x` history for verification.
    pub record_vectors: bool,
    /// Relative breakdown threshold for the bi-Lanczos coefficients.
    pub breakdown_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: None,
            record_vectors: false,
            breakdown_tol: 1e-14,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub(crate) fn validate(&self, n: usize, b: &[f64], x0: &[f64]) -> Result<usize, SolverError> {
        if b.len() != n || x0.len() != n {
            return Err(SolverError::DimensionMismatch(format!(
                "matrix dimension {n}, rhs length {}, initial guess length {}",
                b.len(),
                x0.len()
            )));
        }
        if self.tol <= 0.0 || self.tol.is_nan() {
            return Err(SolverError::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        let max_iter = self.max_iter.unwrap_or(2 * n.max(1));
        if max_iter == 0 {
            return Err(SolverError::InvalidConfig(
                "max_iter must be at least 1".into(),
            ));
        }
        Ok(max_iter)
    }
}

/// How the initial shadow residual vector `r*_0` is constructed.
#[derive(Debug, Clone)]
pub enum IsrvSpec {
    /// `r*_0 = r_0`
    R0,
    /// `r*_0 = P^{-1} r_0` (selects the left system)
    Isrv1,
    /// `r*_0 = P^T r_0` (selects the right system)
    Isrv2,
    /// `r*_0 = P_R^T (P_L^{-1} r_0)` (selects the two-sided system)
    Isrv3,
    /// `r*_0 = A^T r_0` (turns BiCG into BiCR)
    AtR0,
    /// `r*_0 = U r_0` for an arbitrary matrix `U`. No direction claim is
    /// made; exposed for experimentation.
    Custom(CsrMatrix),
}

impl IsrvSpec {
    pub(crate) fn build(
        &self,
        a: &CsrMatrix,
        p: &dyn Preconditioner,
        r0: &[f64],
    ) -> Result<Vec<f64>, SolverError> {
        Ok(match self {
            IsrvSpec::R0 => r0.to_vec(),
            IsrvSpec::Isrv1 => p.apply_minv(r0),
            IsrvSpec::Isrv2 => p.apply_m_t(r0),
            IsrvSpec::Isrv3 => p.apply_split(SplitOp::RTmul, &p.apply_split(SplitOp::Linv, r0)),
            IsrvSpec::AtR0 => a.matvec_transpose(r0),
            IsrvSpec::Custom(u) => {
                if u.dim() != a.dim() {
                    return Err(SolverError::DimensionMismatch(format!(
                        "custom ISRV matrix dimension {} does not match system dimension {}",
                        u.dim(),
                        a.dim()
                    )));
                }
                u.matvec(r0)
            }
        })
    }
}

/// Terminal state of a solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    /// A bi-Lanczos coefficient collapsed: `stage` is `"sigma"` for the
    /// alpha denominator `<p*_k, A p_k>`, `"rho"` for `<r*_k, r_k>`, and
    /// `"divergence"` when an iterate stops being finite.
    Breakdown {
        stage: &'static str,
        k: usize,
    },
}

/// Full per-iteration record of a solve. The four scalar series all have
/// length equal to the number of iterations performed; entry `k` holds
/// `alpha_k`, `beta_k` and the residual norms of iterate `k+1`.
#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// The algorithm's own (adjusted) relative residual norm.
    pub relres_alg: Vec<f64>,
    /// `||b - A x_{k+1}|| / ||b||` on the original system, recomputed from
    /// scratch each iteration.
    pub relres_true: Vec<f64>,
    pub vectors: Option<VectorHistory>,
}

/// Snapshots of the working vectors entering each iteration, in whatever
/// variable set the algorithm maintains. Entry `k` holds the state used to
/// compute `alpha_k`; `x` is always in original variables.
#[derive(Debug, Clone, Default)]
pub struct VectorHistory {
    pub r: Vec<Vec<f64>>,
    pub r_shadow: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub p_shadow: Vec<Vec<f64>>,
    pub x: Vec<Vec<f64>>,
}

impl IterationTrace {
    pub(crate) fn new(record_vectors: bool) -> Self {
        Self {
            vectors: record_vectors.then(VectorHistory::default),
            ..Self::default()
        }
    }

    pub fn iterations(&self) -> usize {
        self.alphas.len()
    }

    pub(crate) fn push_scalars(
        &mut self,
        alpha: f64,
        beta: f64,
        relres_alg: f64,
        relres_true: f64,
    ) {
        self.alphas.push(alpha);
        self.betas.push(beta);
        self.relres_alg.push(relres_alg);
        self.relres_true.push(relres_true);
    }

    /// Drop history entries beyond `len`, so a run cut short mid-iteration
    /// leaves all series the same length.
    pub(crate) fn truncate_vectors(&mut self, len: usize) {
        if let Some(h) = self.vectors.as_mut() {
            h.r.truncate(len);
            h.r_shadow.truncate(len);
            h.p.truncate(len);
            h.p_shadow.truncate(len);
            h.x.truncate(len);
        }
    }

    pub(crate) fn push_vectors(&mut self, r: &[f64], rs: &[f64], p: &[f64], ps: &[f64], x: &[f64]) {
        if let Some(h) = self.vectors.as_mut() {
            h.r.push(r.to_vec());
            h.r_shadow.push(rs.to_vec());
            h.p.push(p.to_vec());
            h.p_shadow.push(ps.to_vec());
            h.x.push(x.to_vec());
        }
    }
}

/// Final iterate plus convergence status and the attached trace.
#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Solution in original variables, whatever conversion ran internally.
    pub x: Vec<f64>,
    pub status: SolveStatus,
    pub iterations: usize,
    pub trace: IterationTrace,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// `||b||`, guarded so a zero right-hand side still yields usable relative
/// norms (the residual itself is then reported).
pub(crate) fn residual_denom(b: &[f64]) -> f64 {
    let nb = norm2(b);
    if nb > 0.0 {
        nb
    } else {
        1.0
    }
}

/// `||b - A x|| / denom`, recomputed from scratch.
pub(crate) fn true_relres(a: &CsrMatrix, b: &[f64], x: &[f64], denom: f64) -> f64 {
    let ax = a.matvec(x);
    let mut acc = 0.0;
    for (bi, axi) in b.iter().zip(&ax) {
        let d = bi - axi;
        acc += d * d;
    }
    acc.sqrt() / denom
}

/// Relative degeneracy test used for both `rho` and `sigma`:
/// `|value| <= tol * scale_a * scale_b`.
pub(crate) fn is_degenerate(value: f64, tol: f64, scale_a: f64, scale_b: f64) -> bool {
    value.abs() <= tol * scale_a * scale_b
}

/// Record iteration `k`, or flag divergence once anything stops being
/// finite (keeps every recorded entry finite). Returns false when the run
/// must stop.
pub(crate) fn record_iteration(
    trace: &mut IterationTrace,
    k: usize,
    alpha: f64,
    beta: f64,
    relres_alg: f64,
    relres_true: f64,
    status: &mut SolveStatus,
) -> bool {
    if !alpha.is_finite()
        || !beta.is_finite()
        || !relres_alg.is_finite()
        || !relres_true.is_finite()
    {
        *status = SolveStatus::Breakdown {
            stage: "divergence",
            k,
        };
        trace.truncate_vectors(trace.iterations());
        return false;
    }
    trace.push_scalars(alpha, beta, relres_alg, relres_true);
    true
}
