//! BiCG run directly on a converted system.
//!
//! One driver implements the coupled recurrence in the converted variables
//! `x~, r~, p~` with `r~*_0 = r~_0`; the side-specific conversions only
//! decide how `A~ v`, `A~^T v`, the adjusted residual norm and the map back
//! to original variables are realized:
//!
//! * left:      `A~ = P^{-1} A`,          adjusted norm `||P r~|| / ||b||`
//! * right:     `A~ = A P^{-1}`,          adjusted norm `||r~|| / ||b||`
//! * two-sided: `A~ = P_L^{-1} A P_R^{-1}`, adjusted norm `||P_L r~|| / ||b||`
//!
//! The plain [`bicg`] entry point is the same driver with no conversion and
//! a selectable initial shadow residual vector.

use crate::precond::{CanonicalSplit, PrecSide, Preconditioner, SplitPreconditioner};
use crate::sparse::{axpy, dot, norm2, xpby, CsrMatrix};

use super::{
    is_degenerate, record_iteration, residual_denom, true_relres, IsrvSpec, IterationTrace,
    SolveResult, SolveStatus, SolverConfig, SolverError,
};

type VecOp<'a> = Box<dyn Fn(&[f64]) -> Vec<f64> + 'a>;

/// How a converted system acts on vectors.
struct TildeOps<'a> {
    /// `A~ v`
    apply: VecOp<'a>,
    /// `A~^T v`
    apply_t: VecOp<'a>,
    /// Adjusted residual norm of `r~`.
    alg_norm: Box<dyn Fn(&[f64]) -> f64 + 'a>,
    /// Map `x~` back to original variables.
    unconvert_x: VecOp<'a>,
}

/// Algorithm core shared by every conversion.
fn run_tilde(
    a: &CsrMatrix,
    b: &[f64],
    ops: &TildeOps<'_>,
    b_tilde: &[f64],
    x0_tilde: &[f64],
    shadow0: &dyn Fn(&[f64]) -> Result<Vec<f64>, SolverError>,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    let n = a.dim();
    let max_iter = cfg.validate(n, b, x0_tilde)?;
    if b_tilde.len() != n {
        return Err(SolverError::DimensionMismatch(format!(
            "converted rhs length {} does not match dimension {n}",
            b_tilde.len()
        )));
    }
    let denom = residual_denom(b);
    let mut trace = IterationTrace::new(cfg.record_vectors);

    let mut xt = x0_tilde.to_vec();
    let mut rt = {
        let ax = (ops.apply)(&xt);
        let mut r = b_tilde.to_vec();
        axpy(-1.0, &ax, &mut r);
        r
    };
    if (ops.alg_norm)(&rt) / denom <= cfg.tol {
        let x = (ops.unconvert_x)(&xt);
        return Ok(SolveResult {
            x,
            status: SolveStatus::Converged,
            iterations: 0,
            trace,
        });
    }

    let mut rst = shadow0(&rt)?;
    let mut rho = dot(&rst, &rt);
    if is_degenerate(rho, cfg.breakdown_tol, norm2(&rst), norm2(&rt)) {
        return Err(SolverError::InitialShadowDegenerate { value: rho });
    }

    let mut pt = vec![0.0; n];
    let mut pst = vec![0.0; n];
    let mut beta = 0.0;
    let mut status = SolveStatus::MaxIter;

    for k in 0..max_iter {
        xpby(&rt, beta, &mut pt);
        xpby(&rst, beta, &mut pst);

        let q = (ops.apply)(&pt);
        let sigma = dot(&pst, &q);
        if is_degenerate(sigma, cfg.breakdown_tol, norm2(&pst), norm2(&q)) {
            status = SolveStatus::Breakdown { stage: "sigma", k };
            break;
        }
        if cfg.record_vectors {
            trace.push_vectors(&rt, &rst, &pt, &pst, &(ops.unconvert_x)(&xt));
        }

        let alpha = rho / sigma;
        axpy(alpha, &pt, &mut xt);
        axpy(-alpha, &q, &mut rt);
        let qs = (ops.apply_t)(&pst);
        axpy(-alpha, &qs, &mut rst);

        let rho_next = dot(&rst, &rt);
        beta = rho_next / rho;

        let x = (ops.unconvert_x)(&xt);
        let relres_alg = (ops.alg_norm)(&rt) / denom;
        let relres_true = true_relres(a, b, &x, denom);
        if !record_iteration(
            &mut trace,
            k,
            alpha,
            beta,
            relres_alg,
            relres_true,
            &mut status,
        ) {
            break;
        }

        if relres_alg <= cfg.tol {
            status = SolveStatus::Converged;
            break;
        }
        if is_degenerate(rho_next, cfg.breakdown_tol, norm2(&rst), norm2(&rt)) {
            status = SolveStatus::Breakdown { stage: "rho", k };
            break;
        }
        rho = rho_next;
    }

    let iterations = trace.iterations();
    let x = (ops.unconvert_x)(&xt);
    Ok(SolveResult {
        x,
        status,
        iterations,
        trace,
    })
}

/// Unpreconditioned BiCG with a selectable initial shadow residual vector.
///
/// With no preconditioner in play the `Isrv1/2/3` constructions all collapse
/// to `r_0`; `AtR0` and `Custom` remain meaningful.
pub fn bicg(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    isrv: &IsrvSpec,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    let ops = TildeOps {
        apply: Box::new(|v| a.matvec(v)),
        apply_t: Box::new(|v| a.matvec_transpose(v)),
        alg_norm: Box::new(norm2),
        unconvert_x: Box::new(<[f64]>::to_vec),
    };
    let shadow = |r0: &[f64]| match isrv {
        IsrvSpec::R0 | IsrvSpec::Isrv1 | IsrvSpec::Isrv2 | IsrvSpec::Isrv3 => Ok(r0.to_vec()),
        IsrvSpec::AtR0 => Ok(a.matvec_transpose(r0)),
        IsrvSpec::Custom(u) => {
            if u.dim() != a.dim() {
                return Err(SolverError::DimensionMismatch(format!(
                    "custom ISRV matrix dimension {} does not match system dimension {}",
                    u.dim(),
                    a.dim()
                )));
            }
            Ok(u.matvec(r0))
        }
    };
    run_tilde(a, b, &ops, b, x0, &shadow, cfg)
}

/// BiCG on the system converted per `side`, with `r~*_0 = r~_0`.
///
/// The returned iterate is always in original variables; the trace's
/// `relres_alg` is the side's adjusted norm (see the module docs), so the
/// histories of different sides are directly comparable.
pub fn bicg_converted(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    p: &dyn Preconditioner,
    side: PrecSide,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    let copy_shadow = |r0: &[f64]| Ok(r0.to_vec());
    match side {
        PrecSide::None => {
            let ops = TildeOps {
                apply: Box::new(|v| a.matvec(v)),
                apply_t: Box::new(|v| a.matvec_transpose(v)),
                alg_norm: Box::new(norm2),
                unconvert_x: Box::new(<[f64]>::to_vec),
            };
            run_tilde(a, b, &ops, b, x0, &copy_shadow, cfg)
        }
        PrecSide::Left => {
            let ops = TildeOps {
                apply: Box::new(|v| p.apply_minv(&a.matvec(v))),
                apply_t: Box::new(|v| a.matvec_transpose(&p.apply_minv_t(v))),
                alg_norm: Box::new(|r| norm2(&p.apply_m(r))),
                unconvert_x: Box::new(<[f64]>::to_vec),
            };
            let b_tilde = p.apply_minv(b);
            run_tilde(a, b, &ops, &b_tilde, x0, &copy_shadow, cfg)
        }
        PrecSide::Right => {
            let ops = TildeOps {
                apply: Box::new(|v| a.matvec(&p.apply_minv(v))),
                apply_t: Box::new(|v| p.apply_minv_t(&a.matvec_transpose(v))),
                alg_norm: Box::new(norm2),
                unconvert_x: Box::new(|xt| p.apply_minv(xt)),
            };
            let x0_tilde = p.apply_m(x0);
            run_tilde(a, b, &ops, b, &x0_tilde, &copy_shadow, cfg)
        }
        PrecSide::TwoSided => bicg_converted_split(a, b, x0, &CanonicalSplit(p), cfg),
    }
}

/// BiCG under the general two-sided conversion formulas for an arbitrary
/// `(P_L, P_R)` assignment.
///
/// [`bicg_converted`] with `PrecSide::TwoSided` is this driver with the
/// canonical `P_L = L`, `P_R = U` split; instantiating it with
/// [`LeftOnlySplit`](crate::precond::LeftOnlySplit) or
/// [`RightOnlySplit`](crate::precond::RightOnlySplit) reproduces the
/// dedicated one-sided paths.
pub fn bicg_converted_split(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    split: &dyn SplitPreconditioner,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    let ops = TildeOps {
        apply: Box::new(|v| split.left_inv(&a.matvec(&split.right_inv(v)))),
        apply_t: Box::new(|v| split.right_inv_t(&a.matvec_transpose(&split.left_inv_t(v)))),
        alg_norm: Box::new(|r| norm2(&split.left_mul(r))),
        unconvert_x: Box::new(|xt| split.right_inv(xt)),
    };
    let b_tilde = split.left_inv(b);
    let x0_tilde = split.right_mul(x0);
    let copy_shadow = |r0: &[f64]| Ok(r0.to_vec());
    run_tilde(a, b, &ops, &b_tilde, &x0_tilde, &copy_shadow, cfg)
}
