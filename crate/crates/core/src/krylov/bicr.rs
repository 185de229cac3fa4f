//! Bi-conjugate residual method (coupled two-term recurrences).
//!
//! Same loop shape as BiCG but with the inner products `<r*_k, A r_k>` and
//! `<A^T p*_k, A p_k>`, which is what BiCG becomes when the initial shadow
//! residual vector is chosen as `A^T r_0`. On a symmetric positive definite
//! matrix this reduces to the conjugate residual method.

use crate::sparse::{axpy, dot, norm2, xpby, CsrMatrix};

use super::{
    is_degenerate, record_iteration, residual_denom, true_relres, IterationTrace, SolveResult,
    SolveStatus, SolverConfig, SolverError,
};

/// BiCR with shadow start `r*_0 = r_0`. Produces the same `alpha_k`/`beta_k`
/// as [`super::bicg`] with `IsrvSpec::AtR0`.
pub fn bicr(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    let n = a.dim();
    let max_iter = cfg.validate(n, b, x0)?;
    let denom = residual_denom(b);
    let mut trace = IterationTrace::new(cfg.record_vectors);

    let mut x = x0.to_vec();
    let mut r = b.to_vec();
    axpy(-1.0, &a.matvec(&x), &mut r);
    if norm2(&r) / denom <= cfg.tol {
        return Ok(SolveResult {
            x,
            status: SolveStatus::Converged,
            iterations: 0,
            trace,
        });
    }

    let mut rs = r.clone();
    let mut ar = a.matvec(&r);
    let mut rho = dot(&rs, &ar);
    if is_degenerate(rho, cfg.breakdown_tol, norm2(&rs), norm2(&ar)) {
        return Err(SolverError::InitialShadowDegenerate { value: rho });
    }

    let mut pv = vec![0.0; n];
    let mut ps = vec![0.0; n];
    let mut ap = vec![0.0; n]; // A p_k, maintained by the same recurrence as p_k
    let mut beta = 0.0;
    let mut status = SolveStatus::MaxIter;

    for k in 0..max_iter {
        xpby(&r, beta, &mut pv);
        xpby(&rs, beta, &mut ps);
        xpby(&ar, beta, &mut ap);

        let w = a.matvec_transpose(&ps);
        let sigma = dot(&w, &ap);
        if is_degenerate(sigma, cfg.breakdown_tol, norm2(&w), norm2(&ap)) {
            status = SolveStatus::Breakdown { stage: "sigma", k };
            break;
        }
        trace.push_vectors(&r, &rs, &pv, &ps, &x);

        let alpha = rho / sigma;
        axpy(alpha, &pv, &mut x);
        axpy(-alpha, &ap, &mut r);
        axpy(-alpha, &w, &mut rs);

        ar = a.matvec(&r);
        let rho_next = dot(&rs, &ar);
        beta = rho_next / rho;
        let relres_alg = norm2(&r) / denom;
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
        if is_degenerate(rho_next, cfg.breakdown_tol, norm2(&rs), norm2(&ar)) {
            status = SolveStatus::Breakdown { stage: "rho", k };
            break;
        }
        rho = rho_next;
    }

    let iterations = trace.iterations();
    Ok(SolveResult {
        x,
        status,
        iterations,
        trace,
    })
}
