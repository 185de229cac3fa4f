//! The four preconditioned BiCG shapes that iterate in original variables.
//!
//! All four are algebraically the converted BiCG of [`super::bicg_converted`]
//! rearranged so that only `P^{-1}`/`P^{-T}` applications appear inside the
//! loop; they differ in where those applications sit and in the initial
//! shadow residual vector, which is exactly what decides whether they behave
//! like the left, right or two-sided system:
//!
//! * [`pbicg_right`]    - `r#_0 = r_0`; updates `x += alpha P^{-1} p`.
//! * [`pbicg_left`]     - iterates on `r+ = P^{-1} r`, `r*_0 = r+_0`.
//! * [`pbicg_standard`] - selectable ISRV, `alpha = <r*, P^{-1}r> / <p#, A p+>`.
//! * [`pbicg_improved2`] - ISRV `P^{-1} r_0`; keeps `p+ = P^{-1} p` and the
//!   unpreconditioned shadow direction `p*`, applying `P^{-T}` to it on use.
//!
//! `pbicg_left`, `pbicg_standard` with `Isrv1` and `pbicg_improved2` produce
//! the same `alpha_k`/`beta_k` sequences; `pbicg_right` does not.

use crate::precond::Preconditioner;
use crate::sparse::{axpy, dot, norm2, xpby, CsrMatrix};

use super::{
    is_degenerate, record_iteration, residual_denom, true_relres, IsrvSpec, IterationTrace,
    SolveResult, SolveStatus, SolverConfig, SolverError,
};

/// PBiCG of the right-preconditioned system (the shape matching the
/// conventional preconditioned CGS). Shadow work vectors carry an implicit
/// `P^{-T}`; the stopping criterion is `||r_{k+1}|| / ||b|| <= tol`.
pub fn pbicg_right(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    p: &dyn Preconditioner,
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

    let mut rf = r.clone(); // r#_0 = r_0
    let mut rho = dot(&rf, &r);
    if is_degenerate(rho, cfg.breakdown_tol, norm2(&rf), norm2(&r)) {
        return Err(SolverError::InitialShadowDegenerate { value: rho });
    }

    let mut pv = vec![0.0; n];
    let mut pf = vec![0.0; n];
    let mut beta = 0.0;
    let mut status = SolveStatus::MaxIter;

    for k in 0..max_iter {
        xpby(&r, beta, &mut pv);
        xpby(&rf, beta, &mut pf);

        let z = p.apply_minv(&pv);
        let q = a.matvec(&z);
        let sigma = dot(&pf, &q);
        if is_degenerate(sigma, cfg.breakdown_tol, norm2(&pf), norm2(&q)) {
            status = SolveStatus::Breakdown { stage: "sigma", k };
            break;
        }
        trace.push_vectors(&r, &rf, &pv, &pf, &x);

        let alpha = rho / sigma;
        axpy(alpha, &z, &mut x);
        axpy(-alpha, &q, &mut r);
        let w = p.apply_minv_t(&a.matvec_transpose(&pf));
        axpy(-alpha, &w, &mut rf);

        let rho_next = dot(&rf, &r);
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
        if is_degenerate(rho_next, cfg.breakdown_tol, norm2(&rf), norm2(&r)) {
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

/// PBiCG of the left-preconditioned system: iterates on `r+ = P^{-1} r` with
/// `r*_0 = r+_0` and stops on `||r+_{k+1}|| / ||P^{-1} b|| <= tol`.
pub fn pbicg_left(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    p: &dyn Preconditioner,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    let n = a.dim();
    let max_iter = cfg.validate(n, b, x0)?;
    let denom_true = residual_denom(b);
    let pb = p.apply_minv(b);
    let denom = {
        let npb = norm2(&pb);
        if npb > 0.0 {
            npb
        } else {
            1.0
        }
    };
    let mut trace = IterationTrace::new(cfg.record_vectors);

    let mut x = x0.to_vec();
    let mut rp = {
        let mut r = b.to_vec();
        axpy(-1.0, &a.matvec(&x), &mut r);
        p.apply_minv(&r)
    };
    if norm2(&rp) / denom <= cfg.tol {
        return Ok(SolveResult {
            x,
            status: SolveStatus::Converged,
            iterations: 0,
            trace,
        });
    }

    let mut rs = rp.clone(); // r*_0 = r+_0
    let mut rho = dot(&rs, &rp);
    if is_degenerate(rho, cfg.breakdown_tol, norm2(&rs), norm2(&rp)) {
        return Err(SolverError::InitialShadowDegenerate { value: rho });
    }

    let mut pp = vec![0.0; n];
    let mut ps = vec![0.0; n];
    let mut beta = 0.0;
    let mut status = SolveStatus::MaxIter;

    for k in 0..max_iter {
        xpby(&rp, beta, &mut pp);
        xpby(&rs, beta, &mut ps);

        let q = p.apply_minv(&a.matvec(&pp));
        let sigma = dot(&ps, &q);
        if is_degenerate(sigma, cfg.breakdown_tol, norm2(&ps), norm2(&q)) {
            status = SolveStatus::Breakdown { stage: "sigma", k };
            break;
        }
        trace.push_vectors(&rp, &rs, &pp, &ps, &x);

        let alpha = rho / sigma;
        axpy(alpha, &pp, &mut x);
        axpy(-alpha, &q, &mut rp);
        let w = a.matvec_transpose(&p.apply_minv_t(&ps));
        axpy(-alpha, &w, &mut rs);

        let rho_next = dot(&rs, &rp);
        beta = rho_next / rho;
        let relres_alg = norm2(&rp) / denom;
        let relres_true = true_relres(a, b, &x, denom_true);
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
        if is_degenerate(rho_next, cfg.breakdown_tol, norm2(&rs), norm2(&rp)) {
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

/// Standard PBiCG: residuals stay in original variables, the preconditioner
/// enters only through `z = P^{-1} r` on the linear side and `P^{-T} r*` on
/// the shadow side, and the ISRV is a free parameter.
///
/// `Isrv1`, `Isrv2` and `Isrv3` steer this algorithm into the left, right
/// and two-sided preconditioned systems respectively.
pub fn pbicg_standard(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    p: &dyn Preconditioner,
    isrv: &IsrvSpec,
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

    let mut rs = isrv.build(a, p, &r)?;
    let mut z = p.apply_minv(&r);
    // The converted pairing is <r*_0, P^{-1} r_0>.
    let mut rho = dot(&rs, &z);
    if is_degenerate(rho, cfg.breakdown_tol, norm2(&rs), norm2(&z)) {
        return Err(SolverError::InitialShadowDegenerate { value: rho });
    }

    let mut pp = vec![0.0; n]; // p+ = P^{-1} p
    let mut pf = vec![0.0; n]; // p# = P^{-T} p*
    let mut beta = 0.0;
    let mut status = SolveStatus::MaxIter;

    for k in 0..max_iter {
        xpby(&z, beta, &mut pp);
        let w = p.apply_minv_t(&rs);
        xpby(&w, beta, &mut pf);

        let q = a.matvec(&pp);
        let sigma = dot(&pf, &q);
        if is_degenerate(sigma, cfg.breakdown_tol, norm2(&pf), norm2(&q)) {
            status = SolveStatus::Breakdown { stage: "sigma", k };
            break;
        }
        trace.push_vectors(&r, &rs, &pp, &pf, &x);

        let alpha = rho / sigma;
        axpy(alpha, &pp, &mut x);
        axpy(-alpha, &q, &mut r);
        let u = a.matvec_transpose(&pf);
        axpy(-alpha, &u, &mut rs);

        z = p.apply_minv(&r);
        let rho_next = dot(&rs, &z);
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
        if is_degenerate(rho_next, cfg.breakdown_tol, norm2(&rs), norm2(&z)) {
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

/// PBiCG in the economical rearrangement matching the Improved2
/// preconditioned CGS: the preconditioned direction `p+ = P^{-1} p` is
/// maintained by its own recurrence, the shadow direction `p*` stays
/// unpreconditioned, and the loop applies exactly `P^{-1} r` and
/// `P^{-T} p*` once each. ISRV fixed to `P^{-1} r_0`.
pub fn pbicg_improved2(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    p: &dyn Preconditioner,
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

    let mut z = p.apply_minv(&r);
    let mut rs = z.clone(); // ISRV: r*_0 = P^{-1} r_0
    let mut rho = dot(&rs, &z);
    if is_degenerate(rho, cfg.breakdown_tol, norm2(&rs), norm2(&z)) {
        return Err(SolverError::InitialShadowDegenerate { value: rho });
    }

    let mut pp = vec![0.0; n]; // p+ = P^{-1} p
    let mut ps = vec![0.0; n]; // p*, unpreconditioned shadow direction
    let mut beta = 0.0;
    let mut status = SolveStatus::MaxIter;

    for k in 0..max_iter {
        xpby(&z, beta, &mut pp);
        xpby(&rs, beta, &mut ps);

        let w = p.apply_minv_t(&ps);
        let q = a.matvec(&pp);
        let sigma = dot(&w, &q);
        if is_degenerate(sigma, cfg.breakdown_tol, norm2(&w), norm2(&q)) {
            status = SolveStatus::Breakdown { stage: "sigma", k };
            break;
        }
        trace.push_vectors(&r, &rs, &pp, &ps, &x);

        let alpha = rho / sigma;
        axpy(alpha, &pp, &mut x);
        axpy(-alpha, &q, &mut r);
        let u = a.matvec_transpose(&w);
        axpy(-alpha, &u, &mut rs);

        z = p.apply_minv(&r);
        let rho_next = dot(&rs, &z);
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
        if is_degenerate(rho_next, cfg.breakdown_tol, norm2(&rs), norm2(&z)) {
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
