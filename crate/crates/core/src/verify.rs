//! Independent runtime checks for the solver traces.
//!
//! The scalar recurrences
//!
//! ```text
//! R_0 = 1,  R_k = R_{k-1} - alpha_{k-1} z P_{k-1},
//! P_0 = 1,  P_k = R_k + beta_{k-1} P_{k-1}
//! ```
//!
//! rebuild the residual and probing-direction polynomials from a recorded
//! `alpha`/`beta` sequence alone. [`check_polynomial_consistency`] then
//! re-evaluates `R_k` against the converted operator of the system a trace
//! claims to live in (e.g. `r_k = P R_k(P^{-1}A) P^{-1} r_0` for the
//! standard algorithm with ISRV `P^{-1} r_0`) and measures the deviation
//! from the recorded residuals, which is what pins down the direction of
//! the preconditioned system at runtime. Biorthogonality and biconjugacy
//! are measured with the converted inner products appropriate to each
//! algorithm shape. Everything here only measures; nothing feeds back into
//! the solvers.

use thiserror::Error;

use crate::krylov::IterationTrace;
use crate::precond::{Preconditioner, SplitOp};
use crate::sparse::{dot, norm2, xpby, CsrMatrix};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("trace has no recorded vector history (run with record_vectors)")]
    MissingVectorHistory,
    #[error("trace too short: need {needed} recorded iterations, have {have}")]
    TraceTooShort { needed: usize, have: usize },
}

/// Residual and probing-direction polynomial coefficients, lowest degree
/// first; `r[k]` has degree `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialTrace {
    pub r: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
}

/// Build the coefficient arrays of `R_0..R_k` and `P_0..P_k` from recorded
/// scalars. Panics when the slices differ in length.
pub fn polynomial_trace(alphas: &[f64], betas: &[f64]) -> PolynomialTrace {
    assert_eq!(
        alphas.len(),
        betas.len(),
        "polynomial_trace: length mismatch"
    );
    let k_max = alphas.len();
    let mut r: Vec<Vec<f64>> = Vec::with_capacity(k_max + 1);
    let mut p: Vec<Vec<f64>> = Vec::with_capacity(k_max + 1);
    r.push(vec![1.0]);
    p.push(vec![1.0]);
    for k in 1..=k_max {
        let alpha = alphas[k - 1];
        let beta = betas[k - 1];
        let (r_prev, p_prev) = (&r[k - 1], &p[k - 1]);
        // R_k = R_{k-1} - alpha z P_{k-1}
        let mut rk = vec![0.0; k + 1];
        rk[..r_prev.len()].copy_from_slice(r_prev);
        for (i, c) in p_prev.iter().enumerate() {
            rk[i + 1] -= alpha * c;
        }
        // P_k = R_k + beta P_{k-1}
        let mut pk = rk.clone();
        for (i, c) in p_prev.iter().enumerate() {
            pk[i] += beta * c;
        }
        r.push(rk);
        p.push(pk);
    }
    PolynomialTrace { r, p }
}

/// Which converted system a recorded trace belongs to. Selects both the
/// polynomial structure of the residuals and the converted inner products
/// used by the orthogonality checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemForm {
    /// Plain BiCG vectors (also `bicg_converted` with `PrecSide::None`).
    Bicg,
    /// `bicg_converted` with `PrecSide::Left`.
    ConvertedLeft,
    /// `bicg_converted` with `PrecSide::Right`.
    ConvertedRight,
    /// `bicg_converted` with `PrecSide::TwoSided` (canonical split).
    ConvertedTwoSided,
    /// `pbicg_right`.
    Right,
    /// `pbicg_left`.
    Left,
    /// `pbicg_standard` with `IsrvSpec::Isrv1`.
    StandardIsrv1,
    /// `pbicg_standard` with `IsrvSpec::Isrv2`.
    StandardIsrv2,
    /// `pbicg_standard` with `IsrvSpec::Isrv3`.
    StandardIsrv3,
    /// `pbicg_improved2`.
    Improved2,
    /// `bicr` (BiCG orthogonality holds against `A`-weighted pairings).
    Bicr,
}

/// `R_0(op) v .. R_k(op) v` in the recurrence-mirrored form: the scalar
/// recurrences are replayed with `op` applied step by step. Expanding into
/// monomial coefficients instead is hopelessly ill conditioned once the
/// spectrum of `op` clusters (which is the whole point of preconditioning),
/// so matrix powers never appear here.
fn residual_polynomials(
    op: &dyn Fn(&[f64]) -> Vec<f64>,
    alphas: &[f64],
    betas: &[f64],
    v0: &[f64],
    k_max: usize,
) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(k_max + 1);
    let mut r = v0.to_vec();
    let mut p = v0.to_vec();
    out.push(r.clone());
    for k in 0..k_max {
        if k > 0 {
            xpby(&r, betas[k - 1], &mut p);
        }
        let q = op(&p);
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri -= alphas[k] * qi;
        }
        out.push(r.clone());
    }
    out
}

fn require_history(
    trace: &IterationTrace,
    needed: usize,
) -> Result<&crate::krylov::VectorHistory, VerifyError> {
    let h = trace
        .vectors
        .as_ref()
        .ok_or(VerifyError::MissingVectorHistory)?;
    if h.r.len() < needed {
        return Err(VerifyError::TraceTooShort {
            needed,
            have: h.r.len(),
        });
    }
    Ok(h)
}

/// Rebuild each recorded residual from the scalar polynomial applied to the
/// claimed converted operator and return the worst relative deviation
/// `max_k ||r_k(polynomial) - r_k(recorded)|| / ||r_k(recorded)||` over
/// `k <= k_max`.
///
/// Explicit polynomial evaluation is only well conditioned for small
/// degrees; callers cap `k_max` around 10-15.
pub fn check_polynomial_consistency(
    a: &CsrMatrix,
    p: &dyn Preconditioner,
    form: SystemForm,
    trace: &IterationTrace,
    k_max: usize,
) -> Result<f64, VerifyError> {
    let history = require_history(trace, 1)?;
    let k_eff = k_max.min(history.r.len() - 1);

    let op: Box<dyn Fn(&[f64]) -> Vec<f64>> = match form {
        SystemForm::Bicg | SystemForm::Bicr => Box::new(|v: &[f64]| a.matvec(v)),
        SystemForm::ConvertedLeft
        | SystemForm::Left
        | SystemForm::StandardIsrv1
        | SystemForm::Improved2 => Box::new(|v: &[f64]| p.apply_minv(&a.matvec(v))),
        SystemForm::ConvertedRight | SystemForm::Right | SystemForm::StandardIsrv2 => {
            Box::new(|v: &[f64]| a.matvec(&p.apply_minv(v)))
        }
        SystemForm::ConvertedTwoSided | SystemForm::StandardIsrv3 => Box::new(|v: &[f64]| {
            p.apply_split(SplitOp::Linv, &a.matvec(&p.apply_split(SplitOp::Rinv, v)))
        }),
    };
    let r0 = &history.r[0];
    let v0: Vec<f64> = match form {
        SystemForm::StandardIsrv1 | SystemForm::Improved2 => p.apply_minv(r0),
        SystemForm::StandardIsrv3 => p.apply_split(SplitOp::Linv, r0),
        _ => r0.clone(),
    };
    let wrap: Box<dyn Fn(Vec<f64>) -> Vec<f64>> = match form {
        SystemForm::StandardIsrv1 | SystemForm::Improved2 => Box::new(|v: Vec<f64>| p.apply_m(&v)),
        SystemForm::StandardIsrv3 => Box::new(|v: Vec<f64>| p.apply_split(SplitOp::Lmul, &v)),
        _ => Box::new(|v: Vec<f64>| v),
    };

    let rebuilt_seq = residual_polynomials(op.as_ref(), &trace.alphas, &trace.betas, &v0, k_eff);
    let mut worst = 0.0f64;
    for (k, raw) in rebuilt_seq.into_iter().enumerate() {
        let rebuilt = wrap(raw);
        let recorded = &history.r[k];
        let mut diff = 0.0;
        for (a, b) in rebuilt.iter().zip(recorded) {
            diff += (a - b) * (a - b);
        }
        let err = diff.sqrt() / norm2(recorded).max(1e-300);
        worst = worst.max(err);
    }
    Ok(worst)
}

/// Largest normalized `|<r~*_i, r~_j>|` over `i != j`, `i, j <= k_range`,
/// in the converted pairing of the given form.
pub fn check_biorthogonality(
    a: &CsrMatrix,
    p: &dyn Preconditioner,
    form: SystemForm,
    trace: &IterationTrace,
    k_range: usize,
) -> Result<f64, VerifyError> {
    let h = require_history(trace, k_range + 1)?;
    let count = k_range + 1;
    // Transform each series once so the pairing is a plain dot product.
    let shadows: Vec<Vec<f64>> = (0..count)
        .map(|i| match form {
            SystemForm::Improved2 => p.apply_minv_t(&h.r_shadow[i]),
            _ => h.r_shadow[i].clone(),
        })
        .collect();
    let linears: Vec<Vec<f64>> = (0..count)
        .map(|j| match form {
            SystemForm::StandardIsrv1 | SystemForm::StandardIsrv2 | SystemForm::StandardIsrv3 => {
                p.apply_minv(&h.r[j])
            }
            SystemForm::Bicr => a.matvec(&h.r[j]),
            _ => h.r[j].clone(),
        })
        .collect();
    Ok(max_offdiag(&shadows, &linears))
}

/// Largest normalized `|<p~*_i, A~ p~_j>|` over `i != j`, `i, j <= k_range`.
pub fn check_biconjugacy(
    a: &CsrMatrix,
    p: &dyn Preconditioner,
    form: SystemForm,
    trace: &IterationTrace,
    k_range: usize,
) -> Result<f64, VerifyError> {
    let h = require_history(trace, k_range + 1)?;
    let count = k_range + 1;
    let shadows: Vec<Vec<f64>> = (0..count)
        .map(|i| match form {
            SystemForm::Improved2 => p.apply_minv_t(&h.p_shadow[i]),
            SystemForm::Bicr => a.matvec_transpose(&h.p_shadow[i]),
            _ => h.p_shadow[i].clone(),
        })
        .collect();
    let linears: Vec<Vec<f64>> = (0..count)
        .map(|j| {
            let pj = &h.p[j];
            match form {
                SystemForm::Bicg | SystemForm::Bicr => a.matvec(pj),
                SystemForm::ConvertedLeft | SystemForm::Left => p.apply_minv(&a.matvec(pj)),
                SystemForm::ConvertedRight | SystemForm::Right => a.matvec(&p.apply_minv(pj)),
                SystemForm::ConvertedTwoSided => {
                    p.apply_split(SplitOp::Linv, &a.matvec(&p.apply_split(SplitOp::Rinv, pj)))
                }
                // p+ = P^{-1} p is stored, so the converted action is plain A.
                SystemForm::StandardIsrv1
                | SystemForm::StandardIsrv2
                | SystemForm::StandardIsrv3
                | SystemForm::Improved2 => a.matvec(pj),
            }
        })
        .collect();
    Ok(max_offdiag(&shadows, &linears))
}

fn max_offdiag(us: &[Vec<f64>], vs: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, u) in us.iter().enumerate() {
        for (j, v) in vs.iter().enumerate() {
            if i == j {
                continue;
            }
            let denom = (norm2(u) * norm2(v)).max(1e-300);
            worst = worst.max(dot(u, v).abs() / denom);
        }
    }
    worst
}

/// Combined orthogonality report.
#[derive(Debug, Clone, Copy)]
pub struct OrthoReport {
    pub max_offdiag_biortho: f64,
    pub max_offdiag_biconj: f64,
    pub k_range: usize,
}

pub fn ortho_report(
    a: &CsrMatrix,
    p: &dyn Preconditioner,
    form: SystemForm,
    trace: &IterationTrace,
    k_range: usize,
) -> Result<OrthoReport, VerifyError> {
    Ok(OrthoReport {
        max_offdiag_biortho: check_biorthogonality(a, p, form, trace, k_range)?,
        max_offdiag_biconj: check_biconjugacy(a, p, form, trace, k_range)?,
        k_range,
    })
}

/// Worst relative deviations between two traces over the first `k_max`
/// iterations, per series.
#[derive(Debug, Clone, Copy, Default)]
pub struct TraceComparison {
    pub max_rel_alpha: f64,
    pub max_rel_beta: f64,
    pub max_rel_relres: f64,
}

/// Relative deviation `|a - b| / max(|a|, |b|, 1e-300)`.
pub fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn compare_traces(
    t1: &IterationTrace,
    t2: &IterationTrace,
    k_max: usize,
) -> Result<TraceComparison, VerifyError> {
    let have = t1.iterations().min(t2.iterations());
    if have < k_max {
        return Err(VerifyError::TraceTooShort {
            needed: k_max,
            have,
        });
    }
    let series_max =
        |a: &[f64], b: &[f64]| (0..k_max).map(|k| rel_dev(a[k], b[k])).fold(0.0, f64::max);
    Ok(TraceComparison {
        max_rel_alpha: series_max(&t1.alphas, &t2.alphas),
        max_rel_beta: series_max(&t1.betas, &t2.betas),
        max_rel_relres: series_max(&t1.relres_alg, &t2.relres_alg),
    })
}

/// Small dense reference routines used as independent oracles by the test
/// and acceptance suites. These never participate in the sparse solver
/// paths they are used to check.
pub mod oracle {
    use crate::sparse::{dot, norm2, xpby, CsrMatrix};

    /// Doolittle LU without pivoting: `A = L U`, unit-diagonal `L`.
    /// Returns `None` on a zero pivot.
    pub fn dense_lu(a: &[Vec<f64>]) -> Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let n = a.len();
        let mut l = vec![vec![0.0; n]; n];
        let mut u = vec![vec![0.0; n]; n];
        for i in 0..n {
            l[i][i] = 1.0;
            for j in i..n {
                let mut sum = a[i][j];
                for k in 0..i {
                    sum -= l[i][k] * u[k][j];
                }
                u[i][j] = sum;
            }
            if u[i][i] == 0.0 {
                return None;
            }
            for r in i + 1..n {
                let mut sum = a[r][i];
                for k in 0..i {
                    sum -= l[r][k] * u[k][i];
                }
                l[r][i] = sum / u[i][i];
            }
        }
        Some((l, u))
    }

    /// Dense solve with partial pivoting.
    pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
        let n = a.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut x = b.to_vec();
        for col in 0..n {
            let pivot_row = (col..n).max_by(|&r, &s| {
                m[r][col]
                    .abs()
                    .partial_cmp(&m[s][col].abs())
                    .expect("finite")
            })?;
            if m[pivot_row][col] == 0.0 {
                return None;
            }
            m.swap(col, pivot_row);
            x.swap(col, pivot_row);
            for r in col + 1..n {
                let f = m[r][col] / m[col][col];
                for c in col..n {
                    m[r][c] -= f * m[col][c];
                }
                x[r] -= f * x[col];
            }
        }
        for col in (0..n).rev() {
            x[col] /= m[col][col];
            for r in 0..col {
                x[r] -= m[r][col] * x[col];
            }
        }
        Some(x)
    }

    /// Textbook conjugate gradient; returns the iterates `x_0..x_iters`.
    pub fn reference_cg(a: &CsrMatrix, b: &[f64], x0: &[f64], iters: usize) -> Vec<Vec<f64>> {
        let mut x = x0.to_vec();
        let mut r = b.to_vec();
        let ax = a.matvec(&x);
        for (ri, axi) in r.iter_mut().zip(&ax) {
            *ri -= axi;
        }
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        let mut xs = vec![x.clone()];
        for _ in 0..iters {
            let q = a.matvec(&p);
            let alpha = rr / dot(&p, &q);
            for (xi, pi) in x.iter_mut().zip(&p) {
                *xi += alpha * pi;
            }
            for (ri, qi) in r.iter_mut().zip(&q) {
                *ri -= alpha * qi;
            }
            let rr_next = dot(&r, &r);
            let beta = rr_next / rr;
            xpby(&r, beta, &mut p);
            rr = rr_next;
            xs.push(x.clone());
            if rr.sqrt() <= 1e-300 {
                break;
            }
        }
        xs
    }

    /// Textbook conjugate residual for symmetric positive definite systems;
    /// returns the iterates `x_0..x_iters`.
    pub fn reference_cr(a: &CsrMatrix, b: &[f64], x0: &[f64], iters: usize) -> Vec<Vec<f64>> {
        let mut x = x0.to_vec();
        let mut r = b.to_vec();
        let ax = a.matvec(&x);
        for (ri, axi) in r.iter_mut().zip(&ax) {
            *ri -= axi;
        }
        let mut p = r.clone();
        let mut ar = a.matvec(&r);
        let mut ap = ar.clone();
        let mut rar = dot(&r, &ar);
        let mut xs = vec![x.clone()];
        for _ in 0..iters {
            let alpha = rar / dot(&ap, &ap);
            for (xi, pi) in x.iter_mut().zip(&p) {
                *xi += alpha * pi;
            }
            for (ri, api) in r.iter_mut().zip(&ap) {
                *ri -= alpha * api;
            }
            ar = a.matvec(&r);
            let rar_next = dot(&r, &ar);
            let beta = rar_next / rar;
            xpby(&r, beta, &mut p);
            xpby(&ar, beta, &mut ap);
            rar = rar_next;
            xs.push(x.clone());
            if norm2(&r) <= 1e-300 {
                break;
            }
        }
        xs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_trace_base_case() {
        let t = polynomial_trace(&[], &[]);
        assert_eq!(t.r, vec![vec![1.0]]);
        assert_eq!(t.p, vec![vec![1.0]]);
    }

    #[test]
    fn polynomial_trace_one_step() {
        let t = polynomial_trace(&[0.5], &[2.0]);
        assert_eq!(t.r[1], vec![1.0, -0.5]);
        // P_1 = R_1 + beta_0 * P_0 = (1 + 2) - 0.5 z
        assert_eq!(t.p[1], vec![3.0, -0.5]);
    }

    #[test]
    fn polynomial_trace_matches_symbolic_expansion_k3() {
        // Hand-expanded closed forms for degree 3.
        let (a0, a1, a2) = (0.7, -1.3, 0.45);
        let (b0, b1, b2) = (0.2, 1.7, -0.6);
        let t = polynomial_trace(&[a0, a1, a2], &[b0, b1, b2]);

        let r2 = vec![1.0, -a0 - a1 * (1.0 + b0), a0 * a1];
        let p2 = vec![
            1.0 + b1 * (1.0 + b0),
            -a0 - a1 * (1.0 + b0) - b1 * a0,
            a0 * a1,
        ];
        let r3 = vec![
            1.0,
            -a0 - a1 * (1.0 + b0) - a2 * (1.0 + b1 * (1.0 + b0)),
            a0 * a1 + a2 * (a0 + a1 * (1.0 + b0) + b1 * a0),
            -a0 * a1 * a2,
        ];
        for (got, want) in [(&t.r[2], &r2), (&t.p[2], &p2), (&t.r[3], &r3)] {
            for (g, w) in got.iter().zip(want) {
                assert!(
                    (g - w).abs() <= 1e-12 * w.abs().max(1.0),
                    "{got:?} vs {want:?}"
                );
            }
        }
        // b2 only affects P_3, which the recurrence builds as R_3 + b2 P_2.
        let p3: Vec<f64> = r3
            .iter()
            .enumerate()
            .map(|(i, c)| c + b2 * p2.get(i).copied().unwrap_or(0.0))
            .collect();
        for (g, w) in t.p[3].iter().zip(&p3) {
            assert!((g - w).abs() <= 1e-12 * w.abs().max(1.0));
        }
    }

    #[test]
    fn rel_dev_basics() {
        assert_eq!(rel_dev(1.0, 1.0), 0.0);
        let d = rel_dev(1.0, 1.0 + 1e-3);
        assert!((d - 1e-3 / (1.0 + 1e-3)).abs() < 1e-12);
    }

    #[test]
    fn compare_traces_detects_perturbation() {
        let mut t1 = IterationTrace::new(false);
        let mut t2 = IterationTrace::new(false);
        for k in 0..5 {
            let v = 1.0 + k as f64;
            t1.push_scalars(v, v, v, v);
            let bump = if k == 3 { 1.0 + 1e-3 } else { 1.0 };
            t2.push_scalars(v * bump, v, v, v);
        }
        let cmp = compare_traces(&t1, &t2, 5).unwrap();
        assert!((cmp.max_rel_alpha - 1e-3 / (1.0 + 1e-3)).abs() < 1e-9);
        assert_eq!(cmp.max_rel_beta, 0.0);
        assert!(matches!(
            compare_traces(&t1, &t2, 6),
            Err(VerifyError::TraceTooShort { needed: 6, have: 5 })
        ));
    }

    #[test]
    fn dense_solve_and_lu_agree() {
        let a = vec![
            vec![4.0, 1.0, -2.0],
            vec![2.0, 5.0, 1.0],
            vec![-1.0, 3.0, 6.0],
        ];
        let b = vec![1.0, -2.0, 3.0];
        let x = oracle::dense_solve(&a, &b).unwrap();
        for i in 0..3 {
            let got: f64 = (0..3).map(|j| a[i][j] * x[j]).sum();
            assert!((got - b[i]).abs() < 1e-12);
        }
        let (l, u) = oracle::dense_lu(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let lu: f64 = (0..3).map(|k| l[i][k] * u[k][j]).sum();
                assert!((lu - a[i][j]).abs() < 1e-12);
            }
        }
    }
}
