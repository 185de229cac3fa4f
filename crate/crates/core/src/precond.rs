//! ILU(0) factorization and preconditioner application.
//!
//! The factorization `P = L U` (unit-lower `L`, upper `U`, joint sparsity
//! pattern equal to the pattern of `A`) doubles as the canonical two-sided
//! split `P_L = L`, `P_R = U`. Besides the full solves `P^{-1} v` and
//! `P^{-T} v`, every individual factor action is exposed through
//! [`SplitOp`], since the solvers need forms like `U^T (L^{-1} v)`.

use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

use crate::sparse::{axpy, CsrMatrix};

/// Absolute pivot threshold below which the factorization reports breakdown.
/// No pivoting or diagonal shifting is attempted.
pub const PIVOT_TOL: f64 = 1e-300;

/// Numerical breakdown during a factorization stage.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{stage}: breakdown at index {index}")]
pub struct BreakdownError {
    pub stage: &'static str,
    pub index: usize,
}

/// Which side(s) of the system a preconditioner is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecSide {
    None,
    Left,
    Right,
    TwoSided,
}

/// One action of a split factor: solve with or multiply by `P_L`/`P_R`,
/// plain or transposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitOp {
    /// `P_L^{-1} v`
    Linv,
    /// `P_R^{-1} v`
    Rinv,
    /// `P_L^{-T} v`
    LinvT,
    /// `P_R^{-T} v`
    RinvT,
    /// `P_L v`
    Lmul,
    /// `P_R v`
    Rmul,
    /// `P_L^T v`
    LTmul,
    /// `P_R^T v`
    RTmul,
}

/// Operator interface shared by the ILU(0) factors and the identity.
///
/// Applications are pure; implementations are immutable after construction
/// and safe to share across threads.
pub trait Preconditioner: Sync {
    /// `P^{-1} v`.
    fn apply_minv(&self, v: &[f64]) -> Vec<f64>;
    /// `P^{-T} v`.
    fn apply_minv_t(&self, v: &[f64]) -> Vec<f64>;
    /// Apply one split-factor action.
    fn apply_split(&self, op: SplitOp, v: &[f64]) -> Vec<f64>;

    /// `P v = P_L (P_R v)`.
    fn apply_m(&self, v: &[f64]) -> Vec<f64> {
        self.apply_split(SplitOp::Lmul, &self.apply_split(SplitOp::Rmul, v))
    }

    /// `P^T v = P_R^T (P_L^T v)`.
    fn apply_m_t(&self, v: &[f64]) -> Vec<f64> {
        self.apply_split(SplitOp::RTmul, &self.apply_split(SplitOp::LTmul, v))
    }
}

/// `P = I`: every action is a copy. Makes unpreconditioned runs a
/// first-class configuration of the preconditioned algorithms.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPrec;

impl Preconditioner for IdentityPrec {
    fn apply_minv(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
    fn apply_minv_t(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
    fn apply_split(&self, _op: SplitOp, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
}

/// ILU(0) factors of `A`: strictly-lower `L` (unit diagonal implicit) and
/// upper `U` including the diagonal, on the sparsity pattern of `A`.
#[derive(Debug, Clone)]
pub struct Ilu0Factors {
    lower: CsrMatrix,
    upper: CsrMatrix,
}

/// Row-wise (IKJ) ILU(0): eliminate each row against previous rows,
/// restricted to the pattern of `A`. Requires a structurally nonzero
/// diagonal; a pivot below [`PIVOT_TOL`] reports breakdown.
pub fn ilu0_factorize(a: &CsrMatrix) -> Result<Ilu0Factors, BreakdownError> {
    let n = a.dim();
    let row_ptr = a.row_ptr().to_vec();
    let col_idx = a.col_idx().to_vec();
    let mut values = a.values().to_vec();

    let mut diag_pos = vec![usize::MAX; n];
    for i in 0..n {
        for idx in row_ptr[i]..row_ptr[i + 1] {
            if col_idx[idx] == i {
                diag_pos[i] = idx;
            }
        }
        if diag_pos[i] == usize::MAX {
            return Err(BreakdownError {
                stage: "ilu0",
                index: i,
            });
        }
    }

    // Scatter map from column to position within the current row.
    let mut pos_of = vec![usize::MAX; n];
    for i in 0..n {
        for idx in row_ptr[i]..row_ptr[i + 1] {
            pos_of[col_idx[idx]] = idx;
        }
        for idx in row_ptr[i]..row_ptr[i + 1] {
            let k = col_idx[idx];
            if k >= i {
                break;
            }
            let pivot = values[diag_pos[k]];
            if pivot.abs() < PIVOT_TOL {
                return Err(BreakdownError {
                    stage: "ilu0",
                    index: k,
                });
            }
            values[idx] /= pivot;
            let lik = values[idx];
            for kidx in diag_pos[k] + 1..row_ptr[k + 1] {
                let p = pos_of[col_idx[kidx]];
                if p != usize::MAX {
                    values[p] -= lik * values[kidx];
                }
            }
        }
        for idx in row_ptr[i]..row_ptr[i + 1] {
            pos_of[col_idx[idx]] = usize::MAX;
        }
        if values[diag_pos[i]].abs() < PIVOT_TOL {
            return Err(BreakdownError {
                stage: "ilu0",
                index: i,
            });
        }
    }

    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for i in 0..n {
        for idx in row_ptr[i]..row_ptr[i + 1] {
            let j = col_idx[idx];
            if j < i {
                lower.push((i, j, values[idx]));
            } else {
                upper.push((i, j, values[idx]));
            }
        }
    }
    Ok(Ilu0Factors {
        lower: CsrMatrix::from_triplets(n, &lower).expect("lower triplets in range"),
        upper: CsrMatrix::from_triplets(n, &upper).expect("upper triplets in range"),
    })
}

impl Ilu0Factors {
    pub fn dim(&self) -> usize {
        self.upper.dim()
    }

    /// Strictly lower part of `L` (the unit diagonal is implicit).
    pub fn lower(&self) -> &CsrMatrix {
        &self.lower
    }

    /// Upper factor `U` including its diagonal.
    pub fn upper(&self) -> &CsrMatrix {
        &self.upper
    }

    /// Solve `L y = v` (forward substitution, unit diagonal).
    fn solve_lower(&self, v: &[f64]) -> Vec<f64> {
        let mut y = v.to_vec();
        for i in 0..self.dim() {
            let (cols, vals) = self.lower.row(i);
            let mut acc = y[i];
            for (&j, &lij) in cols.iter().zip(vals) {
                acc -= lij * y[j];
            }
            y[i] = acc;
        }
        y
    }

    /// Solve `U y = v` (backward substitution).
    fn solve_upper(&self, v: &[f64]) -> Vec<f64> {
        let mut y = v.to_vec();
        for i in (0..self.dim()).rev() {
            let (cols, vals) = self.upper.row(i);
            let mut acc = y[i];
            let mut diag = 1.0;
            for (&j, &uij) in cols.iter().zip(vals) {
                if j == i {
                    diag = uij;
                } else {
                    acc -= uij * y[j];
                }
            }
            y[i] = acc / diag;
        }
        y
    }

    /// Solve `L^T y = v` by scattering rows of `L` in descending order.
    fn solve_lower_t(&self, v: &[f64]) -> Vec<f64> {
        let mut y = v.to_vec();
        for i in (0..self.dim()).rev() {
            let (cols, vals) = self.lower.row(i);
            let yi = y[i];
            for (&j, &lij) in cols.iter().zip(vals) {
                y[j] -= lij * yi;
            }
        }
        y
    }

    /// Solve `U^T y = v` by scattering rows of `U` in ascending order.
    fn solve_upper_t(&self, v: &[f64]) -> Vec<f64> {
        let mut y = v.to_vec();
        for i in 0..self.dim() {
            let (cols, vals) = self.upper.row(i);
            let mut diag = 1.0;
            for (&j, &uij) in cols.iter().zip(vals) {
                if j == i {
                    diag = uij;
                }
            }
            y[i] /= diag;
            let yi = y[i];
            for (&j, &uij) in cols.iter().zip(vals) {
                if j != i {
                    y[j] -= uij * yi;
                }
            }
        }
        y
    }

    /// `L v = v + L_strict v`.
    fn mul_lower(&self, v: &[f64]) -> Vec<f64> {
        let mut y = self.lower.matvec(v);
        axpy(1.0, v, &mut y);
        y
    }

    /// `L^T v = v + L_strict^T v`.
    fn mul_lower_t(&self, v: &[f64]) -> Vec<f64> {
        let mut y = self.lower.matvec_transpose(v);
        axpy(1.0, v, &mut y);
        y
    }
}

impl Preconditioner for Ilu0Factors {
    /// `P^{-1} v = U^{-1} (L^{-1} v)`, exactly the `Rinv . Linv` composition.
    fn apply_minv(&self, v: &[f64]) -> Vec<f64> {
        self.apply_split(SplitOp::Rinv, &self.apply_split(SplitOp::Linv, v))
    }

    /// `P^{-T} v = L^{-T} (U^{-T} v)`.
    fn apply_minv_t(&self, v: &[f64]) -> Vec<f64> {
        self.apply_split(SplitOp::LinvT, &self.apply_split(SplitOp::RinvT, v))
    }

    fn apply_split(&self, op: SplitOp, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim(), "apply_split: dimension mismatch");
        match op {
            SplitOp::Linv => self.solve_lower(v),
            SplitOp::Rinv => self.solve_upper(v),
            SplitOp::LinvT => self.solve_lower_t(v),
            SplitOp::RinvT => self.solve_upper_t(v),
            SplitOp::Lmul => self.mul_lower(v),
            SplitOp::Rmul => self.upper.matvec(v),
            SplitOp::LTmul => self.mul_lower_t(v),
            SplitOp::RTmul => self.upper.matvec_transpose(v),
        }
    }
}

/// A `(P_L, P_R)` assignment for the two-sided conversion driver.
pub trait SplitPreconditioner: Sync {
    fn left_inv(&self, v: &[f64]) -> Vec<f64>;
    fn left_inv_t(&self, v: &[f64]) -> Vec<f64>;
    fn left_mul(&self, v: &[f64]) -> Vec<f64>;
    fn right_inv(&self, v: &[f64]) -> Vec<f64>;
    fn right_inv_t(&self, v: &[f64]) -> Vec<f64>;
    fn right_mul(&self, v: &[f64]) -> Vec<f64>;
}

/// Canonical assignment `P_L = L`, `P_R = U` from the factorization split.
pub struct CanonicalSplit<'a, P: Preconditioner + ?Sized>(pub &'a P);

impl<P: Preconditioner + ?Sized> SplitPreconditioner for CanonicalSplit<'_, P> {
    fn left_inv(&self, v: &[f64]) -> Vec<f64> {
        self.0.apply_split(SplitOp::Linv, v)
    }
    fn left_inv_t(&self, v: &[f64]) -> Vec<f64> {
        self.0.apply_split(SplitOp::LinvT, v)
    }
    fn left_mul(&self, v: &[f64]) -> Vec<f64> {
        self.0.apply_split(SplitOp::Lmul, v)
    }
    fn right_inv(&self, v: &[f64]) -> Vec<f64> {
        self.0.apply_split(SplitOp::Rinv, v)
    }
    fn right_inv_t(&self, v: &[f64]) -> Vec<f64> {
        self.0.apply_split(SplitOp::RinvT, v)
    }
    fn right_mul(&self, v: &[f64]) -> Vec<f64> {
        self.0.apply_split(SplitOp::Rmul, v)
    }
}

/// Degenerate assignment `P_L = P`, `P_R = I`.
pub struct LeftOnlySplit<'a, P: Preconditioner + ?Sized>(pub &'a P);

impl<P: Preconditioner + ?Sized> SplitPreconditioner for LeftOnlySplit<'_, P> {
    fn left_inv(&self, v: &[f64]) -> Vec<f64> {
        self.0.apply_minv(v)
    }
    fn left_inv_t(&self, v: &[f64]) -> Vec<f64> {
        self.0.apply_minv_t(v)
    }
    fn left_mul(&self, v: &[f64]) -> Vec<f64> {
        self.0.apply_m(v)
    }
    fn right_inv(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
    fn right_inv_t(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
    fn right_mul(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
}

/// Degenerate assignment `P_L = I`, `P_R = P`.
pub struct RightOnlySplit<'a, P: Preconditioner + ?Sized>(pub &'a P);

impl<P: Preconditioner + ?Sized> SplitPreconditioner for RightOnlySplit<'_, P> {
    fn left_inv(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
    fn left_inv_t(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
    fn left_mul(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
    fn right_inv(&self, v: &[f64]) -> Vec<f64> {
        self.0.apply_minv(v)
    }
    fn right_inv_t(&self, v: &[f64]) -> Vec<f64> {
        self.0.apply_minv_t(v)
    }
    fn right_mul(&self, v: &[f64]) -> Vec<f64> {
        self.0.apply_m(v)
    }
}

/// Wrapper counting how often each kind of application runs. Used to assert
/// structurally that the solver loops apply exactly one `P^{-1}` on the
/// linear side and one `P^{-T}` on the shadow side per iteration.
pub struct CountingPrec<'a, P: Preconditioner + ?Sized> {
    inner: &'a P,
    minv: AtomicUsize,
    minv_t: AtomicUsize,
    split: AtomicUsize,
}

impl<'a, P: Preconditioner + ?Sized> CountingPrec<'a, P> {
    pub fn new(inner: &'a P) -> Self {
        Self {
            inner,
            minv: AtomicUsize::new(0),
            minv_t: AtomicUsize::new(0),
            split: AtomicUsize::new(0),
        }
    }

    pub fn minv_count(&self) -> usize {
        self.minv.load(Ordering::Relaxed)
    }

    pub fn minv_t_count(&self) -> usize {
        self.minv_t.load(Ordering::Relaxed)
    }

    pub fn split_count(&self) -> usize {
        self.split.load(Ordering::Relaxed)
    }
}

impl<P: Preconditioner + ?Sized> Preconditioner for CountingPrec<'_, P> {
    fn apply_minv(&self, v: &[f64]) -> Vec<f64> {
        self.minv.fetch_add(1, Ordering::Relaxed);
        self.inner.apply_minv(v)
    }
    fn apply_minv_t(&self, v: &[f64]) -> Vec<f64> {
        self.minv_t.fetch_add(1, Ordering::Relaxed);
        self.inner.apply_minv_t(v)
    }
    fn apply_split(&self, op: SplitOp, v: &[f64]) -> Vec<f64> {
        self.split.fetch_add(1, Ordering::Relaxed);
        self.inner.apply_split(op, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{dot, generate_random, generate_stencil, norm2};
    use crate::verify::oracle;
    use rand::{Rng, SeedableRng};

    fn rel_diff(u: &[f64], v: &[f64]) -> f64 {
        let num: f64 = u
            .iter()
            .zip(v)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        num / norm2(v).max(1e-300)
    }

    #[test]
    fn identity_matrix_factors_to_identity() {
        let f = ilu0_factorize(&CsrMatrix::identity(5)).unwrap();
        assert_eq!(f.lower().nnz(), 0);
        assert_eq!(f.upper(), &CsrMatrix::identity(5));
    }

    #[test]
    fn diagonal_matrix_keeps_diagonal_in_upper() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 2.0), (1, 1, 4.0)]).unwrap();
        let f = ilu0_factorize(&a).unwrap();
        assert_eq!(f.lower().nnz(), 0);
        assert_eq!(f.upper().to_dense(), vec![vec![2.0, 0.0], vec![0.0, 4.0]]);
    }

    #[test]
    fn dense_pattern_reproduces_exact_lu() {
        // On a full pattern ILU(0) degenerates to exact Doolittle LU.
        let a = CsrMatrix::from_triplets(
            3,
            &[
                (0, 0, 4.0),
                (0, 1, 1.0),
                (0, 2, -2.0),
                (1, 0, 2.0),
                (1, 1, 5.0),
                (1, 2, 1.0),
                (2, 0, -1.0),
                (2, 1, 3.0),
                (2, 2, 6.0),
            ],
        )
        .unwrap();
        let f = ilu0_factorize(&a).unwrap();
        let (lo, uo) = oracle::dense_lu(&a.to_dense()).unwrap();
        let ld = f.lower().to_dense();
        let ud = f.upper().to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let l_full = if i == j { 1.0 } else { ld[i][j] };
                assert!((l_full - lo[i][j]).abs() <= 1e-12 * lo[i][j].abs().max(1.0));
                assert!((ud[i][j] - uo[i][j]).abs() <= 1e-12 * uo[i][j].abs().max(1.0));
            }
        }
        // L*U == A on the dense pattern.
        for (i, row) in a.to_dense().iter().enumerate() {
            for (j, &aij) in row.iter().enumerate() {
                let mut lu = 0.0;
                for k in 0..3 {
                    let l_ik = if i == k { 1.0 } else { ld[i][k] };
                    lu += l_ik * ud[k][j];
                }
                assert!((lu - aij).abs() <= 1e-12 * aij.abs().max(1.0));
            }
        }
    }

    #[test]
    fn zero_pivot_breaks_down_at_first_row() {
        // Structurally missing diagonal.
        let a = CsrMatrix::from_triplets(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let err = ilu0_factorize(&a).unwrap_err();
        assert_eq!(
            err,
            BreakdownError {
                stage: "ilu0",
                index: 0
            }
        );
        // Stored-but-zero diagonal.
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 0.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)])
            .unwrap();
        let err = ilu0_factorize(&a).unwrap_err();
        assert_eq!(
            err,
            BreakdownError {
                stage: "ilu0",
                index: 0
            }
        );
    }

    #[test]
    fn pattern_is_preserved() {
        let a = generate_stencil(6, 0.8);
        let f = ilu0_factorize(&a).unwrap();
        assert_eq!(f.lower().nnz() + f.upper().nnz(), a.nnz());
    }

    #[test]
    fn identity_factors_act_as_identity_everywhere() {
        let f = ilu0_factorize(&CsrMatrix::identity(4)).unwrap();
        let v = vec![1.0, -2.0, 3.5, 0.25];
        for op in [
            SplitOp::Linv,
            SplitOp::Rinv,
            SplitOp::LinvT,
            SplitOp::RinvT,
            SplitOp::Lmul,
            SplitOp::Rmul,
            SplitOp::LTmul,
            SplitOp::RTmul,
        ] {
            assert_eq!(f.apply_split(op, &v), v);
        }
        assert_eq!(f.apply_minv(&v), v);
        assert_eq!(f.apply_minv_t(&v), v);
    }

    #[test]
    fn dense_pattern_minv_equals_dense_solve() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 6;
        // Diagonally dominant full matrix so LU is stable without pivoting.
        let mut tr = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = if i == j {
                    n as f64 + 1.0
                } else {
                    rng.gen_range(-1.0..1.0)
                };
                tr.push((i, j, v));
            }
        }
        let a = CsrMatrix::from_triplets(n, &tr).unwrap();
        let f = ilu0_factorize(&a).unwrap();
        let dense = a.to_dense();
        for _ in 0..20 {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let got = f.apply_minv(&v);
            let want = oracle::dense_solve(&dense, &v).unwrap();
            assert!(rel_diff(&got, &want) <= 1e-10);
        }
    }

    #[test]
    fn minv_is_exactly_rinv_after_linv() {
        let a = generate_stencil(5, 0.4);
        let f = ilu0_factorize(&a).unwrap();
        let v: Vec<f64> = (0..25).map(|i| (i as f64).sin()).collect();
        let composed = f.apply_split(SplitOp::Rinv, &f.apply_split(SplitOp::Linv, &v));
        assert_eq!(f.apply_minv(&v), composed);
        let composed_t = f.apply_split(SplitOp::LinvT, &f.apply_split(SplitOp::RinvT, &v));
        assert_eq!(f.apply_minv_t(&v), composed_t);
    }

    #[test]
    fn transpose_solve_adjoint_identity() {
        let a = generate_random(30, 0.2, 11);
        let f = ilu0_factorize(&a).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let u: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lhs = dot(&f.apply_minv_t(&u), &v);
            let rhs = dot(&u, &f.apply_minv(&v));
            assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(rhs.abs()).max(1.0));
        }
    }

    #[test]
    fn split_mul_and_solve_are_inverse_pairs() {
        let a = generate_stencil(5, 0.9);
        let f = ilu0_factorize(&a).unwrap();
        let v: Vec<f64> = (0..25).map(|i| 0.3 * i as f64 - 2.0).collect();
        for (inv, mul) in [
            (SplitOp::Linv, SplitOp::Lmul),
            (SplitOp::Rinv, SplitOp::Rmul),
            (SplitOp::LinvT, SplitOp::LTmul),
            (SplitOp::RinvT, SplitOp::RTmul),
        ] {
            let round = f.apply_split(inv, &f.apply_split(mul, &v));
            assert!(rel_diff(&round, &v) <= 1e-13, "{inv:?}/{mul:?}");
        }
    }

    #[test]
    fn counting_wrapper_counts() {
        let a = generate_stencil(3, 0.0);
        let f = ilu0_factorize(&a).unwrap();
        let c = CountingPrec::new(&f);
        let v = vec![1.0; 9];
        c.apply_minv(&v);
        c.apply_minv(&v);
        c.apply_minv_t(&v);
        c.apply_split(SplitOp::Lmul, &v);
        assert_eq!(
            (c.minv_count(), c.minv_t_count(), c.split_count()),
            (2, 1, 1)
        );
    }
}
