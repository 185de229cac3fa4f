//! Sparse matrix storage and dense vector kernels.
//!
//! Everything in this crate operates on square real matrices in compressed
//! sparse row (CSR) form and on plain `&[f64]` vectors. All kernels accumulate
//! in a fixed left-to-right order so that repeated runs are bit-identical;
//! none of them parallelize internally.

use thiserror::Error;

/// Errors raised while assembling a [`CsrMatrix`].
#[derive(Debug, Error)]
pub enum CsrError {
    #[error("matrix must be square (got {rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("entry ({i}, {j}) is out of bounds for dimension {n}")]
    IndexOutOfBounds { i: usize, j: usize, n: usize },
}

/// Square sparse matrix in compressed sparse row form.
///
/// Invariants maintained by every constructor:
/// * `row_ptr` is nondecreasing with `row_ptr[0] == 0` and `row_ptr[n] == nnz`,
/// * column indices are strictly increasing within each row and `< n`,
/// * duplicate coordinate entries have been summed.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build a CSR matrix from coordinate triplets. Duplicates are summed in
    /// input order (Matrix Market convention).
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self, CsrError> {
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(CsrError::IndexOutOfBounds { i, j, n });
            }
        }
        // Counting sort by row keeps assembly O(nnz + n) and deterministic.
        let mut counts = vec![0usize; n + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut by_row: Vec<(usize, f64)> = vec![(0, 0.0); triplets.len()];
        let mut next = counts.clone();
        for &(i, j, v) in triplets {
            by_row[next[i]] = (j, v);
            next[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for i in 0..n {
            let row = &mut by_row[counts[i]..counts[i + 1]];
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut sum = 0.0;
                while k < row.len() && row[k].0 == j {
                    sum += row[k].1;
                    k += 1;
                }
                col_idx.push(j);
                values.push(sum);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Identity matrix of dimension `n`.
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// `y = A x`, accumulated per row in stored (ascending) column order.
    ///
    /// Panics on a length mismatch.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "matvec: dimension mismatch");
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// `y = A^T x`, scattering row by row so every output component also
    /// accumulates in ascending row order.
    ///
    /// Panics on a length mismatch.
    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "matvec_transpose: dimension mismatch");
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] += v * x[i];
            }
        }
        y
    }

    /// Dense copy, for small-scale oracles and debugging.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[i][j] = v;
            }
        }
        d
    }

    /// True when the stored values are exactly symmetric.
    pub fn is_symmetric(&self) -> bool {
        let d = self.to_dense();
        for i in 0..self.n {
            for j in 0..i {
                if d[i][j] != d[j][i] {
                    return false;
                }
            }
        }
        true
    }
}

/// Euclidean inner product with fixed left-to-right accumulation.
///
/// Panics on a length mismatch.
pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    assert_eq!(u.len(), v.len(), "dot: dimension mismatch");
    let mut acc = 0.0;
    for (a, b) in u.iter().zip(v) {
        acc += a * b;
    }
    acc
}

/// Euclidean norm.
pub fn norm2(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// `y += alpha * x`.
///
/// Panics on a length mismatch.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    assert_eq!(x.len(), y.len(), "axpy: dimension mismatch");
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `y = x + beta * y` (the probing-direction update of every solver here).
pub fn xpby(x: &[f64], beta: f64, y: &mut [f64]) {
    assert_eq!(x.len(), y.len(), "xpby: dimension mismatch");
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = xi + beta * *yi;
    }
}

/// 5-point convection-diffusion stencil on an `m x m` grid (`n = m*m`).
///
/// Center coefficient 4, neighbor coefficients `-1 -/+ convection/(2(m+1))`
/// upwind/downwind in both grid directions. Symmetric exactly when
/// `convection == 0`, mildly nonsymmetric otherwise. Fully deterministic.
///
/// Panics when `m < 2`.
pub fn generate_stencil(m: usize, convection: f64) -> CsrMatrix {
    assert!(m >= 2, "generate_stencil: grid must be at least 2x2");
    let n = m * m;
    let shift = convection / (2.0 * (m as f64 + 1.0));
    let mut triplets = Vec::with_capacity(5 * n);
    for row in 0..m {
        for col in 0..m {
            let i = row * m + col;
            triplets.push((i, i, 4.0));
            if col > 0 {
                triplets.push((i, i - 1, -1.0 - shift));
            }
            if col + 1 < m {
                triplets.push((i, i + 1, -1.0 + shift));
            }
            if row > 0 {
                triplets.push((i, i - m, -1.0 - shift));
            }
            if row + 1 < m {
                triplets.push((i, i + m, -1.0 + shift));
            }
        }
    }
    CsrMatrix::from_triplets(n, &triplets).expect("stencil triplets are in range")
}

/// Seeded random sparse nonsymmetric matrix, made strictly diagonally
/// dominant so it is well conditioned and safe for ILU(0).
///
/// Panics when `n == 0` or `density` is outside `(0, 1]`.
pub fn generate_random(n: usize, density: f64, seed: u64) -> CsrMatrix {
    use rand::{Rng, SeedableRng};
    assert!(n > 0, "generate_random: dimension must be positive");
    assert!(
        density > 0.0 && density <= 1.0,
        "generate_random: density must lie in (0, 1]"
    );
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut triplets = Vec::new();
    let mut row_abs = vec![0.0f64; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if rng.gen::<f64>() < density {
                let v: f64 = rng.gen_range(-1.0..1.0);
                triplets.push((i, j, v));
                row_abs[i] += v.abs();
            }
        }
    }
    for i in 0..n {
        triplets.push((i, i, row_abs[i] + 1.0));
    }
    CsrMatrix::from_triplets(n, &triplets).expect("random triplets are in range")
}
