//! Shared setup for the benchmark targets.

use bilanczos::{generate_stencil, CsrMatrix};

/// Convection-diffusion test problem on an `m x m` grid with the all-ones
/// exact solution.
pub fn test_problem(m: usize) -> (CsrMatrix, Vec<f64>) {
    let a = generate_stencil(m, 0.5);
    let b = a.matvec(&vec![1.0; a.dim()]);
    (a, b)
}
