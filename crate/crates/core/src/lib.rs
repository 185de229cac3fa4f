//! Sparse BiCG-family solvers under left-, right- and two-sided
//! preconditioning, with runtime verification of the algebraic structure.
//!
//! The crate is organized around four pieces:
//!
//! * [`sparse`] - CSR storage, dense vector kernels, Matrix Market style
//!   test-problem generators;
//! * [`mm`] - Matrix Market coordinate file reading and writing;
//! * [`precond`] - ILU(0) factorization `P = L U` and every factor action
//!   the solvers need (`P^{-1}`, `P^{-T}` and the split forms);
//! * [`krylov`] - plain BiCG, BiCG on an explicitly converted system, the
//!   four preconditioned BiCG shapes, and BiCR, all with full iteration
//!   traces;
//! * [`verify`] - independent oracles: scalar residual polynomials,
//!   biorthogonality/biconjugacy measurements and trace comparison.
//!
//! The headline capability is switching the direction of the preconditioned
//! system purely through the initial shadow residual vector: running
//! [`krylov::pbicg_standard`] with [`krylov::IsrvSpec::Isrv1`] /
//! [`krylov::IsrvSpec::Isrv2`] / [`krylov::IsrvSpec::Isrv3`] reproduces the
//! convergence histories of [`krylov::bicg_converted`] on the left / right /
//! two-sided system, and the [`verify`] oracles measure that equivalence at
//! runtime rather than assuming it.
//!
//! ```
//! use bilanczos::*;
//!
//! // Nonsymmetric convection-diffusion problem with the all-ones solution.
//! let a = generate_stencil(16, 0.5);
//! let b = a.matvec(&vec![1.0; a.dim()]);
//! let x0 = vec![0.0; a.dim()];
//! let p = ilu0_factorize(&a)?;
//! let cfg = SolverConfig::with_tol(1e-8);
//!
//! // Explicit right-preconditioned run vs the standard algorithm steered
//! // into the right system by its ISRV alone.
//! let converted = bicg_converted(&a, &b, &x0, &p, PrecSide::Right, &cfg)?;
//! let steered = pbicg_standard(&a, &b, &x0, &p, &IsrvSpec::Isrv2, &cfg)?;
//! assert!(converted.converged() && steered.converged());
//!
//! let k = converted.iterations.min(steered.iterations);
//! let cmp = compare_traces(&converted.trace, &steered.trace, k)?;
//! assert!(cmp.max_rel_alpha < 1e-8 && cmp.max_rel_relres < 1e-6);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod krylov;
pub mod mm;
pub mod precond;
pub mod sparse;
pub mod verify;

pub use krylov::{
    bicg, bicg_converted, bicg_converted_split, bicr, pbicg_improved2, pbicg_left, pbicg_right,
    pbicg_standard, IsrvSpec, IterationTrace, SolveResult, SolveStatus, SolverConfig, SolverError,
    VectorHistory,
};
pub use mm::{read_matrix_market, write_matrix_market, MatrixMarketError};
pub use precond::{
    ilu0_factorize, BreakdownError, CanonicalSplit, CountingPrec, IdentityPrec, Ilu0Factors,
    LeftOnlySplit, PrecSide, Preconditioner, RightOnlySplit, SplitOp, SplitPreconditioner,
};
pub use sparse::{axpy, dot, generate_random, generate_stencil, norm2, xpby, CsrError, CsrMatrix};
pub use verify::{
    check_biconjugacy, check_biorthogonality, check_polynomial_consistency, compare_traces,
    ortho_report, polynomial_trace, rel_dev, OrthoReport, PolynomialTrace, SystemForm,
    TraceComparison, VerifyError,
};
