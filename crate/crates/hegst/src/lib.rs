//! Reduction of the generalized Hermitian-definite eigenvalue problem
//! A x = lambda B x to standard form, built around the family of blocked
//! algorithms for the two-sided triangular solve A := L^-1 A L^-H and the
//! two-sided triangular product A := L^H A L.
//!
//! The crate provides:
//!
//! * five blocked solve variants and two blocked product variants, all
//!   updating only the lower triangle in place ([`trsm`], [`trmm`]);
//! * instrumented reference kernels (gemm/hemm/her2k/herk/trsm/trmm/Cholesky)
//!   that report flops by class into a [`ledger::FlopLedger`];
//! * an executable worksheet: per-variant loop invariants checked at every
//!   iteration boundary against brute-force oracle references ([`worksheet`]);
//! * an independent oracle module (explicit inverses, dense products) used as
//!   ground truth everywhere ([`oracle`]);
//! * a cost model reproducing the per-class flop fractions and the
//!   scalability proxy ([`cost`]);
//! * the reduction pipeline and Matrix Market I/O ([`pipeline`], [`market`]).
//!
//! Real (`f64`) and complex (`Complex64`) double precision are supported
//! throughout; test-matrix generation is deterministic (ChaCha8 keyed by the
//! seed).

// Index loops below mirror the triangular region arithmetic; iterator
// rewrites obscure the ranges without changing the generated code.
#![allow(clippy::needless_range_loop)]

pub mod cost;
pub mod error;
pub mod kernels;
pub mod ledger;
pub mod market;
pub mod matrix;
pub mod oracle;
pub mod pipeline;
pub mod random;
pub mod scalar;
pub mod triangular;
pub mod trmm;
pub mod trsm;
pub mod worksheet;

pub use error::{Error, Result};
pub use ledger::{FlopLedger, KernelClass};
pub use matrix::{partition_schedule, DenseMatrix, MatMut, MatRef};
pub use scalar::Scalar;
pub use triangular::{HermitianMatrix, TriangularMatrix};
pub use trmm::{two_sided_trmm, two_sided_trmm_unblocked, TrmmVariant};
pub use trsm::{two_sided_trsm, two_sided_trsm_unblocked, TrsmVariant};

pub use num_complex::Complex64;
