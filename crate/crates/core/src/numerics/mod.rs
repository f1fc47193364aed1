//! Self-contained dense and sparse linear algebra.
//!
//! Everything here is a pure function of immutable inputs.

pub mod dense;
pub mod sparse;

pub use dense::{gen_sym_eigen, null_space_basis, sym_eigen, Cholesky, DenseSymMatrix, SymEigen};
pub use sparse::{cg_solve, cg_solve_with, dot, norm, CgOptions, CgReport, SparseSymMatrix};
