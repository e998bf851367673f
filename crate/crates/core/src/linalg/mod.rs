//! Dense and CSR sparse matrices and the conjugate-gradient solver.

mod cg;
mod dense;
mod sparse;

pub use cg::{conjugate_gradient, CgOutcome, CgSettings};
pub use dense::{ensure_finite, matmul, DenseMatrix};
pub use sparse::{SparseMatrix, PRUNE_THRESHOLD};
