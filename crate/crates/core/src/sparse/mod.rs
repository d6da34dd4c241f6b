//! Sparse matrices, bordered saddle-point systems and direct solves.

mod csr;
mod lu;
mod saddle;

pub use csr::CsrMatrix;
pub use lu::{LuAnalysis, LuFactorization, RESIDUAL_TOLERANCE};
pub use saddle::{SaddleFactorization, SaddleSolution, SaddleSystem};
