//! Sparse direct LU with partial pivoting and a COLAMD fill-reducing
//! column ordering, backed by faer's supernodal factorization.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::Mat;

use super::csr::CsrMatrix;
use crate::error::{Error, Result};

/// Relative residual a solve must reach before it is accepted.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

const REFINEMENT_STEPS: usize = 3;

/// Column-compressed copy of a square CSR matrix (the CSR arrays of `A^T`).
struct Csc {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl Csc {
    fn from_csr(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidArgument(format!(
                "LU needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let t = a.transpose();
        Ok(Self {
            n: a.nrows(),
            col_ptr: t.row_ptr().to_vec(),
            row_idx: t.col_idx().to_vec(),
            values: t.values().to_vec(),
        })
    }

    fn symbolic(&self) -> SymbolicSparseColMatRef<'_, usize> {
        SymbolicSparseColMatRef::new_checked(self.n, self.n, &self.col_ptr, None, &self.row_idx)
    }
}

fn lu_error(err: LuError) -> Error {
    match err {
        LuError::SymbolicSingular { index } => Error::Singular { row: index },
        LuError::Generic(e) => Error::InvalidArgument(format!("sparse LU: {e:?}")),
    }
}

/// Symbolic analysis reusable for every matrix with the same pattern.
#[derive(Clone, Debug)]
pub struct LuAnalysis {
    symbolic: SymbolicLu<usize>,
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl LuAnalysis {
    pub fn new(pattern: &CsrMatrix) -> Result<Self> {
        let csc = Csc::from_csr(pattern)?;
        let symbolic = SymbolicLu::try_new(csc.symbolic())
            .map_err(|e| Error::InvalidArgument(format!("sparse LU analysis: {e:?}")))?;
        Ok(Self {
            symbolic,
            n: csc.n,
            row_ptr: pattern.row_ptr().to_vec(),
            col_idx: pattern.col_idx().to_vec(),
        })
    }

    fn matches(&self, a: &CsrMatrix) -> bool {
        a.nrows() == self.n && a.row_ptr() == self.row_ptr.as_slice() && a.col_idx() == self.col_idx.as_slice()
    }
}

/// Numeric LU factors together with the matrix they came from (kept for
/// residual checks and iterative refinement).
pub struct LuFactorization {
    lu: Lu<usize, f64>,
    matrix: CsrMatrix,
}

impl std::fmt::Debug for LuFactorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LuFactorization")
            .field("n", &self.matrix.nrows())
            .field("nnz", &self.matrix.nnz())
            .finish()
    }
}

impl LuFactorization {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let analysis = LuAnalysis::new(a)?;
        Self::with_analysis(&analysis, a)
    }

    /// Numeric factorization reusing a symbolic analysis of the same pattern.
    pub fn with_analysis(analysis: &LuAnalysis, a: &CsrMatrix) -> Result<Self> {
        if !analysis.matches(a) {
            return Err(Error::InvalidArgument(
                "matrix pattern differs from the analysed pattern".into(),
            ));
        }
        let csc = Csc::from_csr(a)?;
        let mat = SparseColMatRef::new(csc.symbolic(), &csc.values);
        let lu = Lu::try_new_with_symbolic(analysis.symbolic.clone(), mat).map_err(lu_error)?;
        Ok(Self {
            lu,
            matrix: a.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        self.lu.solve_in_place(rhs.as_mut());
        (0..b.len()).map(|i| rhs[(i, 0)]).collect()
    }

    /// Solves `A x = b`, refining until `|Ax - b| / |b| <= RESIDUAL_TOLERANCE`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_with_tolerance(b, RESIDUAL_TOLERANCE)
    }

    pub fn solve_with_tolerance(&self, b: &[f64], tolerance: f64) -> Result<Vec<f64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let b_norm = norm2(b);
        if b_norm == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let mut x = self.raw_solve(b);
        let mut residual = vec![0.0; n];
        for step in 0..=REFINEMENT_STEPS {
            if let Some(row) = x.iter().position(|v| !v.is_finite()) {
                return Err(Error::Singular { row });
            }
            self.matrix.matvec_into(&x, &mut residual)?;
            for (r, bi) in residual.iter_mut().zip(b) {
                *r = bi - *r;
            }
            let rel = norm2(&residual) / b_norm;
            if rel <= tolerance {
                return Ok(x);
            }
            if step == REFINEMENT_STEPS {
                let row = residual
                    .iter()
                    .enumerate()
                    .fold((0, 0.0), |acc, (i, r)| if r.abs() > acc.1 { (i, r.abs()) } else { acc })
                    .0;
                return Err(Error::Inaccurate { residual: rel, row });
            }
            let dx = self.raw_solve(&residual);
            for (xi, d) in x.iter_mut().zip(&dx) {
                *xi += d;
            }
        }
        unreachable!("refinement loop always returns")
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
