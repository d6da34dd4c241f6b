//! Velocity-pressure block system.
//!
//! Unknown layout: velocity dofs, then pressure dofs:
//!
//! ```text
//! [ K   -D^T ] [u]   [f]
//! [-D    0   ] [p] = [0]
//! ```
//!
//! Dirichlet velocity rows are identity rows with zero right-hand side, and
//! the couplings into Dirichlet columns are dropped (their values are zero).
//!
//! With mean weights `w` the pressure is fixed by `w . p = 0`. The last
//! continuity row is replaced by `p_last = 0` (the rows of `D` sum to zero on
//! velocities vanishing on the boundary, so that row is redundant), and the
//! solution is shifted by a constant afterwards. The result equals the one of
//! the bordered system with multiplier `l`, `-D u + w l = 0`, `w^T p = 0`.

use super::csr::CsrMatrix;
use super::lu::{LuAnalysis, LuFactorization};
use crate::error::{Error, Result};

const UNMAPPED: usize = usize::MAX;

#[derive(Clone, Debug)]
struct MeanConstraint {
    weights: Vec<f64>,
    total: f64,
    /// `sum_i D_ij` over interior velocity columns.
    column_sums: Vec<f64>,
}

impl MeanConstraint {
    /// Shifts `p` to zero weighted mean; returns the bordered multiplier.
    fn apply(&self, velocity: &[f64], pressure: &mut [f64]) -> f64 {
        let shift = dot(&self.weights, pressure) / self.total;
        for p in pressure.iter_mut() {
            *p -= shift;
        }
        dot(&self.column_sums, velocity) / self.total
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Debug)]
pub struct SaddleSystem {
    nu: usize,
    np: usize,
    mean: Option<MeanConstraint>,
    matrix: CsrMatrix,
    /// Global storage position of each velocity-block entry (or `UNMAPPED`).
    velocity_map: Vec<usize>,
    velocity_row_ptr: Vec<usize>,
    velocity_col_idx: Vec<usize>,
    boundary_mask: Vec<bool>,
    analysis: LuAnalysis,
}

impl SaddleSystem {
    /// `divergence` has entries `(div phi_j, chi_i)`: pressure rows, velocity columns.
    pub fn new(
        velocity_block: &CsrMatrix,
        divergence: &CsrMatrix,
        boundary: &[usize],
        mean_weights: Option<&[f64]>,
    ) -> Result<Self> {
        let nu = velocity_block.nrows();
        if velocity_block.ncols() != nu {
            return Err(Error::InvalidArgument("velocity block must be square".into()));
        }
        if divergence.ncols() != nu {
            return Err(Error::DimensionMismatch {
                expected: nu,
                found: divergence.ncols(),
            });
        }
        let np = divergence.nrows();
        if let Some(w) = mean_weights {
            if w.len() != np {
                return Err(Error::DimensionMismatch {
                    expected: np,
                    found: w.len(),
                });
            }
        }
        let mut boundary_mask = vec![false; nu];
        for &b in boundary {
            *boundary_mask.get_mut(b).ok_or_else(|| {
                Error::InvalidArgument(format!("boundary dof {b} out of range"))
            })? = true;
        }
        let mean = match mean_weights {
            Some(w) => {
                let total: f64 = w.iter().sum();
                if np == 0 || !(total.abs() > 0.0) {
                    return Err(Error::InvalidArgument(
                        "mean weights must have a nonzero sum".into(),
                    ));
                }
                let mut column_sums = vec![0.0; nu];
                for i in 0..np {
                    let (cols, vals) = divergence.row(i);
                    for (&c, &v) in cols.iter().zip(vals) {
                        if !boundary_mask[c] {
                            column_sums[c] += v;
                        }
                    }
                }
                Some(MeanConstraint {
                    weights: w.to_vec(),
                    total,
                    column_sums,
                })
            }
            None => None,
        };
        let n = nu + np;
        let grad = divergence.transpose();

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut velocity_map = vec![UNMAPPED; velocity_block.nnz()];
        row_ptr.push(0);

        for r in 0..nu {
            if boundary_mask[r] {
                col_idx.push(r);
                values.push(1.0);
            } else {
                let start = velocity_block.row_ptr()[r];
                let (cols, vals) = velocity_block.row(r);
                for (k, (&c, &v)) in cols.iter().zip(vals).enumerate() {
                    if !boundary_mask[c] {
                        velocity_map[start + k] = col_idx.len();
                        col_idx.push(c);
                        values.push(v);
                    }
                }
                let (pcols, pvals) = grad.row(r);
                for (&i, &v) in pcols.iter().zip(pvals) {
                    col_idx.push(nu + i);
                    values.push(-v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        for i in 0..np {
            if mean.is_some() && i + 1 == np {
                col_idx.push(nu + i);
                values.push(1.0);
            } else {
                let (cols, vals) = divergence.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    if !boundary_mask[c] {
                        col_idx.push(c);
                        values.push(-v);
                    }
                }
            }
            row_ptr.push(col_idx.len());
        }

        let matrix = CsrMatrix::new(n, n, row_ptr, col_idx, values)?;
        let analysis = LuAnalysis::new(&matrix)?;
        Ok(Self {
            nu,
            np,
            mean,
            matrix,
            velocity_map,
            velocity_row_ptr: velocity_block.row_ptr().to_vec(),
            velocity_col_idx: velocity_block.col_idx().to_vec(),
            boundary_mask,
            analysis,
        })
    }

    pub fn velocity_dofs(&self) -> usize {
        self.nu
    }

    pub fn pressure_dofs(&self) -> usize {
        self.np
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Overwrites the velocity block; `block` must share the original pattern.
    pub fn update_velocity_block(&mut self, block: &CsrMatrix) -> Result<()> {
        if block.row_ptr() != self.velocity_row_ptr.as_slice()
            || block.col_idx() != self.velocity_col_idx.as_slice()
        {
            return Err(Error::InvalidArgument(
                "velocity block pattern changed".into(),
            ));
        }
        let values = self.matrix.values_mut();
        for (&pos, &v) in self.velocity_map.iter().zip(block.values()) {
            if pos != UNMAPPED {
                values[pos] = v;
            }
        }
        Ok(())
    }

    /// Global right-hand side from a momentum load; Dirichlet rows are zeroed.
    pub fn rhs(&self, momentum: &[f64]) -> Result<Vec<f64>> {
        if momentum.len() != self.nu {
            return Err(Error::DimensionMismatch {
                expected: self.nu,
                found: momentum.len(),
            });
        }
        let mut b = vec![0.0; self.dim()];
        for (r, (&f, &bc)) in momentum.iter().zip(&self.boundary_mask).enumerate() {
            if !bc {
                b[r] = f;
            }
        }
        Ok(b)
    }

    pub fn factorize(&self) -> Result<SaddleFactorization> {
        Ok(SaddleFactorization {
            lu: LuFactorization::with_analysis(&self.analysis, &self.matrix)?,
            nu: self.nu,
            mean: self.mean.clone(),
        })
    }
}

#[derive(Debug)]
pub struct SaddleFactorization {
    lu: LuFactorization,
    nu: usize,
    mean: Option<MeanConstraint>,
}

/// Velocity, pressure and mean-constraint multiplier of one saddle solve.
#[derive(Clone, Debug)]
pub struct SaddleSolution {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    pub multiplier: f64,
}

impl SaddleFactorization {
    pub fn solve(&self, rhs: &[f64]) -> Result<SaddleSolution> {
        self.solve_with_tolerance(rhs, super::RESIDUAL_TOLERANCE)
    }

    pub fn solve_with_tolerance(&self, rhs: &[f64], tolerance: f64) -> Result<SaddleSolution> {
        let mut x = self.lu.solve_with_tolerance(rhs, tolerance)?;
        let mut pressure = x.split_off(self.nu);
        let multiplier = match &self.mean {
            Some(m) => m.apply(&x, &mut pressure),
            None => 0.0,
        };
        Ok(SaddleSolution {
            velocity: x,
            pressure,
            multiplier,
        })
    }
}
