//! Independent reference computations used only by unit tests.

use rand::Rng;

use crate::sparse::CsrMatrix;

pub fn random_sparse(rng: &mut impl Rng, nrows: usize, ncols: usize, density: f64) -> (CsrMatrix, Vec<Vec<f64>>) {
    let mut dense = vec![vec![0.0; ncols]; nrows];
    for row in dense.iter_mut() {
        for v in row.iter_mut() {
            if rng.gen::<f64>() < density {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
    }
    (CsrMatrix::from_dense(&dense), dense)
}

pub fn dense_matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn dense_add(a: &[Vec<f64>], ca: f64, b: &[Vec<f64>], cb: f64) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| ca * x + cb * y).collect())
        .collect()
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        x.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..n {
                    m[r][c] -= f * m[col][c];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (x[r] - s) / m[r][r];
    }
    Some(x)
}

/// Smallest eigenvalue of the symmetric-definite pencil `(a, m)` by inverse
/// iteration with Rayleigh quotients.
pub fn min_generalized_eigenvalue(a: &[Vec<f64>], m: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * (i as f64).sin()).collect();
    let mut lambda = 0.0;
    for _ in 0..200 {
        let mv = dense_matvec(m, &v);
        let w = dense_solve(a, &mv).expect("stiffness nonsingular");
        let aw = dense_matvec(a, &w);
        let mw = dense_matvec(m, &w);
        let num: f64 = w.iter().zip(&aw).map(|(x, y)| x * y).sum();
        let den: f64 = w.iter().zip(&mw).map(|(x, y)| x * y).sum();
        let next = num / den;
        let scale = den.sqrt();
        v = w.iter().map(|x| x / scale).collect();
        if (next - lambda).abs() < 1e-13 * next.abs() {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}
