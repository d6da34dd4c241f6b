use crate::error::{Error, Result};

/// Compressed-sparse-row matrix with strictly increasing column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw arrays after checking the CSR invariants.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("CSR: {msg}")));
        if row_ptr.len() != nrows + 1 || row_ptr[0] != 0 {
            return bad("row pointer must have length rows + 1 and start at 0");
        }
        if row_ptr.windows(2).any(|w| w[0] > w[1]) {
            return bad("row pointer must be non-decreasing");
        }
        if *row_ptr.last().unwrap() != col_idx.len() || col_idx.len() != values.len() {
            return bad("index and value arrays disagree with row pointer");
        }
        for r in 0..nrows {
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad("column indices must be strictly increasing within a row");
            }
            if cols.last().is_some_and(|&c| c >= ncols) {
                return bad("column index out of range");
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Duplicate entries are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted = triplets.to_vec();
        for &(r, c, _) in &sorted {
            if r >= nrows || c >= ncols {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({r}, {c}) outside {nrows}x{ncols}"
                )));
            }
        }
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self::new(nrows, ncols, row_ptr, col_idx, values)
    }

    /// Zero-valued matrix with the given sorted, duplicate-free row patterns.
    pub fn from_row_patterns(ncols: usize, rows: &[Vec<usize>]) -> Result<Self> {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for row in rows {
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self::new(rows.len(), ncols, row_ptr, col_idx, vec![0.0; nnz])
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Keeps only the nonzero entries of a dense row-major matrix.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((r, c, v));
                }
            }
        }
        Self::from_triplets(rows.len(), ncols, &triplets).expect("dense input is well formed")
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, row) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c] = v;
            }
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
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

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    /// Storage position of entry `(r, c)`, if it is in the pattern.
    #[inline]
    pub fn position(&self, r: usize, c: usize) -> Option<usize> {
        let start = self.row_ptr[r];
        self.col_idx[start..self.row_ptr[r + 1]]
            .binary_search(&c)
            .ok()
            .map(|k| start + k)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.position(r, c).map_or(0.0, |p| self.values[p])
    }

    /// Adds `v` to an entry already in the pattern.
    ///
    /// Panics if `(r, c)` is not part of the sparsity pattern.
    #[inline]
    pub fn add_to(&mut self, r: usize, c: usize, v: f64) {
        let p = self
            .position(r, c)
            .unwrap_or_else(|| panic!("entry ({r}, {c}) not in sparsity pattern"));
        self.values[p] += v;
    }

    pub fn same_pattern(&self, other: &Self) -> bool {
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
    }

    /// Zero-valued copy sharing this matrix's pattern.
    pub fn zeros_like(&self) -> Self {
        Self {
            values: vec![0.0; self.values.len()],
            ..self.clone()
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                found: x.len(),
            });
        }
        if y.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                expected: self.nrows,
                found: y.len(),
            });
        }
        for (r, out) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            *out = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        }
        Ok(())
    }

    /// `x^T M y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                expected: self.nrows,
                found: x.len(),
            });
        }
        let my = self.matvec(y)?;
        Ok(x.iter().zip(&my).map(|(a, b)| a * b).sum())
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let p = next[c];
                col_idx[p] = r;
                values[p] = v;
                next[c] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `c1 * m1 + c2 * m2` on the union pattern.
    pub fn add_scaled(m1: &Self, c1: f64, m2: &Self, c2: f64) -> Result<Self> {
        if m1.nrows != m2.nrows || m1.ncols != m2.ncols {
            return Err(Error::InvalidArgument(format!(
                "shape mismatch: {}x{} vs {}x{}",
                m1.nrows, m1.ncols, m2.nrows, m2.ncols
            )));
        }
        if m1.same_pattern(m2) {
            let values = m1
                .values
                .iter()
                .zip(&m2.values)
                .map(|(a, b)| c1 * a + c2 * b)
                .collect();
            return Ok(Self {
                values,
                ..m1.clone()
            });
        }
        let mut row_ptr = Vec::with_capacity(m1.nrows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::with_capacity(m1.nnz().max(m2.nnz()));
        let mut values = Vec::with_capacity(m1.nnz().max(m2.nnz()));
        for r in 0..m1.nrows {
            let (ca, va) = m1.row(r);
            let (cb, vb) = m2.row(r);
            let (mut i, mut j) = (0, 0);
            while i < ca.len() || j < cb.len() {
                let take_a = j == cb.len() || (i < ca.len() && ca[i] <= cb[j]);
                let take_b = i == ca.len() || (j < cb.len() && cb[j] <= ca[i]);
                let col = if take_a { ca[i] } else { cb[j] };
                let mut v = 0.0;
                if take_a {
                    v += c1 * va[i];
                    i += 1;
                }
                if take_b {
                    v += c2 * vb[j];
                    j += 1;
                }
                col_idx.push(col);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            nrows: m1.nrows,
            ncols: m1.ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// In-place `self += c * other`; `other` must share the pattern.
    pub fn axpy(&mut self, c: f64, other: &Self) -> Result<()> {
        if !self.same_pattern(other) {
            return Err(Error::InvalidArgument("axpy requires identical patterns".into()));
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    /// Largest `|M_ij - M_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let diff = Self::add_scaled(self, 1.0, &t, -1.0).expect("square");
        diff.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Two-component block-diagonal expansion `diag(S, S)` of a scalar operator.
    pub fn block_diagonal2(&self) -> Self {
        let n = self.nrows;
        let m = self.ncols;
        let mut row_ptr = Vec::with_capacity(2 * n + 1);
        let mut col_idx = Vec::with_capacity(2 * self.nnz());
        let mut values = Vec::with_capacity(2 * self.nnz());
        row_ptr.push(0);
        for block in 0..2 {
            for r in 0..n {
                let (cols, vals) = self.row(r);
                col_idx.extend(cols.iter().map(|&c| c + block * m));
                values.extend_from_slice(vals);
                row_ptr.push(col_idx.len());
            }
        }
        Self {
            nrows: 2 * n,
            ncols: 2 * m,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Replaces each listed row by the corresponding identity row.
    ///
    /// Panics if a listed row has no diagonal entry in its pattern.
    pub fn set_identity_rows(&mut self, rows: &[usize]) {
        for &r in rows {
            let range = self.row_ptr[r]..self.row_ptr[r + 1];
            for v in &mut self.values[range] {
                *v = 0.0;
            }
            let p = self
                .position(r, r)
                .unwrap_or_else(|| panic!("row {r} has no diagonal entry"));
            self.values[p] = 1.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{dense_add, dense_matvec, random_sparse};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matvec_examples() {
        let id = CsrMatrix::identity(4);
        let x = [1.0, -2.0, 3.5, 0.25];
        assert_eq!(id.matvec(&x).unwrap(), x.to_vec());
        let m = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![0.0, 3.0]]);
        assert_eq!(m.matvec(&[1.0, 1.0]).unwrap(), vec![3.0, 3.0]);
        assert!(matches!(
            m.matvec(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn matvec_against_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20 {
            let n = if trial == 0 { 50 } else { 5 + trial * 3 };
            let (m, dense) = random_sparse(&mut rng, n, n, 0.1);
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let got = m.matvec(&x).unwrap();
            let expect = dense_matvec(&dense, &x);
            for (a, b) in got.iter().zip(&expect) {
                assert!((a - b).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn add_scaled_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (m, _) = random_sparse(&mut rng, 12, 12, 0.2);
        let zero = CsrMatrix::add_scaled(&m, 1.0, &m, 0.0).unwrap();
        assert_eq!(zero, m);

        let d = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
        let o = CsrMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let s = CsrMatrix::add_scaled(&d, 1.0, &o, 1.0).unwrap();
        assert_eq!(s.to_dense(), vec![vec![1.0, 1.0], vec![1.0, 2.0]]);

        let (a, da) = random_sparse(&mut rng, 30, 20, 0.15);
        let (b, db) = random_sparse(&mut rng, 30, 20, 0.15);
        let got = CsrMatrix::add_scaled(&a, 0.7, &b, -1.3).unwrap().to_dense();
        let expect = dense_add(&da, 0.7, &db, -1.3);
        for (gr, er) in got.iter().zip(&expect) {
            for (g, e) in gr.iter().zip(er) {
                assert!((g - e).abs() <= 1e-14);
            }
        }
        assert!(CsrMatrix::add_scaled(&a, 1.0, &CsrMatrix::identity(30), 1.0).is_err());
    }

    #[test]
    fn constructor_rejects_bad_invariants() {
        assert!(CsrMatrix::new(2, 2, vec![0, 1], vec![0], vec![1.0]).is_err());
        assert!(CsrMatrix::new(1, 2, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::new(1, 2, vec![0, 2], vec![0, 0], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::new(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
        assert!(CsrMatrix::new(2, 2, vec![0, 1, 0], vec![0], vec![1.0]).is_err());
    }

    #[test]
    fn triplets_sum_duplicates_and_transpose() {
        let m = CsrMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (1, 0, 2.0), (0, 2, 0.5), (0, 0, 4.0)]).unwrap();
        assert_eq!(m.to_dense(), vec![vec![4.0, 0.0, 1.5], vec![2.0, 0.0, 0.0]]);
        let t = m.transpose();
        assert_eq!(t.to_dense(), vec![vec![4.0, 2.0], vec![0.0, 0.0], vec![1.5, 0.0]]);
        assert!(CsrMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn identity_rows_and_block_expansion() {
        let mut m = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let b = m.block_diagonal2();
        assert_eq!(b.nrows(), 4);
        assert_eq!(b.get(2, 3), 1.0);
        assert_eq!(b.get(0, 2), 0.0);
        m.set_identity_rows(&[1]);
        assert_eq!(m.to_dense(), vec![vec![2.0, 1.0], vec![0.0, 1.0]]);
    }

    proptest! {
        #[test]
        fn add_scaled_commutes(seed in any::<u64>(), c1 in -3.0f64..3.0, c2 in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, _) = random_sparse(&mut rng, 15, 15, 0.2);
            let (b, _) = random_sparse(&mut rng, 15, 15, 0.2);
            let ab = CsrMatrix::add_scaled(&a, c1, &b, c2).unwrap();
            let ba = CsrMatrix::add_scaled(&b, c2, &a, c1).unwrap();
            prop_assert_eq!(ab.to_dense(), ba.to_dense());
        }

        #[test]
        fn transpose_is_an_involution(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, _) = random_sparse(&mut rng, 9, 14, 0.3);
            prop_assert_eq!(a.transpose().transpose(), a);
        }
    }
}
