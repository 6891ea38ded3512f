//! Compressed sparse row matrices with deterministic assembly.

/// Sparse matrix in CSR form. Column indices are strictly increasing per row.
/// Explicit zeros produced during assembly are kept so that operators built
/// over the same connectivity share one pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates `(row, col, value)` contributions in insertion order.
#[derive(Debug, Clone, Default)]
pub struct TripletList {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletList {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    /// Duplicates are summed in insertion order, so the result depends only
    /// on the order of `push` calls.
    pub fn into_csr(mut self) -> CsrMatrix {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len() / 2);
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len() / 2);
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        TripletList::new(nrows, ncols).into_csr()
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

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn same_pattern(&self, o: &CsrMatrix) -> bool {
        self.nrows == o.nrows && self.ncols == o.ncols && self.row_ptr == o.row_ptr && self.col_idx == o.col_idx
    }

    /// `(col, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `y = A^T x`
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            for (j, v) in self.row(i) {
                y[j] += v * xi;
            }
        }
        y
    }

    /// `x^T A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(self.matvec(y)).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t = TripletList::with_capacity(self.ncols, self.nrows, self.nnz());
        for (i, j, v) in self.triplets() {
            t.push(j, i, v);
        }
        t.into_csr()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, a: f64) -> CsrMatrix {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= a);
        m
    }

    /// `sum_k c_k A_k` over matrices of equal shape.
    pub fn linear_combination(terms: &[(f64, &CsrMatrix)]) -> CsrMatrix {
        let (nrows, ncols) = (terms[0].1.nrows, terms[0].1.ncols);
        if terms.iter().all(|(_, m)| m.same_pattern(terms[0].1)) {
            let mut out = terms[0].1.clone();
            for (k, v) in out.values.iter_mut().enumerate() {
                *v = terms.iter().map(|(c, m)| c * m.values[k]).sum();
            }
            return out;
        }
        let cap = terms.iter().map(|(_, m)| m.nnz()).sum();
        let mut t = TripletList::with_capacity(nrows, ncols, cap);
        for (c, m) in terms {
            assert_eq!((m.nrows, m.ncols), (nrows, ncols));
            for (i, j, v) in m.triplets() {
                t.push(i, j, c * v);
            }
        }
        t.into_csr()
    }

    /// Keeps rows/columns whose map entry is `Some(new_index)`.
    pub fn restrict(&self, rows: &[Option<usize>], nrows: usize, cols: &[Option<usize>], ncols: usize) -> CsrMatrix {
        let mut t = TripletList::with_capacity(nrows, ncols, self.nnz());
        for (i, j, v) in self.triplets() {
            if let (Some(r), Some(c)) = (rows[i], cols[j]) {
                t.push(r, c, v);
            }
        }
        t.into_csr()
    }

    /// `max |A_ij + A_ji|`
    pub fn skew_defect(&self) -> f64 {
        let t = self.transpose();
        CsrMatrix::linear_combination(&[(1.0, self), (1.0, &t)]).max_abs()
    }

    /// `max |A_ij - A_ji|`
    pub fn symmetry_defect(&self) -> f64 {
        let t = self.transpose();
        CsrMatrix::linear_combination(&[(1.0, self), (-1.0, &t)]).max_abs()
    }
}
