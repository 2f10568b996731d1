use super::{check_len, SparseError};

/// Coordinate-form construction buffer for a square `n x n` matrix.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TripletList {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl TripletList {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self {
            n,
            entries: Vec::with_capacity(cap),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        self.entries.push((row, col, value));
    }
}

/// Square sparse matrix in compressed-sparse-row layout.
///
/// Column indices are strictly increasing within each row and every stored
/// index is `< n`. Instances are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrixCsr {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrixCsr {
    /// Builds a matrix from raw CSR arrays, validating every structural invariant.
    pub fn from_raw(
        n: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, SparseError> {
        let bad = |msg: String| Err(SparseError::InvalidStructure(msg));
        if row_offsets.len() != n + 1 {
            return bad(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                n + 1
            ));
        }
        if col_indices.len() != values.len() {
            return bad(format!(
                "{} column indices but {} values",
                col_indices.len(),
                values.len()
            ));
        }
        if row_offsets[0] != 0 || row_offsets[n] != values.len() {
            return bad("row_offsets must start at 0 and end at nnz".into());
        }
        for i in 0..n {
            let (start, end) = (row_offsets[i], row_offsets[i + 1]);
            if start > end {
                return bad(format!("row_offsets decreases at row {i}"));
            }
            let cols = &col_indices[start..end];
            if let Some(&c) = cols.iter().find(|&&c| c >= n) {
                return Err(SparseError::IndexOutOfRange { row: i, col: c, n });
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("columns of row {i} are not strictly increasing"));
            }
        }
        Ok(Self {
            n,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from triplets; entries sharing a position are summed.
    pub fn from_triplets(t: &TripletList) -> Result<Self, SparseError> {
        let n = t.n;
        if let Some(&(row, col, _)) = t.entries.iter().find(|&&(r, c, _)| r >= n || c >= n) {
            return Err(SparseError::IndexOutOfRange { row, col, n });
        }

        let mut sorted = t.entries.clone();
        // stable by position; duplicates are then merged in list order
        sorted.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_offsets = vec![0usize; n + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            row_offsets[r + 1] += 1;
            col_indices.push(c);
            values.push(v);
            last = Some((r, c));
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(Self {
            n,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds a matrix from a dense row-major square array, dropping exact zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self, SparseError> {
        let n = rows.len();
        let mut t = TripletList::new(n);
        for (i, row) in rows.iter().enumerate() {
            check_len(n, row.len())?;
            for (k, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    t.push(i, k, v);
                }
            }
        }
        Self::from_triplets(&t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    /// Entry `(i, k)`, zero when not stored.
    pub fn get(&self, i: usize, k: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&k) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    /// Iterates over stored entries as `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&c, &v)| (i, c, v))
        })
    }

    pub fn transpose(&self) -> Self {
        let mut t = TripletList::with_capacity(self.n, self.nnz());
        for (i, k, v) in self.iter() {
            t.push(k, i, v);
        }
        Self::from_triplets(&t).expect("transpose of a valid matrix is valid")
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for (i, k, v) in self.iter() {
            out[i][k] = v;
        }
        out
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, SparseError> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = A x` into a caller-owned buffer.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<(), SparseError> {
        check_len(self.n, x.len())?;
        check_len(self.n, y.len())?;
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            *yi = acc;
        }
        Ok(())
    }
}
