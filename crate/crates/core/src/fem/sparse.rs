use std::collections::BTreeSet;

/// Compressed-row sparsity pattern containing exactly the node pairs that
/// share a triangle (including the diagonal).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SparsityPattern {
    pub fn from_triangles(num_nodes: usize, triangles: &[[usize; 3]]) -> Self {
        let mut rows = vec![BTreeSet::new(); num_nodes];
        for t in triangles {
            for &a in t {
                for &b in t {
                    rows[a].insert(b);
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(num_nodes + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for row in rows {
            col_idx.extend(row);
            row_ptr.push(col_idx.len());
        }
        Self { row_ptr, col_idx }
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn num_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    /// Position of `(row, col)` in the value array.
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let start = self.row_ptr[row];
        let cols = &self.col_idx[start..self.row_ptr[row + 1]];
        cols.binary_search(&col).ok().map(|k| start + k)
    }
}

/// Square sparse matrix in CSR layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseOperator {
    /// Zero matrix on `pattern`.
    pub fn zeros(pattern: &SparsityPattern, symmetric: bool) -> Self {
        Self {
            row_ptr: pattern.row_ptr.clone(),
            col_idx: pattern.col_idx.clone(),
            values: vec![0.0; pattern.nnz()],
            symmetric,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
            symmetric: true,
        }
    }

    /// Builds a matrix from a dense row-major array, dropping exact zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for row in rows {
            assert_eq!(row.len(), n, "matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let symmetric = (0..n).all(|i| (0..n).all(|j| rows[i][j] == rows[j][i]));
        Self {
            row_ptr,
            col_idx,
            values,
            symmetric,
        }
    }

    pub(crate) fn from_raw(
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
        symmetric: bool,
    ) -> Self {
        debug_assert_eq!(*row_ptr.last().unwrap(), col_idx.len());
        debug_assert_eq!(col_idx.len(), values.len());
        Self {
            row_ptr,
            col_idx,
            values,
            symmetric,
        }
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
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

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let start = self.row_ptr[row];
        let cols = &self.col_idx[start..self.row_ptr[row + 1]];
        match cols.binary_search(&col) {
            Ok(k) => self.values[start + k],
            Err(_) => 0.0,
        }
    }

    /// Adds `value` to an entry that must already be in the pattern.
    pub(crate) fn add(&mut self, row: usize, col: usize, value: f64) {
        let start = self.row_ptr[row];
        let cols = &self.col_idx[start..self.row_ptr[row + 1]];
        let k = cols
            .binary_search(&col)
            .expect("entry outside sparsity pattern");
        self.values[start + k] += value;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        for (i, yi) in y.iter_mut().enumerate() {
            let range = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.col_idx[range.clone()]
                .iter()
                .zip(&self.values[range])
                .map(|(&j, &a)| a * x[j])
                .sum();
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    /// `self += other` for matrices sharing the same pattern.
    pub fn add_assign_same_pattern(&mut self, other: &SparseOperator) {
        assert_eq!(self.row_ptr, other.row_ptr);
        assert_eq!(self.col_idx, other.col_idx);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        self.symmetric &= other.symmetric;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_of_two_triangles() {
        let p = SparsityPattern::from_triangles(4, &[[0, 1, 2], [0, 2, 3]]);
        assert_eq!(p.nnz(), 14);
        assert!(p.position(1, 3).is_none());
        assert!(p.position(0, 3).is_some());
    }

    #[test]
    fn dense_roundtrip_and_product() {
        let a = SparseOperator::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!(a.is_symmetric());
        assert_eq!(a.mul_vec(&[1.0, 1.0]), vec![3.0, 3.0]);
        assert_eq!(a.get(0, 1), 1.0);
    }
}
