//! Row-compressed square matrices over the mesh nodes.
//!
//! The sparsity pattern is the finite element one: row i stores exactly the
//! columns S_i plus the diagonal, so the pattern is structurally symmetric
//! and every limiter can read a_ij and a_ji for each stored pair.

use std::fmt::Write as _;

use crate::mesh::Adjacency;

#[derive(Debug, Clone)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Zero matrix with the pattern {(i, j) : j in S_i or j = i}.
    pub fn from_adjacency(adj: &Adjacency) -> Self {
        let n = adj.neighbors.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            let mut cols: Vec<usize> = adj.neighbors[i].clone();
            cols.push(i);
            cols.sort_unstable();
            col_idx.extend_from_slice(&cols);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        SparseMatrix {
            n,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn same_pattern_zeroed(&self) -> Self {
        SparseMatrix {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: vec![0.0; self.col_idx.len()],
        }
    }

    fn pos(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi].binary_search(&j).ok().map(|k| lo + k)
    }

    /// Storage index of entry (i, j) if present.
    pub fn entry_index(&self, i: usize, j: usize) -> Option<usize> {
        self.pos(i, j)
    }

    /// Storage range of row i.
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    pub fn col_of(&self, k: usize) -> usize {
        self.col_idx[k]
    }

    pub fn value_at(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn set_at(&mut self, k: usize, v: f64) {
        self.values[k] = v;
    }

    /// For each stored entry (i, j), the storage index of (j, i). Well
    /// defined because the pattern is structurally symmetric.
    pub fn transpose_map(&self) -> Vec<usize> {
        let mut map = vec![0usize; self.nnz()];
        for i in 0..self.n {
            for k in self.row_range(i) {
                let j = self.col_idx[k];
                map[k] = self.pos(j, i).expect("pattern is structurally symmetric");
            }
        }
        map
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pos(i, j).map_or(0.0, |p| self.values[p])
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let p = self.pos(i, j).expect("entry outside sparsity pattern");
        self.values[p] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let p = self.pos(i, j).expect("entry outside sparsity pattern");
        self.values[p] += v;
    }

    /// Column indices and values of row i.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn row_mut(&mut self, i: usize) -> (&[usize], &mut [f64]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &mut self.values[lo..hi])
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        let (_, vals) = self.row(i);
        vals.iter().sum()
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
    }

    /// x^T A x.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut row_acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                row_acc += v * x[j];
            }
            acc += x[i] * row_acc;
        }
        acc
    }

    /// Largest absolute off-diagonal entry.
    pub fn max_offdiag_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j != i {
                    m = m.max(v.abs());
                }
            }
        }
        m
    }

    /// Calls f(i, j, a_ij) for every stored entry.
    pub fn for_each(&self, mut f: impl FnMut(usize, usize, f64)) {
        for i in 0..self.n {
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            for p in lo..hi {
                f(i, self.col_idx[p], self.values[p]);
            }
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Matrix-market-style coordinate export for debugging.
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "%%MatrixMarket matrix coordinate real general");
        let _ = writeln!(s, "{} {} {}", self.n, self.n, self.nnz());
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let _ = writeln!(s, "{} {} {:.16e}", i + 1, j + 1, v);
            }
        }
        s
    }
}
