//! Direct sparse LU solve of the interior block, with the symbolic
//! factorization computed once and reused across nonlinear iterations
//! (the pattern is fixed; only the values change).

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMat};

use crate::sparse::SparseMatrix;

#[derive(Debug, thiserror::Error)]
pub enum LinSolveError {
    #[error("sparse LU factorization failed: {0}")]
    Factorization(String),
    #[error("linear solve produced non-finite values")]
    NonFinite,
    #[error("solve called before factor")]
    NotFactorized,
}

/// LU solver for the M x M interior block of matrices sharing one sparsity
/// pattern.
///
/// The factorization is reused across value updates as long as iterative
/// refinement against the current values still contracts; once the values
/// have drifted too far, the matrix is refactorized. In the nonlinear
/// iteration the stabilization matrix changes less and less, so most
/// iterations get away with two triangular solves plus a few matrix-vector
/// products.
pub struct InteriorSolver {
    m: usize,
    csc: SymbolicSparseColMat<usize>,
    /// Maps each stored CSR entry (in storage order) to its slot in the CSC
    /// value buffer; None for entries touching boundary rows or columns.
    scatter: Vec<Option<usize>>,
    values: Vec<f64>,
    symbolic_lu: SymbolicLu<usize>,
    lu: Option<Lu<usize, f64>>,
}

impl InteriorSolver {
    pub fn new(pattern: &SparseMatrix, m: usize) -> Result<Self, LinSolveError> {
        // The pattern is structurally symmetric, so column j of the interior
        // block holds exactly the interior entries of row j, which are
        // already sorted.
        let mut col_ptr = Vec::with_capacity(m + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0usize);
        for j in 0..m {
            let (cols, _) = pattern.row(j);
            for &i in cols {
                if i < m {
                    row_idx.push(i);
                }
            }
            col_ptr.push(row_idx.len());
        }
        let csc = SymbolicSparseColMat::new_checked(m, m, col_ptr, None, row_idx);

        // Position of (i, j) inside column j, found once by binary search.
        let mut scatter = Vec::with_capacity(pattern.nnz());
        for i in 0..pattern.order() {
            let (cols, _) = pattern.row(i);
            for &j in cols {
                if i < m && j < m {
                    let col = csc.as_ref().row_idx_of_col_raw(j);
                    let off = col.binary_search(&i).expect("symmetric pattern");
                    scatter.push(Some(csc.as_ref().col_range(j).start + off));
                } else {
                    scatter.push(None);
                }
            }
        }
        let nnz = csc.as_ref().row_idx().len();
        let symbolic_lu = SymbolicLu::try_new(csc.as_ref())
            .map_err(|e| LinSolveError::Factorization(format!("{e:?}")))?;
        Ok(Self {
            m,
            csc,
            scatter,
            values: vec![0.0; nnz],
            symbolic_lu,
            lu: None,
        })
    }

    /// Loads the interior block of a + b as the current matrix values. The
    /// factorization itself is refreshed lazily inside [`solve`].
    pub fn factor(&mut self, a: &SparseMatrix, b: &SparseMatrix) -> Result<(), LinSolveError> {
        debug_assert_eq!(a.nnz(), self.scatter.len());
        debug_assert_eq!(b.nnz(), self.scatter.len());
        for (k, slot) in self.scatter.iter().enumerate() {
            if let Some(s) = *slot {
                self.values[s] = a.values()[k] + b.values()[k];
            }
        }
        Ok(())
    }

    fn refactorize(&mut self) -> Result<(), LinSolveError> {
        let mat = SparseColMatRef::new(self.csc.as_ref(), &self.values);
        let lu = Lu::try_new_with_symbolic(self.symbolic_lu.clone(), mat)
            .map_err(|e| LinSolveError::Factorization(format!("{e:?}")))?;
        self.lu = Some(lu);
        Ok(())
    }

    /// r = rhs - A_interior x with the residual accumulated in twofold
    /// working precision (two-product / two-sum). The transport-dominated
    /// matrices are nearly singular along the oscillatory modes, so plain
    /// f64 residuals would cap the attainable forward accuracy.
    fn residual_compensated(&self, x: &[f64], rhs: &[f64], out: &mut [f64]) {
        let m = self.m;
        let mut hi = vec![0.0f64; m];
        let mut lo = vec![0.0f64; m];
        let csc = self.csc.as_ref();
        for j in 0..m {
            let rows = csc.row_idx_of_col_raw(j);
            let range = csc.col_range(j);
            let xj = x[j];
            for (idx, &i) in range.zip(rows) {
                let v = self.values[idx];
                let p = v * xj;
                let p_err = v.mul_add(xj, -p);
                let s = hi[i] + p;
                let bv = s - hi[i];
                let s_err = (hi[i] - (s - bv)) + (p - bv);
                hi[i] = s;
                lo[i] += s_err + p_err;
            }
        }
        for i in 0..m {
            out[i] = (rhs[i] - hi[i]) - lo[i];
        }
    }

    /// One LU solve plus extra-precise refinement against the current
    /// values. Returns the solution and whether the refinement reached the
    /// requested relative step size.
    fn solve_with_current_lu(&self, rhs: &[f64]) -> Result<(Vec<f64>, bool), LinSolveError> {
        let lu = self.lu.as_ref().ok_or(LinSolveError::NotFactorized)?;
        let b = faer::Mat::<f64>::from_fn(self.m, 1, |i, _| rhs[i]);
        let sol = lu.solve(&b);
        let mut x: Vec<f64> = (0..self.m).map(|i| sol[(i, 0)]).collect();
        let mut residual = vec![0.0; self.m];
        let mut tight = false;
        for _ in 0..5 {
            self.residual_compensated(&x, rhs, &mut residual);
            let rb = faer::Mat::<f64>::from_fn(self.m, 1, |i, _| residual[i]);
            let dx = lu.solve(&rb);
            let mut step = 0.0f64;
            let mut scale = 0.0f64;
            for (i, xi) in x.iter_mut().enumerate() {
                step = step.max(dx[(i, 0)].abs());
                scale = scale.max(xi.abs());
                *xi += dx[(i, 0)];
            }
            if step <= 1e-14 * scale.max(1e-300) {
                tight = true;
                break;
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Ok((x, false));
        }
        Ok((x, tight))
    }

    /// Solves for the interior unknowns. If refinement with the stale
    /// factorization does not contract, the matrix is refactorized from the
    /// current values and solved again.
    pub fn solve(&mut self, rhs: &[f64]) -> Result<Vec<f64>, LinSolveError> {
        assert_eq!(rhs.len(), self.m);
        if self.lu.is_some() {
            if let Ok((x, true)) = self.solve_with_current_lu(rhs) {
                return Ok(x);
            }
        }
        self.refactorize()?;
        let (x, _) = self.solve_with_current_lu(rhs)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LinSolveError::NonFinite);
        }
        Ok(x)
    }
}
