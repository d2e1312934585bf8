//! Compressed-row sparse matrices and a thin wrapper over faer's sparse LU.

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{Error, Result};

/// Square CSR matrix with sorted, duplicate-free rows.
#[derive(Clone, Debug, Default)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(n: usize) -> Self {
        SparseMatrix {
            n,
            row_ptr: vec![0; n + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Builds from `(row, col, value)` entries; duplicates are summed.
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out.push((i, j, v));
            }
        }
        out
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.matvec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> Self {
        let t = self.triplets().into_iter().map(|(i, j, v)| (j, i, v)).collect();
        SparseMatrix::from_triplets(self.n, t)
    }

    /// `Σ cᵢ Aᵢ` over matrices of equal dimension.
    pub fn combine(terms: &[(f64, &SparseMatrix)]) -> Self {
        let n = terms.first().map_or(0, |t| t.1.n);
        let mut entries = Vec::new();
        for (c, m) in terms {
            assert_eq!(m.n, n, "dimension mismatch");
            if *c == 0.0 {
                continue;
            }
            for (i, j, v) in m.triplets() {
                entries.push((i, j, c * v));
            }
        }
        SparseMatrix::from_triplets(n, entries)
    }

    /// Principal submatrix on `index` (local numbering follows `index`).
    pub fn restrict(&self, index: &[usize]) -> Self {
        let mut local = vec![usize::MAX; self.n];
        for (k, &g) in index.iter().enumerate() {
            local[g] = k;
        }
        let mut entries = Vec::new();
        for (k, &g) in index.iter().enumerate() {
            for (j, v) in self.row(g) {
                if local[j] != usize::MAX {
                    entries.push((k, local[j], v));
                }
            }
        }
        SparseMatrix::from_triplets(index.len(), entries)
    }

    /// Block `A[rows, cols]` as a row-major list of `(local_row, local_col, value)`.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Vec<(usize, usize, f64)> {
        let mut local = vec![usize::MAX; self.n];
        for (k, &g) in cols.iter().enumerate() {
            local[g] = k;
        }
        let mut out = Vec::new();
        for (k, &g) in rows.iter().enumerate() {
            for (j, v) in self.row(g) {
                if local[j] != usize::MAX {
                    out.push((k, local[j], v));
                }
            }
        }
        out
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.vals.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
        self.triplets()
            .into_iter()
            .all(|(i, j, v)| (v - self.get(j, i)).abs() <= tol * scale)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

/// Sparse LU factorization of a square matrix.
pub struct Factorization {
    n: usize,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization").field("n", &self.n).finish()
    }
}

impl Factorization {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        Self::from_entries(a.n, &a.triplets())
    }

    pub fn from_entries(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let t: Vec<Triplet<usize, usize, f64>> =
            entries.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &t)
            .map_err(|e| Error::Solver(format!("matrix construction: {e:?}")))?;
        let lu = mat
            .sp_lu()
            .map_err(|e| Error::Solver(format!("factorization: {e:?}")))?;
        Ok(Factorization { n, lu })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut b = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.lu.solve_in_place(b.as_mut());
        (0..self.n).map(|i| b[(i, 0)]).collect()
    }

    /// Solves for several right-hand sides at once.
    pub fn solve_many(&self, rhs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        if rhs.is_empty() {
            return Vec::new();
        }
        let mut b = Mat::<f64>::from_fn(self.n, rhs.len(), |i, j| rhs[j][i]);
        self.lu.solve_in_place(b.as_mut());
        (0..rhs.len())
            .map(|j| (0..self.n).map(|i| b[(i, j)]).collect())
            .collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_and_solve() {
        let a = SparseMatrix::from_triplets(
            3,
            vec![(0, 0, 2.0), (0, 0, 2.0), (1, 1, 3.0), (2, 2, 1.0), (0, 2, 1.0), (2, 0, 1.0)],
        );
        assert_eq!(a.get(0, 0), 4.0);
        let f = Factorization::new(&a).unwrap();
        let x = f.solve(&[5.0, 3.0, 2.0]);
        let r = a.matvec(&x);
        for (ri, bi) in r.iter().zip([5.0, 3.0, 2.0]) {
            assert!((ri - bi).abs() < 1e-14);
        }
    }

    #[test]
    fn restrict_and_transpose() {
        let a = SparseMatrix::from_triplets(3, vec![(0, 1, 1.0), (1, 2, 2.0), (2, 2, 3.0)]);
        let t = a.transpose();
        assert_eq!(t.get(1, 0), 1.0);
        let r = a.restrict(&[1, 2]);
        assert_eq!(r.get(0, 1), 2.0);
        assert_eq!(r.get(1, 1), 3.0);
    }
}
