//! Sparse substochastic matrices and resolvent solves `(I - M) x = b`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest system factored densely; bigger systems use CG on the normal equations.
pub const DENSE_LIMIT: usize = 4096;

/// Spectral radius level at (or above) which a chain counts as recurrent.
pub const TRANSIENCE_THRESHOLD: f64 = 1.0 - 1e-9;

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds an `n x n` matrix from `(row, col, value)` triplets (duplicates are summed).
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut fill = counts;
        let mut cols = vec![0; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            let k = fill[r];
            cols[k] = c;
            vals[k] = v;
            fill[r] += 1;
        }
        let mut m = SparseMatrix { n, row_ptr, cols, vals };
        m.sort_rows();
        m
    }

    fn sort_rows(&mut self) {
        for r in 0..self.n {
            let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut entries: Vec<(usize, f64)> =
                self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied()).collect();
            entries.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
            for (c, v) in entries {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            for (k, (c, v)) in merged.iter().enumerate() {
                self.cols[a + k] = *c;
                self.vals[a + k] = *v;
            }
            // Pad duplicates out with explicit zeros so row_ptr stays valid.
            for k in a + merged.len()..b {
                self.cols[k] = merged.last().map(|e| e.0).unwrap_or(0);
                self.vals[k] = 0.0;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Nonzero entries of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub fn row_sum(&self, r: usize) -> f64 {
        self.row(r).map(|(_, v)| v).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).filter(|e| e.0 == c).map(|e| e.1).sum()
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                triplets.push((c, r, v));
            }
        }
        SparseMatrix::from_triplets(self.n, &triplets)
    }

    /// Principal submatrix on `keep` (in the given order).
    pub fn submatrix(&self, keep: &[usize]) -> SparseMatrix {
        let mut index = vec![usize::MAX; self.n];
        for (i, &s) in keep.iter().enumerate() {
            index[s] = i;
        }
        let mut triplets = Vec::new();
        for (i, &s) in keep.iter().enumerate() {
            for (c, v) in self.row(s) {
                if index[c] != usize::MAX {
                    triplets.push((i, index[c], v));
                }
            }
        }
        SparseMatrix::from_triplets(keep.len(), &triplets)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }
}

/// Estimates the spectral radius of a nonnegative matrix by power iteration.
///
/// Returns `Ok(estimate)` when the radius is below [`TRANSIENCE_THRESHOLD`],
/// otherwise `NotTransient`. The running bound `||M^k 1||^(1/k)` is a certified
/// upper bound; when it is still too loose the converged power-iteration ratio
/// is used instead.
pub fn check_transient(m: &SparseMatrix) -> Result<f64> {
    const MAX_ITER: usize = 200_000;
    const MIN_ITER: usize = 50;
    let n = m.n();
    if n == 0 {
        return Ok(0.0);
    }
    let mut v = vec![1.0; n];
    let mut w = vec![0.0; n];
    let mut log_norm_sum = 0.0;
    let mut prev_ratio = f64::NAN;
    let mut stable = 0usize;
    for k in 1..=MAX_ITER {
        m.mul_vec(&v, &mut w);
        let norm = w.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        if norm == 0.0 {
            return Ok(0.0);
        }
        log_norm_sum += norm.ln();
        let bound = (log_norm_sum / k as f64).exp();
        if bound < TRANSIENCE_THRESHOLD {
            return Ok(norm.min(bound));
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        if (norm - prev_ratio).abs() < 1e-14 {
            stable += 1;
        } else {
            stable = 0;
        }
        prev_ratio = norm;
        if k >= MIN_ITER && stable >= 20 {
            return if norm < TRANSIENCE_THRESHOLD {
                Ok(norm)
            } else {
                Err(Error::NotTransient { radius: norm })
            };
        }
    }
    Err(Error::NotTransient { radius: prev_ratio })
}

type DenseLu = nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>;

enum Backend {
    Dense {
        a: DMatrix<f64>,
        lu: DenseLu,
        lu_t: std::sync::OnceLock<DenseLu>,
    },
    Iterative { a: SparseMatrix, at: SparseMatrix },
}

/// Factored or iterative solver for `(I - M) x = b` and its transpose.
pub struct ResolventSolver {
    n: usize,
    backend: Backend,
}

impl ResolventSolver {
    pub fn new(m: &SparseMatrix) -> Result<Self> {
        let n = m.n();
        let backend = if n <= DENSE_LIMIT {
            let a = DMatrix::identity(n, n) - m.to_dense();
            let lu = a.clone().lu();
            if n > 0 && !lu.is_invertible() {
                return Err(Error::SingularSolve("I - P is singular".into()));
            }
            Backend::Dense { a, lu, lu_t: std::sync::OnceLock::new() }
        } else {
            let mut triplets: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0)).collect();
            for r in 0..n {
                for (c, v) in m.row(r) {
                    triplets.push((r, c, -v));
                }
            }
            let a = SparseMatrix::from_triplets(n, &triplets);
            let at = a.transpose();
            Backend::Iterative { a, at }
        };
        Ok(ResolventSolver { n, backend })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_impl(b, false)
    }

    /// Solves `(I - M)^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_impl(b, true)
    }

    fn solve_impl(&self, b: &[f64], transpose: bool) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: b.len() });
        }
        match &self.backend {
            Backend::Dense { a, lu, lu_t } => {
                let rhs = DVector::from_column_slice(b);
                let lu = if transpose { lu_t.get_or_init(|| a.transpose().lu()) } else { lu };
                let x = lu.solve(&rhs);
                x.map(|x| x.as_slice().to_vec())
                    .ok_or_else(|| Error::SingularSolve("LU solve failed".into()))
            }
            Backend::Iterative { a, at } => {
                if transpose {
                    cg_normal(at, a, b)
                } else {
                    cg_normal(a, at, b)
                }
            }
        }
    }
}

/// Conjugate gradients on `A^T A x = A^T b`.
fn cg_normal(a: &SparseMatrix, at: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let b_norm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let tol = 1e-13 * b_norm;
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    at.mul_vec(&r, &mut z);
    let mut p = z.clone();
    let mut zz = dot(&z, &z);
    let mut ap = vec![0.0; n];
    let max_iter = 20 * n + 1000;
    for _ in 0..max_iter {
        a.mul_vec(&p, &mut ap);
        let denom = dot(&ap, &ap);
        if denom == 0.0 {
            break;
        }
        let alpha = zz / denom;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= tol {
            return Ok(x);
        }
        at.mul_vec(&r, &mut z);
        let zz_new = dot(&z, &z);
        let beta = zz_new / zz;
        zz = zz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    // Accept a slightly looser residual rather than failing outright.
    let mut res = vec![0.0; n];
    a.mul_vec(&x, &mut res);
    let err = res.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    if err < 1e-10 {
        Ok(x)
    } else {
        Err(Error::SingularSolve(format!("CG did not converge (residual {err:e})")))
    }
}
