//! Small dense/sparse linear algebra helpers shared by the assembly and
//! solver modules: a CSR matrix and a restarted, preconditioned GMRES.

use crate::error::{Error, Result};
use crate::scalar::{real, Float};
use nalgebra::DVector;

/// Compressed sparse row matrix with deterministic assembly order.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Float> CsrMatrix<T> {
    /// Builds a CSR matrix from (row, col, value) triplets. Duplicate entries
    /// are summed in ascending (row, col) order, so the result does not depend
    /// on the order in which triplets were produced.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, T)>,
    ) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, T)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r < nrows && c < ncols);
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(merged.len());
        let mut values = Vec::with_capacity(merged.len());
        for (r, c, v) in merged {
            col_idx.push(c);
            values.push(v);
            row_ptr[r + 1] = col_idx.len();
        }
        // rows with no entries inherit the previous pointer
        for r in 1..=nrows {
            if row_ptr[r] < row_ptr[r - 1] {
                row_ptr[r] = row_ptr[r - 1];
            }
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
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

    /// Row access as (column indices, values) slices.
    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => T::ZERO,
        }
    }

    pub fn mul_vec(&self, x: &DVector<T>) -> DVector<T> {
        debug_assert_eq!(x.len(), self.ncols);
        let mut y = DVector::zeros(self.nrows);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = T::ZERO;
            for (c, v) in cols.iter().zip(vals.iter()) {
                acc += *v * x[*c];
            }
            y[r] = acc;
        }
        y
    }

    /// Dense copy, used to factor small systems.
    pub fn to_dense(&self) -> nalgebra::DMatrix<T> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals.iter()) {
                m[(r, *c)] = *v;
            }
        }
        m
    }

    /// Maximum absolute asymmetry |A - A^T| over all stored entries.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::ZERO;
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals.iter()) {
                let diff = (*v - self.get(*c, r)).abs();
                if diff > worst {
                    worst = diff;
                }
            }
        }
        worst
    }
}

/// Parameters for [`gmres`].
#[derive(Debug, Clone, Copy)]
pub struct GmresParams<T> {
    pub restart: usize,
    pub rel_tol: T,
    pub max_iterations: usize,
}

impl<T: Float> Default for GmresParams<T> {
    fn default() -> Self {
        Self {
            restart: 100,
            rel_tol: real(1e-10),
            max_iterations: 2000,
        }
    }
}

/// Outcome of a converged GMRES solve.
#[derive(Debug, Clone)]
pub struct GmresSolve<T> {
    pub solution: DVector<T>,
    pub iterations: usize,
    pub residual: T,
}

/// Restarted GMRES with left preconditioning for a matrix-free operator.
///
/// `apply` computes `A x`; `precond` applies an approximate inverse of `A`.
/// Convergence is declared when the preconditioned residual drops below
/// `rel_tol` times the preconditioned right-hand-side norm.
pub fn gmres<T, A, P>(
    apply: A,
    precond: P,
    b: &DVector<T>,
    x0: Option<DVector<T>>,
    params: &GmresParams<T>,
    context: &'static str,
) -> Result<GmresSolve<T>>
where
    T: Float,
    A: Fn(&DVector<T>) -> DVector<T>,
    P: Fn(&DVector<T>) -> DVector<T>,
{
    let n = b.len();
    let mut x = x0.unwrap_or_else(|| DVector::zeros(n));
    let b_norm = precond(b).norm();
    if b_norm == T::ZERO {
        return Ok(GmresSolve {
            solution: DVector::zeros(n),
            iterations: 0,
            residual: T::ZERO,
        });
    }
    let m = params.restart.max(1).min(n.max(1));
    let mut total_iters = 0usize;
    let mut last_residual = T::ZERO;

    while total_iters < params.max_iterations {
        let r = precond(&(b - apply(&x)));
        let beta = r.norm();
        last_residual = beta / b_norm;
        if last_residual <= params.rel_tol {
            return Ok(GmresSolve {
                solution: x,
                iterations: total_iters,
                residual: last_residual,
            });
        }

        // Arnoldi with Givens rotations
        let mut basis: Vec<DVector<T>> = vec![&r / beta];
        let mut h = vec![vec![T::ZERO; 0]; 0]; // h[j] has j+2 entries
        let mut cs: Vec<T> = Vec::new();
        let mut sn: Vec<T> = Vec::new();
        let mut g = vec![T::ZERO; m + 1];
        g[0] = beta;
        let mut inner = 0usize;

        for j in 0..m {
            if total_iters >= params.max_iterations {
                break;
            }
            total_iters += 1;
            let mut w = precond(&apply(&basis[j]));
            let mut hj = vec![T::ZERO; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = w.dot(v);
                hj[i] = hij;
                w.axpy(-hij, v, T::ONE);
            }
            let h_next = w.norm();
            hj[j + 1] = h_next;

            // apply existing rotations to the new column
            for i in 0..j {
                let t = cs[i] * hj[i] + sn[i] * hj[i + 1];
                hj[i + 1] = -sn[i] * hj[i] + cs[i] * hj[i + 1];
                hj[i] = t;
            }
            let denom = (hj[j] * hj[j] + hj[j + 1] * hj[j + 1]).sqrt();
            let (c, s) = if denom == T::ZERO {
                (T::ONE, T::ZERO)
            } else {
                (hj[j] / denom, hj[j + 1] / denom)
            };
            cs.push(c);
            sn.push(s);
            hj[j] = c * hj[j] + s * hj[j + 1];
            hj[j + 1] = T::ZERO;
            g[j + 1] = -s * g[j];
            g[j] *= c;
            h.push(hj);
            inner = j + 1;

            let lucky = h_next <= T::eps() * beta;
            if !lucky {
                basis.push(&w / h_next);
            }
            last_residual = g[j + 1].abs() / b_norm;
            if last_residual <= params.rel_tol || lucky {
                break;
            }
        }

        // back substitution for the least-squares coefficients
        let mut y = vec![T::ZERO; inner];
        for i in (0..inner).rev() {
            let mut sum = g[i];
            for k in (i + 1)..inner {
                sum -= h[k][i] * y[k];
            }
            y[i] = sum / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            x.axpy(*yi, &basis[i], T::ONE);
        }

        let r = precond(&(b - apply(&x)));
        last_residual = r.norm() / b_norm;
        if last_residual <= params.rel_tol {
            return Ok(GmresSolve {
                solution: x,
                iterations: total_iters,
                residual: last_residual,
            });
        }
    }

    Err(Error::SolverDiverged {
        context,
        iterations: total_iters,
        residual: last_residual.to_f64().unwrap_or(f64::NAN),
    })
}

/// Identity preconditioner.
pub fn no_precond<T: Float>(v: &DVector<T>) -> DVector<T> {
    v.clone()
}

/// Jacobi (diagonal) preconditioner built from a diagonal vector.
pub fn jacobi_precond<T: Float>(diag: &DVector<T>) -> impl Fn(&DVector<T>) -> DVector<T> + '_ {
    move |v: &DVector<T>| {
        let mut out = v.clone();
        for i in 0..out.len() {
            let d = diag[i];
            if d.abs() > T::ZERO {
                out[i] /= d;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    #[test]
    fn csr_accumulates_duplicates_deterministically() {
        let t1 = vec![(0, 1, 1.0), (1, 0, 2.0), (0, 1, 0.5), (2, 2, -1.0)];
        let t2 = vec![(2, 2, -1.0), (0, 1, 0.5), (0, 1, 1.0), (1, 0, 2.0)];
        let a = CsrMatrix::from_triplets(3, 3, t1);
        let b = CsrMatrix::from_triplets(3, 3, t2);
        assert_eq!(a, b);
        assert_eq!(a.get(0, 1), 1.5);
        assert_eq!(a.nnz(), 3);
    }

    #[test]
    fn csr_matvec_matches_dense() {
        let triplets = vec![(0, 0, 2.0), (0, 2, 1.0), (1, 1, 3.0), (2, 0, -1.0)];
        let a = CsrMatrix::from_triplets(3, 3, triplets);
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let y = a.mul_vec(&x);
        let yd = a.to_dense() * &x;
        assert_relative_eq!((y - yd).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn gmres_solves_unsymmetric_system() {
        let n = 40;
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = 4.0 + 0.1 * i as f64;
            if i + 1 < n {
                a[(i, i + 1)] = -1.3;
                a[(i + 1, i)] = -0.7;
            }
        }
        let x_true = DVector::from_fn(n, |i, _| (i as f64 * 0.37).sin());
        let b = &a * &x_true;
        let diag = a.diagonal();
        let solve = gmres(
            |v| &a * v,
            jacobi_precond(&diag),
            &b,
            None,
            &GmresParams::default(),
            "test",
        )
        .unwrap();
        assert_relative_eq!((solve.solution - x_true).norm(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn gmres_restart_path() {
        let n = 30;
        let mut a = DMatrix::<f64>::identity(n, n) * 2.0;
        for i in 0..n - 1 {
            a[(i, i + 1)] = 1.0;
        }
        let b = DVector::from_element(n, 1.0);
        let params = GmresParams {
            restart: 5,
            rel_tol: 1e-12,
            max_iterations: 500,
        };
        let solve = gmres(|v| &a * v, no_precond, &b, None, &params, "test").unwrap();
        assert_relative_eq!((&a * solve.solution - b).norm(), 0.0, epsilon = 1e-10);
    }
}
