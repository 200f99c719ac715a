//! Small dense linear-algebra helpers: power iteration for the largest
//! eigenvalue of a Gram matrix, and a Cholesky factorization used for
//! Gaussian sampling and block-covariance solves.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{DecsvmError, Result};

/// Largest eigenvalue of `X^T X / n` by power iteration on `v ↦ X^T(Xv)/n`.
///
/// Returns `None` if the relative change has not fallen below `tol` within
/// `max_iter` steps.
pub fn lambda_max_gram(x: ArrayView2<'_, f64>, max_iter: usize, tol: f64) -> Option<f64> {
    let n = x.nrows() as f64;
    let p = x.ncols();
    if p == 0 || x.nrows() == 0 {
        return Some(0.0);
    }
    // deterministic, non-degenerate start
    let mut v = Array1::from_shape_fn(p, |j| 1.0 + (j as f64 % 7.0) * 0.1);
    let norm = v.dot(&v).sqrt();
    v /= norm;
    let mut lambda = 0.0_f64;
    for _ in 0..max_iter {
        let xv = x.dot(&v);
        let mut w = x.t().dot(&xv);
        w /= n;
        let new_lambda = v.dot(&w);
        let wn = w.dot(&w).sqrt();
        if wn == 0.0 {
            return Some(0.0);
        }
        w /= wn;
        let converged = (new_lambda - lambda).abs() <= tol * new_lambda.abs().max(1e-300);
        lambda = new_lambda;
        v = w;
        if converged {
            return Some(lambda);
        }
    }
    None
}

/// Trace of `X^T X / n`, an upper bound on its largest eigenvalue. Fallback
/// when power iteration does not converge.
pub fn trace_gram(x: ArrayView2<'_, f64>) -> f64 {
    let n = x.nrows() as f64;
    x.iter().map(|v| v * v).sum::<f64>() / n
}

/// Largest eigenvalue of a symmetric matrix by power iteration (assumes the
/// dominant eigenvalue is nonnegative, true for the PSD matrices used here).
pub fn lambda_max_sym(a: ArrayView2<'_, f64>, max_iter: usize, tol: f64) -> Option<f64> {
    let p = a.ncols();
    let mut v = Array1::from_shape_fn(p, |j| 1.0 + (j as f64 % 5.0) * 0.2);
    let norm = v.dot(&v).sqrt();
    v /= norm;
    let mut lambda = 0.0_f64;
    for _ in 0..max_iter {
        let mut w = a.dot(&v);
        let new_lambda = v.dot(&w);
        let wn = w.dot(&w).sqrt();
        if wn == 0.0 {
            return Some(0.0);
        }
        w /= wn;
        let converged = (new_lambda - lambda).abs() <= tol * new_lambda.abs().max(1e-300);
        lambda = new_lambda;
        v = w;
        if converged {
            return Some(lambda);
        }
    }
    None
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let p = a.nrows();
    if a.ncols() != p {
        return Err(DecsvmError::ShapeMismatch("cholesky needs a square matrix".into()));
    }
    let mut l = Array2::<f64>::zeros((p, p));
    for i in 0..p {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(DecsvmError::Numerical(format!(
                        "cholesky pivot {sum} <= 0 at index {i}"
                    )));
                }
                l[[i, i]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Solve `A x = b` given the lower Cholesky factor `L` of `A`.
pub fn chol_solve(l: ArrayView2<'_, f64>, b: &Array1<f64>) -> Array1<f64> {
    let p = l.nrows();
    let mut y = Array1::<f64>::zeros(p);
    for i in 0..p {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[[i, k]] * y[k];
        }
        y[i] = sum / l[[i, i]];
    }
    let mut x = Array1::<f64>::zeros(p);
    for i in (0..p).rev() {
        let mut sum = y[i];
        for k in i + 1..p {
            sum -= l[[k, i]] * x[k];
        }
        x[i] = sum / l[[i, i]];
    }
    x
}
