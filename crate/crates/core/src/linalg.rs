//! Small dense factorizations: Cholesky for the normal equations and the
//! planted Gram construction, Gram–Schmidt for orthonormal bases.

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, Matrix};
use alloc::vec::Vec;

/// Lower-triangular `L` with `a = L·Lᵀ`.
///
/// A pivot is treated as vanished when it is not above `min_pivot`; pass
/// `0.0` to reject only non-positive pivots.
pub fn cholesky(a: &Matrix, min_pivot: f64) -> Result<Matrix> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Dimension {
            context: "cholesky (square matrix)",
            expected: n,
            actual: a.cols(),
        });
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let d = a[(j, j)] - dot(&l.row(j)[..j], &l.row(j)[..j]);
        if !(d > min_pivot) {
            return Err(Error::Singular { pivot: j });
        }
        let d = libm::sqrt(d);
        l[(j, j)] = d;
        for i in j + 1..n {
            let s = a[(i, j)] - dot(&l.row(i)[..j], &l.row(j)[..j]);
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `L·Lᵀ·X = rhs` for every column of `rhs`.
pub fn cholesky_solve(l: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    let n = l.rows();
    if rhs.rows() != n {
        return Err(Error::Dimension {
            context: "cholesky solve",
            expected: n,
            actual: rhs.rows(),
        });
    }
    let k = rhs.cols();
    // Forward: L·Y = rhs, row by row so whole right-hand sides move together.
    let mut y = rhs.clone();
    for i in 0..n {
        for j in 0..i {
            let lij = l[(i, j)];
            if lij != 0.0 {
                let (done, rest) = y.as_mut_slice().split_at_mut(i * k);
                axpy(&mut rest[..k], -lij, &done[j * k..(j + 1) * k]);
            }
        }
        let d = l[(i, i)];
        y.row_mut(i).iter_mut().for_each(|v| *v /= d);
    }
    // Backward: Lᵀ·X = Y.
    let mut x = y;
    for i in (0..n).rev() {
        for j in i + 1..n {
            let lji = l[(j, i)];
            if lji != 0.0 {
                let (head, tail) = x.as_mut_slice().split_at_mut(j * k);
                axpy(&mut head[i * k..(i + 1) * k], -lji, &tail[..k]);
            }
        }
        let d = l[(i, i)];
        x.row_mut(i).iter_mut().for_each(|v| *v /= d);
    }
    Ok(x)
}

/// Orthonormal basis of the column space of a full-column-rank `a`, the `Q`
/// of a thin QR factorization.
///
/// Modified Gram–Schmidt with one reorthogonalization pass, which keeps
/// `QᵀQ = I` to working precision.
pub fn orthonormalize_columns(a: &Matrix) -> Result<Matrix> {
    let mut cols = a.columns();
    for j in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(j);
        let v = &mut rest[0];
        let scale = libm::sqrt(dot(v, v));
        for _ in 0..2 {
            for q in done.iter() {
                let r = dot(q, v);
                axpy(v, -r, q);
            }
        }
        let norm = libm::sqrt(dot(v, v));
        if !(norm > 1e-10 * scale) || norm == 0.0 {
            return Err(Error::Singular { pivot: j });
        }
        v.iter_mut().for_each(|x| *x /= norm);
    }
    Matrix::from_columns(&cols)
}

/// Eigendecomposition of a symmetric `a`: eigenvalues and the orthogonal
/// matrix whose columns are the matching eigenvectors.
pub fn symmetric_eigen(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Dimension {
            context: "symmetric eigendecomposition (square matrix)",
            expected: n,
            actual: a.cols(),
        });
    }
    let eig = nalgebra::DMatrix::from_row_slice(n, n, a.as_slice()).symmetric_eigen();
    let vectors = Matrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, j)]);
    Ok((eig.eigenvalues.iter().copied().collect(), vectors))
}
