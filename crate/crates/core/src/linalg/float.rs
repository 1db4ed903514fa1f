//! Float linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Mat, Ring};

pub fn to_na(m: &Mat<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)])
}

pub fn from_na(m: &DMatrix<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

/// Singular values (descending) and the full set of right singular vectors
/// as columns of a `cols × cols` matrix, in matching order.
pub fn svd_full(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v = DMatrix::from_fn(cols, order.len(), |r, c| v_t[(order[c], r)].conj());
    (sv, v)
}

/// Orthonormal null-space basis; singular values at most
/// `rel_tol · max(1, σ_max)` count as zero.
pub fn nullspace(m: &Mat<Complex64>, rel_tol: f64) -> Mat<Complex64> {
    let cols = m.cols();
    if m.rows() == 0 {
        return Mat::identity(cols);
    }
    let (sv, v) = svd_full(&to_na(m));
    let smax = sv.first().copied().unwrap_or(0.0);
    let thresh = rel_tol * smax.max(1.0);
    let rank = sv.iter().filter(|&&s| s > thresh).count();
    let picked: Vec<usize> = (rank..cols).collect();
    Mat::from_fn(cols, picked.len(), |r, c| v[(r, picked[c])])
}

/// The `k` right singular vectors with the smallest singular values, and
/// the largest of those `k` singular values.
pub fn smallest_singular_vectors(m: &Mat<Complex64>, k: usize) -> (Mat<Complex64>, f64) {
    let cols = m.cols();
    let (sv, v) = svd_full(&to_na(m));
    let start = cols - k;
    let worst = if k == 0 { 0.0 } else { sv[start] };
    (Mat::from_fn(cols, k, |r, c| v[(r, start + c)]), worst)
}

pub fn singular_values(m: &Mat<Complex64>) -> Vec<f64> {
    svd_full(&to_na(m)).0
}

pub fn eigenvalues(m: &Mat<Complex64>) -> Vec<Complex64> {
    if m.rows() == 0 {
        return Vec::new();
    }
    let schur = nalgebra::linalg::Schur::new(to_na(m));
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Orthonormal basis of the column span (numerical rank at `rel_tol`).
pub fn orthonormalize(m: &Mat<Complex64>, rel_tol: f64) -> Mat<Complex64> {
    if m.cols() == 0 {
        return m.clone();
    }
    let na = to_na(m);
    let svd = na.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rel_tol * smax.max(1e-300))
        .collect();
    Mat::from_fn(m.rows(), keep.len(), |r, c| u[(r, keep[c])])
}

pub fn conj_transpose(m: &Mat<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(m.cols(), m.rows(), |r, c| m[(c, r)].conj())
}

pub fn inverse(m: &Mat<Complex64>) -> Option<Mat<Complex64>> {
    to_na(m).try_inverse().map(|i| from_na(&i))
}

pub fn determinant(m: &Mat<Complex64>) -> Complex64 {
    to_na(m).determinant()
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
pub fn expm(m: &Mat<Complex64>) -> Mat<Complex64> {
    let n = m.rows();
    let a = to_na(m);
    let norm = a.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let s = if norm > 0.25 { (norm / 0.25).log2().ceil() as i32 } else { 0 };
    let scaled = &a * Complex64::new(0.5f64.powi(s), 0.0);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &scaled * Complex64::new(1.0 / k as f64, 0.0);
        sum += &term;
        if term.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    from_na(&sum)
}

/// Numerical rank of a real matrix, tolerance relative to `σ_max`.
pub fn real_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Orthonormal basis of the real null space as columns.
pub fn real_nullspace(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= rel_tol * smax.max(1e-300))
        .collect();
    DMatrix::from_fn(cols, null.len(), |r, c| v_t[(null[c], r)])
}

pub fn dvec(v: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(v)
}

pub fn zero_like(rows: usize, cols: usize) -> Mat<Complex64> {
    Mat::from_fn(rows, cols, |_, _| Complex64::zero())
}
