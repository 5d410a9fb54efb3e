//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value threshold for rank decisions.
pub const RANK_RTOL: f64 = 1e-12;

fn rank_cutoff(singular_values: &DVector<f64>) -> f64 {
    let max = singular_values.iter().cloned().fold(0.0_f64, f64::max);
    RANK_RTOL * max
}

/// Thin SVD `(U, σ, Vᵀ)`, singular values in non-increasing order. The
/// factorization runs in faer: nalgebra's solver returns inaccurate factors
/// for some incidence-type matrices.
fn svd(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let (rows, cols) = a.shape();
    let m = faer::Mat::<f64>::from_fn(rows, cols, |i, j| a[(i, j)]);
    let d = m.thin_svd().expect("SVD converges for finite input");
    let (u, s, v) = (d.U(), d.S().column_vector(), d.V());
    let k = s.nrows();
    (
        DMatrix::from_fn(rows, k, |i, j| u[(i, j)]),
        DVector::from_fn(k, |i, _| s[i]),
        DMatrix::from_fn(k, cols, |i, j| v[(j, i)]),
    )
}

/// Orthonormal basis of the column space of `a`, one basis vector per column.
pub fn column_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let (u, sv, _) = svd(a);
    let cutoff = rank_cutoff(&sv);
    let keep: Vec<usize> = sv.iter().enumerate().filter(|(_, &s)| s > cutoff && s > 0.0).map(|(i, _)| i).collect();
    let mut basis = DMatrix::zeros(a.nrows(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        basis.set_column(dst, &u.column(src));
    }
    basis
}

/// Numerical rank with the [`RANK_RTOL`] threshold.
pub fn rank(a: &DMatrix<f64>) -> usize {
    column_basis(a).ncols()
}

/// Moore–Penrose pseudo-inverse via SVD, thresholded at [`RANK_RTOL`].
pub fn pseudo_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let (u, sv, v_t) = svd(a);
    let cutoff = rank_cutoff(&sv);
    let mut out = DMatrix::zeros(cols, rows);
    for (i, &s) in sv.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            // out += v_i u_iᵀ / s
            out += (v_t.row(i).transpose() * u.column(i).transpose()) / s;
        }
    }
    out
}

pub fn is_symmetric(a: &DMatrix<f64>, tol: f64) -> bool {
    a.is_square()
        && (0..a.nrows()).all(|i| (0..i).all(|j| (a[(i, j)] - a[(j, i)]).abs() <= tol))
}

/// Spectral radius by full eigen-decomposition. Symmetric inputs use the
/// symmetric solver; anything else goes through the real Schur form.
pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    assert!(a.is_square(), "spectral radius of a non-square matrix");
    if a.nrows() == 0 {
        return 0.0;
    }
    if is_symmetric(a, 1e-14) {
        a.clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    } else {
        a.complex_eigenvalues()
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.norm()))
    }
}

/// Columns of `a` stacked next to the columns of `b`.
pub fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Rows of `a` above the rows of `b`.
pub fn vstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.ncols());
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

pub fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
