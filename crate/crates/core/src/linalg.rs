//! Small dense linear-algebra helpers shared by the geometric modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Frobenius norm.
pub fn fro(m: &Mat) -> f64 {
    m.norm()
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn sym(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn skew(m: &Mat) -> Mat {
    (m - m.transpose()) * 0.5
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted ascending.
pub fn sorted_eigen(m: &Mat) -> (Vector, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (Vector::zeros(0), Mat::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(sym(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = Mat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Applies `f` to the spectrum of a symmetric matrix.
pub fn sym_fn(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (vals, vecs) = sorted_eigen(m);
    let d = Mat::from_diagonal(&vals.map(f));
    &vecs * d * vecs.transpose()
}

/// Symmetric (Löwdin) inverse square root of an SPD matrix.
pub fn inv_sqrt_spd(m: &Mat) -> Mat {
    sym_fn(m, |v| 1.0 / v.sqrt())
}

pub fn sqrt_spd(m: &Mat) -> Mat {
    sym_fn(m, f64::sqrt)
}

pub fn min_eigenvalue(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    sorted_eigen(m).0[0]
}

pub fn inverse(m: &Mat) -> Option<Mat> {
    if m.nrows() == 0 {
        return Some(Mat::zeros(0, 0));
    }
    m.clone().try_inverse()
}

/// Orthonormal basis (columns) of the null space of `m`.
///
/// Singular values below `tol * max(1, σ_max)` count as zero. The matrix is
/// padded with zero rows so the SVD always returns a full right factor.
pub fn null_space(m: &Mat, tol: f64) -> Mat {
    let cols = m.ncols();
    if cols == 0 {
        return Mat::zeros(0, 0);
    }
    let rows = m.nrows().max(cols);
    let mut padded = Mat::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol * smax.max(1.0);
    let kept: Vec<usize> = (0..cols)
        .filter(|&i| svd.singular_values[i] <= cutoff)
        .collect();
    let mut out = Mat::zeros(cols, kept.len());
    for (j, &i) in kept.iter().enumerate() {
        out.set_column(j, &v_t.row(i).transpose());
    }
    out
}

/// Orthonormal basis of the column space of `m`.
pub fn column_space(m: &Mat, tol: f64) -> Mat {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return Mat::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol * smax.max(1.0);
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cutoff)
        .collect();
    let mut out = Mat::zeros(rows, kept.len());
    for (j, &i) in kept.iter().enumerate() {
        out.set_column(j, &u.column(i));
    }
    out
}

pub fn rank(m: &Mat, tol: f64) -> usize {
    column_space(m, tol).ncols()
}

/// Stacks column vectors into a matrix with `rows` rows.
pub fn hstack(rows: usize, cols: &[Vector]) -> Mat {
    let mut out = Mat::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Concatenates matrices side by side.
pub fn hcat(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((0, a.ncols()), (b.nrows(), b.ncols()))
        .copy_from(b);
    out
}

pub fn block_diag(a: &Mat, b: &Mat) -> Mat {
    let n = a.nrows() + b.nrows();
    let m = a.ncols() + b.ncols();
    let mut out = Mat::zeros(n, m);
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), (b.nrows(), b.ncols()))
        .copy_from(b);
    out
}

/// Row-major nested vectors into a matrix; `None` on ragged input.
pub fn from_rows(rows: &[Vec<f64>]) -> Option<Mat> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return None;
    }
    Some(Mat::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Matrix exponential (Padé, via nalgebra).
pub fn expm(m: &Mat) -> Mat {
    if m.nrows() == 0 {
        return m.clone();
    }
    m.exp()
}
