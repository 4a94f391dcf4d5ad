//! Small dense helpers: numerical rank and null vectors by SVD.

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::Vec4;

/// Numerical rank of the span of `columns`. A singular value counts when it
/// exceeds `tol` times the largest one.
pub(crate) fn rank(columns: &[Vec4], tol: f64) -> usize {
    if columns.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(4, columns.len(), |r, c| columns[c][r]);
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

/// Unit vector orthogonal to the span of `columns` (assumed of rank 3).
pub(crate) fn orthogonal_complement(columns: &[Vec4; 3]) -> Vec4 {
    let m = DMatrix::from_fn(4, 4, |r, c| if c < 3 { columns[c][r] } else { 0.0 });
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("four singular values");
    Vec4::from_iterator(u.column(idx).iter().cloned())
}

/// Right singular vector of the smallest singular value and the singular
/// values sorted in decreasing order.
pub(crate) fn null_vector3(m: &Matrix3<f64>) -> (Vector3<f64>, [f64; 3]) {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = svd.singular_values;
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let null = v_t.row(idx[2]).transpose();
    (null, [sv[idx[0]], sv[idx[1]], sv[idx[2]]])
}
