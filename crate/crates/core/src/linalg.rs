//! SVD-backed pseudoinverse solves shared by the AOA and RSS estimators.

use nalgebra::{DMatrix, DVector, Vector3};

/// Singular values below `RANK_TOL * sigma_max` are treated as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Minimum-norm least-squares solution of `a x = b` for a tall matrix with
/// 3 columns, via SVD with relative rank tolerance [`RANK_TOL`]. Returns the
/// solution and the numerical rank.
pub fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> (Vector3<f64>, usize) {
    debug_assert_eq!(a.ncols(), 3);
    debug_assert_eq!(a.nrows(), b.len());
    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if sigma_max == 0.0 || !sigma_max.is_finite() {
        return (Vector3::zeros(), 0);
    }
    let tol = RANK_TOL * sigma_max;
    let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
    let u = svd.u.as_ref().expect("svd computed with u");
    let vt = svd.v_t.as_ref().expect("svd computed with v_t");
    // x = V Sigma^+ U^T b with small singular values zeroed
    let mut x = Vector3::zeros();
    for (i, sigma) in svd.singular_values.iter().enumerate() {
        if *sigma <= tol {
            continue;
        }
        let ui = u.column(i);
        let coeff = ui.dot(b) / sigma;
        for j in 0..3 {
            x[j] += coeff * vt[(i, j)];
        }
    }
    (x, rank)
}
