//! Small dense linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SVD};

use crate::scalar::Scalar;

/// Singular values below `rel_tol * σ_max` count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Numerical rank and the singular values of `m`.
pub fn numerical_rank<T: Scalar>(m: &DMatrix<T>, rel_tol: f64) -> (usize, Vec<f64>) {
    if m.nrows() == 0 || m.ncols() == 0 {
        return (0, Vec::new());
    }
    let sv = SVD::new(m.clone(), false, false).singular_values;
    let mut values: Vec<f64> = sv.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let max = values.first().copied().unwrap_or(0.0);
    let rank = if max == 0.0 {
        0
    } else {
        values.iter().filter(|s| **s > rel_tol * max).count()
    };
    (rank, values)
}

/// Minimum-norm least-squares solution of `a x ≈ b`.
pub fn least_squares<T: Scalar>(a: &DMatrix<T>, b: &DVector<T>) -> DVector<T> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = SVD::new(a.clone(), true, true);
    let max = svd.singular_values.iter().fold(0.0_f64, |m, s| m.max(*s));
    let eps = (max * 1e-13).max(f64::MIN_POSITIVE);
    svd.solve(b, eps).expect("u and v were computed")
}

/// Ratio of largest to smallest singular value (∞ when singular).
pub fn condition_number<T: Scalar>(m: &DMatrix<T>) -> f64 {
    let (_, sv) = numerical_rank(m, 0.0);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}
