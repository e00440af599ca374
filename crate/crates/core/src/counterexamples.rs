//! Two finite-dimensional counterexamples for kernels built from a
//! non-Hilbertian feature space.
//!
//! Both use `m` sample points `x_j` and the feature map with
//! `Φ*(x_j)ξ* = (ξ*)₁ w_j` for vectors `w_j` forming the columns of a square
//! matrix. The dual kernel sections span `span{w_j}` while the kernel
//! sections themselves span `span{J⁻¹ w_j}`, and `J⁻¹` acts entrywise as
//! `t ↦ conj(t)|t|^{s−2}` up to a positive factor per column.
//!
//! * Non-completeness: an invertible matrix whose entrywise power is singular
//!   gives dual sections that span everything while the sections do not.
//! * Non-positive-definiteness: three vectors with
//!   `Σ_j Σ_k [w_k, w_j]_{ℓ_s} < 0` give a negative kernel Gram sum.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::kernel::FeatureMapSpec;
use crate::linalg::{numerical_rank, RANK_TOLERANCE};
use crate::random::{random_point, random_vector};
use crate::scalar::Scalar;
use crate::sip::{Exponent, LpSpace};

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i128>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[i128]> = self.data.chunks(self.cols.max(1)).collect();
        f.debug_tuple("IntMatrix").field(&rows).finish()
    }
}

impl IntMatrix {
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        if nrows == 0 {
            return Err(Error::Empty);
        }
        let ncols = rows[0].as_ref().len();
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(Error::DimensionMismatch {
                    expected: ncols,
                    found: r.len(),
                });
            }
            data.extend(r.iter().map(|&v| v as i128));
        }
        Ok(IntMatrix {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        IntMatrix { rows: n, cols: n, data }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.data[i * self.cols + j]
    }

    pub fn rows(&self) -> Vec<Vec<i128>> {
        self.data.chunks(self.cols).map(<[i128]>::to_vec).collect()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) as f64)
    }

    /// Columns as real vectors.
    pub fn columns(&self) -> Vec<DVector<f64>> {
        (0..self.cols)
            .map(|j| DVector::from_fn(self.rows, |i, _| self.get(i, j) as f64))
            .collect()
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<i128> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            if a[k * n + k] == 0 {
                let Some(pivot) = (k + 1..n).find(|&i| a[i * n + k] != 0) else {
                    return Ok(0);
                };
                for j in 0..n {
                    a.swap(k * n + j, pivot * n + j);
                }
                sign = -sign;
            }
            let akk = a[k * n + k];
            for i in k + 1..n {
                let aik = a[i * n + k];
                for j in k + 1..n {
                    let v = akk
                        .checked_mul(a[i * n + j])
                        .and_then(|x| x.checked_sub(aik.checked_mul(a[k * n + j])?))
                        .ok_or(Error::Overflow)?;
                    // Exact by Sylvester's identity.
                    a[i * n + j] = v / prev;
                }
                a[i * n + k] = 0;
            }
            prev = akk;
        }
        Ok(if n == 0 { 1 } else { sign * a[n * n - 1] })
    }

    /// Entrywise `t ↦ t|t|^{s−2}` for an integer exponent `s ≥ 2`.
    pub fn duality_power(&self, s: u32) -> Result<IntMatrix> {
        if s < 2 {
            return Err(Error::InvalidParameter(format!(
                "exact duality power needs an integer exponent s >= 2, got {s}"
            )));
        }
        let data = self
            .data
            .iter()
            .map(|&t| {
                let m = t.unsigned_abs();
                let p = m.checked_pow(s - 2).and_then(|v| i128::try_from(v).ok());
                p.and_then(|p| t.checked_mul(p)).ok_or(Error::Overflow)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IntMatrix { data, ..*self })
    }
}

/// Entrywise `t ↦ conj(t)|t|^{s−2}`.
///
/// The duality map of `ℓ_s` additionally divides a vector by `‖w‖^{s−2}`,
/// which multiplies each column by a positive number and leaves rank and
/// (non)singularity unchanged, so it is omitted here.
pub fn elementwise_duality_power<T: Scalar>(a: &DMatrix<T>, s: Exponent) -> DMatrix<T> {
    let e = s.value() - 2.0;
    a.map(|t| {
        let m = t.modulus();
        if m == 0.0 {
            T::zero()
        } else {
            t.conjugate().scale(m.powf(e))
        }
    })
}

/// Outcome of [`nondensity_verify`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NondensityReport {
    pub det_before: i128,
    pub det_after: i128,
    /// The matrix is invertible but its entrywise power is singular.
    pub verdict: bool,
}

/// Exact singularity test before and after the entrywise duality power.
pub fn nondensity_verify(a: &IntMatrix, s: u32) -> Result<NondensityReport> {
    let det_before = a.determinant()?;
    let det_after = a.duality_power(s)?.determinant()?;
    Ok(NondensityReport {
        det_before,
        det_after,
        verdict: det_before != 0 && det_after == 0,
    })
}

/// Floating-point variant for non-integer exponents, by numerical rank.
pub fn nondensity_verify_numeric(a: &DMatrix<f64>, s: Exponent) -> Result<(usize, usize, bool)> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let before = numerical_rank(a, RANK_TOLERANCE).0;
    let after = numerical_rank(&elementwise_duality_power(a, s), RANK_TOLERANCE).0;
    let n = a.nrows();
    Ok((before, after, before == n && after < n))
}

/// `Σ_j Σ_k [w_k, w_j]` in `ℓ_s`, real part.
pub fn gram_sip_sum<T: Scalar>(ws: &[DVector<T>], s: Exponent) -> Result<f64> {
    let Some(first) = ws.first() else {
        return Err(Error::Empty);
    };
    let space = LpSpace::new(first.len(), s)?;
    let mut total = T::zero();
    for wj in ws {
        for wk in ws {
            total += space.sip(wk, wj)?;
        }
    }
    Ok(total.real())
}

/// The feature map on points `{0, 1, …, m−1}` with `W = ℓ^m_{s'}` (`s'`
/// conjugate to `s`), `Λ = ℓ^n_p` and `Φ(j)` carrying `w_jᵀ` in its first
/// row, so that `Φ*(j)ξ* = (ξ*)₁ w_j`.
pub fn counterexample_feature_map(
    ws: &[DVector<f64>],
    s: Exponent,
    output_dim: usize,
    p: Exponent,
) -> Result<FeatureMapSpec<f64>> {
    let Some(first) = ws.first() else {
        return Err(Error::Empty);
    };
    let m = first.len();
    if let Some(bad) = ws.iter().find(|w| w.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: bad.len(),
        });
    }
    let feature = LpSpace::new(m, s.conjugate())?;
    let output = LpSpace::new(output_dim, p)?;
    let ws = ws.to_vec();
    Ok(FeatureMapSpec::new(1, feature, output, move |x| {
        let j = x[0];
        let index = j.round();
        if (j - index).abs() > 1e-12 || index < 0.0 || index as usize >= ws.len() {
            return Err(Error::OutOfDomain(format!("{j}")));
        }
        let mut phi = DMatrix::zeros(output_dim, m);
        phi.row_mut(0).copy_from(&ws[index as usize].transpose());
        Ok(phi)
    }))
}

/// `Σ_j Σ_k [K(x_j, x_k)ξ_j, ξ_k]_Λ`, real part.
pub fn kernel_gram_sum<T: Scalar>(
    space: &FeatureMapSpec<T>,
    points: &[Vec<f64>],
    directions: &[DVector<T>],
) -> Result<f64> {
    if points.len() != directions.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            found: directions.len(),
        });
    }
    let out = space.output_space();
    let mut total = T::zero();
    for (xj, xij) in points.iter().zip(directions) {
        let coefficient = space.generalized_adjoint_apply(xj, xij)?;
        for (xk, xik) in points.iter().zip(directions) {
            let value = space.feature_matrix(xk)? * &coefficient;
            total += out.sip(&value, xik)?;
        }
    }
    Ok(total.real())
}

/// Outcome of [`small_m_positivity_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct PositivityReport {
    pub trials: usize,
    /// Smallest Gram sum observed.
    pub min_sum: f64,
    /// Trials with a sum below `−1e−10`.
    pub violations: usize,
}

/// Gram sums over random configurations of one or two points.
pub fn small_m_positivity_check<R: Rng + ?Sized>(
    space: &Arc<FeatureMapSpec<f64>>,
    points: &[Vec<f64>],
    trials: usize,
    rng: &mut R,
) -> Result<PositivityReport> {
    let mut report = PositivityReport {
        trials,
        min_sum: f64::INFINITY,
        violations: 0,
    };
    for _ in 0..trials {
        let m = rng.random_range(1..=2);
        let xs: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                if points.is_empty() {
                    random_point(rng, space.input_dim())
                } else {
                    points[rng.random_range(0..points.len())].clone()
                }
            })
            .collect();
        let dirs: Vec<DVector<f64>> = (0..m).map(|_| random_vector(rng, space.output_dim())).collect();
        let sum = kernel_gram_sum(space, &xs, &dirs)?;
        report.min_sum = report.min_sum.min(sum);
        if sum < -1e-10 {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// A named matrix with the exponent it is tested at.
#[derive(Clone, Debug)]
pub struct BuiltinMatrix {
    pub name: &'static str,
    pub exponent: u32,
    pub matrix: IntMatrix,
}

/// Invertible; singular after entrywise cubing (`s = 4`).
pub fn a1() -> BuiltinMatrix {
    BuiltinMatrix {
        name: "A1",
        exponent: 4,
        matrix: IntMatrix::from_rows(&[[0, 8, 2, 4], [5, 0, 5, 1], [5, 4, 6, 9], [0, 9, 4, 8]]).unwrap(),
    }
}

/// Invertible; singular after `t ↦ t|t|³` (`s = 5`).
pub fn a2() -> BuiltinMatrix {
    BuiltinMatrix {
        name: "A2",
        exponent: 5,
        matrix: IntMatrix::from_rows(&[[9, 9, 9, 9], [8, 6, 0, 2], [6, 9, 2, 1], [7, 4, 9, 9]]).unwrap(),
    }
}

/// Columns `w_1, w_2, w_3` with a negative Gram sum in `ℓ_4`.
pub fn w1() -> BuiltinMatrix {
    BuiltinMatrix {
        name: "W1",
        exponent: 4,
        matrix: IntMatrix::from_rows(&[[4, -2, -3], [3, -5, 4], [1, -1, 1]]).unwrap(),
    }
}

/// Columns `w_1, w_2, w_3` with a negative Gram sum in `ℓ_5`.
pub fn w2() -> BuiltinMatrix {
    BuiltinMatrix {
        name: "W2",
        exponent: 5,
        matrix: IntMatrix::from_rows(&[[3, 2, -3], [2, -3, 3], [-5, 0, 4]]).unwrap(),
    }
}
