//! Sensing matrices `A(x) = Ax` under a column-wise mixed norm.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::kernel::FeatureMapSpec;
use crate::sip::{Exponent, LpSpace, ProductSpace};

/// `n × d` real matrices normed by `(Σ_j ‖a_j‖_p^r)^{1/r}` over the columns
/// `a_j`, with values `A(x) = Ax` in `ℓ^n_γ`.
///
/// With `row_wise` set the roles of rows and columns swap in the norm.
#[derive(Clone, Debug, PartialEq)]
pub struct SensingMatrixSpace {
    d: usize,
    n: usize,
    p: Exponent,
    r: Exponent,
    gamma: Exponent,
    row_wise: bool,
}

impl SensingMatrixSpace {
    pub fn new(d: usize, n: usize, p: Exponent, r: Exponent) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::Empty);
        }
        Ok(SensingMatrixSpace {
            d,
            n,
            p,
            r,
            gamma: Exponent::TWO,
            row_wise: false,
        })
    }

    pub fn with_output_exponent(mut self, gamma: Exponent) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn row_wise(mut self, row_wise: bool) -> Self {
        self.row_wise = row_wise;
        self
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn output_dim(&self) -> usize {
        self.n
    }

    pub fn output_space(&self) -> LpSpace {
        LpSpace::new(self.n, self.gamma).expect("n > 0")
    }

    /// The mixed-norm space on the flattened groups (columns, or rows when
    /// `row_wise`).
    pub fn coefficient_space(&self) -> ProductSpace {
        let (groups, len) = if self.row_wise {
            (self.n, self.d)
        } else {
            (self.d, self.n)
        };
        let block = LpSpace::new(len, self.p).expect("nonempty");
        ProductSpace::new(vec![block; groups], self.r).expect("nonempty")
    }

    fn check(&self, a: &DMatrix<f64>) -> Result<()> {
        if a.shape() != (self.n, self.d) {
            return Err(Error::DimensionMismatch {
                expected: self.n * self.d,
                found: a.len(),
            });
        }
        Ok(())
    }

    /// Flattens `A` group after group.
    pub fn to_coefficient(&self, a: &DMatrix<f64>) -> Result<DVector<f64>> {
        self.check(a)?;
        let m = if self.row_wise { a.transpose() } else { a.clone() };
        Ok(DVector::from_column_slice(m.as_slice()))
    }

    pub fn from_coefficient(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        if u.len() != self.n * self.d {
            return Err(Error::DimensionMismatch {
                expected: self.n * self.d,
                found: u.len(),
            });
        }
        Ok(if self.row_wise {
            DMatrix::from_column_slice(self.d, self.n, u.as_slice()).transpose()
        } else {
            DMatrix::from_column_slice(self.n, self.d, u.as_slice())
        })
    }

    pub fn norm(&self, a: &DMatrix<f64>) -> Result<f64> {
        self.coefficient_space().norm(&self.to_coefficient(a)?)
    }

    /// The dual element `A*`, as a matrix of the same shape.
    pub fn dual(&self, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let u = self.coefficient_space().dualize(&self.to_coefficient(a)?)?;
        self.from_coefficient(&u)
    }

    /// `⟨A, B⟩ = Σ A_ij B_ij`, the pairing of `A` with a dual matrix `B`.
    pub fn pairing(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.component_mul(b).sum())
    }

    /// `[A, B]` in the mixed norm.
    pub fn sip(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
        self.pairing(a, &self.dual(b)?)
    }

    /// `(K(x, ·)ξ)* = ξ* xᵀ`.
    pub fn dual_section(&self, x: &DVector<f64>, xi: &DVector<f64>) -> Result<DMatrix<f64>> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: x.len(),
            });
        }
        let xi_star = self.output_space().dualize(xi)?;
        Ok(xi_star * x.transpose())
    }

    /// `K(x, y)ξ`, computed from the dual section.
    pub fn kernel_apply(&self, x: &DVector<f64>, y: &DVector<f64>, xi: &DVector<f64>) -> Result<DVector<f64>> {
        let section = self.dual_section(x, xi)?;
        let coefficient = self.coefficient_space().undualize(&self.to_coefficient(&section)?)?;
        Ok(self.from_coefficient(&coefficient)? * y)
    }

    /// The same space as a generic feature map on flattened coefficients.
    pub fn feature_map(&self) -> FeatureMapSpec<f64> {
        let (d, n, row_wise) = (self.d, self.n, self.row_wise);
        FeatureMapSpec::new(d, self.coefficient_space(), self.output_space(), move |x| {
            let mut phi = DMatrix::zeros(n, n * d);
            for i in 0..n {
                for j in 0..d {
                    let k = if row_wise { i * d + j } else { j * n + i };
                    phi[(i, k)] = x[j];
                }
            }
            Ok(phi)
        })
    }
}

/// Schatten `p`-norm: the `ℓ^p` norm of the singular values.
pub fn schatten_norm(a: &DMatrix<f64>, p: Exponent) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let sv = SVD::new(a.clone(), false, false).singular_values;
    LpSpace::new(sv.len(), p)
        .expect("nonempty")
        .norm(&sv)
        .expect("same length")
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn e(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    #[test]
    fn frobenius_when_hilbert() {
        let s = SensingMatrixSpace::new(2, 2, Exponent::TWO, Exponent::TWO).unwrap();
        let a = dmatrix![1.0, 2.0; -3.0, 0.5];
        assert!((s.norm(&a).unwrap() - a.norm()).abs() < 1e-14);
        assert!((s.dual(&a).unwrap() - &a).norm() < 1e-14);
    }

    #[test]
    fn single_column() {
        let s = SensingMatrixSpace::new(3, 2, Exponent::TWO, e(5.0)).unwrap();
        let a = dmatrix![0.0, 3.0, 0.0; 0.0, 4.0, 0.0];
        assert!((s.norm(&a).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn row_wise_is_transpose() {
        let a = dmatrix![1.0, 2.0, 0.0; -3.0, 0.5, 4.0];
        let rows = SensingMatrixSpace::new(3, 2, e(3.0), e(1.5)).unwrap().row_wise(true);
        let cols = SensingMatrixSpace::new(2, 3, e(3.0), e(1.5)).unwrap();
        let at = a.transpose();
        assert!((rows.norm(&a).unwrap() - cols.norm(&at).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn dual_section_corner() {
        let s = SensingMatrixSpace::new(3, 2, e(3.0), e(4.0)).unwrap();
        let m = s.dual_section(&dvector![1.0, 0.0, 0.0], &dvector![1.0, 0.0]).unwrap();
        assert_eq!(m, dmatrix![1.0, 0.0, 0.0; 0.0, 0.0, 0.0]);
        let z = s.dual_section(&dvector![0.0, 0.0, 0.0], &dvector![1.0, 2.0]).unwrap();
        assert_eq!(z, DMatrix::zeros(2, 3));
    }

    #[test]
    fn schatten_two_is_frobenius() {
        let a = dmatrix![1.0, 2.0; 3.0, 4.0];
        assert!((schatten_norm(&a, Exponent::TWO) - a.norm()).abs() < 1e-12);
    }
}
