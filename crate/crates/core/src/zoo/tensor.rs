//! Tensor products of scalar RKHS with a mixed `ℓ^p` norm.
//!
//! Component `j` of a function is an element `f_j` of the RKHS of a scalar
//! kernel `K_j`, the space is normed by `(Σ_j ‖f_j‖^p)^{1/p}` and the values
//! `(f_j(x) : j)` live in `ℓ^n_r`. Every scalar kernel carries a finite
//! feature representation `K_j(x, y) = ⟨φ_j(x), φ_j(y)⟩`, and the closed forms
//! below use that represented kernel so the generic feature-map machinery
//! reproduces them exactly.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::kernel::FeatureMapSpec;
use crate::scalar::Scalar;
use crate::sip::{Exponent, LpSpace, ProductSpace};

/// Truncation level for Nyström eigenvalues, relative to the largest.
const NYSTROM_CUTOFF: f64 = 1e-12;

/// A positive-definite scalar kernel with a finite feature map.
#[derive(Clone, Debug)]
pub enum ScalarKernel {
    /// `⟨x, y⟩`.
    Linear,
    /// `(c + ⟨x, y⟩)²`.
    Polynomial2 { offset: f64 },
    /// `exp(−‖x − y‖² / 2σ²)`, represented through a Nyström map over anchor
    /// points; exact on the span of the anchors' sections.
    Gaussian(Arc<GaussianNystrom>),
}

#[derive(Debug)]
pub struct GaussianNystrom {
    bandwidth: f64,
    anchors: Vec<DVector<f64>>,
    projection: DMatrix<f64>,
}

impl GaussianNystrom {
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn anchors(&self) -> &[DVector<f64>] {
        &self.anchors
    }

    fn exact(&self, x: &[f64], y: &[f64]) -> f64 {
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        (-d2 / (2.0 * self.bandwidth * self.bandwidth)).exp()
    }
}

impl ScalarKernel {
    pub fn polynomial2(offset: f64) -> Result<Self> {
        if !(offset.is_finite() && offset >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "polynomial offset must be nonnegative, got {offset}"
            )));
        }
        Ok(ScalarKernel::Polynomial2 { offset })
    }

    pub fn gaussian(bandwidth: f64, anchors: Vec<Vec<f64>>) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        let Some(first) = anchors.first() else {
            return Err(Error::Empty);
        };
        let dim = first.len();
        if let Some(bad) = anchors.iter().find(|a| a.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        let mut model = GaussianNystrom {
            bandwidth,
            anchors: anchors.into_iter().map(DVector::from_vec).collect(),
            projection: DMatrix::zeros(0, 0),
        };
        let m = model.anchors.len();
        let gram = DMatrix::from_fn(m, m, |i, j| {
            model.exact(model.anchors[i].as_slice(), model.anchors[j].as_slice())
        });
        let eig = SymmetricEigen::new(gram);
        let top = eig.eigenvalues.max();
        let kept: Vec<usize> = (0..m).filter(|&i| eig.eigenvalues[i] > NYSTROM_CUTOFF * top).collect();
        model.projection = DMatrix::from_fn(kept.len(), m, |r, c| {
            let i = kept[r];
            eig.eigenvectors[(c, i)] / eig.eigenvalues[i].sqrt()
        });
        Ok(ScalarKernel::Gaussian(Arc::new(model)))
    }

    /// Length of `φ(x)` for inputs of dimension `input_dim`.
    pub fn feature_dim(&self, input_dim: usize) -> usize {
        match self {
            ScalarKernel::Linear => input_dim,
            ScalarKernel::Polynomial2 { .. } => 1 + 2 * input_dim + input_dim * input_dim.saturating_sub(1) / 2,
            ScalarKernel::Gaussian(g) => g.projection.nrows(),
        }
    }

    pub fn features(&self, x: &[f64]) -> DVector<f64> {
        match self {
            ScalarKernel::Linear => DVector::from_column_slice(x),
            ScalarKernel::Polynomial2 { offset } => {
                let d = x.len();
                let mut f = Vec::with_capacity(self.feature_dim(d));
                f.push(*offset);
                let s = (2.0 * offset).sqrt();
                f.extend(x.iter().map(|v| s * v));
                f.extend(x.iter().map(|v| v * v));
                for i in 0..d {
                    for j in i + 1..d {
                        f.push(std::f64::consts::SQRT_2 * x[i] * x[j]);
                    }
                }
                DVector::from_vec(f)
            }
            ScalarKernel::Gaussian(g) => {
                let k = DVector::from_iterator(g.anchors.len(), g.anchors.iter().map(|a| g.exact(a.as_slice(), x)));
                &g.projection * k
            }
        }
    }

    /// The represented kernel `⟨φ(x), φ(y)⟩`.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            ScalarKernel::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
            ScalarKernel::Polynomial2 { offset } => {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                (offset + dot).powi(2)
            }
            ScalarKernel::Gaussian(_) => self.features(x).dot(&self.features(y)),
        }
    }

    /// The kernel's defining formula, without the finite representation.
    pub fn evaluate_exact(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            ScalarKernel::Gaussian(g) => g.exact(x, y),
            _ => self.evaluate(x, y),
        }
    }
}

/// `n` scalar RKHS joined by an outer `ℓ^p`, with values in `ℓ^n_r`.
#[derive(Clone, Debug)]
pub struct TensorProductSpace {
    input_dim: usize,
    kernels: Vec<ScalarKernel>,
    p: Exponent,
    r: Exponent,
}

impl TensorProductSpace {
    pub fn new(input_dim: usize, kernels: Vec<ScalarKernel>, p: Exponent, r: Exponent) -> Result<Self> {
        if kernels.is_empty() || input_dim == 0 {
            return Err(Error::Empty);
        }
        for k in &kernels {
            if let ScalarKernel::Gaussian(g) = k {
                if g.anchors[0].len() != input_dim {
                    return Err(Error::DimensionMismatch {
                        expected: input_dim,
                        found: g.anchors[0].len(),
                    });
                }
            }
        }
        Ok(TensorProductSpace {
            input_dim,
            kernels,
            p,
            r,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.kernels.len()
    }

    pub fn kernels(&self) -> &[ScalarKernel] {
        &self.kernels
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn output_exponent(&self) -> Exponent {
        self.r
    }

    pub fn output_space(&self) -> LpSpace {
        LpSpace::new(self.output_dim(), self.r).expect("n > 0")
    }

    pub fn feature_space(&self) -> ProductSpace {
        let blocks = self
            .kernels
            .iter()
            .map(|k| LpSpace::new(k.feature_dim(self.input_dim), Exponent::TWO))
            .collect::<Result<Vec<_>>>()
            .expect("feature dimensions are positive");
        ProductSpace::new(blocks, self.p).expect("nonempty")
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    fn diagonal(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.kernels
            .iter()
            .enumerate()
            .map(|(index, k)| {
                let value = k.evaluate(x, x);
                if value > 0.0 {
                    Ok(value)
                } else {
                    Err(Error::SingularKernel { index, value })
                }
            })
            .collect()
    }

    /// `c_j = conj(ξ_j)|ξ_j|^{r−2} / ‖ξ‖_r^{r−2}`, so that
    /// `(K(x, ·)ξ)* = (c_j K_j(x, ·) : j)`.
    pub fn dual_section_coefficients<T: Scalar>(&self, xi: &DVector<T>) -> Result<DVector<T>> {
        self.output_space().dualize(xi)
    }

    /// `(K(x, ·)ξ)*` in feature coordinates: block `j` is `c_j φ_j(x)`.
    pub fn dual_section<T: Scalar>(&self, x: &[f64], xi: &DVector<T>) -> Result<DVector<T>> {
        self.diagonal(x)?;
        let c = self.dual_section_coefficients(xi)?;
        let space = self.feature_space();
        let mut out = DVector::zeros(space.dim());
        for (j, k) in self.kernels.iter().enumerate() {
            let f = k.features(x);
            for (slot, v) in space.block_range(j).zip(f.iter()) {
                out[slot] = c[j].scale(*v);
            }
        }
        Ok(out)
    }

    /// `‖K(x, ·)ξ‖ = (Σ_j (|c_j| √K_j(x, x))^q)^{1/q}` with `q` conjugate to
    /// `p`.
    pub fn kernel_norm<T: Scalar>(&self, x: &[f64], xi: &DVector<T>) -> Result<f64> {
        let diag = self.diagonal(x)?;
        let c = self.dual_section_coefficients(xi)?;
        let terms = DVector::from_iterator(
            diag.len(),
            c.iter().zip(&diag).map(|(cj, kjj)| cj.modulus() * kjj.sqrt()),
        );
        LpSpace::new(terms.len(), self.p.conjugate())?.norm(&terms)
    }

    /// `K(x, y)ξ` componentwise:
    /// `(ξ_j/|ξ_j|) K_j(x, y) (N^{p−2} |ξ_j|^{r−1} / (‖ξ‖^{r−2} K_j(x, x)^{(p−2)/2}))^{1/(p−1)}`
    /// with `N = ‖K(x, ·)ξ‖`; components with `ξ_j = 0` are 0.
    pub fn kernel_apply<T: Scalar>(&self, x: &[f64], y: &[f64], xi: &DVector<T>) -> Result<DVector<T>> {
        self.check_point(y)?;
        let diag = self.diagonal(x)?;
        let n_norm = self.kernel_norm(x, xi)?;
        let xi_norm = self.output_space().norm(xi)?;
        let p = self.p.value();
        let r = self.r.value();
        let mut out = DVector::zeros(self.output_dim());
        if n_norm == 0.0 {
            return Ok(out);
        }
        for (j, k) in self.kernels.iter().enumerate() {
            let m = xi[j].modulus();
            if m == 0.0 {
                continue;
            }
            // |c_j| as a ratio avoids overflowing |ξ_j|^{r−1}.
            let c = m * (m / xi_norm).powf(r - 2.0);
            let base = c * n_norm.powf(p - 2.0) / diag[j].powf((p - 2.0) / 2.0);
            let magnitude = k.evaluate(x, y) * base.powf(1.0 / (p - 1.0));
            out[j] = xi[j].unscale(m).scale(magnitude);
        }
        Ok(out)
    }

    /// The finite feature-map instantiation of the same space.
    pub fn feature_map<T: Scalar>(&self) -> FeatureMapSpec<T> {
        let space = self.feature_space();
        let kernels = self.kernels.clone();
        let offsets: Vec<_> = (0..kernels.len()).map(|j| space.block_range(j)).collect();
        let total = space.dim();
        FeatureMapSpec::new(self.input_dim, space, self.output_space(), move |x| {
            let mut phi = DMatrix::zeros(kernels.len(), total);
            for (j, k) in kernels.iter().enumerate() {
                let f = k.features(x);
                for (slot, v) in offsets[j].clone().zip(f.iter()) {
                    phi[(j, slot)] = T::from_real(*v);
                }
            }
            Ok(phi)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn polynomial_features_reproduce_kernel() {
        let k = ScalarKernel::polynomial2(1.5).unwrap();
        let x = [0.3, -1.2, 2.0];
        let y = [1.0, 0.5, -0.25];
        let via = k.features(&x).dot(&k.features(&y));
        assert!((via - k.evaluate(&x, &y)).abs() < 1e-12);
        assert_eq!(k.feature_dim(3), k.features(&x).len());
    }

    #[test]
    fn nystrom_exact_on_anchors() {
        let anchors = vec![vec![0.0], vec![0.7], vec![-1.1], vec![2.0]];
        let k = ScalarKernel::gaussian(0.9, anchors.clone()).unwrap();
        for a in &anchors {
            for b in &anchors {
                assert!((k.evaluate(a, b) - k.evaluate_exact(a, b)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn single_component_support() {
        let s = TensorProductSpace::new(
            2,
            vec![ScalarKernel::Linear, ScalarKernel::polynomial2(1.0).unwrap()],
            Exponent::new(3.0).unwrap(),
            Exponent::new(1.5).unwrap(),
        )
        .unwrap();
        let k = s.kernel_apply(&[1.0, 2.0], &[0.5, -1.0], &dvector![1.0, 0.0]).unwrap();
        assert_eq!(k[1], 0.0);
        assert!(k[0] != 0.0);
    }

    #[test]
    fn zero_kernel_at_origin_rejected() {
        let s = TensorProductSpace::new(1, vec![ScalarKernel::Linear], Exponent::TWO, Exponent::TWO).unwrap();
        assert!(matches!(
            s.kernel_apply(&[0.0], &[1.0], &dvector![1.0]),
            Err(Error::SingularKernel { index: 0, .. })
        ));
    }
}
