use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::loss::{LossSpec, RegularizerSpec};
use crate::error::{Error, Result};
use crate::kernel::FeatureMapSpec;

/// `min_u Σ_j φ(‖Φ(x_j)u − ξ_j‖_Λ) + λ Ψ(‖u‖_𝒲)` over a real feature space.
#[derive(Clone, Debug)]
pub struct LearningProblem {
    space: Arc<FeatureMapSpec<f64>>,
    points: Vec<Vec<f64>>,
    targets: Vec<DVector<f64>>,
    loss: LossSpec,
    regularizer: RegularizerSpec,
    lambda: f64,
    features: Vec<DMatrix<f64>>,
    adjoints: Vec<DMatrix<f64>>,
    weights: DVector<f64>,
}

/// Per-sample residual data at a coefficient `u`.
struct Residuals {
    vectors: Vec<DVector<f64>>,
    norms: Vec<f64>,
}

impl LearningProblem {
    pub fn new(
        space: Arc<FeatureMapSpec<f64>>,
        points: Vec<Vec<f64>>,
        targets: Vec<DVector<f64>>,
        loss: LossSpec,
        regularizer: RegularizerSpec,
        lambda: f64,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty);
        }
        if points.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: targets.len(),
            });
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if let Some(t) = targets.iter().find(|t| t.len() != space.output_dim()) {
            return Err(Error::DimensionMismatch {
                expected: space.output_dim(),
                found: t.len(),
            });
        }
        let features = points
            .iter()
            .map(|x| space.feature_matrix(x))
            .collect::<Result<Vec<_>>>()?;
        let adjoints = features.iter().map(|m| space.adjoint_of(m)).collect();
        let weights = DVector::from_vec(space.feature_space().coordinate_weights());
        Ok(LearningProblem {
            space,
            points,
            targets,
            loss,
            regularizer,
            lambda,
            features,
            adjoints,
            weights,
        })
    }

    pub fn space(&self) -> &Arc<FeatureMapSpec<f64>> {
        &self.space
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn targets(&self) -> &[DVector<f64>] {
        &self.targets
    }

    pub fn loss(&self) -> LossSpec {
        self.loss
    }

    pub fn regularizer(&self) -> RegularizerSpec {
        self.regularizer
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Φ(x_j)` for every sample.
    pub fn feature_matrices(&self) -> &[DMatrix<f64>] {
        &self.features
    }

    /// `Φ*(x_j)` for every sample.
    pub fn adjoint_matrices(&self) -> &[DMatrix<f64>] {
        &self.adjoints
    }

    /// Pairing weights of the feature coordinates.
    pub fn feature_weights(&self) -> &DVector<f64> {
        &self.weights
    }

    fn check(&self, u: &DVector<f64>) -> Result<()> {
        if u.len() != self.space.feature_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.feature_dim(),
                found: u.len(),
            });
        }
        Ok(())
    }

    fn residuals(&self, u: &DVector<f64>) -> Result<Residuals> {
        self.check(u)?;
        let out = self.space.output_space();
        let vectors: Vec<DVector<f64>> = self
            .features
            .iter()
            .zip(&self.targets)
            .map(|(phi, xi)| phi * u - xi)
            .collect();
        let norms = vectors.iter().map(|r| out.norm(r)).collect::<Result<Vec<_>>>()?;
        Ok(Residuals { vectors, norms })
    }

    /// Predictions `Φ(x_j)u` at the samples.
    pub fn predictions(&self, u: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
        self.check(u)?;
        Ok(self.features.iter().map(|phi| phi * u).collect())
    }

    pub fn objective(&self, u: &DVector<f64>) -> Result<f64> {
        let r = self.residuals(u)?;
        let data: f64 = r.norms.iter().map(|t| self.loss.value(*t)).sum();
        let norm = self.space.feature_space().norm(u)?;
        Ok(data + self.lambda * self.regularizer.value(norm))
    }

    /// The gradient in dual feature coordinates:
    /// `Σ_j [φ'(ρ_j)/ρ_j] Φ*(x_j) J_Λ(r_j) + λ [Ψ'(‖u‖)/‖u‖] J_𝒲(u)`.
    pub fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let r = self.residuals(u)?;
        let out = self.space.output_space();
        let w = self.space.feature_space();
        let mut g = DVector::zeros(u.len());
        for ((adj, rj), rho) in self.adjoints.iter().zip(&r.vectors).zip(&r.norms) {
            let c = self.loss.ratio(*rho)?;
            if c != 0.0 {
                g += adj * out.dualize(rj)? * c;
            }
        }
        let c = self.regularizer.ratio(w.norm(u)?);
        if c != 0.0 {
            g += w.dualize(u)? * (self.lambda * c);
        }
        Ok(g)
    }

    /// The gradient in plain coordinates, `∂/∂u_k` of the objective.
    pub fn plain_gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.gradient(u)?.component_mul(&self.weights))
    }

    /// `‖G‖_{𝒲*}`.
    pub fn gradient_norm(&self, g: &DVector<f64>) -> Result<f64> {
        self.space.feature_space().dual_norm(g)
    }

    /// Recovers `η_j = (c_j / (λ c_Ψ)) (ξ_j − Φ(x_j)u)` from stationarity, with
    /// `c_j = φ'(ρ_j)/ρ_j` and `c_Ψ = Ψ'(‖u‖)/‖u‖`; all zero at `u = 0`.
    pub fn representer_parameters(&self, u: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
        let r = self.residuals(u)?;
        let c_psi = self.regularizer.ratio(self.space.feature_space().norm(u)?);
        if c_psi == 0.0 {
            return Ok(vec![DVector::zeros(self.space.output_dim()); self.len()]);
        }
        r.vectors
            .iter()
            .zip(&r.norms)
            .map(|(rj, rho)| Ok(rj * (-self.loss.ratio(*rho)? / (self.lambda * c_psi))))
            .collect()
    }
}
