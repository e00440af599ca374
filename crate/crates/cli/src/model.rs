//! Model files: the space description, the fitted coefficient and the dual
//! representer parameters.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rkbs::learn::LossSpec;
use rkbs::zoo::{QuadratureGrid, ScalarKernel, SensingMatrixSpace, TensorProductSpace, TranslationInvariantSpace};
use rkbs::{Exponent, FeatureMapSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSpec {
    Linear,
    Poly2 { offset: f64 },
    Gaussian { bandwidth: f64, anchors: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub per_axis: usize,
    pub lo: f64,
    pub hi: f64,
}

/// `r` is the output exponent for `tensor` and `ti` and the outer column
/// exponent for `sensing`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpaceSpec {
    Tensor {
        d: usize,
        n: usize,
        p: f64,
        r: f64,
        kernel: KernelSpec,
    },
    Ti {
        d: usize,
        n: usize,
        p: f64,
        r: f64,
        mixing: Vec<Vec<f64>>,
        grid: GridSpec,
    },
    Sensing {
        d: usize,
        n: usize,
        p: f64,
        r: f64,
    },
}

impl SpaceSpec {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            SpaceSpec::Tensor { d, n, .. } | SpaceSpec::Ti { d, n, .. } | SpaceSpec::Sensing { d, n, .. } => (*d, *n),
        }
    }

    pub fn build(&self) -> Result<Arc<FeatureMapSpec<f64>>> {
        let spec = match self {
            SpaceSpec::Tensor { d, n, p, r, kernel } => {
                let k = match kernel {
                    KernelSpec::Linear => ScalarKernel::Linear,
                    KernelSpec::Poly2 { offset } => ScalarKernel::polynomial2(*offset)?,
                    KernelSpec::Gaussian { bandwidth, anchors } => {
                        if let Some(a) = anchors.iter().find(|a| a.len() != *d) {
                            return Err(CliError::Invalid(format!(
                                "gaussian anchor has {} coordinates, expected {d}",
                                a.len()
                            )));
                        }
                        ScalarKernel::gaussian(*bandwidth, anchors.clone())?
                    }
                };
                TensorProductSpace::new(*d, vec![k; *n], Exponent::new(*p)?, Exponent::new(*r)?)?.feature_map()
            }
            SpaceSpec::Ti {
                d,
                n,
                p,
                r,
                mixing,
                grid,
            } => {
                if mixing.len() != *n || mixing.iter().any(|row| row.len() != *n) {
                    return Err(CliError::Invalid(format!("mixing matrix must be {n}x{n}")));
                }
                let s = DMatrix::from_fn(*n, *n, |i, j| mixing[i][j]);
                let grid = QuadratureGrid::uniform(*d, grid.per_axis, grid.lo, grid.hi)?;
                TranslationInvariantSpace::new(*d, s, Exponent::new(*p)?)?
                    .with_output_exponent(Exponent::new(*r)?)
                    .real_feature_map(&grid)?
            }
            SpaceSpec::Sensing { d, n, p, r } => {
                SensingMatrixSpace::new(*d, *n, Exponent::new(*p)?, Exponent::new(*r)?)?.feature_map()
            }
        };
        Ok(Arc::new(spec))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LossFile {
    Square,
    Eps { eps: f64, smoothing: f64 },
}

impl LossFile {
    pub fn spec(&self) -> Result<LossSpec> {
        Ok(match self {
            LossFile::Square => LossSpec::Square,
            LossFile::Eps { eps, smoothing } => LossSpec::eps_insensitive(*eps, Some(*smoothing))?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizerFile {
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    pub objective: f64,
    pub gradient_norm: f64,
    pub characterization_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub zero_minimizer: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema: u32,
    pub space: SpaceSpec,
    pub lambda: f64,
    pub loss: LossFile,
    pub regularizer: RegularizerFile,
    /// One row per sample, `n` entries each.
    pub eta: Vec<Vec<f64>>,
    pub u: Vec<f64>,
    /// Training inputs, one row per sample.
    pub samples: Vec<Vec<f64>>,
    pub diagnostics: Diagnostics,
}

/// A model file together with its rebuilt space.
pub struct LoadedModel {
    pub file: ModelFile,
    pub space: Arc<FeatureMapSpec<f64>>,
    pub u: DVector<f64>,
}

impl ModelFile {
    pub fn load(path: &Path) -> Result<LoadedModel> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let file: ModelFile = serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.display().to_string(),
            source,
        })?;
        file.into_loaded()
    }

    /// Checks shapes against the rebuilt space.
    pub fn into_loaded(self) -> Result<LoadedModel> {
        if self.schema != SCHEMA {
            return Err(CliError::Invalid(format!(
                "unsupported model schema {}, expected {SCHEMA}",
                self.schema
            )));
        }
        let space = self.space.build()?;
        let (d, n) = self.space.dims();
        if self.u.len() != space.feature_dim() {
            return Err(CliError::Invalid(format!(
                "model has {} coefficients, space needs {}",
                self.u.len(),
                space.feature_dim()
            )));
        }
        if self.eta.len() != self.samples.len()
            || self.eta.iter().any(|e| e.len() != n)
            || self.samples.iter().any(|s| s.len() != d)
        {
            return Err(CliError::Invalid(format!(
                "eta must be {m}x{n} and samples {m}x{d}",
                m = self.samples.len()
            )));
        }
        Ok(LoadedModel {
            u: DVector::from_vec(self.u.clone()),
            space,
            file: self,
        })
    }
}

impl LoadedModel {
    /// `f(x) = Φ(x)u`.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok((self.space.feature_matrix(x)? * &self.u).iter().copied().collect())
    }
}
