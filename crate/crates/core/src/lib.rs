//! Reproducing kernel Banach spaces of vector-valued functions.

pub mod counterexamples;
pub mod error;
pub mod kernel;
pub mod learn;
pub mod linalg;
pub mod optim;
pub mod properties;
pub mod random;
pub mod scalar;
pub mod sip;
pub mod zoo;

pub use error::{Error, Result};
pub use kernel::{
    estimate_operator_norm, FeatureMapSpec, KernelSection, NormEstimate, RkbsFunction, ScalarizedRkbs, SpanRank,
};
pub use scalar::Scalar;
pub use sip::{Exponent, LpSpace, ProductSpace};
