//! Seeded random instances for tests, benchmarks and property checks.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::kernel::FeatureMapSpec;
use crate::scalar::Scalar;
use crate::sip::{Exponent, LpSpace, ProductSpace};

/// Shape of a random feature-map space.
#[derive(Clone, Debug)]
pub struct RandomSpaceConfig {
    /// Exponents drawn for every block, the outer norm and the output space.
    pub exponents: Vec<f64>,
    pub max_feature_dim: usize,
    pub max_output_dim: usize,
    pub max_blocks: usize,
    pub input_dim: usize,
    pub weighted: bool,
}

impl Default for RandomSpaceConfig {
    fn default() -> Self {
        RandomSpaceConfig {
            exponents: vec![1.5, 2.0, 3.0, 4.0],
            max_feature_dim: 8,
            max_output_dim: 4,
            max_blocks: 3,
            input_dim: 2,
            weighted: true,
        }
    }
}

pub fn random_scalar<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = if T::IS_COMPLEX { rng.sample(StandardNormal) } else { 0.0 };
    T::from_parts(re, im)
}

pub fn random_vector<T: Scalar, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<T> {
    DVector::from_fn(dim, |_, _| random_scalar(rng))
}

pub fn random_matrix<T: Scalar, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| random_scalar(rng))
}

pub fn random_point<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect()
}

fn exponent<R: Rng + ?Sized>(rng: &mut R, choices: &[f64]) -> Exponent {
    Exponent::new(*choices.choose(rng).expect("nonempty exponent set")).expect("valid exponent")
}

fn weights<R: Rng + ?Sized>(rng: &mut R, dim: usize, weighted: bool) -> Option<Vec<f64>> {
    if weighted && rng.random_bool(0.5) {
        Some((0..dim).map(|_| rng.random_range(0.5..2.0)).collect())
    } else {
        None
    }
}

fn lp<R: Rng + ?Sized>(rng: &mut R, dim: usize, cfg: &RandomSpaceConfig) -> LpSpace {
    let e = exponent(rng, &cfg.exponents);
    match weights(rng, dim, cfg.weighted) {
        Some(w) => LpSpace::weighted(e, w),
        None => LpSpace::new(dim, e),
    }
    .expect("positive dimension and weights")
}

/// A random product feature space, output space and smooth feature map
/// `Φ(x) = A₀ + Σ_i x_i A_i + cos(x₀) B`.
pub fn random_feature_map<T: Scalar, R: Rng + ?Sized>(rng: &mut R, cfg: &RandomSpaceConfig) -> Arc<FeatureMapSpec<T>> {
    let total = rng.random_range(1..=cfg.max_feature_dim);
    let nblocks = rng.random_range(1..=cfg.max_blocks.min(total));
    // Split `total` into `nblocks` positive parts.
    let mut cuts: Vec<usize> = (1..total).collect();
    let mut chosen = Vec::with_capacity(nblocks - 1);
    for _ in 0..nblocks - 1 {
        let i = rng.random_range(0..cuts.len());
        chosen.push(cuts.swap_remove(i));
    }
    chosen.sort_unstable();
    let mut sizes = Vec::with_capacity(nblocks);
    let mut prev = 0;
    for c in chosen.into_iter().chain(std::iter::once(total)) {
        sizes.push(c - prev);
        prev = c;
    }
    let blocks: Vec<LpSpace> = sizes.iter().map(|&s| lp(rng, s, cfg)).collect();
    let feature_space = ProductSpace::new(blocks, exponent(rng, &cfg.exponents)).expect("nonempty");
    let n = rng.random_range(1..=cfg.max_output_dim);
    let output_space = lp(rng, n, cfg);
    let d = cfg.input_dim;
    let terms: Vec<DMatrix<T>> = (0..d + 2).map(|_| random_matrix(rng, n, total)).collect();
    Arc::new(FeatureMapSpec::new(d, feature_space, output_space, move |x| {
        let mut phi = terms[0].clone();
        for (i, xi) in x.iter().enumerate() {
            phi += &terms[i + 1] * T::from_real(*xi);
        }
        phi += &terms[d + 1] * T::from_real(x[0].cos());
        Ok(phi)
    }))
}
