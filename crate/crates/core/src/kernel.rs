//! Vector-valued RKBS generated by a feature map.
//!
//! A [`FeatureMapSpec`] bundles a feature space `W` (a [`ProductSpace`]), an
//! output space `Λ` (an [`LpSpace`]) and a map `x ↦ Φ(x)` producing the dense
//! `dim Λ × dim W` matrix of a linear operator `W → Λ`. The induced space is
//! `{ Φ(·)u : u ∈ W }` with `‖Φ(·)u‖ = ‖u‖_W`, and its reproducing kernel is
//! `K(x, y) = Φ(y) Φ†(x)` where `Φ†(x) = J_W⁻¹ Φ*(x) J_Λ` is the generalized
//! adjoint.
//!
//! The Banach adjoint `Φ*(x)` acts on dual coordinates. Because dual
//! coordinates are paired through the weighted bilinear form, its matrix is
//! `diag(1/w_W) Φ(x)ᵀ diag(w_Λ)`: a plain transpose for unweighted spaces.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, RANK_TOLERANCE};
use crate::scalar::Scalar;
use crate::sip::{LpSpace, ProductSpace};

pub type FeatureFn<T> = dyn Fn(&[f64]) -> Result<DMatrix<T>> + Send + Sync;

/// A feature map `x ↦ Φ(x) ∈ L(W, Λ)` given extensionally by its matrices.
#[derive(Clone)]
pub struct FeatureMapSpec<T: Scalar> {
    input_dim: usize,
    feature_space: ProductSpace,
    output_space: LpSpace,
    feature_weights: Arc<[f64]>,
    map: Arc<FeatureFn<T>>,
}

impl<T: Scalar> fmt::Debug for FeatureMapSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FeatureMapSpec")
            .field("input_dim", &self.input_dim)
            .field("feature_space", &self.feature_space)
            .field("output_space", &self.output_space)
            .finish_non_exhaustive()
    }
}

/// Numerical rank of a spanning set.
#[derive(Clone, Debug)]
pub struct SpanRank {
    pub rank: usize,
    pub dim: usize,
    pub singular_values: Vec<f64>,
}

impl SpanRank {
    pub fn is_full(&self) -> bool {
        self.rank == self.dim
    }
}

impl<T: Scalar> FeatureMapSpec<T> {
    pub fn new<F>(input_dim: usize, feature_space: impl Into<ProductSpace>, output_space: LpSpace, map: F) -> Self
    where
        F: Fn(&[f64]) -> Result<DMatrix<T>> + Send + Sync + 'static,
    {
        let feature_space = feature_space.into();
        let feature_weights = feature_space.coordinate_weights().into();
        FeatureMapSpec {
            input_dim,
            feature_space,
            output_space,
            feature_weights,
            map: Arc::new(map),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn feature_space(&self) -> &ProductSpace {
        &self.feature_space
    }

    pub fn output_space(&self) -> &LpSpace {
        &self.output_space
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_space.dim()
    }

    pub fn output_dim(&self) -> usize {
        self.output_space.dim()
    }

    /// The matrix of `Φ(x)`.
    pub fn feature_matrix(&self, x: &[f64]) -> Result<DMatrix<T>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                found: x.len(),
            });
        }
        let m = (self.map)(x)?;
        if m.nrows() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                found: m.nrows(),
            });
        }
        if m.ncols() != self.feature_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_dim(),
                found: m.ncols(),
            });
        }
        Ok(m)
    }

    /// The matrix of the Banach adjoint `Φ*(x): Λ* → W*` given `Φ(x)`.
    pub fn adjoint_of(&self, phi: &DMatrix<T>) -> DMatrix<T> {
        let mut adj = phi.transpose();
        if let Some(w) = self.output_space.weights() {
            for (j, mut col) in adj.column_iter_mut().enumerate() {
                col.iter_mut().for_each(|v| *v = v.scale(w[j]));
            }
        }
        if self.feature_space.blocks().iter().any(|b| b.weights().is_some()) {
            for (k, mut row) in adj.row_iter_mut().enumerate() {
                let inv = 1.0 / self.feature_weights[k];
                row.iter_mut().for_each(|v| *v = v.scale(inv));
            }
        }
        adj
    }

    pub fn adjoint_matrix(&self, x: &[f64]) -> Result<DMatrix<T>> {
        Ok(self.adjoint_of(&self.feature_matrix(x)?))
    }

    fn check_output(&self, xi: &DVector<T>) -> Result<()> {
        if xi.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                found: xi.len(),
            });
        }
        Ok(())
    }

    /// `Φ*(x) η` for `η` in dual output coordinates.
    pub fn adjoint_apply(&self, x: &[f64], eta: &DVector<T>) -> Result<DVector<T>> {
        self.check_output(eta)?;
        Ok(self.adjoint_matrix(x)? * eta)
    }

    /// `Φ†(x) ξ = J_W⁻¹ Φ*(x) J_Λ ξ`: the feature coefficient of `K(x, ·)ξ`.
    pub fn generalized_adjoint_apply(&self, x: &[f64], xi: &DVector<T>) -> Result<DVector<T>> {
        let dual = self.dual_section(x, xi)?;
        self.feature_space.undualize(&dual)
    }

    /// `Φ*(x) ξ*`: the dual-space coefficient of `(K(x, ·)ξ)*`.
    pub fn dual_section(&self, x: &[f64], xi: &DVector<T>) -> Result<DVector<T>> {
        self.check_output(xi)?;
        let xi_star = self.output_space.dualize(xi)?;
        self.adjoint_apply(x, &xi_star)
    }

    /// `K(x, y) ξ = Φ(y) Φ†(x) ξ`.
    pub fn kernel_apply(&self, x: &[f64], y: &[f64], xi: &DVector<T>) -> Result<DVector<T>> {
        let coefficient = self.generalized_adjoint_apply(x, xi)?;
        Ok(self.feature_matrix(y)? * coefficient)
    }

    /// `K(x, y) ξ` computed as `J_B⁻¹ (δ_x)* J_Λ ξ` evaluated at `y`.
    ///
    /// The functional `f ↦ [f(x), ξ]_Λ` is tabulated on the coordinate basis
    /// of `W` through the output semi-inner product and then mapped back with
    /// the inverse duality map. This never forms `Φ*(x)` explicitly.
    pub fn kernel_apply_via_functional(&self, x: &[f64], y: &[f64], xi: &DVector<T>) -> Result<DVector<T>> {
        self.check_output(xi)?;
        let phi = self.feature_matrix(x)?;
        let mut functional = DVector::zeros(self.feature_dim());
        for k in 0..self.feature_dim() {
            let column: DVector<T> = phi.column(k).into_owned();
            let value = self.output_space.sip(&column, xi)?;
            functional[k] = value.scale(1.0 / self.feature_weights[k]);
        }
        let coefficient = self.feature_space.undualize(&functional)?;
        Ok(self.feature_matrix(y)? * coefficient)
    }

    pub fn kernel_section(&self, x: &[f64], xi: &DVector<T>) -> Result<KernelSection<T>> {
        let dual_coefficient = self.dual_section(x, xi)?;
        let coefficient = self.feature_space.undualize(&dual_coefficient)?;
        Ok(KernelSection {
            point: x.to_vec(),
            direction: xi.clone(),
            coefficient,
            dual_coefficient,
        })
    }

    /// Rank of `{Φ*(x) ξ*}` over the given points and probe directions.
    ///
    /// Full rank means the dual kernel sections span `W*`.
    pub fn denseness_rank_check(&self, points: &[Vec<f64>], probes: &[DVector<T>]) -> Result<SpanRank> {
        let mut columns = Vec::with_capacity(points.len() * probes.len());
        for x in points {
            for xi in probes {
                columns.push(self.dual_section(x, xi)?);
            }
        }
        Ok(self.span_rank(columns))
    }

    /// Rank of `{Φ†(x) ξ}`: whether the kernel sections themselves span `W`.
    pub fn primal_span_rank(&self, points: &[Vec<f64>], probes: &[DVector<T>]) -> Result<SpanRank> {
        let mut columns = Vec::with_capacity(points.len() * probes.len());
        for x in points {
            for xi in probes {
                columns.push(self.generalized_adjoint_apply(x, xi)?);
            }
        }
        Ok(self.span_rank(columns))
    }

    fn span_rank(&self, columns: Vec<DVector<T>>) -> SpanRank {
        let dim = self.feature_dim();
        if columns.is_empty() {
            return SpanRank {
                rank: 0,
                dim,
                singular_values: Vec::new(),
            };
        }
        let m = DMatrix::from_columns(&columns);
        let (rank, singular_values) = numerical_rank(&m, RANK_TOLERANCE);
        SpanRank {
            rank,
            dim,
            singular_values,
        }
    }
}

/// `f = Φ(·)u` for a feature coefficient `u`.
#[derive(Clone, Debug)]
pub struct RkbsFunction<T: Scalar> {
    space: Arc<FeatureMapSpec<T>>,
    coefficient: DVector<T>,
}

impl<T: Scalar> RkbsFunction<T> {
    pub fn new(space: &Arc<FeatureMapSpec<T>>, coefficient: DVector<T>) -> Result<Self> {
        if coefficient.len() != space.feature_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.feature_dim(),
                found: coefficient.len(),
            });
        }
        Ok(RkbsFunction {
            space: Arc::clone(space),
            coefficient,
        })
    }

    pub fn zero(space: &Arc<FeatureMapSpec<T>>) -> Self {
        RkbsFunction {
            space: Arc::clone(space),
            coefficient: DVector::zeros(space.feature_dim()),
        }
    }

    /// The kernel section `K(x, ·)ξ` as a function.
    pub fn from_section(space: &Arc<FeatureMapSpec<T>>, section: &KernelSection<T>) -> Self {
        RkbsFunction {
            space: Arc::clone(space),
            coefficient: section.coefficient.clone(),
        }
    }

    pub fn space(&self) -> &Arc<FeatureMapSpec<T>> {
        &self.space
    }

    pub fn coefficient(&self) -> &DVector<T> {
        &self.coefficient
    }

    /// Point evaluation `δ_x f = Φ(x) u`.
    pub fn evaluate(&self, x: &[f64]) -> Result<DVector<T>> {
        Ok(self.space.feature_matrix(x)? * &self.coefficient)
    }

    pub fn norm(&self) -> f64 {
        self.space
            .feature_space()
            .norm(&self.coefficient)
            .expect("coefficient dimension checked at construction")
    }

    /// `[f, g]_B = [u, v]_W`.
    pub fn sip(&self, other: &RkbsFunction<T>) -> Result<T> {
        if !Arc::ptr_eq(&self.space, &other.space) {
            return Err(Error::SpaceMismatch);
        }
        self.space.feature_space().sip(&self.coefficient, &other.coefficient)
    }

    /// Coefficient of `f*` in `W*`.
    pub fn dual_coefficient(&self) -> DVector<T> {
        self.space
            .feature_space()
            .dualize(&self.coefficient)
            .expect("coefficient dimension checked at construction")
    }

    pub fn sub(&self, other: &RkbsFunction<T>) -> Result<RkbsFunction<T>> {
        if !Arc::ptr_eq(&self.space, &other.space) {
            return Err(Error::SpaceMismatch);
        }
        Ok(RkbsFunction {
            space: Arc::clone(&self.space),
            coefficient: &self.coefficient - &other.coefficient,
        })
    }

    pub fn scale(&self, alpha: T) -> RkbsFunction<T> {
        RkbsFunction {
            space: Arc::clone(&self.space),
            coefficient: &self.coefficient * alpha,
        }
    }
}

/// The kernel section `K(x, ·)ξ` together with its dual.
#[derive(Clone, Debug)]
pub struct KernelSection<T: Scalar> {
    pub point: Vec<f64>,
    pub direction: DVector<T>,
    /// `Φ†(x) ξ`.
    pub coefficient: DVector<T>,
    /// `Φ*(x) ξ*`.
    pub dual_coefficient: DVector<T>,
}

impl<T: Scalar> KernelSection<T> {
    pub fn evaluate(&self, space: &FeatureMapSpec<T>, y: &[f64]) -> Result<DVector<T>> {
        Ok(space.feature_matrix(y)? * &self.coefficient)
    }
}

/// The scalar-valued RKBS on `X × Λ` with `f̃(x, ξ) = [f(x), ξ]_Λ` and kernel
/// `K̃((x, ξ), (y, η)) = [K(x, y)ξ, η]_Λ`.
#[derive(Clone, Debug)]
pub struct ScalarizedRkbs<T: Scalar> {
    space: Arc<FeatureMapSpec<T>>,
}

impl<T: Scalar> ScalarizedRkbs<T> {
    pub fn new(space: &Arc<FeatureMapSpec<T>>) -> Self {
        ScalarizedRkbs {
            space: Arc::clone(space),
        }
    }

    pub fn evaluate(&self, f: &RkbsFunction<T>, x: &[f64], xi: &DVector<T>) -> Result<T> {
        if !Arc::ptr_eq(&self.space, f.space()) {
            return Err(Error::SpaceMismatch);
        }
        self.space.output_space().sip(&f.evaluate(x)?, xi)
    }

    pub fn kernel(&self, x: &[f64], xi: &DVector<T>, y: &[f64], eta: &DVector<T>) -> Result<T> {
        let k = self.space.kernel_apply(x, y, xi)?;
        self.space.output_space().sip(&k, eta)
    }

    /// `‖f̃‖ = ‖f‖`.
    pub fn norm(&self, f: &RkbsFunction<T>) -> f64 {
        f.norm()
    }

    /// The function `K̃((x, ξ), ·)`, which is `K(x, ·)ξ` seen through the
    /// scalarization.
    pub fn kernel_section(&self, x: &[f64], xi: &DVector<T>) -> Result<RkbsFunction<T>> {
        let section = self.space.kernel_section(x, xi)?;
        Ok(RkbsFunction::from_section(&self.space, &section))
    }
}

/// Result of [`estimate_operator_norm`].
#[derive(Clone, Debug)]
pub struct NormEstimate<T: Scalar> {
    pub value: f64,
    pub argmax: DVector<T>,
}

/// A unit vector (in `space`) with standard normal entries before scaling.
pub fn random_unit<T: Scalar, R: Rng + ?Sized>(space: &LpSpace, rng: &mut R) -> DVector<T> {
    loop {
        let v = DVector::from_fn(space.dim(), |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if T::IS_COMPLEX { rng.sample(StandardNormal) } else { 0.0 };
            T::from_parts(re, im)
        });
        let n = space.norm(&v).expect("dimension from space");
        if n > 1e-12 {
            return v.unscale(n);
        }
    }
}

/// Estimates `sup ‖op(ξ)‖ / ‖ξ‖` for a homogeneous, possibly nonlinear map on
/// `space`.
///
/// Candidates are the coordinate directions, the caller's `hints`, and
/// `samples` random directions; the best one is then refined by a random
/// local search. The result is a lower bound of the true norm.
pub fn estimate_operator_norm<T, F, R>(
    space: &LpSpace,
    op: F,
    rng: &mut R,
    samples: usize,
    hints: &[DVector<T>],
) -> Result<NormEstimate<T>>
where
    T: Scalar,
    F: Fn(&DVector<T>) -> Result<DVector<T>>,
    R: Rng + ?Sized,
{
    let ratio = |xi: &DVector<T>| -> Result<f64> {
        let n = space.norm(xi)?;
        if n == 0.0 {
            return Ok(0.0);
        }
        Ok(space.norm(&op(xi)?)? / n)
    };
    let mut best = NormEstimate {
        value: 0.0,
        argmax: DVector::zeros(space.dim()),
    };
    let consider = |xi: DVector<T>, best: &mut NormEstimate<T>| -> Result<()> {
        let r = ratio(&xi)?;
        if r > best.value {
            best.value = r;
            best.argmax = xi;
        }
        Ok(())
    };
    for k in 0..space.dim() {
        let mut e = DVector::zeros(space.dim());
        e[k] = T::one();
        consider(e, &mut best)?;
    }
    for h in hints {
        consider(h.clone(), &mut best)?;
    }
    for _ in 0..samples {
        consider(random_unit(space, rng), &mut best)?;
    }

    // Local refinement around the best direction.
    let mut step = 0.3;
    let mut current = {
        let n = space.norm(&best.argmax)?;
        if n == 0.0 {
            return Ok(best);
        }
        best.argmax.unscale(n)
    };
    for _ in 0..400 {
        if step < 1e-9 {
            break;
        }
        let trial = &current + random_unit::<T, R>(space, rng) * T::from_real(step);
        let n = space.norm(&trial)?;
        if n == 0.0 {
            continue;
        }
        let trial = trial.unscale(n);
        let r = ratio(&trial)?;
        if r > best.value {
            best.value = r;
            best.argmax = trial.clone();
            current = trial;
            step *= 1.5;
        } else {
            step *= 0.8;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sip::Exponent;
    use nalgebra::{dmatrix, dvector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn euclidean_map(m: DMatrix<f64>) -> Arc<FeatureMapSpec<f64>> {
        let n = m.nrows();
        let d = m.ncols();
        Arc::new(FeatureMapSpec::new(
            1,
            LpSpace::new(d, Exponent::TWO).unwrap(),
            LpSpace::new(n, Exponent::TWO).unwrap(),
            move |x: &[f64]| Ok(&m * x[0]),
        ))
    }

    #[test]
    fn identity_evaluation() {
        let space = euclidean_map(DMatrix::identity(3, 3));
        let u = dvector![1.0, -2.0, 0.5];
        let f = RkbsFunction::new(&space, u.clone()).unwrap();
        assert_eq!(f.evaluate(&[1.0]).unwrap(), u);
        assert_eq!(
            RkbsFunction::zero(&space).evaluate(&[1.0]).unwrap(),
            dvector![0.0, 0.0, 0.0]
        );
        assert!(f.evaluate(&[1.0, 2.0]).is_err());
        assert!(RkbsFunction::new(&space, dvector![1.0]).is_err());
    }

    #[test]
    fn hilbert_adjoint_is_transpose() {
        let m = dmatrix![1.0, 2.0, 0.0; -1.0, 0.5, 3.0];
        let space = euclidean_map(m.clone());
        let xi = dvector![0.3, -0.7];
        let got = space.generalized_adjoint_apply(&[1.0], &xi).unwrap();
        assert!((got - m.transpose() * &xi).norm() < 1e-14);
        let zero = space.generalized_adjoint_apply(&[1.0], &dvector![0.0, 0.0]).unwrap();
        assert_eq!(zero, DVector::zeros(3));
        let k = space.kernel_apply(&[1.0], &[2.0], &xi).unwrap();
        assert!((k - (&m * 2.0) * m.transpose() * &xi).norm() < 1e-13);
    }

    #[test]
    fn sip_mismatched_spaces() {
        let a = euclidean_map(DMatrix::identity(2, 2));
        let b = euclidean_map(DMatrix::identity(2, 2));
        let f = RkbsFunction::new(&a, dvector![1.0, 2.0]).unwrap();
        let g = RkbsFunction::new(&b, dvector![1.0, 2.0]).unwrap();
        assert_eq!(f.sip(&g), Err(Error::SpaceMismatch));
        assert!((f.sip(&f).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn wrong_matrix_shape_rejected() {
        let space: FeatureMapSpec<f64> = FeatureMapSpec::new(
            1,
            LpSpace::new(2, Exponent::TWO).unwrap(),
            LpSpace::new(2, Exponent::TWO).unwrap(),
            |_x: &[f64]| Ok(DMatrix::zeros(3, 2)),
        );
        assert!(space.feature_matrix(&[0.0]).is_err());
    }

    #[test]
    fn rank_deficient_single_point() {
        let space = euclidean_map(dmatrix![1.0, 1.0]);
        let r = space.denseness_rank_check(&[vec![1.0]], &[dvector![1.0]]).unwrap();
        assert_eq!(r.rank, 1);
        assert!(!r.is_full());
    }

    #[test]
    fn coordinate_projections_are_dense() {
        let space: Arc<FeatureMapSpec<f64>> = Arc::new(FeatureMapSpec::new(
            1,
            LpSpace::new(3, Exponent::new(3.0).unwrap()).unwrap(),
            LpSpace::new(1, Exponent::new(1.5).unwrap()).unwrap(),
            |x: &[f64]| {
                let mut m = DMatrix::zeros(1, 3);
                m[(0, x[0] as usize)] = 1.0;
                Ok(m)
            },
        ));
        let points: Vec<Vec<f64>> = (0..3).map(|j| vec![j as f64]).collect();
        let r = space.denseness_rank_check(&points, &[dvector![1.0]]).unwrap();
        assert!(r.is_full());
    }

    #[test]
    fn norm_estimate_of_linear_map() {
        // Spectral norm of a diagonal map under the Euclidean norm.
        let space = LpSpace::new(2, Exponent::TWO).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let est = estimate_operator_norm(
            &space,
            |xi: &DVector<f64>| Ok(dvector![3.0 * xi[0], -0.5 * xi[1]]),
            &mut rng,
            50,
            &[],
        )
        .unwrap();
        assert!((est.value - 3.0).abs() < 1e-12);
    }
}
