use nalgebra::{DMatrix, DVector};

use super::problem::LearningProblem;
use super::solver::Model;
use crate::error::Result;
use crate::kernel::FeatureMapSpec;
use crate::linalg::{least_squares, numerical_rank, RANK_TOLERANCE};

/// `‖λ[Ψ'(‖u‖)/‖u‖]u* + Σ_j [φ'(ρ_j)/ρ_j](K(x_j,·)(f(x_j) − ξ_j))*‖_{𝒲*}`,
/// assembled from dual kernel sections.
pub fn characterization_residual(problem: &LearningProblem, u: &DVector<f64>) -> Result<f64> {
    let space = problem.space();
    let w = space.feature_space();
    let out = space.output_space();
    let mut total = DVector::zeros(w.dim());
    for ((x, xi), f) in problem
        .points()
        .iter()
        .zip(problem.targets())
        .zip(problem.predictions(u)?)
    {
        let r = f - xi;
        let c = problem.loss().ratio(out.norm(&r)?)?;
        if c != 0.0 {
            total += space.dual_section(x, &r)? * c;
        }
    }
    let c = problem.regularizer().ratio(w.norm(u)?);
    if c != 0.0 {
        total += w.dualize(u)? * (problem.lambda() * c);
    }
    w.dual_norm(&total)
}

/// Outcome of the zero-minimizer criterion `‖T‖_{𝒲*} ≤ λΨ'(0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroTest {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// `T = Σ_j [φ'(‖ξ_j‖)/‖ξ_j‖](K(x_j,·)ξ_j)*` against `λΨ'(0)`.
pub fn zero_minimizer_test(problem: &LearningProblem) -> Result<ZeroTest> {
    let space = problem.space();
    let out = space.output_space();
    let mut t = DVector::zeros(space.feature_dim());
    for (x, xi) in problem.points().iter().zip(problem.targets()) {
        let c = problem.loss().ratio(out.norm(xi)?)?;
        if c != 0.0 {
            t += space.dual_section(x, xi)? * c;
        }
    }
    let lhs = space.feature_space().dual_norm(&t)?;
    let rhs = problem.lambda() * problem.regularizer().derivative(0.0);
    Ok(ZeroTest {
        holds: lhs <= rhs,
        lhs,
        rhs,
    })
}

/// `[Φ*(x_1) … Φ*(x_m)]`, mapping stacked `(η_1*, …, η_m*)` to `Σ_j Φ*(x_j)η_j*`.
pub fn stacked_adjoint(space: &FeatureMapSpec<f64>, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = space.output_dim();
    let mut a = DMatrix::zeros(space.feature_dim(), n * points.len());
    for (j, x) in points.iter().enumerate() {
        a.columns_mut(j * n, n).copy_from(&space.adjoint_matrix(x)?);
    }
    Ok(a)
}

/// Least-squares projection of `u*` onto the span of the dual kernel sections.
#[derive(Clone, Debug)]
pub struct SpanProjection {
    /// Distance in `𝒲*`.
    pub residual: f64,
    /// Stacked dual coordinates `η_j*` of the projection.
    pub coefficients: DVector<f64>,
}

pub fn representer_check(space: &FeatureMapSpec<f64>, points: &[Vec<f64>], u: &DVector<f64>) -> Result<SpanProjection> {
    let w = space.feature_space();
    let target = w.dualize(u)?;
    let a = stacked_adjoint(space, points)?;
    let coefficients = least_squares(&a, &target);
    let residual = w.dual_norm(&(&a * &coefficients - target))?;
    Ok(SpanProjection { residual, coefficients })
}

/// Recovers `η_j` from `u* = Σ_j Φ*(x_j)η_j*` by least squares, independent
/// of the stationarity formula.
pub fn recover_representer_parameters(
    space: &FeatureMapSpec<f64>,
    points: &[Vec<f64>],
    u: &DVector<f64>,
) -> Result<Vec<DVector<f64>>> {
    let n = space.output_dim();
    let proj = representer_check(space, points, u)?;
    (0..points.len())
        .map(|j| {
            space
                .output_space()
                .undualize(&proj.coefficients.rows(j * n, n).into_owned())
        })
        .collect()
}

/// Whether `(η_j*)_j ↦ Σ_j Φ*(x_j)η_j*` is injective.
pub fn essential_li_check(space: &FeatureMapSpec<f64>, points: &[Vec<f64>]) -> Result<bool> {
    let a = stacked_adjoint(space, points)?;
    let (rank, _) = numerical_rank(&a, RANK_TOLERANCE);
    Ok(rank == a.ncols())
}

/// `R_jl = λ[η_j, e_l]_Λ + [Φ*(x_j)e_l*, Σ_k Φ*(x_k)η_k*]_{𝒲*} − [ξ_j, e_l]_Λ`
/// for square loss.
pub fn dual_coordinate_residual(
    problem: &LearningProblem,
    model: &Model,
    basis: &[DVector<f64>],
) -> Result<DMatrix<f64>> {
    let space = problem.space();
    let out = space.output_space();
    let dual = space.feature_space().dual();
    let mut combined = DVector::zeros(space.feature_dim());
    for (adj, eta) in problem.adjoint_matrices().iter().zip(&model.eta) {
        combined += adj * out.dualize(eta)?;
    }
    let mut r = DMatrix::zeros(problem.len(), basis.len());
    for (j, (adj, xi)) in problem.adjoint_matrices().iter().zip(problem.targets()).enumerate() {
        for (l, e) in basis.iter().enumerate() {
            let probe = adj * out.dualize(e)?;
            r[(j, l)] =
                problem.lambda() * out.sip(&model.eta[j], e)? + dual.sip(&probe, &combined)? - out.sip(xi, e)?;
        }
    }
    Ok(r)
}
