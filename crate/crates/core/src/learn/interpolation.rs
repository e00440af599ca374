use nalgebra::{DMatrix, DVector};

use super::checks::stacked_adjoint;
use crate::error::{Error, Result};
use crate::kernel::FeatureMapSpec;
use crate::linalg::{least_squares, RANK_TOLERANCE};
use crate::optim::{newton_minimize, NewtonConfig};

/// Feasibility threshold of the least-squares pre-check, relative to `max(1, ‖z‖_∞)`.
pub const FEASIBILITY_TOL: f64 = 1e-10;

/// Minimal-norm interpolant `u` with its dual representer parameters.
#[derive(Clone, Debug)]
pub struct InterpolationModel {
    pub u: DVector<f64>,
    /// `η_j` with `u* = Σ_j Φ*(x_j)η_j*`.
    pub eta: Vec<DVector<f64>>,
    /// `max_j ‖Φ(x_j)u − z_j‖_∞`.
    pub constraint_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn stacked_features(space: &FeatureMapSpec<f64>, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = space.output_dim();
    let mut b = DMatrix::zeros(n * points.len(), space.feature_dim());
    for (j, x) in points.iter().enumerate() {
        b.rows_mut(j * n, n).copy_from(&space.feature_matrix(x)?);
    }
    Ok(b)
}

fn stack(targets: &[DVector<f64>]) -> DVector<f64> {
    DVector::from_iterator(
        targets.iter().map(|t| t.len()).sum(),
        targets.iter().flat_map(|t| t.iter().copied()),
    )
}

/// `min ‖u‖_𝒲` subject to `Φ(x_j)u = z_j`.
///
/// Solved by Newton either over the null space of the constraints or over
/// the dual variables `c` of `u* = Σ_j Φ*(x_j)c_j`, whichever side has the
/// smoother squared norm; the other is tried if the first stalls.
pub fn solve_min_norm_interpolation(
    space: &FeatureMapSpec<f64>,
    points: &[Vec<f64>],
    targets: &[DVector<f64>],
    cfg: &NewtonConfig,
) -> Result<InterpolationModel> {
    if points.is_empty() {
        return Err(Error::Empty);
    }
    if points.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            found: targets.len(),
        });
    }
    let n = space.output_dim();
    if let Some(t) = targets.iter().find(|t| t.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: t.len(),
        });
    }
    let w = space.feature_space();
    let out = space.output_space();
    let b = stacked_features(space, points)?;
    let a = stacked_adjoint(space, points)?;
    let z = stack(targets);
    let scale = z.amax().max(1.0);

    let plain = least_squares(&b, &z);
    let infeasibility = (&b * &plain - &z).amax();
    if infeasibility > FEASIBILITY_TOL * scale {
        return Err(Error::Infeasible {
            residual: infeasibility,
        });
    }
    if z.iter().all(|v| *v == 0.0) {
        return Ok(InterpolationModel {
            u: DVector::zeros(w.dim()),
            eta: vec![DVector::zeros(n); points.len()],
            constraint_residual: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    let primal_first = w.outer_exponent().value() >= 2.0 && w.blocks().iter().all(|b| b.exponent().value() >= 2.0);
    let mut best: Option<(DVector<f64>, usize, bool)> = None;
    for primal in [primal_first, !primal_first] {
        let (u, iterations, converged) = if primal {
            null_space_newton(space, &b, &plain, cfg)?
        } else {
            dual_newton(space, &a, &b, &z, &plain, cfg)?
        };
        let residual = (&b * &u - &z).amax();
        let better = match &best {
            None => true,
            Some((v, _, _)) => residual < (&b * v - &z).amax(),
        };
        if converged {
            best = Some((u, iterations, true));
            break;
        }
        if better {
            best = Some((u, iterations, false));
        }
    }
    let (u, iterations, converged) = best.expect("at least one attempt");
    let coefficients = least_squares(&a, &w.dualize(&u)?);
    let eta = (0..points.len())
        .map(|j| out.undualize(&coefficients.rows(j * n, n).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    Ok(InterpolationModel {
        constraint_residual: (&b * &u - &z).amax(),
        u,
        eta,
        iterations,
        converged,
    })
}

/// Orthonormal basis of `ker B`, with the same relative singular-value
/// threshold as [`numerical_rank`](crate::linalg::numerical_rank).
fn null_space(b: &DMatrix<f64>) -> DMatrix<f64> {
    let cols = b.ncols();
    // Padding to a square matrix makes the SVD return a full `V`.
    let mut square = DMatrix::zeros(cols.max(b.nrows()), cols);
    square.rows_mut(0, b.nrows()).copy_from(b);
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let top = svd.singular_values.max();
    let basis: Vec<DVector<f64>> = (0..cols)
        .filter(|&k| svd.singular_values[k] <= RANK_TOLERANCE * top)
        .map(|k| v_t.row(k).transpose())
        .collect();
    if basis.is_empty() {
        DMatrix::zeros(cols, 0)
    } else {
        DMatrix::from_columns(&basis)
    }
}

/// `min_t ½‖u₀ + Nt‖²_𝒲` over the null space of the constraints; smooth
/// when every feature exponent is at least 2.
fn null_space_newton(
    space: &FeatureMapSpec<f64>,
    b: &DMatrix<f64>,
    start: &DVector<f64>,
    cfg: &NewtonConfig,
) -> Result<(DVector<f64>, usize, bool)> {
    let w = space.feature_space();
    let null = null_space(b);
    if null.ncols() == 0 {
        return Ok((start.clone(), 0, true));
    }
    let weights = DVector::from_vec(w.coordinate_weights());
    let point = |t: &DVector<f64>| start + &null * t;
    let objective = |t: &DVector<f64>| -> Result<f64> {
        let norm = w.norm(&point(t))?;
        Ok(0.5 * norm * norm)
    };
    let gradient = |t: &DVector<f64>| -> Result<DVector<f64>> {
        Ok(null.transpose() * w.dualize(&point(t))?.component_mul(&weights))
    };
    let stationarity = |t: &DVector<f64>, g: &DVector<f64>| -> Result<f64> {
        let norm = w.norm(&point(t))?;
        Ok(if norm == 0.0 { 0.0 } else { g.amax() / norm })
    };
    let min = newton_minimize(objective, gradient, stationarity, DVector::zeros(null.ncols()), cfg)?;
    Ok((point(&min.x), min.iterations, min.converged))
}

/// `min_c ½‖Ac‖²_{𝒲*} − Σ_j ⟨z_j, c_j⟩` with `u = J_𝒲⁻¹(Ac)`; smooth when
/// every feature exponent is at most 2.
fn dual_newton(
    space: &FeatureMapSpec<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    z: &DVector<f64>,
    plain: &DVector<f64>,
    cfg: &NewtonConfig,
) -> Result<(DVector<f64>, usize, bool)> {
    let w = space.feature_space();
    let out = space.output_space();
    let n = out.dim();
    let scale = z.amax().max(1.0);
    let output_weights = DVector::from_fn(z.len(), |i, _| out.weight(i % n));
    let primal = |c: &DVector<f64>| w.undualize(&(a * c));
    let objective = |c: &DVector<f64>| -> Result<f64> {
        let norm = w.dual_norm(&(a * c))?;
        Ok(0.5 * norm * norm - z.component_mul(&output_weights).dot(c))
    };
    let gradient =
        |c: &DVector<f64>| -> Result<DVector<f64>> { Ok((b * primal(c)? - z).component_mul(&output_weights)) };
    let constraint = |c: &DVector<f64>, _: &DVector<f64>| -> Result<f64> { Ok((b * primal(c)? - z).amax() / scale) };
    let start = least_squares(a, &w.dualize(plain)?);
    let min = newton_minimize(objective, gradient, constraint, start, cfg)?;
    Ok((primal(&min.x)?, min.iterations, min.converged))
}

/// Default Newton settings for interpolation: relative stationarity or
/// constraint residual below `1e−12`.
pub fn interpolation_config() -> NewtonConfig {
    NewtonConfig {
        tol: 1e-12,
        ..NewtonConfig::default()
    }
}
