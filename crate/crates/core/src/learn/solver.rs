use nalgebra::DVector;

use super::checks::zero_minimizer_test;
use super::problem::LearningProblem;
use crate::error::Result;
use crate::optim::{derivative_step, newton_minimize, LineSearch, NewtonConfig};

/// Descent scheme used by [`solve`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    /// Steps along `−J_𝒲⁻¹(G(u))` with Armijo backtracking.
    #[default]
    MirrorDescent,
    /// Damped Newton on the plain-coordinate gradient.
    Newton,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    /// Stopping threshold on `‖G(u)‖_{𝒲*}`.
    pub tol: f64,
    pub max_iter: usize,
    pub line_search: LineSearch,
    pub method: Method,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol: 1e-8,
            max_iter: 100_000,
            line_search: LineSearch::default(),
            method: Method::default(),
        }
    }
}

/// A solved (or partially solved) learning problem.
#[derive(Clone, Debug)]
pub struct Model {
    pub u: DVector<f64>,
    pub eta: Vec<DVector<f64>>,
    pub objective: f64,
    pub gradient_norm: f64,
    /// `‖f(x_j) − ξ_j‖_Λ` per sample.
    pub residual_norms: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// The zero function was certified as the minimizer before iterating.
    pub zero_minimizer: bool,
}

impl Model {
    /// Packs a coefficient with its diagnostics.
    pub fn from_coefficient(
        problem: &LearningProblem,
        u: DVector<f64>,
        iterations: usize,
        converged: bool,
    ) -> Result<Self> {
        let g = problem.gradient(&u)?;
        let out = problem.space().output_space();
        let residual_norms = problem
            .predictions(&u)?
            .iter()
            .zip(problem.targets())
            .map(|(f, xi)| out.norm(&(f - xi)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Model {
            eta: problem.representer_parameters(&u)?,
            objective: problem.objective(&u)?,
            gradient_norm: problem.gradient_norm(&g)?,
            residual_norms,
            u,
            iterations,
            converged,
            zero_minimizer: false,
        })
    }
}

/// Minimizes the regularized objective starting from `u = 0`.
///
/// Hitting `max_iter` is not an error; the last iterate comes back with
/// `converged == false`.
pub fn solve(problem: &LearningProblem, cfg: &SolveConfig) -> Result<Model> {
    if !problem.loss().is_differentiable() {
        return Err(crate::Error::NonDifferentiableLoss);
    }
    let dim = problem.space().feature_dim();
    if zero_minimizer_test(problem)?.holds {
        let mut m = Model::from_coefficient(problem, DVector::zeros(dim), 0, true)?;
        m.zero_minimizer = true;
        return Ok(m);
    }
    match cfg.method {
        Method::MirrorDescent => mirror_descent(problem, cfg),
        Method::Newton => {
            let newton = NewtonConfig {
                tol: cfg.tol,
                max_iter: cfg.max_iter,
                line_search: cfg.line_search,
            };
            let w = problem.feature_weights().clone();
            let min = newton_minimize(
                |u| problem.objective(u),
                |u| problem.plain_gradient(u),
                |_, g| problem.gradient_norm(&g.component_div(&w)),
                DVector::zeros(dim),
                &newton,
            )?;
            Model::from_coefficient(problem, min.x, min.iterations, min.converged)
        }
    }
}

fn mirror_descent(problem: &LearningProblem, cfg: &SolveConfig) -> Result<Model> {
    let w = problem.space().feature_space();
    let mut u = DVector::zeros(w.dim());
    let mut value = problem.objective(&u)?;
    let mut objective = |v: &DVector<f64>| problem.objective(v);
    for it in 0..cfg.max_iter {
        let g = problem.gradient(&u)?;
        let gnorm = problem.gradient_norm(&g)?;
        if gnorm < cfg.tol {
            return Model::from_coefficient(problem, u, it, true);
        }
        let d = -w.undualize(&g)?;
        // ⟨d, G⟩ = −‖G‖²_{𝒲*}.
        let slope = w.pairing(&d, &g)?;
        match cfg.line_search.search(&mut objective, &u, value, &d, slope)? {
            Some(step) => {
                u = step.point;
                value = step.value;
            }
            None => {
                // Values stalled at rounding level; locate the step from the
                // directional derivative instead.
                let mut dphi = |t: f64| w.pairing(&d, &problem.gradient(&(&u + &d * t))?);
                match derivative_step(&mut dphi, cfg.line_search.initial_step)? {
                    Some(t) => {
                        u += &d * t;
                        value = problem.objective(&u)?;
                    }
                    None => return Model::from_coefficient(problem, u, it, false),
                }
            }
        }
    }
    Model::from_coefficient(problem, u, cfg.max_iter, false)
}
