//! Regularized learning over a real feature-map space.
//!
//! Everything is computed in feature coordinates `u ∈ 𝒲`; gradients live in
//! dual coordinates, where dual kernel sections add.

mod checks;
mod interpolation;
mod loss;
mod problem;
mod solver;

pub use checks::{
    characterization_residual, dual_coordinate_residual, essential_li_check, recover_representer_parameters,
    representer_check, stacked_adjoint, zero_minimizer_test, SpanProjection, ZeroTest,
};
pub use interpolation::{interpolation_config, solve_min_norm_interpolation, InterpolationModel, FEASIBILITY_TOL};
pub use loss::{LossSpec, RegularizerSpec};
pub use problem::LearningProblem;
pub use solver::{solve, Method, Model, SolveConfig};
