use std::path::PathBuf;

use nalgebra::DVector;
use rkbs::learn::{characterization_residual, solve, LearningProblem, Method, RegularizerSpec, SolveConfig};
use rkbs::Exponent;

use crate::data::{read_table, training_layout, write_predictions};
use crate::error::{CliError, Result};
use crate::json::{self, sig17};
use crate::model::{Diagnostics, GridSpec, KernelSpec, LossFile, ModelFile, RegularizerFile, SpaceSpec, SCHEMA};

/// Predictions this small relative to the targets count as the zero model.
const NEAR_ZERO: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SpaceKind {
    Tensor,
    Ti,
    Sensing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum KernelKind {
    Linear,
    Poly2,
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum LossKind {
    Square,
    Eps,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum MethodKind {
    Mirror,
    Newton,
}

#[derive(Debug, clap::Args)]
pub struct TrainArgs {
    /// CSV with header x_1..x_d,y_1..y_n.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub space: SpaceKind,
    /// Feature exponent.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Output exponent (tensor, ti) or outer column exponent (sensing).
    /// Defaults to 2, or to the conjugate of p for ti.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = LossKind::Square)]
    pub loss: LossKind,
    /// Regularizer exponent in ‖u‖^σ.
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Expected number of output columns; checked against the header.
    #[arg(long)]
    pub outputs: Option<usize>,
    /// Scalar kernel of every tensor component.
    #[arg(long, value_enum, default_value_t = KernelKind::Linear)]
    pub kernel: KernelKind,
    #[arg(long, default_value_t = 1.0)]
    pub offset: f64,
    #[arg(long, default_value_t = 1.0)]
    pub bandwidth: f64,
    /// Quadrature nodes per axis for ti; default about 400 nodes in total.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Knee width of the eps loss; default 1e-4 times the largest |y|.
    #[arg(long)]
    pub smoothing: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value_t = MethodKind::Mirror)]
    pub method: MethodKind,
    /// Also write in-sample predictions here.
    #[arg(long)]
    pub fitted: Option<PathBuf>,
}

pub struct TrainOutcome {
    pub converged: bool,
}

pub fn run(args: &TrainArgs) -> Result<TrainOutcome> {
    let Some(table) = read_table(&args.data)? else {
        return Err(CliError::data(&args.data, 1, "missing header"));
    };
    let (d, n) = training_layout(&args.data, &table.header)?;
    if let Some(expected) = args.outputs {
        if expected != n {
            return Err(CliError::data(
                &args.data,
                1,
                format!("header declares {n} outputs, --outputs is {expected}"),
            ));
        }
    }
    if table.rows.is_empty() {
        return Err(CliError::data(&args.data, 2, "no samples"));
    }
    let points: Vec<Vec<f64>> = table.rows.iter().map(|r| r[..d].to_vec()).collect();
    let targets: Vec<DVector<f64>> = table.rows.iter().map(|r| DVector::from_column_slice(&r[d..])).collect();
    let scale = targets.iter().map(|t| t.amax()).fold(0.0, f64::max);

    let space_spec = space_spec(args, d, n, &points)?;
    let loss = match args.loss {
        LossKind::Square => LossFile::Square,
        LossKind::Eps => LossFile::Eps {
            eps: args.eps,
            smoothing: args.smoothing.unwrap_or(1e-4 * if scale > 0.0 { scale } else { 1.0 }),
        },
    };
    let space = space_spec.build()?;
    let problem = LearningProblem::new(
        space.clone(),
        points.clone(),
        targets.clone(),
        loss.spec()?,
        RegularizerSpec::new(args.sigma)?,
        args.lambda,
    )?;
    let cfg = SolveConfig {
        tol: args.tol,
        max_iter: args.max_iter,
        method: match args.method {
            MethodKind::Mirror => Method::MirrorDescent,
            MethodKind::Newton => Method::Newton,
        },
        ..SolveConfig::default()
    };
    let model = solve(&problem, &cfg)?;
    let characterization = characterization_residual(&problem, &model.u)?;
    let fitted = problem.predictions(&model.u)?;
    let largest_fit = fitted.iter().map(|f| f.amax()).fold(0.0, f64::max);
    let near_zero = model.zero_minimizer || largest_fit <= NEAR_ZERO * scale;

    let file = ModelFile {
        schema: SCHEMA,
        space: space_spec,
        lambda: args.lambda,
        loss,
        regularizer: RegularizerFile { sigma: args.sigma },
        eta: model.eta.iter().map(|e| e.iter().copied().collect()).collect(),
        u: model.u.iter().copied().collect(),
        samples: points,
        diagnostics: Diagnostics {
            objective: model.objective,
            gradient_norm: model.gradient_norm,
            characterization_residual: characterization,
            iterations: model.iterations,
            converged: model.converged,
            zero_minimizer: model.zero_minimizer,
        },
    };
    json::write(&args.out, &file)?;
    if let Some(path) = &args.fitted {
        let rows: Vec<Vec<f64>> = fitted.iter().map(|f| f.iter().copied().collect()).collect();
        write_predictions(path, Some(&table), n, &rows)?;
    }

    println!("objective: {}", sig17(model.objective));
    println!("gradient_norm: {}", sig17(model.gradient_norm));
    println!("characterization_residual: {}", sig17(characterization));
    println!("iterations: {}", model.iterations);
    println!("converged: {}", model.converged);
    if near_zero {
        println!("zero-minimizer regime");
    }
    if !model.converged {
        eprintln!(
            "warning: stopped after {} iterations without converging",
            model.iterations
        );
    }
    Ok(TrainOutcome {
        converged: model.converged,
    })
}

fn space_spec(args: &TrainArgs, d: usize, n: usize, points: &[Vec<f64>]) -> Result<SpaceSpec> {
    let p = args.p;
    Ok(match args.space {
        SpaceKind::Tensor => SpaceSpec::Tensor {
            d,
            n,
            p,
            r: args.r.unwrap_or(2.0),
            kernel: match args.kernel {
                KernelKind::Linear => KernelSpec::Linear,
                KernelKind::Poly2 => KernelSpec::Poly2 { offset: args.offset },
                KernelKind::Gaussian => KernelSpec::Gaussian {
                    bandwidth: args.bandwidth,
                    anchors: points.to_vec(),
                },
            },
        },
        SpaceKind::Ti => {
            let r = match args.r {
                Some(r) => r,
                None => Exponent::new(p)?.conjugate().value(),
            };
            let per_axis = args
                .grid
                .unwrap_or_else(|| (400f64.powf(1.0 / d as f64).round() as usize).max(4));
            SpaceSpec::Ti {
                d,
                n,
                p,
                r,
                mixing: (0..n)
                    .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                    .collect(),
                grid: GridSpec {
                    per_axis,
                    lo: -8.0,
                    hi: 8.0,
                },
            }
        }
        SpaceKind::Sensing => SpaceSpec::Sensing {
            d,
            n,
            p,
            r: args.r.unwrap_or(2.0),
        },
    })
}
