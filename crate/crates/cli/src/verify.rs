//! Counterexample and kernel-property checks with a text and JSON report.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use nalgebra::Complex;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rkbs::counterexamples::{
    a1, a2, counterexample_feature_map, gram_sip_sum, nondensity_verify, small_m_positivity_check, w1, w2,
    BuiltinMatrix, IntMatrix,
};
use rkbs::properties::{kernel_property_report, random_instance};
use rkbs::random::{random_feature_map, RandomSpaceConfig};
use rkbs::{Exponent, Scalar};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::json::{self, sig17};
use crate::model::SCHEMA;

/// Bounds on the worst value of each property entry, in report order.
const PROPERTY_TOLERANCES: [f64; 10] = [1e-12, 1e-10, 1e-10, 1e-8, 1e-8, 1e-10, 1e-10, 1e-8, 1e-10, 1e-9];

const POSITIVITY_SPACES: usize = 25;
const POSITIVITY_TRIALS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Counterexamples,
    Properties,
    All,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here ("-" for stdout, replacing the text report).
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// JSON object replacing built-in matrices by name, e.g. {"A1": [[1, 2], [3, 4]]}.
    #[arg(long)]
    pub matrices: Option<PathBuf>,
    /// Random instances for the property suite.
    #[arg(long, default_value_t = 200)]
    pub instances: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    /// Pass condition on `value`.
    pub condition: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

pub fn run(args: &VerifyArgs) -> Result<Report> {
    if args.instances == 0 {
        return Err(CliError::Invalid("--instances must be positive".into()));
    }
    let builtins = builtins(args)?;
    let mut checks = Vec::new();
    if matches!(args.suite, Suite::Counterexamples | Suite::All) {
        counterexample_checks(&builtins, args.seed, &mut checks)?;
    }
    if matches!(args.suite, Suite::Properties | Suite::All) {
        property_checks(args.seed, args.instances, &mut checks)?;
    }
    Ok(Report {
        schema: SCHEMA,
        suite: args.suite,
        seed: args.seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

pub fn emit(args: &VerifyArgs, report: &Report) -> Result<()> {
    let to_stdout = args.json.as_deref().is_some_and(|p| p.as_os_str() == "-");
    if !to_stdout {
        for c in &report.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            println!("[{tag}] {}: {} ({}) {}", c.name, sig17(c.value), c.condition, c.detail);
        }
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        println!(
            "{} of {} checks passed",
            report.checks.len() - failed,
            report.checks.len()
        );
    }
    match &args.json {
        Some(_) if to_stdout => print!("{}", json::to_string(report)),
        Some(path) => json::write(path, report)?,
        None => {}
    }
    Ok(())
}

fn builtins(args: &VerifyArgs) -> Result<Vec<BuiltinMatrix>> {
    let mut all = vec![a1(), a2(), w1(), w2()];
    let Some(path) = &args.matrices else {
        return Ok(all);
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let overrides: BTreeMap<String, Vec<Vec<i64>>> = serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.display().to_string(),
        source,
    })?;
    for (name, rows) in overrides {
        let Some(b) = all.iter_mut().find(|b| b.name == name) else {
            return Err(CliError::Invalid(format!(
                "{}: unknown matrix '{name}', expected one of A1, A2, W1, W2",
                path.display()
            )));
        };
        b.matrix = IntMatrix::from_rows(&rows)?;
    }
    Ok(all)
}

fn counterexample_checks(builtins: &[BuiltinMatrix], seed: u64, checks: &mut Vec<Check>) -> Result<()> {
    for b in builtins.iter().filter(|b| b.name.starts_with('A')) {
        let r = nondensity_verify(&b.matrix, b.exponent)?;
        checks.push(Check {
            name: format!("nondensity {}", b.name),
            passed: r.verdict,
            value: r.det_after as f64,
            condition: "det before != 0 and det after == 0".into(),
            detail: format!("s = {}, det {} -> {}", b.exponent, r.det_before, r.det_after),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for b in builtins.iter().filter(|b| b.name.starts_with('W')) {
        let s = Exponent::new(b.exponent as f64)?;
        let columns = b.matrix.columns();
        let sum = gram_sip_sum(&columns, s)?;
        checks.push(Check {
            name: format!("gram sum {}", b.name),
            passed: sum < 0.0,
            value: sum,
            condition: "< 0".into(),
            detail: format!("s = {}, {} vectors", b.exponent, columns.len()),
        });
        // Any two of the same sections still give a positive Gram sum.
        let space = Arc::new(counterexample_feature_map(&columns, s, 2, Exponent::new(3.0)?)?);
        let points: Vec<Vec<f64>> = (0..columns.len()).map(|j| vec![j as f64]).collect();
        let r = small_m_positivity_check(&space, &points, 200, &mut rng)?;
        checks.push(Check {
            name: format!("pair positivity {}", b.name),
            passed: r.violations == 0,
            value: r.min_sum,
            condition: ">= -1e-10 on every trial".into(),
            detail: format!("{} trials, {} violations", r.trials, r.violations),
        });
    }
    let cfg = RandomSpaceConfig::default();
    let mut violations = 0;
    let mut min_sum = f64::INFINITY;
    for _ in 0..POSITIVITY_SPACES {
        let space = random_feature_map::<f64, _>(&mut rng, &cfg);
        let r = small_m_positivity_check(&space, &[], POSITIVITY_TRIALS, &mut rng)?;
        violations += r.violations;
        min_sum = min_sum.min(r.min_sum);
    }
    checks.push(Check {
        name: "pair positivity random spaces".into(),
        passed: violations == 0,
        value: min_sum,
        condition: ">= -1e-10 on every trial".into(),
        detail: format!("{POSITIVITY_SPACES} spaces x {POSITIVITY_TRIALS} trials, {violations} violations"),
    });
    Ok(())
}

fn property_checks(seed: u64, instances: usize, checks: &mut Vec<Check>) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let cfg = RandomSpaceConfig::default();
    let mut worst = [f64::NEG_INFINITY; 10];
    let mut names = [""; 10];
    for i in 0..instances {
        let entries = if i % 2 == 0 {
            report_entries::<f64>(&mut rng, &cfg)?
        } else {
            report_entries::<Complex<f64>>(&mut rng, &cfg)?
        };
        for (k, (name, value)) in entries.iter().enumerate() {
            names[k] = name;
            worst[k] = worst[k].max(*value);
        }
    }
    for k in 0..10 {
        checks.push(Check {
            name: format!("kernel {}", names[k]),
            passed: worst[k] <= PROPERTY_TOLERANCES[k],
            value: worst[k],
            condition: format!("<= {:e}", PROPERTY_TOLERANCES[k]),
            detail: format!("worst over {instances} instances"),
        });
    }
    Ok(())
}

fn report_entries<T: Scalar>(rng: &mut ChaCha8Rng, cfg: &RandomSpaceConfig) -> Result<[(&'static str, f64); 10]> {
    let space = random_feature_map::<T, _>(rng, cfg);
    let inst = random_instance(&space, rng);
    Ok(kernel_property_report(&space, &inst, rng)?.entries())
}
