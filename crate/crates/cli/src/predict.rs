use std::path::PathBuf;

use crate::data::{prefix_run, read_table, write_predictions};
use crate::error::{CliError, Result};
use crate::model::ModelFile;

#[derive(Debug, clap::Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV whose first columns are x_1..x_d; further columns are copied.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &PredictArgs) -> Result<()> {
    let model = ModelFile::load(&args.model)?;
    let table = read_table(&args.data)?;
    let Some(table) = table else {
        return write_predictions(&args.out, None, 0, &[]);
    };
    let (d, n) = model.file.space.dims();
    let found = prefix_run(&table.header, 0, "x");
    if found != d {
        return Err(CliError::data(
            &args.data,
            1,
            format!("model expects inputs x_1..x_{d}, header has {found}"),
        ));
    }
    let predictions = table
        .rows
        .iter()
        .zip(&table.lines)
        .map(|(row, &line)| {
            model
                .predict(&row[..d])
                .map_err(|e| CliError::data(&args.data, line, e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    write_predictions(&args.out, Some(&table), n, &predictions)
}
