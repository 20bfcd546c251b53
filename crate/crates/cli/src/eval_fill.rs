//! The `eval-fill` command: fill distance of a design file's outputs against
//! a reference output sample, printed to stdout.

use std::path::Path;

use osfd_core::fill_distance;

use crate::design_io::{format_value, read_design, read_outputs};
use crate::error::{CliError, CliResult};

pub fn eval_fill(design_path: &Path, reference_path: &Path) -> CliResult<f64> {
    let design = read_design(design_path)?;
    let reference = read_outputs(reference_path)?;
    let ref_dim = reference.first().map_or(0, |y| y.dim());
    if reference.is_empty() || design.outputs.is_empty() {
        return Err(CliError::Config("both files need at least one row".into()));
    }
    if ref_dim != design.q {
        return Err(CliError::Config(format!(
            "design has {} output columns, reference has {ref_dim}",
            design.q
        )));
    }
    Ok(fill_distance(&reference, &design.outputs)?)
}

pub fn cmd_eval_fill(design_path: &Path, reference_path: &Path) -> CliResult<()> {
    let fill = eval_fill(design_path, reference_path)?;
    println!("{}", format_value(fill));
    Ok(())
}
