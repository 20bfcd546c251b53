//! The `step` command: the ask/tell loop exposed over a state file, one
//! process invocation per protocol action.
//!
//! `init` creates the state, `next` prints the proposed input, `tell` records
//! an observed output. The state JSON is rewritten atomically (sibling temp
//! file, then rename) so a crash mid-write never corrupts a run. Protocol
//! misuse leaves the state file untouched.

use std::path::{Path, PathBuf};

use osfd_core::engine::EngineState;
use osfd_core::{Error, Point};

use crate::config::RunConfig;
use crate::design_io::format_value;
use crate::error::{io_err, CliError, CliResult};

fn load_state(path: &Path) -> CliResult<EngineState> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| io_err(&format!("cannot read state {}", path.display()), e))?;
    EngineState::from_json(&text)
        .map_err(|e| CliError::Config(format!("invalid state {}: {e}", path.display())))
}

fn save_atomic(path: &Path, state: &EngineState) -> CliResult<()> {
    let text = state.to_json()?;
    let tmp: PathBuf = path.with_extension("tmp");
    std::fs::write(&tmp, text).map_err(|e| io_err("cannot write state", e))?;
    std::fs::rename(&tmp, path).map_err(|e| io_err("cannot replace state", e))
}

/// Dimensions for a step run. The problem field is optional here: whoever
/// drives the loop evaluates the inputs themselves, so explicit p and q are
/// enough.
fn step_dimensions(config: &RunConfig) -> CliResult<(usize, usize)> {
    if config.problem.is_some() {
        config.dimensions()
    } else {
        match (config.p, config.q) {
            (Some(p), Some(q)) => Ok((p, q)),
            _ => Err(CliError::Config(
                "config needs a problem or explicit p and q".into(),
            )),
        }
    }
}

pub fn step_init(state_path: &Path, config_path: &Path) -> CliResult<()> {
    if state_path.exists() {
        return Err(CliError::Config(format!(
            "refusing to overwrite existing state {}",
            state_path.display()
        )));
    }
    let config = RunConfig::load(config_path)?;
    let (p, q) = step_dimensions(&config)?;
    let state = EngineState::new(config.engine_config(), p, q)?;
    save_atomic(state_path, &state)
}

/// Advance the loop by one proposal. `None` means the fill threshold was met
/// and the design is complete; the state file is only rewritten when a new
/// input is actually outstanding.
pub fn step_next(state_path: &Path) -> CliResult<Option<Point>> {
    let mut state = load_state(state_path)?;
    match state.ask()? {
        Some(input) => {
            save_atomic(state_path, &state)?;
            Ok(Some(input))
        }
        None => Ok(None),
    }
}

pub fn step_tell(state_path: &Path, values: Vec<f64>) -> CliResult<()> {
    let mut state = load_state(state_path)?;
    match state.tell(Point::from(values)) {
        Ok(()) => save_atomic(state_path, &state),
        // Arity mistakes are protocol misuse, not a config problem; the
        // pending input stays live in the untouched file either way.
        Err(e @ Error::DimMismatch { .. }) => Err(CliError::Protocol(e.to_string())),
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_step_init(state_path: &Path, config_path: &Path) -> CliResult<()> {
    step_init(state_path, config_path)?;
    eprintln!("state written to {}", state_path.display());
    Ok(())
}

pub fn cmd_step_next(state_path: &Path) -> CliResult<()> {
    match step_next(state_path)? {
        Some(input) => {
            let line: Vec<String> = input.iter().map(|&v| format_value(v)).collect();
            println!("{}", line.join(" "));
        }
        None => eprintln!("fill threshold reached; design complete"),
    }
    Ok(())
}

pub fn cmd_step_tell(state_path: &Path, raw: &[String]) -> CliResult<()> {
    let mut values = Vec::with_capacity(raw.len());
    for field in raw {
        values.push(field.parse::<f64>().map_err(|_| {
            CliError::Config(format!("`{field}` is not a number"))
        })?);
    }
    step_tell(state_path, values)
}
