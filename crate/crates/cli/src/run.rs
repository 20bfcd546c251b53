//! The `run` command: drive a problem from config to a finished design file.
//!
//! The design CSV is written even when the evaluator dies partway, so a long
//! run never loses what it already paid for. A sidecar `<out>.trace.json`
//! records the per-step gap diagnostics and wall time.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use osfd_core::engine::EngineState;
use osfd_core::Error;

use crate::config::RunConfig;
use crate::design_io::write_design;
use crate::error::{io_err, CliError, CliResult};

/// One sequential step as recorded in the trace sidecar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SidecarStep {
    pub i_star: usize,
    pub global_fill: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Sidecar {
    pub steps: Vec<SidecarStep>,
    pub stop: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostic: Option<String>,
}

pub fn sidecar_path(out_path: &Path) -> PathBuf {
    out_path.with_extension("trace.json")
}

pub fn cmd_run(config_path: &Path, out_path: &Path) -> CliResult<()> {
    let config = RunConfig::load(config_path)?;
    let (p, q) = config.dimensions()?;
    let mut evaluator = config.build_evaluator()?;
    let mut state = EngineState::new(config.engine_config(), p, q)?;

    let mut steps: Vec<SidecarStep> = Vec::new();
    let mut stop = "budget";
    let mut diagnostic: Option<String> = None;

    loop {
        if state.is_complete() {
            break;
        }
        let started = Instant::now();
        let Some(input) = state.ask()? else {
            stop = "fill_threshold";
            break;
        };
        match evaluator.evaluate(&input) {
            Ok(output) => match state.tell(output) {
                Ok(()) => {
                    // The initial design appends no trace rows; only count
                    // sequential steps.
                    if state.trace().len() > steps.len() {
                        let last = state.trace().last().unwrap();
                        steps.push(SidecarStep {
                            i_star: last.i_star,
                            global_fill: last.global,
                            wall_ms: started.elapsed().as_secs_f64() * 1e3,
                        });
                    }
                }
                Err(Error::NonFinite(_)) => {
                    stop = "evaluator_failure";
                    diagnostic = Some(format!(
                        "non-finite output at design point {}",
                        state.design().len()
                    ));
                    break;
                }
                Err(e) => return Err(e.into()),
            },
            Err(e) => {
                stop = "evaluator_failure";
                diagnostic = Some(e.to_string());
                break;
            }
        }
    }

    write_design(out_path, state.design())?;
    let sidecar = Sidecar {
        steps,
        stop: stop.to_string(),
        diagnostic: diagnostic.clone(),
    };
    let text = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| CliError::Config(format!("cannot encode trace: {e}")))?;
    std::fs::write(sidecar_path(out_path), text)
        .map_err(|e| io_err("cannot write trace sidecar", e))?;

    eprintln!(
        "wrote {} points to {} (stop: {stop})",
        state.design().len(),
        out_path.display()
    );
    match diagnostic {
        Some(msg) => Err(CliError::Evaluator(msg)),
        None => Ok(()),
    }
}
