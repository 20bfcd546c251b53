//! Run configuration file format and problem resolution.

use std::path::Path;

use serde::{Deserialize, Serialize};

use osfd_core::engine::{EngineConfig, Evaluator};
use osfd_core::testbed::ProblemRegistry;

use crate::error::{io_err, CliError, CliResult};
use crate::subprocess::SubprocessEvaluator;

/// JSON run configuration. `problem` is a builtin spec string like
/// `inverse_radius:eps=0.1` or `subprocess:<shell command>`; subprocess
/// problems must also give `p` and `q` since nothing else knows them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub problem: Option<String>,
    pub n: usize,
    pub n0: usize,
    pub method: String,
    pub seed: u64,
    #[serde(default = "default_init")]
    pub init: String,
    #[serde(default = "default_scale_outputs")]
    pub scale_outputs: bool,
    #[serde(default)]
    pub k1_override: Option<usize>,
    #[serde(default)]
    pub k2_override: Option<usize>,
    #[serde(default)]
    pub stop_fill: Option<f64>,
    #[serde(default)]
    pub p: Option<usize>,
    #[serde(default)]
    pub q: Option<usize>,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_reference_points")]
    pub reference_points: usize,
}

fn default_init() -> String {
    "random_lhd".to_string()
}

fn default_scale_outputs() -> bool {
    true
}

fn default_record_every() -> usize {
    10
}

fn default_reference_points() -> usize {
    100_000
}

/// What the `problem` field resolved to.
pub enum ProblemKind<'a> {
    Builtin(&'a str),
    Subprocess(&'a str),
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| io_err(&format!("cannot read config {}", path.display()), e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }

    pub fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            n: self.n,
            n0: self.n0,
            method: self.method.clone(),
            seed: self.seed,
            init: self.init.clone(),
            scale_outputs: self.scale_outputs,
            k1_override: self.k1_override,
            k2_override: self.k2_override,
            stop_fill: self.stop_fill,
        }
    }

    pub fn problem_kind(&self) -> CliResult<ProblemKind<'_>> {
        let Some(spec) = self.problem.as_deref() else {
            return Err(CliError::Config(
                "config needs a `problem` (builtin spec or subprocess:<command>)".into(),
            ));
        };
        match spec.strip_prefix("subprocess:") {
            Some(command) if command.trim().is_empty() => {
                Err(CliError::Config("subprocess problem has an empty command".into()))
            }
            Some(command) => Ok(ProblemKind::Subprocess(command)),
            None => Ok(ProblemKind::Builtin(spec)),
        }
    }

    /// Input and output dimensions, from the builtin problem or the explicit
    /// `p`/`q` fields. Explicit fields must agree with a builtin problem.
    pub fn dimensions(&self) -> CliResult<(usize, usize)> {
        match self.problem_kind()? {
            ProblemKind::Subprocess(_) => match (self.p, self.q) {
                (Some(p), Some(q)) => Ok((p, q)),
                _ => Err(CliError::Config(
                    "subprocess problems need explicit p and q in the config".into(),
                )),
            },
            ProblemKind::Builtin(spec) => {
                let problem = ProblemRegistry::builtin().parse(spec)?;
                let (p, q) = (problem.input_dim(), problem.output_dim());
                for (given, actual, label) in [(self.p, p, "p"), (self.q, q, "q")] {
                    if let Some(given) = given {
                        if given != actual {
                            return Err(CliError::Config(format!(
                                "config {label} = {given} contradicts the problem's {label} = {actual}"
                            )));
                        }
                    }
                }
                Ok((p, q))
            }
        }
    }

    pub fn build_evaluator(&self) -> CliResult<Box<dyn Evaluator>> {
        match self.problem_kind()? {
            ProblemKind::Subprocess(command) => {
                let (p, q) = self.dimensions()?;
                Ok(Box::new(SubprocessEvaluator::spawn(command, p, q)?))
            }
            ProblemKind::Builtin(spec) => {
                let problem = ProblemRegistry::builtin().parse(spec)?;
                Ok(Box::new(BuiltinEvaluator { inner: problem }))
            }
        }
    }
}

/// Adapter so a boxed problem travels as a plain evaluator.
struct BuiltinEvaluator {
    inner: Box<dyn osfd_core::testbed::Problem>,
}

impl Evaluator for BuiltinEvaluator {
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }
    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }
    fn evaluate(&mut self, x: &osfd_core::Point) -> osfd_core::Result<osfd_core::Point> {
        self.inner.evaluate(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<RunConfig> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let config = parse(
            r#"{"problem": "inverse_radius", "n": 50, "n0": 10, "method": "greedy", "seed": 7}"#,
        )
        .unwrap();
        assert_eq!(config.init, "random_lhd");
        assert!(config.scale_outputs);
        assert_eq!(config.record_every, 10);
        assert_eq!(config.reference_points, 100_000);
        assert_eq!(config.dimensions().unwrap(), (2, 2));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = parse(r#"{"problem": "easom", "n": 5, "n0": 3, "method": "greedy", "seed": 1, "bananas": 2}"#);
        assert!(err.is_err());
    }

    #[test]
    fn subprocess_requires_dimensions() {
        let config = parse(
            r#"{"problem": "subprocess:cat", "n": 5, "n0": 3, "method": "greedy", "seed": 1}"#,
        )
        .unwrap();
        assert!(config.dimensions().is_err());
        let config = parse(
            r#"{"problem": "subprocess:cat", "n": 5, "n0": 3, "method": "greedy", "seed": 1, "p": 2, "q": 2}"#,
        )
        .unwrap();
        assert_eq!(config.dimensions().unwrap(), (2, 2));
    }

    #[test]
    fn explicit_dimensions_must_match_builtin() {
        let config = parse(
            r#"{"problem": "robot_arm", "n": 40, "n0": 10, "method": "ei", "seed": 3, "p": 8, "q": 2}"#,
        )
        .unwrap();
        assert_eq!(config.dimensions().unwrap(), (8, 2));
        let config = parse(
            r#"{"problem": "robot_arm", "n": 40, "n0": 10, "method": "ei", "seed": 3, "q": 1}"#,
        )
        .unwrap();
        assert!(config.dimensions().is_err());
    }

    #[test]
    fn missing_problem_is_a_config_error() {
        let config =
            parse(r#"{"n": 5, "n0": 3, "method": "greedy", "seed": 1, "p": 2, "q": 2}"#).unwrap();
        assert!(matches!(config.problem_kind(), Err(CliError::Config(_))));
    }
}
