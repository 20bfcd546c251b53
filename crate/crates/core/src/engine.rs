//! Sequential design loop and the ask/tell state machine behind it.
//!
//! `run_osfd` drives an in-process evaluator from the initial design to the
//! budget. `EngineState` exposes the same loop one step at a time for
//! evaluations that happen elsewhere, and serializes to JSON so a run can
//! span process restarts without losing determinism.

use serde::{Deserialize, Serialize};

use crate::approx::approx_gen_with;
use crate::design::Design;
use crate::error::{Error, Result};
use crate::filldist::{local_fill_distances, FillRecord};
use crate::geom::Point;
use crate::perturb::{PerturbOptions, PerturbRegistry};
use crate::rng::{RngState, SeededRng};
use crate::sampling::InitRegistry;

/// Black-box function under study. `evaluate` takes `&mut self` so wrappers
/// around external processes can hold connections or call counters.
pub trait Evaluator {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn evaluate(&mut self, x: &Point) -> Result<Point>;
}

/// Run parameters. `n` is the total budget, `n0` the initial design size,
/// `method` and `init` name entries in the perturbation and initial-design
/// registries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
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
}

fn default_init() -> String {
    "random_lhd".to_string()
}

fn default_scale_outputs() -> bool {
    true
}

impl EngineConfig {
    pub fn new(n: usize, n0: usize, method: &str, seed: u64) -> Self {
        EngineConfig {
            n,
            n0,
            method: method.to_string(),
            seed,
            init: default_init(),
            scale_outputs: true,
            k1_override: None,
            k2_override: None,
            stop_fill: None,
        }
    }

    /// Checks the size constraints against the problem dimensions and that
    /// the named strategies exist.
    pub fn validate(&self, p: usize, q: usize) -> Result<()> {
        if p == 0 || q == 0 {
            return Err(Error::bad_argument("dimensions must be at least 1"));
        }
        if self.n0 < 2 || self.n0 > self.n {
            return Err(Error::bad_argument(format!(
                "need 2 <= n0 <= n, got n0 = {} and n = {}",
                self.n0, self.n
            )));
        }
        let floor = p.min(q) + 1;
        if self.n0 < floor {
            return Err(Error::bad_argument(format!(
                "initial design of {} is too small for these dimensions, need at least {floor}",
                self.n0
            )));
        }
        PerturbRegistry::builtin().create(&self.method, PerturbOptions::default())?;
        InitRegistry::builtin().create(&self.init)?;
        if let Some(k1) = self.k1_override {
            if k1 == 0 {
                return Err(Error::bad_argument("k1 override must be at least 1"));
            }
        }
        if let Some(k2) = self.k2_override {
            if k2 == 0 {
                return Err(Error::bad_argument("k2 override must be at least 1"));
            }
        }
        if let Some(threshold) = self.stop_fill {
            if !threshold.is_finite() || threshold <= 0.0 {
                return Err(Error::bad_argument(format!(
                    "stop_fill must be finite and positive, got {threshold}"
                )));
            }
        }
        Ok(())
    }
}

/// One completed sequential step: which design point owned the largest gap
/// and how large the global fill estimate was, in the scaling of that step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub i_star: usize,
    pub global: f64,
}

#[derive(Debug, Clone)]
struct Pending {
    input: Point,
    step: Option<TraceStep>,
}

/// Why a run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    Budget,
    FillThreshold,
    EvaluatorFailure(String),
}

/// Result of a full run. The design is partial when the evaluator failed.
#[derive(Debug)]
pub struct RunOutcome {
    pub design: Design,
    pub trace: Vec<TraceStep>,
    pub stop: StopReason,
}

/// The sequential loop, paused between propose and observe.
///
/// At most one input is outstanding. All randomness flows through one seeded
/// generator, so two states with equal JSON continue identically.
pub struct EngineState {
    config: EngineConfig,
    design: Design,
    pending: Option<Pending>,
    trace: Vec<TraceStep>,
    rng: SeededRng,
    initial_queue: Vec<Point>,
}

impl EngineState {
    pub fn new(config: EngineConfig, p: usize, q: usize) -> Result<EngineState> {
        config.validate(p, q)?;
        let mut rng = SeededRng::new(config.seed);
        let generator = InitRegistry::builtin().create(&config.init)?;
        let initial_queue = generator.generate(config.n0, p, &mut rng)?;
        Ok(EngineState {
            config,
            design: Design::new(p, q)?,
            pending: None,
            trace: Vec::new(),
            rng,
            initial_queue,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn trace(&self) -> &[TraceStep] {
        &self.trace
    }

    pub fn pending_input(&self) -> Option<&Point> {
        self.pending.as_ref().map(|pending| &pending.input)
    }

    /// Budget exhausted; threshold stops are only visible as `ask` returning
    /// no point, since they depend on a fill estimate this state cannot know
    /// without running one.
    pub fn is_complete(&self) -> bool {
        self.design.len() >= self.config.n
    }

    /// Propose the next input and mark it pending. `None` means the fill
    /// threshold is satisfied and the run is over; asking again returns
    /// `None` again with no state drift.
    pub fn ask(&mut self) -> Result<Option<Point>> {
        if self.pending.is_some() {
            return Err(Error::Protocol(
                "an input is already pending; tell its output first".into(),
            ));
        }
        let m = self.design.len();
        if m >= self.config.n {
            return Err(Error::Protocol(format!(
                "design already holds the full budget of {}",
                self.config.n
            )));
        }
        if m < self.config.n0 {
            let input = self.initial_queue[m].clone();
            self.pending = Some(Pending { input: input.clone(), step: None });
            return Ok(Some(input));
        }

        let snapshot = self.rng.state();
        let record = self.gap_record()?;
        if let Some(threshold) = self.config.stop_fill {
            if record.global < threshold {
                // Leave the generator where it was so repeated asks at the
                // threshold are byte-stable.
                self.rng = SeededRng::restore(snapshot);
                return Ok(None);
            }
        }
        let strategy = PerturbRegistry::builtin().create(
            &self.config.method,
            PerturbOptions { k2_override: self.config.k2_override },
        )?;
        let input = strategy.propose(&self.design, &record, &mut self.rng)?;
        let step = TraceStep { i_star: record.i_star, global: record.global };
        self.pending = Some(Pending { input: input.clone(), step: Some(step) });
        Ok(Some(input))
    }

    fn gap_record(&mut self) -> Result<FillRecord> {
        self.design.refresh_scale(self.config.scale_outputs)?;
        let scaled = self.design.scaled_outputs()?;
        let probes = approx_gen_with(
            &scaled,
            self.design.input_dim(),
            self.design.output_dim(),
            self.config.k1_override,
            &mut self.rng,
        )?;
        local_fill_distances(&scaled, &probes.points)
    }

    /// Record the output for the pending input. A non-finite output is
    /// rejected and the input stays pending so the caller can re-evaluate.
    pub fn tell(&mut self, y: Point) -> Result<()> {
        if self.pending.is_none() {
            return Err(Error::Protocol("no input is pending; ask first".into()));
        }
        if y.dim() != self.design.output_dim() {
            return Err(Error::DimMismatch {
                expected: self.design.output_dim(),
                got: y.dim(),
            });
        }
        if !y.is_finite() {
            return Err(Error::NonFinite("output"));
        }
        let Pending { input, step } = self.pending.take().expect("pending checked above");
        self.design.push(input, y)?;
        if let Some(step) = step {
            self.trace.push(step);
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = StateDoc {
            inputs: self.design.inputs().iter().map(|x| x.to_vec()).collect(),
            outputs: self.design.outputs_raw().iter().map(|y| y.to_vec()).collect(),
            pending: self.pending.as_ref().map(|pending| PendingDoc {
                input: pending.input.to_vec(),
                step: pending.step,
            }),
            config: ConfigDoc {
                p: self.design.input_dim(),
                q: self.design.output_dim(),
                engine: self.config.clone(),
            },
            rng: self.rng.state(),
            trace: self.trace.clone(),
        };
        serde_json::to_string_pretty(&doc)
            .map_err(|e| Error::Internal(format!("state serialization failed: {e}")))
    }

    pub fn from_json(text: &str) -> Result<EngineState> {
        let doc: StateDoc = serde_json::from_str(text)
            .map_err(|e| Error::Protocol(format!("malformed state document: {e}")))?;
        let ConfigDoc { p, q, engine: config } = doc.config;
        config.validate(p, q)?;
        let inputs: Vec<Point> = doc.inputs.into_iter().map(Point::from).collect();
        let outputs: Vec<Point> = doc.outputs.into_iter().map(Point::from).collect();
        let design = Design::from_pairs(inputs, outputs, p, q)?;
        if design.len() > config.n {
            return Err(Error::Protocol(format!(
                "state holds {} points but the budget is {}",
                design.len(),
                config.n
            )));
        }
        let pending = match doc.pending {
            None => None,
            Some(pending_doc) => {
                let input = Point::from(pending_doc.input);
                if input.dim() != p || !input.is_finite() {
                    return Err(Error::Protocol("pending input malformed".into()));
                }
                if input.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::Protocol("pending input outside the unit cube".into()));
                }
                if design.contains_input(&input) {
                    return Err(Error::Protocol("pending input duplicates a design row".into()));
                }
                Some(Pending { input, step: pending_doc.step })
            }
        };
        // The queue is a pure function of (seed, init, n0, p): regenerate it
        // from a throwaway generator at the seed's origin, it matches what
        // the original state drew. The live generator position comes from
        // the document.
        let initial_queue = if design.len() < config.n0 {
            let mut fresh = SeededRng::new(config.seed);
            let generator = InitRegistry::builtin().create(&config.init)?;
            generator.generate(config.n0, p, &mut fresh)?
        } else {
            Vec::new()
        };
        if doc.rng.seed != config.seed {
            return Err(Error::Protocol(format!(
                "rng state for seed {} does not match configured seed {}",
                doc.rng.seed, config.seed
            )));
        }
        let rng = SeededRng::restore(doc.rng);
        Ok(EngineState {
            config,
            design,
            pending,
            trace: doc.trace,
            rng,
            initial_queue,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct StateDoc {
    inputs: Vec<Vec<f64>>,
    outputs: Vec<Vec<f64>>,
    pending: Option<PendingDoc>,
    config: ConfigDoc,
    rng: RngState,
    trace: Vec<TraceStep>,
}

#[derive(Serialize, Deserialize)]
struct PendingDoc {
    input: Vec<f64>,
    step: Option<TraceStep>,
}

#[derive(Serialize, Deserialize)]
struct ConfigDoc {
    p: usize,
    q: usize,
    #[serde(flatten)]
    engine: EngineConfig,
}

/// Drive an evaluator from scratch to a finished design.
///
/// Evaluator failures, including non-finite outputs, end the run early with
/// whatever was built so far and the diagnostic in the stop reason.
pub fn run_osfd<E: Evaluator + ?Sized>(evaluator: &mut E, config: EngineConfig) -> Result<RunOutcome> {
    let mut state = EngineState::new(config, evaluator.input_dim(), evaluator.output_dim())?;
    let stop = loop {
        if state.is_complete() {
            break StopReason::Budget;
        }
        let Some(input) = state.ask()? else {
            break StopReason::FillThreshold;
        };
        match evaluator.evaluate(&input) {
            Ok(output) => match state.tell(output) {
                Ok(()) => {}
                Err(Error::NonFinite(_)) => {
                    break StopReason::EvaluatorFailure(format!(
                        "non-finite output at design point {}",
                        state.design.len()
                    ));
                }
                Err(e) => return Err(e),
            },
            Err(e) => break StopReason::EvaluatorFailure(e.to_string()),
        }
    };
    let EngineState { design, trace, .. } = state;
    Ok(RunOutcome { design, trace, stop })
}
