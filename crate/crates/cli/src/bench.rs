//! The `bench` command: fill-distance curves for several design methods on
//! one problem, replicated across seeds.
//!
//! A method here is anything that turns (problem, budget, seed) into an
//! ordered output sequence: the sequential engine with either scoring rule,
//! or a one-shot space-filling input design evaluated after the fact. Fill
//! distances of each prefix are measured against a dense reference sample of
//! the output set, so the curves for different methods share one yardstick.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use osfd_core::engine::{run_osfd, StopReason};
use osfd_core::sampling::{maximin_lhd, random_lhd, scrambled_sobol};
use osfd_core::testbed::{Problem, ProblemRegistry};
use osfd_core::{fill_distance, Point, SeededRng};

use crate::config::{ProblemKind, RunConfig};
use crate::design_io::format_value;
use crate::error::{CliError, CliResult};

/// Seed for reference-set generation, distinct from any plausible run seed so
/// reference draws never collide with a replication's stream.
pub const REFERENCE_SEED: u64 = 424242;

/// Target count for the robot arm's disk reference.
const ROBOT_ARM_TARGETS: usize = 100_030;

/// One row of the long-format results table.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: String,
    pub seed: u64,
    pub n: usize,
    pub fill: f64,
}

/// A single replication: this config, this seed.
pub struct BenchTask<'a> {
    pub config: &'a RunConfig,
    pub seed: u64,
}

/// Produces the full ordered output sequence for one replication. Prefix
/// fills are computed by the harness, so order matters.
pub trait BenchMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn outputs(&self, task: &BenchTask) -> CliResult<Vec<Point>>;
}

fn builtin_problem(config: &RunConfig) -> CliResult<Box<dyn Problem>> {
    match config.problem_kind()? {
        ProblemKind::Builtin(spec) => Ok(ProblemRegistry::builtin().parse(spec)?),
        ProblemKind::Subprocess(_) => Err(CliError::Config(
            "bench needs a builtin problem; a reference set cannot be computed for a subprocess".into(),
        )),
    }
}

/// The sequential engine under one of its scoring rules.
struct EngineMethod {
    method: &'static str,
}

impl BenchMethod for EngineMethod {
    fn name(&self) -> &'static str {
        self.method
    }

    fn outputs(&self, task: &BenchTask) -> CliResult<Vec<Point>> {
        let mut problem = builtin_problem(task.config)?;
        let mut config = task.config.engine_config();
        config.method = self.method.to_string();
        config.seed = task.seed;
        // Curves want the whole budget; an early stop would truncate them.
        config.stop_fill = None;
        let outcome = run_osfd(problem.as_mut(), config)?;
        match outcome.stop {
            StopReason::Budget => Ok(outcome.design.outputs_raw().to_vec()),
            StopReason::FillThreshold => {
                Err(CliError::Evaluator("run stopped before its budget".into()))
            }
            StopReason::EvaluatorFailure(msg) => Err(CliError::Evaluator(msg)),
        }
    }
}

enum LhdKind {
    Random,
    Maximin,
}

/// One-shot Latin hypercube of the full budget, evaluated in row order.
struct LhdMethod {
    kind: LhdKind,
}

impl BenchMethod for LhdMethod {
    fn name(&self) -> &'static str {
        match self.kind {
            LhdKind::Random => "random_lhd",
            LhdKind::Maximin => "maximin_lhd",
        }
    }

    fn outputs(&self, task: &BenchTask) -> CliResult<Vec<Point>> {
        let mut problem = builtin_problem(task.config)?;
        let p = problem.input_dim();
        let mut rng = SeededRng::new(task.seed);
        let inputs = match self.kind {
            LhdKind::Random => random_lhd(task.config.n, p, &mut rng)?,
            LhdKind::Maximin => maximin_lhd(task.config.n, p, 1000, &mut rng)?,
        };
        inputs
            .iter()
            .map(|x| problem.evaluate(x).map_err(CliError::from))
            .collect()
    }
}

type MethodFactory = fn() -> Box<dyn BenchMethod>;

/// Name-keyed lookup of benchmarkable methods.
pub struct MethodRegistry {
    entries: BTreeMap<&'static str, MethodFactory>,
}

impl MethodRegistry {
    pub fn builtin() -> Self {
        let mut registry = MethodRegistry {
            entries: BTreeMap::new(),
        };
        registry.register("greedy", || Box::new(EngineMethod { method: "greedy" }));
        registry.register("ei", || Box::new(EngineMethod { method: "ei" }));
        registry.register("random_lhd", || Box::new(LhdMethod { kind: LhdKind::Random }));
        registry.register("maximin_lhd", || Box::new(LhdMethod { kind: LhdKind::Maximin }));
        registry
    }

    pub fn register(&mut self, name: &'static str, factory: MethodFactory) {
        self.entries.insert(name, factory);
    }

    pub fn create(&self, name: &str) -> CliResult<Box<dyn BenchMethod>> {
        match self.entries.get(name) {
            Some(factory) => Ok(factory()),
            None => Err(CliError::Config(format!(
                "unknown method `{name}`; known methods: {}",
                self.names().join(", ")
            ))),
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

/// Design sizes at which fills are recorded: every `every` points from n0,
/// plus the final size.
pub fn record_sizes(n: usize, n0: usize, every: usize) -> Vec<usize> {
    let mut sizes: Vec<usize> = (n0..=n).step_by(every.max(1)).collect();
    if sizes.last() != Some(&n) {
        sizes.push(n);
    }
    sizes
}

/// Dense sample of the problem's output set used as the fill yardstick.
///
/// The robot arm gets uniform targets in the radius-4 disk it is known to
/// cover. Two-input problems get an inclusive grid with about the requested
/// number of nodes; higher dimensions get scrambled Sobol inputs.
pub fn reference_outputs(spec: &str, requested: usize) -> CliResult<Vec<Point>> {
    if requested == 0 {
        return Err(CliError::Config("reference_points must be at least 1".into()));
    }
    let mut problem = ProblemRegistry::builtin().parse(spec)?;
    if problem.name() == "robot_arm" {
        return Ok(disk_targets(ROBOT_ARM_TARGETS));
    }
    let p = problem.input_dim();
    let inputs: Vec<Point> = if p == 2 {
        let side = ((requested as f64).sqrt().ceil() as usize).max(2);
        let mut grid = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                grid.push(Point::from(vec![
                    i as f64 / (side - 1) as f64,
                    j as f64 / (side - 1) as f64,
                ]));
            }
        }
        grid
    } else {
        scrambled_sobol(requested, p, &mut SeededRng::new(REFERENCE_SEED))?
    };
    inputs
        .iter()
        .map(|x| problem.evaluate(x).map_err(CliError::from))
        .collect()
}

fn disk_targets(count: usize) -> Vec<Point> {
    let mut rng = SeededRng::new(REFERENCE_SEED);
    (0..count)
        .map(|_| {
            let r = 4.0 * rng.random::<f64>().sqrt();
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            Point::from(vec![r * theta.cos(), r * theta.sin()])
        })
        .collect()
}

fn prefix_fills(
    method: &str,
    seed: u64,
    outputs: &[Point],
    reference: &[Point],
    sizes: &[usize],
) -> CliResult<Vec<BenchRow>> {
    sizes
        .iter()
        .map(|&n| {
            let fill = fill_distance(reference, &outputs[..n])?;
            Ok(BenchRow {
                method: method.to_string(),
                seed,
                n,
                fill,
            })
        })
        .collect()
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let threads = match std::env::var("OSFD_THREADS") {
        Ok(raw) => raw
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("OSFD_THREADS = `{raw}` is not a thread count")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))
}

/// All replications for the requested methods, as sorted long-format rows.
pub fn bench_rows(config: &RunConfig, reps: u64, methods: &[String]) -> CliResult<Vec<BenchRow>> {
    if reps == 0 {
        return Err(CliError::Config("reps must be at least 1".into()));
    }
    // Surface bad configs and unknown names before any replication runs.
    let (p, q) = config.dimensions()?;
    config.engine_config().validate(p, q)?;
    builtin_problem(config)?;
    let registry = MethodRegistry::builtin();
    let resolved: Vec<(String, Box<dyn BenchMethod>)> = methods
        .iter()
        .map(|name| registry.create(name).map(|m| (name.clone(), m)))
        .collect::<CliResult<_>>()?;

    let spec = config.problem.as_deref().expect("builtin problem checked above");
    let reference = reference_outputs(spec, config.reference_points)?;
    let sizes = record_sizes(config.n, config.n0, config.record_every);

    let jobs: Vec<(&str, &dyn BenchMethod, u64)> = resolved
        .iter()
        .flat_map(|(name, method)| {
            (1..=reps).map(move |seed| (name.as_str(), method.as_ref(), seed))
        })
        .collect();

    let mut rows: Vec<BenchRow> = thread_pool()?.install(|| {
        jobs.par_iter()
            .map(|&(name, method, seed)| {
                let outputs = method.outputs(&BenchTask { config, seed })?;
                prefix_fills(name, seed, &outputs, &reference, &sizes)
            })
            .collect::<CliResult<Vec<Vec<BenchRow>>>>()
    })?
    .into_iter()
    .flatten()
    .collect();

    rows.sort_by(|a, b| {
        (a.method.as_str(), a.seed, a.n).cmp(&(b.method.as_str(), b.seed, b.n))
    });
    Ok(rows)
}

pub fn write_rows(path: &Path, rows: &[BenchRow]) -> CliResult<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    writer
        .write_record(["method", "seed", "n", "fill"])
        .and_then(|_| {
            for row in rows {
                writer.write_record([
                    row.method.clone(),
                    row.seed.to_string(),
                    row.n.to_string(),
                    format_value(row.fill),
                ])?;
            }
            writer.flush().map_err(csv::Error::from)
        })
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

pub fn cmd_bench(
    config_path: &Path,
    reps: u64,
    methods: &[String],
    out_path: &Path,
) -> CliResult<()> {
    let config = RunConfig::load(config_path)?;
    let rows = bench_rows(&config, reps, methods)?;
    write_rows(out_path, &rows)?;
    eprintln!("wrote {} rows to {}", rows.len(), out_path.display());
    Ok(())
}
