//! Perturbation strategies that propose the next input point.
//!
//! Both strategies build a finite candidate set in the unit cube and pick one
//! candidate by a score. `greedy` pushes straight into the Voronoi cell of the
//! input whose output owns the largest gap; `ei` weighs distance gain by an
//! expected-improvement score under a crude local variance model.

mod ei;
mod greedy;

pub use ei::{ei_candidates, ei_perturbation, ei_perturbation_with, estimate_sigma2, expected_improvement, EiModel};
pub use greedy::{
    greedy_candidates, greedy_perturbation, greedy_perturbation_with, most_isolated,
    select_furthest_in_cell,
};

use std::collections::BTreeMap;
use std::collections::HashSet;

use crate::design::Design;
use crate::error::{Error, Result};
use crate::filldist::FillRecord;
use crate::geom::{coord_key, Point};
use crate::rng::SeededRng;

/// Which construction produced a candidate. Kept alongside the points so
/// tests can check the mix, not used by the selection rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateSource {
    /// Quasi-random points in the local bounding box around the gap input.
    SobolBox,
    /// Uniform draw from a ball around a design input.
    Ball,
    /// Midpoint between a design input and one of its neighbors.
    Midpoint,
    /// Uniform draw from the whole unit cube.
    Uniform,
}

/// Candidate inputs plus the construction each one came from.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub points: Vec<Point>,
    pub sources: Vec<CandidateSource>,
}

impl CandidateSet {
    fn new() -> Self {
        CandidateSet { points: Vec::new(), sources: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn push(&mut self, point: Point, source: CandidateSource) {
        self.points.push(point);
        self.sources.push(source);
    }

    fn push_clipped(&mut self, point: Point, source: CandidateSource) {
        self.push(clip_unit(point), source);
    }

    /// Drop candidates that coincide with an existing design input, comparing
    /// exact coordinates. Keeps order otherwise.
    fn retain_new(&mut self, design: &Design) {
        let mut points = Vec::with_capacity(self.points.len());
        let mut sources = Vec::with_capacity(self.sources.len());
        for (point, source) in self.points.drain(..).zip(self.sources.drain(..)) {
            if !design.contains_input(&point) {
                points.push(point);
                sources.push(source);
            }
        }
        self.points = points;
        self.sources = sources;
    }

    /// Drop exact repeats within the set, keeping the first occurrence.
    fn dedup_exact(&mut self) {
        let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(self.points.len());
        let mut points = Vec::with_capacity(self.points.len());
        let mut sources = Vec::with_capacity(self.sources.len());
        for (point, source) in self.points.drain(..).zip(self.sources.drain(..)) {
            if seen.insert(coord_key(&point)) {
                points.push(point);
                sources.push(source);
            }
        }
        self.points = points;
        self.sources = sources;
    }
}

/// Clamp every coordinate into [0, 1].
pub fn clip_unit(point: Point) -> Point {
    point.iter().map(|v| v.clamp(0.0, 1.0)).collect()
}

/// Neighborhood depth used by both strategies: 2p capped so a neighbor
/// always exists. Overrides below 1 are rejected by the callers.
fn neighbor_depth(p: usize, m: usize, k2_override: Option<usize>) -> usize {
    k2_override.unwrap_or(2 * p).min(m - 1)
}

fn check_common(design: &Design, i_star: usize, k2_override: Option<usize>) -> Result<()> {
    if design.len() < 2 {
        return Err(Error::bad_argument(format!(
            "perturbation needs at least 2 design points, have {}",
            design.len()
        )));
    }
    if i_star >= design.len() {
        return Err(Error::bad_argument(format!(
            "gap index {} out of range for design of {}",
            i_star,
            design.len()
        )));
    }
    if k2_override == Some(0) {
        return Err(Error::bad_argument("k2 override must be at least 1"));
    }
    Ok(())
}

/// One perturbation rule behind a common interface. `propose` must leave the
/// design untouched and draw randomness only from `rng`.
pub trait Perturbation {
    fn name(&self) -> &'static str;
    fn propose(&self, design: &Design, record: &FillRecord, rng: &mut SeededRng) -> Result<Point>;
}

/// Knobs shared by the built-in strategies.
#[derive(Debug, Clone, Copy, Default)]
pub struct PerturbOptions {
    pub k2_override: Option<usize>,
}

pub struct GreedyPerturbation {
    options: PerturbOptions,
}

impl GreedyPerturbation {
    pub fn new(options: PerturbOptions) -> Self {
        GreedyPerturbation { options }
    }
}

impl Perturbation for GreedyPerturbation {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn propose(&self, design: &Design, record: &FillRecord, rng: &mut SeededRng) -> Result<Point> {
        check_record(design, record)?;
        greedy_perturbation_with(design, record.i_star, self.options.k2_override, rng)
    }
}

pub struct EiPerturbation {
    options: PerturbOptions,
}

impl EiPerturbation {
    pub fn new(options: PerturbOptions) -> Self {
        EiPerturbation { options }
    }
}

impl Perturbation for EiPerturbation {
    fn name(&self) -> &'static str {
        "ei"
    }

    fn propose(&self, design: &Design, record: &FillRecord, rng: &mut SeededRng) -> Result<Point> {
        check_record(design, record)?;
        ei_perturbation_with(design, record, self.options.k2_override, rng)
    }
}

fn check_record(design: &Design, record: &FillRecord) -> Result<()> {
    if record.d.len() != design.len() {
        return Err(Error::bad_argument(format!(
            "fill record covers {} outputs but design has {}",
            record.d.len(),
            design.len()
        )));
    }
    Ok(())
}

type PerturbFactory = fn(PerturbOptions) -> Box<dyn Perturbation>;

/// Name-keyed registry of perturbation strategies. Deterministic iteration
/// order so listings are stable.
pub struct PerturbRegistry {
    entries: BTreeMap<&'static str, PerturbFactory>,
}

impl PerturbRegistry {
    pub fn empty() -> Self {
        PerturbRegistry { entries: BTreeMap::new() }
    }

    /// Registry with the built-in strategies.
    pub fn builtin() -> Self {
        let mut registry = Self::empty();
        registry.register("greedy", |options| Box::new(GreedyPerturbation::new(options)));
        registry.register("ei", |options| Box::new(EiPerturbation::new(options)));
        registry
    }

    pub fn register(&mut self, name: &'static str, factory: PerturbFactory) {
        self.entries.insert(name, factory);
    }

    pub fn create(&self, name: &str, options: PerturbOptions) -> Result<Box<dyn Perturbation>> {
        match self.entries.get(name) {
            Some(factory) => Ok(factory(options)),
            None => Err(Error::UnknownName {
                kind: "perturbation",
                name: name.to_string(),
                known: self.names().join(", "),
            }),
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}
