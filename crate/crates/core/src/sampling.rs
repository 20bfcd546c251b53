//! Space-filling samplers: Latin hypercube designs, a maximin search over
//! them, scrambled Sobol sequences, and uniform ball sampling.
//!
//! Initial-design strategies are exposed behind [`InitialDesign`] and looked
//! up by name through [`InitRegistry`], so the engine and the CLI select them
//! from config strings.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geom::{dist, Point};
use crate::rng::SeededRng;

/// Random Latin hypercube design: `n` points in `[0,1)^p` with exactly one
/// point in each of the `n` equal-width strata of every dimension.
pub fn random_lhd(n: usize, p: usize, rng: &mut SeededRng) -> Result<Vec<Point>> {
    if n == 0 || p == 0 {
        return Err(Error::bad_argument(format!(
            "design needs n >= 1 and p >= 1, got n = {n}, p = {p}"
        )));
    }
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(p);
    for _ in 0..p {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        columns.push(
            strata
                .iter()
                .map(|&s| (s as f64 + rng.random::<f64>()) / n as f64)
                .collect(),
        );
    }
    Ok((0..n)
        .map(|i| (0..p).map(|j| columns[j][i]).collect())
        .collect())
}

/// Best of `iters` random Latin hypercubes by smallest pairwise distance.
/// Ties keep the earliest candidate, so the result is a pure function of the
/// stream state.
pub fn maximin_lhd(n: usize, p: usize, iters: usize, rng: &mut SeededRng) -> Result<Vec<Point>> {
    if iters == 0 {
        return Err(Error::bad_argument("maximin search needs iters >= 1"));
    }
    let mut best: Option<(Vec<Point>, f64)> = None;
    for _ in 0..iters {
        let cand = random_lhd(n, p, rng)?;
        let floor = best.as_ref().map_or(0.0, |(_, s)| *s);
        if let Some(score) = min_pairwise_above(&cand, floor) {
            best = Some((cand, score));
        }
    }
    Ok(best.expect("iters >= 1").0)
}

/// Minimum pairwise distance if it exceeds `floor`, else None. Bails out of
/// the scan as soon as the candidate is proven no better.
fn min_pairwise_above(points: &[Point], floor: f64) -> Option<f64> {
    let mut min = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = dist(&points[i], &points[j]);
            if d < min {
                min = d;
                if min <= floor {
                    return None;
                }
            }
        }
    }
    (min > floor).then_some(min)
}

/// Owen-scrambled Sobol points in `[0,1)^p`. One scramble seed is drawn from
/// the stream per call, so repeated calls give independently scrambled
/// sequences and identical stream states reproduce the same points.
///
/// The underlying generator indexes 2^16 points per scramble; longer requests
/// are served in chained blocks with per-block seeds, which keeps every block
/// a scrambled Sobol sequence in its own right.
pub fn scrambled_sobol(n: usize, p: usize, rng: &mut SeededRng) -> Result<Vec<Point>> {
    if p == 0 {
        return Err(Error::bad_argument("sobol sequence needs p >= 1"));
    }
    if p as u32 > sobol_burley::NUM_DIMENSIONS {
        return Err(Error::bad_argument(format!(
            "sobol sequence supports at most {} dimensions, got {p}",
            sobol_burley::NUM_DIMENSIONS
        )));
    }
    let seed = rng.next_u32();
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let block = (i >> 16) as u32;
        let index = (i & 0xFFFF) as u32;
        let block_seed = seed.wrapping_add(block.wrapping_mul(0x9E37_79B9));
        points.push(
            (0..p)
                .map(|j| sobol_burley::sample(index, j as u32, block_seed) as f64)
                .collect(),
        );
    }
    Ok(points)
}

/// Uniform sample from a ball of the given radius.
///
/// Without a basis the ball lives in the center's own space. With `basis`,
/// points are drawn from a lower-dimensional ball inside the affine subspace
/// `center + span(basis)`; the basis must be orthonormal. Radius zero returns
/// copies of the center.
pub fn uniform_ball(
    center: &[f64],
    radius: f64,
    count: usize,
    basis: Option<&[Point]>,
    rng: &mut SeededRng,
) -> Result<Vec<Point>> {
    if !radius.is_finite() || radius < 0.0 {
        return Err(Error::bad_argument(format!(
            "ball radius must be finite and >= 0, got {radius}"
        )));
    }
    let d = match basis {
        None => center.len(),
        Some(b) => {
            validate_orthonormal(b, center.len())?;
            b.len()
        }
    };
    if d == 0 {
        return Err(Error::bad_argument("ball dimension must be >= 1"));
    }
    if radius == 0.0 {
        return Ok((0..count).map(|_| Point(center.to_vec())).collect());
    }
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let local = ball_coords(d, radius, rng);
        let point: Point = match basis {
            None => center
                .iter()
                .zip(local.iter())
                .map(|(c, u)| c + u)
                .collect(),
            Some(b) => {
                let mut coords = center.to_vec();
                for (u, vec) in local.iter().zip(b.iter()) {
                    for (c, v) in coords.iter_mut().zip(vec.iter()) {
                        *c += u * v;
                    }
                }
                Point(coords)
            }
        };
        points.push(point);
    }
    Ok(points)
}

/// One uniform draw from the origin-centered d-ball: a normalized Gaussian
/// direction scaled by radius * U^(1/d).
fn ball_coords(d: usize, radius: f64, rng: &mut SeededRng) -> Vec<f64> {
    loop {
        let dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
            return dir.iter().map(|v| v / norm * r).collect();
        }
    }
}

fn validate_orthonormal(basis: &[Point], ambient: usize) -> Result<()> {
    if basis.is_empty() {
        return Err(Error::bad_argument("ball basis must not be empty"));
    }
    for v in basis {
        if v.dim() != ambient {
            return Err(Error::DimMismatch {
                expected: ambient,
                got: v.dim(),
            });
        }
    }
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let dot: f64 = basis[i].iter().zip(basis[j].iter()).map(|(a, b)| a * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            if (dot - want).abs() > 1e-9 {
                return Err(Error::bad_argument(format!(
                    "ball basis is not orthonormal: <b{i}, b{j}> = {dot}"
                )));
            }
        }
    }
    Ok(())
}

/// Strategy for generating the initial batch of design inputs.
pub trait InitialDesign {
    fn name(&self) -> &'static str;
    fn generate(&self, n: usize, p: usize, rng: &mut SeededRng) -> Result<Vec<Point>>;
}

/// Plain random Latin hypercube.
pub struct RandomLhd;

impl InitialDesign for RandomLhd {
    fn name(&self) -> &'static str {
        "random_lhd"
    }

    fn generate(&self, n: usize, p: usize, rng: &mut SeededRng) -> Result<Vec<Point>> {
        random_lhd(n, p, rng)
    }
}

/// Maximin-selected Latin hypercube.
pub struct MaximinLhd {
    pub iters: usize,
}

impl Default for MaximinLhd {
    fn default() -> Self {
        MaximinLhd { iters: 1000 }
    }
}

impl InitialDesign for MaximinLhd {
    fn name(&self) -> &'static str {
        "maximin_lhd"
    }

    fn generate(&self, n: usize, p: usize, rng: &mut SeededRng) -> Result<Vec<Point>> {
        maximin_lhd(n, p, self.iters, rng)
    }
}

type InitFactory = fn() -> Box<dyn InitialDesign>;

/// Name-keyed lookup of initial-design strategies.
pub struct InitRegistry {
    entries: BTreeMap<&'static str, InitFactory>,
}

impl InitRegistry {
    /// Registry with the built-in strategies.
    pub fn builtin() -> Self {
        let mut registry = InitRegistry {
            entries: BTreeMap::new(),
        };
        registry.register("random_lhd", || Box::new(RandomLhd));
        registry.register("maximin_lhd", || Box::new(MaximinLhd::default()));
        registry
    }

    pub fn register(&mut self, name: &'static str, factory: InitFactory) {
        self.entries.insert(name, factory);
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn InitialDesign>> {
        match self.entries.get(name) {
            Some(factory) => Ok(factory()),
            None => Err(Error::UnknownName {
                kind: "initial design",
                name: name.to_string(),
                known: self.names().join(", "),
            }),
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}
