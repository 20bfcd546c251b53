//! Distance-greedy perturbation: move into the Voronoi cell of the gap input
//! and get as far from it as the candidate set allows.

use super::{check_common, neighbor_depth, CandidateSet, CandidateSource};
use crate::design::Design;
use crate::error::{Error, Result};
use crate::geom::{assign_to_nearest, dist, nearest_neighbors, Point};
use crate::rng::SeededRng;
use crate::sampling::{scrambled_sobol, uniform_ball};

/// Candidate pool for the greedy rule, all points inside the unit cube.
///
/// Three constructions around the gap input `x* = inputs[i_star]`:
/// a scrambled Sobol cloud in the box `x* +- r` (r the distance to the
/// k2-th neighbor) intersected with the cube, a ball around each of the k2
/// nearest neighbors with radius equal to that neighbor's distance, and a
/// ball around `x*` itself with the nearest-neighbor radius. Ball draws are
/// clipped coordinate-wise; the box cloud needs no clipping by construction.
pub fn greedy_candidates(
    design: &Design,
    i_star: usize,
    k2: usize,
    rng: &mut SeededRng,
) -> Result<CandidateSet> {
    let p = design.input_dim();
    let inputs = design.inputs();
    let x_star = &inputs[i_star];
    let near = nearest_neighbors(x_star, inputs, k2, Some(i_star))?;
    let r_box = near.distances[k2 - 1];

    let mut set = CandidateSet::new();
    let lo: Vec<f64> = x_star.iter().map(|v| (v - r_box).max(0.0)).collect();
    let hi: Vec<f64> = x_star.iter().map(|v| (v + r_box).min(1.0)).collect();
    for u in scrambled_sobol(10 * p * (k2 + 1), p, rng)? {
        let point = lo
            .iter()
            .zip(hi.iter())
            .zip(u.iter())
            .map(|((&l, &h), &t)| l + t * (h - l))
            .collect();
        set.push(point, CandidateSource::SobolBox);
    }
    for j in 0..k2 {
        let center = &inputs[near.indices[j]];
        for point in uniform_ball(center, near.distances[j], 10 * p, None, rng)? {
            set.push_clipped(point, CandidateSource::Ball);
        }
    }
    for point in uniform_ball(x_star, near.distances[0], 10 * p, None, rng)? {
        set.push_clipped(point, CandidateSource::Ball);
    }
    set.retain_new(design);
    Ok(set)
}

/// Among `candidates`, the one furthest from `inputs[i_star]` subject to
/// lying in that input's Voronoi cell. Ties on cell ownership go to the
/// lowest input index, ties on distance to the lowest candidate index.
/// `None` when no candidate lands in the cell.
pub fn select_furthest_in_cell(
    candidates: &[Point],
    inputs: &[Point],
    i_star: usize,
) -> Option<usize> {
    let owners = assign_to_nearest(candidates, inputs).ok()?;
    let x_star = &inputs[i_star];
    let mut best: Option<(usize, f64)> = None;
    for (idx, owner) in owners.iter().enumerate() {
        if *owner != i_star {
            continue;
        }
        let d = dist(&candidates[idx], x_star);
        if best.map_or(true, |(_, bd)| d > bd) {
            best = Some((idx, d));
        }
    }
    best.map(|(idx, _)| idx)
}

/// Fallback when the cell is empty: the candidate whose nearest design input
/// is furthest away. Ties go to the lowest candidate index.
pub fn most_isolated(candidates: &[Point], inputs: &[Point]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (idx, candidate) in candidates.iter().enumerate() {
        let separation = inputs
            .iter()
            .map(|x| dist(candidate, x))
            .fold(f64::INFINITY, f64::min);
        if best.map_or(true, |(_, bd)| separation > bd) {
            best = Some((idx, separation));
        }
    }
    best.map(|(idx, _)| idx)
}

/// Greedy proposal with the default neighborhood depth `min(2p, m - 1)`.
pub fn greedy_perturbation(design: &Design, i_star: usize, rng: &mut SeededRng) -> Result<Point> {
    greedy_perturbation_with(design, i_star, None, rng)
}

pub fn greedy_perturbation_with(
    design: &Design,
    i_star: usize,
    k2_override: Option<usize>,
    rng: &mut SeededRng,
) -> Result<Point> {
    check_common(design, i_star, k2_override)?;
    let k2 = neighbor_depth(design.input_dim(), design.len(), k2_override);
    let set = greedy_candidates(design, i_star, k2, rng)?;
    if set.is_empty() {
        return Err(Error::Internal(
            "every greedy candidate coincided with an existing input".into(),
        ));
    }
    let inputs = design.inputs();
    let chosen = match select_furthest_in_cell(&set.points, inputs, i_star) {
        Some(idx) => idx,
        None => most_isolated(&set.points, inputs)
            .ok_or_else(|| Error::Internal("isolation fallback on empty candidate set".into()))?,
    };
    Ok(set.points[chosen].clone())
}
