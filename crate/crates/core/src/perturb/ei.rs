//! Expected-improvement perturbation. A one-parameter variance model is fit
//! from nearest-neighbor differences of the local fill distances, and each
//! candidate is scored by the expected gain over the current largest gap.

use rand::Rng;
use statrs::function::erf::erfc;

use super::{check_common, check_record, greedy_perturbation_with, neighbor_depth, CandidateSet, CandidateSource};
use crate::design::Design;
use crate::error::{Error, Result};
use crate::filldist::FillRecord;
use crate::geom::{nearest_neighbors, Point};
use crate::rng::SeededRng;
use crate::sampling::uniform_ball;

/// Inputs to the improvement score: the fitted variance rate, the local fill
/// distance of every design point, and the value to improve on.
#[derive(Debug, Clone)]
pub struct EiModel {
    pub sigma2: f64,
    pub h: Vec<f64>,
    pub h_max: f64,
}

/// Variance rate of the response surrogate, fit by method of moments.
///
/// Each design point contributes (h_i - h_j)^2 / |x_i - x_j| with j its
/// nearest neighbor; the estimate is the mean over contributions. Points
/// whose nearest neighbor sits at distance zero are skipped, and the
/// estimate is zero when every point is skipped.
pub fn estimate_sigma2(inputs: &[Point], h: &[f64]) -> Result<f64> {
    let m = inputs.len();
    if m < 2 {
        return Err(Error::bad_argument(format!(
            "variance fit needs at least 2 points, have {m}"
        )));
    }
    if h.len() != m {
        return Err(Error::DimMismatch { expected: m, got: h.len() });
    }
    let mut sum = 0.0;
    let mut used = 0usize;
    for i in 0..m {
        let near = nearest_neighbors(&inputs[i], inputs, 1, Some(i))?;
        let j = near.indices[0];
        let denom = near.distances[0];
        if denom == 0.0 {
            continue;
        }
        let diff = h[i] - h[j];
        sum += diff * diff / denom;
        used += 1;
    }
    if used == 0 {
        return Ok(0.0);
    }
    Ok(sum / used as f64)
}

/// u * Phi(u) + phi(u), the standard normal partial expectation. Positive for
/// every finite u, approaching zero from above as u falls.
pub(crate) fn ei_gain(u: f64) -> f64 {
    let cdf = 0.5 * erfc(-u / std::f64::consts::SQRT_2);
    let pdf = (-0.5 * u * u).exp() / std::f64::consts::TAU.sqrt();
    u * cdf + pdf
}

/// Closed-form expected improvement of evaluating at `x`.
///
/// The response at `x` is modeled as normal around the fill distance of the
/// nearest design point, with variance sigma2 times the distance to it.
/// Zero spread (at a design point, or with a degenerate fit) scores zero.
pub fn expected_improvement(x: &[f64], design: &Design, model: &EiModel) -> Result<f64> {
    if design.is_empty() {
        return Err(Error::EmptyInput("design"));
    }
    if x.len() != design.input_dim() {
        return Err(Error::DimMismatch { expected: design.input_dim(), got: x.len() });
    }
    if model.h.len() != design.len() {
        return Err(Error::DimMismatch { expected: design.len(), got: model.h.len() });
    }
    if !model.sigma2.is_finite() || model.sigma2 < 0.0 {
        return Err(Error::bad_argument(format!(
            "sigma2 must be finite and >= 0, got {}",
            model.sigma2
        )));
    }
    let near = nearest_neighbors(x, design.inputs(), 1, None)?;
    let s = (model.sigma2 * near.distances[0]).sqrt();
    if s == 0.0 {
        return Ok(0.0);
    }
    let u = (model.h[near.indices[0]] - model.h_max) / s;
    Ok((s * ei_gain(u)).max(0.0))
}

/// Candidate pool for the improvement rule, all points inside the unit cube.
///
/// In order: a uniform cloud of 10m points, then for each neighborhood rank
/// j a ball around the gap input's j-th neighbor followed by the midpoints
/// of every design point with its own j-th neighbor, and finally a ball
/// around the gap input itself. Exact repeats are dropped, first kept.
pub fn ei_candidates(
    design: &Design,
    i_star: usize,
    k2: usize,
    rng: &mut SeededRng,
) -> Result<CandidateSet> {
    let p = design.input_dim();
    let m = design.len();
    let inputs = design.inputs();
    let x_star = &inputs[i_star];
    let near = nearest_neighbors(x_star, inputs, k2, Some(i_star))?;
    let neighbor_of: Vec<_> = (0..m)
        .map(|i| nearest_neighbors(&inputs[i], inputs, k2, Some(i)))
        .collect::<Result<_>>()?;

    let mut set = CandidateSet::new();
    for _ in 0..10 * m {
        let point: Point = (0..p).map(|_| rng.random::<f64>()).collect();
        set.push(point, CandidateSource::Uniform);
    }
    for j in 0..k2 {
        let center = &inputs[near.indices[j]];
        for point in uniform_ball(center, near.distances[j], 10 * p, None, rng)? {
            set.push_clipped(point, CandidateSource::Ball);
        }
        for i in 0..m {
            let other = &inputs[neighbor_of[i].indices[j]];
            let midpoint = inputs[i]
                .iter()
                .zip(other.iter())
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            set.push(midpoint, CandidateSource::Midpoint);
        }
    }
    for point in uniform_ball(x_star, near.distances[0], 10 * p, None, rng)? {
        set.push_clipped(point, CandidateSource::Ball);
    }
    set.dedup_exact();
    set.retain_new(design);
    Ok(set)
}

/// Improvement-guided proposal with the default neighborhood depth.
pub fn ei_perturbation(design: &Design, record: &FillRecord, rng: &mut SeededRng) -> Result<Point> {
    ei_perturbation_with(design, record, None, rng)
}

/// Falls back to the greedy rule when the variance fit degenerates to zero,
/// before any randomness is drawn, so the fallback matches a direct greedy
/// call on the same generator state.
pub fn ei_perturbation_with(
    design: &Design,
    record: &FillRecord,
    k2_override: Option<usize>,
    rng: &mut SeededRng,
) -> Result<Point> {
    check_common(design, record.i_star, k2_override)?;
    check_record(design, record)?;
    let sigma2 = estimate_sigma2(design.inputs(), &record.d)?;
    if sigma2 == 0.0 {
        return greedy_perturbation_with(design, record.i_star, k2_override, rng);
    }
    let k2 = neighbor_depth(design.input_dim(), design.len(), k2_override);
    let set = ei_candidates(design, record.i_star, k2, rng)?;
    if set.is_empty() {
        return Err(Error::Internal(
            "every improvement candidate coincided with an existing input".into(),
        ));
    }
    let model = EiModel { sigma2, h: record.d.clone(), h_max: record.global };
    let mut best: Option<(usize, f64)> = None;
    for (idx, candidate) in set.points.iter().enumerate() {
        let score = expected_improvement(candidate, design, &model)?;
        if best.map_or(true, |(_, bs)| score > bs) {
            best = Some((idx, score));
        }
    }
    let (idx, _) = best.expect("candidate set checked non-empty");
    Ok(set.points[idx].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::StandardNormal;

    const PHI_AT_ZERO: f64 = 0.3989422804014327;

    fn design_1d(coords: &[f64]) -> Design {
        let inputs: Vec<Point> = coords.iter().map(|&c| Point::from(vec![c])).collect();
        let outputs: Vec<Point> = coords.iter().map(|&c| Point::from(vec![2.0 * c])).collect();
        Design::from_pairs(inputs, outputs, 1, 1).unwrap()
    }

    fn random_design(m: usize, p: usize, seed: u64) -> Design {
        let mut rng = SeededRng::new(seed);
        let inputs = crate::sampling::random_lhd(m, p, &mut rng).unwrap();
        let outputs: Vec<Point> = inputs
            .iter()
            .map(|x| Point::from(vec![x.iter().sum::<f64>()]))
            .collect();
        Design::from_pairs(inputs, outputs, p, 1).unwrap()
    }

    #[test]
    fn sigma2_hand_example() {
        let inputs = vec![Point::from(vec![0.0]), Point::from(vec![1.0])];
        // Both points contribute (0.3)^2 / 1 = 0.09.
        let got = estimate_sigma2(&inputs, &[0.2, 0.5]).unwrap();
        assert!((got - 0.09).abs() < 1e-15, "{got}");
    }

    #[test]
    fn sigma2_zero_for_constant_h() {
        let inputs = vec![
            Point::from(vec![0.1, 0.2]),
            Point::from(vec![0.8, 0.3]),
            Point::from(vec![0.5, 0.9]),
        ];
        assert_eq!(estimate_sigma2(&inputs, &[0.4, 0.4, 0.4]).unwrap(), 0.0);
    }

    #[test]
    fn sigma2_skips_zero_distance_pairs() {
        let inputs = vec![
            Point::from(vec![0.0]),
            Point::from(vec![0.0]),
            Point::from(vec![1.0]),
        ];
        // The duplicate pair is skipped; the third point pairs with index 0
        // at distance 1, contributing (3 - 1)^2 = 4 as the only term.
        let got = estimate_sigma2(&inputs, &[1.0, 2.0, 3.0]).unwrap();
        assert!((got - 4.0).abs() < 1e-15, "{got}");
    }

    #[test]
    fn sigma2_zero_when_all_pairs_degenerate() {
        let inputs = vec![Point::from(vec![0.5]), Point::from(vec![0.5])];
        assert_eq!(estimate_sigma2(&inputs, &[0.1, 0.9]).unwrap(), 0.0);
    }

    #[test]
    fn sigma2_rejects_bad_shapes() {
        let inputs = vec![Point::from(vec![0.5])];
        assert!(estimate_sigma2(&inputs, &[0.1]).is_err());
        let inputs = vec![Point::from(vec![0.0]), Point::from(vec![1.0])];
        assert!(estimate_sigma2(&inputs, &[0.1]).is_err());
    }

    #[test]
    fn sigma2_scales_with_the_square_of_h() {
        let design = random_design(9, 2, 4);
        let h: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).sin().abs()).collect();
        let h3: Vec<f64> = h.iter().map(|v| 3.0 * v).collect();
        let base = estimate_sigma2(design.inputs(), &h).unwrap();
        let scaled = estimate_sigma2(design.inputs(), &h3).unwrap();
        assert!((scaled - 9.0 * base).abs() < 1e-12 * scaled.max(1.0));
    }

    #[test]
    fn ei_zero_at_a_design_point() {
        let design = design_1d(&[0.0, 1.0]);
        let model = EiModel { sigma2: 1.0, h: vec![0.5, 0.2], h_max: 0.5 };
        let got = expected_improvement(&[1.0], &design, &model).unwrap();
        assert_eq!(got, 0.0);
    }

    #[test]
    fn ei_zero_when_variance_is_zero() {
        let design = design_1d(&[0.0, 1.0]);
        let model = EiModel { sigma2: 0.0, h: vec![0.5, 0.2], h_max: 0.5 };
        assert_eq!(expected_improvement(&[0.3], &design, &model).unwrap(), 0.0);
    }

    #[test]
    fn ei_hand_value_where_u_is_zero() {
        let design = design_1d(&[0.0, 1.0]);
        let model = EiModel { sigma2: 1.0, h: vec![0.5, 0.2], h_max: 0.5 };
        // Nearest point is index 0 at distance 0.25, so s = 0.5 and u = 0,
        // leaving EI = s * phi(0).
        let got = expected_improvement(&[0.25], &design, &model).unwrap();
        assert!((got - 0.5 * PHI_AT_ZERO).abs() < 1e-15, "{got}");
    }

    #[test]
    fn ei_hand_ranking_over_three_candidates() {
        let design = design_1d(&[0.0, 1.0]);
        let model = EiModel { sigma2: 1.0, h: vec![0.4, 0.1], h_max: 0.4 };
        let candidates = [[0.1], [0.3], [0.9]];
        let scores: Vec<f64> = candidates
            .iter()
            .map(|c| expected_improvement(c, &design, &model).unwrap())
            .collect();
        // 0.1 and 0.3 sit at u = 0 next to the best point, so the further
        // one wins on spread alone; 0.9 is next to the worse point.
        let expected_best = 0.5477225575051661 * PHI_AT_ZERO;
        assert!((scores[1] - expected_best).abs() < 1e-12, "{}", scores[1]);
        assert!(scores[1] > scores[0] && scores[1] > scores[2]);
    }

    #[test]
    fn ei_grows_with_distance_when_u_stays_zero() {
        let design = design_1d(&[0.0, 1.0]);
        let model = EiModel { sigma2: 0.7, h: vec![0.6, 0.6], h_max: 0.6 };
        let mut last = 0.0;
        for step in 1..=9 {
            let x = [0.05 * step as f64];
            let got = expected_improvement(&x, &design, &model).unwrap();
            assert!(got > last, "EI should grow with spread at u = 0");
            last = got;
        }
    }

    #[test]
    fn ei_gain_positive_across_the_useful_range() {
        let mut u = -10.0;
        while u <= 10.0 {
            assert!(ei_gain(u) > 0.0, "gain at u = {u}");
            u += 0.25;
        }
        assert!((ei_gain(0.0) - PHI_AT_ZERO).abs() < 1e-15);
    }

    #[test]
    fn ei_matches_monte_carlo() {
        for seed in [2u64, 5, 8] {
            let design = random_design(5, 2, seed);
            let h: Vec<f64> = (0..5).map(|i| 0.1 + 0.08 * i as f64).collect();
            let h_max = 0.42;
            let model = EiModel { sigma2: 0.8, h: h.clone(), h_max };
            let mut pick = SeededRng::new(seed ^ 0x55AA);
            // Keep u moderate so a million draws resolve the mean well.
            let x = loop {
                let x: Vec<f64> = (0..2).map(|_| pick.random::<f64>()).collect();
                let near = nearest_neighbors(&x, design.inputs(), 1, None).unwrap();
                let s = (model.sigma2 * near.distances[0]).sqrt();
                if s == 0.0 {
                    continue;
                }
                let u = (h[near.indices[0]] - h_max) / s;
                if (-1.5..=0.5).contains(&u) {
                    break x;
                }
            };
            let closed = expected_improvement(&x, &design, &model).unwrap();

            let near = nearest_neighbors(&x, design.inputs(), 1, None).unwrap();
            let s = (model.sigma2 * near.distances[0]).sqrt();
            let center = h[near.indices[0]];
            let mut mc_rng = SeededRng::new(seed.wrapping_mul(31) + 7);
            let n = 1_000_000;
            let mut acc = 0.0;
            for _ in 0..n {
                let z: f64 = mc_rng.sample(StandardNormal);
                acc += (center + s * z - h_max).max(0.0);
            }
            let mc = acc / n as f64;
            let tol = 0.02 * closed.max(1e-6);
            assert!((closed - mc).abs() < tol, "seed {seed}: closed {closed} vs mc {mc}");
        }
    }

    #[test]
    fn candidate_pool_structure_on_a_hand_design() {
        let design = design_1d(&[0.0, 0.4, 1.0]);
        let mut rng = SeededRng::new(13);
        // k2 = min(2p, m - 1) = 2 for this design.
        let set = ei_candidates(&design, 0, 2, &mut rng).unwrap();
        let midpoints: Vec<f64> = set
            .points
            .iter()
            .zip(&set.sources)
            .filter(|(_, s)| **s == CandidateSource::Midpoint)
            .map(|(point, _)| point[0])
            .collect();
        // Rank 1 pairs give 0.2 (twice, deduped) and 0.7; rank 2 pairs give
        // 0.5 (twice, deduped) and 0.7 again, already seen.
        assert_eq!(midpoints.len(), 3);
        assert!((midpoints[0] - 0.2).abs() < 1e-15);
        assert!((midpoints[1] - 0.7).abs() < 1e-15);
        assert!((midpoints[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn candidate_pool_counts_and_containment() {
        let design = random_design(6, 2, 17);
        let mut rng = SeededRng::new(23);
        let k2 = 4;
        let set = ei_candidates(&design, 1, k2, &mut rng).unwrap();
        let count = |tag: CandidateSource| set.sources.iter().filter(|s| **s == tag).count();
        assert_eq!(count(CandidateSource::Uniform), 60);
        // Ball draws that clamp onto the same boundary point collapse under
        // dedup, so the count can fall a little short of the 100 drawn.
        let balls = count(CandidateSource::Ball);
        assert!(balls >= 80 && balls <= 100, "{balls}");
        let midpoints = count(CandidateSource::Midpoint);
        assert!(midpoints >= 12 && midpoints <= 24, "{midpoints}");
        assert_eq!(count(CandidateSource::SobolBox), 0);
        for point in &set.points {
            assert!(point.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        let keys: std::collections::HashSet<Vec<u64>> =
            set.points.iter().map(|point| crate::geom::coord_key(point)).collect();
        assert_eq!(keys.len(), set.len(), "pool must be free of exact repeats");
    }

    #[test]
    fn proposal_is_the_ei_argmax_over_the_pool() {
        let design = random_design(7, 2, 31);
        let d: Vec<f64> = (0..7).map(|i| 0.05 * (i + 1) as f64).collect();
        let record = FillRecord { d: d.clone(), i_star: 6, global: 0.35 };
        let proposal = ei_perturbation(&design, &record, &mut SeededRng::new(41)).unwrap();

        let sigma2 = estimate_sigma2(design.inputs(), &d).unwrap();
        assert!(sigma2 > 0.0);
        let mut rng = SeededRng::new(41);
        let set = ei_candidates(&design, 6, 4, &mut rng).unwrap();
        let model = EiModel { sigma2, h: d, h_max: 0.35 };
        let mut best = (0usize, f64::NEG_INFINITY);
        for (idx, c) in set.points.iter().enumerate() {
            let score = expected_improvement(c, &design, &model).unwrap();
            if score > best.1 {
                best = (idx, score);
            }
        }
        assert_eq!(proposal.0, set.points[best.0].0);
    }

    #[test]
    fn degenerate_variance_falls_back_to_greedy_exactly() {
        let design = random_design(6, 2, 19);
        let record = FillRecord { d: vec![0.3; 6], i_star: 2, global: 0.3 };
        let via_ei = ei_perturbation(&design, &record, &mut SeededRng::new(5)).unwrap();
        let via_greedy =
            crate::perturb::greedy_perturbation(&design, 2, &mut SeededRng::new(5)).unwrap();
        assert_eq!(via_ei.0, via_greedy.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn proposal_in_cube_and_distinct_from_design(
            seed in 0u64..1000,
            m in 2usize..10,
            p in 1usize..4,
        ) {
            let design = random_design(m, p, seed);
            let i_star = (seed as usize) % m;
            let d: Vec<f64> = (0..m).map(|i| 0.1 + 0.01 * ((seed as usize + i) % 7) as f64).collect();
            let global = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let record = FillRecord { d, i_star, global };
            let mut rng = SeededRng::new(seed ^ 0x77);
            let proposal = ei_perturbation(&design, &record, &mut rng).unwrap();
            prop_assert_eq!(proposal.dim(), p);
            prop_assert!(proposal.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert!(!design.contains_input(&proposal));
        }
    }
}
