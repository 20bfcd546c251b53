//! Approximate local fill distances over the observed outputs.
//!
//! The true local fill distance of an output is the farthest you can get from
//! it while staying inside its Voronoi cell of the (unknown) output region.
//! With the region replaced by a finite probe set, each probe is assigned to
//! its nearest output and the per-output maximum assigned distance stands in
//! for that quantity. The output with the largest value marks the biggest
//! estimated gap and is the one worth perturbing next.

use crate::design::Design;
use crate::error::{Error, Result};
use crate::geom::{assign_to_nearest, dist, Point};

/// Per-output local fill distance estimates, in the units of whatever output
/// set they were computed from (the engine passes scaled outputs).
#[derive(Debug, Clone, PartialEq)]
pub struct FillRecord {
    /// d[i] = farthest assigned probe for output i, 0 when none assigned.
    pub d: Vec<f64>,
    /// argmax of d, lowest index on ties.
    pub i_star: usize,
    /// d[i_star].
    pub global: f64,
}

/// Assigns every probe to its nearest output and takes per-output maxima.
pub fn local_fill_distances(outputs: &[Point], probes: &[Point]) -> Result<FillRecord> {
    if outputs.is_empty() {
        return Err(Error::EmptyInput("output set"));
    }
    if probes.is_empty() {
        return Err(Error::EmptyInput("probe set"));
    }
    let assignment = assign_to_nearest(probes, outputs)?;
    let mut d = vec![0.0f64; outputs.len()];
    for (probe, &owner) in probes.iter().zip(assignment.iter()) {
        let dd = dist(probe, &outputs[owner]);
        if dd > d[owner] {
            d[owner] = dd;
        }
    }
    let mut i_star = 0usize;
    for (i, &v) in d.iter().enumerate() {
        if v > d[i_star] {
            i_star = i;
        }
    }
    let global = d[i_star];
    Ok(FillRecord { d, i_star, global })
}

/// The input/output pair sitting at the largest estimated gap.
pub fn gap_point(record: &FillRecord, design: &Design) -> Result<(Point, Point)> {
    if record.d.len() != design.len() || record.i_star >= design.len() {
        return Err(Error::Internal(format!(
            "fill record for {} outputs applied to a design of {}",
            record.d.len(),
            design.len()
        )));
    }
    Ok((
        design.inputs()[record.i_star].clone(),
        design.outputs_raw()[record.i_star].clone(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::approx_gen;
    use crate::geom::fill_distance;
    use crate::rng::SeededRng;
    use proptest::prelude::*;
    use rand::Rng;

    fn pts(coords: &[&[f64]]) -> Vec<Point> {
        coords.iter().map(|c| Point(c.to_vec())).collect()
    }

    #[test]
    fn hand_assignment_on_a_segment() {
        let outputs = pts(&[&[0.0], &[1.0]]);
        let probes = pts(&[&[-0.5], &[0.4], &[0.6], &[1.5]]);
        let record = local_fill_distances(&outputs, &probes).unwrap();
        assert_eq!(record.d, vec![0.5, 0.5]);
        assert_eq!(record.i_star, 0, "max tie must break to the lower index");
        assert_eq!(record.global, 0.5);
    }

    #[test]
    fn probes_equal_to_outputs_leave_no_gap() {
        let outputs = pts(&[&[0.1, 0.9], &[0.7, 0.3], &[0.5, 0.5]]);
        let record = local_fill_distances(&outputs, &outputs.clone()).unwrap();
        assert_eq!(record.d, vec![0.0; 3]);
    }

    #[test]
    fn unassigned_outputs_report_zero() {
        let outputs = pts(&[&[0.0], &[10.0]]);
        let probes = pts(&[&[0.1]]);
        let record = local_fill_distances(&outputs, &probes).unwrap();
        assert!((record.d[0] - 0.1).abs() < 1e-15);
        assert_eq!(record.d[1], 0.0);
        assert_eq!(record.i_star, 0);
    }

    #[test]
    fn rejects_empty_sets() {
        let some = pts(&[&[0.0]]);
        assert!(local_fill_distances(&[], &some).is_err());
        assert!(local_fill_distances(&some, &[]).is_err());
    }

    // Oracle: the spelled-out O(|probes| * m) double loop.
    fn record_oracle(outputs: &[Point], probes: &[Point]) -> (Vec<f64>, usize) {
        let mut d = vec![0.0f64; outputs.len()];
        for probe in probes {
            let mut owner = 0usize;
            let mut best = f64::INFINITY;
            for (i, y) in outputs.iter().enumerate() {
                let dd = dist(probe, y);
                if dd < best {
                    best = dd;
                    owner = i;
                }
            }
            if best > d[owner] {
                d[owner] = best;
            }
        }
        let mut i_star = 0usize;
        for i in 0..d.len() {
            if d[i] > d[i_star] {
                i_star = i;
            }
        }
        (d, i_star)
    }

    #[test]
    fn matches_brute_force_bit_for_bit() {
        let mut rng = SeededRng::new(21);
        for _ in 0..20 {
            let m = rng.random_range(1..40);
            let n = rng.random_range(1..400);
            let outputs: Vec<Point> = (0..m)
                .map(|_| (0..2).map(|_| rng.random::<f64>()).collect())
                .collect();
            let probes: Vec<Point> = (0..n)
                .map(|_| (0..2).map(|_| rng.random::<f64>() * 1.4 - 0.2).collect())
                .collect();
            let record = local_fill_distances(&outputs, &probes).unwrap();
            let (d, i_star) = record_oracle(&outputs, &probes);
            assert!(record.d.iter().zip(d.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
            assert_eq!(record.i_star, i_star);
        }
    }

    // Calibration against the real fill distance: for grid outputs with
    // generated probes, the estimate must land within a factor two of the
    // fill distance measured against a dense sample of the square.
    #[test]
    fn estimate_within_factor_two_on_unit_square() {
        let side = 6;
        let outputs: Vec<Point> = (0..side)
            .flat_map(|i| {
                (0..side).map(move |j| {
                    Point(vec![
                        i as f64 / (side - 1) as f64,
                        j as f64 / (side - 1) as f64,
                    ])
                })
            })
            .collect();
        let mut rng = SeededRng::new(31);
        let probes = approx_gen(&outputs, 2, 2, &mut rng).unwrap();
        let record = local_fill_distances(&outputs, &probes.points).unwrap();

        let dense: Vec<Point> = (0..60)
            .flat_map(|i| (0..60).map(move |j| Point(vec![i as f64 / 59.0, j as f64 / 59.0])))
            .collect();
        let truth = fill_distance(&dense, &outputs).unwrap();
        assert!(
            record.global >= truth / 2.0 && record.global <= truth * 2.0,
            "estimate {} vs dense fill {truth}",
            record.global
        );
    }

    #[test]
    fn gap_point_returns_pair_at_i_star() {
        let design = Design::from_pairs(
            pts(&[&[0.1], &[0.5], &[0.9]]),
            pts(&[&[1.0], &[2.0], &[3.0]]),
            1,
            1,
        )
        .unwrap();
        let record = FillRecord {
            d: vec![0.1, 0.5, 0.3],
            i_star: 1,
            global: 0.5,
        };
        let (x, y) = gap_point(&record, &design).unwrap();
        assert_eq!(x, Point(vec![0.5]));
        assert_eq!(y, Point(vec![2.0]));
    }

    #[test]
    fn gap_point_rejects_mismatched_record() {
        let design = Design::from_pairs(pts(&[&[0.1]]), pts(&[&[1.0]]), 1, 1).unwrap();
        let record = FillRecord {
            d: vec![0.1, 0.2],
            i_star: 1,
            global: 0.2,
        };
        assert!(gap_point(&record, &design).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn assignment_partitions_probes(
            outputs in prop::collection::vec(
                prop::collection::vec(0.0f64..1.0, 2).prop_map(Point), 1..10),
            probes in prop::collection::vec(
                prop::collection::vec(0.0f64..1.0, 2).prop_map(Point), 1..50),
        ) {
            let assignment = assign_to_nearest(&probes, &outputs).unwrap();
            prop_assert_eq!(assignment.len(), probes.len());
            let record = local_fill_distances(&outputs, &probes).unwrap();
            prop_assert_eq!(record.global, record.d[record.i_star]);
            for (i, &v) in record.d.iter().enumerate() {
                prop_assert!(v >= 0.0);
                // Everything before i_star must lose strictly, or the tie
                // would have broken earlier.
                if i < record.i_star {
                    prop_assert!(v < record.global);
                }
            }
        }
    }
}
