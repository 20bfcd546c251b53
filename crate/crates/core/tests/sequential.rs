//! End-to-end checks of the sequential loop against the builtin problems.

use osfd_core::engine::{run_osfd, EngineConfig, EngineState, StopReason};
use osfd_core::fill_distance;
use osfd_core::testbed::ProblemRegistry;
use osfd_core::Point;

fn bits(points: &[Point]) -> Vec<Vec<u64>> {
    points.iter().map(|p| p.iter().map(|v| v.to_bits()).collect()).collect()
}

#[test]
fn ask_tell_matches_run_osfd_on_every_builtin_problem() {
    let specs = ["inverse_radius:eps=0.1", "exponential:alpha=10", "easom:p=3", "robot_arm"];
    for spec in specs {
        for method in ["greedy", "ei"] {
            let registry = ProblemRegistry::builtin();
            let config = EngineConfig::new(12, 5, method, 31);

            let mut direct_problem = registry.parse(spec).unwrap();
            let direct = run_osfd(direct_problem.as_mut(), config.clone()).unwrap();
            assert_eq!(direct.design.len(), 12);
            assert_eq!(direct.stop, StopReason::Budget);

            let mut stepped_problem = registry.parse(spec).unwrap();
            let p = stepped_problem.input_dim();
            let q = stepped_problem.output_dim();
            let mut state = EngineState::new(config, p, q).unwrap();
            while !state.is_complete() {
                let x = state.ask().unwrap().expect("no threshold configured");
                let y = stepped_problem.evaluate(&x).unwrap();
                state.tell(y).unwrap();
            }

            assert_eq!(
                bits(direct.design.inputs()),
                bits(state.design().inputs()),
                "{spec} with {method}"
            );
            assert_eq!(
                bits(direct.design.outputs_raw()),
                bits(state.design().outputs_raw()),
                "{spec} with {method}"
            );
            assert_eq!(direct.trace, state.trace());
        }
    }
}

/// The sequential points should fill the output region better than the
/// initial design they started from. A coarse grid image of the true output
/// region serves as the reference.
#[test]
fn greedy_improves_output_fill_over_the_initial_design() {
    let registry = ProblemRegistry::builtin();
    let mut reference = Vec::new();
    {
        let mut problem = registry.parse("inverse_radius:eps=0.1").unwrap();
        let grid = 60;
        for i in 0..grid {
            for j in 0..grid {
                let x = Point::from(vec![
                    i as f64 / (grid - 1) as f64,
                    j as f64 / (grid - 1) as f64,
                ]);
                reference.push(problem.evaluate(&x).unwrap());
            }
        }
    }

    let mut worse = 0;
    for seed in 1..=5u64 {
        let mut problem = registry.parse("inverse_radius:eps=0.1").unwrap();
        let outcome = run_osfd(problem.as_mut(), EngineConfig::new(40, 8, "greedy", seed)).unwrap();
        let initial: Vec<Point> = outcome.design.outputs_raw()[..8].to_vec();
        let fill_initial = fill_distance(&reference, &initial).unwrap();
        let fill_final = fill_distance(&reference, outcome.design.outputs_raw()).unwrap();
        assert!(fill_final <= fill_initial, "seed {seed}: adding points cannot hurt fill");
        if fill_final > 0.6 * fill_initial {
            worse += 1;
        }
    }
    assert!(worse <= 1, "sequential points should usually cut the gap well below the start");
}
