//! Sequential design of computer experiments aimed at filling the *output*
//! space of a black-box function rather than its input space.
//!
//! Given an expensive function `f: [0,1]^p -> R^q` whose image is unknown,
//! the engine picks inputs one at a time so that the observed outputs spread
//! evenly over the attainable output region. Each step estimates where the
//! largest gap between observed outputs lies, then perturbs the input whose
//! output sits closest to that gap. Two selection strategies are provided:
//! a greedy rule that moves as far as possible within the chosen point's
//! input neighborhood, and an expected-improvement rule that trades off gap
//! size against model uncertainty.
//!
//! The crate is deterministic end to end: every stochastic choice flows from
//! a single seeded stream, and all distance ties resolve toward the lowest
//! index, so a (config, seed) pair always reproduces the same design.

pub mod approx;
pub mod design;
pub mod engine;
pub mod error;
pub mod filldist;
pub mod geom;
pub mod perturb;
pub mod rng;
pub mod sampling;
pub mod testbed;

pub use design::Design;
pub use engine::{run_osfd, EngineConfig, EngineState, Evaluator, RunOutcome, StopReason};
pub use error::{Error, Result};
pub use geom::{fill_distance, Point};
pub use rng::SeededRng;
