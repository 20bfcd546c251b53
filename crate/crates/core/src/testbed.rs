//! Built-in analytic test problems on the unit hypercube.
//!
//! Each problem is available as a pure function and as an `Evaluator` for
//! the engine. The registry turns spec strings like `inverse_radius:eps=0.1`
//! or `easom:p=8` into ready-to-run problem objects.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::engine::Evaluator;
use crate::error::{Error, Result};
use crate::geom::Point;

/// Radius blows up near the origin, angle sweeps the first quadrant. The
/// output region is a thin curved band, which makes input-space designs
/// cluster badly in output space.
pub fn inverse_radius(x: &[f64], eps: f64) -> Result<Point> {
    if x.len() != 2 {
        return Err(Error::DimMismatch { expected: 2, got: x.len() });
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::bad_argument(format!("eps must be positive, got {eps}")));
    }
    let radius = 1.0 / (x[0] * x[0] + x[1] * x[1] + eps * eps).sqrt();
    // Two-argument angle: equals arctan(x2/x1) away from the axis, continues
    // to pi/2 at x1 = 0 and to 0 at the origin.
    let angle = x[1].atan2(x[0]);
    Ok(Point::from(vec![radius, angle]))
}

/// Three exponentially squashed sums with increasingly harsh decay rates.
pub fn exponential(x: &[f64], alpha: f64) -> Result<Point> {
    if x.len() != 2 {
        return Err(Error::DimMismatch { expected: 2, got: x.len() });
    }
    if !alpha.is_finite() {
        return Err(Error::bad_argument(format!("alpha must be finite, got {alpha}")));
    }
    let pair = |rate: f64| (-rate * x[0]).exp() + (-rate * x[1]).exp();
    Ok(Point::from(vec![pair(alpha), pair(2.0 * alpha), pair(4.0 * alpha)]))
}

/// Product of cosine ridges under a Gaussian envelope, scalar output. The
/// envelope sharpness is split across coordinates so the function stays
/// comparable as the dimension grows.
pub fn easom(x: &[f64]) -> Result<Point> {
    if x.is_empty() {
        return Err(Error::EmptyInput("easom input"));
    }
    let p = x.len() as f64;
    let mut value = 1.0;
    for &v in x {
        let centered = 2.0 * v - 1.0;
        value *= (2.0 * PI * v).cos() * (-PI * PI * centered * centered / p).exp();
    }
    Ok(Point::from(vec![value]))
}

/// Planar end position of a four-segment arm. The first four coordinates are
/// segment lengths in [0,1], the last four are joint angles scaled to
/// [0, 2pi]; angles accumulate along the arm.
pub fn robot_arm(u: &[f64]) -> Result<Point> {
    if u.len() != 8 {
        return Err(Error::DimMismatch { expected: 8, got: u.len() });
    }
    let mut angle = 0.0;
    let mut x = 0.0;
    let mut y = 0.0;
    for i in 0..4 {
        angle += 2.0 * PI * u[4 + i];
        x += u[i] * angle.cos();
        y += u[i] * angle.sin();
    }
    Ok(Point::from(vec![x, y]))
}

/// A named analytic problem the engine can run against.
pub trait Problem: Evaluator {
    fn name(&self) -> String;
}

pub struct InverseRadius {
    eps: f64,
}

impl InverseRadius {
    pub fn new(eps: f64) -> Result<Self> {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(Error::bad_argument(format!("eps must be positive, got {eps}")));
        }
        Ok(InverseRadius { eps })
    }
}

impl Evaluator for InverseRadius {
    fn input_dim(&self) -> usize {
        2
    }
    fn output_dim(&self) -> usize {
        2
    }
    fn evaluate(&mut self, x: &Point) -> Result<Point> {
        inverse_radius(x, self.eps)
    }
}

impl Problem for InverseRadius {
    fn name(&self) -> String {
        "inverse_radius".to_string()
    }
}

pub struct Exponential {
    alpha: f64,
}

impl Exponential {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::bad_argument(format!("alpha must be finite, got {alpha}")));
        }
        Ok(Exponential { alpha })
    }
}

impl Evaluator for Exponential {
    fn input_dim(&self) -> usize {
        2
    }
    fn output_dim(&self) -> usize {
        3
    }
    fn evaluate(&mut self, x: &Point) -> Result<Point> {
        exponential(x, self.alpha)
    }
}

impl Problem for Exponential {
    fn name(&self) -> String {
        "exponential".to_string()
    }
}

pub struct Easom {
    dim: usize,
}

impl Easom {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::bad_argument("easom needs p >= 1"));
        }
        Ok(Easom { dim })
    }
}

impl Evaluator for Easom {
    fn input_dim(&self) -> usize {
        self.dim
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn evaluate(&mut self, x: &Point) -> Result<Point> {
        if x.dim() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, got: x.dim() });
        }
        easom(x)
    }
}

impl Problem for Easom {
    fn name(&self) -> String {
        "easom".to_string()
    }
}

pub struct RobotArm;

impl Evaluator for RobotArm {
    fn input_dim(&self) -> usize {
        8
    }
    fn output_dim(&self) -> usize {
        2
    }
    fn evaluate(&mut self, x: &Point) -> Result<Point> {
        robot_arm(x)
    }
}

impl Problem for RobotArm {
    fn name(&self) -> String {
        "robot_arm".to_string()
    }
}

type ParamMap = BTreeMap<String, f64>;
type ProblemFactory = fn(&ParamMap) -> Result<Box<dyn Problem>>;

/// Name-keyed problem registry, extendable with custom factories.
pub struct ProblemRegistry {
    entries: BTreeMap<&'static str, ProblemFactory>,
}

impl ProblemRegistry {
    pub fn empty() -> Self {
        ProblemRegistry { entries: BTreeMap::new() }
    }

    pub fn builtin() -> Self {
        let mut registry = Self::empty();
        registry.register("inverse_radius", |params| {
            check_keys(params, &["eps"], "inverse_radius")?;
            let eps = params.get("eps").copied().unwrap_or(0.1);
            Ok(Box::new(InverseRadius::new(eps)?))
        });
        registry.register("exponential", |params| {
            check_keys(params, &["alpha"], "exponential")?;
            let alpha = params.get("alpha").copied().unwrap_or(10.0);
            Ok(Box::new(Exponential::new(alpha)?))
        });
        registry.register("easom", |params| {
            check_keys(params, &["p"], "easom")?;
            let dim = match params.get("p") {
                None => 2,
                Some(&raw) => {
                    if !raw.is_finite() || raw.fract() != 0.0 || raw < 1.0 {
                        return Err(Error::bad_argument(format!(
                            "easom p must be a positive integer, got {raw}"
                        )));
                    }
                    raw as usize
                }
            };
            Ok(Box::new(Easom::new(dim)?))
        });
        registry.register("robot_arm", |params| {
            check_keys(params, &[], "robot_arm")?;
            Ok(Box::new(RobotArm))
        });
        registry
    }

    pub fn register(&mut self, name: &'static str, factory: ProblemFactory) {
        self.entries.insert(name, factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn create(&self, name: &str, params: &ParamMap) -> Result<Box<dyn Problem>> {
        match self.entries.get(name) {
            Some(factory) => factory(params),
            None => Err(Error::UnknownName {
                kind: "problem",
                name: name.to_string(),
                known: self.names().join(", "),
            }),
        }
    }

    /// Parse a spec string of the form `name` or `name:key=val,key=val`.
    pub fn parse(&self, spec: &str) -> Result<Box<dyn Problem>> {
        let (name, params) = split_spec(spec)?;
        self.create(name, &params)
    }
}

fn check_keys(params: &ParamMap, accepted: &[&str], problem: &str) -> Result<()> {
    for key in params.keys() {
        if !accepted.contains(&key.as_str()) {
            let hint = if accepted.is_empty() {
                "takes no parameters".to_string()
            } else {
                format!("accepts {}", accepted.join(", "))
            };
            return Err(Error::bad_argument(format!(
                "unknown parameter `{key}` for {problem}, which {hint}"
            )));
        }
    }
    Ok(())
}

fn split_spec(spec: &str) -> Result<(&str, ParamMap)> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    if name.is_empty() {
        return Err(Error::bad_argument("empty problem name"));
    }
    let mut params = ParamMap::new();
    if rest.is_empty() {
        return Ok((name, params));
    }
    for pair in rest.split(',') {
        let Some((key, value)) = pair.split_once('=') else {
            return Err(Error::bad_argument(format!(
                "malformed parameter `{pair}`, expected key=value"
            )));
        };
        let value: f64 = value.parse().map_err(|_| {
            Error::bad_argument(format!("parameter `{key}` has non-numeric value `{value}`"))
        })?;
        if params.insert(key.to_string(), value).is_some() {
            return Err(Error::bad_argument(format!("parameter `{key}` given twice")));
        }
    }
    Ok((name, params))
}
