//! The growing design: paired inputs and raw outputs plus the output scaling
//! currently in effect.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geom::{coord_key, scale_to_unit_box, Point, ScaleRecord};

/// Inputs in `[0,1]^p` with their observed outputs in `R^q`.
///
/// Inputs are kept pairwise distinct; duplicate outputs are allowed (a flat
/// response is still an observation). The scale record maps raw outputs onto
/// the unit box and is refreshed by the engine before each gap estimate, so
/// distances over scaled outputs always refer to the current bounds.
#[derive(Debug, Clone)]
pub struct Design {
    inputs: Vec<Point>,
    outputs_raw: Vec<Point>,
    scale: ScaleRecord,
    p: usize,
    q: usize,
    input_keys: HashSet<Vec<u64>>,
}

impl Design {
    pub fn new(p: usize, q: usize) -> Result<Design> {
        if p == 0 || q == 0 {
            return Err(Error::bad_argument("design dimensions must be >= 1"));
        }
        Ok(Design {
            inputs: Vec::new(),
            outputs_raw: Vec::new(),
            scale: ScaleRecord::identity(q),
            p,
            q,
            input_keys: HashSet::new(),
        })
    }

    pub fn from_pairs(
        inputs: Vec<Point>,
        outputs: Vec<Point>,
        p: usize,
        q: usize,
    ) -> Result<Design> {
        if inputs.len() != outputs.len() {
            return Err(Error::bad_argument(format!(
                "{} inputs paired with {} outputs",
                inputs.len(),
                outputs.len()
            )));
        }
        let mut design = Design::new(p, q)?;
        for (x, y) in inputs.into_iter().zip(outputs) {
            design.push(x, y)?;
        }
        Ok(design)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.p
    }

    pub fn output_dim(&self) -> usize {
        self.q
    }

    pub fn inputs(&self) -> &[Point] {
        &self.inputs
    }

    pub fn outputs_raw(&self) -> &[Point] {
        &self.outputs_raw
    }

    pub fn scale(&self) -> &ScaleRecord {
        &self.scale
    }

    pub fn contains_input(&self, x: &Point) -> bool {
        self.input_keys.contains(&coord_key(x))
    }

    /// Appends an observation. The input must be a fresh point inside the
    /// unit box and both sides must be finite with matching dimensions.
    pub fn push(&mut self, x: Point, y: Point) -> Result<()> {
        if x.dim() != self.p {
            return Err(Error::DimMismatch {
                expected: self.p,
                got: x.dim(),
            });
        }
        if y.dim() != self.q {
            return Err(Error::DimMismatch {
                expected: self.q,
                got: y.dim(),
            });
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("design input"));
        }
        if !y.is_finite() {
            return Err(Error::NonFinite("design output"));
        }
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::bad_argument(format!(
                "input outside the unit box: {:?}",
                x.0
            )));
        }
        if !self.input_keys.insert(coord_key(&x)) {
            return Err(Error::bad_argument(format!(
                "duplicate design input: {:?}",
                x.0
            )));
        }
        self.inputs.push(x);
        self.outputs_raw.push(y);
        Ok(())
    }

    /// Recomputes the output scaling from the current outputs, or resets it
    /// to the identity when scaling is disabled.
    pub fn refresh_scale(&mut self, enabled: bool) -> Result<()> {
        self.scale = if enabled {
            ScaleRecord::from_points(&self.outputs_raw)?
        } else {
            ScaleRecord::identity(self.q)
        };
        Ok(())
    }

    /// Outputs pushed through the current scale record.
    pub fn scaled_outputs(&self) -> Result<Vec<Point>> {
        self.outputs_raw
            .iter()
            .map(|y| self.scale.scale_point(y))
            .collect()
    }
}

/// Convenience used by tests and the benchmark harness: scale a raw output
/// set in one shot without building a design.
pub fn scaled_copy(outputs: &[Point]) -> Result<Vec<Point>> {
    Ok(scale_to_unit_box(outputs)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_grows_both_sides() {
        let mut d = Design::new(2, 1).unwrap();
        d.push(Point(vec![0.1, 0.2]), Point(vec![5.0])).unwrap();
        d.push(Point(vec![0.9, 0.4]), Point(vec![7.0])).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.inputs()[1], Point(vec![0.9, 0.4]));
        assert_eq!(d.outputs_raw()[0], Point(vec![5.0]));
    }

    #[test]
    fn push_rejects_duplicates_and_bad_points() {
        let mut d = Design::new(2, 1).unwrap();
        d.push(Point(vec![0.1, 0.2]), Point(vec![5.0])).unwrap();
        assert!(d.push(Point(vec![0.1, 0.2]), Point(vec![6.0])).is_err());
        assert!(d.push(Point(vec![1.5, 0.0]), Point(vec![6.0])).is_err());
        assert!(d.push(Point(vec![0.3, 0.3]), Point(vec![f64::NAN])).is_err());
        assert!(d.push(Point(vec![0.3]), Point(vec![6.0])).is_err());
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn duplicate_outputs_are_fine() {
        let mut d = Design::new(1, 1).unwrap();
        d.push(Point(vec![0.1]), Point(vec![5.0])).unwrap();
        d.push(Point(vec![0.2]), Point(vec![5.0])).unwrap();
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn refresh_scale_tracks_output_bounds() {
        let mut d = Design::new(1, 2).unwrap();
        d.push(Point(vec![0.1]), Point(vec![2.0, 4.0])).unwrap();
        d.push(Point(vec![0.2]), Point(vec![4.0, 8.0])).unwrap();
        d.refresh_scale(true).unwrap();
        let scaled = d.scaled_outputs().unwrap();
        assert_eq!(scaled[0], Point(vec![0.0, 0.0]));
        assert_eq!(scaled[1], Point(vec![1.0, 1.0]));
        d.refresh_scale(false).unwrap();
        assert_eq!(d.scaled_outputs().unwrap()[0], Point(vec![2.0, 4.0]));
    }
}
