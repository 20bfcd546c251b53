//! Points, Euclidean distances, nearest neighbors, and unit-box scaling.
//!
//! Everything downstream (gap estimation, candidate selection, the engine
//! loop) is built on the handful of operations in this module, so the
//! tie-breaking rules here are load-bearing: whenever two distances are
//! exactly equal, the lower index wins. That single rule is what makes whole
//! runs reproducible bit for bit.

use serde::{Deserialize, Serialize};
use std::ops::Deref;

use crate::error::{Error, Result};

/// A point in R^d. Used for both design inputs and observed outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point(coords)
    }
}

impl From<&[f64]> for Point {
    fn from(coords: &[f64]) -> Self {
        Point(coords.to_vec())
    }
}

impl FromIterator<f64> for Point {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Point(iter.into_iter().collect())
    }
}

/// Euclidean distance. Errors when the dimensions differ.
pub fn distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(dist(a, b))
}

/// Bit pattern key for exact-duplicate detection, with -0.0 folded into 0.0
/// so coordinate equality and key equality agree.
pub(crate) fn coord_key(p: &[f64]) -> Vec<u64> {
    p.iter().map(|&v| (v + 0.0).to_bits()).collect()
}

/// Euclidean distance with dimensions already validated.
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// The `k` nearest points to `query`, sorted by ascending distance.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
}

impl NeighborList {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Exact k-nearest-neighbor query by exhaustive scan.
///
/// `exclude` drops one index from consideration, which is how a point's
/// neighbors among its own set are found without the point itself showing up
/// at distance zero. Equal distances are ordered by index.
pub fn nearest_neighbors(
    query: &[f64],
    points: &[Point],
    k: usize,
    exclude: Option<usize>,
) -> Result<NeighborList> {
    let available = points.len() - usize::from(exclude.map_or(false, |e| e < points.len()));
    if k > available {
        return Err(Error::bad_argument(format!(
            "k = {k} exceeds the {available} available points"
        )));
    }
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(available);
    for (i, p) in points.iter().enumerate() {
        if Some(i) == exclude {
            continue;
        }
        if p.dim() != query.len() {
            return Err(Error::DimMismatch {
                expected: query.len(),
                got: p.dim(),
            });
        }
        order.push((dist(query, p), i));
    }
    order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order.truncate(k);
    Ok(NeighborList {
        indices: order.iter().map(|&(_, i)| i).collect(),
        distances: order.iter().map(|&(d, _)| d).collect(),
    })
}

/// Index of the nearest center for each point, lowest index on ties.
pub fn assign_to_nearest(points: &[Point], centers: &[Point]) -> Result<Vec<usize>> {
    if centers.is_empty() {
        return Err(Error::EmptyInput("center set"));
    }
    let dim = centers[0].dim();
    for c in centers {
        if c.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: c.dim(),
            });
        }
    }
    let mut assignment = Vec::with_capacity(points.len());
    for p in points {
        if p.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: p.dim(),
            });
        }
        let mut best = 0usize;
        let mut best_d = dist(p, &centers[0]);
        for (j, c) in centers.iter().enumerate().skip(1) {
            let d = dist(p, c);
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        assignment.push(best);
    }
    Ok(assignment)
}

/// Largest gap left by `outputs` as seen from `reference`: the maximum over
/// reference points of the distance to the closest output.
pub fn fill_distance(reference: &[Point], outputs: &[Point]) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::EmptyInput("reference set"));
    }
    if outputs.is_empty() {
        return Err(Error::EmptyInput("output set"));
    }
    let dim = outputs[0].dim();
    for y in outputs {
        if y.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: y.dim(),
            });
        }
    }
    let mut worst = 0.0f64;
    for r in reference {
        if r.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: r.dim(),
            });
        }
        let mut nearest = f64::INFINITY;
        for y in outputs {
            let d = dist(r, y);
            if d < nearest {
                nearest = d;
            }
        }
        if nearest > worst {
            worst = nearest;
        }
    }
    Ok(worst)
}

/// Per-dimension affine map onto the unit box, remembered so it can be
/// inverted. Dimensions with zero range collapse to the constant 0.5.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRecord {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl ScaleRecord {
    /// The do-nothing map: min 0 and max 1 in every dimension.
    pub fn identity(dim: usize) -> ScaleRecord {
        ScaleRecord {
            mins: vec![0.0; dim],
            maxs: vec![1.0; dim],
        }
    }

    /// Bounds taken over a point set. Errors on an empty set.
    pub fn from_points(points: &[Point]) -> Result<ScaleRecord> {
        let first = points.first().ok_or(Error::EmptyInput("point set"))?;
        let dim = first.dim();
        let mut mins = first.0.clone();
        let mut maxs = first.0.clone();
        for p in &points[1..] {
            if p.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            for j in 0..dim {
                if p[j] < mins[j] {
                    mins[j] = p[j];
                }
                if p[j] > maxs[j] {
                    maxs[j] = p[j];
                }
            }
        }
        Ok(ScaleRecord { mins, maxs })
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    pub fn scale_point(&self, p: &[f64]) -> Result<Point> {
        if p.len() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        Ok(p.iter()
            .enumerate()
            .map(|(j, &v)| {
                let range = self.maxs[j] - self.mins[j];
                if range == 0.0 {
                    0.5
                } else {
                    (v - self.mins[j]) / range
                }
            })
            .collect())
    }

    pub fn unscale_point(&self, p: &[f64]) -> Result<Point> {
        if p.len() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        Ok(p.iter()
            .enumerate()
            .map(|(j, &v)| self.mins[j] + v * (self.maxs[j] - self.mins[j]))
            .collect())
    }
}

/// Scales a point set into the unit box and returns the map that did it.
pub fn scale_to_unit_box(points: &[Point]) -> Result<(Vec<Point>, ScaleRecord)> {
    let record = ScaleRecord::from_points(points)?;
    let scaled = points
        .iter()
        .map(|p| record.scale_point(p))
        .collect::<Result<Vec<_>>>()?;
    Ok((scaled, record))
}
