//! Probe sets that stand in for the unknown output region.
//!
//! The output space is only observed through the points evaluated so far, so
//! gap estimation needs a cheap finite stand-in for "everywhere an output
//! could plausibly be". Around each observed output this module constructs
//! three probe families: an inflated simplex over its nearest neighbors
//! (centroid plus one axial point pushed past each vertex), midpoints toward
//! its neighbors, and a uniform ball scaled to the local point spacing. When
//! inputs are lower-dimensional than outputs the ball is laid inside the
//! tangent subspace estimated by local PCA, since the attainable outputs form
//! a p-dimensional manifold there.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geom::{coord_key, nearest_neighbors, Point};
use crate::rng::SeededRng;
use crate::sampling::uniform_ball;

/// Which construction produced a probe point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeSource {
    Simplex,
    Midpoint,
    Ball,
}

/// Probe points with per-point provenance, exact duplicates removed.
#[derive(Debug, Clone)]
pub struct ApproxSet {
    pub points: Vec<Point>,
    pub sources: Vec<ProbeSource>,
}

impl ApproxSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Mean of the vertices.
pub fn simplex_centroid(vertices: &[Point]) -> Result<Point> {
    let first = vertices.first().ok_or(Error::EmptyInput("vertex set"))?;
    let dim = first.dim();
    let mut sum = vec![0.0; dim];
    for v in vertices {
        if v.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: v.dim(),
            });
        }
        for (s, x) in sum.iter_mut().zip(v.iter()) {
            *s += x;
        }
    }
    let n = vertices.len() as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}

/// One point per vertex of a k-simplex, pushed outward past the opposite
/// face: c_j = (1.5/k) * sum of the other vertices - 0.5 * v_j. Equivalent to
/// reflecting v_j through the centroid and then some, which is what lets the
/// probes reach outside the simplex hull.
pub fn axial_points(vertices: &[Point]) -> Result<Vec<Point>> {
    if vertices.len() < 2 {
        return Err(Error::bad_argument(format!(
            "axial points need a simplex with >= 2 vertices, got {}",
            vertices.len()
        )));
    }
    let dim = vertices[0].dim();
    let mut total = vec![0.0; dim];
    for v in vertices {
        if v.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: v.dim(),
            });
        }
        for (t, x) in total.iter_mut().zip(v.iter()) {
            *t += x;
        }
    }
    let k = (vertices.len() - 1) as f64;
    Ok(vertices
        .iter()
        .map(|v| {
            v.iter()
                .enumerate()
                .map(|(j, &x)| 1.5 / k * (total[j] - x) - 0.5 * x)
                .collect()
        })
        .collect())
}

/// Orthonormal directions spanning the local tangent subspace of a point
/// cloud, from PCA of the centered cloud.
#[derive(Debug, Clone)]
pub struct TangentBasis {
    pub directions: Vec<Point>,
    /// True when the cloud had lower rank than requested and the basis was
    /// padded with arbitrary orthonormal directions.
    pub degenerate: bool,
}

/// Leading `target_dim` principal directions of `cloud`.
///
/// Signs are fixed by making each direction's first nonzero component
/// positive, so identical clouds always produce identical bases. A
/// rank-deficient cloud is padded to the requested count and flagged.
pub fn tangent_basis(cloud: &[Point], target_dim: usize) -> Result<TangentBasis> {
    let first = cloud.first().ok_or(Error::EmptyInput("point cloud"))?;
    let q = first.dim();
    if target_dim == 0 || target_dim > q {
        return Err(Error::bad_argument(format!(
            "tangent dimension must be in 1..={q}, got {target_dim}"
        )));
    }
    for p in cloud {
        if p.dim() != q {
            return Err(Error::DimMismatch {
                expected: q,
                got: p.dim(),
            });
        }
    }
    let mean = simplex_centroid(cloud)?;
    let centered = nalgebra::DMatrix::from_fn(cloud.len(), q, |i, j| cloud[i][j] - mean[j]);
    let svd = centered.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");

    // Order by singular value ourselves rather than trusting the
    // factorization's ordering; ties keep the original row order.
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });
    let sigma_max = order
        .first()
        .map(|&l| svd.singular_values[l])
        .unwrap_or(0.0);
    let cutoff = 1e-12 * sigma_max;

    let mut directions: Vec<Point> = Vec::with_capacity(target_dim);
    for &l in &order {
        if directions.len() == target_dim {
            break;
        }
        if sigma_max == 0.0 || svd.singular_values[l] <= cutoff {
            break;
        }
        directions.push(fix_sign(v_t.row(l).iter().copied().collect()));
    }
    let degenerate = directions.len() < target_dim;
    if degenerate {
        pad_orthonormal(&mut directions, target_dim, q);
    }
    Ok(TangentBasis {
        directions,
        degenerate,
    })
}

fn fix_sign(mut v: Point) -> Point {
    if let Some(&lead) = v.iter().find(|c| c.abs() > 1e-12) {
        if lead < 0.0 {
            for c in v.0.iter_mut() {
                *c = -*c;
            }
        }
    }
    v
}

/// Extends `directions` to `target_dim` orthonormal vectors by Gram-Schmidt
/// over the standard basis, taking survivors in coordinate order.
fn pad_orthonormal(directions: &mut Vec<Point>, target_dim: usize, q: usize) {
    for axis in 0..q {
        if directions.len() == target_dim {
            return;
        }
        let mut v = vec![0.0; q];
        v[axis] = 1.0;
        for d in directions.iter() {
            let dot: f64 = v.iter().zip(d.iter()).map(|(a, b)| a * b).sum();
            for (x, b) in v.iter_mut().zip(d.iter()) {
                *x -= dot * b;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            directions.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
}

/// Probe set for the current outputs: per output, the inflated simplex over
/// its p^q nearest neighbors, midpoints toward its k1 nearest neighbors, and
/// a ball of radius equal to its nearest-neighbor distance. `p` and `q` are
/// the input and output dimensions; the default neighbor count k1 = 2*(p^q)
/// is clamped to m-1 on small designs.
pub fn approx_gen(outputs: &[Point], p: usize, q: usize, rng: &mut SeededRng) -> Result<ApproxSet> {
    approx_gen_with(outputs, p, q, None, rng)
}

/// [`approx_gen`] with an explicit midpoint-neighbor count in place of the
/// default 2*(p^q). The count is still clamped to m-1.
pub fn approx_gen_with(
    outputs: &[Point],
    p: usize,
    q: usize,
    k1_override: Option<usize>,
    rng: &mut SeededRng,
) -> Result<ApproxSet> {
    if p == 0 || q == 0 {
        return Err(Error::bad_argument("dimensions must be >= 1"));
    }
    let m = outputs.len();
    let simplex_k = p.min(q);
    if m < simplex_k + 1 {
        return Err(Error::bad_argument(format!(
            "probe construction needs at least {} outputs, got {m}",
            simplex_k + 1
        )));
    }
    for y in outputs {
        if y.dim() != q {
            return Err(Error::DimMismatch {
                expected: q,
                got: y.dim(),
            });
        }
    }
    let k1 = k1_override.unwrap_or(2 * simplex_k).min(m - 1);
    let ball_count = k1 + 2 * (simplex_k + 1) + 1;

    let mut points: Vec<Point> = Vec::new();
    let mut sources: Vec<ProbeSource> = Vec::new();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let push = |pt: Point, src: ProbeSource, points: &mut Vec<Point>, sources: &mut Vec<ProbeSource>, seen: &mut HashSet<Vec<u64>>| {
        if seen.insert(coord_key(&pt)) {
            points.push(pt);
            sources.push(src);
        }
    };

    for (i, y) in outputs.iter().enumerate() {
        let near = nearest_neighbors(y, outputs, k1.max(simplex_k), Some(i))?;

        let mut vertices: Vec<Point> = Vec::with_capacity(simplex_k + 1);
        vertices.push(y.clone());
        for &idx in near.indices.iter().take(simplex_k) {
            vertices.push(outputs[idx].clone());
        }
        push(
            simplex_centroid(&vertices)?,
            ProbeSource::Simplex,
            &mut points,
            &mut sources,
            &mut seen,
        );
        for axial in axial_points(&vertices)? {
            push(axial, ProbeSource::Simplex, &mut points, &mut sources, &mut seen);
        }

        for &idx in near.indices.iter().take(k1) {
            let midpoint: Point = y
                .iter()
                .zip(outputs[idx].iter())
                .map(|(a, b)| (a + b) / 2.0)
                .collect();
            push(midpoint, ProbeSource::Midpoint, &mut points, &mut sources, &mut seen);
        }

        let radius = near.distances.first().copied().unwrap_or(0.0);
        if radius > 0.0 {
            let ball = if p >= q {
                uniform_ball(y, radius, ball_count, None, rng)?
            } else {
                let cloud: Vec<Point> = vertices.clone();
                let basis = tangent_basis(&cloud, p)?;
                uniform_ball(y, radius, ball_count, Some(&basis.directions), rng)?
            };
            for b in ball {
                push(b, ProbeSource::Ball, &mut points, &mut sources, &mut seen);
            }
        }
    }
    Ok(ApproxSet { points, sources })
}
