//! Nearest-neighbor regression, covering checks, sample-size bounds and
//! empirical Lipschitz scans over box domains.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Axis-aligned box `[lo_k, hi_k]` per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        ensure(!lo.is_empty() && lo.len() == hi.len(), || {
            "box bounds must be non-empty and of equal length".into()
        })?;
        ensure(
            lo.iter().zip(&hi).all(|(a, b)| a.is_finite() && b.is_finite() && a <= b),
            || "box bounds must be finite with lo <= hi".into(),
        )?;
        Ok(Self { lo, hi })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.len() == self.dim()
            && y.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// Evenly spaced grid with every axis pitch at most `pitch`, endpoints included.
    pub fn probe_grid(&self, pitch: f64) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| {
                let n = ((b - a) / pitch).ceil().max(0.0) as usize;
                if n == 0 {
                    vec![a]
                } else {
                    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
                }
            })
            .collect();
        cartesian(&axes)
    }

    /// Grid of exact pitch `h` from `lo` on each axis, as far as it fits.
    /// Returns the per-axis counts with the row-major point list.
    fn pitch_grid(&self, h: f64) -> (Vec<usize>, Vec<Vec<f64>>) {
        let axes: Vec<Vec<f64>> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| {
                let n = ((b - a) / h + 1e-9).floor() as usize;
                (0..=n).map(|i| a + h * i as f64).collect()
            })
            .collect();
        (axes.iter().map(Vec::len).collect(), cartesian(&axes))
    }
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<f64>| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

/// Volume of the unit Euclidean ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    // V_d = 2π/d · V_{d−2}
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Dataset size `(vol(Y) / vol₀) · (L / ε)^d` needed to cover `Y` at radius `ε/L`.
pub fn sample_complexity_bound(domain: &BoxDomain, lipschitz: f64, epsilon: f64) -> f64 {
    let d = domain.dim();
    domain.volume() / unit_ball_volume(d) * (lipschitz / epsilon).powi(d as i32)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    domain: BoxDomain,
    points: Vec<Vec<f64>>,
    labels: Vec<Vec<f64>>,
}

impl LabeledDataset {
    pub fn new(domain: BoxDomain, points: Vec<Vec<f64>>, labels: Vec<Vec<f64>>) -> Result<Self> {
        ensure(points.len() == labels.len(), || {
            format!("{} points but {} labels", points.len(), labels.len())
        })?;
        if let Some(i) = points.iter().position(|p| !domain.contains(p)) {
            return Err(Error::Parameter(format!(
                "point {i} {:?} lies outside the domain",
                points[i]
            )));
        }
        if let Some(first) = labels.first() {
            ensure(labels.iter().all(|l| l.len() == first.len()), || {
                "labels must share one dimension".into()
            })?;
        }
        Ok(Self {
            domain,
            points,
            labels,
        })
    }

    /// Labels `points` with `map`.
    pub fn from_map<F>(domain: BoxDomain, points: Vec<Vec<f64>>, map: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let labels = points.iter().map(|p| map(p)).collect();
        Self::new(domain, points, labels)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> &[Vec<f64>] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index and distance of the nearest point; lowest index on ties.
    fn nearest(&self, query: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.points.iter().enumerate() {
            let d = dist(p, query);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best
    }
}

/// Label of the nearest dataset point.
pub fn nn1_predict<'a>(data: &'a LabeledDataset, query: &[f64]) -> Result<&'a [f64]> {
    ensure(query.len() == data.domain.dim(), || {
        format!("query has dimension {}, domain {}", query.len(), data.domain.dim())
    })?;
    let (i, _) = data
        .nearest(query)
        .ok_or_else(|| Error::Parameter("empty dataset".into()))?;
    Ok(&data.labels[i])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverAnalysis {
    pub delta: f64,
    pub covered: bool,
    /// Probe farthest from the dataset, when it is farther than `delta`.
    pub witness: Option<Vec<f64>>,
    /// Largest probe-to-dataset distance.
    pub max_gap: f64,
    pub probes: usize,
    /// Sample-size bound for the supplied `(L, ε)`.
    pub n0: f64,
}

/// Checks whether every probe of a grid with pitch `delta/10` lies within
/// `delta` of a dataset point. A probe grid cannot certify points between
/// probes, so a pass guarantees coverage at radius `delta + pitch·√d/2`.
pub fn check_cover(
    data: &LabeledDataset,
    delta: f64,
    lipschitz: f64,
    epsilon: f64,
) -> Result<CoverAnalysis> {
    ensure(delta.is_finite() && delta > 0.0, || {
        format!("delta must be positive, got {delta}")
    })?;
    ensure(lipschitz > 0.0 && epsilon > 0.0, || "L and ε must be positive".into())?;
    let n0 = sample_complexity_bound(&data.domain, lipschitz, epsilon);
    let probes = data.domain.probe_grid(delta / 10.0);
    let mut max_gap = 0.0;
    let mut far: Option<&Vec<f64>> = None;
    for p in &probes {
        let gap = data.nearest(p).map_or(f64::INFINITY, |(_, d)| d);
        if gap > max_gap || far.is_none() {
            max_gap = gap;
            far = Some(p);
        }
    }
    let covered = max_gap <= delta;
    Ok(CoverAnalysis {
        delta,
        covered,
        witness: if covered { None } else { far.cloned() },
        max_gap,
        probes: probes.len(),
        n0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub label: String,
    pub spacing: f64,
    /// Largest `‖φ(y) − φ(y')‖ / ‖y − y'‖` over grid neighbors.
    pub ratio: f64,
    /// Number of single-linkage clusters of the image.
    pub clusters: usize,
    /// Smallest distance between image points in different clusters.
    pub d_min: Option<f64>,
    pub points: usize,
}

/// Evaluates `map` on a grid of pitch `h` for each spacing and reports the
/// largest difference quotient over axis neighbors, plus a clustering of the
/// image with linkage radius `link_radius`.
pub fn lipschitz_scan<F>(
    label: &str,
    map: F,
    domain: &BoxDomain,
    spacings: &[f64],
    link_radius: f64,
) -> Result<Vec<LipschitzReport>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    ensure(link_radius > 0.0, || "link radius must be positive".into())?;
    spacings
        .iter()
        .map(|&h| {
            ensure(h.is_finite() && h > 0.0, || format!("spacing must be positive, got {h}"))?;
            let (counts, grid) = domain.pitch_grid(h);
            let image: Vec<Vec<f64>> = grid.iter().map(|y| map(y)).collect();
            let mut ratio: f64 = 0.0;
            // row-major strides: the last axis varies fastest
            let mut stride = 1;
            let mut strides = vec![0; counts.len()];
            for k in (0..counts.len()).rev() {
                strides[k] = stride;
                stride *= counts[k];
            }
            for i in 0..grid.len() {
                for k in 0..counts.len() {
                    if (i / strides[k]) % counts[k] + 1 < counts[k] {
                        let j = i + strides[k];
                        let dy = dist(&grid[i], &grid[j]);
                        if dy > 0.0 {
                            ratio = ratio.max(dist(&image[i], &image[j]) / dy);
                        }
                    }
                }
            }
            let (clusters, d_min) = single_linkage(&image, link_radius);
            Ok(LipschitzReport {
                label: label.to_string(),
                spacing: h,
                ratio,
                clusters,
                d_min,
                points: grid.len(),
            })
        })
        .collect()
}

/// Cluster count under single linkage at `radius`, and the smallest
/// distance between points of different clusters.
fn single_linkage(points: &[Vec<f64>], radius: f64) -> (usize, Option<f64>) {
    // Collapse duplicates first; solution maps are mostly piecewise constant.
    let mut distinct: Vec<&Vec<f64>> = Vec::new();
    for p in points {
        if !distinct.contains(&p) {
            distinct.push(p);
        }
    }
    let n = distinct.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if dist(distinct[i], distinct[j]) <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let clusters = roots.iter().enumerate().filter(|(i, r)| *i == **r).count();
    let mut d_min: Option<f64> = None;
    for i in 0..n {
        for j in i + 1..n {
            if roots[i] != roots[j] {
                let d = dist(distinct[i], distinct[j]);
                d_min = Some(d_min.map_or(d, |m| m.min(d)));
            }
        }
    }
    (clusters, d_min)
}

/// Toy solution map `y ↦ argmax_x (x₁ cos y + x₂ sin y)²` over the triangle.
pub fn toy_direct_map(y: &[f64]) -> Vec<f64> {
    let (s, c) = y[0].sin_cos();
    crate::solvers::ToySolver::argmax(&[c, s]).to_vec()
}

/// Toy surrogate-cost map `y ↦ (cos y, sin y)`.
pub fn toy_surrogate_map(y: &[f64]) -> Vec<f64> {
    let (s, c) = y[0].sin_cos();
    vec![c, s]
}
