//! Seeded Monte Carlo layer: sphere sampling, empirical MSE, Voronoi
//! reassignment, and full Lloyd iteration.
//!
//! Points live in the centered frame with sphere centers at `-e1` and
//! `+e1` (so the tangency point is the origin and a hyperplane cutoff `a`
//! corresponds to the plane `x1 = -a`). Sampling normalizes a vector of
//! independent standard Gaussians, which is uniform on the sphere in
//! every dimension.
//!
//! Determinism is load-bearing here: every sampled point derives its
//! randomness from the seed and its own index (one generator stream per
//! point), parallel maps preserve index order, and every floating-point
//! reduction runs as a fixed-shape pairwise tree. Repeating a run with a
//! different thread count therefore reproduces results bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::Cluster;

/// A centroid axis within this angle (radians) of the `e1` axis counts as
/// axis-aligned, making the separating-hyperplane cutoff meaningful.
pub const AXIS_ALIGNMENT_MAX_ANGLE: f64 = 0.05;

/// Sphere-membership slack accepted when adopting externally built
/// points.
pub const SPHERE_TOLERANCE: f64 = 1e-12;

/// Sequential base-case length of the pairwise reduction tree.
const REDUCTION_LEAF: usize = 4096;

/// Errors reported by the sampling and clustering layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmpiricalError {
    #[error("dimension {0} is below the minimum of 2")]
    DimensionTooSmall(u32),
    #[error("at least 2 points are required, got {0}")]
    CountTooSmall(usize),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("point {index} is off its source sphere by {deviation:e}")]
    PointOffSphere { index: usize, deviation: f64 },
    #[error("a labeling must use both clusters")]
    EmptyCluster,
    #[error("cluster {cluster} emptied out in Lloyd iteration {iteration}")]
    EmptyClusterCollapse { cluster: Cluster, iteration: usize },
    #[error("centroids coincide; the perpendicular bisector is undefined")]
    CoincidentCentroids,
    #[error("axis {axis} does not exist in dimension {n}")]
    AxisOutOfRange { axis: usize, n: u32 },
    #[error("iteration budget must be at least 1")]
    NoIterationBudget,
    #[error("movement tolerance must be positive, got {0}")]
    MoveTolOutOfRange(f64),
}

/// Which of the two touching spheres a sample point was drawn on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceSphere {
    /// Center `-e1`.
    Minus,
    /// Center `+e1`.
    Plus,
}

impl SourceSphere {
    /// First coordinate of the sphere center.
    pub fn center_x1(self) -> f64 {
        match self {
            SourceSphere::Minus => -1.0,
            SourceSphere::Plus => 1.0,
        }
    }
}

impl std::fmt::Display for SourceSphere {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SourceSphere::Minus => "minus",
            SourceSphere::Plus => "plus",
        })
    }
}

/// A seeded sample from the uniform surface measure on the two touching
/// unit spheres (half the mass on each, in expectation).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCloud {
    n: u32,
    count: usize,
    /// Row-major `count x n` coordinate block.
    coordinates: Vec<f64>,
    sources: Vec<SourceSphere>,
    seed: u64,
}

impl SampleCloud {
    /// Adopts externally built points, enforcing the sphere-membership
    /// invariant for each point against its declared source sphere.
    pub fn from_parts(
        n: u32,
        coordinates: Vec<f64>,
        sources: Vec<SourceSphere>,
        seed: u64,
    ) -> Result<Self, EmpiricalError> {
        if n < 2 {
            return Err(EmpiricalError::DimensionTooSmall(n));
        }
        let count = sources.len();
        if count < 2 {
            return Err(EmpiricalError::CountTooSmall(count));
        }
        if coordinates.len() != count * n as usize {
            return Err(EmpiricalError::LengthMismatch {
                expected: count * n as usize,
                got: coordinates.len(),
            });
        }
        for (index, (point, source)) in coordinates
            .chunks_exact(n as usize)
            .zip(&sources)
            .enumerate()
        {
            let center = source.center_x1();
            let mut norm_squared = (point[0] - center) * (point[0] - center);
            for &c in &point[1..] {
                norm_squared += c * c;
            }
            let deviation = (norm_squared.sqrt() - 1.0).abs();
            if deviation >= SPHERE_TOLERANCE {
                return Err(EmpiricalError::PointOffSphere { index, deviation });
            }
        }
        Ok(SampleCloud {
            n,
            count,
            coordinates,
            sources,
            seed,
        })
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Coordinates of point `i`.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coordinates[i * self.n as usize..(i + 1) * self.n as usize]
    }

    pub fn source(&self, i: usize) -> SourceSphere {
        self.sources[i]
    }

    /// Iterates `(coordinates, source)` pairs in index order.
    pub fn iter(&self) -> impl Iterator<Item = (&[f64], SourceSphere)> {
        self.coordinates
            .chunks_exact(self.n as usize)
            .zip(self.sources.iter().copied())
    }
}

/// Draws one point: sphere choice, then a normalized Gaussian direction,
/// translated to the chosen center. The generator stream is the point
/// index, so the draw is independent of evaluation order.
fn sample_point(n: u32, seed: u64, index: usize) -> (Vec<f64>, SourceSphere) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let source = if rng.gen_bool(0.5) {
        SourceSphere::Plus
    } else {
        SourceSphere::Minus
    };
    let mut point = vec![0.0f64; n as usize];
    loop {
        let mut norm_squared = 0.0;
        for slot in point.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *slot = g;
            norm_squared += g * g;
        }
        // A numerically degenerate draw (all components ~0) is redrawn;
        // the probability is vanishing but the guard keeps the invariant
        // unconditional.
        if norm_squared > 1e-290 {
            let norm = norm_squared.sqrt();
            for slot in point.iter_mut() {
                *slot /= norm;
            }
            break;
        }
    }
    point[0] += source.center_x1();
    (point, source)
}

/// Samples `count` points uniformly from the two touching unit spheres.
/// Deterministic for fixed `(n, count, seed)` regardless of thread count.
pub fn sample_spheres(n: u32, count: usize, seed: u64) -> Result<SampleCloud, EmpiricalError> {
    if n < 2 {
        return Err(EmpiricalError::DimensionTooSmall(n));
    }
    if count < 2 {
        return Err(EmpiricalError::CountTooSmall(count));
    }
    let drawn: Vec<(Vec<f64>, SourceSphere)> = (0..count)
        .into_par_iter()
        .map(|index| sample_point(n, seed, index))
        .collect();
    let mut coordinates = Vec::with_capacity(count * n as usize);
    let mut sources = Vec::with_capacity(count);
    for (point, source) in drawn {
        coordinates.extend_from_slice(&point);
        sources.push(source);
    }
    Ok(SampleCloud {
        n,
        count,
        coordinates,
        sources,
        seed,
    })
}

/// Fixed-shape pairwise tree sum: deterministic and far more accurate
/// than a running sum on long inputs.
fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 64 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Per-cluster coordinate sums and counts over `range`, combined as a
/// fixed-shape tree so the summation order never depends on parallelism.
fn cluster_sums(
    cloud: &SampleCloud,
    labels: &[Cluster],
    lo: usize,
    hi: usize,
) -> ([Vec<f64>; 2], [u64; 2]) {
    let width = cloud.n as usize;
    if hi - lo <= REDUCTION_LEAF {
        let mut sums = [vec![0.0; width], vec![0.0; width]];
        let mut counts = [0u64; 2];
        for (i, label) in (lo..hi).zip(&labels[lo..hi]) {
            let side = label.index();
            counts[side] += 1;
            let point = cloud.point(i);
            for (slot, &c) in sums[side].iter_mut().zip(point) {
                *slot += c;
            }
        }
        return (sums, counts);
    }
    let mid = lo + (hi - lo) / 2;
    let (mut left_sums, mut left_counts) = cluster_sums(cloud, labels, lo, mid);
    let (right_sums, right_counts) = cluster_sums(cloud, labels, mid, hi);
    for side in 0..2 {
        left_counts[side] += right_counts[side];
        for (slot, &c) in left_sums[side].iter_mut().zip(&right_sums[side]) {
            *slot += c;
        }
    }
    (left_sums, left_counts)
}

fn check_labels(cloud: &SampleCloud, labels: &[Cluster]) -> Result<(), EmpiricalError> {
    if labels.len() != cloud.count {
        return Err(EmpiricalError::LengthMismatch {
            expected: cloud.count,
            got: labels.len(),
        });
    }
    Ok(())
}

/// Means of the two label classes. Fails when either class is empty.
pub fn cluster_means(
    cloud: &SampleCloud,
    labels: &[Cluster],
) -> Result<[Vec<f64>; 2], EmpiricalError> {
    check_labels(cloud, labels)?;
    let (mut sums, counts) = cluster_sums(cloud, labels, 0, cloud.count);
    if counts[0] == 0 || counts[1] == 0 {
        return Err(EmpiricalError::EmptyCluster);
    }
    for side in 0..2 {
        for slot in sums[side].iter_mut() {
            *slot /= counts[side] as f64;
        }
    }
    Ok(sums)
}

fn squared_distance(point: &[f64], center: &[f64]) -> f64 {
    point
        .iter()
        .zip(center)
        .map(|(&p, &c)| (p - c) * (p - c))
        .sum()
}

/// Per-point squared distance to the given cluster centers.
fn distances_to(cloud: &SampleCloud, labels: &[Cluster], centroids: &[Vec<f64>; 2]) -> Vec<f64> {
    labels
        .par_iter()
        .enumerate()
        .map(|(i, label)| squared_distance(cloud.point(i), &centroids[label.index()]))
        .collect()
}

fn mse_with_centroids(cloud: &SampleCloud, labels: &[Cluster], centroids: &[Vec<f64>; 2]) -> f64 {
    pairwise_sum(&distances_to(cloud, labels, centroids)) / cloud.count as f64
}

/// Per-point squared distances to the labeling's own cluster means, in
/// point order. The mean of this vector is the empirical MSE; its sample
/// variance yields statistical error bars.
pub fn squared_distances(
    cloud: &SampleCloud,
    labels: &[Cluster],
) -> Result<Vec<f64>, EmpiricalError> {
    let means = cluster_means(cloud, labels)?;
    Ok(distances_to(cloud, labels, &means))
}

/// Empirical mean-squared error of a labeling, with cluster means as
/// centers (the optimal centers for the labeling).
pub fn empirical_mse(cloud: &SampleCloud, labels: &[Cluster]) -> Result<f64, EmpiricalError> {
    let means = cluster_means(cloud, labels)?;
    Ok(mse_with_centroids(cloud, labels, &means))
}

/// Empirical MSE together with its standard error (sample standard
/// deviation of the per-point squared distances over `sqrt(count)`).
pub fn empirical_mse_with_error(
    cloud: &SampleCloud,
    labels: &[Cluster],
) -> Result<(f64, f64), EmpiricalError> {
    let distances = squared_distances(cloud, labels)?;
    let count = distances.len() as f64;
    let mean = pairwise_sum(&distances) / count;
    let centered: Vec<f64> = distances.iter().map(|&d| (d - mean) * (d - mean)).collect();
    let variance = pairwise_sum(&centered) / (count - 1.0);
    Ok((mean, (variance / count).sqrt()))
}

/// Assigns every point to the nearer centroid; exact ties go to cluster
/// one (closed half-space convention).
pub fn voronoi_reassign(
    cloud: &SampleCloud,
    centroids: &[Vec<f64>; 2],
) -> Result<Vec<Cluster>, EmpiricalError> {
    for centroid in centroids {
        if centroid.len() != cloud.n as usize {
            return Err(EmpiricalError::LengthMismatch {
                expected: cloud.n as usize,
                got: centroid.len(),
            });
        }
    }
    if centroids[0] == centroids[1] {
        return Err(EmpiricalError::CoincidentCentroids);
    }
    Ok((0..cloud.count)
        .into_par_iter()
        .map(|i| {
            let point = cloud.point(i);
            if squared_distance(point, &centroids[0]) <= squared_distance(point, &centroids[1]) {
                Cluster::One
            } else {
                Cluster::Two
            }
        })
        .collect())
}

/// Labels a cloud by the half-space `x[axis] <= position`.
pub fn split_by_coordinate(
    cloud: &SampleCloud,
    axis: usize,
    position: f64,
) -> Result<Vec<Cluster>, EmpiricalError> {
    if axis >= cloud.n as usize {
        return Err(EmpiricalError::AxisOutOfRange { axis, n: cloud.n });
    }
    Ok((0..cloud.count)
        .into_par_iter()
        .map(|i| {
            if cloud.point(i)[axis] <= position {
                Cluster::One
            } else {
                Cluster::Two
            }
        })
        .collect())
}

/// The best coordinate-hyperplane split of a cloud over the given
/// candidate plane positions.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSplit {
    pub axis: usize,
    pub position: f64,
    pub mse: f64,
    pub labels: Vec<Cluster>,
}

/// Scans every axis and every candidate position, returning the split
/// with the smallest empirical MSE. Candidate splits that empty a cluster
/// are skipped.
pub fn best_axis_split(
    cloud: &SampleCloud,
    positions: &[f64],
) -> Result<AxisSplit, EmpiricalError> {
    let mut best: Option<AxisSplit> = None;
    for axis in 0..cloud.n as usize {
        for &position in positions {
            let labels = split_by_coordinate(cloud, axis, position)?;
            let mse = match empirical_mse(cloud, &labels) {
                Ok(value) => value,
                Err(EmpiricalError::EmptyCluster) => continue,
                Err(other) => return Err(other),
            };
            if best.as_ref().map_or(true, |b| mse < b.mse) {
                best = Some(AxisSplit {
                    axis,
                    position,
                    mse,
                    labels,
                });
            }
        }
    }
    best.ok_or(EmpiricalError::EmptyCluster)
}

/// Initial centroid placement for [`lloyd`].
#[derive(Debug, Clone, PartialEq)]
pub enum Initialization {
    /// Two distinct points of the cloud, drawn from the seed's dedicated
    /// initialization stream.
    RandomPoints,
    /// The sphere centers `-e1` and `+e1`.
    Antipodal,
    /// Explicit centroids.
    Given([Vec<f64>; 2]),
}

/// Outcome of a Lloyd iteration run.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydRun {
    /// Final centroids (cluster one, cluster two).
    pub centroids: [Vec<f64>; 2],
    /// Final assignment, one label per cloud point.
    pub labels: Vec<Cluster>,
    /// Empirical MSE after each centroid update; non-increasing.
    pub mse_trace: Vec<f64>,
    /// Number of assign/update rounds executed.
    pub iterations: usize,
    /// Whether centroid movement fell below the tolerance within the
    /// iteration budget.
    pub converged: bool,
    /// Angle (radians) between the centroid difference and the `e1` axis.
    pub axis_deviation_angle: f64,
    /// First coordinate of the perpendicular-bisector midpoint; present
    /// only when the centroid axis is `e1`-aligned within
    /// [`AXIS_ALIGNMENT_MAX_ANGLE`].
    pub extracted_cutoff: Option<f64>,
}

impl LloydRun {
    /// Final empirical MSE (last trace entry).
    pub fn final_mse(&self) -> f64 {
        *self.mse_trace.last().expect("at least one iteration")
    }

    /// Points per cluster in the final assignment.
    pub fn cluster_sizes(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == Cluster::One).count();
        [ones, self.labels.len() - ones]
    }
}

fn initial_centroids(
    cloud: &SampleCloud,
    init: &Initialization,
) -> Result<[Vec<f64>; 2], EmpiricalError> {
    match init {
        Initialization::Antipodal => {
            let mut minus = vec![0.0; cloud.n as usize];
            let mut plus = vec![0.0; cloud.n as usize];
            minus[0] = -1.0;
            plus[0] = 1.0;
            Ok([minus, plus])
        }
        Initialization::RandomPoints => {
            // A stream index past every per-point stream, reserved for
            // initialization draws.
            let mut rng = ChaCha8Rng::seed_from_u64(cloud.seed);
            rng.set_stream(cloud.count as u64);
            let first = rng.gen_range(0..cloud.count);
            let second = loop {
                let candidate = rng.gen_range(0..cloud.count);
                if cloud.point(candidate) != cloud.point(first) {
                    break candidate;
                }
            };
            Ok([cloud.point(first).to_vec(), cloud.point(second).to_vec()])
        }
        Initialization::Given(pair) => {
            for side in pair {
                if side.len() != cloud.n as usize {
                    return Err(EmpiricalError::LengthMismatch {
                        expected: cloud.n as usize,
                        got: side.len(),
                    });
                }
            }
            Ok(pair.clone())
        }
    }
}

/// Angle in radians between the centroid difference and the `e1` axis,
/// folded to `[0, pi/2]`.
fn axis_angle(centroids: &[Vec<f64>; 2]) -> f64 {
    let difference: Vec<f64> = centroids[1]
        .iter()
        .zip(&centroids[0])
        .map(|(&b, &a)| b - a)
        .collect();
    let norm = difference.iter().map(|&d| d * d).sum::<f64>().sqrt();
    if norm == 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    (difference[0].abs() / norm).clamp(-1.0, 1.0).acos()
}

/// Runs Lloyd's iteration: reassign to the nearer centroid, recompute
/// cluster means, repeat until the larger centroid movement drops below
/// `move_tol` or the budget runs out. The MSE trace records the error
/// after every mean update and never increases. An iteration that empties
/// a cluster aborts with [`EmpiricalError::EmptyClusterCollapse`].
pub fn lloyd(
    cloud: &SampleCloud,
    init: Initialization,
    max_iter: usize,
    move_tol: f64,
) -> Result<LloydRun, EmpiricalError> {
    if max_iter < 1 {
        return Err(EmpiricalError::NoIterationBudget);
    }
    if !move_tol.is_finite() || move_tol <= 0.0 {
        return Err(EmpiricalError::MoveTolOutOfRange(move_tol));
    }
    let mut centroids = initial_centroids(cloud, &init)?;
    let mut labels = Vec::new();
    let mut mse_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        labels = voronoi_reassign(cloud, &centroids)?;
        let means = match cluster_means(cloud, &labels) {
            Ok(means) => means,
            Err(EmpiricalError::EmptyCluster) => {
                let cluster = if labels.contains(&Cluster::One) {
                    Cluster::Two
                } else {
                    Cluster::One
                };
                return Err(EmpiricalError::EmptyClusterCollapse {
                    cluster,
                    iteration: iterations,
                });
            }
            Err(other) => return Err(other),
        };
        mse_trace.push(mse_with_centroids(cloud, &labels, &means));
        let movement = centroids
            .iter()
            .zip(&means)
            .map(|(old, new)| squared_distance(new, old).sqrt())
            .fold(0.0f64, f64::max);
        centroids = means;
        if movement < move_tol {
            converged = true;
            break;
        }
    }
    let axis_deviation_angle = axis_angle(&centroids);
    let extracted_cutoff = (axis_deviation_angle < AXIS_ALIGNMENT_MAX_ANGLE)
        .then(|| 0.5 * (centroids[0][0] + centroids[1][0]));
    Ok(LloydRun {
        centroids,
        labels,
        mse_trace,
        iterations,
        converged,
        axis_deviation_angle,
        extracted_cutoff,
    })
}
