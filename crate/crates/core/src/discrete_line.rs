//! The four-point line configuration: the smallest case where 2-means
//! prefers an asymmetric partition.
//!
//! Four unit-weight-¼ atoms sit at `{-2-e, -e, e, 2+e}` for a spacing
//! parameter `e > 0` — two tight inner points and two far outer points,
//! symmetric about the origin. Exhausting all two-cluster labelings shows
//! a structural flip: for small `e` the optimum is a *three–one split*
//! (one cluster absorbs an outer point together with both inner points,
//! at cost `2(1 + e + e^2)/3 < 1`), while for large `e` it is the
//! *symmetric split* into left and right pairs (cost exactly 1 for every
//! `e`). The crossover spacing, where the two structures tie, is
//! `(sqrt(3) - 1)/2`; [`separation_threshold`] recovers it by bisecting on
//! the brute-force cost difference, so the closed form is available as an
//! independent check rather than an input.

use serde::Serialize;
use thiserror::Error;

use crate::Cluster;

/// Two enumerated costs closer than this are treated as a tie. The
/// three–one split and its mirror image are equal-cost by symmetry but
/// their floating-point evaluations may differ in the last few bits.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Smallest accepted bisection tolerance.
pub const MIN_THRESHOLD_TOL: f64 = 1e-12;
/// Largest accepted bisection tolerance.
pub const MAX_THRESHOLD_TOL: f64 = 1e-3;

/// Errors reported by the four-point oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscreteError {
    #[error("spacing must be a positive finite number, got {0}")]
    SpacingOutOfRange(f64),
    #[error(
        "tolerance {0:e} outside the accepted range [{MIN_THRESHOLD_TOL:e}, {MAX_THRESHOLD_TOL:e}]"
    )]
    ToleranceOutOfRange(f64),
    #[error("a labeling must use both clusters")]
    EmptyCluster,
}

/// The symmetric four-point configuration `{-2-e, -e, e, 2+e}`, each atom
/// carrying weight ¼.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourPointConfig {
    pub epsilon: f64,
    pub points: [f64; 4],
}

impl FourPointConfig {
    /// Builds the configuration for spacing `epsilon > 0`.
    pub fn new(epsilon: f64) -> Result<Self, DiscreteError> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(DiscreteError::SpacingOutOfRange(epsilon));
        }
        Ok(FourPointConfig {
            epsilon,
            points: [-2.0 - epsilon, -epsilon, epsilon, 2.0 + epsilon],
        })
    }
}

/// One two-cluster labeling of the four points, with its cluster means
/// and mean-squared error (weights ¼ each).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscretePartition {
    pub labels: [Cluster; 4],
    pub mse: f64,
    /// Means of cluster one and cluster two.
    pub means: (f64, f64),
}

impl DiscretePartition {
    /// The points carried by the given cluster, in position order.
    pub fn members(&self, config: &FourPointConfig, cluster: Cluster) -> Vec<f64> {
        self.labels
            .iter()
            .zip(config.points)
            .filter(|(label, _)| **label == cluster)
            .map(|(_, x)| x)
            .collect()
    }

    /// True when the partition is the left-pair/right-pair split.
    pub fn is_symmetric_split(&self) -> bool {
        self.labels[0] == self.labels[1]
            && self.labels[2] == self.labels[3]
            && self.labels[0] != self.labels[2]
    }

    /// True when one cluster is a singleton (necessarily an outer point
    /// for optimal partitions).
    pub fn is_three_one_split(&self) -> bool {
        let ones = self.labels.iter().filter(|&&l| l == Cluster::One).count();
        ones == 1 || ones == 3
    }
}

/// Evaluates one labeling: cluster means and the weighted mean-squared
/// error. Fails when either cluster is empty.
pub fn partition_cost(
    config: &FourPointConfig,
    labels: [Cluster; 4],
) -> Result<DiscretePartition, DiscreteError> {
    let mut sums = [0.0f64; 2];
    let mut counts = [0usize; 2];
    for (label, x) in labels.iter().zip(config.points) {
        sums[label.index()] += x;
        counts[label.index()] += 1;
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(DiscreteError::EmptyCluster);
    }
    let means = (sums[0] / counts[0] as f64, sums[1] / counts[1] as f64);
    let mse = labels
        .iter()
        .zip(config.points)
        .map(|(label, x)| {
            let mean = if *label == Cluster::One {
                means.0
            } else {
                means.1
            };
            0.25 * (x - mean) * (x - mean)
        })
        .sum();
    Ok(DiscretePartition { labels, mse, means })
}

/// All 7 two-cluster labelings up to swapping the cluster names: point 0
/// is pinned to cluster one, the other three points range over both.
pub fn all_partitions() -> [[Cluster; 4]; 7] {
    let mut labelings = [[Cluster::One; 4]; 7];
    for (index, mask) in (1u8..8).enumerate() {
        for bit in 0..3 {
            if mask & (1 << bit) != 0 {
                labelings[index][bit + 1] = Cluster::Two;
            }
        }
    }
    labelings
}

/// Brute-forces all labelings for the given spacing and returns every
/// minimizer: ties within [`TIE_TOLERANCE`] are all included, in
/// enumeration order. Below the threshold spacing this yields the
/// three–one split and its mirror; above it, the symmetric split alone;
/// at the threshold, all three.
pub fn enumerate_optimal(epsilon: f64) -> Result<Vec<DiscretePartition>, DiscreteError> {
    let config = FourPointConfig::new(epsilon)?;
    let evaluated: Vec<DiscretePartition> = all_partitions()
        .iter()
        .map(|&labels| partition_cost(&config, labels).expect("both clusters populated"))
        .collect();
    let best = evaluated
        .iter()
        .map(|p| p.mse)
        .fold(f64::INFINITY, f64::min);
    Ok(evaluated
        .into_iter()
        .filter(|p| p.mse <= best + TIE_TOLERANCE)
        .collect())
}

/// The closed-form cost of the three–one split: `2 (1 + e + e^2) / 3`.
/// Used by tests as an independent check on the enumeration; strictly
/// below 1 exactly for spacings under the separation threshold.
pub fn three_one_mse(epsilon: f64) -> f64 {
    2.0 * (1.0 + epsilon + epsilon * epsilon) / 3.0
}

/// Locates the spacing where the three–one split stops beating the
/// symmetric split, by bisecting on the brute-force cost difference of
/// the two structures. Returns a value within `tol` of the crossover.
pub fn separation_threshold(tol: f64) -> Result<f64, DiscreteError> {
    if !(MIN_THRESHOLD_TOL..=MAX_THRESHOLD_TOL).contains(&tol) {
        return Err(DiscreteError::ToleranceOutOfRange(tol));
    }
    // Cost difference (three–one minus symmetric) is strictly increasing
    // in the spacing: negative at 0.01, positive at 1.
    let advantage = |epsilon: f64| -> f64 {
        let config = FourPointConfig::new(epsilon).expect("positive spacing");
        let three_one = partition_cost(
            &config,
            [Cluster::One, Cluster::Two, Cluster::Two, Cluster::Two],
        )
        .expect("valid labeling");
        let symmetric = partition_cost(
            &config,
            [Cluster::One, Cluster::One, Cluster::Two, Cluster::Two],
        )
        .expect("valid labeling");
        three_one.mse - symmetric.mse
    };
    let mut lo = 0.01;
    let mut hi = 1.0;
    debug_assert!(advantage(lo) < 0.0 && advantage(hi) > 0.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if advantage(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
