//! Exact and empirical 2-means clustering error for two touching unit
//! spheres.
//!
//! The geometry: two unit-radius spheres in `R^n` whose surfaces touch at
//! a single point, carrying the uniform surface probability measure (half
//! on each sphere). Splitting the surface by a hyperplane orthogonal to
//! the symmetry axis at cutoff `a` and placing a centroid in each half
//! yields a mean-squared error `E(n, a)`. This crate evaluates that error
//! exactly, differentiates it, certifies its monotonicity properties on
//! dense grids, locates the optimal cutoff, and cross-checks everything
//! against a seeded Monte Carlo Lloyd pipeline.
//!
//! Module map:
//!
//! * [`projected_measure`] — the axial projection of the surface measure,
//!   with masses, moments, centroids, a descending series expansion, and
//!   dimension-monotonicity checks;
//! * [`mse`] — the error `E(n, a)`, its three geometric components, the
//!   analytic cutoff derivative and its bracket factorization, and the
//!   fully closed planar (`n = 2`) form;
//! * [`optimizer`] — golden-section / bisection / grid search for the
//!   minimizing cutoff, plus derivative-positivity certification sweeps;
//! * [`discrete_line`] — the four-point line configuration whose optimal
//!   partition flips from a three–one split to the symmetric split at
//!   `epsilon = (sqrt(3) - 1) / 2`;
//! * [`empirical`] — seeded sphere sampling, empirical MSE, Voronoi
//!   reassignment, and full Lloyd iteration with cutoff extraction.
//!
//! Everything is deterministic: quadrature is adaptive but fixed-rule,
//! searches use fixed grids, and the Monte Carlo layer derives each
//! point's randomness from the seed and the point index alone, so results
//! are identical across thread counts.

use serde::Serialize;

mod quadrature;

pub mod discrete_line;
pub mod empirical;
pub mod mse;
pub mod optimizer;
pub mod projected_measure;

pub use discrete_line::{
    enumerate_optimal, separation_threshold, DiscreteError, DiscretePartition, FourPointConfig,
};
pub use empirical::{
    lloyd, sample_spheres, EmpiricalError, Initialization, LloydRun, SampleCloud, SourceSphere,
};
pub use mse::{MseComponents, MseError, MseReport};
pub use optimizer::{
    certify_monotonicity, minimize_cutoff, minimize_cutoff_with, monotonicity_violations,
    OptimizationResult, OptimizeError, SearchMethod,
};
pub use projected_measure::{
    dimension_monotonicity_holds, CentroidPair, Cutoff, MassPair, MeasureError, ProjectedMeasure,
};

/// Label of one of the two clusters in a 2-means partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Cluster {
    One,
    Two,
}

impl Cluster {
    /// The opposite label.
    pub fn other(self) -> Cluster {
        match self {
            Cluster::One => Cluster::Two,
            Cluster::Two => Cluster::One,
        }
    }

    /// Zero-based index, for addressing per-cluster accumulators.
    pub fn index(self) -> usize {
        match self {
            Cluster::One => 0,
            Cluster::Two => 1,
        }
    }
}

impl std::fmt::Display for Cluster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Cluster::One => "1",
            Cluster::Two => "2",
        })
    }
}
