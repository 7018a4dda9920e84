//! Axial projection of the uniform surface measure on two touching unit
//! spheres.
//!
//! The configuration is a pair of unit (n-1)-spheres in `R^n` that touch at a
//! single point. Everything in this crate is phrased along the line through
//! the two centers, in one of two coordinate frames:
//!
//! * **left frame** - the left sphere is centered at 0 and the right sphere
//!   at +2, so the touching point sits at +1;
//! * **midpoint frame** - both spheres are shifted left by 1, putting their
//!   centers at -1 and +1 and the touching point at the origin.
//!
//! Projecting the uniform surface measure of a single unit sphere onto its
//! axis yields the density `A_n (1 - x^2)^((n-3)/2)` on `[-1, 1]`, where the
//! constant `A_n = Gamma(n/2) / (sqrt(pi) * Gamma((n-1)/2))` normalizes the
//! total mass of each sphere to 1 (so the pair carries total mass 2).
//!
//! A separating hyperplane is described by a [`Cutoff`] `a`: the plane sits
//! at `1 - a` in the left frame (equivalently at `-a` in the midpoint
//! frame). `a = 0` is the symmetric split through the touching point,
//! `a = 2` pushes the plane past the far pole of the left sphere. The two
//! clusters induced by the plane are called *minus* (everything on the
//! smaller-coordinate side) and *plus*.
//!
//! Masses are evaluated by quadrature after the substitution `x = cos
//! theta`, which turns the density into the smooth profile
//! `A_n sin^(n-2) theta` and removes the inverse-square-root endpoint
//! singularity that appears at `n = 2`. First moments use an exact
//! antiderivative. A separate descending series for the minus mass on
//! `a in (1, 2)` provides an independent evaluation route for
//! cross-validation.

use serde::Serialize;
use thiserror::Error;

use crate::quadrature;

/// Resolution guard for strict dimension-monotonicity comparisons: mass
/// differences smaller than this are treated as indistinguishable from
/// quadrature noise.
pub const MONOTONICITY_RESOLUTION: f64 = 1e-12;

/// Truncation threshold for the descending mass series: summation stops
/// once the tail is provably below this magnitude.
pub const SERIES_TAIL_TOL: f64 = 1e-13;

/// Hard cap on series length; exceeding it reports divergence instead of
/// looping silently.
pub const SERIES_MAX_TERMS: usize = 10_000;

/// Errors reported by the measure layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    /// The ambient dimension must be at least 2 for the pair of spheres
    /// (and their axial projection) to make sense.
    #[error("ambient dimension must be at least 2, got {0}")]
    DimensionTooSmall(u32),
    /// Cutoffs live in `[-2, 2]`; negative values are folded by symmetry.
    #[error("cutoff must be a finite value in [-2, 2], got {0}")]
    CutoffOutOfRange(f64),
    /// At `a = 2` the minus cluster has no mass and no centroid.
    #[error("minus cluster is empty at cutoff a = {0}, centroid undefined")]
    EmptyCluster(f64),
    /// The descending mass series converges only for `n >= 3` and
    /// `a` strictly between 1 and 2.
    #[error("mass series requires n >= 3 and a cutoff in (1, 2), got n = {n}, a = {a}")]
    SeriesDomain { n: u32, a: f64 },
    /// The series failed to meet its truncation criterion within
    /// [`SERIES_MAX_TERMS`] terms.
    #[error("mass series did not converge within {terms} terms at n = {n}, a = {a}")]
    SeriesDivergent { n: u32, a: f64, terms: usize },
    /// The closed-form lower bound applies for `n >= 3` and `a in [1, 2)`.
    #[error("mass lower bound applies for n >= 3 and a cutoff in [1, 2), got n = {n}, a = {a}")]
    LowerBoundDomain { n: u32, a: f64 },
    /// Dimension monotonicity flips direction at `a = 1` and degenerates at
    /// the endpoints, so those cutoffs are rejected, as are dimension grids
    /// that are not strictly increasing with all entries above 3.
    #[error(
        "dimension monotonicity needs a cutoff away from 0, 1 and 2 \
         and a strictly increasing dimension grid with entries > 3"
    )]
    MonotonicityDomain,
}

/// Signed offset of the separating hyperplane, folded to `[0, 2]`.
///
/// The plane sits at `-a` in the midpoint frame; reflection symmetry of the
/// configuration makes `-a` and `+a` equivalent, so construction folds the
/// sign away and the rest of the crate only ever sees `a in [0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Cutoff(f64);

impl Cutoff {
    /// Validates and folds a raw offset.
    ///
    /// Finite inputs in `[-2, 0)` are mapped to their absolute value;
    /// anything outside `[-2, 2]`, or non-finite, is rejected.
    pub fn new(a: f64) -> Result<Self, MeasureError> {
        if !a.is_finite() || a.abs() > 2.0 {
            return Err(MeasureError::CutoffOutOfRange(a));
        }
        Ok(Cutoff(a.abs()))
    }

    /// The folded offset in `[0, 2]`.
    pub fn value(self) -> f64 {
        self.0
    }

    /// Position of the separating plane in the left frame (`1 - a`).
    pub fn plane_position(self) -> f64 {
        1.0 - self.0
    }
}

/// Masses of the two clusters; they always sum to 2 because each sphere
/// carries unit mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassPair {
    /// Mass on the minus side of the plane.
    pub minus: f64,
    /// Mass on the plus side of the plane.
    pub plus: f64,
}

/// Axial centroids of the two clusters in the left frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CentroidPair {
    /// Centroid of the minus cluster (lies in `[-1, 1 - a]`).
    pub minus: f64,
    /// Centroid of the plus cluster (lies in `(1 - a, 3)`).
    pub plus: f64,
}

impl CentroidPair {
    /// Both centroids shifted to the midpoint frame (centers at -1, +1).
    pub fn midpoint_frame(&self) -> (f64, f64) {
        (self.minus - 1.0, self.plus - 1.0)
    }
}

/// Gamma function at half-integer arguments: `gamma_half_integer(m)`
/// computes `Gamma(m / 2)` by the upward recursion
/// `Gamma(z + 1) = z Gamma(z)` seeded with `Gamma(1/2) = sqrt(pi)` and
/// `Gamma(1) = 1`. Only ratios of such values are ever needed, so no
/// general-purpose gamma implementation is involved.
fn gamma_half_integer(twice: u32) -> f64 {
    debug_assert!(twice >= 1);
    let start = if twice % 2 == 1 {
        std::f64::consts::PI.sqrt()
    } else {
        1.0
    };
    let mut value = start;
    let mut m = 2 - twice % 2;
    while m < twice {
        value *= m as f64 / 2.0;
        m += 2;
    }
    value
}

/// Normalization constant `A_n = Gamma(n/2) / (sqrt(pi) * Gamma((n-1)/2))`
/// of the projected density, for ambient dimension `n >= 2`.
pub fn normalization_constant(n: u32) -> Result<f64, MeasureError> {
    if n < 2 {
        return Err(MeasureError::DimensionTooSmall(n));
    }
    Ok(gamma_half_integer(n) / (std::f64::consts::PI.sqrt() * gamma_half_integer(n - 1)))
}

/// The axial projection of one unit sphere's surface measure in ambient
/// dimension `n`, together with every cluster statistic derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedMeasure {
    n: u32,
    norm: f64,
}

impl ProjectedMeasure {
    /// Builds the projected measure for ambient dimension `n >= 2`.
    pub fn new(n: u32) -> Result<Self, MeasureError> {
        let norm = normalization_constant(n)?;
        Ok(ProjectedMeasure { n, norm })
    }

    /// Ambient dimension `n`.
    pub fn dimension(&self) -> u32 {
        self.n
    }

    /// Normalization constant `A_n` of the projected density.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// `A_n / (n - 1)`, the prefactor shared by the first moment, the
    /// descending series and the closed-form mass bound.
    pub(crate) fn moment_scale(&self) -> f64 {
        self.norm / (self.n as f64 - 1.0)
    }

    /// Integrates `g` against the projected measure over `[x_lo, x_hi]`.
    ///
    /// Uses the `x = cos theta` substitution, under which the weight
    /// becomes `A_n sin^(n-2) theta`; the integrand is then smooth for
    /// every `n >= 2`, including the endpoint-singular planar case.
    pub(crate) fn integral_of<F: Fn(f64) -> f64>(&self, x_lo: f64, x_hi: f64, g: F) -> f64 {
        let theta_lo = x_hi.clamp(-1.0, 1.0).acos();
        let theta_hi = x_lo.clamp(-1.0, 1.0).acos();
        let power = self.n as i32 - 2;
        let norm = self.norm;
        quadrature::integrate(
            |theta| {
                let (sin, cos) = theta.sin_cos();
                norm * sin.powi(power) * g(cos)
            },
            theta_lo,
            theta_hi,
        )
    }

    /// Mass of the minus cluster: the projected measure of `[-1, 1 - a]`.
    ///
    /// Decreases from 1 at `a = 0` to 0 at `a = 2`, passing through 1/2 at
    /// `a = 1` for every dimension. For `n = 3` the projection is uniform
    /// and the exact linear value `(2 - a) / 2` is returned directly; all
    /// other dimensions are evaluated by quadrature.
    pub fn mass_minus(&self, cut: Cutoff) -> f64 {
        if self.n == 3 {
            return 0.5 * (2.0 - cut.value());
        }
        self.mass_minus_quadrature(cut)
    }

    /// Pure quadrature route for the minus mass, exposed so that the
    /// closed forms and the descending series can be validated against it.
    pub fn mass_minus_quadrature(&self, cut: Cutoff) -> f64 {
        self.integral_of(-1.0, cut.plane_position(), |_| 1.0)
    }

    /// Masses of both clusters; the plus side is the complement within
    /// total mass 2.
    pub fn masses(&self, cut: Cutoff) -> MassPair {
        let minus = self.mass_minus(cut);
        MassPair {
            minus,
            plus: 2.0 - minus,
        }
    }

    /// First moment of the minus cluster in the left frame, by the exact
    /// antiderivative: `-(A_n / (n - 1)) * (2a - a^2)^((n-1)/2)`.
    ///
    /// Always non-positive, and zero exactly at `a = 0` and `a = 2`.
    pub fn first_moment_minus(&self, cut: Cutoff) -> f64 {
        let a = cut.value();
        -self.moment_scale() * (2.0 * a - a * a).sqrt().powi(self.n as i32 - 1)
    }

    /// Quadrature route for the first moment, used to cross-check the
    /// antiderivative.
    pub fn first_moment_minus_quadrature(&self, cut: Cutoff) -> f64 {
        self.integral_of(-1.0, cut.plane_position(), |x| x)
    }

    /// Axial centroids of the two clusters in the left frame.
    ///
    /// The minus centroid is its first moment divided by its mass; the plus
    /// centroid follows from the pair's total first moment being exactly 2
    /// (the full left sphere contributes 0 and the right sphere 2). Fails
    /// with [`MeasureError::EmptyCluster`] at `a = 2` where the minus
    /// cluster vanishes.
    pub fn centroids(&self, cut: Cutoff) -> Result<CentroidPair, MeasureError> {
        let MassPair { minus, plus } = self.masses(cut);
        if minus <= 0.0 {
            return Err(MeasureError::EmptyCluster(cut.value()));
        }
        let moment = self.first_moment_minus(cut);
        Ok(CentroidPair {
            minus: moment / minus,
            plus: (2.0 - moment) / plus,
        })
    }

    /// Minus mass via the descending series in powers of `(2 - a)`,
    /// valid for `n >= 3` and `a` strictly inside `(1, 2)`:
    ///
    /// ```text
    /// M(a) = 2 A_n / (n-1) * sum_k  p_k (2a - a^2)^((n - 2k - 3)/2) (2 - a)^(2k + 1),
    /// p_k  = prod_{j=0..k} (n - 2j - 1) / (n + 2j - 1)
    /// ```
    ///
    /// For odd `n` the product hits zero and the series terminates exactly;
    /// for even `n` it eventually alternates and is truncated once the next
    /// term drops below [`SERIES_TAIL_TOL`] while shrinking, at which point
    /// the omitted tail is bounded by that term. This is an evaluation
    /// route fully independent of the quadrature path.
    pub fn mass_series(&self, cut: Cutoff) -> Result<f64, MeasureError> {
        let n = self.n;
        let a = cut.value();
        if n < 3 || !(a > 1.0 && a < 2.0) {
            return Err(MeasureError::SeriesDomain { n, a });
        }
        let scale = 2.0 * self.moment_scale();
        let ratio = (2.0 - a) / a; // (2 - a)^2 / (2a - a^2)
        let mut term = (2.0 * a - a * a).sqrt().powi(n as i32 - 3) * (2.0 - a);
        let mut sum = term;
        let mut alternating = false;
        for k in 0..SERIES_MAX_TERMS {
            let numerator = n as f64 - 2.0 * k as f64 - 3.0;
            if numerator == 0.0 {
                // Odd dimension: the product vanishes and the series is finite.
                return Ok(scale * sum);
            }
            let factor = numerator / (n as f64 + 2.0 * k as f64 + 1.0) * ratio;
            if factor < 0.0 {
                alternating = true;
            }
            let next = term * factor;
            if alternating && next.abs() < SERIES_TAIL_TOL && next.abs() < term.abs() {
                sum += next;
                return Ok(scale * sum);
            }
            sum += next;
            term = next;
        }
        Err(MeasureError::SeriesDivergent {
            n,
            a,
            terms: SERIES_MAX_TERMS,
        })
    }

    /// Checks the closed-form lower bound
    /// `mass_minus(a) >= (A_n / (n - 1)) * (2a - a^2)^((n-1)/2)`,
    /// valid for `n >= 3` and `a in [1, 2)`. The bound is the leading term
    /// of the descending series, i.e. the magnitude of the first moment.
    pub fn mass_lower_bound_holds(&self, cut: Cutoff) -> Result<bool, MeasureError> {
        let a = cut.value();
        if self.n < 3 || !(1.0..2.0).contains(&a) {
            return Err(MeasureError::LowerBoundDomain { n: self.n, a });
        }
        Ok(self.mass_minus(cut) >= -self.first_moment_minus(cut))
    }
}

/// Checks that the minus mass at a fixed cutoff moves strictly
/// monotonically across an increasing grid of dimensions: increasing in
/// `n` for `a in (0, 1)`, decreasing for `a in (1, 2)`.
///
/// Cutoffs 0, 1 and 2 are rejected (the mass is dimension-independent
/// there, so neither direction can hold strictly), as are grids that are
/// not strictly increasing or contain dimensions at or below 3. Each
/// consecutive difference must clear [`MONOTONICITY_RESOLUTION`] in the
/// expected direction; a single-entry grid is vacuously monotone.
pub fn dimension_monotonicity_holds(cut: Cutoff, n_grid: &[u32]) -> Result<bool, MeasureError> {
    let a = cut.value();
    if a == 0.0 || a == 1.0 || a == 2.0 {
        return Err(MeasureError::MonotonicityDomain);
    }
    if n_grid.is_empty()
        || n_grid.iter().any(|&n| n <= 3)
        || !n_grid.windows(2).all(|pair| pair[0] < pair[1])
    {
        return Err(MeasureError::MonotonicityDomain);
    }
    let masses: Vec<f64> = n_grid
        .iter()
        .map(|&n| {
            ProjectedMeasure::new(n)
                .expect("grid entries were validated above")
                .mass_minus(cut)
        })
        .collect();
    let direction = if a < 1.0 { 1.0 } else { -1.0 };
    Ok(masses
        .windows(2)
        .all(|pair| direction * (pair[1] - pair[0]) > MONOTONICITY_RESOLUTION))
}
