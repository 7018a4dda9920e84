//! The exact 2-means mean-squared error of a hyperplane partition.
//!
//! For a cutoff `a` the plane at `1 - a` (left frame) splits the pair of
//! spheres into a minus and a plus cluster; the mean-squared error `E(n, a)`
//! is the mass-weighted average squared distance of every surface point to
//! its own cluster centroid, with total mass 2 normalized away. This module
//! offers three evaluation routes that are cross-validated in the tests:
//!
//! * [`components`] integrates the three geometric contributions
//!   separately (minus slab, captured cap of the left sphere, whole right
//!   sphere) by quadrature;
//! * [`total`] combines minus mass and first moment through the closed
//!   mass-moment identity `E = 3 - (m^2/M + (2 - m)^2/(2 - M)) / 2`;
//! * [`planar_closed_form`] evaluates the planar case `n = 2` entirely from
//!   arccos/square-root expressions with no quadrature at all.
//!
//! The analytic cutoff derivative ([`derivative`]) factors as
//! `2 A_n (2a - a^2)^((n-3)/2) / (M_minus M_plus)^2 * L(n, a)`, where the
//! polynomial bracket `L` is exposed separately as [`bracket_factor`]; the
//! derivative sums the six-term expansion of `L` while the bracket uses a
//! regrouped form, so agreement between the two is a meaningful (if small)
//! consistency check on top of the finite-difference validation in the
//! test suite.

use serde::Serialize;
use thiserror::Error;

use crate::projected_measure::{Cutoff, MassPair, MeasureError, ProjectedMeasure};

/// Width of the refusal zone around the planar prefactor singularities:
/// for `n = 2` the derivative prefactor behaves like `(2a - a^2)^(-1/2)`,
/// which diverges at both `a = 0` and `a = 2`.
pub const PLANAR_SINGULAR_ZONE: f64 = 1e-9;

/// Errors reported by the error-model layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MseError {
    /// Propagated measure-layer failure (degenerate cluster at `a = 2`).
    #[error(transparent)]
    Measure(#[from] MeasureError),
    /// Planar derivative refusal: within [`PLANAR_SINGULAR_ZONE`] of an
    /// endpoint the `n = 2` prefactor overflows rather than informs.
    #[error("singular prefactor: the n = 2 derivative diverges near a = {a}")]
    SingularPrefactor { a: f64 },
    /// The derivative expression degenerates to 0/0 at `a = 2` for `n = 3`.
    #[error("derivative formula degenerates at the endpoint a = {a} for n = {n}")]
    Endpoint { n: u32, a: f64 },
}

/// The three additive contributions to the squared-error integral, each
/// taken against the unit-mass-per-sphere projection (so their sum carries
/// total mass 2 and [`MseComponents::combined`] halves it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MseComponents {
    /// Left-sphere slab `[-1, 1 - a]` against the minus centroid.
    pub minus: f64,
    /// Left-sphere cap `[1 - a, 1]` captured by the plus cluster.
    pub captured: f64,
    /// The whole right sphere against the plus centroid.
    pub plus: f64,
}

impl MseComponents {
    /// The mean-squared error: component sum divided by the total mass 2.
    pub fn combined(&self) -> f64 {
        0.5 * (self.minus + self.captured + self.plus)
    }
}

/// Everything the model knows about one `(n, a)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MseReport {
    pub n: u32,
    pub a: f64,
    pub minus: f64,
    pub captured: f64,
    pub plus: f64,
    pub total: f64,
    /// Absent where the derivative is refused (planar singular zone,
    /// degenerate endpoints).
    pub derivative: Option<f64>,
    /// Paired with `derivative`; the polynomial bracket of its
    /// factorization.
    pub bracket_factor: Option<f64>,
}

/// Squared-distance profile of an axial position `x` on the unit sphere to
/// an axial center `c`: transverse part `1 - x^2` plus axial part
/// `(x - c)^2`.
fn squared_distance_profile(x: f64, center: f64) -> f64 {
    1.0 - x * x + (x - center) * (x - center)
}

/// The three error contributions at cutoff `a`, each integrated by
/// quadrature against the projected measure with the exact cluster
/// centroids. Fails at `a = 2`, where the minus cluster is empty and its
/// centroid undefined.
pub fn components(measure: &ProjectedMeasure, cut: Cutoff) -> Result<MseComponents, MseError> {
    let centroids = measure.centroids(cut)?;
    let plane = cut.plane_position();
    let minus = measure.integral_of(-1.0, plane, |x| {
        squared_distance_profile(x, centroids.minus)
    });
    let captured = measure.integral_of(plane, 1.0, |x| squared_distance_profile(x, centroids.plus));
    // The right sphere sits at +2, so its points have axial coordinate
    // 2 + x with x distributed by the same projection.
    let plus = measure.integral_of(-1.0, 1.0, |x| {
        squared_distance_profile(x, centroids.plus - 2.0)
    });
    Ok(MseComponents {
        minus,
        captured,
        plus,
    })
}

/// The total error `E(n, a)` through the mass-moment identity
/// `E = 3 - (m^2 / M_minus + (2 - m)^2 / M_plus) / 2`, where `m` is the
/// minus first moment.
///
/// Defined on the whole closed cutoff range: at `a = 2` the identity is
/// 0/0 and the analytic single-cluster limit 2 is returned (every point
/// then sits at squared distance 1 + 1 from the shared centroid at the
/// touching point).
pub fn total(measure: &ProjectedMeasure, cut: Cutoff) -> f64 {
    if cut.value() >= 2.0 {
        return 2.0;
    }
    let MassPair { minus, plus } = measure.masses(cut);
    let moment = measure.first_moment_minus(cut);
    3.0 - 0.5 * (moment * moment / minus + (2.0 - moment) * (2.0 - moment) / plus)
}

/// Fully closed-form planar total: the `n = 2` mass `1 - acos(1 - a)/pi`
/// and moment `-sqrt(2a - a^2)/pi` fed through the same mass-moment
/// identity as [`total`]. No quadrature is involved, which makes this an
/// independent cross-check of the generic route.
pub fn planar_closed_form(cut: Cutoff) -> f64 {
    let a = cut.value();
    if a >= 2.0 {
        return 2.0;
    }
    let mass = 1.0 - (1.0 - a).acos() / std::f64::consts::PI;
    let moment = -(2.0 * a - a * a).sqrt() / std::f64::consts::PI;
    3.0 - 0.5 * (moment * moment / mass + (2.0 - moment) * (2.0 - moment) / (2.0 - mass))
}

/// `U = (A_n / (n - 1)) (2a - a^2)^((n-1)/2)`, the magnitude of the minus
/// first moment; every term of the bracket is built from it.
fn moment_magnitude(measure: &ProjectedMeasure, cut: Cutoff) -> f64 {
    -measure.first_moment_minus(cut)
}

/// The six-term expansion of the bracket polynomial `L(n, a)`, in the
/// order (descending powers of the minus mass `M`, with `U` the moment
/// magnitude):
///
/// ```text
/// (1-a) M^3 + (2a-1) M^2 + (2-a) U M^2 + U^2 M + 2 (a-1) U M - U^2
/// ```
fn bracket_terms(measure: &ProjectedMeasure, cut: Cutoff) -> [f64; 6] {
    let a = cut.value();
    let mass = measure.mass_minus(cut);
    let u = moment_magnitude(measure, cut);
    [
        (1.0 - a) * mass * mass * mass,
        (2.0 * a - 1.0) * mass * mass,
        (2.0 - a) * u * mass * mass,
        u * u * mass,
        2.0 * (a - 1.0) * u * mass,
        -u * u,
    ]
}

/// The bracket polynomial `L(n, a)` of the derivative factorization,
/// evaluated in regrouped (Horner-like in the minus mass) form:
///
/// ```text
/// L = ((1-a) M + (2a-1) + (2-a) U) M^2 + (U + 2(a-1)) U M - U^2
/// ```
///
/// Positive exactly where the error is strictly increasing in `a`.
pub fn bracket_factor(measure: &ProjectedMeasure, cut: Cutoff) -> f64 {
    let a = cut.value();
    let mass = measure.mass_minus(cut);
    let u = moment_magnitude(measure, cut);
    ((1.0 - a) * mass + (2.0 * a - 1.0) + (2.0 - a) * u) * mass * mass
        + (u + 2.0 * (a - 1.0)) * u * mass
        - u * u
}

/// The analytic cutoff derivative
/// `dE/da = 2 A_n (2a - a^2)^((n-3)/2) / (M_minus M_plus)^2 * L(n, a)`.
///
/// Endpoint handling:
/// * `n > 3`: the prefactor vanishes at `a = 0` and `a = 2`, so the
///   derivative is defined as exactly 0 there;
/// * `n = 3`: the prefactor is constant; `a = 0` evaluates normally (to 0)
///   but `a = 2` is a 0/0 degeneracy and is refused;
/// * `n = 2`: the prefactor diverges at both endpoints, so cutoffs within
///   [`PLANAR_SINGULAR_ZONE`] of either are refused instead of returning
///   an overflow-prone value.
pub fn derivative(measure: &ProjectedMeasure, cut: Cutoff) -> Result<f64, MseError> {
    let n = measure.dimension();
    let a = cut.value();
    if n == 2 && (a <= PLANAR_SINGULAR_ZONE || 2.0 - a <= PLANAR_SINGULAR_ZONE) {
        return Err(MseError::SingularPrefactor { a });
    }
    if a == 0.0 || a == 2.0 {
        if n > 3 {
            return Ok(0.0);
        }
        if a == 2.0 {
            // n = 3: constant prefactor against a doubly vanishing bracket.
            return Err(MseError::Endpoint { n, a });
        }
        // n = 3 at a = 0 falls through; the formula yields exactly 0.
    }
    let MassPair { minus, plus } = measure.masses(cut);
    let root = (2.0 * a - a * a).sqrt();
    let prefactor =
        2.0 * measure.normalization() * root.powi(n as i32 - 3) / (minus * plus).powi(2);
    Ok(prefactor * bracket_terms(measure, cut).iter().sum::<f64>())
}

/// Assembles the full per-point report. The derivative (and its bracket)
/// are omitted rather than failing the whole report where they are
/// refused; a genuinely degenerate partition (`a = 2`) still fails because
/// the components do.
pub fn report(measure: &ProjectedMeasure, cut: Cutoff) -> Result<MseReport, MseError> {
    let parts = components(measure, cut)?;
    let derivative = derivative(measure, cut).ok();
    Ok(MseReport {
        n: measure.dimension(),
        a: cut.value(),
        minus: parts.minus,
        captured: parts.captured,
        plus: parts.plus,
        total: total(measure, cut),
        derivative,
        bracket_factor: derivative.map(|_| bracket_factor(measure, cut)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn measure(n: u32) -> ProjectedMeasure {
        ProjectedMeasure::new(n).unwrap()
    }

    fn cut(a: f64) -> Cutoff {
        Cutoff::new(a).unwrap()
    }

    /// Central finite difference of `total` with step `1e-6`.
    fn total_finite_difference(m: &ProjectedMeasure, a: f64) -> f64 {
        let h = 1e-6;
        (total(m, cut(a + h)) - total(m, cut(a - h))) / (2.0 * h)
    }

    #[test]
    fn symmetric_cut_costs_one_in_every_dimension() {
        for n in 2..=10 {
            let value = total(&measure(n), cut(0.0));
            assert!((value - 1.0).abs() < 1e-12, "n = {n}: {value}");
        }
    }

    #[test]
    fn uniform_projection_total_is_quadratic() {
        // n = 3 collapses to E = 1 + a^2/4.
        let m = measure(3);
        assert!((total(&m, cut(0.8)) - 1.16).abs() < 1e-12);
        for k in 0..=40 {
            let a = 0.05 * k as f64;
            let value = total(&m, cut(a));
            assert!(
                (value - (1.0 + a * a / 4.0)).abs() < 1e-12,
                "a = {a}: {value}"
            );
        }
    }

    #[test]
    fn far_pole_cut_reaches_single_cluster_limit() {
        assert_eq!(total(&measure(3), cut(2.0)), 2.0);
        assert_eq!(total(&measure(7), cut(2.0)), 2.0);
        // Just inside the endpoint the identity itself is already close.
        assert!((total(&measure(4), cut(2.0 - 1e-7)) - 2.0).abs() < 1e-3);
    }

    #[test]
    fn captured_cap_vanishes_at_symmetric_cut() {
        let parts = components(&measure(5), cut(0.0)).unwrap();
        assert_eq!(parts.captured, 0.0);
        assert!((parts.combined() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn component_sum_matches_closed_total() {
        for n in [2, 3, 4, 6, 10] {
            let m = measure(n);
            for a in [0.0, 0.3, 0.75, 1.0, 1.4, 1.9] {
                let parts = components(&m, cut(a)).unwrap();
                let closed = total(&m, cut(a));
                assert!(
                    (parts.combined() - closed).abs() < 1e-10,
                    "n = {n}, a = {a}: {} vs {closed}",
                    parts.combined()
                );
            }
        }
    }

    #[test]
    fn uniform_component_sum_at_unit_cutoff() {
        let parts = components(&measure(3), cut(1.0)).unwrap();
        let sum = parts.minus + parts.captured + parts.plus;
        assert!((sum - 2.5).abs() < 1e-11, "sum {sum}");
    }

    #[test]
    fn components_fail_on_empty_minus_cluster() {
        assert!(matches!(
            components(&measure(4), cut(2.0)),
            Err(MseError::Measure(MeasureError::EmptyCluster(_)))
        ));
    }

    #[test]
    fn planar_witness_components_match_arc_integrals() {
        // At a = 1 - sqrt(3)/2 all three contributions reduce to closed
        // forms in pi (worked out from the arc-length parametrization of
        // the two circles).
        let a = 1.0 - 3f64.sqrt() / 2.0;
        let parts = components(&measure(2), cut(a)).unwrap();
        let zeta2 = 5.0 / 7.0 + 3.0 / (7.0 * PI);
        let plus_center = 1.0 + zeta2; // left-frame plus centroid
        let minus_expected = 5.0 / 6.0 - 3.0 / (10.0 * PI * PI);
        let captured_expected = (1.0 + plus_center * plus_center) / 6.0 - plus_center / PI;
        let plus_expected = 1.0 + (1.0 - zeta2) * (1.0 - zeta2);
        assert!((parts.minus - minus_expected).abs() < 1e-12);
        assert!((parts.captured - captured_expected).abs() < 1e-12);
        assert!((parts.plus - plus_expected).abs() < 1e-12);
        let witness = (45.0 * PI * PI - 30.0 * PI - 9.0) / (35.0 * PI * PI);
        assert!((parts.combined() - witness).abs() < 1e-12);
    }

    #[test]
    fn planar_closed_form_matches_quadrature_route() {
        let m = measure(2);
        for k in 0..40 {
            let a = 0.05 * k as f64;
            let closed = planar_closed_form(cut(a));
            let generic = total(&m, cut(a));
            assert!((closed - generic).abs() < 1e-11, "a = {a}");
        }
        assert_eq!(planar_closed_form(cut(0.0)), 1.0);
        let at_unit = 3.0 - 0.5 * ((1.0 / (PI * PI)) / 0.5 + (2.0 + 1.0 / PI).powi(2) / 1.5);
        assert!((planar_closed_form(cut(1.0)) - at_unit).abs() < 1e-14);
    }

    #[test]
    fn planar_witness_value_is_below_0_987() {
        let a = 1.0 - 3f64.sqrt() / 2.0;
        let value = planar_closed_form(cut(a));
        let witness = (45.0 * PI * PI - 30.0 * PI - 9.0) / (35.0 * PI * PI);
        assert!((value - witness).abs() < 1e-12);
        assert!(value < 0.987);
    }

    #[test]
    fn uniform_derivative_is_half_the_cutoff() {
        let m = measure(3);
        assert!((derivative(&m, cut(0.5)).unwrap() - 0.25).abs() < 1e-12);
        for a in [0.0, 0.1, 1.0, 1.9] {
            let value = derivative(&m, cut(a)).unwrap();
            assert!((value - a / 2.0).abs() < 1e-11, "a = {a}: {value}");
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for (n, a) in [(4, 1.0), (2, 0.6), (6, 1.7), (10, 0.35)] {
            let m = measure(n);
            let analytic = derivative(&m, cut(a)).unwrap();
            let numeric = total_finite_difference(&m, a);
            let rel = (analytic - numeric).abs() / analytic.abs().max(1e-12);
            assert!(rel < 1e-7, "n = {n}, a = {a}: {analytic} vs {numeric}");
        }
    }

    #[test]
    fn derivative_positive_in_higher_dimensions() {
        assert!(derivative(&measure(6), cut(1.7)).unwrap() > 0.0);
        assert!(derivative(&measure(4), cut(1.0)).unwrap() > 0.0);
    }

    #[test]
    fn derivative_endpoint_conventions() {
        assert_eq!(derivative(&measure(5), cut(0.0)).unwrap(), 0.0);
        assert_eq!(derivative(&measure(4), cut(2.0)).unwrap(), 0.0);
        assert_eq!(derivative(&measure(3), cut(0.0)).unwrap(), 0.0);
        assert!(matches!(
            derivative(&measure(3), cut(2.0)),
            Err(MseError::Endpoint { n: 3, .. })
        ));
    }

    #[test]
    fn planar_derivative_refuses_singular_zone() {
        for a in [0.0, 1e-10, 2.0 - 1e-10, 2.0] {
            assert!(matches!(
                derivative(&measure(2), cut(a)),
                Err(MseError::SingularPrefactor { .. })
            ));
        }
        // Just outside the zone the value is finite and meaningful.
        assert!(derivative(&measure(2), cut(1e-8)).is_ok());
    }

    #[test]
    fn planar_error_initially_decreases() {
        // The planar minimum sits at a strictly positive cutoff, so the
        // derivative must be negative on the way there.
        let value = derivative(&measure(2), cut(0.1)).unwrap();
        assert!(value < 0.0, "got {value}");
    }

    #[test]
    fn bracket_refactors_the_derivative() {
        for n in [2, 3, 4, 5, 8] {
            let m = measure(n);
            for a in [0.01, 0.5, 1.0, 1.5, 1.99] {
                let deriv = derivative(&m, cut(a)).unwrap();
                let MassPair { minus, plus } = m.masses(cut(a));
                let root = (2.0 * a - a * a).sqrt();
                let prefactor =
                    2.0 * m.normalization() * root.powi(n as i32 - 3) / (minus * plus).powi(2);
                let refactored = prefactor * bracket_factor(&m, cut(a));
                let rel = (deriv - refactored).abs() / deriv.abs().max(1e-300);
                assert!(rel < 1e-9, "n = {n}, a = {a}: {deriv} vs {refactored}");
            }
        }
    }

    #[test]
    fn report_carries_consistent_fields() {
        let m = measure(4);
        let rep = report(&m, cut(0.7)).unwrap();
        assert_eq!(rep.n, 4);
        assert_eq!(rep.a, 0.7);
        assert!((0.5 * (rep.minus + rep.captured + rep.plus) - rep.total).abs() < 1e-10);
        assert!(rep.derivative.is_some());
        assert!(rep.bracket_factor.is_some());

        let refused = report(&measure(2), cut(0.0)).unwrap();
        assert!(refused.derivative.is_none());
        assert!(refused.bracket_factor.is_none());
        assert!(report(&m, cut(2.0)).is_err());
    }
}
