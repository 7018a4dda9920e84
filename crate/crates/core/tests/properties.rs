//! Randomized invariants tying the independent evaluation routes to each
//! other: quadrature vs closed forms vs series, analytic derivatives vs
//! finite differences, exact symmetries of the measure, and the descent
//! property of the empirical pipeline.

use proptest::prelude::*;

use twomeans::discrete_line::{all_partitions, partition_cost, three_one_mse, FourPointConfig};
use twomeans::empirical::{cluster_means, empirical_mse, voronoi_reassign};
use twomeans::{
    enumerate_optimal, lloyd, mse, sample_spheres, Cluster, Cutoff, EmpiricalError, Initialization,
    ProjectedMeasure,
};

fn cut(a: f64) -> Cutoff {
    Cutoff::new(a).unwrap()
}

proptest! {
    #[test]
    fn cutoff_folds_to_magnitude(a in -2.0f64..=2.0) {
        let cutoff = Cutoff::new(a).unwrap();
        prop_assert_eq!(cutoff.value(), a.abs());
        prop_assert_eq!(cutoff.plane_position(), 1.0 - a.abs());
    }

    #[test]
    fn out_of_range_cutoffs_are_rejected(a in 2.0000001f64..1e6) {
        prop_assert!(Cutoff::new(a).is_err());
        prop_assert!(Cutoff::new(-a).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflected_masses_sum_to_one(n in 2u32..=12, a in 0.0f64..=2.0) {
        let measure = ProjectedMeasure::new(n).unwrap();
        let sum = measure.mass_minus(cut(a)) + measure.mass_minus(cut(2.0 - a));
        prop_assert!((sum - 1.0).abs() < 1e-11, "sum = {sum}");
    }

    #[test]
    fn mass_is_decreasing_in_the_cutoff(
        n in 2u32..=12,
        a1 in 0.0f64..=2.0,
        a2 in 0.0f64..=2.0,
    ) {
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let measure = ProjectedMeasure::new(n).unwrap();
        prop_assert!(
            measure.mass_minus(cut(hi)) <= measure.mass_minus(cut(lo)) + 1e-12
        );
    }

    #[test]
    fn centroids_carry_the_total_moment(n in 2u32..=12, a in 0.001f64..=1.99) {
        let measure = ProjectedMeasure::new(n).unwrap();
        let masses = measure.masses(cut(a));
        let centroids = measure.centroids(cut(a)).unwrap();
        // Both sphere centers sit at 0 and 2, so the mass-weighted
        // centroid average must equal the grand total moment 2.
        let recombined = centroids.minus * masses.minus + centroids.plus * masses.plus;
        prop_assert!((recombined - 2.0).abs() < 1e-10, "recombined = {recombined}");
    }

    #[test]
    fn component_sum_agrees_with_mass_moment_identity(
        n in 2u32..=10,
        a in 0.0f64..=1.99,
    ) {
        let measure = ProjectedMeasure::new(n).unwrap();
        let combined = mse::components(&measure, cut(a)).unwrap().combined();
        let closed = mse::total(&measure, cut(a));
        prop_assert!((combined - closed).abs() < 1e-10, "{combined} vs {closed}");
    }

    #[test]
    fn planar_closed_form_agrees_with_generic_route(a in 0.0f64..=1.99) {
        let measure = ProjectedMeasure::new(2).unwrap();
        let closed = mse::planar_closed_form(cut(a));
        let generic = mse::total(&measure, cut(a));
        prop_assert!((closed - generic).abs() < 1e-11, "{closed} vs {generic}");
    }

    #[test]
    fn odd_dimension_series_terminates_onto_quadrature(
        k in 0usize..5,
        a in 1.01f64..=1.99,
    ) {
        let n = [3u32, 5, 7, 9, 11][k];
        let measure = ProjectedMeasure::new(n).unwrap();
        let series = measure.mass_series(cut(a)).unwrap();
        let quad = measure.mass_minus_quadrature(cut(a));
        prop_assert!((series - quad).abs() < 1e-8, "n = {n}: {series} vs {quad}");
    }

    #[test]
    fn even_dimension_series_converges_onto_quadrature(
        k in 0usize..5,
        a in 1.01f64..=1.99,
    ) {
        let n = [4u32, 6, 8, 10, 12][k];
        let measure = ProjectedMeasure::new(n).unwrap();
        let series = measure.mass_series(cut(a)).unwrap();
        let quad = measure.mass_minus_quadrature(cut(a));
        prop_assert!((series - quad).abs() < 1e-8, "n = {n}: {series} vs {quad}");
    }

    #[test]
    fn analytic_derivative_matches_finite_differences(
        n in 2u32..=10,
        a in 0.05f64..=1.95,
    ) {
        let measure = ProjectedMeasure::new(n).unwrap();
        let analytic = mse::derivative(&measure, cut(a)).unwrap();
        let h = 1e-6;
        let numeric =
            (mse::total(&measure, cut(a + h)) - mse::total(&measure, cut(a - h))) / (2.0 * h);
        // Relative-or-absolute: near the planar stationary point the
        // derivative itself crosses zero.
        let scale = analytic.abs().max(1.0);
        prop_assert!(
            (analytic - numeric).abs() < 1e-6 * scale,
            "n = {n}, a = {a}: {analytic} vs {numeric}"
        );
    }

    #[test]
    fn derivative_factorization_holds(n in 2u32..=12, a in 0.01f64..=1.99) {
        let measure = ProjectedMeasure::new(n).unwrap();
        let derivative = mse::derivative(&measure, cut(a)).unwrap();
        let masses = measure.masses(cut(a));
        let root = (2.0 * a - a * a).sqrt();
        let prefactor = 2.0 * measure.normalization() * root.powi(n as i32 - 3)
            / (masses.minus * masses.plus).powi(2);
        let refactored = prefactor * mse::bracket_factor(&measure, cut(a));
        prop_assert!(
            (derivative - refactored).abs() <= 1e-9 * derivative.abs().max(1e-300),
            "n = {n}, a = {a}: {derivative} vs {refactored}"
        );
    }
}

proptest! {
    #[test]
    fn symmetric_split_always_costs_one(epsilon in 0.001f64..=2.0) {
        let config = FourPointConfig::new(epsilon).unwrap();
        let split = partition_cost(
            &config,
            [Cluster::One, Cluster::One, Cluster::Two, Cluster::Two],
        )
        .unwrap();
        prop_assert!((split.mse - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_one_cost_follows_the_closed_form(epsilon in 0.001f64..=2.0) {
        let config = FourPointConfig::new(epsilon).unwrap();
        let split = partition_cost(
            &config,
            [Cluster::One, Cluster::Two, Cluster::Two, Cluster::Two],
        )
        .unwrap();
        prop_assert!((split.mse - three_one_mse(epsilon)).abs() < 1e-12);
    }

    #[test]
    fn optimal_structure_is_determined_by_the_threshold(epsilon in 0.001f64..=2.0) {
        let threshold = (3f64.sqrt() - 1.0) / 2.0;
        prop_assume!((epsilon - threshold).abs() > 1e-6);
        let optima = enumerate_optimal(epsilon).unwrap();
        if epsilon < threshold {
            prop_assert!(optima.iter().all(|p| p.is_three_one_split()));
        } else {
            prop_assert_eq!(optima.len(), 1);
            prop_assert!(optima[0].is_symmetric_split());
        }
    }

    #[test]
    fn every_labeling_cost_is_at_least_the_optimum(epsilon in 0.001f64..=2.0) {
        let config = FourPointConfig::new(epsilon).unwrap();
        let best = enumerate_optimal(epsilon).unwrap()[0].mse;
        for labels in all_partitions() {
            let cost = partition_cost(&config, labels).unwrap().mse;
            prop_assert!(cost >= best - 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampling_is_on_sphere_and_reproducible(
        n in 2u32..=8,
        count in 2usize..=64,
        seed in any::<u64>(),
    ) {
        let cloud = sample_spheres(n, count, seed).unwrap();
        for (point, source) in cloud.iter() {
            let center = source.center_x1();
            let mut norm_squared = (point[0] - center) * (point[0] - center);
            for &c in &point[1..] {
                norm_squared += c * c;
            }
            prop_assert!((norm_squared.sqrt() - 1.0).abs() < 1e-12);
        }
        prop_assert_eq!(&cloud, &sample_spheres(n, count, seed).unwrap());
    }

    #[test]
    fn one_voronoi_step_improves_random_labelings(
        seed in any::<u64>(),
        flips in prop::collection::vec(any::<bool>(), 64),
    ) {
        let cloud = sample_spheres(3, 64, seed).unwrap();
        let labels: Vec<Cluster> = flips
            .iter()
            .map(|&f| if f { Cluster::One } else { Cluster::Two })
            .collect();
        let before = match empirical_mse(&cloud, &labels) {
            Ok(value) => value,
            Err(EmpiricalError::EmptyCluster) => return Ok(()),
            Err(other) => return Err(TestCaseError::fail(other.to_string())),
        };
        let means = cluster_means(&cloud, &labels).unwrap();
        let reassigned = voronoi_reassign(&cloud, &means).unwrap();
        match empirical_mse(&cloud, &reassigned) {
            Ok(after) => prop_assert!(after <= before + 1e-12),
            // All points may collapse onto one side; that is a legal
            // improvement direction, just not expressible as a 2-means
            // labeling.
            Err(EmpiricalError::EmptyCluster) => {}
            Err(other) => return Err(TestCaseError::fail(other.to_string())),
        }
    }

    #[test]
    fn lloyd_descends_on_small_clouds(
        seed in any::<u64>(),
        count in 64usize..=512,
    ) {
        let cloud = sample_spheres(3, count, seed).unwrap();
        match lloyd(&cloud, Initialization::RandomPoints, 50, 1e-9) {
            Ok(run) => {
                for pair in run.mse_trace.windows(2) {
                    prop_assert!(pair[1] <= pair[0] + 1e-12);
                }
            }
            // Small clouds can legitimately collapse a cluster.
            Err(EmpiricalError::EmptyClusterCollapse { .. }) => {}
            Err(other) => return Err(TestCaseError::fail(other.to_string())),
        }
    }
}
