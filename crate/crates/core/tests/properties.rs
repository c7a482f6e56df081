use std::sync::Arc;

use proptest::prelude::*;

use double_metrics::algebra::{compose, idempotent_defect, sandwich_check, star};
use double_metrics::coarse::distortion_profile;
use double_metrics::euclid::{chi_euclid, euclid_round_trip, stratification_gap, PartialIsometry, PolarGrid, PsiEuclidConfig, SNAP_TOL};
use double_metrics::metric::{metric_violations, subset_metric, CrossMetric, FiniteMetricSpace, ScaleFamily};
use double_metrics::random;
use double_metrics::sphi::{closure_holds, enumerate_sphi, homomorphism_holds, pb_semigroup, FiniteInverseSemigroup, PhiSet};
use double_metrics::tree::{chi_tree, tree_round_trip, ChiConfig, PsiConfig, RootedTree};

fn triple(seed: u64, n: usize) -> (Arc<FiniteMetricSpace>, [CrossMetric; 3]) {
    let mut rng = random::rng(seed);
    let space = Arc::new(random::random_space(&mut rng, n));
    let c = [
        random::random_cross(&mut rng, &space),
        random::random_cross(&mut rng, &space),
        random::random_cross(&mut rng, &space),
    ];
    (space, c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn composition_is_associative(seed in any::<u64>(), n in 1usize..=6) {
        let (_, [a, b, c]) = triple(seed, n);
        let left = compose(&compose(&a, &b).unwrap(), &c).unwrap();
        let right = compose(&a, &compose(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn star_reverses_products(seed in any::<u64>(), n in 1usize..=6) {
        let (_, [a, b, _]) = triple(seed, n);
        prop_assert_eq!(star(&compose(&a, &b).unwrap()), compose(&star(&b), &star(&a)).unwrap());
        prop_assert_eq!(star(&star(&a)), a);
    }

    #[test]
    fn compositions_stay_compatible(seed in any::<u64>(), n in 1usize..=6) {
        let (_, [a, b, _]) = triple(seed, n);
        let ab = compose(&a, &b).unwrap();
        prop_assert!(ab.revalidate().is_ok());
        prop_assert!(metric_violations(&ab.double_matrix()).is_empty());
    }

    #[test]
    fn sandwich_holds(seed in any::<u64>(), n in 1usize..=6) {
        let (_, [a, _, _]) = triple(seed, n);
        prop_assert!(sandwich_check(&a));
    }

    #[test]
    fn subset_gluings_are_idempotent(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = random::rng(seed);
        let space = Arc::new(random::random_space(&mut rng, n));
        let a = random::random_subset(&mut rng, &space);
        let rho = subset_metric(&space, &a).unwrap();
        prop_assert_eq!(idempotent_defect(&rho), 0.0);
        prop_assert!(sandwich_check(&rho));
    }

    #[test]
    fn profiles_are_monotone(seed in any::<u64>(), n in 3usize..=6) {
        let (_, [a, b, _]) = triple(seed, n);
        let sets: Vec<Vec<usize>> = (1..=n).map(|k| (0..k).collect()).collect();
        let scales: Vec<f64> = (1..=n).map(|k| k as f64).collect();
        let fa = ScaleFamily::from_restrictions(&a, &sets, scales.clone()).unwrap();
        let fb = ScaleFamily::from_restrictions(&b, &sets, scales).unwrap();
        let p = distortion_profile(&fa, &fb, &[1.0, 2.0, 4.0, 8.0, 16.0]).unwrap();
        prop_assert!(p.is_monotone());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tree_round_trip_random_maps(seed in any::<u64>(), branching in 2usize..=3) {
        let depth = if branching == 2 { 6 } else { 4 };
        let tree = RootedTree::regular(branching, depth).unwrap();
        let mut rng = random::rng(seed);
        let m = random::random_prefix_map(&mut rng, &tree, 4, depth - 2).unwrap();
        prop_assume!(m.resolvable_at(depth));
        let rho = chi_tree(&tree, &m, &ChiConfig::default()).unwrap();
        prop_assert!(rho.metric.revalidate().is_ok());
        let rt = tree_round_trip(&tree, &m, &ChiConfig::default(), &PsiConfig::default()).unwrap();
        prop_assert!(rt.matches, "{:?}", m);
    }

    #[test]
    fn euclid_round_trip_grid_symmetries(k in 0usize..8, reflect in any::<bool>(), mask in 1u8..=255) {
        let grid = PolarGrid::uniform(8, PolarGrid::default_radii(256.0)).unwrap();
        let t = k as f64 * std::f64::consts::FRAC_PI_4;
        let (s, c) = t.sin_cos();
        let u = if reflect { vec![vec![c, s], vec![s, -c]] } else { vec![vec![c, -s], vec![s, c]] };
        let dirs: Vec<usize> = (0..8).filter(|d| mask & (1 << d) != 0).collect();
        let pi = PartialIsometry::single(u, dirs).unwrap();
        let rt = euclid_round_trip(&grid, &pi, &PsiEuclidConfig::default()).unwrap();
        prop_assert!(rt.matches);
    }

    #[test]
    fn restratification_stays_within_weights(m1 in 1u32..4, m2 in 4u32..8, cut in 1usize..8) {
        let grid = PolarGrid::uniform(8, vec![1.0, 2.0, 4.0, 8.0, 16.0]).unwrap();
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let all: Vec<usize> = (0..8).collect();
        let a = PartialIsometry::new(id.clone(), vec![(m1, all[..cut].to_vec()), (m2, all.clone())]).unwrap();
        let b = PartialIsometry::new(id, vec![(m1 + 1, all.clone())]).unwrap();
        let (gap, bound) = stratification_gap(&grid, &a, &b).unwrap();
        prop_assert!(gap <= bound);
        prop_assert!(chi_euclid(&grid, &a, SNAP_TOL).unwrap().revalidate().is_ok());
    }
}

#[test]
fn sphi_closure_for_every_singleton_phi() {
    let sg = pb_semigroup(3).unwrap();
    for e in sg.idempotents() {
        if e == sg.zero() {
            continue;
        }
        let phi = PhiSet::new(&sg, vec![e]).unwrap();
        let en = enumerate_sphi(&sg, &phi);
        assert!(closure_holds(&sg, &phi, &en));
        assert!(homomorphism_holds(&sg, &phi, &en));
    }
}
