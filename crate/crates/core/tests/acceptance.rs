//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the output.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use double_metrics::algebra::{compose, idempotent_defect, sandwich_check, star};
use double_metrics::coarse::{coarse_equivalent, EquivalenceConfig, EquivalenceStatus};
use double_metrics::euclid::{angle_preservation_check, chi_euclid, euclid_round_trip, rotation_fixture, PolarGrid, PsiEuclidConfig, SNAP_TOL};
use double_metrics::fixtures;
use double_metrics::metric::subset_metric;
use double_metrics::random;
use double_metrics::sphi::{closure_holds, enumerate_sphi, homomorphism_holds, pb_semigroup, FiniteInverseSemigroup, PartialBijection};
use double_metrics::tree::{corollary_check, inner_lemma_defects, tree_round_trip, ChiConfig, PsiConfig, RootedTree};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if took > limit {
        o.pass = false;
    }
    o.detail = format!("{} [{:.2?} of {:?}]", o.detail, took, limit);
    o
}

fn two_blocks() -> Outcome {
    let (sg, phi) = fixtures::two_blocks().unwrap();
    let en = enumerate_sphi(&sg, &phi);
    let pb2: BTreeSet<PartialBijection> = pb_semigroup(2).unwrap().elements().iter().cloned().collect();
    let images: BTreeSet<PartialBijection> = en.classes.keys().cloned().collect();
    // the isomorphism class -> α(class) lands on every element of PB({1,2}) once
    let iso = images == pb2 && en.class_count() == 7;
    outcome(
        iso && en.targets_unique(),
        format!("{} elements, {} alpha-classes, classes = PB({{1,2}}): {iso}", en.element_count(), en.class_count()),
    )
}

fn fixed_blocks() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, k, want) in [(3, 1, 14), (4, 2, 21)] {
        let (sg, phi) = fixtures::fixed_block(n, k).unwrap();
        let en = enumerate_sphi(&sg, &phi);
        ok &= en.element_count() == want && closure_holds(&sg, &phi, &en);
        parts.push(format!("(n,k)=({n},{k}): {} (want {want})", en.element_count()));
    }
    outcome(ok, parts.join(", "))
}

fn exact_algebra() -> Outcome {
    let mut failures = Vec::new();
    let trials = 250;
    for seed in 0..trials {
        let mut rng = random::rng(seed);
        let n = 1 + (seed as usize % 6);
        let space = Arc::new(random::random_space(&mut rng, n));
        let (a, b, c) = (
            random::random_cross(&mut rng, &space),
            random::random_cross(&mut rng, &space),
            random::random_cross(&mut rng, &space),
        );
        let assoc = compose(&compose(&a, &b).unwrap(), &c).unwrap() == compose(&a, &compose(&b, &c).unwrap()).unwrap();
        let anti = star(&compose(&a, &b).unwrap()) == compose(&star(&b), &star(&a)).unwrap();
        let inv = star(&star(&a)) == a;
        let sandwich = sandwich_check(&a);
        let subset = random::random_subset(&mut rng, &space);
        let defect = idempotent_defect(&subset_metric(&space, &subset).unwrap());
        if !(assoc && anti && inv && sandwich && defect == 0.0) {
            failures.push(seed);
        }
    }
    outcome(failures.is_empty(), format!("{trials} random cross metrics, failing seeds {failures:?}"))
}

fn continuum_witness() -> Outcome {
    let cfg = EquivalenceConfig::default();
    let g = fixtures::powers_pair(9).unwrap();
    let v = coarse_equivalent(&g.first, &g.second, &cfg).unwrap();
    let fwd = v.forward.as_ref().unwrap();
    let phi1 = fwd.last()[0];
    let top = "19683".to_string();
    let wit = fwd.witnesses.last().unwrap()[0].clone();
    let witness_ok = wit == Some((top.clone(), format!("{top}'")));
    let s = fixtures::shifted_pair(12).unwrap();
    let w = coarse_equivalent(&s.first, &s.second, &cfg).unwrap();
    outcome(
        v.status == EquivalenceStatus::Divergent
            && phi1 >= 6599.0
            && witness_ok
            && w.status == EquivalenceStatus::EquivalentAtScale,
        format!(
            "powers: {:?}, phi(1) = {phi1}, witness {wit:?}; shifted: {:?} from stage {:?}",
            v.status, w.status, w.stabilization_stage
        ),
    )
}

fn tree_round_trips() -> Outcome {
    let tree = RootedTree::regular(2, 8).unwrap();
    let mut maps: Vec<(String, _)> = fixtures::binary_prefix_maps().into_iter().map(|(n, m)| (n.to_string(), m)).collect();
    let mut rng = random::rng(2024);
    for i in 0..30 {
        let m = random::random_prefix_map(&mut rng, &tree, 4, 4).unwrap();
        maps.push((format!("random{i}"), m));
    }
    let resolvable = maps.iter().filter(|(_, m)| m.resolvable_at(tree.depth())).count();
    let mut bad = Vec::new();
    for (name, m) in &maps {
        let rt = tree_round_trip(&tree, m, &ChiConfig::default(), &PsiConfig::default()).unwrap();
        let inner = inner_lemma_defects(&tree, m).unwrap().iter().all(|(w, b)| w <= b);
        if !rt.matches || !inner {
            bad.push(name.clone());
        }
    }
    outcome(bad.is_empty(), format!(
            "{} prefix maps on the depth-8 binary tree ({resolvable} resolvable), failures {bad:?}",
            maps.len()
        ))
}

fn corollary() -> Outcome {
    let r = corollary_check(8).unwrap();
    outcome(
        r.zero_and_unit && r.all_seven && r.half_line.round_trips_exact && r.line.round_trips_exact,
        format!(
            "half-line: {:?} from {} maps; line: {} distinct from {} maps",
            r.half_line.recovered,
            r.half_line.constructible,
            r.line.recovered.len(),
            r.line.constructible
        ),
    )
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

fn euclid_round_trips() -> Outcome {
    let cfg = PsiEuclidConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for theta in [30.0_f64, 90.0, 137.0] {
        let mut env = Vec::new();
        for r_max in [1000.0, 2000.0] {
            let (grid, pi) = rotation_fixture(theta, PolarGrid::default_radii(r_max)).unwrap();
            let rt = euclid_round_trip(&grid, &pi, &cfg).unwrap();
            let err = wrap(rt.recovery.angle.unwrap() - theta.to_radians()).abs();
            if r_max == 1000.0 {
                ok &= rt.matches && err <= 1e-2;
                parts.push(format!("{theta}°: angle error {err:.1e}, fit residual {:.1e}", rt.recovery.fit_residual));
            }
            env.push(rt.recovery.envelope);
        }
        ok &= env[1] <= env[0] / 2.0;
        parts.push(format!("envelope {:.3e} -> {:.3e}", env[0], env[1]));
    }
    let (grid, pi) = rotation_fixture(90.0, PolarGrid::default_radii(1000.0)).unwrap();
    let rho = chi_euclid(&grid, &pi, SNAP_TOL).unwrap();
    let rows = angle_preservation_check(&grid, &rho, (0, 2), (1, 3), &[10.0, 100.0, 1000.0], 2.0).unwrap();
    ok &= rows.iter().all(|r| r.ok);
    outcome(ok, parts.join("; "))
}

fn homomorphism() -> Outcome {
    let mut ok = true;
    let mut pairs = 0;
    let cases = [fixtures::two_blocks().unwrap(), fixtures::fixed_block(3, 1).unwrap(), fixtures::fixed_block(4, 2).unwrap()];
    for (sg, phi) in &cases {
        let en = enumerate_sphi(sg, phi);
        pairs += en.element_count() * en.element_count();
        ok &= homomorphism_holds(sg, phi, &en);
    }
    outcome(ok, format!("{pairs} ordered pairs checked"))
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 two-block S_Phi is PB({1,2})", Duration::from_secs(10), two_blocks),
        ("2 fixed-block S_Phi counts", Duration::from_secs(60), fixed_blocks),
        ("3 exact min-plus algebra", Duration::from_secs(60), exact_algebra),
        ("4 continuum witness divergence", Duration::from_secs(30), continuum_witness),
        ("5 tree round trip", Duration::from_secs(120), tree_round_trips),
        ("6 half-line and line boundary maps", Duration::from_secs(120), corollary),
        ("7 euclidean round trip", Duration::from_secs(120), euclid_round_trips),
        ("8 alpha homomorphism", Duration::from_secs(60), homomorphism),
    ];
    let mut all = true;
    for (name, limit, f) in criteria {
        let o = timed(limit, f);
        all &= o.pass;
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
