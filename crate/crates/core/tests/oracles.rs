//! Library results against naive reimplementations.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use double_metrics::algebra::{compose, star};
use double_metrics::fixtures;
use double_metrics::metric::{hausdorff_distance, subset_metric, FiniteMetricSpace, SubsetSpec};
use double_metrics::random;
use double_metrics::sphi::{enumerate_sphi, pb_semigroup, FiniteInverseSemigroup, PartialBijection};
use double_metrics::tree::{boundary_distance, RootedTree};

type PMap = HashMap<usize, usize>;
/// Sorted graph of an element and its block map.
type Row = (Vec<(usize, usize)>, Vec<(usize, usize)>);

/// Every partial injection of `{1..n}`, read off base-(n+1) counters.
fn all_partial_injections(n: usize) -> Vec<PMap> {
    let total = (n + 1).pow(n as u32);
    (0..total)
        .filter_map(|mut code| {
            let mut m = PMap::new();
            for x in 1..=n {
                let y = code % (n + 1);
                code /= n + 1;
                if y != 0 {
                    m.insert(x, y);
                }
            }
            let img: HashSet<_> = m.values().collect();
            (img.len() == m.len()).then_some(m)
        })
        .collect()
}

fn invert(m: &PMap) -> PMap {
    m.iter().map(|(&a, &b)| (b, a)).collect()
}

/// For identity blocks: every block is either disjoint from the domain or
/// contained in it with its image again a block. Returns the block map.
fn block_map(s: &PMap, blocks: &[BTreeSet<usize>]) -> Option<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (i, e) in blocks.iter().enumerate() {
        let inside = e.iter().filter(|x| s.contains_key(x)).count();
        if inside == 0 {
            continue;
        }
        if inside != e.len() {
            return None;
        }
        let img: BTreeSet<usize> = e.iter().map(|x| s[x]).collect();
        let j = blocks.iter().position(|f| *f == img)?;
        out.push((i + 1, j + 1));
    }
    Some(out)
}

fn naive_sphi(n: usize, blocks: &[BTreeSet<usize>]) -> Vec<(PMap, Vec<(usize, usize)>)> {
    all_partial_injections(n)
        .into_iter()
        .filter_map(|s| {
            let fwd = block_map(&s, blocks)?;
            block_map(&invert(&s), blocks)?;
            Some((s, fwd))
        })
        .collect()
}

fn to_pmap(p: &PartialBijection) -> PMap {
    p.pairs().into_iter().collect()
}

fn check_sphi(n: usize, blocks: Vec<BTreeSet<usize>>, sg_phi: (double_metrics::sphi::PbSemigroup, double_metrics::sphi::PhiSet<PartialBijection>)) {
    let (sg, phi) = sg_phi;
    let en = enumerate_sphi(&sg, &phi);
    let mut got: Vec<Row> = en
        .elements
        .iter()
        .map(|e| {
            let mut s: Vec<_> = to_pmap(&e.element).into_iter().collect();
            s.sort();
            (s, e.alpha.pairs())
        })
        .collect();
    let mut want: Vec<Row> = naive_sphi(n, &blocks)
        .into_iter()
        .map(|(s, a)| {
            let mut s: Vec<_> = s.into_iter().collect();
            s.sort();
            (s, a)
        })
        .collect();
    got.sort();
    want.sort();
    assert_eq!(got, want);
}

#[test]
fn sphi_matches_block_oracle() {
    let set = |v: &[usize]| v.iter().copied().collect::<BTreeSet<_>>();
    check_sphi(4, vec![set(&[1, 2]), set(&[3, 4])], fixtures::two_blocks().unwrap());
    check_sphi(3, vec![set(&[1])], fixtures::fixed_block(3, 1).unwrap());
    check_sphi(4, vec![set(&[1, 2])], fixtures::fixed_block(4, 2).unwrap());
    assert_eq!(naive_sphi(4, &[set(&[1, 2]), set(&[3, 4])]).len(), 17);
    assert_eq!(naive_sphi(3, &[set(&[1])]).len(), 14);
    assert_eq!(naive_sphi(4, &[set(&[1, 2])]).len(), 21);
}

#[test]
fn pb_sizes_match_counting_formula() {
    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    fn fact(k: usize) -> usize {
        (1..=k).product()
    }
    for n in 0..=5 {
        let want: usize = (0..=n).map(|k| binom(n, k).pow(2) * fact(k)).sum();
        let sg = pb_semigroup(n).unwrap();
        assert_eq!(sg.elements().len(), want, "n = {n}");
        assert_eq!(all_partial_injections(n).len(), want);
    }
}

#[test]
fn pb_product_is_composition() {
    let sg = pb_semigroup(3).unwrap();
    for s in sg.elements() {
        for t in sg.elements() {
            let (ms, mt) = (to_pmap(s), to_pmap(t));
            let want: PMap = mt.iter().filter_map(|(&x, y)| ms.get(y).map(|&z| (x, z))).collect();
            assert_eq!(to_pmap(&sg.mul(s, t)), want);
        }
    }
}

#[test]
fn compose_matches_triple_loop() {
    for seed in 0..40 {
        let mut rng = random::rng(seed);
        let n = 1 + seed as usize % 7;
        let space = Arc::new(random::random_space(&mut rng, n));
        let a = random::random_cross(&mut rng, &space);
        let b = random::random_cross(&mut rng, &space);
        let c = compose(&a, &b).unwrap();
        for x in 0..n {
            for y in 0..n {
                let mut best = f64::INFINITY;
                for u in 0..n {
                    best = best.min(b.get(x, u) + 1.0 + a.get(u, y));
                }
                assert_eq!(c.get(x, y), best);
                assert_eq!(star(&c).get(x, y), c.get(y, x));
            }
        }
    }
}

#[test]
fn subset_metric_on_a_line() {
    let coords: Vec<f64> = (0..9).map(|i| (i * i) as f64).collect();
    let space = Arc::new(FiniteMetricSpace::line(&coords).unwrap());
    for a in [vec![0], vec![3], vec![2, 7], vec![0, 4, 8]] {
        let rho = subset_metric(&space, &SubsetSpec::new(a.clone())).unwrap();
        let rho2 = compose(&rho, &rho).unwrap();
        for x in 0..9 {
            for y in 0..9 {
                let want = a
                    .iter()
                    .map(|&p| (coords[x] - coords[p]).abs() + 1.0 + (coords[p] - coords[y]).abs())
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(rho.get(x, y), want);
                assert_eq!(rho2.get(x, y), want + 2.0);
            }
        }
    }
}

#[test]
fn hausdorff_matches_neighbourhood_scan() {
    for seed in 0..30 {
        let mut rng = random::rng(100 + seed);
        let space = random::random_space(&mut rng, 2 + seed as usize % 6);
        let a = random::random_subset(&mut rng, &space);
        let b = random::random_subset(&mut rng, &space);
        if a.is_empty() || b.is_empty() {
            continue;
        }
        let covers = |from: &SubsetSpec, to: &SubsetSpec, r: f64| {
            from.indices().iter().all(|&p| to.indices().iter().any(|&q| space.d(p, q) <= r))
        };
        // smallest distance value r with each set in the closed r-neighbourhood of the other
        let mut radii: Vec<f64> = space.dist().iter().collect();
        radii.sort_by(f64::total_cmp);
        let want = radii.into_iter().find(|&r| covers(&a, &b, r) && covers(&b, &a, r)).unwrap();
        assert_eq!(hausdorff_distance(&space, &a, &b).unwrap(), want);
    }
}

#[test]
fn tree_distances_and_boundary_distance() {
    let tree = RootedTree::regular(3, 4).unwrap();
    let lcp = |a: &str, b: &str| a.chars().zip(b.chars()).take_while(|(x, y)| x == y).count();
    for i in 0..tree.len() {
        for j in 0..tree.len() {
            let (a, b) = (tree.word(i).to_string(), tree.word(j).to_string());
            let (a, b) = (a.trim_start_matches('ε'), b.trim_start_matches('ε'));
            assert_eq!(tree.distance(i, j), a.len() + b.len() - 2 * lcp(a, b));
        }
    }
    let rays = tree.rays();
    for r in &rays {
        for t in &rays {
            let l = lcp(&r.to_string(), &t.to_string());
            let bd = boundary_distance(&tree, r, t).unwrap();
            assert_eq!(bd.common_prefix, l);
            assert_eq!(bd.value, (-(l as f64)).exp());
        }
    }
}
