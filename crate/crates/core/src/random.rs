//! Seeded generators for integer-valued spaces and cross metrics.

use std::sync::Arc;

use petgraph::algo::floyd_warshall;
use petgraph::graph::{NodeIndex, UnGraph};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::SquareMatrix;
use crate::metric::{validate_cross, CrossMetric, FiniteMetricSpace, SubsetSpec};
use crate::tree::{cross_distortion, PrefixMap, PrefixPair, RootedTree, Word, C_MIN};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shortest-path metric of a random connected graph with edge weights 1..=5.
pub fn random_space<R: Rng>(rng: &mut R, n: usize) -> FiniteMetricSpace {
    let n = n.max(1);
    let mut g: UnGraph<(), u32> = UnGraph::default();
    let nodes: Vec<NodeIndex> = (0..n).map(|_| g.add_node(())).collect();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        g.add_edge(nodes[i], nodes[j], rng.gen_range(1..=5));
    }
    for _ in 0..rng.gen_range(0..=n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            g.add_edge(nodes[a], nodes[b], rng.gen_range(1..=5));
        }
    }
    let apsp = floyd_warshall(&g, |e| *e.weight()).expect("weights are positive");
    let dist = SquareMatrix::from_fn(n, |i, j| apsp[&(nodes[i], nodes[j])] as f64);
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    FiniteMetricSpace::new(labels, dist, 0).expect("graph metrics are metrics")
}

pub fn random_subset<R: Rng>(rng: &mut R, space: &FiniteMetricSpace) -> SubsetSpec {
    let n = space.len();
    let k = rng.gen_range(1..=n);
    SubsetSpec::new(sample(rng, n, k))
}

/// `ρ(x,y') = min_{(z,w)} d(x,z) + c_zw + d(w,y)` over a random nonempty
/// relation, with integer `c_zw ≥ max(1, ⌈diam/2⌉)`.
pub fn random_cross<R: Rng>(rng: &mut R, space: &Arc<FiniteMetricSpace>) -> CrossMetric {
    let n = space.len();
    let diam = space.dist().iter().fold(0.0, f64::max);
    let lo = (diam / 2.0).ceil().max(1.0) as u32;
    let hi = diam as u32 + 3;
    let links: Vec<(usize, usize, f64)> = (0..rng.gen_range(1..=2 * n))
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(lo..=hi) as f64))
        .collect();
    let cross = SquareMatrix::from_fn(n, |x, y| {
        links
            .iter()
            .map(|&(z, w, c)| space.d(x, z) + c + space.d(w, y))
            .fold(f64::INFINITY, f64::min)
    });
    validate_cross(space.clone(), cross, 1.0).expect("generated cross metrics are valid")
}

fn random_word<R: Rng>(rng: &mut R, tree: &RootedTree, max_len: usize) -> Word {
    let len = rng.gen_range(1..=max_len.min(tree.depth() - 1));
    let mut at = 0;
    for _ in 0..len {
        let ch = tree.children(at);
        at = ch[rng.gen_range(0..ch.len())];
    }
    tree.word(at).clone()
}

fn disjoint(w: &Word, taken: &[Word]) -> bool {
    taken.iter().all(|t| !t.is_prefix_of(w) && !w.is_prefix_of(t))
}

/// Up to `max_pairs` transports between random cylinders of depth at most
/// `max_len`, valid on `tree`; `None` after repeated failures to fit.
pub fn random_prefix_map<R: Rng>(rng: &mut R, tree: &RootedTree, max_pairs: usize, max_len: usize) -> Option<PrefixMap> {
    for _ in 0..64 {
        let k = rng.gen_range(1..=max_pairs.max(1));
        let (mut us, mut vs) = (Vec::new(), Vec::new());
        for _ in 0..8 * k {
            if us.len() == k {
                break;
            }
            let (u, v) = (random_word(rng, tree, max_len), random_word(rng, tree, max_len));
            if disjoint(&u, &us) && disjoint(&v, &vs) {
                us.push(u);
                vs.push(v);
            }
        }
        let mut pairs: Vec<PrefixPair> = us
            .into_iter()
            .zip(vs)
            .map(|(u, v)| {
                let shift = u.len().abs_diff(v.len()) as f64;
                let c = shift.max(C_MIN) + 0.5 * rng.gen_range(0..=2) as f64;
                PrefixPair { u, v, c }
            })
            .collect();
        // lift the larger constant of each pair of pairs over their cross distortion
        for i in 0..pairs.len() {
            for j in 0..i {
                let gap = cross_distortion(&pairs[i], &pairs[j]) as f64;
                let top = if pairs[i].c >= pairs[j].c { i } else { j };
                pairs[top].c = pairs[top].c.max(gap);
            }
        }
        if let Ok(m) = PrefixMap::new(pairs) {
            if m.validate_on(tree).is_ok() {
                return Some(m);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_objects_validate() {
        let mut r = rng(7);
        for n in 1..=6 {
            let s = Arc::new(random_space(&mut r, n));
            assert_eq!(s.len(), n);
            let c = random_cross(&mut r, &s);
            assert!(c.revalidate().is_ok());
            assert!(c.cross().iter().all(|v| v.fract() == 0.0));
            assert!(!random_subset(&mut r, &s).is_empty());
        }
    }

    #[test]
    fn prefix_maps_fit() {
        let t = RootedTree::regular(2, 6).unwrap();
        let mut r = rng(1);
        for _ in 0..20 {
            let m = random_prefix_map(&mut r, &t, 4, 3).unwrap();
            assert!((1..=4).contains(&m.pairs.len()));
        }
    }

    #[test]
    fn seeds_reproduce() {
        let a = random_space(&mut rng(3), 5);
        let b = random_space(&mut rng(3), 5);
        assert_eq!(a, b);
    }
}
