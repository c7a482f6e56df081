//! Rooted trees with unit edges, their boundary of rays, and finitely
//! described partial bi-Lipschitz boundary maps.
//!
//! A [`PrefixMap`] sends the cylinder of rays below `u` to the cylinder below
//! `v` by `u·w ↦ v·w`. [`chi_tree`] turns it into a metric on the doubled
//! tree (the graph metric of two tree copies joined by edges `z -- f(z)'` of
//! length `2C`), and [`psi_tree`] recovers the boundary map from any cross
//! metric on the doubled tree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use petgraph::graph::{NodeIndex, UnGraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::metric::{same_space, validate_cross, CrossMetric, FiniteMetricSpace, ScaleFamily, DEFAULT_MIN_GAP};
use crate::rays::{strata, Ray, RayConfig, RayFamily, Strata};

/// Smallest stratum constant; keeps every gluing edge at length >= 1.
pub const C_MIN: f64 = 0.5;

/// Path from the root as child positions.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<u16>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn common_prefix(&self, other: &Word) -> usize {
        self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count()
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len.min(self.len())].to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        if self.0.iter().all(|&c| c < 10) {
            for c in &self.0 {
                write!(f, "{c}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
            f.write_str(&parts.join("."))
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Digits (`"0110"`), dot-separated positions (`"0.12.3"`), or `""`/`"ε"` for the root.
    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || s == "ε" {
            return Ok(Word::default());
        }
        let bad = || Error::Tree(format!("malformed word `{s}`"));
        if s.contains('.') {
            s.split('.').map(|p| p.parse::<u16>().map_err(|_| bad())).collect::<Result<_>>().map(Word)
        } else {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as u16).ok_or_else(bad))
                .collect::<Result<_>>()
                .map(Word)
        }
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug)]
struct Node {
    depth: usize,
    parent: Option<usize>,
    children: Vec<usize>,
    word: Word,
}

/// Rooted tree truncated at `depth`, without dead ends above the truncation.
///
/// Node ids are breadth-first: level by level, in the order given.
#[derive(Clone, Debug)]
pub struct RootedTree {
    depth: usize,
    nodes: Vec<Node>,
    level_start: Vec<usize>,
    index: BTreeMap<Word, usize>,
    space: Arc<FiniteMetricSpace>,
}

impl RootedTree {
    /// `children[l][i]` lists the level-`l+1` indices of the children of the
    /// `i`-th node on level `l`, for `l < depth`.
    pub fn new(depth: usize, children: &[Vec<Vec<usize>>]) -> Result<Self> {
        let bad = |m: String| Err(Error::Tree(m));
        if children.len() < depth {
            return bad(format!("{} levels of children for depth {depth}", children.len()));
        }
        if children.iter().skip(depth).any(|l| l.iter().any(|c| !c.is_empty())) {
            return bad("children listed below the truncation depth".into());
        }
        let mut nodes = vec![Node {
            depth: 0,
            parent: None,
            children: Vec::new(),
            word: Word::default(),
        }];
        let mut level_start = vec![0, 1];
        for (l, level) in children.iter().take(depth).enumerate() {
            let (lo, hi) = (level_start[l], level_start[l + 1]);
            if level.len() != hi - lo {
                return bad(format!("level {l} has {} nodes but {} child lists", hi - lo, level.len()));
            }
            let next_count: usize = level.iter().map(Vec::len).sum();
            let mut parent_of = vec![None; next_count];
            for (i, ch) in level.iter().enumerate() {
                if ch.is_empty() {
                    return bad(format!("dead end at level {l}, node {i}"));
                }
                for &c in ch {
                    if c >= next_count || parent_of[c].is_some() {
                        return bad(format!("level {} node {c} has no unique parent", l + 1));
                    }
                    parent_of[c] = Some(i);
                }
            }
            let base = hi;
            for (c, p) in parent_of.into_iter().enumerate() {
                let p = lo + p.expect("every child index is used once");
                let pos = level[p - lo].iter().position(|&x| x == c).unwrap() as u16;
                let mut word = nodes[p].word.clone();
                word.0.push(pos);
                nodes.push(Node {
                    depth: l + 1,
                    parent: Some(p),
                    children: Vec::new(),
                    word,
                });
            }
            for (i, ch) in level.iter().enumerate() {
                nodes[lo + i].children = ch.iter().map(|&c| base + c).collect();
            }
            level_start.push(base + next_count);
        }
        // children lists in position order so that word letters index them
        for i in 0..nodes.len() {
            let mut ch = std::mem::take(&mut nodes[i].children);
            ch.sort_by_key(|&c| *nodes[c].word.0.last().unwrap());
            nodes[i].children = ch;
        }
        let index = nodes.iter().enumerate().map(|(i, n)| (n.word.clone(), i)).collect();
        let n = nodes.len();
        let meet = |a: usize, b: usize| nodes[a].word.common_prefix(&nodes[b].word);
        let dist = SquareMatrix::from_fn(n, |a, b| (nodes[a].depth + nodes[b].depth - 2 * meet(a, b)) as f64);
        let labels = nodes.iter().map(|n| n.word.to_string()).collect();
        let space = Arc::new(FiniteMetricSpace::new_unchecked(labels, dist, 0));
        Ok(Self {
            depth,
            nodes,
            level_start,
            index,
            space,
        })
    }

    /// Every node has `branching` children.
    pub fn regular(branching: usize, depth: usize) -> Result<Self> {
        if branching == 0 {
            return Err(Error::Tree("branching must be positive".into()));
        }
        let children: Vec<Vec<Vec<usize>>> = (0..depth)
            .map(|l| {
                let count = branching.pow(l as u32);
                (0..count).map(|i| (i * branching..(i + 1) * branching).collect()).collect()
            })
            .collect();
        Self::new(depth, &children)
    }

    /// `arms` chains glued at the root: one arm is the half-line, two the line.
    pub fn star(arms: usize, depth: usize) -> Result<Self> {
        if arms == 0 {
            return Err(Error::Tree("at least one arm".into()));
        }
        let children: Vec<Vec<Vec<usize>>> = (0..depth)
            .map(|l| {
                if l == 0 {
                    vec![(0..arms).collect()]
                } else {
                    (0..arms).map(|i| vec![i]).collect()
                }
            })
            .collect();
        Self::new(depth, &children)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn node(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn word(&self, id: usize) -> &Word {
        &self.nodes[id].word
    }

    pub fn node_depth(&self, id: usize) -> usize {
        self.nodes[id].depth
    }

    pub fn children(&self, id: usize) -> &[usize] {
        &self.nodes[id].children
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        self.nodes[id].parent
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.space.d(a, b) as usize
    }

    /// Nodes at depth at most `d`.
    pub fn up_to_depth(&self, d: usize) -> std::ops::Range<usize> {
        0..self.level_start[d.min(self.depth) + 1]
    }

    /// Truncated rays: all words of length `depth`, lexicographically sorted.
    pub fn rays(&self) -> Vec<Word> {
        let lo = self.level_start[self.depth];
        let mut v: Vec<Word> = (lo..self.len()).map(|i| self.nodes[i].word.clone()).collect();
        v.sort();
        v
    }

    /// Point of the ray `r` at distance `radius` from the root.
    pub fn sample(&self, r: &Word, radius: usize) -> Option<usize> {
        self.node(&r.prefix(radius)).filter(|_| radius <= r.len())
    }

    /// Rays sampled at every depth, as a [`RayFamily`] over the full tree.
    pub fn ray_family(&self) -> RayFamily {
        RayFamily::new(
            self.rays()
                .into_iter()
                .map(|r| {
                    let samples = (0..=self.depth).map(|d| (d as f64, self.node(&r.prefix(d)).unwrap())).collect();
                    Ray::new(r.to_string(), samples)
                })
                .collect(),
        )
    }

    /// Restrictions of `rho` to depths `stages`.
    pub fn family(&self, rho: &CrossMetric, stages: &[usize]) -> Result<ScaleFamily> {
        if stages.is_empty() || stages.iter().any(|&d| d == 0 || d > self.depth) || stages.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Tree(format!("bad stage depths {stages:?}")));
        }
        let sets: Vec<Vec<usize>> = stages.iter().map(|&d| self.up_to_depth(d).collect()).collect();
        ScaleFamily::from_restrictions(rho, &sets, stages.iter().map(|&d| d as f64).collect())
    }

    /// `ceil(N/2)..=N`
    pub fn default_stages(&self) -> Vec<usize> {
        (self.depth.div_ceil(2).max(1)..=self.depth).collect()
    }

    /// Subtrees below `a` and `b` agree as labeled trees for `h` levels.
    fn isomorphic_below(&self, a: usize, b: usize, h: usize) -> bool {
        if h == 0 {
            return true;
        }
        let (ca, cb) = (self.children(a), self.children(b));
        ca.len() == cb.len() && ca.iter().zip(cb).all(|(&x, &y)| self.isomorphic_below(x, y, h - 1))
    }

    /// Walk from the root along `letters`, then along first children, down to `len`.
    fn walk(&self, letters: impl Iterator<Item = u16>, len: usize) -> Option<usize> {
        let mut at = 0;
        let mut letters = letters;
        for _ in 0..len {
            let ch = self.children(at);
            let pos = letters.next().unwrap_or(0) as usize;
            at = *ch.get(pos)?;
        }
        Some(at)
    }
}

/// `e^{-L}` for rays sharing a prefix of length `L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDistance {
    pub common_prefix: usize,
    pub value: f64,
    /// The rays agree to the truncation depth; `value` is then the bound `e^{-N}`.
    pub at_resolution: bool,
}

pub fn boundary_distance(tree: &RootedTree, a: &Word, b: &Word) -> Result<BoundaryDistance> {
    for w in [a, b] {
        if w.len() != tree.depth() || tree.node(w).is_none() {
            return Err(Error::Tree(format!("`{w}` is not a ray of this tree")));
        }
    }
    let l = a.common_prefix(b);
    Ok(BoundaryDistance {
        common_prefix: l,
        value: (-(l as f64)).exp(),
        at_resolution: l == tree.depth(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrefixPair {
    pub u: Word,
    pub v: Word,
    #[serde(rename = "C", with = "crate::io::decimal")]
    pub c: f64,
}

impl PrefixPair {
    pub fn new(u: &str, v: &str, c: f64) -> Result<Self> {
        Ok(Self {
            u: u.parse()?,
            v: v.parse()?,
            c,
        })
    }

    pub fn shift(&self) -> usize {
        self.u.len().abs_diff(self.v.len())
    }
}

/// Finite list of cylinder transports `u_i·w ↦ v_i·w`. Strata are nested by
/// constant: the stratum of `C` holds every pair with `C_j <= C`, and the map
/// restricted to it is bi-Lipschitz with constant `e^C`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PrefixMap {
    pub pairs: Vec<PrefixPair>,
}

/// `|meet(u_p, u_q) - meet(v_p, v_q)|`: how far the meet of two rays from
/// different cylinders moves under the map.
pub fn cross_distortion(p: &PrefixPair, q: &PrefixPair) -> usize {
    p.u.common_prefix(&q.u).abs_diff(p.v.common_prefix(&q.v))
}

impl PrefixMap {
    /// Structural checks: disjoint domain and codomain cylinders, and
    /// constants that bound the distortion on every stratum.
    pub fn new(pairs: Vec<PrefixPair>) -> Result<Self> {
        let bad = |m: String| Err(Error::PrefixMap(m));
        for p in &pairs {
            if !(p.c >= C_MIN) {
                return bad(format!("C = {} below {C_MIN} for {} -> {}", p.c, p.u, p.v));
            }
            if p.c < p.shift() as f64 {
                return bad(format!("C = {} below the depth shift {} for {} -> {}", p.c, p.shift(), p.u, p.v));
            }
        }
        for (i, p) in pairs.iter().enumerate() {
            for q in &pairs[..i] {
                if p.u.is_prefix_of(&q.u) || q.u.is_prefix_of(&p.u) {
                    return bad(format!("domain cylinders {} and {} overlap", q.u, p.u));
                }
                if p.v.is_prefix_of(&q.v) || q.v.is_prefix_of(&p.v) {
                    return bad(format!("codomain cylinders {} and {} overlap", q.v, p.v));
                }
                let gap = cross_distortion(p, q);
                if p.c.max(q.c) < gap as f64 {
                    return bad(format!(
                        "meet depth moves by {gap} between {} -> {} and {} -> {}, above both constants",
                        q.u, q.v, p.u, p.v
                    ));
                }
            }
        }
        Ok(Self { pairs })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self {
            pairs: vec![PrefixPair {
                u: Word::default(),
                v: Word::default(),
                c: 1.0,
            }],
        }
    }

    /// Every gluing edge at depth `depth - 1` is no longer than the cheapest
    /// other way into the second copy (through the roots or another
    /// cylinder), so each stratum shows a flat tail at this truncation.
    pub fn resolvable_at(&self, depth: usize) -> bool {
        let n = depth as f64;
        self.pairs.iter().enumerate().all(|(i, p)| {
            let escape = self
                .pairs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| {
                    let l = p.u.common_prefix(&q.u) as f64;
                    (n - 1.0 - l) + (q.u.len() as f64 - l) + 2.0 * q.c
                })
                .fold(n, f64::min);
            2.0 * p.c <= escape
        })
    }

    pub fn max_shift(&self) -> usize {
        self.pairs.iter().map(PrefixPair::shift).max().unwrap_or(0)
    }

    /// Words exist, prefixes are shorter than the truncation, and the
    /// subtrees below `u_i` and `v_i` are isomorphic as labeled trees.
    pub fn validate_on(&self, tree: &RootedTree) -> Result<()> {
        let n = tree.depth();
        for p in &self.pairs {
            let (Some(a), Some(b)) = (tree.node(&p.u), tree.node(&p.v)) else {
                return Err(Error::PrefixMap(format!("{} -> {} names missing nodes", p.u, p.v)));
            };
            if p.u.len() >= n || p.v.len() >= n {
                return Err(Error::PrefixMap(format!("{} -> {} reaches the truncation depth {n}", p.u, p.v)));
            }
            let h = n - p.u.len().max(p.v.len());
            if !tree.isomorphic_below(a, b, h) {
                return Err(Error::PrefixMap(format!("subtrees below {} and {} differ", p.u, p.v)));
            }
        }
        Ok(())
    }

    /// Pair whose domain cylinder contains the ray `r`.
    pub fn pair_for(&self, r: &Word) -> Option<usize> {
        self.pairs.iter().position(|p| p.u.is_prefix_of(r))
    }

    /// Point at depth `len` on the image of the ray `r` under pair `i`
    /// (continued along first children when the image is shorter).
    fn transport(&self, tree: &RootedTree, i: usize, r: &Word, len: usize) -> Option<usize> {
        let p = &self.pairs[i];
        let letters = p.v.0.iter().chain(&r.0[p.u.len()..]).copied();
        tree.walk(letters, len)
    }

    /// The induced boundary map on truncated rays.
    pub fn boundary_map(&self, tree: &RootedTree) -> Result<BTreeMap<Word, Word>> {
        self.validate_on(tree)?;
        Ok(tree
            .rays()
            .into_iter()
            .filter_map(|r| {
                let i = self.pair_for(&r)?;
                let t = self.transport(tree, i, &r, tree.depth())?;
                Some((r, tree.word(t).clone()))
            })
            .collect())
    }

    /// For every node in a domain cylinder: the stratum and the
    /// depth-preserving transport `f(z)`, continued along first children
    /// when the codomain prefix is shorter.
    pub fn node_transport(&self, tree: &RootedTree) -> Result<Vec<Option<(usize, usize)>>> {
        self.validate_on(tree)?;
        (0..tree.len())
            .map(|z| {
                let w = tree.word(z);
                let Some(i) = self.pair_for(w) else {
                    return Ok(None);
                };
                let fz = self
                    .transport(tree, i, w, w.len())
                    .ok_or_else(|| Error::PrefixMap(format!("image of {w} leaves the tree")))?;
                Ok(Some((i, fz)))
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChiConfig {
    /// Length of the basepoint edge `x_0 -- x_0'`.
    pub basepoint_gap: f64,
}

impl Default for ChiConfig {
    fn default() -> Self {
        Self {
            basepoint_gap: DEFAULT_MIN_GAP,
        }
    }
}

/// Cross metric built from a prefix map.
#[derive(Clone, Debug)]
pub struct TreeCrossMetric {
    pub metric: CrossMetric,
    pub map: PrefixMap,
}

/// Graph metric of two tree copies joined by `z -- f(z)'` of length `2C` and
/// by the basepoint edge.
pub fn chi_tree(tree: &RootedTree, map: &PrefixMap, config: &ChiConfig) -> Result<TreeCrossMetric> {
    let f = map.node_transport(tree)?;
    let n = tree.len();
    let mut g: UnGraph<(), f64> = UnGraph::with_capacity(2 * n, 4 * n);
    for _ in 0..2 * n {
        g.add_node(());
    }
    for z in 1..n {
        let p = tree.parent(z).unwrap();
        g.add_edge(NodeIndex::new(p), NodeIndex::new(z), 1.0);
        g.add_edge(NodeIndex::new(n + p), NodeIndex::new(n + z), 1.0);
    }
    g.add_edge(NodeIndex::new(0), NodeIndex::new(n), config.basepoint_gap);
    for (z, t) in f.iter().enumerate() {
        if let Some((i, fz)) = *t {
            g.add_edge(NodeIndex::new(z), NodeIndex::new(n + fz), 2.0 * map.pairs[i].c);
        }
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let d = petgraph::algo::dijkstra(&g, NodeIndex::new(x), None, |e| *e.weight());
            (0..n).map(|y| d[&NodeIndex::new(n + y)]).collect()
        })
        .collect();
    let gap = DEFAULT_MIN_GAP.min(config.basepoint_gap);
    let metric = validate_cross(tree.space().clone(), SquareMatrix::from_row_vecs(n, rows), gap)?;
    Ok(TreeCrossMetric {
        metric,
        map: map.clone(),
    })
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PsiConfig {
    pub rays: RayConfig,
    /// Stage depths for the `f_ρ` estimate; default `ceil(N/2)..=N`.
    pub stages: Option<Vec<usize>>,
}

/// Boundary map recovered from a cross metric, with per-ray stratum bound
/// and matching cost.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RecoveredMap {
    pub pairs: BTreeMap<Word, Word>,
    pub strata: BTreeMap<Word, u64>,
    pub residuals: BTreeMap<Word, f64>,
}

impl RecoveredMap {
    pub fn is_injective(&self) -> bool {
        let img: BTreeSet<&Word> = self.pairs.values().collect();
        img.len() == self.pairs.len()
    }
}

/// Matching order on radius-matched cost vectors (shallow to deep): the
/// deepest sample decides first, then the next one up.
pub(crate) fn better(a: &[f64], b: &[f64]) -> bool {
    a.iter().rev().lt(b.iter().rev())
}

pub fn psi_tree(tree: &RootedTree, rho: &CrossMetric, config: &PsiConfig) -> Result<(RecoveredMap, Strata)> {
    if !same_space(rho.space(), tree.space()) {
        return Err(Error::SpaceMismatch);
    }
    let stages = config.stages.clone().unwrap_or_else(|| tree.default_stages());
    let fam = tree.family(rho, &stages)?;
    let rays = tree.ray_family();
    let st = strata(&fam, &rays, &config.rays)?;

    let n = tree.depth();
    let lo = ((config.rays.tail_fraction * n as f64).ceil() as usize).min(n);
    let words = tree.rays();
    let samples: Vec<Vec<usize>> = words
        .iter()
        .map(|w| (lo..=n).map(|d| tree.sample(w, d).unwrap()).collect())
        .collect();

    let found: Vec<Option<(Word, Word, u64, f64)>> = words
        .par_iter()
        .zip(&st.estimates)
        .enumerate()
        .map(|(ri, (r, est))| {
            let bound = est.verdict.bound()?;
            let mut best: Option<(usize, Vec<f64>)> = None;
            for (ti, ts) in samples.iter().enumerate() {
                let costs: Vec<f64> = samples[ri].iter().zip(ts).map(|(&x, &y)| rho.get(x, y)).collect();
                if best.as_ref().is_none_or(|(_, b)| better(&costs, b)) {
                    best = Some((ti, costs));
                }
            }
            let (ti, costs) = best?;
            let cost = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if st.divergence_bound.is_some_and(|b| cost > b) {
                return None;
            }
            Some((r.clone(), words[ti].clone(), bound, cost))
        })
        .collect();

    let mut out = RecoveredMap::default();
    for (r, t, b, c) in found.into_iter().flatten() {
        out.strata.insert(r.clone(), b);
        out.residuals.insert(r.clone(), c);
        out.pairs.insert(r, t);
    }
    Ok((out, st))
}

/// Round trip `ψ(χ(F))` compared with the boundary map of `F`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeRoundTrip {
    pub expected: BTreeMap<Word, Word>,
    pub recovered: RecoveredMap,
    pub matches: bool,
}

pub fn tree_round_trip(tree: &RootedTree, map: &PrefixMap, chi: &ChiConfig, psi: &PsiConfig) -> Result<TreeRoundTrip> {
    let rho = chi_tree(tree, map, chi)?;
    let (recovered, _) = psi_tree(tree, &rho.metric, psi)?;
    let expected = map.boundary_map(tree)?;
    Ok(TreeRoundTrip {
        matches: recovered.pairs == expected,
        expected,
        recovered,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaysLemmaReport {
    /// Common prefix of the source rays.
    pub source_prefix: usize,
    /// Common prefix of the target rays.
    pub target_prefix: usize,
    pub c: f64,
    /// `|M - L| < C`
    pub strict: bool,
    /// `|M - L| <= C`
    pub within_tolerance: bool,
    /// `d(t1,t2) / d(r1,r2)`
    pub ratio: f64,
    /// Largest depth-matched gluing cost `ρ(x_i, y_i')` past both meets.
    pub gluing_bound: f64,
    /// `|d(y1,y2) - d(x1,x2)| <= 2·gluing_bound` at every such depth.
    pub distance_check: bool,
}

impl RaysLemmaReport {
    /// Holds with equality only.
    pub fn flagged(&self) -> bool {
        self.within_tolerance && !self.strict
    }
}

pub fn rays_lemma_check(
    tree: &RootedTree,
    rho: &CrossMetric,
    (r1, t1): (&Word, &Word),
    (r2, t2): (&Word, &Word),
    c: f64,
) -> Result<RaysLemmaReport> {
    let l = boundary_distance(tree, r1, r2)?.common_prefix;
    let m = boundary_distance(tree, t1, t2)?.common_prefix;
    let diff = l.abs_diff(m) as f64;
    let mut gluing_bound: f64 = 0.0;
    let mut deltas = Vec::new();
    for radius in l.max(m) + 1..=tree.depth() {
        let s = |w: &Word| tree.sample(w, radius).unwrap();
        let (x1, x2, y1, y2) = (s(r1), s(r2), s(t1), s(t2));
        gluing_bound = gluing_bound.max(rho.get(x1, y1)).max(rho.get(x2, y2));
        deltas.push((tree.distance(y1, y2) as f64 - tree.distance(x1, x2) as f64).abs());
    }
    Ok(RaysLemmaReport {
        source_prefix: l,
        target_prefix: m,
        c,
        strict: diff < c,
        within_tolerance: diff <= c,
        ratio: ((l as f64) - (m as f64)).exp(),
        gluing_bound,
        distance_check: deltas.iter().all(|&d| d <= 2.0 * gluing_bound),
    })
}

/// Per pair: `max |d(f(x), f(y)) - d(x, y)|` over nodes transported by pairs
/// with constant at most `C`, next to the bound `2C`.
pub fn inner_lemma_defects(tree: &RootedTree, map: &PrefixMap) -> Result<Vec<(f64, f64)>> {
    let f = map.node_transport(tree)?;
    Ok((0..map.pairs.len())
        .map(|i| {
            let pts: Vec<(usize, usize)> = f
                .iter()
                .enumerate()
                .filter_map(|(z, t)| t.filter(|t| map.pairs[t.0].c <= map.pairs[i].c).map(|t| (z, t.1)))
                .collect();
            let worst = pts
                .iter()
                .flat_map(|&(x, fx)| pts.iter().map(move |&(y, fy)| (x, fx, y, fy)))
                .map(|(x, fx, y, fy)| tree.distance(fx, fy).abs_diff(tree.distance(x, y)) as f64)
                .fold(0.0, f64::max);
            (worst, 2.0 * map.pairs[i].c)
        })
        .collect())
}

/// `f ∘ g` on truncated rays.
pub fn compose_boundary(f: &BTreeMap<Word, Word>, g: &BTreeMap<Word, Word>) -> BTreeMap<Word, Word> {
    g.iter()
        .filter_map(|(r, s)| f.get(s).map(|t| (r.clone(), t.clone())))
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorollaryPart {
    pub arms: usize,
    pub constructible: usize,
    pub round_trips_exact: bool,
    /// Distinct recovered maps, as partial bijections of the arm indices.
    pub recovered: Vec<Vec<(usize, usize)>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub half_line: CorollaryPart,
    pub line: CorollaryPart,
    /// Half-line: exactly the empty map and the identity.
    pub zero_and_unit: bool,
    /// Line: exactly the seven partial bijections of a two-point set.
    pub all_seven: bool,
}

fn corollary_part(arms: usize, depth: usize) -> Result<CorollaryPart> {
    let tree = RootedTree::star(arms, depth)?;
    let words: Vec<Word> = tree.up_to_depth(2).map(|i| tree.word(i).clone()).collect();
    let mut candidates = Vec::new();
    for u in &words {
        for v in &words {
            let shift = u.len().abs_diff(v.len()) as f64;
            for c in [shift.max(C_MIN), shift + 1.0] {
                candidates.push(PrefixPair {
                    u: u.clone(),
                    v: v.clone(),
                    c,
                });
            }
        }
    }
    let mut maps = vec![PrefixMap::empty()];
    for (i, p) in candidates.iter().enumerate() {
        maps.push(PrefixMap {
            pairs: vec![p.clone()],
        });
        for q in &candidates[i + 1..] {
            maps.push(PrefixMap {
                pairs: vec![p.clone(), q.clone()],
            });
        }
    }
    let rays = tree.rays();
    let arm = |w: &Word| rays.iter().position(|r| r == w).unwrap() + 1;
    let mut recovered = BTreeSet::new();
    let mut constructible = 0;
    let mut exact = true;
    for m in maps {
        let Ok(m) = PrefixMap::new(m.pairs) else { continue };
        if m.validate_on(&tree).is_err() {
            continue;
        }
        let Ok(rt) = tree_round_trip(&tree, &m, &ChiConfig::default(), &PsiConfig::default()) else {
            continue;
        };
        constructible += 1;
        exact &= rt.matches && rt.recovered.is_injective();
        let pb: Vec<(usize, usize)> = rt.recovered.pairs.iter().map(|(r, t)| (arm(r), arm(t))).collect();
        recovered.insert(pb);
    }
    Ok(CorollaryPart {
        arms,
        constructible,
        round_trips_exact: exact,
        recovered: recovered.into_iter().collect(),
    })
}

/// Enumerate prefix maps with prefixes of length <= 2 on the half-line and
/// the line, and collect the boundary maps they realize.
pub fn corollary_check(depth: usize) -> Result<CorollaryReport> {
    let half_line = corollary_part(1, depth)?;
    let line = corollary_part(2, depth)?;
    let zero_and_unit = half_line.recovered == vec![vec![], vec![(1, 1)]];
    let pb2 = crate::sphi::pb_semigroup(2)?;
    let expected: BTreeSet<Vec<(usize, usize)>> = crate::sphi::FiniteInverseSemigroup::elements(&pb2)
        .iter()
        .map(|p| p.pairs())
        .collect();
    let all_seven = line.recovered.len() == 7 && line.recovered.iter().cloned().collect::<BTreeSet<_>>() == expected;
    Ok(CorollaryReport {
        half_line,
        line,
        zero_and_unit,
        all_seven,
    })
}
