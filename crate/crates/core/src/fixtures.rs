//! Named fixtures shared by the command line fallbacks, examples and tests.

use std::sync::Arc;

use crate::error::Result;
use crate::matrix::SquareMatrix;
use crate::metric::{subset_metric, FiniteMetricSpace, ScaleFamily, SubsetSpec};
use crate::sphi::{pb_semigroup, PartialBijection, PbSemigroup, PhiSet};
use crate::tree::{PrefixMap, PrefixPair};

/// Path on three vertices.
pub fn p3() -> FiniteMetricSpace {
    let dist = SquareMatrix::from_fn(3, |i, j| i.abs_diff(j) as f64);
    FiniteMetricSpace::new(vec!["a".into(), "b".into(), "c".into()], dist, 0).unwrap()
}

/// `PB(X_4)` with `Φ = {id_{1,2}, id_{3,4}}`.
pub fn two_blocks() -> Result<(PbSemigroup, PhiSet<PartialBijection>)> {
    let sg = pb_semigroup(4)?;
    let phi = PhiSet::new(&sg, vec![PartialBijection::identity_on(4, [1, 2])?, PartialBijection::identity_on(4, [3, 4])?])?;
    Ok((sg, phi))
}

/// `PB(X_n)` with `Φ = {id_{1..k}}`.
pub fn fixed_block(n: usize, k: usize) -> Result<(PbSemigroup, PhiSet<PartialBijection>)> {
    let sg = pb_semigroup(n)?;
    let phi = PhiSet::new(&sg, vec![PartialBijection::identity_on(n, 1..=k)?])?;
    Ok((sg, phi))
}

/// Two gluings of one half-line sample and the stages `R_1 < … < R_T`
/// restricting both to `[0, R_t]`.
#[derive(Clone, Debug)]
pub struct GluingPair {
    pub space: Arc<FiniteMetricSpace>,
    pub first: ScaleFamily,
    pub second: ScaleFamily,
}

fn gluing_pair(points: Vec<f64>, a: &[f64], b: &[f64], scales: Vec<f64>) -> Result<GluingPair> {
    let mut points = points;
    points.push(0.0);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let space = Arc::new(FiniteMetricSpace::line(&points)?);
    let pick = |set: &[f64]| SubsetSpec::new(set.iter().map(|x| points.iter().position(|p| p == x).unwrap()));
    let ra = subset_metric(&space, &pick(a))?;
    let rb = subset_metric(&space, &pick(b))?;
    let sets: Vec<Vec<usize>> = scales
        .iter()
        .map(|&r| (0..points.len()).filter(|&i| points[i] <= r).collect())
        .collect();
    Ok(GluingPair {
        first: ScaleFamily::from_restrictions(&ra, &sets, scales.clone())?,
        second: ScaleFamily::from_restrictions(&rb, &sets, scales)?,
        space,
    })
}

/// Gluings along `{3^n}` (first) and `{2^n}` (second) on the half-line
/// sampled at the origin and both sequences, with stages `3^1..=3^top`.
pub fn powers_pair(top: u32) -> Result<GluingPair> {
    let end = 3f64.powi(top as i32);
    let threes: Vec<f64> = (1..=top).map(|n| 3f64.powi(n as i32)).collect();
    let twos: Vec<f64> = (1..).map(|n| 2f64.powi(n)).take_while(|&x| x <= end).collect();
    let points = threes.iter().chain(&twos).copied().collect();
    gluing_pair(points, &threes, &twos, threes.clone())
}

/// Gluings along `{2^n}` and `{2^n + 1}`, at Hausdorff distance 1, with
/// stages `2^n + 1` for `n = 1..=top`.
pub fn shifted_pair(top: u32) -> Result<GluingPair> {
    let a: Vec<f64> = (1..=top).map(|n| 2f64.powi(n as i32)).collect();
    let b: Vec<f64> = a.iter().map(|x| x + 1.0).collect();
    let points = a.iter().chain(&b).copied().collect();
    gluing_pair(points, &a, &b, b.clone())
}

fn pm(pairs: &[(&str, &str, f64)]) -> PrefixMap {
    PrefixMap::new(pairs.iter().map(|&(u, v, c)| PrefixPair::new(u, v, c).unwrap()).collect()).unwrap()
}

/// Swap the two halves of the binary tree.
pub fn binary_swap() -> PrefixMap {
    pm(&[("0", "1", 1.0), ("1", "0", 1.0)])
}

/// Prefix maps valid on every binary tree of depth at least 5.
pub fn binary_prefix_maps() -> Vec<(&'static str, PrefixMap)> {
    vec![
        ("empty", PrefixMap::empty()),
        ("identity", PrefixMap::identity()),
        ("swap", binary_swap()),
        ("half", pm(&[("0", "0", 0.5)])),
        ("shrink", pm(&[("0", "00", 1.0)])),
        ("expand", pm(&[("00", "0", 1.0)])),
        ("reverse", pm(&[("00", "11", 1.0), ("01", "10", 1.0), ("10", "01", 1.0), ("11", "00", 1.0)])),
        ("mixed", pm(&[("00", "1", 1.0), ("01", "01", 0.5), ("1", "00", 2.0)])),
        ("deep", pm(&[("0110", "1001", 1.0), ("1", "0111", 3.0)])),
        ("shifts", pm(&[("000", "1", 2.0), ("001", "01", 1.5), ("01", "0011", 2.0), ("11", "000", 1.0)])),
    ]
}
