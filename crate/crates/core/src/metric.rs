//! Finite pointed metric spaces, compatible cross-metrics on their doubles,
//! coherent scale families, and the subset gluing metric.
//!
//! A compatible metric on the double `X ⊔ X'` restricts to `d_X` on both
//! copies, so it is fully described by its cross block `cross[i][j] = ρ(x_i, x_j')`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{approx_eq, approx_le, SquareMatrix};

/// Default lower bound for cross values.
pub const DEFAULT_MIN_GAP: f64 = 1.0;

/// A single witnessed axiom failure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonFinite { i: usize, j: usize },
    Asymmetry { i: usize, j: usize },
    NonzeroDiagonal { i: usize },
    NonPositive { i: usize, j: usize },
    /// `d(i,k) > d(i,j) + d(j,k)`
    Triangle { i: usize, j: usize, k: usize },
    BadBasepoint { index: usize },
    DuplicateLabel { i: usize, j: usize },
    /// `cross[i][j] < min_gap`
    Gap { i: usize, j: usize },
    /// `|cross[i][j] - cross[k][j]| > d(i,k)`
    MixedRow { i: usize, k: usize, j: usize },
    /// `|cross[i][j] - cross[i][k]| > d(j,k)`
    MixedCol { i: usize, j: usize, k: usize },
    /// `cross[i][j] + cross[k][j] < d(i,k)`
    CoTriangleRow { i: usize, k: usize, j: usize },
    /// `cross[i][j] + cross[i][k] < d(j,k)`
    CoTriangleCol { i: usize, j: usize, k: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match *self {
            NonFinite { i, j } => write!(f, "entry ({i},{j}) is not finite"),
            Asymmetry { i, j } => write!(f, "asymmetry at ({i},{j})"),
            NonzeroDiagonal { i } => write!(f, "nonzero diagonal at {i}"),
            NonPositive { i, j } => write!(f, "non-positive distance at ({i},{j})"),
            Triangle { i, j, k } => write!(f, "triangle violated: d({i},{k}) > d({i},{j}) + d({j},{k})"),
            BadBasepoint { index } => write!(f, "basepoint {index} out of range"),
            DuplicateLabel { i, j } => write!(f, "points {i} and {j} share a label"),
            Gap { i, j } => write!(f, "cross({i},{j}') below min_gap"),
            MixedRow { i, k, j } => write!(f, "mixed triangle: |cross({i},{j}') - cross({k},{j}')| > d({i},{k})"),
            MixedCol { i, j, k } => write!(f, "mixed triangle: |cross({i},{j}') - cross({i},{k}')| > d({j},{k})"),
            CoTriangleRow { i, k, j } => write!(f, "co-triangle: cross({i},{j}') + cross({k},{j}') < d({i},{k})"),
            CoTriangleCol { i, j, k } => write!(f, "co-triangle: cross({i},{j}') + cross({i},{k}') < d({j},{k})"),
        }
    }
}

/// Keeps the first witness of each violation kind.
#[derive(Default)]
struct Witnesses(Vec<Violation>);

impl Witnesses {
    fn push(&mut self, v: Violation) {
        let d = std::mem::discriminant(&v);
        if !self.0.iter().any(|w| std::mem::discriminant(w) == d) {
            self.0.push(v);
        }
    }

    fn has(&self, probe: &Violation) -> bool {
        let d = std::mem::discriminant(probe);
        self.0.iter().any(|w| std::mem::discriminant(w) == d)
    }
}

/// Check the metric axioms on a square matrix, returning one witness per
/// violated axiom (empty when the matrix is a metric).
pub fn metric_violations(dist: &SquareMatrix) -> Vec<Violation> {
    let n = dist.dim();
    let mut w = Witnesses::default();
    for i in 0..n {
        for j in 0..n {
            let v = dist.get(i, j);
            if !v.is_finite() {
                w.push(Violation::NonFinite { i, j });
            } else if i == j {
                if v != 0.0 {
                    w.push(Violation::NonzeroDiagonal { i });
                }
            } else {
                if v <= 0.0 {
                    w.push(Violation::NonPositive { i, j });
                }
                if !approx_eq(v, dist.get(j, i)) {
                    w.push(Violation::Asymmetry { i, j });
                }
            }
        }
    }
    if w.has(&Violation::NonFinite { i: 0, j: 0 }) {
        return w.0;
    }
    'outer: for i in 0..n {
        for j in 0..n {
            let dij = dist.get(i, j);
            for k in 0..n {
                if !approx_le(dist.get(i, k), dij + dist.get(j, k)) {
                    w.push(Violation::Triangle { i, j, k });
                    break 'outer;
                }
            }
        }
    }
    w.0
}

/// Finite pointed metric space given by its distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: SquareMatrix,
    basepoint: usize,
}

/// Validate a candidate distance matrix with default labels `"0"`, `"1"`, ...
pub fn validate_space(dist: SquareMatrix, basepoint: usize) -> Result<FiniteMetricSpace> {
    let labels = (0..dist.dim()).map(|i| i.to_string()).collect();
    FiniteMetricSpace::new(labels, dist, basepoint)
}

impl FiniteMetricSpace {
    pub fn new(labels: Vec<String>, dist: SquareMatrix, basepoint: usize) -> Result<Self> {
        if labels.len() != dist.dim() {
            return Err(Error::Dimension {
                expected: dist.dim(),
                got: labels.len(),
            });
        }
        let mut violations = metric_violations(&dist);
        if basepoint >= dist.dim() {
            violations.push(Violation::BadBasepoint { index: basepoint });
        }
        let mut seen = std::collections::HashMap::new();
        for (j, l) in labels.iter().enumerate() {
            if let Some(&i) = seen.get(l) {
                violations.push(Violation::DuplicateLabel { i, j });
                break;
            }
            seen.insert(l, j);
        }
        if !violations.is_empty() {
            return Err(Error::InvalidSpace(violations));
        }
        Ok(Self {
            labels,
            dist,
            basepoint,
        })
    }

    /// Internal constructor for matrices that are metrics by construction.
    pub(crate) fn new_unchecked(labels: Vec<String>, dist: SquareMatrix, basepoint: usize) -> Self {
        debug_assert_eq!(labels.len(), dist.dim());
        Self {
            labels,
            dist,
            basepoint,
        }
    }

    /// Points on the real line with the standard metric; labels are the
    /// coordinates. The basepoint is the smallest coordinate.
    pub fn line(coords: &[f64]) -> Result<Self> {
        let labels = coords.iter().map(|c| format!("{c}")).collect();
        let dist = SquareMatrix::from_fn(coords.len(), |i, j| (coords[i] - coords[j]).abs());
        let base = (0..coords.len())
            .min_by(|&a, &b| coords[a].total_cmp(&coords[b]))
            .unwrap_or(0);
        Self::new(labels, dist, base)
    }

    pub fn single_point() -> Self {
        Self::new_unchecked(vec!["0".into()], SquareMatrix::filled(1, 0.0), 0)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dist.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist.get(i, j)
    }

    pub fn dist(&self) -> &SquareMatrix {
        &self.dist
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Induced subspace on `idx`, which must contain the basepoint.
    pub fn restrict(&self, idx: &[usize]) -> Result<Self> {
        let base = idx
            .iter()
            .position(|&i| i == self.basepoint)
            .ok_or_else(|| Error::Family("restriction drops the basepoint".into()))?;
        Ok(Self::new_unchecked(
            idx.iter().map(|&i| self.labels[i].clone()).collect(),
            self.dist.select(idx),
            base,
        ))
    }
}

/// Cross block of a metric on the double compatible with `d_X`.
#[derive(Clone, Debug)]
pub struct CrossMetric {
    space: Arc<FiniteMetricSpace>,
    cross: SquareMatrix,
    min_gap: f64,
}

impl PartialEq for CrossMetric {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.cross == other.cross
    }
}

pub fn same_space(a: &Arc<FiniteMetricSpace>, b: &Arc<FiniteMetricSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Violations of the gap, mixed-triangle and co-triangle inequalities.
/// First positions where `|a - b| > d` and where `a + b < d`.
fn pair_defects(a: &[f64], b: &[f64], d: f64) -> Option<(Option<usize>, Option<usize>)> {
    let (lo, hi) = a.iter().zip(b).fold((f64::INFINITY, 0.0f64), |(lo, hi), (x, y)| {
        (lo.min(x + y), hi.max((x - y).abs()))
    });
    if hi <= d && d <= lo {
        return None;
    }
    let mixed = a.iter().zip(b).position(|(x, y)| !approx_le((x - y).abs(), d));
    let co = a.iter().zip(b).position(|(x, y)| !approx_le(d, x + y));
    Some((mixed, co))
}

pub fn cross_violations(space: &FiniteMetricSpace, cross: &SquareMatrix, min_gap: f64) -> Vec<Violation> {
    let n = space.len();
    let mut w = Witnesses::default();
    for i in 0..n {
        for j in 0..n {
            let c = cross.get(i, j);
            if !c.is_finite() {
                w.push(Violation::NonFinite { i, j });
            } else if !approx_le(min_gap, c) {
                w.push(Violation::Gap { i, j });
            }
        }
    }
    if w.has(&Violation::NonFinite { i: 0, j: 0 }) {
        return w.0;
    }
    let t = cross.transpose();
    let per_row: Vec<Witnesses> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut w = Witnesses::default();
            for k in i + 1..n {
                let dik = space.d(i, k);
                // rows i, k against every column
                if let Some((mixed, co)) = pair_defects(cross.row(i), cross.row(k), dik) {
                    if let Some(j) = mixed {
                        w.push(Violation::MixedRow { i, k, j });
                    }
                    if let Some(j) = co {
                        w.push(Violation::CoTriangleRow { i, k, j });
                    }
                }
                // every row against columns i, k
                if let Some((mixed, co)) = pair_defects(t.row(i), t.row(k), dik) {
                    if let Some(j) = mixed {
                        w.push(Violation::MixedCol { i: j, j: i, k });
                    }
                    if let Some(j) = co {
                        w.push(Violation::CoTriangleCol { i: j, j: i, k });
                    }
                }
            }
            w
        })
        .collect();
    for v in per_row.into_iter().flat_map(|r| r.0) {
        w.push(v);
    }
    w.0
}

/// Validate a cross block against `space`.
pub fn validate_cross(space: Arc<FiniteMetricSpace>, cross: SquareMatrix, min_gap: f64) -> Result<CrossMetric> {
    if cross.dim() != space.len() {
        return Err(Error::Dimension {
            expected: space.len(),
            got: cross.dim(),
        });
    }
    let v = cross_violations(&space, &cross, min_gap);
    if !v.is_empty() {
        return Err(Error::InvalidCross(v));
    }
    Ok(CrossMetric {
        space,
        cross,
        min_gap,
    })
}

impl CrossMetric {
    pub(crate) fn new_unchecked(space: Arc<FiniteMetricSpace>, cross: SquareMatrix, min_gap: f64) -> Self {
        debug_assert_eq!(space.len(), cross.dim());
        Self {
            space,
            cross,
            min_gap,
        }
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn cross(&self) -> &SquareMatrix {
        &self.cross
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    pub fn dim(&self) -> usize {
        self.cross.dim()
    }

    /// `ρ(x_i, x_j')`
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cross.get(i, j)
    }

    /// `ρ(x_i, X') = min_j ρ(x_i, x_j')`
    pub fn to_other_copy(&self, i: usize) -> f64 {
        self.cross.row(i).iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Re-run the full validation.
    pub fn revalidate(&self) -> Result<()> {
        validate_cross(self.space.clone(), self.cross.clone(), self.min_gap).map(|_| ())
    }

    /// `ρ + c` on the cross block, still compatible for `c >= 0`.
    pub fn offset(&self, c: f64) -> Self {
        assert!(c >= 0.0, "negative offset");
        Self::new_unchecked(self.space.clone(), self.cross.map(|x| x + c), self.min_gap)
    }

    /// The full `2n × 2n` metric on the double, first copy first.
    pub fn double_matrix(&self) -> SquareMatrix {
        let n = self.dim();
        SquareMatrix::from_fn(2 * n, |a, b| match (a < n, b < n) {
            (true, true) => self.space.d(a, b),
            (false, false) => self.space.d(a - n, b - n),
            (true, false) => self.get(a, b - n),
            (false, true) => self.get(b, a - n),
        })
    }

    /// Restriction to the subspace on `idx`.
    pub fn restrict(&self, idx: &[usize]) -> Result<Self> {
        Ok(Self::new_unchecked(
            Arc::new(self.space.restrict(idx)?),
            self.cross.select(idx),
            self.min_gap,
        ))
    }
}

/// A non-empty set of point indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetSpec {
    indices: Vec<usize>,
}

impl SubsetSpec {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = indices.into_iter().collect();
        Self {
            indices: set.into_iter().collect(),
        }
    }

    pub fn from_labels<S: AsRef<str>>(space: &FiniteMetricSpace, labels: &[S]) -> Result<Self> {
        labels
            .iter()
            .map(|l| space.index_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn all(space: &FiniteMetricSpace) -> Self {
        Self::new(0..space.len())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    fn check(&self, space: &FiniteMetricSpace) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptySubset);
        }
        match self.indices.last() {
            Some(&m) if m >= space.len() => Err(Error::Dimension {
                expected: space.len(),
                got: m + 1,
            }),
            _ => Ok(()),
        }
    }
}

/// `ρ_A(x, y') = min_{a ∈ A} d(x,a) + 1 + d(a,y)`.
pub fn subset_metric(space: &Arc<FiniteMetricSpace>, subset: &SubsetSpec) -> Result<CrossMetric> {
    subset.check(space)?;
    let a = subset.indices();
    let cross = SquareMatrix::from_fn(space.len(), |x, y| {
        a.iter()
            .map(|&p| space.d(x, p) + 1.0 + space.d(p, y))
            .fold(f64::INFINITY, f64::min)
    });
    Ok(CrossMetric::new_unchecked(space.clone(), cross, DEFAULT_MIN_GAP))
}

fn directed_hausdorff(space: &FiniteMetricSpace, from: &[usize], to: &[usize]) -> f64 {
    from.iter()
        .map(|&a| to.iter().map(|&b| space.d(a, b)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

pub fn hausdorff_distance(space: &FiniteMetricSpace, a: &SubsetSpec, b: &SubsetSpec) -> Result<f64> {
    a.check(space)?;
    b.check(space)?;
    Ok(directed_hausdorff(space, a.indices(), b.indices()).max(directed_hausdorff(space, b.indices(), a.indices())))
}

/// Coherent sequence of truncations `stage_0 ⊂ stage_1 ⊂ …`, each a cross
/// metric on its own finite space.
#[derive(Clone, Debug)]
pub struct ScaleFamily {
    scales: Vec<f64>,
    stages: Vec<CrossMetric>,
    inclusions: Vec<Vec<usize>>,
}

impl ScaleFamily {
    /// Checks increasing scales, injective inclusions, basepoint
    /// correspondence and exact restriction coherence.
    pub fn new(scales: Vec<f64>, stages: Vec<CrossMetric>, inclusions: Vec<Vec<usize>>) -> Result<Self> {
        let bad = |m: String| Err(Error::Family(m));
        if scales.len() != stages.len() {
            return bad(format!("{} scales for {} stages", scales.len(), stages.len()));
        }
        if inclusions.len() + 1 != stages.len().max(1) {
            return bad(format!("{} inclusions for {} stages", inclusions.len(), stages.len()));
        }
        if scales.iter().any(|&s| !(s > 0.0)) || scales.windows(2).any(|w| w[0] >= w[1]) {
            return bad("scales must be positive and strictly increasing".into());
        }
        for (t, inc) in inclusions.iter().enumerate() {
            let (lo, hi) = (&stages[t], &stages[t + 1]);
            if inc.len() != lo.dim() {
                return bad(format!("inclusion {t} has {} entries for {} points", inc.len(), lo.dim()));
            }
            let mut seen = BTreeSet::new();
            for &p in inc {
                if p >= hi.dim() || !seen.insert(p) {
                    return bad(format!("inclusion {t} is not an injection"));
                }
            }
            if inc[lo.space().basepoint()] != hi.space().basepoint() {
                return bad(format!("basepoints do not correspond at stage {t}"));
            }
            for i in 0..lo.dim() {
                for j in 0..lo.dim() {
                    let (a, b) = (inc[i], inc[j]);
                    if lo.space().d(i, j) != hi.space().d(a, b) || lo.get(i, j) != hi.get(a, b) {
                        return bad(format!("stage {} does not restrict to stage {t} at ({i},{j})", t + 1));
                    }
                }
            }
        }
        Ok(Self {
            scales,
            stages,
            inclusions,
        })
    }

    /// Stages obtained by restricting one cross metric to nested index sets.
    pub fn from_restrictions(full: &CrossMetric, stage_sets: &[Vec<usize>], scales: Vec<f64>) -> Result<Self> {
        let stages = stage_sets
            .iter()
            .map(|s| full.restrict(s))
            .collect::<Result<Vec<_>>>()?;
        let mut inclusions = Vec::new();
        for w in stage_sets.windows(2) {
            let inc = w[0]
                .iter()
                .map(|p| {
                    w[1].iter()
                        .position(|q| q == p)
                        .ok_or_else(|| Error::Family("stage sets are not nested".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            inclusions.push(inc);
        }
        Self::new(scales, stages, inclusions)
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn stages(&self) -> &[CrossMetric] {
        &self.stages
    }

    pub fn stage(&self, t: usize) -> &CrossMetric {
        &self.stages[t]
    }

    pub fn inclusions(&self) -> &[Vec<usize>] {
        &self.inclusions
    }

    pub fn last(&self) -> &CrossMetric {
        self.stages.last().expect("empty scale family")
    }

    /// Composite inclusion of stage `t` into the final stage.
    pub fn embedding_into_last(&self, t: usize) -> Vec<usize> {
        let mut emb: Vec<usize> = (0..self.stages[t].dim()).collect();
        for inc in &self.inclusions[t..] {
            for p in emb.iter_mut() {
                *p = inc[*p];
            }
        }
        emb
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> FiniteMetricSpace {
        let m = SquareMatrix::from_rows(vec![vec![0., 1., 2.], vec![1., 0., 1.], vec![2., 1., 0.]]).unwrap();
        validate_space(m, 0).unwrap()
    }

    fn line(n: usize) -> Arc<FiniteMetricSpace> {
        Arc::new(FiniteMetricSpace::line(&(0..n).map(|i| i as f64).collect::<Vec<_>>()).unwrap())
    }

    #[test]
    fn path_p3_accepted_and_revalidates() {
        let s = p3();
        let again = validate_space(s.dist().clone(), 0).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn triangle_violation_has_witness() {
        let m = SquareMatrix::from_rows(vec![vec![0., 1., 3.], vec![1., 0., 1.], vec![3., 1., 0.]]).unwrap();
        match validate_space(m, 0) {
            Err(Error::InvalidSpace(v)) => {
                assert!(v.contains(&Violation::Triangle { i: 0, j: 1, k: 2 }), "{v:?}")
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn asymmetry_and_diagonal_reported_together() {
        let m = SquareMatrix::from_rows(vec![vec![1., 2.], vec![3., 0.]]).unwrap();
        let Err(Error::InvalidSpace(v)) = validate_space(m, 0) else {
            panic!()
        };
        assert!(v.contains(&Violation::NonzeroDiagonal { i: 0 }));
        assert!(v.contains(&Violation::Asymmetry { i: 0, j: 1 }));
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(
            SquareMatrix::from_rows(vec![vec![0., 1.], vec![1.]]),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn cross_fixtures() {
        let one = Arc::new(FiniteMetricSpace::single_point());
        validate_cross(one, SquareMatrix::filled(1, 1.0), 1.0).unwrap();

        let s = Arc::new(p3());
        validate_cross(s.clone(), SquareMatrix::filled(3, 1.0), 1.0).unwrap();

        let mut bad = SquareMatrix::filled(3, 1.0);
        bad.set(2, 0, 10.0);
        let Err(Error::InvalidCross(v)) = validate_cross(s.clone(), bad, 1.0) else {
            panic!()
        };
        assert!(v.iter().any(|x| matches!(x, Violation::MixedRow { .. })), "{v:?}");

        let Err(Error::InvalidCross(v)) = validate_cross(s, SquareMatrix::filled(3, 0.5), 1.0) else {
            panic!()
        };
        assert!(matches!(v[0], Violation::Gap { .. }));
    }

    #[test]
    fn co_triangle_violation() {
        // 0 and 2 are at distance 2 but both glue to 0' at cost 0.75
        let s = Arc::new(p3());
        let m = SquareMatrix::from_fn(3, |_, _| 0.75);
        let Err(Error::InvalidCross(v)) = validate_cross(s, m, 0.5) else {
            panic!()
        };
        assert!(v.iter().any(|x| matches!(x, Violation::CoTriangleRow { .. })), "{v:?}");
    }

    #[test]
    fn subset_metric_values() {
        let x = line(6);
        let r = subset_metric(&x, &SubsetSpec::new([0])).unwrap();
        assert_eq!(r.get(2, 3), 6.0);
        let r = subset_metric(&x, &SubsetSpec::all(&x)).unwrap();
        assert_eq!(r.get(2, 5), 4.0);
        let r = subset_metric(&x, &SubsetSpec::new([0, 5])).unwrap();
        assert_eq!(r.get(1, 4), 6.0);
        r.revalidate().unwrap();
        assert!(matches!(subset_metric(&x, &SubsetSpec::new([])), Err(Error::EmptySubset)));
    }

    #[test]
    fn subset_metric_glues_at_one_on_subset() {
        let x = line(6);
        let a = SubsetSpec::new([1, 4]);
        let r = subset_metric(&x, &a).unwrap();
        for &p in a.indices() {
            assert_eq!(r.get(p, p), 1.0);
        }
    }

    #[test]
    fn double_matrix_is_a_metric() {
        let x = line(5);
        let r = subset_metric(&x, &SubsetSpec::new([2])).unwrap();
        assert!(metric_violations(&r.double_matrix()).is_empty());
    }

    #[test]
    fn hausdorff_cases() {
        let x = line(21);
        let a = SubsetSpec::new([2, 4, 8, 16]);
        assert_eq!(hausdorff_distance(&x, &a, &a).unwrap(), 0.0);
        assert_eq!(
            hausdorff_distance(&x, &SubsetSpec::new([0]), &SubsetSpec::new([10])).unwrap(),
            10.0
        );
        // brute force over all pairs
        let b = [3usize, 9];
        let sup_a = [2usize, 4, 8, 16]
            .iter()
            .map(|&p| b.iter().map(|&q| (p as f64 - q as f64).abs()).fold(f64::MAX, f64::min))
            .fold(0.0, f64::max);
        let sup_b = b
            .iter()
            .map(|&q| [2usize, 4, 8, 16].iter().map(|&p| (p as f64 - q as f64).abs()).fold(f64::MAX, f64::min))
            .fold(0.0, f64::max);
        let h = hausdorff_distance(&x, &a, &SubsetSpec::new(b)).unwrap();
        assert_eq!(h, sup_a.max(sup_b));
        assert_eq!(h, 7.0);
        assert!(hausdorff_distance(&x, &a, &SubsetSpec::new([])).is_err());
    }

    #[test]
    fn family_coherence_checked() {
        let x = line(6);
        let r = subset_metric(&x, &SubsetSpec::new([0, 5])).unwrap();
        let fam = ScaleFamily::from_restrictions(&r, &[vec![0, 1], vec![0, 1, 2, 3], vec![0, 1, 2, 3, 4, 5]], vec![1., 3., 5.])
            .unwrap();
        assert_eq!(fam.embedding_into_last(0), vec![0, 1]);

        // a stage whose values disagree with the next one
        let other = subset_metric(&x, &SubsetSpec::new([0])).unwrap();
        let bad = ScaleFamily::new(
            vec![1., 2.],
            vec![other.restrict(&[0, 5]).unwrap(), r.clone()],
            vec![vec![0, 5]],
        );
        assert!(matches!(bad, Err(Error::Family(_))));
    }
}
