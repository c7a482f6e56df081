//! Polar grids in the plane (or 3-space), orthogonal maps restricted to
//! finite direction sets, and the round trip between them and cross metrics.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{GridDoc, IsometryDoc, StratumDoc};
use crate::matrix::SquareMatrix;
use crate::metric::{same_space, validate_cross, CrossMetric, FiniteMetricSpace, ScaleFamily, DEFAULT_MIN_GAP};
use crate::rays::{strata, Ray, RayConfig, RayFamily, Strata};

pub const UNIT_TOL: f64 = 1e-12;
pub const ORTHO_TOL: f64 = 1e-10;
pub const SNAP_TOL: f64 = 1e-9;
pub const ANGULAR_TOL: f64 = 1e-2;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Angle between unit vectors, stable near 0 and π.
pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let sum: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    2.0 * norm(&diff).atan2(norm(&sum))
}

/// Origin plus every (direction, radius) pair, with Euclidean distances.
///
/// Point `0` is the origin; direction `d` at radius index `k` is `1 + d·K + k`.
#[derive(Clone, Debug)]
pub struct PolarGrid {
    dim: usize,
    directions: Vec<Vec<f64>>,
    radii: Vec<f64>,
    space: Arc<FiniteMetricSpace>,
}

impl PolarGrid {
    pub fn new(dim: usize, directions: Vec<Vec<f64>>, radii: Vec<f64>) -> Result<Self> {
        let bad = |m: String| Err(Error::Grid(m));
        if !(2..=3).contains(&dim) {
            return bad(format!("dimension {dim} not in 2..=3"));
        }
        if directions.is_empty() || radii.is_empty() {
            return bad("no directions or no radii".into());
        }
        for (i, d) in directions.iter().enumerate() {
            if d.len() != dim || (norm(d) - 1.0).abs() > UNIT_TOL {
                return bad(format!("direction {i} is not a unit vector in dimension {dim}"));
            }
            if directions[..i].iter().any(|e| angle_between(d, e) <= SNAP_TOL) {
                return bad(format!("direction {i} repeats an earlier one"));
            }
        }
        if !(radii[0] > 0.0) || radii.windows(2).any(|w| !(w[0] < w[1])) || radii.iter().any(|r| !r.is_finite()) {
            return bad("radii must be positive and strictly increasing".into());
        }
        let k = radii.len();
        let count = 1 + directions.len() * k;
        let coords: Vec<Vec<f64>> = std::iter::once(vec![0.0; dim])
            .chain(directions.iter().flat_map(|d| radii.iter().map(move |r| d.iter().map(|c| c * r).collect())))
            .collect();
        let dist = SquareMatrix::from_fn(count, |i, j| {
            coords[i].iter().zip(&coords[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        });
        let mut labels = vec!["origin".to_string()];
        for d in 0..directions.len() {
            for r in &radii {
                labels.push(format!("d{d}:{}", crate::io::format_decimal(*r)));
            }
        }
        let space = Arc::new(FiniteMetricSpace::new_unchecked(labels, dist, 0));
        Ok(Self {
            dim,
            directions,
            radii,
            space,
        })
    }

    /// Planar grid with directions at the given angles (degrees).
    pub fn planar(angles_deg: &[f64], radii: Vec<f64>) -> Result<Self> {
        let dirs = angles_deg
            .iter()
            .map(|a| {
                let t = a.to_radians();
                vec![t.cos(), t.sin()]
            })
            .collect();
        Self::new(2, dirs, radii)
    }

    /// `k` equally spaced planar directions starting at angle 0.
    pub fn uniform(k: usize, radii: Vec<f64>) -> Result<Self> {
        let angles: Vec<f64> = (0..k).map(|j| 360.0 * j as f64 / k as f64).collect();
        Self::planar(&angles, radii)
    }

    /// Powers of two below `r_max`, the decades 10, 100, 1000, and a tail
    /// ladder over `[r_max/2, r_max]`.
    pub fn default_radii(r_max: f64) -> Vec<f64> {
        let mut r: Vec<f64> = std::iter::successors(Some(1.0), |x| Some(x * 2.0))
            .take_while(|&x| x < r_max)
            .collect();
        r.extend([10.0, 100.0, 1000.0].into_iter().filter(|&x| x < r_max));
        r.extend((4..=8).map(|j| r_max * j as f64 / 8.0));
        r.sort_by(f64::total_cmp);
        r.dedup();
        r
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn r_max(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, direction: usize, radius_index: usize) -> usize {
        1 + direction * self.radii.len() + radius_index
    }

    /// `(direction, radius index)` of a non-origin point.
    pub fn polar(&self, p: usize) -> Option<(usize, usize)> {
        (p > 0).then(|| ((p - 1) / self.radii.len(), (p - 1) % self.radii.len()))
    }

    pub fn radius_of(&self, p: usize) -> f64 {
        self.polar(p).map_or(0.0, |(_, k)| self.radii[k])
    }

    pub fn radius_index(&self, r: f64) -> Option<usize> {
        self.radii.iter().position(|&x| (x - r).abs() <= SNAP_TOL * r.max(1.0))
    }

    /// Grid direction within `tol` of `v`.
    pub fn snap(&self, v: &[f64], tol: f64) -> Option<usize> {
        self.directions
            .iter()
            .position(|d| d.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) <= tol)
    }

    /// Same grid with radii cut at `r_max`.
    pub fn truncated(&self, r_max: f64) -> Result<Self> {
        Self::new(
            self.dim,
            self.directions.clone(),
            self.radii.iter().copied().filter(|&r| r <= r_max * (1.0 + SNAP_TOL)).collect(),
        )
    }

    /// Each direction sampled at every radius, starting at the origin.
    pub fn ray_family(&self) -> RayFamily {
        RayFamily::new(
            (0..self.directions.len())
                .map(|d| {
                    let samples = std::iter::once((0.0, 0))
                        .chain(self.radii.iter().enumerate().map(|(k, &r)| (r, self.point(d, k))))
                        .collect();
                    Ray::new(format!("d{d}"), samples)
                })
                .collect(),
        )
    }

    /// Restrictions of `rho` to the balls of radius `scales`.
    pub fn family(&self, rho: &CrossMetric, scales: &[f64]) -> Result<ScaleFamily> {
        let sets: Vec<Vec<usize>> = scales
            .iter()
            .map(|&s| (0..self.len()).filter(|&p| self.radius_of(p) <= s * (1.0 + SNAP_TOL)).collect())
            .collect();
        ScaleFamily::from_restrictions(rho, &sets, scales.to_vec())
    }

    pub fn to_doc(&self) -> GridDoc {
        GridDoc {
            n: self.dim,
            directions: self.directions.clone(),
            radii: self.radii.clone(),
        }
    }

    pub fn from_doc(doc: &GridDoc) -> Result<Self> {
        Self::new(doc.n, doc.directions.clone(), doc.radii.clone())
    }
}

/// Orthogonal `u` restricted to a direction set `A` with nested strata
/// `A_{m_1} ⊆ A_{m_2} ⊆ …`; a direction's weight is the first `m` containing it.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialIsometry {
    u: Vec<Vec<f64>>,
    strata: Vec<(u32, Vec<usize>)>,
}

impl PartialIsometry {
    pub fn new(u: Vec<Vec<f64>>, strata: Vec<(u32, Vec<usize>)>) -> Result<Self> {
        let bad = |m: String| Err(Error::Isometry(m));
        let n = u.len();
        if n == 0 || u.iter().any(|r| r.len() != n) {
            return bad("matrix is not square".into());
        }
        for i in 0..n {
            for j in 0..n {
                let g: f64 = (0..n).map(|k| u[k][i] * u[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (g - want).abs() > ORTHO_TOL {
                    return bad(format!("uᵀu differs from the identity at ({i},{j}) by {:e}", (g - want).abs()));
                }
            }
        }
        let mut strata = strata;
        for s in &mut strata {
            s.1.sort_unstable();
            s.1.dedup();
        }
        for w in strata.windows(2) {
            if w[0].0 >= w[1].0 {
                return bad("stratum weights must increase".into());
            }
            if !w[0].1.iter().all(|d| w[1].1.binary_search(d).is_ok()) {
                return bad(format!("stratum {} is not contained in stratum {}", w[0].0, w[1].0));
            }
        }
        if strata.first().is_some_and(|s| s.0 == 0) {
            return bad("stratum weights start at 1".into());
        }
        Ok(Self { u, strata })
    }

    /// `u` on `directions`, all with weight 1.
    pub fn single(u: Vec<Vec<f64>>, directions: Vec<usize>) -> Result<Self> {
        Self::new(u, vec![(1, directions)])
    }

    pub fn rotation(theta: f64, directions: Vec<usize>) -> Result<Self> {
        let (s, c) = theta.sin_cos();
        Self::single(vec![vec![c, -s], vec![s, c]], directions)
    }

    pub fn identity(dim: usize, directions: Vec<usize>) -> Result<Self> {
        Self::single((0..dim).map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect(), directions)
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.u
    }

    pub fn strata(&self) -> &[(u32, Vec<usize>)] {
        &self.strata
    }

    pub fn domain(&self) -> &[usize] {
        self.strata.last().map_or(&[], |s| &s.1)
    }

    pub fn weight(&self, direction: usize) -> Option<u32> {
        self.strata.iter().find(|s| s.1.binary_search(&direction).is_ok()).map(|s| s.0)
    }

    pub fn max_weight(&self) -> u32 {
        self.strata.last().map_or(0, |s| s.0)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.u.iter().map(|row| dot(row, v)).collect()
    }

    /// Rotation angle `atan2(u₁₀, u₀₀)` for planar maps.
    pub fn angle(&self) -> Option<f64> {
        (self.u.len() == 2).then(|| self.u[1][0].atan2(self.u[0][0]))
    }

    /// Grid direction of `u(d)` for every `d` in `A`.
    pub fn images(&self, grid: &PolarGrid, snap_tol: f64) -> Result<Vec<(usize, usize, u32)>> {
        if self.u.len() != grid.dim() {
            return Err(Error::Dimension {
                expected: grid.dim(),
                got: self.u.len(),
            });
        }
        let mut out = Vec::new();
        for &d in self.domain() {
            let dir = grid
                .directions()
                .get(d)
                .ok_or_else(|| Error::Isometry(format!("direction index {d} out of range")))?;
            let img = self.apply(dir);
            let t = grid
                .snap(&img, snap_tol)
                .ok_or_else(|| Error::Isometry(format!("image of direction {d} is not on the grid within {snap_tol:e}")))?;
            out.push((d, t, self.weight(d).unwrap()));
        }
        Ok(out)
    }

    pub fn to_doc(&self) -> IsometryDoc {
        IsometryDoc {
            matrix: self.u.clone(),
            strata: self
                .strata
                .iter()
                .map(|(m, d)| StratumDoc {
                    m: *m,
                    directions: d.clone(),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &IsometryDoc) -> Result<Self> {
        Self::new(doc.matrix.clone(), doc.strata.iter().map(|s| (s.m, s.directions.clone())).collect())
    }
}

/// `ρ(x,y') = min_z d(x,z) + m_z + 1 + d(u z, y)` over grid points `z` on
/// rays of `A` (weight `m_z`) and the origin (weight 0, fixed by `u`).
pub fn chi_euclid(grid: &PolarGrid, pi: &PartialIsometry, snap_tol: f64) -> Result<CrossMetric> {
    let images = pi.images(grid, snap_tol)?;
    let mut hubs: Vec<(usize, usize, f64)> = vec![(0, 0, 0.0)];
    for (d, t, m) in images {
        for k in 0..grid.radii().len() {
            hubs.push((grid.point(d, k), grid.point(t, k), m as f64));
        }
    }
    let n = grid.len();
    let space = grid.space();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let lead: Vec<f64> = hubs.iter().map(|&(z, _, w)| space.d(x, z) + w + 1.0).collect();
            (0..n)
                .map(|y| {
                    hubs.iter()
                        .zip(&lead)
                        .map(|(&(_, uz, _), a)| a + space.d(uz, y))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect()
        })
        .collect();
    validate_cross(space.clone(), SquareMatrix::from_row_vecs(n, rows), DEFAULT_MIN_GAP)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FitStatus {
    Conforming,
    Nonconforming,
    /// No direction has a finite bound.
    Empty,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsiEuclidConfig {
    pub rays: RayConfig,
    pub angular_tol: f64,
}

impl Default for PsiEuclidConfig {
    fn default() -> Self {
        Self {
            rays: RayConfig::default(),
            angular_tol: ANGULAR_TOL,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveredPair {
    pub source: usize,
    pub target: usize,
    /// Finite `f_ρ` bound of the source ray.
    pub bound: u64,
    /// Largest radius-matched cross value over the tail window.
    pub cost: f64,
    /// Angle between `u(source)` and `target` for the fitted `u`.
    pub residual: f64,
    /// Angle subtended at radius `R_max` by a chord of length `cost`.
    pub envelope: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EuclidRecovery {
    pub pairs: Vec<RecoveredPair>,
    /// Orthogonal completion; only its restriction to the sources is determined.
    pub matrix: Vec<Vec<f64>>,
    pub fit_residual: f64,
    pub envelope: f64,
    pub status: FitStatus,
    pub angle: Option<f64>,
    pub r_max: f64,
}

impl EuclidRecovery {
    pub fn domain(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.source).collect()
    }
}

/// Orthogonal `u` minimizing `Σ |u r_i − t_i|²`.
pub fn procrustes(sources: &[Vec<f64>], targets: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = sources.first().map_or(0, Vec::len);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (r, t) in sources.iter().zip(targets) {
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += t[i] * r[j];
            }
        }
    }
    let svd = m.svd(true, true);
    let u = svd.u.unwrap() * svd.v_t.unwrap();
    (0..n).map(|i| (0..n).map(|j| u[(i, j)]).collect()).collect()
}

pub fn psi_euclid(grid: &PolarGrid, rho: &CrossMetric, config: &PsiEuclidConfig) -> Result<(EuclidRecovery, Strata)> {
    if !same_space(rho.space(), grid.space()) {
        return Err(Error::SpaceMismatch);
    }
    let r_max = grid.r_max();
    let scales = [r_max / 4.0, r_max / 2.0, r_max];
    let fam = grid.family(rho, &scales)?;
    let st = strata(&fam, &grid.ray_family(), &config.rays)?;
    let window: Vec<usize> = (0..grid.radii().len())
        .filter(|&k| grid.radii()[k] >= config.rays.tail_fraction * r_max)
        .collect();
    let nd = grid.directions().len();

    let mut found: Vec<(usize, usize, u64, f64)> = (0..nd)
        .into_par_iter()
        .filter_map(|d| {
            let bound = st.estimates[d].verdict.bound()?;
            let mut best: Option<(usize, Vec<f64>)> = None;
            for t in 0..nd {
                let costs: Vec<f64> = window.iter().map(|&k| rho.get(grid.point(d, k), grid.point(t, k))).collect();
                if best.as_ref().is_none_or(|(_, b)| crate::tree::better(&costs, b)) {
                    best = Some((t, costs));
                }
            }
            let (t, costs) = best?;
            let cost = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if st.divergence_bound.is_some_and(|b| cost > b) {
                return None;
            }
            Some((d, t, bound, cost))
        })
        .collect();
    found.sort_by_key(|f| f.0);

    if found.is_empty() {
        return Ok((
            EuclidRecovery {
                pairs: Vec::new(),
                matrix: Vec::new(),
                fit_residual: 0.0,
                envelope: 0.0,
                status: FitStatus::Empty,
                angle: None,
                r_max,
            },
            st,
        ));
    }
    let dirs = grid.directions();
    let sources: Vec<Vec<f64>> = found.iter().map(|f| dirs[f.0].clone()).collect();
    let targets: Vec<Vec<f64>> = found.iter().map(|f| dirs[f.1].clone()).collect();
    let u = procrustes(&sources, &targets);
    let apply = |v: &[f64]| -> Vec<f64> { u.iter().map(|row| dot(row, v)).collect() };
    let pairs: Vec<RecoveredPair> = found
        .iter()
        .zip(sources.iter().zip(&targets))
        .map(|(&(source, target, bound, cost), (r, t))| RecoveredPair {
            source,
            target,
            bound,
            cost,
            residual: angle_between(&apply(r), t),
            envelope: 2.0 * (cost / (2.0 * r_max)).min(1.0).asin(),
        })
        .collect();
    let fit_residual = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
    let envelope = pairs.iter().map(|p| p.envelope).fold(0.0, f64::max);
    let status = if fit_residual > config.angular_tol {
        FitStatus::Nonconforming
    } else {
        FitStatus::Conforming
    };
    let angle = (grid.dim() == 2).then(|| u[1][0].atan2(u[0][0]));
    Ok((
        EuclidRecovery {
            pairs,
            matrix: u,
            fit_residual,
            envelope,
            status,
            angle,
            r_max,
        },
        st,
    ))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EuclidRoundTrip {
    pub recovery: EuclidRecovery,
    /// Recovered sources equal `A`.
    pub domain_matches: bool,
    /// Largest angle between `u(a)` and the recovered `u'(a)` over `a ∈ A`.
    pub max_angle_error: f64,
    pub matches: bool,
}

pub fn euclid_round_trip(grid: &PolarGrid, pi: &PartialIsometry, config: &PsiEuclidConfig) -> Result<EuclidRoundTrip> {
    let rho = chi_euclid(grid, pi, SNAP_TOL)?;
    let (recovery, _) = psi_euclid(grid, &rho, config)?;
    let domain_matches = recovery.domain() == pi.domain();
    let max_angle_error = if recovery.matrix.is_empty() {
        0.0
    } else {
        pi.domain()
            .iter()
            .map(|&a| {
                let v = &grid.directions()[a];
                let fitted: Vec<f64> = recovery.matrix.iter().map(|row| dot(row, v)).collect();
                angle_between(&pi.apply(v), &fitted)
            })
            .fold(0.0, f64::max)
    };
    Ok(EuclidRoundTrip {
        matches: domain_matches && max_angle_error <= config.angular_tol,
        recovery,
        domain_matches,
        max_angle_error,
    })
}

/// Rotation by `theta_deg` on an eight-direction planar grid. When the
/// rotation preserves the 45° grid the domain is every direction; otherwise
/// the grid is the four axes together with their images and `A` is the axes.
pub fn rotation_fixture(theta_deg: f64, radii: Vec<f64>) -> Result<(PolarGrid, PartialIsometry)> {
    let theta = theta_deg.to_radians();
    if (theta_deg / 45.0).fract().abs() < 1e-12 {
        let grid = PolarGrid::uniform(8, radii)?;
        let pi = PartialIsometry::rotation(theta, (0..8).collect())?;
        return Ok((grid, pi));
    }
    let axes = [0.0, 90.0, 180.0, 270.0];
    let angles: Vec<f64> = axes.iter().copied().chain(axes.iter().map(|a| (a + theta_deg).rem_euclid(360.0))).collect();
    let grid = PolarGrid::planar(&angles, radii)?;
    let pi = PartialIsometry::rotation(theta, (0..4).collect())?;
    Ok((grid, pi))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AngleRow {
    pub radius: f64,
    pub alpha: f64,
    pub beta: f64,
    pub source_chord: f64,
    pub target_chord: f64,
    /// `|sin(α/2) − sin(β/2)|`
    pub sine_gap: f64,
    /// `C / R`
    pub bound: f64,
    /// Largest of `ρ(x_i, y_i')` at this radius.
    pub gluing: f64,
    pub ok: bool,
}

/// Compare the angle between source rays with the angle between target rays,
/// estimated from chords at each radius.
pub fn angle_preservation_check(
    grid: &PolarGrid,
    rho: &CrossMetric,
    (r1, t1): (usize, usize),
    (r2, t2): (usize, usize),
    radii: &[f64],
    c: f64,
) -> Result<Vec<AngleRow>> {
    radii
        .iter()
        .map(|&radius| {
            let k = grid
                .radius_index(radius)
                .ok_or_else(|| Error::Grid(format!("radius {radius} is not on the grid")))?;
            let (x1, x2, y1, y2) = (grid.point(r1, k), grid.point(r2, k), grid.point(t1, k), grid.point(t2, k));
            let source_chord = grid.space().d(x1, x2);
            let target_chord = grid.space().d(y1, y2);
            let sa = (source_chord / (2.0 * radius)).min(1.0);
            let sb = (target_chord / (2.0 * radius)).min(1.0);
            let sine_gap = (sa - sb).abs();
            let bound = c / radius;
            Ok(AngleRow {
                radius,
                alpha: 2.0 * sa.asin(),
                beta: 2.0 * sb.asin(),
                source_chord,
                target_chord,
                sine_gap,
                bound,
                gluing: rho.get(x1, y1).max(rho.get(x2, y2)),
                ok: sine_gap <= bound,
            })
        })
        .collect()
}

/// Largest entrywise difference between the cross metrics of two
/// stratifications of the same domain, with the bound given by the larger
/// top weight.
pub fn stratification_gap(grid: &PolarGrid, a: &PartialIsometry, b: &PartialIsometry) -> Result<(f64, f64)> {
    if a.domain() != b.domain() {
        return Err(Error::Isometry("stratifications have different domains".into()));
    }
    let ra = chi_euclid(grid, a, SNAP_TOL)?;
    let rb = chi_euclid(grid, b, SNAP_TOL)?;
    let gap = ra.cross().max_abs_diff(rb.cross());
    Ok((gap, a.max_weight().max(b.max_weight()) as f64))
}
