//! Rays through truncated spaces and the per-ray gluing bound
//! `f_ρ(r) = inf { C : limsup_{x ∈ r} ρ(x, X') < C }`.
//!
//! The lim sup is estimated per stage of a [`ScaleFamily`] by the maximum of
//! `ρ(x, X')` over the ray's samples in the tail window `[f·R, R]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::approx_le;
use crate::metric::ScaleFamily;

/// A ray sampled at known distances from the basepoint. Sample indices
/// refer to the final stage of the family the ray is used with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub id: String,
    /// `(radius, point index)`, sorted by radius.
    pub samples: Vec<(f64, usize)>,
}

impl Ray {
    pub fn new(id: impl Into<String>, mut samples: Vec<(f64, usize)>) -> Self {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { id: id.into(), samples }
    }

    /// The sample at exactly `radius`, if any.
    pub fn sample(&self, radius: f64) -> Option<usize> {
        self.samples.iter().find(|s| s.0 == radius).map(|s| s.1)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RayFamily {
    pub rays: Vec<Ray>,
}

impl RayFamily {
    pub fn new(rays: Vec<Ray>) -> Self {
        Self { rays }
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Ray> {
        self.rays.iter().find(|r| r.id == id)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RayConfig {
    /// Lower end of the tail window as a fraction of the stage radius.
    pub tail_fraction: f64,
    /// Trailing stages over which the tail must not increase.
    pub window: usize,
    /// Explicit divergence bound; `None` means 10× the largest finite bound.
    pub divergence_bound: Option<f64>,
}

impl Default for RayConfig {
    fn default() -> Self {
        Self {
            tail_fraction: 0.5,
            window: 2,
            divergence_bound: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceReason {
    /// Tail still increasing over the trailing window.
    Growth,
    /// Tail above the divergence bound.
    Bound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RayVerdict {
    /// `bound` is the smallest integer dominating the final tail.
    Finite { bound: u64, tail: f64 },
    Divergent {
        reason: DivergenceReason,
        stage: usize,
        tail: f64,
    },
}

impl RayVerdict {
    pub fn bound(&self) -> Option<u64> {
        match *self {
            RayVerdict::Finite { bound, .. } => Some(bound),
            RayVerdict::Divergent { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.bound().is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FRhoEstimate {
    pub ray: String,
    /// Per stage.
    pub tail_sup: Vec<f64>,
    pub verdict: RayVerdict,
}

/// Final-stage index → stage index, for every stage.
pub(crate) fn stage_lookups(fam: &ScaleFamily) -> Vec<Vec<Option<usize>>> {
    let n_last = fam.last().dim();
    (0..fam.len())
        .map(|t| {
            let mut inv = vec![None; n_last];
            for (i, p) in fam.embedding_into_last(t).into_iter().enumerate() {
                inv[p] = Some(i);
            }
            inv
        })
        .collect()
}

fn tail_sups(fam: &ScaleFamily, lookups: &[Vec<Option<usize>>], ray: &Ray, frac: f64) -> Result<Vec<f64>> {
    (0..fam.len())
        .map(|t| {
            let r = fam.scales()[t];
            let stage = fam.stage(t);
            ray.samples
                .iter()
                .filter(|(rad, _)| *rad >= frac * r && *rad <= r)
                .filter_map(|&(_, p)| lookups[t][p])
                .map(|i| stage.to_other_copy(i))
                .reduce(f64::max)
                .ok_or_else(|| Error::NoSamples {
                    ray: ray.id.clone(),
                    stage: t,
                })
        })
        .collect()
}

fn classify(tail: &[f64], window: usize, bound: Option<f64>) -> RayVerdict {
    let last = tail.len() - 1;
    let fin = tail[last];
    if let Some(b) = bound {
        if fin > b {
            let stage = tail.iter().position(|&v| v > b).unwrap_or(last);
            return RayVerdict::Divergent {
                reason: DivergenceReason::Bound,
                stage,
                tail: fin,
            };
        }
    }
    let w = window.clamp(1, tail.len());
    let trailing = &tail[tail.len() - w..];
    if let Some(k) = trailing.windows(2).position(|p| !approx_le(p[1], p[0])) {
        return RayVerdict::Divergent {
            reason: DivergenceReason::Growth,
            stage: tail.len() - w + k + 1,
            tail: fin,
        };
    }
    RayVerdict::Finite {
        bound: fin.ceil().max(1.0) as u64,
        tail: fin,
    }
}

/// Estimate `f_ρ` on one ray over the stages of `fam`.
pub fn estimate_f_rho(fam: &ScaleFamily, ray: &Ray, config: &RayConfig) -> Result<FRhoEstimate> {
    let lookups = stage_lookups(fam);
    let tail_sup = tail_sups(fam, &lookups, ray, config.tail_fraction)?;
    let verdict = classify(&tail_sup, config.window, config.divergence_bound);
    Ok(FRhoEstimate {
        ray: ray.id.clone(),
        tail_sup,
        verdict,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Strata {
    pub estimates: Vec<FRhoEstimate>,
    /// `(m, A_m)` for `m = 1..=max finite bound`.
    pub levels: Vec<(u64, Vec<String>)>,
    pub divergence_bound: Option<f64>,
}

impl Strata {
    /// Rays with a finite verdict.
    pub fn domain(&self) -> Vec<&str> {
        self.estimates
            .iter()
            .filter(|e| e.verdict.is_finite())
            .map(|e| e.ray.as_str())
            .collect()
    }

    pub fn level(&self, m: u64) -> Vec<&str> {
        self.estimates
            .iter()
            .filter(|e| e.verdict.bound().is_some_and(|b| b <= m))
            .map(|e| e.ray.as_str())
            .collect()
    }

    pub fn is_nested(&self) -> bool {
        self.levels
            .windows(2)
            .all(|w| w[0].1.iter().all(|r| w[1].1.contains(r)))
    }
}

/// `A_m = { r : f_ρ(r) <= m }` for every ray of `rays`.
pub fn strata(fam: &ScaleFamily, rays: &RayFamily, config: &RayConfig) -> Result<Strata> {
    let lookups = stage_lookups(fam);
    let tails = rays
        .rays
        .iter()
        .map(|r| tail_sups(fam, &lookups, r, config.tail_fraction))
        .collect::<Result<Vec<_>>>()?;
    let bound = config.divergence_bound.or_else(|| {
        tails
            .iter()
            .map(|t| classify(t, config.window, None))
            .filter_map(|v| v.bound())
            .max()
            .map(|b| 10.0 * b as f64)
    });
    let estimates: Vec<FRhoEstimate> = rays
        .rays
        .iter()
        .zip(tails)
        .map(|(r, tail_sup)| FRhoEstimate {
            ray: r.id.clone(),
            verdict: classify(&tail_sup, config.window, bound),
            tail_sup,
        })
        .collect();
    let max_bound = estimates.iter().filter_map(|e| e.verdict.bound()).max().unwrap_or(0);
    let mut out = Strata {
        estimates,
        levels: Vec::new(),
        divergence_bound: bound,
    };
    out.levels = (1..=max_bound)
        .map(|m| (m, out.level(m).into_iter().map(String::from).collect()))
        .collect();
    Ok(out)
}

/// CSV with columns `ray_id,stage,tail_sup,verdict,bound`.
pub fn strata_csv(s: &Strata) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("ray_id,stage,tail_sup,verdict,bound\n");
    for e in &s.estimates {
        let (verdict, bound) = match e.verdict {
            RayVerdict::Finite { bound, .. } => ("FINITE", bound.to_string()),
            RayVerdict::Divergent { .. } => ("DIVERGENT", String::new()),
        };
        for (t, v) in e.tail_sup.iter().enumerate() {
            let _ = writeln!(out, "{},{t},{v},{verdict},{bound}", e.ray);
        }
    }
    out
}
