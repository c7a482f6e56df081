//! Desk-scale coarse equivalence via distortion profiles.
//!
//! For metrics `d`, `d'` on the doubles of the stages of two coherent
//! families, `φ_R(t) = sup { d'(p,q) : d(p,q) <= t }` over pairs present at
//! stage `R`. Bounded, stabilizing profiles in both directions are evidence
//! of `d ~_c d'`; a blown-up `φ_R(t_min)` is a divergence witness.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{CrossMetric, ScaleFamily};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionProfile {
    pub thresholds: Vec<f64>,
    pub scales: Vec<f64>,
    /// `values[stage][k] = φ_{R_stage}(t_k)`
    pub values: Vec<Vec<f64>>,
    /// Pair attaining each value, as double-space labels (`x` or `x'`).
    pub witnesses: Vec<Vec<Option<(String, String)>>>,
}

impl DistortionProfile {
    pub fn last(&self) -> &[f64] {
        self.values.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_monotone(&self) -> bool {
        let in_t = self.values.iter().all(|row| row.windows(2).all(|w| w[0] <= w[1]));
        let in_r = self.values.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a <= b));
        in_t && in_r
    }
}

fn double_label(m: &CrossMetric, a: usize) -> String {
    let n = m.dim();
    if a < n {
        m.space().label(a).to_string()
    } else {
        format!("{}'", m.space().label(a - n))
    }
}

fn check_compatible(fam: &ScaleFamily, fam2: &ScaleFamily) -> Result<()> {
    if fam.len() != fam2.len() {
        return Err(Error::Family(format!("{} stages vs {}", fam.len(), fam2.len())));
    }
    for (t, (a, b)) in fam.stages().iter().zip(fam2.stages()).enumerate() {
        if a.space().labels() != b.space().labels() {
            return Err(Error::Family(format!("point sets differ at stage {t}")));
        }
    }
    if fam.inclusions() != fam2.inclusions() {
        return Err(Error::Family("inclusions differ".into()));
    }
    Ok(())
}

/// One direction: sup of `d'` (from `fam2`) over pairs with `d` (from `fam`) below each threshold.
pub fn distortion_profile(fam: &ScaleFamily, fam2: &ScaleFamily, thresholds: &[f64]) -> Result<DistortionProfile> {
    check_compatible(fam, fam2)?;
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Family("thresholds must be strictly increasing".into()));
    }
    type Row = (Vec<f64>, Vec<Option<(String, String)>>);
    let per_stage: Vec<Row> = fam
        .stages()
        .par_iter()
        .zip(fam2.stages().par_iter())
        .map(|(a, b)| {
            let (da, db) = (a.double_matrix(), b.double_matrix());
            let m = da.dim();
            let mut best = vec![0.0; thresholds.len()];
            let mut arg: Vec<Option<(usize, usize)>> = vec![None; thresholds.len()];
            for p in 0..m {
                for q in p + 1..m {
                    let (d, d2) = (da.get(p, q), db.get(p, q));
                    for (k, &t) in thresholds.iter().enumerate().rev() {
                        if d > t {
                            break;
                        }
                        if d2 > best[k] {
                            best[k] = d2;
                            arg[k] = Some((p, q));
                        }
                    }
                }
            }
            let wit = arg
                .into_iter()
                .map(|o| o.map(|(p, q)| (double_label(a, p), double_label(a, q))))
                .collect();
            (best, wit)
        })
        .collect();
    let (values, witnesses) = per_stage.into_iter().unzip();
    Ok(DistortionProfile {
        thresholds: thresholds.to_vec(),
        scales: fam.scales().to_vec(),
        values,
        witnesses,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EquivalenceStatus {
    EquivalentAtScale,
    Divergent,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivalenceConfig {
    pub thresholds: Vec<f64>,
    pub divergence_bound: f64,
    /// Number of trailing stages whose profiles must coincide.
    pub window: usize,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        Self {
            thresholds: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            divergence_bound: 100.0,
            window: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub threshold: f64,
    pub forward: f64,
    pub backward: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivalenceVerdict {
    pub status: EquivalenceStatus,
    pub stabilization_stage: Option<usize>,
    pub envelope: Vec<EnvelopeRow>,
    #[serde(skip)]
    pub forward: Option<DistortionProfile>,
    #[serde(skip)]
    pub backward: Option<DistortionProfile>,
}

pub fn coarse_equivalent(fam: &ScaleFamily, fam2: &ScaleFamily, config: &EquivalenceConfig) -> Result<EquivalenceVerdict> {
    let fwd = distortion_profile(fam, fam2, &config.thresholds)?;
    let bwd = distortion_profile(fam2, fam, &config.thresholds)?;
    let envelope = config
        .thresholds
        .iter()
        .zip(fwd.last().iter().zip(bwd.last()))
        .map(|(&threshold, (&forward, &backward))| EnvelopeRow {
            threshold,
            forward,
            backward,
        })
        .collect();

    let stages = fwd.values.len();
    let same = |s: usize, t: usize| fwd.values[s] == fwd.values[t] && bwd.values[s] == bwd.values[t];
    let stabilization_stage = if stages == 0 {
        None
    } else {
        let last = stages - 1;
        let mut start = last;
        while start > 0 && same(start - 1, last) {
            start -= 1;
        }
        (stages - start >= config.window.max(2)).then_some(start)
    };

    let diverged = !config.thresholds.is_empty()
        && fwd
            .values
            .iter()
            .chain(&bwd.values)
            .any(|row| row[0] > config.divergence_bound);
    let finite = fwd.values.iter().chain(&bwd.values).flatten().all(|v| v.is_finite());

    let status = if stages < 3 {
        EquivalenceStatus::Inconclusive
    } else if diverged {
        EquivalenceStatus::Divergent
    } else if finite && stabilization_stage.is_some() {
        EquivalenceStatus::EquivalentAtScale
    } else {
        EquivalenceStatus::Inconclusive
    };
    Ok(EquivalenceVerdict {
        status,
        stabilization_stage,
        envelope,
        forward: Some(fwd),
        backward: Some(bwd),
    })
}

/// CSV with columns `scale,threshold,phi_forward,phi_backward`.
pub fn profile_csv(fwd: &DistortionProfile, bwd: &DistortionProfile) -> String {
    let mut out = String::from("scale,threshold,phi_forward,phi_backward\n");
    for (s, scale) in fwd.scales.iter().enumerate() {
        for (k, t) in fwd.thresholds.iter().enumerate() {
            let _ = writeln!(out, "{scale},{t},{},{}", fwd.values[s][k], bwd.values[s][k]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::metric::{subset_metric, FiniteMetricSpace, SubsetSpec};

    fn family(rho: &CrossMetric) -> ScaleFamily {
        let n = rho.dim();
        let sets: Vec<Vec<usize>> = [n / 3, 2 * n / 3, n].iter().map(|&k| (0..k.max(1)).collect()).collect();
        ScaleFamily::from_restrictions(rho, &sets, vec![1.0, 2.0, 3.0]).unwrap()
    }

    fn line(n: usize) -> Arc<FiniteMetricSpace> {
        Arc::new(FiniteMetricSpace::line(&(0..n).map(|i| i as f64).collect::<Vec<_>>()).unwrap())
    }

    #[test]
    fn identical_families() {
        let r = subset_metric(&line(9), &SubsetSpec::new([0, 4])).unwrap();
        let f = family(&r);
        let p = distortion_profile(&f, &f, &[1.0, 2.0, 3.0, 5.0]).unwrap();
        assert!(p.is_monotone());
        for row in &p.values {
            for (v, t) in row.iter().zip(&p.thresholds) {
                assert!(v <= t);
            }
        }
        let v = coarse_equivalent(&f, &f, &EquivalenceConfig::default()).unwrap();
        // values grow while the truncation grows, so only the trailing run counts
        assert_ne!(v.status, EquivalenceStatus::Divergent);
    }

    #[test]
    fn constant_offset_shifts_attained_values() {
        let r = subset_metric(&line(6), &SubsetSpec::all(&line(6))).unwrap();
        let c = 3.0;
        let shifted = r.offset(c);
        let (f, g) = (family(&r), family(&shifted));
        // cross values of ρ_X are 1 + |x-y|, so every integer t >= 1 is attained
        let p = distortion_profile(&f, &g, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.last(), &[1.0 + c, 2.0 + c, 3.0 + c]);
    }

    #[test]
    fn short_families_are_inconclusive() {
        let r = subset_metric(&line(4), &SubsetSpec::new([0])).unwrap();
        let f = ScaleFamily::from_restrictions(&r, &[vec![0, 1], vec![0, 1, 2, 3]], vec![1.0, 3.0]).unwrap();
        let v = coarse_equivalent(&f, &f, &EquivalenceConfig::default()).unwrap();
        assert_eq!(v.status, EquivalenceStatus::Inconclusive);
    }

    #[test]
    fn mismatched_families_rejected() {
        let r = subset_metric(&line(6), &SubsetSpec::new([0])).unwrap();
        let f = family(&r);
        let g = ScaleFamily::from_restrictions(&r, &[vec![0], vec![0, 1], vec![0, 1, 2]], vec![1.0, 2.0, 3.0]).unwrap();
        assert!(distortion_profile(&f, &g, &[1.0]).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = subset_metric(&line(6), &SubsetSpec::new([0])).unwrap();
        let f = family(&r);
        let p = distortion_profile(&f, &f, &[1.0, 2.0]).unwrap();
        let csv = profile_csv(&p, &p);
        assert!(csv.starts_with("scale,threshold,phi_forward,phi_backward\n"));
        assert_eq!(csv.lines().count(), 1 + 3 * 2);
    }
}
