//! Composition and pseudoinverse of cross metrics.
//!
//! `compose(ρ, σ)` is the min-plus product with gap 1:
//! `(ρ∘σ)(x, y') = min_u σ(x, u') + 1 + ρ(u, y')`, so `σ` is applied first.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::metric::{same_space, CrossMetric};

/// Additive gap in the composition formula.
pub const COMPOSITION_GAP: f64 = 1.0;

pub fn compose(rho: &CrossMetric, sigma: &CrossMetric) -> Result<CrossMetric> {
    if !same_space(rho.space(), sigma.space()) {
        return Err(Error::SpaceMismatch);
    }
    let n = rho.dim();
    let (s, r) = (sigma.cross(), rho.cross());
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut out = vec![f64::INFINITY; n];
            for (u, &sxu) in s.row(x).iter().enumerate() {
                let base = sxu + COMPOSITION_GAP;
                for (o, &ruy) in out.iter_mut().zip(r.row(u)) {
                    let v = base + ruy;
                    if v < *o {
                        *o = v;
                    }
                }
            }
            out
        })
        .collect();
    Ok(CrossMetric::new_unchecked(
        rho.space().clone(),
        SquareMatrix::from_row_vecs(n, rows),
        rho.min_gap(),
    ))
}

/// `ρ*(x, y') = ρ(y, x')`
pub fn star(rho: &CrossMetric) -> CrossMetric {
    CrossMetric::new_unchecked(rho.space().clone(), rho.cross().transpose(), rho.min_gap())
}

/// `max |ρ∘ρ − ρ − 2|`; zero exactly when `ρ∘ρ = ρ + 2`.
pub fn idempotent_defect(rho: &CrossMetric) -> f64 {
    let sq = compose(rho, rho).expect("same space");
    sq.cross()
        .iter()
        .zip(rho.cross().iter())
        .map(|(a, b)| (a - b - 2.0 * COMPOSITION_GAP).abs())
        .fold(0.0, f64::max)
}

/// Checks `ρ∘ρ*∘ρ >= ρ + 2` entrywise.
pub fn sandwich_check(rho: &CrossMetric) -> bool {
    let inner = compose(&star(rho), rho).expect("same space");
    let outer = compose(rho, &inner).expect("same space");
    let ok = outer
        .cross()
        .iter()
        .zip(rho.cross().iter())
        .all(|(a, b)| crate::matrix::approx_le(b + 2.0 * COMPOSITION_GAP, a));
    ok
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::metric::{subset_metric, validate_cross, FiniteMetricSpace, SubsetSpec};

    fn line(n: usize) -> Arc<FiniteMetricSpace> {
        Arc::new(FiniteMetricSpace::line(&(0..n).map(|i| i as f64).collect::<Vec<_>>()).unwrap())
    }

    #[test]
    fn compose_of_rho_a_brute_force() {
        let x = line(6);
        let r = subset_metric(&x, &SubsetSpec::new([0])).unwrap();
        let c = compose(&r, &r).unwrap();
        // independent scan over the intermediate point
        let brute = (0..6)
            .map(|u| (2 + 1 + u) as f64 + 1.0 + (u + 1 + 3) as f64)
            .fold(f64::MAX, f64::min);
        assert_eq!(brute, 8.0);
        assert_eq!(c.get(2, 3), brute);
        assert_eq!(c.get(2, 3), r.get(2, 3) + 2.0);
        c.revalidate().unwrap();
    }

    #[test]
    fn one_point_space() {
        let one = Arc::new(FiniteMetricSpace::single_point());
        let r = validate_cross(one, SquareMatrix::filled(1, 1.0), 1.0).unwrap();
        assert_eq!(compose(&r, &r).unwrap().get(0, 0), 3.0);
        assert_eq!(idempotent_defect(&r), 0.0);
        assert!(sandwich_check(&r));
    }

    #[test]
    fn mismatched_spaces() {
        let a = subset_metric(&line(3), &SubsetSpec::new([0])).unwrap();
        let b = subset_metric(&line(4), &SubsetSpec::new([0])).unwrap();
        assert!(matches!(compose(&a, &b), Err(Error::SpaceMismatch)));
    }

    #[test]
    fn star_cases() {
        let x = line(6);
        let r = subset_metric(&x, &SubsetSpec::new([1, 3])).unwrap();
        assert_eq!(star(&r), r);
        let skew = validate_cross(x.clone(), SquareMatrix::from_fn(6, |i, j| (i as f64 - (5 - j) as f64).abs() + 1.0), 1.0)
            .unwrap();
        assert_eq!(star(&star(&skew)), skew);
    }

    #[test]
    fn reflection_is_not_idempotent() {
        let x = line(6);
        let refl = validate_cross(x.clone(), SquareMatrix::from_fn(6, |i, j| (i as f64 - (5 - j) as f64).abs() + 1.0), 1.0)
            .unwrap();
        // ρ∘ρ(0,0') = min_u |0-(5-u)| + 1 + 1 + |u-5| + 1 = 3 at u = 5, while ρ(0,0') + 2 = 8
        assert_eq!(compose(&refl, &refl).unwrap().get(0, 0), 3.0);
        assert!(idempotent_defect(&refl) > 0.0);
    }

    #[test]
    fn sandwich_on_rho_a() {
        let x = line(6);
        assert!(sandwich_check(&subset_metric(&x, &SubsetSpec::new([0])).unwrap()));
    }
}
