//! Composition, pseudoinverse and idempotents of cross metrics.

use std::sync::Arc;

use double_metrics::algebra::{compose, idempotent_defect, sandwich_check, star};
use double_metrics::metric::{subset_metric, FiniteMetricSpace, SubsetSpec};
use double_metrics::random;

fn main() -> double_metrics::Result<()> {
    let line = Arc::new(FiniteMetricSpace::line(&[0.0, 1.0, 3.0, 6.0, 10.0])?);
    let rho = subset_metric(&line, &SubsetSpec::new([1, 3]))?;
    let twice = compose(&rho, &rho)?;
    println!("rho_A o rho_A = rho_A + 2: {}", *twice.cross() == rho.cross().map(|v| v + 2.0));
    println!("idempotent defect {}", idempotent_defect(&rho));
    println!("sandwich rho rho* rho <= rho + 4: {}", sandwich_check(&rho));

    let mut rng = random::rng(3);
    let x = Arc::new(random::random_space(&mut rng, 5));
    let (a, b, c) = (
        random::random_cross(&mut rng, &x),
        random::random_cross(&mut rng, &x),
        random::random_cross(&mut rng, &x),
    );
    let left = compose(&compose(&a, &b)?, &c)?;
    let right = compose(&a, &compose(&b, &c)?)?;
    println!("associative: {}", left == right);
    println!("(ab)* = b*a*: {}", star(&compose(&a, &b)?) == compose(&star(&b), &star(&a))?);
    println!("product is a cross metric: {}", left.revalidate().is_ok());
    Ok(())
}
