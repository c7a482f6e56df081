//! Pointed spaces, cross metrics and their validation.

use std::sync::Arc;

use double_metrics::matrix::SquareMatrix;
use double_metrics::metric::{cross_violations, hausdorff_distance, subset_metric, validate_cross, SubsetSpec};
use double_metrics::{fixtures, random};

fn main() -> double_metrics::Result<()> {
    let x = Arc::new(fixtures::p3());
    println!("P3 with basepoint {}", x.label(x.basepoint()));

    let rho = subset_metric(&x, &SubsetSpec::new([0]))?;
    println!("gluing along the basepoint:");
    for row in rho.cross().rows() {
        println!("  {row:?}");
    }

    let flat = SquareMatrix::filled(3, 1.0);
    println!("constant block valid: {}", validate_cross(x.clone(), flat, 1.0).is_ok());
    // neighbours a, b whose columns differ by 4
    let skewed = SquareMatrix::from_fn(3, |i, j| if (i, j) == (1, 0) { 5.0 } else { 1.0 });
    for v in cross_violations(&x, &skewed, 1.0) {
        println!("skewed block: {v}");
    }

    let mut rng = random::rng(11);
    let y = Arc::new(random::random_space(&mut rng, 6));
    let a = random::random_subset(&mut rng, &y);
    let b = random::random_subset(&mut rng, &y);
    if !a.is_empty() && !b.is_empty() {
        println!("random space: Hausdorff({:?}, {:?}) = {}", a.indices(), b.indices(), hausdorff_distance(&y, &a, &b)?);
    }
    let r = random::random_cross(&mut rng, &y);
    println!("random cross metric valid: {}", r.revalidate().is_ok());
    Ok(())
}
