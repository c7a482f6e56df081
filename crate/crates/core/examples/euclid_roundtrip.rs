//! Rotations of a polar grid, glued into cross metrics and refitted.

use double_metrics::euclid::{euclid_round_trip, rotation_fixture, PolarGrid, PsiEuclidConfig};

fn main() -> double_metrics::Result<()> {
    let cfg = PsiEuclidConfig::default();
    for theta in [30.0_f64, 90.0, 137.0] {
        for r_max in [500.0, 1000.0, 2000.0] {
            let (grid, pi) = rotation_fixture(theta, PolarGrid::default_radii(r_max))?;
            let rt = euclid_round_trip(&grid, &pi, &cfg)?;
            let rec = &rt.recovery;
            println!(
                "theta {theta:>5}° R {r_max:>6}: {} rays, angle {:.6}°, {:?}, envelope {:.2e}",
                rec.pairs.len(),
                rec.angle.unwrap_or(f64::NAN).to_degrees(),
                rec.status,
                rec.envelope
            );
        }
    }
    Ok(())
}
