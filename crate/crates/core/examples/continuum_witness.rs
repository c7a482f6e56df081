//! Two gluings of the half-line that stop being coarsely equivalent.

use double_metrics::coarse::{coarse_equivalent, profile_csv, EquivalenceConfig};
use double_metrics::fixtures;

fn main() -> double_metrics::Result<()> {
    let cfg = EquivalenceConfig::default();
    for (name, pair) in [("powers of 3 vs 2", fixtures::powers_pair(9)?), ("2^n vs 2^n+1", fixtures::shifted_pair(12)?)] {
        let v = coarse_equivalent(&pair.first, &pair.second, &cfg)?;
        println!("{name}: {:?}", v.status);
        for row in &v.envelope {
            println!("  t = {:>4}: forward {:>8}, backward {:>8}", row.threshold, row.forward, row.backward);
        }
        let fwd = v.forward.as_ref().unwrap();
        if let Some(w) = fwd.witnesses.last().and_then(|w| w[0].clone()) {
            println!("  phi(1) attained at {} ~ {}", w.0, w.1);
        }
        let csv = profile_csv(fwd, v.backward.as_ref().unwrap());
        println!("  profile csv: {} rows", csv.lines().count() - 1);
    }
    Ok(())
}
