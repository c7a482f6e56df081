//! Per-ray gluing bounds and the strata they induce on a tree.

use double_metrics::fixtures;
use double_metrics::rays::{strata, strata_csv, RayConfig};
use double_metrics::tree::{chi_tree, ChiConfig, RootedTree};

fn main() -> double_metrics::Result<()> {
    let tree = RootedTree::regular(2, 6)?;
    let map = fixtures::binary_prefix_maps()
        .into_iter()
        .find(|(n, _)| *n == "mixed")
        .map(|(_, m)| m)
        .unwrap();
    let rho = chi_tree(&tree, &map, &ChiConfig::default())?;
    let fam = tree.family(&rho.metric, &tree.default_stages())?;
    let st = strata(&fam, &tree.ray_family(), &RayConfig::default())?;
    let mut by_bound = std::collections::BTreeMap::<Option<u64>, Vec<&str>>::new();
    for e in &st.estimates {
        by_bound.entry(e.verdict.bound()).or_default().push(&e.ray);
    }
    for (b, rays) in &by_bound {
        println!("bound {b:?}: {} rays, first {} with tail {:?}", rays.len(), rays[0], st.estimates.iter().find(|e| e.ray == rays[0]).unwrap().tail_sup);
    }
    for (m, level) in &st.levels {
        println!("A_{m}: {} rays", level.len());
    }
    println!("nested: {}", st.is_nested());
    print!("{}", strata_csv(&st).lines().take(4).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}
