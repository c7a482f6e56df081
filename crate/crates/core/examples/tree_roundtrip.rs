//! Prefix maps on a binary tree, glued into cross metrics and recovered.

use double_metrics::fixtures;
use double_metrics::tree::{inner_lemma_defects, tree_round_trip, ChiConfig, PsiConfig, RootedTree};

fn main() -> double_metrics::Result<()> {
    let tree = RootedTree::regular(2, 8)?;
    for (name, map) in fixtures::binary_prefix_maps() {
        let rt = tree_round_trip(&tree, &map, &ChiConfig::default(), &PsiConfig::default())?;
        let pairs: Vec<String> = map.pairs.iter().map(|p| format!("{}->{} (C={})", p.u, p.v, p.c)).collect();
        let defects = inner_lemma_defects(&tree, &map)?;
        println!(
            "{name:>8}: [{}] -> {} rays recovered, exact {}, distortion within 2C {}",
            pairs.join(", "),
            rt.recovered.pairs.len(),
            rt.matches,
            defects.iter().all(|(w, b)| w <= b)
        );
    }
    Ok(())
}
