//! Enumerate `S_Φ` inside the symmetric inverse monoid and its α-classes.

use double_metrics::fixtures;
use double_metrics::sphi::{check_inverse_axioms, closure_holds, enumerate_sphi, homomorphism_holds};

fn main() -> double_metrics::Result<()> {
    let cases = [
        ("PB(4), two blocks", fixtures::two_blocks()?),
        ("PB(3), one point", fixtures::fixed_block(3, 1)?),
        ("PB(4), block {1,2}", fixtures::fixed_block(4, 2)?),
    ];
    for (name, (sg, phi)) in &cases {
        let axioms = check_inverse_axioms(sg);
        let en = enumerate_sphi(sg, phi);
        println!(
            "{name}: inverse semigroup {}, {} elements, {} classes, closed {}, alpha multiplicative {}",
            axioms.all(),
            en.element_count(),
            en.class_count(),
            closure_holds(sg, phi, &en),
            homomorphism_holds(sg, phi, &en)
        );
        for (a, members) in &en.classes {
            let elems: Vec<String> = members.iter().map(|&i| en.elements[i].element.to_string()).collect();
            println!("  {a}: {}", elems.join(" "));
        }
    }
    Ok(())
}
