//! Boundary maps realizable on the half-line and on the line.

use double_metrics::tree::corollary_check;

fn main() -> double_metrics::Result<()> {
    let report = corollary_check(6)?;
    for part in [&report.half_line, &report.line] {
        println!(
            "{} arm(s): {} constructible prefix maps, round trips exact: {}",
            part.arms, part.constructible, part.round_trips_exact
        );
        for pb in &part.recovered {
            let s: Vec<String> = pb.iter().map(|(a, b)| format!("{a}->{b}")).collect();
            println!("  {{{}}}", s.join(", "));
        }
    }
    println!("half-line gives only zero and unit: {}", report.zero_and_unit);
    println!("line gives all seven partial bijections: {}", report.all_seven);
    Ok(())
}
