// Classifies the map the protocol induces on the memories as semiclassical
// and/or unital across a lattice of carrier bases.

use discordnet::experiments::{appendix1, Appendix1};

pub fn run_example() -> discordnet::Result<Appendix1> {
    appendix1(5, 4)
}

fn main() -> discordnet::Result<()> {
    let a = run_example()?;
    let semi = a.rows.iter().filter(|r| r.semiclassical).count();
    let unital = a.rows.iter().filter(|r| r.unital).count();
    println!("{} bases: {semi} semiclassical, {unital} unital, {} mismatches", a.rows.len(), a.mismatches());
    println!("unital witness {:?}: D(M1|M2) = {:.4}", a.witness_angles, a.witness_discord);
    for (t, d1, d2) in &a.single_memory {
        println!("single memory θ2 = {t:.4}: D(C1|M2) = {d1:.4}, D(M2|C1) = {d2:.4}");
    }
    for (case, d) in &a.nonfactorizability {
        println!("{case}: trace distance to product channel {d:.4}");
    }
    Ok(())
}
