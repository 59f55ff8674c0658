// Which pairs end up discordant, and in which direction, when only some
// of three carrier–memory pairs interact.

use discordnet::correlations::InnerBudget;
use discordnet::experiments::{table2_census, Census, Settings};

pub fn run_example() -> discordnet::Result<Census> {
    table2_census(3, &Settings::new(InnerBudget::Fast, 0))
}

fn main() -> discordnet::Result<()> {
    let c = run_example()?;
    for row in &c.rows {
        println!("{} interaction(s), kept {:?}, max GQD {:.4}", row.interactions, row.retained, row.max_gqd);
        for p in &row.pairs {
            println!(
                "    D({}|{}) {}   D({}|{}) {}",
                p.labels.0, p.labels.1, if p.nonzero_i_given_j() { "✓" } else { "✗" },
                p.labels.1, p.labels.0, if p.nonzero_j_given_i() { "✓" } else { "✗" },
            );
        }
    }
    Ok(())
}
