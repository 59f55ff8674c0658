// GHZ carriers on three parties, two of which interact; the third carrier
// is kept.

use discordnet::correlations::InnerBudget;
use discordnet::experiments::{ghz_variant, GhzVariant, Settings};

pub fn run_example() -> discordnet::Result<GhzVariant> {
    ghz_variant(&Settings::new(InnerBudget::Fast, 0))
}

fn main() -> discordnet::Result<()> {
    let g = run_example()?;
    println!("GQD(M1 M2 C3) = {:.4} at {:.4?}", g.m1m2c3, g.argmax);
    println!("GQD(M1 M2)    = {:.4}", g.m1m2);
    println!("GQD(GHZ3)     = {:.4}", g.ghz);
    Ok(())
}
