// Optimal GQD for N = 2, 3 parties next to the W-state benchmarks.

use discordnet::correlations::InnerBudget;
use discordnet::experiments::{table1, Settings, Table1};
use discordnet::qstate::Mixedness;

pub fn run_example() -> discordnet::Result<Table1> {
    table1(&[2, 3], Mixedness::Purity, &Settings::new(InnerBudget::Fast, 0))
}

fn main() -> discordnet::Result<()> {
    let t = run_example()?;
    println!("  N     G_M   theta     G_W     eps   G_eps   ratio");
    for r in &t.rows {
        println!(
            "{:>3} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4}",
            r.n, r.g_m, r.theta(), r.g_w, r.eps, r.g_eps, r.ratio
        );
    }
    Ok(())
}
