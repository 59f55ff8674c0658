// Coarse (θ₁, θ₂) maps of both discord directions and of the GQD.

use discordnet::correlations::InnerBudget;
use discordnet::experiments::{heatmaps, Heatmaps, Settings};

pub fn run_example() -> discordnet::Result<Heatmaps> {
    heatmaps(13, &Settings::new(InnerBudget::Fast, 0))
}

fn main() -> discordnet::Result<()> {
    let h = run_example()?;
    for (name, grid) in [("D(M1|M2)", &h.d_m1_given_m2), ("D(M2|M1)", &h.d_m2_given_m1), ("GQD", &h.gqd)] {
        let (v, t1, t2) = Heatmaps::argmax(grid, &h.thetas);
        println!("{name:>9}: max {v:.4} at ({t1:.3}, {t2:.3})");
    }
    for row in &h.gqd {
        let line: String = row.iter().map(|v| [' ', '.', ':', '*', '#'][((v / 0.2198) * 4.0).round().clamp(0.0, 4.0) as usize]).collect();
        println!("|{line}|");
    }
    Ok(())
}
