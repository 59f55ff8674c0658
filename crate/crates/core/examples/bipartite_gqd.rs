// The best GQD two memories can share, and its insensitivity to the
// carrier azimuths.

use discordnet::correlations::{gqd_min, GqdOptions};
use discordnet::protocol::{final_state_closed_form, THETA_GQD_OPT};

pub fn run_example() -> discordnet::Result<(f64, f64)> {
    let opts = GqdOptions::default();
    let at = |phi1: f64, phi2: f64| -> discordnet::Result<f64> {
        Ok(gqd_min(&final_state_closed_form(THETA_GQD_OPT, THETA_GQD_OPT, phi1, phi2), &opts)?.value)
    };
    let peak = at(0.0, 0.0)?;
    let mut spread: f64 = 0.0;
    for (p1, p2) in [(0.7, 0.0), (1.9, 4.4), (3.1, 5.0)] {
        spread = spread.max((at(p1, p2)? - peak).abs());
    }
    Ok((peak, spread))
}

fn main() -> discordnet::Result<()> {
    let (g, spread) = run_example()?;
    println!("GQD at θ1 = θ2 = {THETA_GQD_OPT}: {g:.4}");
    println!("largest change over sampled φ: {spread:.1e}");
    Ok(())
}
