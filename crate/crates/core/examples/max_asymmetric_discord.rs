// Searches all four carrier angles for the largest D_{M1|M2} the protocol
// leaves on the two memories.

use std::f64::consts::PI;

use discordnet::correlations::discord_asym;
use discordnet::protocol::final_state_closed_form;
use discordnet::search::{optimize, Goal, SearchSpec};

pub fn run_example() -> discordnet::Result<(f64, Vec<f64>)> {
    let box4 = vec![(0.0, PI), (0.0, PI), (0.0, 2.0 * PI), (0.0, 2.0 * PI)];
    let mut spec = SearchSpec::new(box4, Goal::Maximize).with_grid(7).with_multistarts(4);
    spec.periodic = vec![false, false, true, true];
    let r = optimize(&spec, |x| {
        let rho = final_state_closed_form(x[0], x[1], x[2], x[3]);
        discord_asym(&rho, "M2", &["M1"]).map_or(f64::NAN, |d| d.value)
    })?;
    Ok((r.value, r.argopt))
}

fn main() -> discordnet::Result<()> {
    let (d, at) = run_example()?;
    println!("max D(M1|M2) = {d:.4} at (θ1, θ2, φ1, φ2) = {at:.4?}");
    Ok(())
}
