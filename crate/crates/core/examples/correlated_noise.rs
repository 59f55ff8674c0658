// Fully correlated dephasing of the memories: every carrier outcome at
// full strength, and the best GQD at a few strengths.

use discordnet::correlations::InnerBudget;
use discordnet::experiments::appendix::{noisy_max_gqd, outcome_branches};
use discordnet::experiments::{OutcomeBranch, Settings};

pub fn run_example() -> discordnet::Result<(Vec<OutcomeBranch>, Vec<(f64, f64)>)> {
    let s = Settings::new(InnerBudget::Fast, 0);
    let branches = outcome_branches(&s)?;
    let curve = [0.0, 1.0]
        .into_iter()
        .map(|p| Ok((p, noisy_max_gqd(p, &s)?.0)))
        .collect::<discordnet::Result<_>>()?;
    Ok((branches, curve))
}

fn main() -> discordnet::Result<()> {
    let (branches, curve) = run_example()?;
    for b in &branches {
        println!(
            "outcome {:?}: p = {:.3}, GQD {:.4}, F(ρ2) {:.4}, F(Werner) {:.4}",
            b.bits, b.probability, b.gqd, b.fidelity_rho2, b.fidelity_singlet_werner
        );
    }
    for (p, g) in curve {
        println!("p = {p}: best GQD {g:.4}");
    }
    Ok(())
}
