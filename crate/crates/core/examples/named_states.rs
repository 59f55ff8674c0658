// Discord quantifiers on the named benchmark states.

use std::collections::BTreeMap;

use discordnet::correlations::{discord_asym, gqd_min, GqdOptions};
use discordnet::qstate::{purity, NamedState};

pub fn run_example() -> discordnet::Result<Vec<(String, f64, f64)>> {
    let mut out = Vec::new();
    for (name, params) in [("bell", vec![]), ("rho1", vec![]), ("rho2", vec![]), ("tau", vec![("x", 0.5)]), ("w", vec![("n", 3.0)])] {
        let p: BTreeMap<String, f64> = params.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        let rho = NamedState::from_name(name, &p)?.build()?;
        let g = gqd_min(&rho, &GqdOptions::fast())?.value;
        let labels = rho.labels();
        let d = discord_asym(&rho, &labels[1], &[labels[0].as_str()])?.value;
        out.push((format!("{name} (purity {:.3})", purity(&rho)), d, g));
    }
    Ok(out)
}

fn main() -> discordnet::Result<()> {
    for (name, d, g) in run_example()? {
        println!("{name:<24} D(q1|q2) = {d:.4}  GQD = {g:.4}");
    }
    Ok(())
}
