//! D_{M1|M2}, D_{M2|M1} and GQD of the bipartite memory state over (θ₁, θ₂)
//! at φ₁ = φ₂ = 0.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::correlations::discord_asym;
use crate::error::{Error, Result};
use crate::protocol::final_state_closed_form;

use super::{gqd_value, linspace, Settings, Table};

#[derive(Clone, Debug, PartialEq)]
pub struct Heatmaps {
    /// Shared θ axis on [0, π].
    pub thetas: Vec<f64>,
    /// `[i][j]` holds the value at (θ₁, θ₂) = (thetas[i], thetas[j]).
    pub d_m1_given_m2: Vec<Vec<f64>>,
    pub d_m2_given_m1: Vec<Vec<f64>>,
    pub gqd: Vec<Vec<f64>>,
}

impl Heatmaps {
    pub fn tables(&self) -> Result<Vec<Table>> {
        let panels = [
            ("heatmap_d_m1_given_m2", &self.d_m1_given_m2),
            ("heatmap_d_m2_given_m1", &self.d_m2_given_m1),
            ("heatmap_gqd", &self.gqd),
        ];
        let mut out = Vec::with_capacity(3);
        for (name, grid) in panels {
            let mut t = Table::new(name, &["theta1", "theta2", "value"]);
            for (i, row) in grid.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    t.push(vec![self.thetas[i].into(), self.thetas[j].into(), (*v).into()])?;
                }
            }
            out.push(t);
        }
        Ok(out)
    }

    /// Largest value of a panel and where it occurs.
    pub fn argmax(grid: &[Vec<f64>], thetas: &[f64]) -> (f64, f64, f64) {
        let mut best = (f64::MIN, 0.0, 0.0);
        for (i, row) in grid.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.0 {
                    best = (v, thetas[i], thetas[j]);
                }
            }
        }
        best
    }
}

/// `points` × `points` grids over [0, π]².
pub fn heatmaps(points: usize, settings: &Settings) -> Result<Heatmaps> {
    if points < 2 {
        return Err(Error::out_of_range("points", points as f64, "≥ 2"));
    }
    let thetas = linspace(0.0, PI, points);
    let cells: Vec<(f64, f64, f64)> = (0..points * points)
        .into_par_iter()
        .map(|idx| {
            let (t1, t2) = (thetas[idx / points], thetas[idx % points]);
            let rho = final_state_closed_form(t1, t2, 0.0, 0.0);
            Ok((
                discord_asym(&rho, "M2", &["M1"])?.value,
                discord_asym(&rho, "M1", &["M2"])?.value,
                gqd_value(&rho, &settings.inner)?,
            ))
        })
        .collect::<Result<_>>()?;
    let panel = |pick: fn(&(f64, f64, f64)) -> f64| -> Vec<Vec<f64>> {
        cells.chunks(points).map(|row| row.iter().map(pick).collect()).collect()
    };
    Ok(Heatmaps {
        d_m1_given_m2: panel(|c| c.0),
        d_m2_given_m1: panel(|c| c.1),
        gqd: panel(|c| c.2),
        thetas,
    })
}
