//! Distributed GQD against party count, benchmarked by W and Werner–W states.

use crate::error::{Error, Result};
use crate::protocol::final_state_closed_form_n;
use crate::qstate::{default_labels, match_werner_mixedness, Mixedness, NamedState};

use super::{gqd_value, Field, Outer, Settings, Table};

#[derive(Clone, Debug, PartialEq)]
pub struct Table1Row {
    pub n: usize,
    /// Outer-maximised GQD of the memories.
    pub g_m: f64,
    /// Carrier θ at the optimum (φ = 0 throughout).
    pub thetas: Vec<f64>,
    /// GQD of |W_N⟩.
    pub g_w: f64,
    /// Werner–W mixing that matches the optimised memory state.
    pub eps: f64,
    pub g_eps: f64,
    pub ratio: f64,
    pub evaluations: usize,
}

impl Table1Row {
    /// Mean of the optimal θs; they coincide at a tied optimum.
    pub fn theta(&self) -> f64 {
        self.thetas.iter().sum::<f64>() / self.thetas.len() as f64
    }

    /// Largest minus smallest optimal θ.
    pub fn theta_spread(&self) -> f64 {
        let hi = self.thetas.iter().cloned().fold(f64::MIN, f64::max);
        let lo = self.thetas.iter().cloned().fold(f64::MAX, f64::min);
        hi - lo
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table1 {
    pub mixedness: Mixedness,
    pub rows: Vec<Table1Row>,
}

impl Table1 {
    pub fn table(&self) -> Result<Table> {
        let mut t = Table::new(
            "table1",
            &["n", "g_m", "theta", "theta_spread", "g_w", "eps", "g_eps", "ratio", "evaluations"],
        );
        for r in &self.rows {
            t.push(vec![
                r.n.into(),
                r.g_m.into(),
                r.theta().into(),
                r.theta_spread().into(),
                r.g_w.into(),
                r.eps.into(),
                r.g_eps.into(),
                r.ratio.into(),
                Field::from(r.evaluations),
            ])?;
        }
        Ok(t)
    }

    pub fn g_m(&self) -> Vec<(usize, f64)> {
        self.rows.iter().map(|r| (r.n, r.g_m)).collect()
    }
}

/// One row per N in `ns`. The outer search ties every θ for a warm start and
/// then frees them; the memory state uses φ = 0 since the distributed GQD
/// does not depend on the carrier phases.
pub fn table1(ns: &[usize], mixedness: Mixedness, settings: &Settings) -> Result<Table1> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        if !(2..=6).contains(&n) {
            return Err(Error::out_of_range("n", n as f64, "2..=6"));
        }
        let build = |thetas: &[f64]| {
            let angles: Vec<(f64, f64)> = thetas.iter().map(|&t| (t, 0.0)).collect();
            final_state_closed_form_n(&angles)
        };
        let fast = settings.outer_inner();
        let outer = Outer::thetas(n, settings.seed())
            .maximize(|th| gqd_value(&build(th)?, &fast))?;
        let memories = build(&outer.argmax)?;
        let g_m = gqd_value(&memories, &settings.inner)?;
        let g_w = gqd_value(&NamedState::W { n }.build()?, &settings.inner)?;
        let eps = match_werner_mixedness(n, &memories.relabel(&default_labels(n))?, mixedness)?;
        let g_eps = gqd_value(&NamedState::WernerW { n, eps }.build()?, &settings.inner)?;
        rows.push(Table1Row {
            n,
            g_m,
            thetas: outer.argmax,
            g_w,
            eps,
            g_eps,
            ratio: g_m / g_eps,
            evaluations: outer.evaluations,
        });
    }
    Ok(Table1 { mixedness, rows })
}
