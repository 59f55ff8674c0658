//! Pairwise discord structure of the retained state when only the first
//! `k` carrier–memory pairs interact.

use crate::correlations::discord_asym;
use crate::error::{Error, Result};
use crate::protocol::{run_fast, ProtocolConfig};
use crate::qstate::{partial_trace, DensityMatrix, NamedState};

use super::{gqd_value, Outer, Settings, Table};

/// Generic carrier angle (θ, φ) used for the zero/nonzero pattern.
pub const GENERIC_ANGLE: (f64, f64) = (0.9, 0.3);

/// Discord above this is reported as nonzero.
pub const NONZERO_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct PairDiscord {
    /// Party indices, i < j.
    pub i: usize,
    pub j: usize,
    /// Retained labels for parties i and j (e.g. "M1", "C2").
    pub labels: (String, String),
    /// D_{i|j}: subsystem j is measured.
    pub d_i_given_j: f64,
    pub d_j_given_i: f64,
}

impl PairDiscord {
    pub fn nonzero_i_given_j(&self) -> bool {
        self.d_i_given_j > NONZERO_THRESHOLD
    }

    pub fn nonzero_j_given_i(&self) -> bool {
        self.d_j_given_i > NONZERO_THRESHOLD
    }

    /// The rule D_{X|Y} ≠ 0 exactly when the measured side Y is a memory.
    pub fn follows_memory_rule(&self) -> bool {
        let memory = |l: &str| l.starts_with('M');
        self.nonzero_i_given_j() == memory(&self.labels.1)
            && self.nonzero_j_given_i() == memory(&self.labels.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CensusRow {
    /// Pairs 1..=interactions interact.
    pub interactions: usize,
    pub retained: Vec<String>,
    pub pairs: Vec<PairDiscord>,
    /// Outer-maximised GQD of the whole retained state.
    pub max_gqd: f64,
    pub thetas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Census {
    pub n: usize,
    pub rows: Vec<CensusRow>,
}

impl Census {
    pub fn pairs_table(&self) -> Result<Table> {
        let mut t = Table::new(
            &format!("table2_n{}_pairs", self.n),
            &["interactions", "i", "j", "compound", "d_i_given_j", "d_j_given_i", "nonzero_i_given_j", "nonzero_j_given_i"],
        );
        for row in &self.rows {
            for p in &row.pairs {
                t.push(vec![
                    row.interactions.into(),
                    p.i.into(),
                    p.j.into(),
                    format!("{}{}", p.labels.0, p.labels.1).into(),
                    p.d_i_given_j.into(),
                    p.d_j_given_i.into(),
                    p.nonzero_i_given_j().into(),
                    p.nonzero_j_given_i().into(),
                ])?;
            }
        }
        Ok(t)
    }

    pub fn gqd_table(&self) -> Result<Table> {
        let mut t = Table::new(
            &format!("table2_n{}_gqd", self.n),
            &["interactions", "retained", "max_gqd", "theta_mean"],
        );
        for row in &self.rows {
            let mean = row.thetas.iter().sum::<f64>() / row.thetas.len() as f64;
            t.push(vec![
                row.interactions.into(),
                row.retained.concat().into(),
                row.max_gqd.into(),
                mean.into(),
            ])?;
        }
        Ok(t)
    }
}

fn retained_state(n: usize, k: usize, angles: &[(f64, f64)]) -> Result<DensityMatrix> {
    let cfg = ProtocolConfig::new(
        NamedState::ClassicalCarriers { n }.build()?,
        NamedState::PlusProduct { n }.build()?,
        (1..=k).collect(),
        angles,
    )?;
    Ok(run_fast(&cfg)?.final_state)
}

/// Census for 1..=n interactions. Pair discords use [`GENERIC_ANGLE`] on
/// every measured carrier; the GQD column is maximised over carrier θs.
pub fn table2_census(n: usize, settings: &Settings) -> Result<Census> {
    if !(2..=5).contains(&n) {
        return Err(Error::out_of_range("n", n as f64, "2..=5"));
    }
    let mut rows = Vec::with_capacity(n);
    for k in 1..=n {
        let state = retained_state(n, k, &vec![GENERIC_ANGLE; k])?;
        let labels = state.labels().to_vec();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (labels[i].as_str(), labels[j].as_str());
                let pair = partial_trace(&state, &[a, b])?;
                pairs.push(PairDiscord {
                    i: i + 1,
                    j: j + 1,
                    labels: (a.to_string(), b.to_string()),
                    d_i_given_j: discord_asym(&pair, b, &[a])?.value,
                    d_j_given_i: discord_asym(&pair, a, &[b])?.value,
                });
            }
        }
        let fast = settings.outer_inner();
        let build = |th: &[f64]| {
            let angles: Vec<(f64, f64)> = th.iter().map(|&t| (t, 0.0)).collect();
            retained_state(n, k, &angles)
        };
        let outer = Outer::thetas(k, settings.seed()).maximize(|th| gqd_value(&build(th)?, &fast))?;
        let max_gqd = gqd_value(&build(&outer.argmax)?, &settings.inner)?;
        rows.push(CensusRow {
            interactions: k,
            retained: labels,
            pairs,
            max_gqd,
            thetas: outer.argmax,
        });
    }
    Ok(Census { n, rows })
}
