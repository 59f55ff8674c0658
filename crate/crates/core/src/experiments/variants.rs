//! Protocol variants: GHZ carriers on three parties.

use crate::error::Result;
use crate::protocol::run_ghz_variant;
use crate::qstate::{partial_trace, NamedState};

use super::{gqd_value, Outer, Settings, Table};

#[derive(Clone, Debug, PartialEq)]
pub struct GhzVariant {
    /// Best GQD of M₁M₂C₃ over both carrier bases.
    pub m1m2c3: f64,
    /// Interleaved (θ₁, φ₁, θ₂, φ₂) at that optimum.
    pub argmax: Vec<f64>,
    /// Best GQD of the two memories alone.
    pub m1m2: f64,
    pub m1m2_argmax: Vec<f64>,
    /// GQD of the three-qubit GHZ state itself.
    pub ghz: f64,
}

impl GhzVariant {
    pub fn table(&self) -> Result<Table> {
        let mut t = Table::new("ghz_variant", &["state", "gqd", "theta1", "phi1", "theta2", "phi2"]);
        for (name, v, a) in [("M1M2C3", self.m1m2c3, &self.argmax), ("M1M2", self.m1m2, &self.m1m2_argmax)] {
            t.push(vec![name.into(), v.into(), a[0].into(), a[1].into(), a[2].into(), a[3].into()])?;
        }
        let nan = f64::NAN;
        t.push(vec!["GHZ3".into(), self.ghz.into(), nan.into(), nan.into(), nan.into(), nan.into()])?;
        Ok(t)
    }
}

pub fn ghz_variant(settings: &Settings) -> Result<GhzVariant> {
    let fast = settings.outer_inner();
    let run = |x: &[f64]| run_ghz_variant([(x[0], x[1]), (x[2], x[3])]).map(|o| o.final_state);
    let outer = Outer::angles(2, settings.seed()).with_grid(9);
    let full = outer.maximize(|x| gqd_value(&run(x)?, &fast))?;
    let pair = outer.maximize(|x| gqd_value(&partial_trace(&run(x)?, &["M1", "M2"])?, &fast))?;
    Ok(GhzVariant {
        m1m2c3: gqd_value(&run(&full.argmax)?, &settings.inner)?,
        argmax: full.argmax,
        m1m2: gqd_value(&partial_trace(&run(&pair.argmax)?, &["M1", "M2"])?, &settings.inner)?,
        m1m2_argmax: pair.argmax,
        ghz: gqd_value(&NamedState::Ghz3.build()?, &settings.inner)?,
    })
}
