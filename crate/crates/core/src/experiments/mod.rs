//! Scripted reproductions: the N-party scaling table, the discord-structure
//! census, θ heatmaps, robustness studies, the effective-channel appendix,
//! the correlated-noise study, the GHZ-carrier variant and the scaling fits.
//!
//! Every experiment returns a typed report that can also be flattened into
//! [`Table`]s for emission. Outer searches over carrier angles always run
//! with the fast inner budget; reported optima are then re-evaluated with
//! the caller's [`Settings::inner`] options.

use std::sync::Mutex;

use serde::Serialize;

use crate::correlations::{gqd_min, GqdOptions, InnerBudget};
use crate::error::{Error, Result};
use crate::qstate::DensityMatrix;
use crate::search::{self, nelder_mead, Goal, SearchSpec};

pub mod appendix;
pub mod census;
pub mod fits;
pub mod heatmaps;
pub mod robustness;
pub mod table1;
pub mod variants;

pub use appendix::{appendix1, appendix2, Appendix1, Appendix2, NoisePoint, OutcomeBranch};
pub use census::{table2_census, Census, CensusRow, PairDiscord};
pub use fits::{exponential_fit, linear_fit, scaling_fits, FitResult};
pub use heatmaps::{heatmaps, Heatmaps};
pub use robustness::{
    carrier_robustness, measurement_robustness, memory_robustness, CarrierRobustness,
    MeasurementRobustness, MemoryRobustness, SweepPoint,
};
pub use table1::{table1, Table1, Table1Row};
pub use variants::{ghz_variant, GhzVariant};

/// One cell of an emitted table.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Field {
    Int(i64),
    Num(f64),
    Flag(bool),
    Text(String),
}

impl Field {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Field::Int(v) => Some(v as f64),
            Field::Num(v) => Some(v),
            _ => None,
        }
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Num(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as i64)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Flag(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_string())
    }
}

impl From<String> for Field {
    fn from(v: String) -> Self {
        Field::Text(v)
    }
}

/// A named, rectangular result table; every row has one field per column.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Field>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch(format!(
                "row of {} fields for {} columns in `{}`",
                row.len(),
                self.columns.len(),
                self.name
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column, in row order.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .column_index(name)
            .ok_or_else(|| Error::Config(format!("no column `{name}` in `{}`", self.name)))?;
        self.rows
            .iter()
            .map(|r| {
                r[k].as_f64()
                    .ok_or_else(|| Error::Config(format!("column `{name}` is not numeric")))
            })
            .collect()
    }
}

/// Options shared by every experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Settings {
    /// Inner GQD budget used for reported values.
    pub inner: GqdOptions,
}

impl Settings {
    pub fn new(budget: InnerBudget, seed: u64) -> Self {
        Settings {
            inner: GqdOptions { budget, seed },
        }
    }

    /// Options for inner minimisations inside outer searches.
    pub(crate) fn outer_inner(&self) -> GqdOptions {
        GqdOptions {
            budget: InnerBudget::Fast,
            seed: self.inner.seed,
        }
    }

    pub(crate) fn seed(&self) -> u64 {
        self.inner.seed
    }
}

/// GQD of `rho` with the given options, as a plain number.
pub(crate) fn gqd_value(rho: &DensityMatrix, options: &GqdOptions) -> Result<f64> {
    Ok(gqd_min(rho, options)?.value)
}

/// Result of a two-stage outer maximisation.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct OuterMax {
    pub argmax: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// An outer search over carrier angles.
pub(crate) struct Outer {
    pub bounds: Vec<(f64, f64)>,
    /// Box for the refinement stages; angles may leave their nominal range.
    pub refine: Vec<(f64, f64)>,
    pub periodic: Vec<bool>,
    /// Coordinates tied together for the warm start.
    pub ties: Vec<Vec<usize>>,
    pub grid: usize,
    pub multistarts: usize,
    /// Nelder–Mead budget for the unrestricted stage, per coordinate.
    pub evaluations_per_coordinate: usize,
    /// A known good point refined alongside the grid candidates.
    pub extra_start: Option<Vec<f64>>,
    pub seed: u64,
}

impl Outer {
    /// θ-only search, all θ tied for the warm start.
    pub fn thetas(k: usize, seed: u64) -> Self {
        Outer {
            bounds: vec![(0.0, std::f64::consts::PI); k],
            refine: vec![(0.0, std::f64::consts::PI); k],
            periodic: vec![false; k],
            ties: if k > 1 { vec![(0..k).collect()] } else { Vec::new() },
            grid: 25,
            multistarts: 3,
            evaluations_per_coordinate: 60,
            extra_start: None,
            seed,
        }
    }

    /// Interleaved (θ_j, φ_j) search; θs tied together and φs tied together
    /// for the warm start.
    pub fn angles(k: usize, seed: u64) -> Self {
        use std::f64::consts::PI;
        let ties = if k > 1 {
            vec![(0..k).map(|j| 2 * j).collect(), (0..k).map(|j| 2 * j + 1).collect()]
        } else {
            Vec::new()
        };
        Outer {
            bounds: (0..k).flat_map(|_| [(0.0, PI), (0.0, 2.0 * PI)]).collect(),
            refine: (0..k).flat_map(|_| [(-PI, 2.0 * PI), (-2.0 * PI, 4.0 * PI)]).collect(),
            periodic: (0..2 * k).map(|i| i % 2 == 1).collect(),
            ties,
            grid: 13,
            multistarts: 3,
            evaluations_per_coordinate: 60,
            extra_start: None,
            seed,
        }
    }

    pub fn with_grid(mut self, grid: usize) -> Self {
        self.grid = grid;
        self
    }

    /// Maximises `objective`: tied grid plus refinement, then an unrestricted
    /// Nelder–Mead from the tied optimum.
    pub fn maximize<F>(&self, objective: F) -> Result<OuterMax>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let failure: Mutex<Option<Error>> = Mutex::new(None);
        let f = |x: &[f64]| match objective(x) {
            Ok(v) => v,
            Err(e) => {
                let mut slot = failure.lock().expect("poisoned");
                slot.get_or_insert(e);
                0.0
            }
        };
        let d = self.bounds.len();
        let mut spec = SearchSpec::new(self.bounds.clone(), Goal::Maximize)
            .with_grid(self.grid)
            .with_multistarts(self.multistarts)
            .with_seed(self.seed)
            .tied(self.ties.clone());
        spec.periodic = self.periodic.clone();
        spec.tolerance = 1e-6;
        spec.extra_starts = self.extra_start.iter().cloned().collect();
        spec.refine_bounds = Some(self.refine.clone());
        spec.max_evaluations = 400;
        let warm = search::optimize(&spec, f)?;
        let mut best = OuterMax {
            argmax: warm.argopt.clone(),
            value: warm.value,
            evaluations: warm.evaluations,
        };
        if !self.ties.is_empty() {
            let step = vec![0.1; d];
            let r = nelder_mead(
                |x| -f(x),
                &warm.argopt,
                &step,
                &self.refine,
                1e-6,
                self.evaluations_per_coordinate * d,
            )?;
            best.evaluations += r.evaluations;
            if -r.value > best.value {
                best.value = -r.value;
                best.argmax = r.argopt;
            }
        }
        if let Some(e) = failure.into_inner().expect("poisoned") {
            return Err(e);
        }
        Ok(best)
    }
}

/// Evenly spaced points on `[lo, hi]`, endpoints included.
pub(crate) fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![lo];
    }
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rejects_ragged_rows() {
        let mut t = Table::new("t", &["a", "b"]);
        assert!(t.push(vec![1.0.into()]).is_err());
        t.push(vec![1.0.into(), 2usize.into()]).unwrap();
        assert_eq!(t.column("b").unwrap(), vec![2.0]);
        assert!(t.column("c").is_err());
    }

    #[test]
    fn outer_search_finds_untied_optimum() {
        let outer = Outer::thetas(2, 0);
        let r = outer
            .maximize(|x| Ok(-(x[0] - 1.0).powi(2) - (x[1] - 2.0).powi(2)))
            .unwrap();
        assert!((r.argmax[0] - 1.0).abs() < 1e-3);
        assert!((r.argmax[1] - 2.0).abs() < 1e-3);
    }

    #[test]
    fn outer_search_propagates_errors() {
        let outer = Outer::thetas(1, 0);
        let r = outer.maximize(|_| Err(Error::Config("boom".into())));
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn linspace_includes_endpoints() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
    }
}
