//! Sensitivity of the bipartite protocol to the carrier measurement angles,
//! the initial carrier state and the initial memory state.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::protocol::{final_state_closed_form, run_fast, ProtocolConfig, THETA_GQD_OPT};
use crate::qstate::{DensityMatrix, NamedState};
use crate::search::{uniform_average, SweepSpec};

use super::{gqd_value, linspace, Outer, Settings, Table};

/// Optimal bipartite carrier bases, (θ, 0) on both carriers.
const OPTIMAL: [(f64, f64); 2] = [(THETA_GQD_OPT, 0.0), (THETA_GQD_OPT, 0.0)];

fn memory_state(carriers: DensityMatrix, memories: DensityMatrix, angles: &[(f64, f64)]) -> Result<DensityMatrix> {
    let cfg = ProtocolConfig::new(carriers, memories, vec![1, 2], angles)?;
    Ok(run_fast(&cfg)?.final_state)
}

fn plus_memories() -> Result<DensityMatrix> {
    NamedState::PlusProduct { n: 2 }.build()
}

/// Best GQD over all four carrier angles for fixed initial states.
fn reoptimized(carriers: &DensityMatrix, memories: &DensityMatrix, settings: &Settings) -> Result<f64> {
    let fast = settings.outer_inner();
    let state = |x: &[f64]| memory_state(carriers.clone(), memories.clone(), &[(x[0], x[1]), (x[2], x[3])]);
    let mut outer = Outer::angles(2, settings.seed()).with_grid(9);
    outer.extra_start = Some(vec![THETA_GQD_OPT, 0.0, THETA_GQD_OPT, 0.0]);
    let r = outer.maximize(|x| gqd_value(&state(x)?, &fast))?;
    let best = gqd_value(&state(&r.argmax)?, &settings.inner)?;
    // The optimal bases are a candidate too; never report less than them.
    let at_optimal = gqd_value(&memory_state(carriers.clone(), memories.clone(), &OPTIMAL)?, &settings.inner)?;
    Ok(best.max(at_optimal))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRobustness {
    pub width: f64,
    pub samples: usize,
    /// GQD at the window centre.
    pub peak: f64,
    pub average: f64,
}

impl MeasurementRobustness {
    /// Relative loss of the window average, in percent of the peak.
    pub fn reduction_percent(&self) -> f64 {
        100.0 * (1.0 - self.average / self.peak)
    }

    pub fn table(&self) -> Result<Table> {
        let mut t = Table::new(
            "robustness_measurement",
            &["width", "samples", "peak", "average", "reduction_percent"],
        );
        t.push(vec![
            self.width.into(),
            self.samples.into(),
            self.peak.into(),
            self.average.into(),
            self.reduction_percent().into(),
        ])?;
        Ok(t)
    }
}

/// GQD averaged over θ₁, θ₂ uniformly in a window of `width` around the
/// optimum, on a `samples` × `samples` grid.
pub fn measurement_robustness(width: f64, samples: usize, settings: &Settings) -> Result<MeasurementRobustness> {
    let g = |x: &[f64]| {
        gqd_value(&final_state_closed_form(x[0], x[1], 0.0, 0.0), &settings.inner).unwrap_or(f64::NAN)
    };
    let center = [THETA_GQD_OPT, THETA_GQD_OPT];
    Ok(MeasurementRobustness {
        width,
        samples,
        peak: g(&center),
        average: uniform_average(g, &center, &[0, 1], width, samples)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub x: f64,
    /// GQD at the optimal ideal-case bases.
    pub fixed: f64,
    /// GQD maximised over the carrier bases, when requested.
    pub reoptimized: Option<f64>,
}

fn sweep_table(name: &str, parameter: &str, points: &[SweepPoint]) -> Result<Table> {
    let mut t = Table::new(name, &[parameter, "gqd_fixed", "gqd_reoptimized"]);
    for p in points {
        t.push(vec![
            p.x.into(),
            p.fixed.into(),
            p.reoptimized.map_or(f64::NAN, |v| v).into(),
        ])?;
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CarrierOptions {
    /// Step of the fixed-basis λ and η sweeps.
    pub step: f64,
    /// Step of the re-optimised sweeps; `None` skips them.
    pub reoptimize_step: Option<f64>,
}

impl Default for CarrierOptions {
    fn default() -> Self {
        CarrierOptions {
            step: 0.01,
            reoptimize_step: Some(0.05),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CarrierRobustness {
    /// White-noise mixing (1−λ)ρ_C + λ I/4.
    pub lambda: Vec<SweepPoint>,
    /// Fixed-basis mean over λ ∈ [0, 0.1], step 0.005.
    pub lambda_average: f64,
    /// The mixture with the anti-correlated state, taken literally.
    pub sigma_literal: Vec<SweepPoint>,
    /// η|++⟩⟨++| + (1−η)|−−⟩⟨−−|.
    pub eta: Vec<SweepPoint>,
    pub anti_fixed: f64,
    pub anti_reoptimized: f64,
}

impl CarrierRobustness {
    pub fn tables(&self) -> Result<Vec<Table>> {
        let mut summary = Table::new(
            "robustness_carrier_summary",
            &["lambda_average", "anti_fixed", "anti_reoptimized"],
        );
        summary.push(vec![
            self.lambda_average.into(),
            self.anti_fixed.into(),
            self.anti_reoptimized.into(),
        ])?;
        Ok(vec![
            sweep_table("robustness_carrier_lambda", "lambda", &self.lambda)?,
            sweep_table("robustness_carrier_sigma_literal", "lambda", &self.sigma_literal)?,
            sweep_table("robustness_carrier_eta", "eta", &self.eta)?,
            summary,
        ])
    }
}

fn carrier_sweep<F>(
    parameter: &str,
    step: f64,
    reoptimize_step: Option<f64>,
    family: F,
    settings: &Settings,
) -> Result<Vec<SweepPoint>>
where
    F: Fn(f64) -> NamedState + Sync,
{
    let memories = plus_memories()?;
    let fixed = crate::search::run_sweep(&SweepSpec::new(parameter, 0.0, 1.0, step), |x, _| {
        let s = memory_state(family(x).build()?, memories.clone(), &OPTIMAL)?;
        gqd_value(&s, &settings.inner)
    })?;
    let mut points: Vec<SweepPoint> = fixed
        .into_iter()
        .map(|(x, fixed)| SweepPoint { x, fixed, reoptimized: None })
        .collect();
    if let Some(rs) = reoptimize_step {
        let mut spec = SweepSpec::new(parameter, 0.0, 1.0, rs);
        spec.reoptimize = true;
        let re = crate::search::run_sweep(&spec, |x, _| reoptimized(&family(x).build()?, &memories, settings))?;
        for (x, v) in re {
            if let Some(p) = points.iter_mut().find(|p| (p.x - x).abs() < 1e-9) {
                p.reoptimized = Some(v);
            } else {
                let s = memory_state(family(x).build()?, memories.clone(), &OPTIMAL)?;
                points.push(SweepPoint {
                    x,
                    fixed: gqd_value(&s, &settings.inner)?,
                    reoptimized: Some(v),
                });
            }
        }
        points.sort_by(|a, b| a.x.total_cmp(&b.x));
    }
    Ok(points)
}

/// λ and η sweeps, the λ-window average and the anti-correlated carriers.
pub fn carrier_robustness(options: &CarrierOptions, settings: &Settings) -> Result<CarrierRobustness> {
    let noisy = |l: f64| NamedState::NoisyCarriers { lambda: l };
    let lambda = carrier_sweep("lambda", options.step, options.reoptimize_step, noisy, settings)?;
    let literal = carrier_sweep(
        "lambda",
        options.step,
        None,
        |l| NamedState::MixedCarriers { lambda: l },
        settings,
    )?;
    let eta = carrier_sweep(
        "eta",
        options.step,
        options.reoptimize_step,
        |e| NamedState::BiasedCarriers { eta: e },
        settings,
    )?;
    let memories = plus_memories()?;
    let window = crate::search::run_sweep(&SweepSpec::new("lambda", 0.0, 0.1, 0.005), |l, _| {
        gqd_value(&memory_state(noisy(l).build()?, memories.clone(), &OPTIMAL)?, &settings.inner)
    })?;
    let lambda_average = window.iter().map(|(_, v)| v).sum::<f64>() / window.len() as f64;
    let anti = NamedState::AntiCorrelatedCarriers.build()?;
    Ok(CarrierRobustness {
        lambda,
        lambda_average,
        sigma_literal: literal,
        eta,
        anti_fixed: gqd_value(&memory_state(anti.clone(), memories.clone(), &OPTIMAL)?, &settings.inner)?,
        anti_reoptimized: reoptimized(&anti, &memories, settings)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemoryOptions {
    /// Grid points per axis of panel (a).
    pub pure_points: usize,
    /// Grid points per axis of the re-optimised panel (b).
    pub reoptimized_points: usize,
    /// Step of the (A₁, A₂) grid of panel (c).
    pub mixed_step: f64,
    /// Step of the re-optimised (A₁, A₂) grid; `None` skips it.
    pub mixed_reoptimize_step: Option<f64>,
}

impl Default for MemoryOptions {
    fn default() -> Self {
        MemoryOptions {
            pure_points: 61,
            reoptimized_points: 13,
            mixed_step: 0.01,
            mixed_reoptimize_step: Some(0.1),
        }
    }
}

/// A panel over two parameters: `values[i][j]` at (`xs[i]`, `ys[j]`).
#[derive(Clone, Debug, PartialEq)]
pub struct Panel {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Panel {
    fn evaluate<F>(xs: Vec<f64>, ys: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<f64> + Sync,
    {
        let ny = ys.len();
        let flat: Vec<f64> = (0..xs.len() * ny)
            .into_par_iter()
            .map(|k| f(xs[k / ny], ys[k % ny]))
            .collect::<Result<_>>()?;
        let values = flat.chunks(ny).map(<[f64]>::to_vec).collect();
        Ok(Panel { xs, ys, values })
    }

    fn table(&self, name: &str, x: &str, y: &str) -> Result<Table> {
        let mut t = Table::new(name, &[x, y, "gqd"]);
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                t.push(vec![self.xs[i].into(), self.ys[j].into(), (*v).into()])?;
            }
        }
        Ok(t)
    }

    /// Value at the grid point nearest to (x, y).
    pub fn at(&self, x: f64, y: f64) -> f64 {
        let near = |axis: &[f64], v: f64| {
            (0..axis.len())
                .min_by(|&a, &b| (axis[a] - v).abs().total_cmp(&(axis[b] - v).abs()))
                .unwrap_or(0)
        };
        self.values[near(&self.xs, x)][near(&self.ys, y)]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemoryRobustness {
    /// GQD against the M₂ Bloch angles (ϑ, φ) at the optimal bases.
    pub pure_fixed: Panel,
    /// The same with all four carrier angles re-optimised, on a coarser grid.
    pub pure_reoptimized: Panel,
    /// GQD against (A₁, A₂) at the optimal bases.
    pub mixed_fixed: Panel,
    pub mixed_reoptimized: Option<Panel>,
    /// Mean over ϑ ∈ [π/2 − π/20, π/2 + π/20] (21 points), φ = 0.
    pub window_average: f64,
}

impl MemoryRobustness {
    pub fn tables(&self) -> Result<Vec<Table>> {
        let mut out = vec![
            self.pure_fixed.table("robustness_memory_a", "vartheta", "varphi")?,
            self.pure_reoptimized.table("robustness_memory_b", "vartheta", "varphi")?,
            self.mixed_fixed.table("robustness_memory_c", "a1", "a2")?,
        ];
        if let Some(p) = &self.mixed_reoptimized {
            out.push(p.table("robustness_memory_c_reoptimized", "a1", "a2")?);
        }
        let mut s = Table::new("robustness_memory_summary", &["window_average"]);
        s.push(vec![self.window_average.into()])?;
        out.push(s);
        Ok(out)
    }
}

fn phase_axis(points: usize) -> Vec<f64> {
    (0..points).map(|k| 2.0 * PI * k as f64 / points as f64).collect()
}

fn step_axis(step: f64) -> Result<Vec<f64>> {
    SweepSpec::new("a", 0.0, 1.0, step).values()
}

pub fn memory_robustness(options: &MemoryOptions, settings: &Settings) -> Result<MemoryRobustness> {
    if options.pure_points < 2 || options.reoptimized_points < 2 {
        return Err(Error::out_of_range("points", options.pure_points.min(options.reoptimized_points) as f64, "≥ 2"));
    }
    let carriers = NamedState::ClassicalCarriers { n: 2 }.build()?;
    let bloch = |vt: f64, vp: f64| NamedState::BlochMemories { vartheta: vt, varphi: vp }.build();
    let mixed = |a1: f64, a2: f64| NamedState::MixedMemories { a1, a2 }.build();
    let fixed = |m: DensityMatrix| gqd_value(&memory_state(carriers.clone(), m, &OPTIMAL)?, &settings.inner);

    let pure_fixed = Panel::evaluate(
        linspace(0.0, PI, options.pure_points),
        phase_axis(options.pure_points),
        |vt, vp| fixed(bloch(vt, vp)?),
    )?;
    let pure_reoptimized = Panel::evaluate(
        linspace(0.0, PI, options.reoptimized_points),
        phase_axis(options.reoptimized_points),
        |vt, vp| reoptimized(&carriers, &bloch(vt, vp)?, settings),
    )?;
    let amplitudes = step_axis(options.mixed_step)?;
    let mixed_fixed = Panel::evaluate(amplitudes.clone(), amplitudes, |a1, a2| fixed(mixed(a1, a2)?))?;
    let mixed_reoptimized = match options.mixed_reoptimize_step {
        Some(s) => {
            let axis = step_axis(s)?;
            Some(Panel::evaluate(axis.clone(), axis, |a1, a2| {
                reoptimized(&carriers, &mixed(a1, a2)?, settings)
            })?)
        }
        None => None,
    };
    let window_average = uniform_average(
        |x: &[f64]| bloch(x[0], 0.0).and_then(|m| fixed(m)).unwrap_or(f64::NAN),
        &[PI / 2.0],
        &[0],
        PI / 10.0,
        21,
    )?;
    Ok(MemoryRobustness {
        pure_fixed,
        pure_reoptimized,
        mixed_fixed,
        mixed_reoptimized,
        window_average,
    })
}
