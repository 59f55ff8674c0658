//! Derivative-free optimisation over boxes of angles: a tensor grid scan
//! followed by bounded Nelder–Mead refinement from the best grid points.
//!
//! Every routine here is deterministic for a fixed [`SearchSpec::seed`]:
//! grid points and starts are evaluated (possibly in parallel) but always
//! reduced in index order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Goal {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug)]
pub struct SearchSpec {
    /// Per-coordinate closed box.
    pub bounds: Vec<(f64, f64)>,
    /// Box for Nelder–Mead refinement when it should differ from `bounds`
    /// (e.g. angles that may cross their nominal range).
    pub refine_bounds: Option<Vec<(f64, f64)>>,
    /// Grid points per free coordinate (each ≥ 2).
    pub grid: Vec<usize>,
    /// Periodic coordinates leave out the upper endpoint when gridded.
    pub periodic: Vec<bool>,
    /// Number of best grid points refined by Nelder–Mead.
    pub multistarts: usize,
    /// Extra uniformly random starts, drawn from `seed`.
    pub random_starts: usize,
    /// Additional caller-provided starts (full coordinates).
    pub extra_starts: Vec<Vec<f64>>,
    /// Simplex diameter at which refinement stops.
    pub tolerance: f64,
    pub max_evaluations: usize,
    pub goal: Goal,
    /// Groups of coordinates constrained to share one value.
    pub tie_groups: Vec<Vec<usize>>,
    pub seed: u64,
}

impl SearchSpec {
    pub fn new(bounds: Vec<(f64, f64)>, goal: Goal) -> Self {
        let d = bounds.len();
        SearchSpec {
            grid: vec![11; d],
            periodic: vec![false; d],
            refine_bounds: None,
            bounds,
            multistarts: 3,
            random_starts: 0,
            extra_starts: Vec::new(),
            tolerance: 1e-7,
            max_evaluations: 2000,
            goal,
            tie_groups: Vec::new(),
            seed: 0,
        }
    }

    pub fn dimension(&self) -> usize {
        self.bounds.len()
    }

    pub fn with_grid(mut self, per_coordinate: usize) -> Self {
        self.grid = vec![per_coordinate; self.bounds.len()];
        self
    }

    pub fn with_multistarts(mut self, k: usize) -> Self {
        self.multistarts = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn tied(mut self, groups: Vec<Vec<usize>>) -> Self {
        self.tie_groups = groups;
        self
    }

    fn validate(&self) -> Result<()> {
        let d = self.dimension();
        if d == 0 {
            return Err(Error::Config("search needs at least one coordinate".into()));
        }
        if self.grid.len() != d || self.periodic.len() != d {
            return Err(Error::Config("grid/periodic length must match bounds".into()));
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || hi < lo {
                return Err(Error::Config(format!("bad bounds for coordinate {i}")));
            }
        }
        if let Some(rb) = &self.refine_bounds {
            if rb.len() != d || rb.iter().any(|&(lo, hi)| lo.is_nan() || hi.is_nan() || hi < lo) {
                return Err(Error::Config("bad refinement bounds".into()));
            }
        }
        if self.grid.iter().any(|&g| g < 2) {
            return Err(Error::Config("grid resolution must be at least 2".into()));
        }
        let mut seen = vec![false; d];
        for g in &self.tie_groups {
            for &i in g {
                if i >= d || seen[i] {
                    return Err(Error::Config(format!("bad tie group index {i}")));
                }
                seen[i] = true;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct OptimizeResult {
    pub argopt: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Maps a reduced (free) coordinate vector onto the full one, honouring tie groups.
struct Reduction {
    /// For each free coordinate, the full coordinates it drives.
    members: Vec<Vec<usize>>,
    dim: usize,
}

impl Reduction {
    fn new(spec: &SearchSpec) -> Self {
        let d = spec.dimension();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut grouped = vec![false; d];
        for g in &spec.tie_groups {
            if g.is_empty() {
                continue;
            }
            for &i in g {
                grouped[i] = true;
            }
            members.push(g.clone());
        }
        for (i, done) in grouped.iter().enumerate() {
            if !done {
                members.push(vec![i]);
            }
        }
        members.sort_by_key(|m| m[0]);
        Reduction { members, dim: d }
    }

    fn free_dim(&self) -> usize {
        self.members.len()
    }

    fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.dim];
        for (v, m) in free.iter().zip(&self.members) {
            for &i in m {
                full[i] = *v;
            }
        }
        full
    }

    fn reduce(&self, full: &[f64]) -> Vec<f64> {
        self.members.iter().map(|m| full[m[0]]).collect()
    }

    fn lead(&self, free_index: usize) -> usize {
        self.members[free_index][0]
    }
}

fn grid_axis(lo: f64, hi: f64, n: usize, periodic: bool) -> Vec<f64> {
    let steps = if periodic { n } else { n - 1 };
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
        .collect()
}

/// Bounded Nelder–Mead. Points are clamped into the box.
pub fn nelder_mead<F>(
    f: F,
    start: &[f64],
    step: &[f64],
    bounds: &[(f64, f64)],
    tolerance: f64,
    max_evaluations: usize,
) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> f64,
{
    let d = start.len();
    let clamp = |x: &mut Vec<f64>| {
        for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
            *v = v.clamp(lo, hi);
        }
    };
    let evaluations = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| -> Result<f64> {
        evaluations.set(evaluations.get() + 1);
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!("objective returned {v} at {x:?}")))
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    let mut x0 = start.to_vec();
    clamp(&mut x0);
    simplex.push(x0.clone());
    for i in 0..d {
        let mut x = x0.clone();
        let (lo, hi) = bounds[i];
        x[i] = if x[i] + step[i] <= hi { x[i] + step[i] } else { x[i] - step[i] };
        x[i] = x[i].clamp(lo, hi);
        simplex.push(x);
    }
    let mut values: Vec<f64> = Vec::with_capacity(d + 1);
    for x in &simplex {
        values.push(eval(x)?);
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;
    loop {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..]
            .iter()
            .map(|x| {
                x.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diameter < tolerance {
            converged = true;
            break;
        }
        if evaluations.get() >= max_evaluations {
            break;
        }

        let mut centroid = vec![0.0; d];
        for x in &simplex[..d] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / d as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> = centroid
                .iter()
                .zip(&simplex[d])
                .map(|(c, w)| c + t * (c - w))
                .collect();
            clamp(&mut x);
            x
        };

        let xr = along(alpha);
        let fr = eval(&xr)?;
        if fr < values[0] {
            let xe = along(gamma);
            let fe = eval(&xe)?;
            if fe < fr {
                simplex[d] = xe;
                values[d] = fe;
            } else {
                simplex[d] = xr;
                values[d] = fr;
            }
            continue;
        }
        if fr < values[d - 1] {
            simplex[d] = xr;
            values[d] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[d] {
            let xc = along(rho);
            let fc = eval(&xc)?;
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc)?;
            (xc, fc)
        };
        if fc < values[d].min(fr) {
            simplex[d] = xc;
            values[d] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=d {
            let mut x: Vec<f64> = best
                .iter()
                .zip(&simplex[i])
                .map(|(b, v)| b + sigma * (v - b))
                .collect();
            clamp(&mut x);
            values[i] = eval(&x)?;
            simplex[i] = x;
        }
    }

    let best = (0..=d)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Ok(OptimizeResult {
        argopt: simplex[best].clone(),
        value: values[best],
        evaluations: evaluations.get(),
        converged,
    })
}

/// Grid scan plus multistart Nelder–Mead over `spec`.
pub fn optimize<F>(spec: &SearchSpec, objective: F) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    spec.validate()?;
    let red = Reduction::new(spec);
    let fd = red.free_dim();
    let sign = match spec.goal {
        Goal::Minimize => 1.0,
        Goal::Maximize => -1.0,
    };
    let free_bounds: Vec<(f64, f64)> = (0..fd).map(|i| spec.bounds[red.lead(i)]).collect();
    let refine_bounds: Vec<(f64, f64)> = match &spec.refine_bounds {
        Some(rb) => (0..fd).map(|i| rb[red.lead(i)]).collect(),
        None => free_bounds.clone(),
    };
    let axes: Vec<Vec<f64>> = (0..fd)
        .map(|i| {
            let lead = red.lead(i);
            let (lo, hi) = spec.bounds[lead];
            grid_axis(lo, hi, spec.grid[lead], spec.periodic[lead])
        })
        .collect();
    let total: usize = axes.iter().map(Vec::len).product();

    let point_at = |mut idx: usize| -> Vec<f64> {
        let mut x = vec![0.0; fd];
        for i in (0..fd).rev() {
            let n = axes[i].len();
            x[i] = axes[i][idx % n];
            idx /= n;
        }
        x
    };
    let scored: Vec<(usize, f64)> = (0..total)
        .into_par_iter()
        .map(|i| (i, sign * objective(&red.expand(&point_at(i)))))
        .collect();
    if let Some((_, v)) = scored.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite(format!("objective returned {v} on the grid")));
    }
    let mut ranked = scored.clone();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let mut starts: Vec<Vec<f64>> = ranked
        .iter()
        .take(spec.multistarts.max(1))
        .map(|&(i, _)| point_at(i))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..spec.random_starts {
        starts.push(
            free_bounds
                .iter()
                .map(|&(lo, hi)| if hi > lo { rng.gen_range(lo..=hi) } else { lo })
                .collect(),
        );
    }
    for s in &spec.extra_starts {
        if s.len() == spec.dimension() {
            starts.push(red.reduce(s));
        }
    }

    let step: Vec<f64> = (0..fd)
        .map(|i| {
            let (lo, hi) = free_bounds[i];
            let n = axes[i].len().max(2) as f64;
            ((hi - lo) / (n - 1.0)).max(1e-3)
        })
        .collect();
    let refined: Vec<Result<OptimizeResult>> = starts
        .par_iter()
        .map(|s| {
            nelder_mead(
                |x| sign * objective(&red.expand(x)),
                s,
                &step,
                &refine_bounds,
                spec.tolerance,
                spec.max_evaluations,
            )
        })
        .collect();

    let mut evaluations = total;
    let mut best_free = point_at(ranked[0].0);
    let mut best_value = ranked[0].1;
    let mut converged = false;
    for r in refined {
        let r = r?;
        evaluations += r.evaluations;
        if r.value < best_value {
            best_value = r.value;
            best_free = r.argopt;
            converged = r.converged;
        } else if r.value == best_value {
            converged |= r.converged;
        }
    }
    Ok(OptimizeResult {
        argopt: red.expand(&best_free),
        value: sign * best_value,
        evaluations,
        converged,
    })
}

/// Mean of `objective` over a uniform tensor grid of `samples` points per
/// perturbed coordinate, spanning `[c − width/2, c + width/2]` around `center`.
pub fn uniform_average<F>(
    objective: F,
    center: &[f64],
    perturbed: &[usize],
    width: f64,
    samples: usize,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if width < 0.0 || !width.is_finite() {
        return Err(Error::out_of_range("width", width, "[0, ∞)"));
    }
    if width == 0.0 || samples <= 1 || perturbed.is_empty() {
        return Ok(objective(center));
    }
    if perturbed.iter().any(|&i| i >= center.len()) {
        return Err(Error::Config("perturbed coordinate out of range".into()));
    }
    let offsets: Vec<f64> = (0..samples)
        .map(|i| -0.5 * width + width * i as f64 / (samples - 1) as f64)
        .collect();
    let k = perturbed.len();
    let total = samples.pow(k as u32);
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut x = center.to_vec();
            for &coord in perturbed.iter().rev() {
                x[coord] += offsets[idx % samples];
                idx /= samples;
            }
            objective(&x)
        })
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("objective in uniform average".into()));
    }
    Ok(values.iter().sum::<f64>() / total as f64)
}

/// One swept scalar parameter on an inclusive, evenly stepped range.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Whether each point re-runs the inner optimisation.
    pub reoptimize: bool,
}

impl SweepSpec {
    pub fn new(parameter: &str, start: f64, stop: f64, step: f64) -> Self {
        SweepSpec {
            parameter: parameter.to_string(),
            start,
            stop,
            step,
            reoptimize: false,
        }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || self.stop < self.start || !self.start.is_finite() {
            return Err(Error::Config(format!(
                "empty sweep range for `{}`",
                self.parameter
            )));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| {
                let v = self.start + self.step * i as f64;
                // Snap to a 12-digit grid so that 0.1 + 0.2 style drift never shows up in output.
                (v * 1e12).round() / 1e12
            })
            .collect())
    }
}

/// Evaluates `point` at every value of the sweep, in parallel, returning
/// results in sweep order.
pub fn run_sweep<T, F>(spec: &SweepSpec, point: F) -> Result<Vec<(f64, T)>>
where
    T: Send,
    F: Fn(f64, bool) -> Result<T> + Sync,
{
    let values = spec.values()?;
    values
        .into_par_iter()
        .map(|v| point(v, spec.reoptimize).map(|t| (v, t)))
        .collect()
}
