//! Entropic correlation quantifiers and their minimisations over local
//! rank-1 projective qubit measurements.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{outcome_bra, MeasurementBasis};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64, EIGENVALUE_FLOOR, ZERO};
use crate::qstate::{partial_trace, DensityMatrix, Split};
use crate::search::{self, Goal, SearchSpec};

/// Values in (−CLAMP_TOL, 0) are reported as 0.
pub const CLAMP_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct DiscordResult {
    pub value: f64,
    pub argmin_basis: MeasurementBasis,
    pub evaluations: usize,
    pub converged: bool,
}

/// Work spent on each inner measurement minimisation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerBudget {
    /// Reduced grid and fewer restarts, meant for use inside outer searches.
    Fast,
    #[default]
    Full,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GqdOptions {
    pub budget: InnerBudget,
    pub seed: u64,
}

impl GqdOptions {
    pub fn fast() -> Self {
        GqdOptions {
            budget: InnerBudget::Fast,
            seed: 0,
        }
    }
}

fn clamp_small_negative(v: f64) -> f64 {
    if v < 0.0 && v > -CLAMP_TOL {
        0.0
    } else {
        v
    }
}

fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    -eigenvalues.iter().map(|&l| linalg::xlog2x(l)).sum::<f64>()
}

fn shannon(p: &[f64]) -> f64 {
    -p.iter().map(|&x| linalg::xlog2x(x)).sum::<f64>()
}

fn matrix_entropy(m: &CMatrix) -> Result<f64> {
    Ok(spectrum_entropy(&linalg::eigvalsh(m)?).max(0.0))
}

/// von Neumann entropy in bits.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    matrix_entropy(rho.matrix())
}

fn check_partition(rho: &DensityMatrix, a: &[&str], b: &[&str]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidPartition("both sides must be non-empty".into()));
    }
    for l in a.iter().chain(b) {
        rho.index_of(l)?;
    }
    if let Some(l) = a.iter().find(|l| b.contains(l)) {
        return Err(Error::InvalidPartition(format!("label `{l}` on both sides")));
    }
    let mut all: Vec<&str> = a.iter().chain(b).copied().collect();
    all.sort_unstable();
    all.dedup();
    if all.len() != a.len() + b.len() {
        return Err(Error::InvalidPartition("repeated label".into()));
    }
    Ok(())
}

/// I(A:B) = S(ρ_A) + S(ρ_B) − S(ρ_AB). Labels outside A ∪ B are traced out.
pub fn mutual_information(rho: &DensityMatrix, a: &[&str], b: &[&str]) -> Result<f64> {
    check_partition(rho, a, b)?;
    let ab: Vec<&str> = a.iter().chain(b).copied().collect();
    let rho_ab = if ab.len() == rho.num_qubits() {
        rho.clone()
    } else {
        partial_trace(rho, &ab)?
    };
    let v = entropy(&partial_trace(&rho_ab, a)?)? + entropy(&partial_trace(&rho_ab, b)?)?
        - entropy(&rho_ab)?;
    Ok(clamp_small_negative(v))
}

/// Conditional-entropy objective for one measured qubit B: the state is split
/// into 2×2 blocks R_{kl} over B, each of dimension d_A.
struct ConditionalObjective {
    blocks: [[CMatrix; 2]; 2],
}

impl ConditionalObjective {
    fn new(rho_ab: &DensityMatrix, b_position: usize) -> Self {
        let n = rho_ab.num_qubits();
        let kept: Vec<usize> = (0..n).filter(|&p| p != b_position).collect();
        let split = Split::new_ordered(n, &kept);
        let d = split.kept_dim();
        let m = rho_ab.matrix();
        let block = |k: usize, l: usize| {
            CMatrix::from_fn(d, d, |i, j| m[(split.full(i, k), split.full(j, l))])
        };
        ConditionalObjective {
            blocks: [[block(0, 0), block(0, 1)], [block(1, 0), block(1, 1)]],
        }
    }

    /// Σ_j p_j S(ρ_{A|j}) for the basis at (θ, φ).
    fn eval(&self, theta: f64, phi: f64) -> f64 {
        let d = self.blocks[0][0].rows();
        let mut total = 0.0;
        for outcome in 0..2u8 {
            let bra = outcome_bra(theta, phi, outcome);
            let sigma = CMatrix::from_fn(d, d, |i, j| {
                let mut acc = ZERO;
                for k in 0..2 {
                    for l in 0..2 {
                        acc += bra[k] * bra[l].conj() * self.blocks[k][l][(i, j)];
                    }
                }
                acc
            })
            .hermitian_part();
            let p = sigma.trace().re;
            if p <= EIGENVALUE_FLOOR {
                continue;
            }
            let eig = linalg::eigvalsh(&sigma).unwrap_or_else(|_| vec![f64::NAN; d]);
            // p S(σ/p) = −Σ λ log λ + p log p
            total += spectrum_entropy(&eig) + linalg::xlog2x(p);
        }
        total
    }
}

/// D_{A|B}: discord with the single qubit `measured` (B) measured and
/// `unmeasured` (A) the rest of the pair. Other labels are traced out.
pub fn discord_asym(
    rho: &DensityMatrix,
    measured: &str,
    unmeasured: &[&str],
) -> Result<DiscordResult> {
    if unmeasured.contains(&measured) {
        return Err(Error::InvalidPartition(format!(
            "`{measured}` is both measured and unmeasured"
        )));
    }
    check_partition(rho, unmeasured, &[measured])?;
    let ab: Vec<&str> = unmeasured.iter().copied().chain([measured]).collect();
    let rho_ab = partial_trace(rho, &ab)?;
    let b_pos = rho_ab.index_of(measured)?;
    let s_b = entropy(&partial_trace(&rho_ab, &[measured])?)?;
    let s_ab = entropy(&rho_ab)?;
    let objective = ConditionalObjective::new(&rho_ab, b_pos);

    let mut spec = SearchSpec::new(vec![(0.0, PI), (0.0, 2.0 * PI)], Goal::Minimize);
    spec.grid = vec![25, 25];
    spec.periodic = vec![false, true];
    spec.refine_bounds = Some(refine_bounds(1));
    spec.multistarts = 5;
    let r = search::optimize(&spec, |x| objective.eval(x[0], x[1]))?;
    let value = (s_b - s_ab + r.value).max(0.0);
    Ok(DiscordResult {
        value: clamp_small_negative(value),
        argmin_basis: MeasurementBasis::canonical(&[(measured, r.argopt[0], r.argopt[1])]),
        evaluations: r.evaluations,
        converged: r.converged,
    })
}

/// S(ρ‖σ) in bits; `f64::INFINITY` when the support of ρ is not inside that of σ.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let eig = linalg::eigh(sigma.matrix())?;
    let mut cross = 0.0;
    for (k, &mu) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvector(k);
        let rv = rho.matrix().apply(&v);
        let weight: f64 = v.iter().zip(&rv).map(|(a, b)| (a.conj() * b).re).sum();
        if mu <= EIGENVALUE_FLOOR {
            if weight > 1e-10 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += weight * mu.log2();
    }
    let v = -entropy(rho)? - cross;
    Ok(clamp_small_negative(v).max(0.0))
}

/// Positions in `rho` of the labels in `basis`, in the state's own order, with
/// their angles. Every label of `rho` must appear exactly once.
fn angles_in_state_order(rho: &DensityMatrix, basis: &MeasurementBasis) -> Result<Vec<f64>> {
    if basis.len() != rho.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "{} bases for {} subsystems",
            basis.len(),
            rho.num_qubits()
        )));
    }
    let mut angles = Vec::with_capacity(2 * basis.len());
    for label in rho.labels() {
        let (t, p) = basis
            .angles_for(label)
            .ok_or_else(|| Error::UnknownLabel(label.clone()))?;
        angles.push(t);
        angles.push(p);
    }
    Ok(angles)
}

/// Fast GQD evaluator at fixed local bases. With ρ = Σ λ_i |v_i⟩⟨v_i| and
/// U = ⊗ u(θ_j, φ_j), the pinched diagonal is p(k) = Σ λ_i |(U† v_i)_k|².
pub struct GqdObjective {
    n: usize,
    ensemble: Vec<(f64, Vec<C64>)>,
    /// Σ_j S(ρ_j) − S(ρ)
    constant: f64,
}

impl GqdObjective {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let n = rho.num_qubits();
        let eig = linalg::eigh(rho.matrix())?;
        let s = spectrum_entropy(&eig.eigenvalues);
        let ensemble = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > EIGENVALUE_FLOOR)
            .map(|(k, &l)| (l, eig.eigenvector(k)))
            .collect();
        let mut local = 0.0;
        for label in rho.labels() {
            local += entropy(&partial_trace(rho, &[label.as_str()])?)?;
        }
        Ok(GqdObjective {
            n,
            ensemble,
            constant: local - s,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Angles are [θ₁, φ₁, …, θ_n, φ_n] in the state's label order.
    pub fn eval(&self, angles: &[f64]) -> f64 {
        let n = self.n;
        let dim = 1usize << n;
        let bras: Vec<[[C64; 2]; 2]> = (0..n)
            .map(|j| {
                let (t, p) = (angles[2 * j], angles[2 * j + 1]);
                [outcome_bra(t, p, 0), outcome_bra(t, p, 1)]
            })
            .collect();
        let mut probs = vec![0.0; dim];
        let mut w = vec![ZERO; dim];
        for (lambda, v) in &self.ensemble {
            w.copy_from_slice(v);
            for (j, bra) in bras.iter().enumerate() {
                let stride = 1usize << (n - 1 - j);
                for base in 0..dim {
                    if base & stride != 0 {
                        continue;
                    }
                    let (a, b) = (w[base], w[base | stride]);
                    w[base] = bra[0][0] * a + bra[0][1] * b;
                    w[base | stride] = bra[1][0] * a + bra[1][1] * b;
                }
            }
            for (p, z) in probs.iter_mut().zip(&w) {
                *p += lambda * z.norm_sqr();
            }
        }
        let mut marginal_entropy = 0.0;
        for j in 0..n {
            let stride = 1usize << (n - 1 - j);
            let p0: f64 = (0..dim).filter(|k| k & stride == 0).map(|k| probs[k]).sum();
            let total: f64 = probs.iter().sum();
            marginal_entropy += shannon(&[p0, total - p0]);
        }
        shannon(&probs) - marginal_entropy + self.constant
    }
}

/// Eq.-8 bracket at fixed local bases, via the pinching identity.
pub fn gqd(rho: &DensityMatrix, bases: &MeasurementBasis) -> Result<f64> {
    let angles = angles_in_state_order(rho, bases)?;
    let v = GqdObjective::new(rho)?.eval(&angles);
    if !v.is_finite() {
        return Err(Error::NonFinite("gqd".into()));
    }
    Ok(clamp_small_negative(v))
}

fn pinch(m: &CMatrix, n: usize, angles: &[f64]) -> CMatrix {
    let u = (0..n).fold(CMatrix::identity(1), |acc, j| {
        linalg::kron(&acc, &crate::channels::basis_unitary(angles[2 * j], angles[2 * j + 1]))
    });
    let rotated = &(&u.adjoint() * m) * &u;
    let diag: Vec<f64> = rotated.diagonal().iter().map(|z| z.re).collect();
    &(&u * &CMatrix::diag_real(&diag)) * &u.adjoint()
}

/// Same quantity as [`gqd`] computed directly from relative entropies,
/// S(ρ‖Φ(ρ)) − Σ_j S(ρ_j‖Φ_j(ρ_j)).
pub fn gqd_direct(rho: &DensityMatrix, bases: &MeasurementBasis) -> Result<f64> {
    let angles = angles_in_state_order(rho, bases)?;
    let n = rho.num_qubits();
    let whole = DensityMatrix::new(rho.labels(), pinch(rho.matrix(), n, &angles).hermitian_part())?;
    let mut v = relative_entropy(rho, &whole)?;
    for (j, label) in rho.labels().iter().enumerate() {
        let local = partial_trace(rho, &[label.as_str()])?;
        let pinched = DensityMatrix::new(
            &[label.as_str()],
            pinch(local.matrix(), 1, &angles[2 * j..2 * j + 2]).hermitian_part(),
        )?;
        v -= relative_entropy(&local, &pinched)?;
    }
    Ok(clamp_small_negative(v))
}

/// Largest tensor grid (in points) evaluated for the unrestricted search.
const TENSOR_GRID_CAP: usize = 600_000;

struct Plan {
    pair_grid: usize,
    pair_starts: usize,
    /// Seeded random starts for one or two qubits.
    pair_random_starts: usize,
    /// Per-axis grid of the tied-angle search for three or more qubits.
    tied_grid: usize,
    many_grid: usize,
    starts: usize,
    sweep_grid: usize,
    sweeps: usize,
    max_evaluations: usize,
    tensor_grid: bool,
    /// Seeded random starts: `per_qubit · n + extra`.
    random_starts_per_qubit: usize,
    random_starts_extra: usize,
}

impl Plan {
    fn for_budget(budget: InnerBudget) -> Self {
        match budget {
            InnerBudget::Full => Plan {
                pair_grid: 13,
                pair_starts: 8,
                pair_random_starts: 24,
                tied_grid: 25,
                many_grid: 9,
                starts: 5,
                sweep_grid: 13,
                sweeps: 2,
                max_evaluations: 4000,
                tensor_grid: true,
                random_starts_per_qubit: 8,
                random_starts_extra: 0,
            },
            InnerBudget::Fast => Plan {
                pair_grid: 7,
                pair_starts: 6,
                pair_random_starts: 6,
                tied_grid: 13,
                many_grid: 7,
                starts: 3,
                sweep_grid: 9,
                sweeps: 1,
                max_evaluations: 1500,
                tensor_grid: false,
                random_starts_per_qubit: 1,
                random_starts_extra: 1,
            },
        }
    }
}

fn angle_bounds(n: usize) -> Vec<(f64, f64)> {
    (0..n).flat_map(|_| [(0.0, PI), (0.0, 2.0 * PI)]).collect()
}

/// Refinement may cross the poles and the phase cut; any real angles name a
/// valid basis and the reported argmin is folded back.
fn refine_bounds(n: usize) -> Vec<(f64, f64)> {
    (0..n).flat_map(|_| [(-PI, 2.0 * PI), (-2.0 * PI, 4.0 * PI)]).collect()
}

/// Minimum of the Eq.-8 bracket over all local bases.
///
/// One or two qubits use a full tensor grid with multistart refinement from
/// the best grid points and from seeded random starts. Three
/// or more qubits combine a tied-angle (identical bases) search, product
/// Pauli-axis candidates, a tensor grid while it stays affordable, per-qubit
/// coordinate sweeps and a full 2n-angle Nelder–Mead from the best candidates
/// and from seeded random starts.
pub fn gqd_min(rho: &DensityMatrix, options: &GqdOptions) -> Result<DiscordResult> {
    let objective = GqdObjective::new(rho)?;
    let n = objective.num_qubits();
    let plan = Plan::for_budget(options.budget);
    let bounds = angle_bounds(n);
    let f = |x: &[f64]| objective.eval(x);

    let (best, value, evaluations, converged) = if n <= 2 {
        let mut spec = SearchSpec::new(bounds, Goal::Minimize);
        spec.grid = vec![plan.pair_grid; 2 * n];
        spec.periodic = (0..2 * n).map(|i| i % 2 == 1).collect();
        spec.refine_bounds = Some(refine_bounds(n));
        spec.multistarts = plan.pair_starts;
        spec.random_starts = plan.pair_random_starts;
        spec.max_evaluations = plan.max_evaluations;
        spec.seed = options.seed;
        let r = search::optimize(&spec, f)?;
        (r.argopt, r.value, r.evaluations, r.converged)
    } else {
        many_qubit_search(&objective, &plan, options.seed)?
    };

    let labels = rho.labels();
    let entries: Vec<(&str, f64, f64)> = (0..n)
        .map(|j| (labels[j].as_str(), best[2 * j], best[2 * j + 1]))
        .collect();
    Ok(DiscordResult {
        value: clamp_small_negative(value).max(0.0),
        argmin_basis: MeasurementBasis::canonical(&entries),
        evaluations,
        converged,
    })
}

fn many_qubit_search(
    objective: &GqdObjective,
    plan: &Plan,
    seed: u64,
) -> Result<(Vec<f64>, f64, usize, bool)> {
    let n = objective.num_qubits();
    let bounds = angle_bounds(n);
    let f = |x: &[f64]| objective.eval(x);
    let mut evaluations = 0usize;
    let mut candidates: Vec<(Vec<f64>, f64)> = Vec::new();

    // identical bases on every qubit
    let mut tied = SearchSpec::new(bounds.clone(), Goal::Minimize);
    tied.grid = vec![plan.tied_grid; 2 * n];
    tied.periodic = (0..2 * n).map(|i| i % 2 == 1).collect();
    tied.refine_bounds = Some(refine_bounds(n));
    tied.multistarts = plan.starts;
    tied.max_evaluations = plan.max_evaluations;
    tied.seed = seed;
    tied.tie_groups = vec![
        (0..n).map(|j| 2 * j).collect(),
        (0..n).map(|j| 2 * j + 1).collect(),
    ];
    let r = search::optimize(&tied, f)?;
    evaluations += r.evaluations;
    candidates.push((r.argopt, r.value));

    // product Pauli axes: Z, X, Y on each qubit
    let axes = [(0.0, 0.0), (PI / 2.0, 0.0), (PI / 2.0, PI / 2.0)];
    let pauli: Vec<(Vec<f64>, f64)> = (0..3usize.pow(n as u32))
        .into_par_iter()
        .map(|mut idx| {
            let mut x = Vec::with_capacity(2 * n);
            for _ in 0..n {
                let (t, p) = axes[idx % 3];
                x.push(t);
                x.push(p);
                idx /= 3;
            }
            let v = f(&x);
            (x, v)
        })
        .collect();
    evaluations += pauli.len();
    candidates.extend(pauli);

    let grid_points = (plan.many_grid * plan.many_grid).checked_pow(n as u32);
    if plan.tensor_grid && grid_points.is_some_and(|g| g <= TENSOR_GRID_CAP) {
        let mut spec = SearchSpec::new(bounds.clone(), Goal::Minimize);
        spec.grid = vec![plan.many_grid; 2 * n];
        spec.periodic = (0..2 * n).map(|i| i % 2 == 1).collect();
        spec.refine_bounds = Some(refine_bounds(n));
        spec.multistarts = plan.starts;
        spec.max_evaluations = plan.max_evaluations;
        spec.seed = seed;
        let r = search::optimize(&spec, f)?;
        evaluations += r.evaluations;
        candidates.push((r.argopt, r.value));
    }

    if candidates.iter().any(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite("gqd objective".into()));
    }
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
    candidates.dedup_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .all(|(x, y)| (x - y).abs() < 1e-9)
    });
    candidates.truncate(plan.starts);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..plan.random_starts_per_qubit * n + plan.random_starts_extra {
        let x: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
        let v = f(&x);
        candidates.push((x, v));
    }

    let step: Vec<f64> = bounds.iter().map(|(lo, hi)| (hi - lo) / 8.0).collect();
    let wide = refine_bounds(n);
    let refined: Vec<Result<(Vec<f64>, f64, usize, bool)>> = candidates
        .par_iter()
        .map(|(x0, v0)| {
            let (x, v, e) = coordinate_sweeps(objective, x0.clone(), *v0, plan);
            let r = search::nelder_mead(f, &x, &step, &wide, 1e-7, plan.max_evaluations)?;
            let (x, v) = if r.value < v { (r.argopt, r.value) } else { (x, v) };
            Ok((x, v, e + r.evaluations, r.converged))
        })
        .collect();

    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for r in refined {
        let (x, v, e, c) = r?;
        evaluations += e;
        if best.as_ref().map_or(true, |b| v < b.1) {
            best = Some((x, v, c));
        }
    }
    let (x, v, c) = best.expect("at least one candidate");
    Ok((x, v, evaluations, c))
}

/// Re-optimises one qubit's (θ, φ) on a small grid at a time, others held fixed.
fn coordinate_sweeps(
    objective: &GqdObjective,
    mut x: Vec<f64>,
    mut value: f64,
    plan: &Plan,
) -> (Vec<f64>, f64, usize) {
    let n = objective.num_qubits();
    let g = plan.sweep_grid;
    let mut evaluations = 0;
    for _ in 0..plan.sweeps {
        for j in 0..n {
            for a in 0..g {
                for b in 0..g {
                    let mut y = x.clone();
                    y[2 * j] = PI * a as f64 / (g - 1) as f64;
                    y[2 * j + 1] = 2.0 * PI * b as f64 / g as f64;
                    let v = objective.eval(&y);
                    evaluations += 1;
                    if v < value {
                        value = v;
                        x = y;
                    }
                }
            }
        }
    }
    (x, value, evaluations)
}
