//! Effective-channel classification of the bipartite protocol, and the
//! protocol under fully correlated dephasing of the memories.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;

use crate::channels::KrausChannel;
use crate::correlations::discord_asym;
use crate::error::{Error, Result};
use crate::protocol::{
    classify_semiclassical, classify_unital, nonfactorizability_check, run_fast,
    run_fast_all_outcomes, single_memory_state, unital_output_closed_form, EffectiveChannel,
    Outcome, ProtocolConfig, THETA_GQD_OPT,
};
use crate::qstate::{fidelity, DensityMatrix, NamedState};
use crate::search::SweepSpec;

use super::{gqd_value, linspace, Outer, Settings, Table};

/// Below this, sin θ or cos φ products count as zero in the expected sets.
const ZERO_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationRow {
    pub angles: [f64; 4],
    pub semiclassical: bool,
    pub unital: bool,
    /// θ₁ or θ₂ ∈ {0, π}.
    pub expected_semiclassical: bool,
    /// cos φ₁ cos φ₂ sin θ₁ sin θ₂ = 0.
    pub expected_unital: bool,
    /// Largest entry difference between the image of I/4 and its closed form.
    pub closed_form_deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Appendix1 {
    /// One row per (θ₁, θ₂, φ₁, φ₂) on the classification lattice.
    pub rows: Vec<ClassificationRow>,
    /// (θ₁, θ₂, φ₁, φ₂) of the unital witness.
    pub witness_angles: [f64; 4],
    pub witness_unital: bool,
    /// D_{M1|M2} of the protocol output at the witness angles.
    pub witness_discord: f64,
    /// (θ₂, D_{C1|M2}, D_{M2|C1}) for the single-memory variant.
    pub single_memory: Vec<(f64, f64, f64)>,
    /// (case, trace distance between joint output and product of marginal channels).
    pub nonfactorizability: Vec<(String, f64)>,
}

impl Appendix1 {
    pub fn tables(&self) -> Result<Vec<Table>> {
        let mut c = Table::new(
            "appendix1_classification",
            &[
                "theta1", "theta2", "phi1", "phi2", "semiclassical", "unital",
                "expected_semiclassical", "expected_unital", "closed_form_deviation",
            ],
        );
        for r in &self.rows {
            let [t1, t2, p1, p2] = r.angles;
            c.push(vec![
                t1.into(),
                t2.into(),
                p1.into(),
                p2.into(),
                r.semiclassical.into(),
                r.unital.into(),
                r.expected_semiclassical.into(),
                r.expected_unital.into(),
                r.closed_form_deviation.into(),
            ])?;
        }
        let mut w = Table::new(
            "appendix1_witness",
            &["theta1", "theta2", "phi1", "phi2", "unital", "d_m1_given_m2"],
        );
        let [t1, t2, p1, p2] = self.witness_angles;
        w.push(vec![
            t1.into(),
            t2.into(),
            p1.into(),
            p2.into(),
            self.witness_unital.into(),
            self.witness_discord.into(),
        ])?;
        let mut s = Table::new("appendix1_single_memory", &["theta2", "d_c1_given_m2", "d_m2_given_c1"]);
        for &(t, a, b) in &self.single_memory {
            s.push(vec![t.into(), a.into(), b.into()])?;
        }
        let mut f = Table::new("appendix1_nonfactorizability", &["case", "trace_distance"]);
        for (case, d) in &self.nonfactorizability {
            f.push(vec![case.as_str().into(), (*d).into()])?;
        }
        Ok(vec![c, w, s, f])
    }

    /// Rows where a classifier disagrees with its expected set.
    pub fn mismatches(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.semiclassical != r.expected_semiclassical || r.unital != r.expected_unital)
            .count()
    }
}

/// Classification on the lattice θ ∈ {kπ/(m−1)}, φ ∈ {2kπ/m'} with
/// `theta_points` and `phi_points` values, plus the witness, the
/// single-memory variant and the factorisation checks.
pub fn appendix1(theta_points: usize, phi_points: usize) -> Result<Appendix1> {
    if theta_points < 2 || phi_points < 1 {
        return Err(Error::out_of_range("lattice points", theta_points.min(phi_points) as f64, "θ ≥ 2, φ ≥ 1"));
    }
    let thetas = linspace(0.0, PI, theta_points);
    let phis: Vec<f64> = (0..phi_points).map(|k| 2.0 * PI * k as f64 / phi_points as f64).collect();
    let mut lattice = Vec::new();
    for &t1 in &thetas {
        for &t2 in &thetas {
            for &p1 in &phis {
                for &p2 in &phis {
                    lattice.push([t1, t2, p1, p2]);
                }
            }
        }
    }
    let rows: Vec<ClassificationRow> = lattice
        .into_par_iter()
        .map(|[t1, t2, p1, p2]| {
            let ch = EffectiveChannel::standard(t1, t2, p1, p2)?;
            let (unital, image) = classify_unital(&ch)?;
            let closed = unital_output_closed_form(t1, t2, p1, p2);
            Ok(ClassificationRow {
                angles: [t1, t2, p1, p2],
                semiclassical: classify_semiclassical(&ch)?,
                unital,
                expected_semiclassical: t1.sin().abs() < ZERO_TOL || t2.sin().abs() < ZERO_TOL,
                expected_unital: (p1.cos() * p2.cos() * t1.sin() * t2.sin()).abs() < ZERO_TOL,
                closed_form_deviation: image.matrix().max_abs_diff(closed.matrix()),
            })
        })
        .collect::<Result<_>>()?;

    let witness_angles = [FRAC_PI_2, FRAC_PI_4, FRAC_PI_2, 0.0];
    let [t1, t2, p1, p2] = witness_angles;
    let (witness_unital, _) = classify_unital(&EffectiveChannel::standard(t1, t2, p1, p2)?)?;
    let out = run_fast(&ProtocolConfig::standard(&[(t1, p1), (t2, p2)])?)?.final_state;
    let witness_discord = discord_asym(&out, "M2", &["M1"])?.value;

    let mut single_memory = Vec::new();
    for t in [FRAC_PI_4, 3.0 * FRAC_PI_4] {
        let s = single_memory_state(t, 0.0)?;
        single_memory.push((
            t,
            discord_asym(&s, "M2", &["C1"])?.value,
            discord_asym(&s, "C1", &["M2"])?.value,
        ));
    }

    let plus = NamedState::PlusProduct { n: 2 }.build()?;
    let opt = [(THETA_GQD_OPT, 0.0), (THETA_GQD_OPT, 0.0)];
    let cases = [
        ("classical_carriers_optimal", NamedState::ClassicalCarriers { n: 2 }.build()?, opt),
        (
            "classical_carriers_discord_witness",
            NamedState::ClassicalCarriers { n: 2 }.build()?,
            [(FRAC_PI_2, 0.0), (FRAC_PI_4, 0.0)],
        ),
        ("anti_correlated_carriers_optimal", NamedState::AntiCorrelatedCarriers.build()?, opt),
        ("uncorrelated_carriers_optimal", NamedState::UncorrelatedCarriers.build()?, opt),
    ];
    let mut nonfactorizability = Vec::new();
    for (name, carriers, angles) in cases {
        let r = nonfactorizability_check(&carriers, &plus, angles)?;
        nonfactorizability.push((name.to_string(), r.trace_distance));
    }

    Ok(Appendix1 {
        rows,
        witness_angles,
        witness_unital,
        witness_discord,
        single_memory,
        nonfactorizability,
    })
}

/// Fully correlated dephasing strength μ used throughout the noise study.
pub const MU: f64 = 1.0;

/// Angles (θ, φ) on both carriers at which the p = 1 memories approach ρ₂.
pub const P1_ANGLES: (f64, f64) = (0.9553, 3.0 * FRAC_PI_4);

fn noisy_config(p: f64, angles: &[f64]) -> Result<ProtocolConfig> {
    let noise = KrausChannel::correlated_dephasing(["M1", "M2"], p, MU)?;
    ProtocolConfig::standard(&[(angles[0], angles[1]), (angles[2], angles[3])])?.with_noise(noise)
}

/// Memory state for outcome 00 after dephasing of strength `p`.
pub fn noisy_memories(p: f64, angles: &[f64]) -> Result<DensityMatrix> {
    Ok(run_fast(&noisy_config(p, angles)?)?.final_state)
}

/// Best GQD over all four carrier angles at dephasing strength `p`.
pub fn noisy_max_gqd(p: f64, settings: &Settings) -> Result<(f64, Vec<f64>)> {
    let fast = settings.outer_inner();
    let mut outer = Outer::angles(2, settings.seed()).with_grid(9);
    outer.extra_start = Some(vec![P1_ANGLES.0, P1_ANGLES.1, P1_ANGLES.0, P1_ANGLES.1]);
    let r = outer.maximize(|x| gqd_value(&noisy_memories(p, x)?, &fast))?;
    let value = gqd_value(&noisy_memories(p, &r.argmax)?, &settings.inner)?;
    Ok((value, r.argmax))
}

/// Carrier angles maximising the fidelity of the memories with `target`,
/// the fidelity reached and the GQD of that memory state.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetFit {
    pub fidelity: f64,
    pub gqd: f64,
    pub angles: Vec<f64>,
}

fn fit_target(p: f64, target: &DensityMatrix, options: &crate::correlations::GqdOptions, seed: u64) -> Result<TargetFit> {
    let outer = Outer::angles(2, seed).with_grid(9);
    let r = outer.maximize(|x| fidelity(&noisy_memories(p, x)?, target))?;
    let state = noisy_memories(p, &r.argmax)?;
    Ok(TargetFit {
        fidelity: r.value,
        gqd: gqd_value(&state, options)?,
        angles: r.argmax,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisePoint {
    pub p: f64,
    pub max_gqd: f64,
    pub argmax: Vec<f64>,
    /// GQD at the noiseless optimal bases.
    pub rho0_gqd: f64,
    pub rho1: TargetFit,
    pub rho2: TargetFit,
    /// Mixing x of τ(x) whose best-fidelity state has the most GQD.
    pub tau_x: f64,
    pub tau: TargetFit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeBranch {
    pub bits: Vec<u8>,
    pub probability: f64,
    pub gqd: f64,
    pub fidelity_rho2: f64,
    /// Fidelity with (1/3)|Ψ−⟩⟨Ψ−| + (1/6) I.
    pub fidelity_singlet_werner: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseOptions {
    pub step: f64,
    /// Grid of x values for the τ(x) search, before refinement.
    pub x_points: usize,
}

impl Default for NoiseOptions {
    fn default() -> Self {
        NoiseOptions {
            step: 0.01,
            x_points: 101,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Appendix2 {
    pub points: Vec<NoisePoint>,
    /// Max GQD at p = 0.
    pub noiseless_max: f64,
    /// Smallest p > 0 past which the noisy maximum exceeds the noiseless
    /// one, by linear interpolation on the sweep.
    pub crossover: Option<f64>,
    /// Every outcome at p = 1 and [`P1_ANGLES`].
    pub outcomes: Vec<OutcomeBranch>,
}

impl Appendix2 {
    pub fn tables(&self) -> Result<Vec<Table>> {
        let mut c = Table::new(
            "appendix2_curves",
            &[
                "p", "max_gqd", "rho0_gqd", "rho1_fidelity", "rho1_gqd", "rho2_fidelity",
                "rho2_gqd", "tau_x", "tau_fidelity", "tau_gqd",
            ],
        );
        for q in &self.points {
            c.push(vec![
                q.p.into(),
                q.max_gqd.into(),
                q.rho0_gqd.into(),
                q.rho1.fidelity.into(),
                q.rho1.gqd.into(),
                q.rho2.fidelity.into(),
                q.rho2.gqd.into(),
                q.tau_x.into(),
                q.tau.fidelity.into(),
                q.tau.gqd.into(),
            ])?;
        }
        let mut o = Table::new(
            "appendix2_outcomes",
            &["bits", "probability", "gqd", "fidelity_rho2", "fidelity_singlet_werner"],
        );
        for b in &self.outcomes {
            let bits: String = b.bits.iter().map(|v| char::from(b'0' + v)).collect();
            o.push(vec![
                bits.into(),
                b.probability.into(),
                b.gqd.into(),
                b.fidelity_rho2.into(),
                b.fidelity_singlet_werner.into(),
            ])?;
        }
        let mut s = Table::new("appendix2_summary", &["noiseless_max", "crossover"]);
        s.push(vec![
            self.noiseless_max.into(),
            self.crossover.unwrap_or(f64::NAN).into(),
        ])?;
        Ok(vec![c, o, s])
    }
}

/// Outcome branches at p = 1 with both carriers at [`P1_ANGLES`].
pub fn outcome_branches(settings: &Settings) -> Result<Vec<OutcomeBranch>> {
    let (t, f) = P1_ANGLES;
    let cfg = noisy_config(1.0, &[t, f, t, f])?.with_outcome(Outcome::All)?;
    let rho2 = NamedState::BellMixtureThird.build()?;
    let werner = NamedState::SingletWerner { y: 1.0 / 3.0 }.build()?;
    run_fast_all_outcomes(&cfg)?
        .into_iter()
        .map(|o| {
            Ok(OutcomeBranch {
                gqd: gqd_value(&o.final_state, &settings.inner)?,
                fidelity_rho2: fidelity(&o.final_state, &rho2)?,
                fidelity_singlet_werner: fidelity(&o.final_state, &werner)?,
                bits: o.bits,
                probability: o.probability,
            })
        })
        .collect()
}

/// Best τ(x) target at strength `p`: grid over x, then golden-section
/// refinement of the GQD of the best-fidelity state around the best x.
pub fn best_tau(p: f64, x_points: usize, settings: &Settings) -> Result<(f64, TargetFit)> {
    let fast = settings.outer_inner();
    let seed = settings.seed();
    let score = |x: f64| -> Result<TargetFit> {
        fit_target(p, &NamedState::Tau { x }.build()?, &fast, seed)
    };
    let xs = linspace(0.0, 1.0, x_points.max(2));
    let fits: Vec<TargetFit> = xs.par_iter().map(|&x| score(x)).collect::<Result<_>>()?;
    let (k, _) = fits
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, f)| if f.gqd > acc.1 { (i, f.gqd) } else { acc });
    let h = 1.0 / (xs.len() - 1) as f64;
    let (mut lo, mut hi) = ((xs[k] - h).max(0.0), (xs[k] + h).min(1.0));
    let (mut best_x, mut best_v) = (xs[k], fits[k].gqd);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..12 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        let (fa, fb) = (score(a)?.gqd, score(b)?.gqd);
        for (x, v) in [(a, fa), (b, fb)] {
            if v > best_v {
                best_x = x;
                best_v = v;
            }
        }
        if fa >= fb {
            hi = b;
        } else {
            lo = a;
        }
    }
    let fit = fit_target(p, &NamedState::Tau { x: best_x }.build()?, &settings.inner, seed)?;
    Ok((best_x, fit))
}

/// The full noise study on p ∈ [0, 1] with `options.step`.
pub fn appendix2(options: &NoiseOptions, settings: &Settings) -> Result<Appendix2> {
    let rho1 = NamedState::BellMixtureHalf.build()?;
    let rho2 = NamedState::BellMixtureThird.build()?;
    let opt = [THETA_GQD_OPT, 0.0, THETA_GQD_OPT, 0.0];
    let ps = SweepSpec::new("p", 0.0, 1.0, options.step).values()?;
    let mut points = Vec::with_capacity(ps.len());
    for p in ps {
        let (max_gqd, argmax) = noisy_max_gqd(p, settings)?;
        let (tau_x, tau) = best_tau(p, options.x_points, settings)?;
        points.push(NoisePoint {
            p,
            max_gqd,
            argmax,
            rho0_gqd: gqd_value(&noisy_memories(p, &opt)?, &settings.inner)?,
            rho1: fit_target(p, &rho1, &settings.inner, settings.seed())?,
            rho2: fit_target(p, &rho2, &settings.inner, settings.seed())?,
            tau_x,
            tau,
        });
    }
    let noiseless_max = points.first().map_or(0.0, |q| q.max_gqd);
    let curve: Vec<(f64, f64)> = points.iter().map(|q| (q.p, q.max_gqd)).collect();
    Ok(Appendix2 {
        crossover: crossover(&curve, noiseless_max),
        noiseless_max,
        outcomes: outcome_branches(settings)?,
        points,
    })
}

/// Strength in `[lo, hi]` at which the noisy maximum climbs back to the
/// noiseless one, by bisection to width `tol`. The maximum must lie below
/// the noiseless value at `lo` and above it at `hi`.
pub fn noiseless_crossover(lo: f64, hi: f64, tol: f64, settings: &Settings) -> Result<f64> {
    let level = noisy_max_gqd(0.0, settings)?.0;
    let excess = |p: f64| -> Result<f64> { Ok(noisy_max_gqd(p, settings)?.0 - level) };
    let (mut a, mut b) = (lo, hi);
    if excess(a)? >= 0.0 || excess(b)? <= 0.0 {
        return Err(Error::Config(format!("crossover is not bracketed by [{lo}, {hi}]")));
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        if excess(m)? > 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// First upward crossing of `level` after the curve has dipped below it.
pub fn crossover(curve: &[(f64, f64)], level: f64) -> Option<f64> {
    let mut dipped = false;
    for w in curve.windows(2) {
        let ((p0, v0), (p1, v1)) = (w[0], w[1]);
        if v0 < level {
            dipped = true;
        }
        if dipped && v0 <= level && v1 > level {
            return Some(p0 + (level - v0) * (p1 - p0) / (v1 - v0));
        }
    }
    None
}
