use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::{
    bloch_amplitudes, computational, default_labels, plus_minus, DensityMatrix, PureState,
};
use crate::error::{Error, Result};
use crate::linalg::{kron_vec, xlog2x, CMatrix, C64, ZERO};

/// Every state family the protocol and its benchmarks use.
#[derive(Clone, Debug, PartialEq)]
pub enum NamedState {
    /// ½(|+…+⟩⟨+…+| + |−…−⟩⟨−…−|) on `n` carriers.
    ClassicalCarriers { n: usize },
    /// (1−λ)·ClassicalCarriers{2} + (λ/2)(|+−⟩⟨+−| + |−+⟩⟨−+|).
    MixedCarriers { lambda: f64 },
    /// (1−λ)·ClassicalCarriers{2} + λ I/4, which equals MixedCarriers{λ/2}.
    NoisyCarriers { lambda: f64 },
    /// η|++⟩⟨++| + (1−η)|−−⟩⟨−−|.
    BiasedCarriers { eta: f64 },
    /// ½(|+−⟩⟨+−| + |−+⟩⟨−+|).
    AntiCorrelatedCarriers,
    /// ½(|+⟩⟨+| + |−⟩⟨−|) on each of two carriers, i.e. I/4.
    UncorrelatedCarriers,
    /// (|+++⟩ + |−−−⟩)/√2.
    Ghz3,
    /// |+⟩^⊗n.
    PlusProduct { n: usize },
    /// |+⟩ on the first memory, cos(ϑ/2)|0⟩ + e^{iφ} sin(ϑ/2)|1⟩ on the second.
    BlochMemories { vartheta: f64, varphi: f64 },
    /// ⊗_j (A_j|+⟩⟨+| + (1−A_j)|−⟩⟨−|).
    MixedMemories { a1: f64, a2: f64 },
    /// Symmetric single-excitation state on `n` qubits.
    W { n: usize },
    /// (1−ε)|W_n⟩⟨W_n| + ε I/2^n.
    WernerW { n: usize, eps: f64 },
    /// ½|Ψ+⟩⟨Ψ+| + ¼(|Φ+⟩⟨Φ+| + |Φ−⟩⟨Φ−|).
    BellMixtureHalf,
    /// ⅓(|Ψ+⟩⟨Ψ+| + |Φ+⟩⟨Φ+| + |Φ−⟩⟨Φ−|).
    BellMixtureThird,
    /// x|Ψ+⟩⟨Ψ+| + ((1−x)/2)(|Φ+⟩⟨Φ+| + |Φ−⟩⟨Φ−|).
    Tau { x: f64 },
    /// y|Ψ−⟩⟨Ψ−| + ((1−y)/4) I.
    SingletWerner { y: f64 },
    /// |Φ+⟩ = (|00⟩ + |11⟩)/√2.
    Bell,
    MaximallyMixed { n: usize },
}

/// Measure used to pair a state with a Werner-type state of "the same mixedness".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mixedness {
    Purity,
    Entropy,
}

fn unit_interval(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::out_of_range(name, v, "[0, 1]"))
    }
}

fn positive_n(n: usize) -> Result<()> {
    if (1..=10).contains(&n) {
        Ok(())
    } else {
        Err(Error::out_of_range("n", n as f64, "1..=10"))
    }
}

fn product_pm(signs: &[f64]) -> Vec<C64> {
    signs
        .iter()
        .fold(vec![C64::new(1.0, 0.0)], |acc, &s| kron_vec(&acc, &plus_minus(s)))
}

fn mixture(n: usize, terms: &[(f64, Vec<C64>)]) -> CMatrix {
    let d = 1usize << n;
    let mut m = CMatrix::zeros(d, d);
    for (w, v) in terms {
        if *w == 0.0 {
            continue;
        }
        m = &m + &CMatrix::outer(v, v).scale_real(*w);
    }
    m
}

fn bell(which: &str) -> Vec<C64> {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    match which {
        "phi+" => vec![h, ZERO, ZERO, h],
        "phi-" => vec![h, ZERO, ZERO, -h],
        "psi+" => vec![ZERO, h, h, ZERO],
        "psi-" => vec![ZERO, h, -h, ZERO],
        _ => unreachable!(),
    }
}

fn w_vector(n: usize) -> Vec<C64> {
    let d = 1usize << n;
    let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    (0..d)
        .map(|i| if i.count_ones() == 1 { amp } else { ZERO })
        .collect()
}

/// Spectrum of (1−ε)|W⟩⟨W| + ε I/d: one eigenvalue 1−ε+ε/d, the rest ε/d.
fn werner_w_spectrum(n: usize, eps: f64) -> (f64, f64, f64) {
    let d = (1usize << n) as f64;
    (1.0 - eps + eps / d, eps / d, d - 1.0)
}

impl NamedState {
    pub fn num_qubits(&self) -> usize {
        match self {
            NamedState::ClassicalCarriers { n }
            | NamedState::PlusProduct { n }
            | NamedState::W { n }
            | NamedState::WernerW { n, .. }
            | NamedState::MaximallyMixed { n } => *n,
            NamedState::Ghz3 => 3,
            _ => 2,
        }
    }

    /// Builds the state with labels `q1..qn`.
    pub fn build(&self) -> Result<DensityMatrix> {
        let n = self.num_qubits();
        let labels = default_labels(n);
        let matrix = match *self {
            NamedState::ClassicalCarriers { n } => {
                positive_n(n)?;
                mixture(n, &[(0.5, product_pm(&vec![1.0; n])), (0.5, product_pm(&vec![-1.0; n]))])
            }
            NamedState::MixedCarriers { lambda } => {
                unit_interval("lambda", lambda)?;
                let a = 0.5 * (1.0 - lambda);
                let b = 0.5 * lambda;
                mixture(
                    2,
                    &[
                        (a, product_pm(&[1.0, 1.0])),
                        (a, product_pm(&[-1.0, -1.0])),
                        (b, product_pm(&[1.0, -1.0])),
                        (b, product_pm(&[-1.0, 1.0])),
                    ],
                )
            }
            NamedState::NoisyCarriers { lambda } => {
                unit_interval("lambda", lambda)?;
                return NamedState::MixedCarriers { lambda: 0.5 * lambda }.build();
            }
            NamedState::BiasedCarriers { eta } => {
                unit_interval("eta", eta)?;
                mixture(
                    2,
                    &[
                        (eta, product_pm(&[1.0, 1.0])),
                        (1.0 - eta, product_pm(&[-1.0, -1.0])),
                    ],
                )
            }
            NamedState::AntiCorrelatedCarriers => mixture(
                2,
                &[(0.5, product_pm(&[1.0, -1.0])), (0.5, product_pm(&[-1.0, 1.0]))],
            ),
            NamedState::UncorrelatedCarriers => {
                let terms: Vec<(f64, Vec<C64>)> = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]
                    .iter()
                    .map(|s| (0.25, product_pm(s)))
                    .collect();
                mixture(2, &terms)
            }
            NamedState::Ghz3 => {
                let plus = product_pm(&[1.0; 3]);
                let minus = product_pm(&[-1.0; 3]);
                let v: Vec<C64> = plus
                    .iter()
                    .zip(&minus)
                    .map(|(a, b)| (a + b) * FRAC_1_SQRT_2)
                    .collect();
                mixture(3, &[(1.0, v)])
            }
            NamedState::PlusProduct { n } => {
                positive_n(n)?;
                mixture(n, &[(1.0, product_pm(&vec![1.0; n]))])
            }
            NamedState::BlochMemories { vartheta, varphi } => {
                if !(0.0..=PI).contains(&vartheta) {
                    return Err(Error::out_of_range("vartheta", vartheta, "[0, π]"));
                }
                if !(0.0..2.0 * PI).contains(&varphi) {
                    return Err(Error::out_of_range("varphi", varphi, "[0, 2π)"));
                }
                let v = kron_vec(&plus_minus(1.0), &bloch_amplitudes(vartheta, varphi));
                mixture(2, &[(1.0, v)])
            }
            NamedState::MixedMemories { a1, a2 } => {
                unit_interval("a1", a1)?;
                unit_interval("a2", a2)?;
                let mut terms = Vec::new();
                for (s1, w1) in [(1.0, a1), (-1.0, 1.0 - a1)] {
                    for (s2, w2) in [(1.0, a2), (-1.0, 1.0 - a2)] {
                        terms.push((w1 * w2, product_pm(&[s1, s2])));
                    }
                }
                mixture(2, &terms)
            }
            NamedState::W { n } => {
                positive_n(n)?;
                mixture(n, &[(1.0, w_vector(n))])
            }
            NamedState::WernerW { n, eps } => {
                positive_n(n)?;
                unit_interval("eps", eps)?;
                let d = 1usize << n;
                let w = mixture(n, &[(1.0 - eps, w_vector(n))]);
                &w + &CMatrix::identity(d).scale_real(eps / d as f64)
            }
            NamedState::BellMixtureHalf => mixture(
                2,
                &[(0.5, bell("psi+")), (0.25, bell("phi+")), (0.25, bell("phi-"))],
            ),
            NamedState::BellMixtureThird => {
                let t = 1.0 / 3.0;
                mixture(2, &[(t, bell("psi+")), (t, bell("phi+")), (t, bell("phi-"))])
            }
            NamedState::Tau { x } => {
                unit_interval("x", x)?;
                let r = 0.5 * (1.0 - x);
                mixture(2, &[(x, bell("psi+")), (r, bell("phi+")), (r, bell("phi-"))])
            }
            NamedState::SingletWerner { y } => {
                unit_interval("y", y)?;
                let s = mixture(2, &[(y, bell("psi-"))]);
                &s + &CMatrix::identity(4).scale_real(0.25 * (1.0 - y))
            }
            NamedState::Bell => mixture(2, &[(1.0, bell("phi+"))]),
            NamedState::MaximallyMixed { n } => {
                positive_n(n)?;
                let d = 1usize << n;
                CMatrix::identity(d).scale_real(1.0 / d as f64)
            }
        };
        DensityMatrix::new(&labels, matrix)
    }

    /// Parses a family name plus numeric parameters (as given on the command line).
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |key: &str| -> Result<f64> {
            params
                .get(key)
                .copied()
                .ok_or_else(|| Error::Config(format!("state `{name}` needs parameter `{key}`")))
        };
        let get_n = |default: Option<usize>| -> Result<usize> {
            match params.get("n") {
                Some(&v) if v >= 1.0 && v.fract() == 0.0 => Ok(v as usize),
                Some(&v) => Err(Error::out_of_range("n", v, "positive integers")),
                None => default.ok_or_else(|| Error::Config(format!("state `{name}` needs `n`"))),
            }
        };
        Ok(match name {
            "carriers" | "classical" => NamedState::ClassicalCarriers { n: get_n(Some(2))? },
            "sigma" => NamedState::MixedCarriers {
                lambda: get("lambda")?,
            },
            "sigma-noise" => NamedState::NoisyCarriers {
                lambda: get("lambda")?,
            },
            "eta" => NamedState::BiasedCarriers { eta: get("eta")? },
            "anti" => NamedState::AntiCorrelatedCarriers,
            "uncorrelated" => NamedState::UncorrelatedCarriers,
            "ghz3" => NamedState::Ghz3,
            "plus" => NamedState::PlusProduct { n: get_n(Some(2))? },
            "bloch-memories" => NamedState::BlochMemories {
                vartheta: get("vartheta")?,
                varphi: params.get("varphi").copied().unwrap_or(0.0),
            },
            "mixed-memories" => NamedState::MixedMemories {
                a1: get("a1")?,
                a2: get("a2")?,
            },
            "w" => NamedState::W { n: get_n(None)? },
            "werner" => NamedState::WernerW {
                n: get_n(None)?,
                eps: get("eps")?,
            },
            "rho1" => NamedState::BellMixtureHalf,
            "rho2" => NamedState::BellMixtureThird,
            "tau" => NamedState::Tau { x: get("x")? },
            "singlet-werner" => NamedState::SingletWerner { y: get("y")? },
            "bell" => NamedState::Bell,
            "mixed" => NamedState::MaximallyMixed { n: get_n(None)? },
            other => return Err(Error::UnknownFamily(other.to_string())),
        })
    }

    pub fn family_names() -> &'static [&'static str] {
        &[
            "carriers",
            "sigma",
            "sigma-noise",
            "eta",
            "anti",
            "uncorrelated",
            "ghz3",
            "plus",
            "bloch-memories",
            "mixed-memories",
            "w",
            "werner",
            "rho1",
            "rho2",
            "tau",
            "singlet-werner",
            "bell",
            "mixed",
        ]
    }
}

/// Single-qubit |0⟩, |1⟩, |+⟩ or |−⟩ by name ("0", "1", "+", "-").
pub fn basis_ket(kind: &str) -> Result<PureState> {
    let amps = match kind {
        "0" => computational(0).to_vec(),
        "1" => computational(1).to_vec(),
        "+" => plus_minus(1.0).to_vec(),
        "-" => plus_minus(-1.0).to_vec(),
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    PureState::new(&["q"], amps)
}

/// Finds ε such that the Werner-type state (1−ε)|W_n⟩⟨W_n| + ε I/2^n has the
/// same purity (or entropy) as `target`, by bisection.
pub fn match_werner_mixedness(n: usize, target: &DensityMatrix, measure: Mixedness) -> Result<f64> {
    positive_n(n)?;
    if target.num_qubits() != n {
        return Err(Error::DimensionMismatch(format!(
            "target has {} qubits, expected {n}",
            target.num_qubits()
        )));
    }
    // Both profiles are monotone in ε: purity decreasing, entropy increasing.
    let profile = |eps: f64| -> f64 {
        let (top, rest, mult) = werner_w_spectrum(n, eps);
        match measure {
            Mixedness::Purity => -(top * top + mult * rest * rest),
            Mixedness::Entropy => -(xlog2x(top) + mult * xlog2x(rest)),
        }
    };
    let goal = match measure {
        Mixedness::Purity => -super::purity(target),
        Mixedness::Entropy => {
            -target
                .eigenvalues()?
                .into_iter()
                .map(|l| xlog2x(l.max(0.0)))
                .sum::<f64>()
        }
    };
    let (lo_val, hi_val) = (profile(0.0), profile(1.0));
    if goal <= lo_val {
        return Ok(0.0);
    }
    if goal >= hi_val {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if profile(mid) < goal {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
