//! The carrier–memory distribution protocol: circuit simulation, closed
//! forms, variants and effective-channel analyses.
//!
//! Labels are `C1..Cn` for carriers and `M1..Mn` for memories. The final
//! state keeps, for every index `i` in order, `M_i` when pair `i` interacted
//! (its carrier is measured and discarded) and `C_i` otherwise (its memory is
//! traced out).

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::channels::{
    apply_gate, apply_kraus, bits_of, measure_project, outcome_bra,
    GateKind, GateSpec, KrausChannel, MeasurementBasis, ZERO_PROBABILITY,
};
use crate::error::{Error, Result};
use crate::linalg::{self, pauli, CMatrix, C64, EIGENVALUE_FLOOR, ONE, ZERO};
use crate::qstate::{
    partial_trace, permute, tensor, trace_distance, DensityMatrix, NamedState, Split,
};

pub fn carrier_label(i: usize) -> String {
    format!("C{i}")
}

pub fn memory_label(i: usize) -> String {
    format!("M{i}")
}

fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Which carrier outcomes to post-select on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// One bit per measured carrier, in ascending carrier order; 0 selects |ψ⟩.
    Bits(Vec<u8>),
    All,
}

/// When carriers are measured relative to the gates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateOrder {
    /// Every gate, then every carrier measurement.
    #[default]
    GatesFirst,
    /// Gate i immediately followed by the measurement of C_i.
    Interleaved,
}

#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    n: usize,
    carriers: DensityMatrix,
    memories: DensityMatrix,
    interactions: Vec<usize>,
    gate: GateKind,
    carrier_basis: MeasurementBasis,
    outcome: Outcome,
    noise: Option<KrausChannel>,
    order: GateOrder,
}

impl ProtocolConfig {
    /// Classically correlated carriers, |+⟩ memories, controlled-Z on every
    /// pair, all carriers measured with the given (θ, φ) and outcome 0…0.
    pub fn standard(angles: &[(f64, f64)]) -> Result<Self> {
        let n = angles.len();
        let carriers = NamedState::ClassicalCarriers { n }.build()?;
        let memories = NamedState::PlusProduct { n }.build()?;
        Self::new(carriers, memories, (1..=n).collect(), angles)
    }

    /// `angles[k]` is the basis of the k-th interacting carrier (ascending).
    pub fn new(
        carriers: DensityMatrix,
        memories: DensityMatrix,
        interactions: Vec<usize>,
        angles: &[(f64, f64)],
    ) -> Result<Self> {
        let n = carriers.num_qubits();
        if n == 0 {
            return Err(Error::Config("at least one party is required".into()));
        }
        if memories.num_qubits() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} carriers but {} memories",
                memories.num_qubits()
            )));
        }
        let mut interactions = interactions;
        interactions.sort_unstable();
        if interactions.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("repeated index in the interaction set".into()));
        }
        if let Some(&bad) = interactions.iter().find(|&&i| i == 0 || i > n) {
            return Err(Error::out_of_range("interaction index", bad as f64, "1..=N"));
        }
        if angles.len() != interactions.len() {
            return Err(Error::Config(format!(
                "{} basis angles for {} measured carriers",
                angles.len(),
                interactions.len()
            )));
        }
        if let Some(&(t, p)) = angles.iter().find(|(t, p)| !t.is_finite() || !p.is_finite()) {
            return Err(Error::NonFinite(format!("carrier basis angles ({t}, {p})")));
        }
        // Any real angles name a valid basis; fold them onto θ ∈ [0, π], φ ∈ [0, 2π).
        let entries: Vec<(String, f64, f64)> = interactions
            .iter()
            .zip(angles)
            .map(|(&i, &(t, p))| (carrier_label(i), t, p))
            .collect();
        let carrier_basis = MeasurementBasis::canonical(&entries);
        let k = interactions.len();
        Ok(ProtocolConfig {
            n,
            carriers: carriers.relabel(&numbered("C", n))?,
            memories: memories.relabel(&numbered("M", n))?,
            interactions,
            gate: GateKind::ControlledZ,
            carrier_basis,
            outcome: Outcome::Bits(vec![0; k]),
            noise: None,
            order: GateOrder::GatesFirst,
        })
    }

    pub fn with_gate(mut self, gate: GateKind) -> Self {
        self.gate = gate;
        self
    }

    pub fn with_outcome(mut self, outcome: Outcome) -> Result<Self> {
        if let Outcome::Bits(b) = &outcome {
            if b.len() != self.interactions.len() || b.iter().any(|&x| x > 1) {
                return Err(Error::Config(format!(
                    "outcome must be {} bits",
                    self.interactions.len()
                )));
            }
        }
        self.outcome = outcome;
        Ok(self)
    }

    /// Noise applied to the initial memory state; its labels must be memory labels.
    pub fn with_noise(mut self, channel: KrausChannel) -> Result<Self> {
        for l in channel.labels() {
            self.memories.index_of(l)?;
        }
        self.noise = Some(channel);
        Ok(self)
    }

    pub fn with_order(mut self, order: GateOrder) -> Self {
        self.order = order;
        self
    }

    pub fn num_parties(&self) -> usize {
        self.n
    }

    pub fn interactions(&self) -> &[usize] {
        &self.interactions
    }

    pub fn carrier_basis(&self) -> &MeasurementBasis {
        &self.carrier_basis
    }

    pub fn outcome(&self) -> &Outcome {
        &self.outcome
    }

    pub fn gate(&self) -> GateKind {
        self.gate
    }

    pub fn carriers(&self) -> &DensityMatrix {
        &self.carriers
    }

    pub fn memories(&self) -> &DensityMatrix {
        &self.memories
    }

    /// Labels of the final state, in index order.
    pub fn retained_labels(&self) -> Vec<String> {
        (1..=self.n)
            .map(|i| {
                if self.interactions.contains(&i) {
                    memory_label(i)
                } else {
                    carrier_label(i)
                }
            })
            .collect()
    }

    fn initial_memories(&self) -> Result<DensityMatrix> {
        match &self.noise {
            Some(ch) => apply_kraus(&self.memories, ch),
            None => Ok(self.memories.clone()),
        }
    }

    fn outcome_list(&self) -> Vec<Vec<u8>> {
        match &self.outcome {
            Outcome::Bits(b) => vec![b.clone()],
            Outcome::All => {
                let k = self.interactions.len();
                (0..1usize << k).map(|i| bits_of(i, k)).collect()
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolOutcome {
    pub bits: Vec<u8>,
    pub final_state: DensityMatrix,
    pub probability: f64,
}

impl ProtocolOutcome {
    pub fn retained_labels(&self) -> &[String] {
        self.final_state.labels()
    }
}

fn single_bits(cfg: &ProtocolConfig) -> Result<Vec<u8>> {
    match &cfg.outcome {
        Outcome::Bits(b) => Ok(b.clone()),
        Outcome::All => Err(Error::Config(
            "outcome ALL yields several states; use the *_all_outcomes runner".into(),
        )),
    }
}

/// Dense density-matrix simulation of the circuit for one post-selected outcome.
pub fn run_circuit(cfg: &ProtocolConfig) -> Result<ProtocolOutcome> {
    let bits = single_bits(cfg)?;
    circuit_for_bits(cfg, &bits)
}

/// Dense simulation for every outcome with non-zero probability.
pub fn run_circuit_all_outcomes(cfg: &ProtocolConfig) -> Result<Vec<ProtocolOutcome>> {
    collect_outcomes(cfg, circuit_for_bits)
}

fn collect_outcomes(
    cfg: &ProtocolConfig,
    run: fn(&ProtocolConfig, &[u8]) -> Result<ProtocolOutcome>,
) -> Result<Vec<ProtocolOutcome>> {
    let mut out = Vec::new();
    for bits in cfg.outcome_list() {
        match run(cfg, &bits) {
            Ok(o) => out.push(o),
            Err(Error::ZeroProbability { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn gate_for(cfg: &ProtocolConfig, i: usize) -> GateSpec {
    GateSpec::controlled(cfg.gate, &carrier_label(i), &memory_label(i))
}

fn circuit_for_bits(cfg: &ProtocolConfig, bits: &[u8]) -> Result<ProtocolOutcome> {
    let mut state = tensor(&[cfg.carriers.clone(), cfg.initial_memories()?])?;
    let mut probability = 1.0;
    match cfg.order {
        GateOrder::GatesFirst => {
            for &i in &cfg.interactions {
                state = apply_gate(&state, &gate_for(cfg, i))?;
            }
            if !cfg.interactions.is_empty() {
                let (s, p) = measure_project(&state, &cfg.carrier_basis, bits)?;
                state = s;
                probability = p;
            }
        }
        GateOrder::Interleaved => {
            for (k, &i) in cfg.interactions.iter().enumerate() {
                state = apply_gate(&state, &gate_for(cfg, i))?;
                let label = carrier_label(i);
                let (t, p) = cfg.carrier_basis.angles_for(&label).unwrap_or((0.0, 0.0));
                let basis = MeasurementBasis::new(&[(label.as_str(), t, p)])?;
                let (s, p) = measure_project(&state, &basis, &bits[k..=k])?;
                state = s;
                probability *= p;
            }
        }
    }
    let retained = cfg.retained_labels();
    let reduced = partial_trace(&state, &retained)?;
    Ok(ProtocolOutcome {
        bits: bits.to_vec(),
        final_state: permute(&reduced, &retained)?,
        probability,
    })
}

/// Pure-branch simulation: both initial states are split into their
/// eigen-ensembles and each product branch is propagated as a vector.
/// Agrees with [`run_circuit`]; gates on different pairs commute with the
/// other pairs' measurements, so the ordering flag does not change the result.
pub fn run_fast(cfg: &ProtocolConfig) -> Result<ProtocolOutcome> {
    let bits = single_bits(cfg)?;
    FastRunner::new(cfg)?.run(&bits)
}

pub fn run_fast_all_outcomes(cfg: &ProtocolConfig) -> Result<Vec<ProtocolOutcome>> {
    let runner = FastRunner::new(cfg)?;
    let mut out = Vec::new();
    for bits in cfg.outcome_list() {
        match runner.run(&bits) {
            Ok(o) => out.push(o),
            Err(Error::ZeroProbability { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn ensemble(rho: &DensityMatrix) -> Result<Vec<(f64, Vec<C64>)>> {
    let eig = linalg::eigh(rho.matrix())?;
    Ok(eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > EIGENVALUE_FLOOR)
        .map(|(k, &l)| (l, eig.eigenvector(k)))
        .collect())
}

struct FastRunner<'a> {
    cfg: &'a ProtocolConfig,
    /// Post-gate branch vectors over C1..Cn M1..Mn with their weights.
    branches: Vec<(f64, Vec<C64>)>,
}

impl<'a> FastRunner<'a> {
    fn new(cfg: &'a ProtocolConfig) -> Result<Self> {
        let n = cfg.n;
        let carriers = ensemble(&cfg.carriers)?;
        let memories = ensemble(&cfg.initial_memories()?)?;
        let op = GateSpec::controlled(cfg.gate, "c", "m").operator();
        let mut branches = Vec::with_capacity(carriers.len() * memories.len());
        for (wc, c) in &carriers {
            for (wm, m) in &memories {
                let mut v = linalg::kron_vec(c, m);
                for &i in &cfg.interactions {
                    apply_pair(&mut v, 2 * n, i - 1, n + i - 1, &op);
                }
                branches.push((wc * wm, v));
            }
        }
        Ok(FastRunner { cfg, branches })
    }

    fn run(&self, bits: &[u8]) -> Result<ProtocolOutcome> {
        let cfg = self.cfg;
        let n = cfg.n;
        let total = 2 * n;
        let measured: Vec<usize> = cfg.interactions.iter().map(|&i| i - 1).collect();
        let rest: Vec<usize> = (0..total).filter(|p| !measured.contains(p)).collect();
        // contraction of measured carriers (ascending positions = interaction order)
        let contract = Split::new_ordered(total, &rest);
        let bra = cfg
            .interactions
            .iter()
            .zip(bits)
            .fold(vec![ONE], |acc, (&i, &b)| {
                let (t, p) = cfg
                    .carrier_basis
                    .angles_for(&carrier_label(i))
                    .unwrap_or((0.0, 0.0));
                linalg::kron_vec(&acc, &outcome_bra(t, p, b))
            });
        // positions of retained labels within `rest`
        let retained: Vec<usize> = (0..n)
            .map(|i| {
                let full = if cfg.interactions.contains(&(i + 1)) { n + i } else { i };
                rest.iter().position(|&p| p == full).expect("retained position")
            })
            .collect();
        let reduce = Split::new_ordered(rest.len(), &retained);
        let (kd, td) = (reduce.kept_dim(), reduce.traced_dim());
        let mut out = CMatrix::zeros(kd, kd);
        let mut psi = vec![ZERO; contract.kept_dim()];
        for (w, v) in &self.branches {
            for (k, slot) in psi.iter_mut().enumerate() {
                *slot = (0..contract.traced_dim())
                    .map(|t| bra[t] * v[contract.full(k, t)])
                    .sum();
            }
            for i in 0..kd {
                for j in 0..=i {
                    let mut acc = ZERO;
                    for t in 0..td {
                        acc += psi[reduce.full(i, t)] * psi[reduce.full(j, t)].conj();
                    }
                    out[(i, j)] += acc * *w;
                    if i != j {
                        out[(j, i)] += (acc * *w).conj();
                    }
                }
            }
        }
        let probability = out.trace().re;
        if probability < ZERO_PROBABILITY {
            return Err(Error::ZeroProbability { probability });
        }
        let state = DensityMatrix::new(&cfg.retained_labels(), out.scale_real(1.0 / probability))?;
        Ok(ProtocolOutcome {
            bits: bits.to_vec(),
            final_state: state,
            probability,
        })
    }
}

/// Applies a 4×4 operator (first index on `a`) to qubits `a`, `b` of a state vector.
fn apply_pair(v: &mut [C64], n: usize, a: usize, b: usize, op: &CMatrix) {
    let sa = 1usize << (n - 1 - a);
    let sb = 1usize << (n - 1 - b);
    for base in 0..v.len() {
        if base & sa != 0 || base & sb != 0 {
            continue;
        }
        let idx = [base, base | sb, base | sa, base | sa | sb];
        let x = idx.map(|i| v[i]);
        for (r, &i) in idx.iter().enumerate() {
            v[i] = (0..4).map(|c| op[(r, c)] * x[c]).sum();
        }
    }
}

/// Two-party memory state for outcome 00, assembled term by term:
/// ⊗ᵢ(cos²(θᵢ/2)|+⟩⟨+| + sin²(θᵢ/2)|−⟩⟨−|) + α(e^{iφ₊}|++⟩⟨−−| + e^{iφ₋}|+−⟩⟨−+| + h.c.),
/// α = sinθ₁ sinθ₂ / 4, φ± = φ₁ ± φ₂.
pub fn final_state_closed_form(theta1: f64, theta2: f64, phi1: f64, phi2: f64) -> DensityMatrix {
    let plus = [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)];
    let minus = [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)];
    let local = |t: f64| {
        let c2 = (t / 2.0).cos().powi(2);
        &CMatrix::outer(&plus, &plus).scale_real(c2)
            + &CMatrix::outer(&minus, &minus).scale_real(1.0 - c2)
    };
    let mut m = linalg::kron(&local(theta1), &local(theta2));
    let alpha = theta1.sin() * theta2.sin() / 4.0;
    let pp = linalg::kron_vec(&plus, &plus);
    let mm = linalg::kron_vec(&minus, &minus);
    let pm = linalg::kron_vec(&plus, &minus);
    let mp = linalg::kron_vec(&minus, &plus);
    let a = CMatrix::outer(&pp, &mm).scale(C64::from_polar(alpha, phi1 + phi2));
    let b = CMatrix::outer(&pm, &mp).scale(C64::from_polar(alpha, phi1 - phi2));
    m = &m + &(&(&a + &a.adjoint()) + &(&b + &b.adjoint()));
    DensityMatrix::from_parts_unchecked(vec!["M1".into(), "M2".into()], m.hermitian_part())
}

/// N-party memory state of the standard protocol for outcome 0…0. Carrier
/// branch |s…s⟩ leaves memory i in (cos(θᵢ/2)|+⟩ + s e^{−iφᵢ} sin(θᵢ/2)|−⟩)/√2,
/// and the two branches are mixed with equal weight.
pub fn final_state_closed_form_n(angles: &[(f64, f64)]) -> Result<DensityMatrix> {
    let n = angles.len();
    if n == 0 {
        return Err(Error::Config("at least one party is required".into()));
    }
    let h = FRAC_1_SQRT_2;
    let d = 1usize << n;
    let mut m = CMatrix::zeros(d, d);
    for s in [1.0, -1.0] {
        let v = angles.iter().fold(vec![ONE], |acc, &(t, p)| {
            let a = C64::new((t / 2.0).cos(), 0.0);
            let b = C64::from_polar(s * (t / 2.0).sin(), -p);
            // a|+⟩ + b|−⟩ in the computational basis
            linalg::kron_vec(&acc, &[(a + b) * h, (a - b) * h])
        });
        m = &m + &CMatrix::outer(&v, &v);
    }
    let tr = m.trace().re;
    if tr < ZERO_PROBABILITY {
        return Err(Error::ZeroProbability { probability: tr / 2.0 });
    }
    DensityMatrix::new(&numbered("M", n), m.scale_real(1.0 / tr).hermitian_part())
}

/// ½(|00⟩⟨00| + |11⟩⟨11|) on two carriers.
pub fn computational_carriers() -> DensityMatrix {
    DensityMatrix::from_parts_unchecked(
        numbered("C", 2),
        CMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]),
    )
}

/// Computational-basis rewrite of the protocol: only pair 2 interacts, via a
/// controlled-Hadamard onto M₂ = |0⟩, and C₂ is measured at (θ₂, φ₂).
/// Returns every outcome on the retained pair C₁M₂.
pub fn run_b92_variant(theta2: f64, phi2: f64) -> Result<Vec<ProtocolOutcome>> {
    let zero = DensityMatrix::from_parts_unchecked(
        numbered("M", 2),
        CMatrix::diag_real(&[1.0, 0.0, 0.0, 0.0]),
    );
    let cfg = ProtocolConfig::new(computational_carriers(), zero, vec![2], &[(theta2, phi2)])?
        .with_gate(GateKind::ControlledHadamard)
        .with_outcome(Outcome::All)?;
    run_fast_all_outcomes(&cfg)
}

/// ½(|0⟩⟨0|⊗|0⟩⟨0| + |1⟩⟨1|⊗|+⟩⟨+|): the two-state B92 resource on C₁M₂.
pub fn b92_resource_state() -> DensityMatrix {
    let plus = [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)];
    let zero = [ONE, ZERO];
    let one = [ZERO, ONE];
    let a = linalg::kron_vec(&zero, &zero);
    let b = linalg::kron_vec(&one, &plus);
    let m = &CMatrix::outer(&a, &a).scale_real(0.5) + &CMatrix::outer(&b, &b).scale_real(0.5);
    DensityMatrix::from_parts_unchecked(vec!["C1".into(), "M2".into()], m)
}

/// GHZ carriers on three parties; pairs 1 and 2 interact and C₃ is kept.
/// The returned state lives on M₁M₂C₃.
pub fn run_ghz_variant(angles: [(f64, f64); 2]) -> Result<ProtocolOutcome> {
    let cfg = ProtocolConfig::new(
        NamedState::Ghz3.build()?,
        NamedState::PlusProduct { n: 3 }.build()?,
        vec![1, 2],
        &angles,
    )?;
    run_fast(&cfg)
}

/// The map that the protocol induces on the memories, at fixed carriers,
/// carrier basis and outcome; every pair interacts.
#[derive(Clone, Debug)]
pub struct EffectiveChannel {
    carriers: DensityMatrix,
    angles: Vec<(f64, f64)>,
    bits: Vec<u8>,
    gate: GateKind,
}

impl EffectiveChannel {
    pub fn new(carriers: DensityMatrix, angles: &[(f64, f64)]) -> Result<Self> {
        if carriers.num_qubits() != angles.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} carriers for {} bases",
                carriers.num_qubits(),
                angles.len()
            )));
        }
        Ok(EffectiveChannel {
            bits: vec![0; angles.len()],
            carriers,
            angles: angles.to_vec(),
            gate: GateKind::ControlledZ,
        })
    }

    /// Classically correlated carriers measured at (θ₁, φ₁), (θ₂, φ₂).
    pub fn standard(theta1: f64, theta2: f64, phi1: f64, phi2: f64) -> Result<Self> {
        Self::new(
            NamedState::ClassicalCarriers { n: 2 }.build()?,
            &[(theta1, phi1), (theta2, phi2)],
        )
    }

    pub fn with_bits(mut self, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != self.angles.len() {
            return Err(Error::Config("one outcome bit per carrier".into()));
        }
        self.bits = bits;
        Ok(self)
    }

    /// Output memory state, or `None` when the outcome cannot occur.
    pub fn apply(&self, memories: &DensityMatrix) -> Result<Option<DensityMatrix>> {
        let n = self.angles.len();
        let cfg = ProtocolConfig::new(
            self.carriers.clone(),
            memories.clone(),
            (1..=n).collect(),
            &self.angles,
        )?
        .with_gate(self.gate)
        .with_outcome(Outcome::Bits(self.bits.clone()))?;
        match run_fast(&cfg) {
            Ok(o) => Ok(Some(o.final_state)),
            Err(Error::ZeroProbability { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// Tolerance on off-diagonal magnitudes and on distances to I/d.
pub const CLASSIFY_TOL: f64 = 1e-9;

fn pm_product_basis(n: usize) -> CMatrix {
    let h = CMatrix::from_real(2, 2, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2])
        .expect("2x2");
    (0..n).fold(CMatrix::identity(1), |acc, _| linalg::kron(&acc, &h))
}

/// True when every classical input |±…±⟩⟨±…±| is mapped to a state diagonal
/// in the {|±⟩}^⊗n basis.
pub fn classify_semiclassical(channel: &EffectiveChannel) -> Result<bool> {
    let n = channel.angles.len();
    let u = pm_product_basis(n);
    let labels = numbered("M", n);
    for k in 0..1usize << n {
        let mut diag = vec![0.0; 1 << n];
        diag[k] = 1.0;
        let input = DensityMatrix::new(&labels, &(&u * &CMatrix::diag_real(&diag)) * &u.adjoint())?;
        let Some(out) = channel.apply(&input)? else {
            continue;
        };
        let rotated = &(&u.adjoint() * out.matrix()) * &u;
        let d = rotated.rows();
        for r in 0..d {
            for c in 0..d {
                if r != c && rotated[(r, c)].norm() > CLASSIFY_TOL {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Output of the effective channel on I/4 and whether it equals I/4.
pub fn classify_unital(channel: &EffectiveChannel) -> Result<(bool, DensityMatrix)> {
    let n = channel.angles.len();
    let labels = numbered("M", n);
    let mixed = DensityMatrix::maximally_mixed(&labels)?;
    let out = channel
        .apply(&mixed)?
        .ok_or(Error::ZeroProbability { probability: 0.0 })?;
    let unital = out.matrix().max_abs_diff(mixed.matrix()) < CLASSIFY_TOL;
    Ok((unital, out))
}

/// I/4 + ¼ cosφ₁ cosφ₂ sinθ₁ sinθ₂ · diag(1, −1, −1, 1), the image of I/4.
pub fn unital_output_closed_form(theta1: f64, theta2: f64, phi1: f64, phi2: f64) -> DensityMatrix {
    let k = 0.25 * phi1.cos() * phi2.cos() * theta1.sin() * theta2.sin();
    let zz = linalg::kron(&pauli::z(), &pauli::z());
    let m = &CMatrix::identity(4).scale_real(0.25) + &zz.scale_real(k);
    DensityMatrix::from_parts_unchecked(numbered("M", 2), m)
}

#[derive(Clone, Debug)]
pub struct NonfactorizabilityReport {
    pub joint: DensityMatrix,
    pub product: DensityMatrix,
    pub trace_distance: f64,
}

/// Compares the joint memory output with the product of single-memory
/// channels, each driven by the corresponding marginal carrier.
pub fn nonfactorizability_check(
    carriers: &DensityMatrix,
    memories: &DensityMatrix,
    angles: [(f64, f64); 2],
) -> Result<NonfactorizabilityReport> {
    let joint = EffectiveChannel::new(carriers.clone(), &angles)?
        .apply(memories)?
        .ok_or(Error::ZeroProbability { probability: 0.0 })?;
    let c = carriers.clone().relabel(&["C1", "C2"])?;
    let m = memories.clone().relabel(&["M1", "M2"])?;
    let mut parts = Vec::with_capacity(2);
    for (j, label) in ["1", "2"].iter().enumerate() {
        let cj = partial_trace(&c, &[format!("C{label}")])?;
        let mj = partial_trace(&m, &[format!("M{label}")])?;
        let out = EffectiveChannel::new(cj, &angles[j..=j])?
            .apply(&mj)?
            .ok_or(Error::ZeroProbability { probability: 0.0 })?;
        parts.push(out.relabel(&[format!("M{label}")])?);
    }
    let product = tensor(&parts)?;
    let trace_distance = trace_distance(&joint, &product)?;
    Ok(NonfactorizabilityReport {
        joint,
        product,
        trace_distance,
    })
}

/// The state left on C₁M₂ when only pair 2 interacts (controlled-Z, M₂ = |+⟩).
pub fn single_memory_state(theta2: f64, phi2: f64) -> Result<DensityMatrix> {
    let cfg = ProtocolConfig::new(
        NamedState::ClassicalCarriers { n: 2 }.build()?,
        NamedState::PlusProduct { n: 2 }.build()?,
        vec![2],
        &[(theta2, phi2)],
    )?;
    Ok(run_fast(&cfg)?.final_state)
}

/// The optimal bipartite angle for the global discord.
pub const THETA_GQD_OPT: f64 = 0.9458;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::KrausChannel;
    use std::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_diff(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
        a.matrix().max_abs_diff(b.matrix())
    }

    #[test]
    fn orthogonal_carrier_bases_leave_classical_memories() {
        let o = run_circuit(&ProtocolConfig::standard(&[(PI / 2.0, 0.0); 2]).unwrap()).unwrap();
        let want = CMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]);
        assert!(o.final_state.matrix().max_abs_diff(&want) < 1e-12);
        assert_eq!(o.final_state.labels(), &["M1", "M2"]);
    }

    #[test]
    fn circuit_matches_closed_form_and_fast_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let a: Vec<(f64, f64)> = (0..2)
                .map(|_| (rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI)))
                .collect();
            let cfg = ProtocolConfig::standard(&a).unwrap();
            let dense = run_circuit(&cfg).unwrap();
            let fast = run_fast(&cfg).unwrap();
            let closed = final_state_closed_form(a[0].0, a[1].0, a[0].1, a[1].1);
            assert!(max_diff(&dense.final_state, &closed) < 1e-10);
            assert!(max_diff(&fast.final_state, &closed) < 1e-10);
            assert!((dense.probability - fast.probability).abs() < 1e-12);
        }
    }

    #[test]
    fn n_party_closed_form_matches_circuit() {
        let a = [(0.9, 0.3), (1.3, 2.0), (0.4, 5.0)];
        let cfg = ProtocolConfig::standard(&a).unwrap();
        let dense = run_circuit(&cfg).unwrap();
        let closed = final_state_closed_form_n(&a).unwrap();
        assert!(max_diff(&dense.final_state, &closed) < 1e-10);
    }

    #[test]
    fn partial_interactions_follow_retention_rule() {
        let cfg = ProtocolConfig::new(
            NamedState::ClassicalCarriers { n: 3 }.build().unwrap(),
            NamedState::PlusProduct { n: 3 }.build().unwrap(),
            vec![3, 1],
            &[(0.9, 0.3), (0.9, 0.3)],
        )
        .unwrap()
        .with_outcome(Outcome::Bits(vec![1, 0]))
        .unwrap();
        let dense = run_circuit(&cfg).unwrap();
        let fast = run_fast(&cfg).unwrap();
        assert_eq!(dense.final_state.labels(), &["M1", "C2", "M3"]);
        assert!(max_diff(&dense.final_state, &fast.final_state) < 1e-10);
        let inter = run_circuit(&cfg.clone().with_order(GateOrder::Interleaved)).unwrap();
        assert!(max_diff(&dense.final_state, &inter.final_state) < 1e-10);
        assert!((dense.probability - inter.probability).abs() < 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let cfg = ProtocolConfig::standard(&[(0.7, 1.0), (2.0, 0.1), (1.1, 4.0)])
            .unwrap()
            .with_outcome(Outcome::All)
            .unwrap();
        let total: f64 = run_fast_all_outcomes(&cfg).unwrap().iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-10);
        let total: f64 = run_circuit_all_outcomes(&cfg).unwrap().iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn noisy_runs_match_between_paths() {
        let ch = KrausChannel::correlated_dephasing(["M1", "M2"], 0.4, 0.7).unwrap();
        let cfg = ProtocolConfig::standard(&[(0.95, 2.0), (0.95, 2.4)])
            .unwrap()
            .with_noise(ch)
            .unwrap()
            .with_outcome(Outcome::Bits(vec![0, 1]))
            .unwrap();
        let a = run_circuit(&cfg).unwrap();
        let b = run_fast(&cfg).unwrap();
        assert!(max_diff(&a.final_state, &b.final_state) < 1e-10);
    }

    #[test]
    fn b92_outputs_are_outcome_independent() {
        for phi in [0.0, 1.0, 4.0] {
            let outs = run_b92_variant(PI / 2.0, phi).unwrap();
            assert_eq!(outs.len(), 2);
            for o in &outs {
                assert!((o.probability - 0.5).abs() < 1e-12);
                assert_eq!(o.final_state.labels(), &["C1", "M2"]);
                assert!(max_diff(&o.final_state, &b92_resource_state()) < 1e-12);
            }
        }
    }

    #[test]
    fn unital_output_matches_closed_form() {
        for (t1, t2, p1, p2) in [(0.9, 0.3, 0.2, 1.0), (PI / 4.0, PI / 4.0, 0.0, 0.0), (2.0, 1.0, 3.0, 5.0)]
        {
            let (_, out) = classify_unital(&EffectiveChannel::standard(t1, t2, p1, p2).unwrap()).unwrap();
            assert!(max_diff(&out, &unital_output_closed_form(t1, t2, p1, p2)) < 1e-12);
        }
        let (u, _) = classify_unital(&EffectiveChannel::standard(PI / 2.0, PI / 4.0, PI / 2.0, 0.0).unwrap()).unwrap();
        assert!(u);
        let (u, _) = classify_unital(&EffectiveChannel::standard(PI / 4.0, PI / 4.0, 0.0, 0.0).unwrap()).unwrap();
        assert!(!u);
    }

    #[test]
    fn semiclassical_only_on_computational_axes() {
        for t in [0.0, PI] {
            assert!(classify_semiclassical(&EffectiveChannel::standard(t, 1.1, 0.2, 0.7).unwrap()).unwrap());
            assert!(classify_semiclassical(&EffectiveChannel::standard(0.8, t, 0.0, 2.0).unwrap()).unwrap());
        }
        assert!(!classify_semiclassical(&EffectiveChannel::standard(0.9458, 0.9458, 0.0, 0.0).unwrap()).unwrap());
    }

    #[test]
    fn product_carriers_factorize() {
        let c = NamedState::UncorrelatedCarriers.build().unwrap();
        let m = NamedState::PlusProduct { n: 2 }.build().unwrap();
        let r = nonfactorizability_check(&c, &m, [(0.9458, 0.0), (0.9458, 0.0)]).unwrap();
        assert!(r.trace_distance < 1e-9);
        let c = NamedState::ClassicalCarriers { n: 2 }.build().unwrap();
        let r = nonfactorizability_check(&c, &m, [(0.9458, 0.0), (0.9458, 0.0)]).unwrap();
        assert!(r.trace_distance > 0.01);
    }

    #[test]
    fn config_validation() {
        let c = NamedState::ClassicalCarriers { n: 2 }.build().unwrap();
        let m = NamedState::PlusProduct { n: 2 }.build().unwrap();
        assert!(ProtocolConfig::new(c.clone(), m.clone(), vec![3], &[(0.1, 0.0)]).is_err());
        assert!(ProtocolConfig::new(c.clone(), m.clone(), vec![1, 1], &[(0.1, 0.0); 2]).is_err());
        assert!(ProtocolConfig::new(c.clone(), m.clone(), vec![1], &[]).is_err());
        assert!(ProtocolConfig::new(c.clone(), m.clone(), vec![1], &[(f64::NAN, 0.0)]).is_err());
        let folded = ProtocolConfig::new(c.clone(), m.clone(), vec![1], &[(2.0 * PI - 0.5, 0.2)]).unwrap();
        let direct = ProtocolConfig::new(c, m, vec![1], &[(0.5, 0.2 + PI)]).unwrap();
        let a = run_circuit(&folded).unwrap();
        let b = run_circuit(&direct).unwrap();
        assert!(max_diff(&a.final_state, &b.final_state) < 1e-12);
        let cfg = ProtocolConfig::standard(&[(0.0, 0.0); 2]).unwrap();
        assert!(cfg.with_outcome(Outcome::Bits(vec![0])).is_err());
    }

    #[test]
    fn impossible_outcome_reports_zero_probability() {
        // θ = 0 on carrier 1 with B92 style carriers and a |1⟩ post-selection is fine;
        // here the single-carrier projection onto an orthogonal state has probability 0.
        let carriers = DensityMatrix::from_parts_unchecked(
            vec!["C1".into()],
            CMatrix::diag_real(&[1.0, 0.0]),
        );
        let memories = NamedState::PlusProduct { n: 1 }.build().unwrap();
        let cfg = ProtocolConfig::new(carriers, memories, vec![1], &[(0.0, 0.0)])
            .unwrap()
            .with_outcome(Outcome::Bits(vec![1]))
            .unwrap();
        assert!(matches!(run_circuit(&cfg), Err(Error::ZeroProbability { .. })));
        assert!(matches!(run_fast(&cfg), Err(Error::ZeroProbability { .. })));
    }
}
