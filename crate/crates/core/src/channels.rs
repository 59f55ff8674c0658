//! Gates, Kraus channels and rank-1 projective measurements acting on named
//! subsystems of a [`DensityMatrix`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{pauli, CMatrix, C64, ONE, ZERO};
use crate::qstate::{bloch_amplitudes, bloch_orthogonal_amplitudes, DensityMatrix, Split};

/// Post-selected outcomes with probability below this are rejected.
pub const ZERO_PROBABILITY: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;
const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub enum GateSpec {
    ControlledZ { control: String, target: String },
    ControlledHadamard { control: String, target: String },
    Local { target: String, matrix: CMatrix },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateKind {
    ControlledZ,
    ControlledHadamard,
}

impl GateSpec {
    pub fn controlled(kind: GateKind, control: &str, target: &str) -> Self {
        match kind {
            GateKind::ControlledZ => GateSpec::ControlledZ {
                control: control.into(),
                target: target.into(),
            },
            GateKind::ControlledHadamard => GateSpec::ControlledHadamard {
                control: control.into(),
                target: target.into(),
            },
        }
    }

    pub fn local(target: &str, matrix: CMatrix) -> Result<Self> {
        if matrix.rows() != 2 || matrix.cols() != 2 {
            return Err(Error::DimensionMismatch("local gate must be 2x2".into()));
        }
        let residual = (&(&matrix.adjoint() * &matrix) - &CMatrix::identity(2)).frobenius_norm();
        if residual > UNITARY_TOL {
            return Err(Error::InvalidState(format!(
                "local gate is not unitary (residual {residual:.3e})"
            )));
        }
        Ok(GateSpec::Local {
            target: target.into(),
            matrix,
        })
    }

    fn labels(&self) -> Vec<&str> {
        match self {
            GateSpec::ControlledZ { control, target }
            | GateSpec::ControlledHadamard { control, target } => vec![control, target],
            GateSpec::Local { target, .. } => vec![target],
        }
    }

    /// The gate as a matrix on its own labels (control first).
    pub fn operator(&self) -> CMatrix {
        match self {
            GateSpec::ControlledZ { .. } => CMatrix::diag_real(&[1.0, 1.0, 1.0, -1.0]),
            GateSpec::ControlledHadamard { .. } => controlled(&pauli::hadamard()),
            GateSpec::Local { matrix, .. } => matrix.clone(),
        }
    }
}

fn controlled(u: &CMatrix) -> CMatrix {
    CMatrix::from_fn(4, 4, |r, c| match (r >> 1, c >> 1) {
        (0, 0) => {
            if r == c {
                ONE
            } else {
                ZERO
            }
        }
        (1, 1) => u[(r & 1, c & 1)],
        _ => ZERO,
    })
}

fn positions_of(rho: &DensityMatrix, labels: &[&str]) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(labels.len());
    for l in labels {
        let p = rho.index_of(l)?;
        if out.contains(&p) {
            return Err(Error::LabelCollision((*l).to_string()));
        }
        out.push(p);
    }
    Ok(out)
}

/// (op ⊗ I) · m, with `op` acting on qubit `positions` (in op's own order).
fn left_local(m: &CMatrix, n: usize, positions: &[usize], op: &CMatrix) -> CMatrix {
    let split = Split::new_ordered(n, positions);
    let (kd, td) = (split.kept_dim(), split.traced_dim());
    let dim = m.cols();
    let mut out = CMatrix::zeros(m.rows(), dim);
    for t in 0..td {
        for a in 0..kd {
            let row_out = split.full(a, t);
            for b in 0..kd {
                let k = op[(a, b)];
                if k == ZERO {
                    continue;
                }
                let row_in = split.full(b, t);
                for c in 0..dim {
                    out[(row_out, c)] += k * m[(row_in, c)];
                }
            }
        }
    }
    out
}

/// m · (op ⊗ I)†.
fn right_local_adjoint(m: &CMatrix, n: usize, positions: &[usize], op: &CMatrix) -> CMatrix {
    let split = Split::new_ordered(n, positions);
    let (kd, td) = (split.kept_dim(), split.traced_dim());
    let rows = m.rows();
    let mut out = CMatrix::zeros(rows, m.cols());
    for t in 0..td {
        for a in 0..kd {
            let col_out = split.full(a, t);
            for b in 0..kd {
                let k = op[(a, b)].conj();
                if k == ZERO {
                    continue;
                }
                let col_in = split.full(b, t);
                for r in 0..rows {
                    out[(r, col_out)] += m[(r, col_in)] * k;
                }
            }
        }
    }
    out
}

/// K ρ K† for an operator on the given labels.
fn conjugate(rho: &DensityMatrix, labels: &[&str], op: &CMatrix) -> Result<CMatrix> {
    let positions = positions_of(rho, labels)?;
    let n = rho.num_qubits();
    let left = left_local(rho.matrix(), n, &positions, op);
    Ok(right_local_adjoint(&left, n, &positions, op))
}

pub fn apply_gate(rho: &DensityMatrix, gate: &GateSpec) -> Result<DensityMatrix> {
    let labels = gate.labels();
    if labels.len() == 2 && labels[0] == labels[1] {
        return Err(Error::Config(format!(
            "control and target are both `{}`",
            labels[0]
        )));
    }
    let out = conjugate(rho, &labels, &gate.operator())?;
    Ok(DensityMatrix::from_parts_unchecked(
        rho.labels().to_vec(),
        out.hermitian_part(),
    ))
}

#[derive(Clone, Debug)]
pub struct KrausChannel {
    labels: Vec<String>,
    operators: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new<S: AsRef<str>>(labels: &[S], operators: Vec<CMatrix>) -> Result<Self> {
        let d = 1usize << labels.len();
        if operators.is_empty() {
            return Err(Error::CompletenessViolation { residual: 1.0 });
        }
        for k in &operators {
            if k.rows() != d || k.cols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator must be {d}x{d}"
                )));
            }
        }
        let channel = KrausChannel {
            labels: labels.iter().map(|s| s.as_ref().to_string()).collect(),
            operators,
        };
        let residual = channel.completeness_residual();
        if residual > COMPLETENESS_TOL {
            return Err(Error::CompletenessViolation { residual });
        }
        Ok(channel)
    }

    /// Two-qubit dephasing with noise strength `p` and correlation `mu`.
    ///
    /// The single-qubit Z terms carry weight p(1−μ)/4 each, which keeps the
    /// set complete for every μ; at μ = 1 only the I and Z⊗Z terms remain.
    pub fn correlated_dephasing(labels: [&str; 2], p: f64, mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::out_of_range("p", p, "[0, 1]"));
        }
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::out_of_range("mu", mu, "[0, 1]"));
        }
        let i = pauli::identity();
        let z = pauli::z();
        let k1 = crate::linalg::kron(&i, &i).scale_real((1.0 - 0.5 * p).sqrt());
        let k2 = crate::linalg::kron(&z, &i).scale_real((0.25 * p * (1.0 - mu)).sqrt());
        let k3 = crate::linalg::kron(&i, &z).scale_real((0.25 * p * (1.0 - mu)).sqrt());
        let k4 = crate::linalg::kron(&z, &z).scale_real((0.5 * p * mu).sqrt());
        Self::new(&labels, vec![k1, k2, k3, k4])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    /// ‖Σ K†K − I‖_F.
    pub fn completeness_residual(&self) -> f64 {
        let d = 1usize << self.labels.len();
        let mut sum = CMatrix::zeros(d, d);
        for k in &self.operators {
            sum = &sum + &(&k.adjoint() * k);
        }
        (&sum - &CMatrix::identity(d)).frobenius_norm()
    }
}

pub fn apply_kraus(rho: &DensityMatrix, channel: &KrausChannel) -> Result<DensityMatrix> {
    let residual = channel.completeness_residual();
    if residual > COMPLETENESS_TOL {
        return Err(Error::CompletenessViolation { residual });
    }
    let labels: Vec<&str> = channel.labels.iter().map(String::as_str).collect();
    let d = rho.dim();
    let mut out = CMatrix::zeros(d, d);
    for k in &channel.operators {
        out = &out + &conjugate(rho, &labels, k)?;
    }
    Ok(DensityMatrix::from_parts_unchecked(
        rho.labels().to_vec(),
        out.hermitian_part(),
    ))
}

/// Per-label Bloch angles of a rank-1 projective qubit measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementBasis {
    entries: Vec<(String, f64, f64)>,
}

impl MeasurementBasis {
    pub fn new<S: AsRef<str>>(entries: &[(S, f64, f64)]) -> Result<Self> {
        let mut out: Vec<(String, f64, f64)> = Vec::with_capacity(entries.len());
        for (label, theta, phi) in entries {
            if !(0.0..=PI).contains(theta) {
                return Err(Error::out_of_range("theta", *theta, "[0, π]"));
            }
            if !(0.0..2.0 * PI).contains(phi) {
                return Err(Error::out_of_range("phi", *phi, "[0, 2π)"));
            }
            let label = label.as_ref().to_string();
            if out.iter().any(|(l, _, _)| *l == label) {
                return Err(Error::LabelCollision(label));
            }
            out.push((label, *theta, *phi));
        }
        Ok(MeasurementBasis { entries: out })
    }

    /// Maps arbitrary real angles onto the canonical ranges θ ∈ [0, π], φ ∈ [0, 2π)
    /// without changing the measurement (up to outcome phases).
    pub fn canonical<S: AsRef<str>>(entries: &[(S, f64, f64)]) -> Self {
        let entries = entries
            .iter()
            .map(|(l, t, p)| {
                let (t, p) = canonical_angles(*t, *p);
                (l.as_ref().to_string(), t, p)
            })
            .collect();
        MeasurementBasis { entries }
    }

    /// Same (θ, φ) on every label.
    pub fn uniform<S: AsRef<str>>(labels: &[S], theta: f64, phi: f64) -> Result<Self> {
        let entries: Vec<(&str, f64, f64)> =
            labels.iter().map(|l| (l.as_ref(), theta, phi)).collect();
        Self::new(&entries)
    }

    pub fn entries(&self) -> &[(String, f64, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn angles_for(&self, label: &str) -> Option<(f64, f64)> {
        self.entries
            .iter()
            .find(|(l, _, _)| l == label)
            .map(|&(_, t, p)| (t, p))
    }

    /// Flat [θ₁, φ₁, θ₂, φ₂, …].
    pub fn flat_angles(&self) -> Vec<f64> {
        self.entries.iter().flat_map(|&(_, t, p)| [t, p]).collect()
    }
}

pub fn canonical_angles(theta: f64, phi: f64) -> (f64, f64) {
    let two_pi = 2.0 * PI;
    let mut t = theta.rem_euclid(two_pi);
    let mut p = phi;
    if t > PI {
        t = two_pi - t;
        p += PI;
    }
    let mut p = p.rem_euclid(two_pi);
    if p >= two_pi {
        p = 0.0;
    }
    (t, p)
}

/// Unitary whose columns are |ψ(θ,φ)⟩ and |ψ⊥(θ,φ)⟩.
pub fn basis_unitary(theta: f64, phi: f64) -> CMatrix {
    let a = bloch_amplitudes(theta, phi);
    let b = bloch_orthogonal_amplitudes(theta, phi);
    CMatrix::from_raw(2, 2, vec![a[0], b[0], a[1], b[1]])
}

/// Bra coefficients ⟨ψ| (outcome 0) or ⟨ψ⊥| (outcome 1) in the computational basis.
pub(crate) fn outcome_bra(theta: f64, phi: f64, outcome: u8) -> [C64; 2] {
    let ket = if outcome == 0 {
        bloch_amplitudes(theta, phi)
    } else {
        bloch_orthogonal_amplitudes(theta, phi)
    };
    [ket[0].conj(), ket[1].conj()]
}

/// Projects the labels in `basis` onto the given outcome bits (0 selects |ψ⟩,
/// 1 selects |ψ⊥⟩), traces them out and renormalises.
pub fn measure_project(
    rho: &DensityMatrix,
    basis: &MeasurementBasis,
    outcomes: &[u8],
) -> Result<(DensityMatrix, f64)> {
    let (unnormalised, probability) = project_unnormalised(rho, basis, outcomes)?;
    if probability < ZERO_PROBABILITY {
        return Err(Error::ZeroProbability { probability });
    }
    let (labels, m) = unnormalised;
    Ok((
        DensityMatrix::from_parts_unchecked(labels, m.scale_real(1.0 / probability)),
        probability,
    ))
}

pub(crate) fn project_unnormalised(
    rho: &DensityMatrix,
    basis: &MeasurementBasis,
    outcomes: &[u8],
) -> Result<((Vec<String>, CMatrix), f64)> {
    if outcomes.len() != basis.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} outcome bits for {} measured labels",
            outcomes.len(),
            basis.len()
        )));
    }
    if let Some(bad) = outcomes.iter().find(|&&b| b > 1) {
        return Err(Error::Config(format!("outcome bit {bad} is not 0 or 1")));
    }
    let labels: Vec<&str> = basis.entries.iter().map(|(l, _, _)| l.as_str()).collect();
    let measured = positions_of(rho, &labels)?;
    let n = rho.num_qubits();
    let kept: Vec<usize> = (0..n).filter(|p| !measured.contains(p)).collect();
    let kept_labels: Vec<String> = kept.iter().map(|&p| rho.labels()[p].clone()).collect();

    // Bra over the measured qubits, in `measured` order.
    let bra = basis
        .entries
        .iter()
        .zip(outcomes)
        .fold(vec![ONE], |acc, ((_, t, p), &o)| {
            crate::linalg::kron_vec(&acc, &outcome_bra(*t, *p, o))
        });

    let split = Split::new_ordered(n, &kept);
    let (kd, md) = (split.kept_dim(), split.traced_dim());
    // `Split` orders the traced part by ascending position; reorder the bra to match.
    let bra = reorder_to_ascending(&bra, &measured);
    let m = rho.matrix();
    let mut out = CMatrix::zeros(kd, kd);
    for i in 0..kd {
        for j in 0..kd {
            let mut acc = ZERO;
            for k in 0..md {
                if bra[k] == ZERO {
                    continue;
                }
                let row = split.full(i, k);
                let mut inner = ZERO;
                for l in 0..md {
                    inner += m[(row, split.full(j, l))] * bra[l].conj();
                }
                acc += bra[k] * inner;
            }
            out[(i, j)] = acc;
        }
    }
    let probability = out.trace().re;
    Ok(((kept_labels, out.hermitian_part()), probability))
}

/// Permutes a vector over qubits listed in `order` into ascending qubit order.
fn reorder_to_ascending(v: &[C64], order: &[usize]) -> Vec<C64> {
    let k = order.len();
    let mut sorted: Vec<usize> = (0..k).collect();
    sorted.sort_by_key(|&i| order[i]);
    let mut out = vec![ZERO; v.len()];
    for (idx, &val) in v.iter().enumerate() {
        let mut target = 0usize;
        for (new_pos, &old_pos) in sorted.iter().enumerate() {
            let bit = (idx >> (k - 1 - old_pos)) & 1;
            target |= bit << (k - 1 - new_pos);
        }
        out[target] = val;
    }
    out
}

/// Probabilities of all 2^k outcome strings, in lexicographic order of the bits.
pub fn outcome_distribution(
    rho: &DensityMatrix,
    basis: &MeasurementBasis,
) -> Result<Vec<(Vec<u8>, f64)>> {
    let k = basis.len();
    (0..1usize << k)
        .map(|idx| {
            let bits = bits_of(idx, k);
            let (_, p) = project_unnormalised(rho, basis, &bits)?;
            Ok((bits, p))
        })
        .collect()
}

pub fn bits_of(idx: usize, k: usize) -> Vec<u8> {
    (0..k).map(|j| ((idx >> (k - 1 - j)) & 1) as u8).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{tensor, NamedState, PureState};

    fn ket(labels: &[&str], amps: Vec<C64>) -> DensityMatrix {
        PureState::new(labels, amps).unwrap().to_density()
    }

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn cz_fixes_zero_zero() {
        let rho = ket(&["C", "M"], vec![ONE, ZERO, ZERO, ZERO]);
        let out = apply_gate(&rho, &GateSpec::controlled(GateKind::ControlledZ, "C", "M")).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn cz_flips_plus_to_minus_when_control_set() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rho = ket(&["C", "M"], vec![ZERO, ZERO, c(h), c(h)]);
        let out = apply_gate(&rho, &GateSpec::controlled(GateKind::ControlledZ, "C", "M")).unwrap();
        let expected = ket(&["C", "M"], vec![ZERO, ZERO, c(h), c(-h)]);
        assert!(out.matrix().max_abs_diff(expected.matrix()) < 1e-15);
    }

    #[test]
    fn ch_maps_one_zero_to_one_plus() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rho = ket(&["C", "M"], vec![ZERO, ZERO, ONE, ZERO]);
        let out =
            apply_gate(&rho, &GateSpec::controlled(GateKind::ControlledHadamard, "C", "M")).unwrap();
        let expected = ket(&["C", "M"], vec![ZERO, ZERO, c(h), c(h)]);
        assert!(out.matrix().max_abs_diff(expected.matrix()) < 1e-15);
    }

    #[test]
    fn gate_on_reversed_label_order() {
        // Control listed after target in the state's label order.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rho = ket(&["M", "C"], vec![ZERO, c(h), ZERO, c(h)]);
        let out = apply_gate(&rho, &GateSpec::controlled(GateKind::ControlledZ, "C", "M")).unwrap();
        let expected = ket(&["M", "C"], vec![ZERO, c(h), ZERO, c(-h)]);
        assert!(out.matrix().max_abs_diff(expected.matrix()) < 1e-15);
    }

    #[test]
    fn gate_errors() {
        let rho = DensityMatrix::maximally_mixed(&["C", "M"]).unwrap();
        assert!(matches!(
            apply_gate(&rho, &GateSpec::controlled(GateKind::ControlledZ, "C", "X")),
            Err(Error::UnknownLabel(_))
        ));
        assert!(apply_gate(&rho, &GateSpec::controlled(GateKind::ControlledZ, "C", "C")).is_err());
        assert!(GateSpec::local("C", CMatrix::diag_real(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn dephasing_at_zero_strength_is_identity() {
        let ch = KrausChannel::correlated_dephasing(["a", "b"], 0.0, 0.4).unwrap();
        let rho = NamedState::Bell.build().unwrap().relabel(&["a", "b"]).unwrap();
        let out = apply_kraus(&rho, &ch).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn full_correlated_dephasing_of_plus_plus() {
        let ch = KrausChannel::correlated_dephasing(["q1", "q2"], 1.0, 1.0).unwrap();
        let pp = NamedState::PlusProduct { n: 2 }.build().unwrap();
        let out = apply_kraus(&pp, &ch).unwrap();
        let expected = NamedState::ClassicalCarriers { n: 2 }.build().unwrap();
        assert!(out.matrix().max_abs_diff(expected.matrix()) < 1e-15);
    }

    #[test]
    fn fully_correlated_channel_matches_operator_algebra() {
        let rho = NamedState::MixedMemories { a1: 0.3, a2: 0.8 }.build().unwrap();
        let rho = apply_gate(&rho, &GateSpec::local("q1", pauli::hadamard()).unwrap()).unwrap();
        let zz = crate::linalg::kron(&pauli::z(), &pauli::z());
        for p in [0.1, 0.5, 0.93] {
            let ch = KrausChannel::correlated_dephasing(["q1", "q2"], p, 1.0).unwrap();
            let out = apply_kraus(&rho, &ch).unwrap();
            let flipped = &(&zz * rho.matrix()) * &zz;
            let expected = &rho.matrix().scale_real(1.0 - 0.5 * p) + &flipped.scale_real(0.5 * p);
            assert!(out.matrix().max_abs_diff(&expected) < 1e-14);
        }
    }

    #[test]
    fn dephasing_family_is_complete_for_all_parameters() {
        for p in [0.0, 0.3, 0.77, 1.0] {
            for mu in [0.0, 0.25, 0.5, 1.0] {
                let ch = KrausChannel::correlated_dephasing(["a", "b"], p, mu).unwrap();
                assert!(ch.completeness_residual() < 1e-12);
            }
        }
    }

    #[test]
    fn kraus_completeness_is_enforced() {
        let bad = KrausChannel::new(&["a"], vec![CMatrix::identity(2).scale_real(0.9)]);
        assert!(matches!(bad, Err(Error::CompletenessViolation { .. })));
    }

    #[test]
    fn measuring_plus_in_plus_basis() {
        let plus = ket(&["a", "b"], {
            let h = 0.5;
            vec![c(h), c(h), c(h), c(h)]
        });
        let basis = MeasurementBasis::new(&[("a", PI / 2.0, 0.0)]).unwrap();
        let (post, p) = measure_project(&plus, &basis, &[0]).unwrap();
        assert!((p - 1.0).abs() < 1e-14);
        assert_eq!(post.labels(), &["b"]);
        assert!(matches!(
            measure_project(&plus, &basis, &[1]),
            Err(Error::ZeroProbability { .. })
        ));
    }

    #[test]
    fn classical_carriers_in_computational_basis_are_uniform() {
        let carriers = NamedState::ClassicalCarriers { n: 2 }.build().unwrap();
        let basis = MeasurementBasis::new(&[("q1", 0.0, 0.0), ("q2", 0.0, 0.0)]).unwrap();
        for (_, p) in outcome_distribution(&carriers, &basis).unwrap() {
            assert!((p - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn measurement_respects_basis_label_order() {
        // |0⟩_a |1⟩_b measured as (b, a) in the computational basis.
        let rho = ket(&["a", "b", "c"], {
            let mut v = vec![ZERO; 8];
            v[0b010] = ONE;
            v
        });
        let basis = MeasurementBasis::new(&[("b", 0.0, 0.0), ("a", 0.0, 0.0)]).unwrap();
        let (_, p) = measure_project(&rho, &basis, &[1, 0]).unwrap();
        assert!((p - 1.0).abs() < 1e-14);
        let (_, p) = measure_project(&rho, &basis, &[0, 1]).unwrap_or((rho.clone(), 0.0));
        assert!(p.abs() < 1e-14);
    }

    #[test]
    fn outcome_distribution_sums_to_one_on_protocol_state() {
        let carriers = NamedState::ClassicalCarriers { n: 2 }
            .build()
            .unwrap()
            .relabel(&["C1", "C2"])
            .unwrap();
        let memories = NamedState::PlusProduct { n: 2 }
            .build()
            .unwrap()
            .relabel(&["M1", "M2"])
            .unwrap();
        let mut rho = tensor(&[carriers, memories]).unwrap();
        for (ctl, tgt) in [("C1", "M1"), ("C2", "M2")] {
            rho = apply_gate(&rho, &GateSpec::controlled(GateKind::ControlledZ, ctl, tgt)).unwrap();
        }
        let basis = MeasurementBasis::new(&[("C1", 0.7, 1.1), ("C2", 2.1, 4.0)]).unwrap();
        let total: f64 = outcome_distribution(&rho, &basis).unwrap().iter().map(|x| x.1).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn canonical_angles_preserve_projector() {
        for &(t, p) in &[(4.0, 1.0), (-0.5, 0.3), (7.0, -2.0), (1.0, 9.0)] {
            let (ct, cp) = canonical_angles(t, p);
            assert!((0.0..=PI).contains(&ct) && (0.0..2.0 * PI).contains(&cp));
            let a = bloch_amplitudes(t, p);
            let b = bloch_amplitudes(ct, cp);
            let overlap: C64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_unitary_is_unitary() {
        let u = basis_unitary(1.3, 4.4);
        assert!((&(&u.adjoint() * &u) - &CMatrix::identity(2)).frobenius_norm() < 1e-14);
    }
}
