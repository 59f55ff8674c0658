//! Labelled multi-qubit states.
//!
//! Qubit ordering follows the label list, big-endian: the first label is the
//! most significant bit of the basis index.

mod named;

pub use named::{basis_ket, match_werner_mixedness, Mixedness, NamedState};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, kron, kron_vec, CMatrix, C64, HERMITIAN_TOL, ONE, ZERO};

pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-9;
pub const NORM_TOL: f64 = 1e-12;

/// Positivity is only verified by full diagonalisation up to this dimension.
const POSITIVITY_CHECK_MAX_DIM: usize = 64;

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    labels: Vec<String>,
    matrix: CMatrix,
}

#[derive(Clone, Debug)]
pub struct PureState {
    labels: Vec<String>,
    amplitudes: Vec<C64>,
}

fn check_labels(labels: &[String]) -> Result<()> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::LabelCollision(l.clone()));
        }
    }
    Ok(())
}

pub(crate) fn owned_labels<S: AsRef<str>>(labels: &[S]) -> Vec<String> {
    labels.iter().map(|s| s.as_ref().to_string()).collect()
}

/// Default labels `q1..qn`.
pub fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("q{i}")).collect()
}

impl DensityMatrix {
    /// Validates trace, Hermiticity and (for dimensions up to 64) positivity.
    pub fn new<S: AsRef<str>>(labels: &[S], matrix: CMatrix) -> Result<Self> {
        let rho = Self::from_parts(owned_labels(labels), matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    fn from_parts(labels: Vec<String>, matrix: CMatrix) -> Result<Self> {
        check_labels(&labels)?;
        let dim = 1usize << labels.len();
        if !matrix.is_square() || matrix.rows() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{} labels need a {dim}x{dim} matrix, got {}x{}",
                labels.len(),
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(DensityMatrix { labels, matrix })
    }

    /// Skips validation; used by operations that preserve the invariants.
    pub(crate) fn from_parts_unchecked(labels: Vec<String>, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.rows(), 1usize << labels.len());
        DensityMatrix { labels, matrix }
    }

    /// Builds a state from an unnormalised positive operator by dividing by its trace.
    pub fn normalized<S: AsRef<str>>(labels: &[S], matrix: CMatrix) -> Result<Self> {
        let tr = matrix.trace().re;
        if tr.abs() < 1e-300 || !tr.is_finite() {
            return Err(Error::InvalidState(format!("cannot normalise trace {tr}")));
        }
        let rho = Self::from_parts(owned_labels(labels), matrix.scale_real(1.0 / tr))?;
        rho.validate()?;
        Ok(rho)
    }

    pub fn validate(&self) -> Result<()> {
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let dev = self.matrix.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        if self.dim() <= POSITIVITY_CHECK_MAX_DIM {
            let min = self.eigenvalues()?[0];
            if min < -POSITIVITY_TOL {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn relabel<S: AsRef<str>>(self, labels: &[S]) -> Result<Self> {
        if labels.len() != self.labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "relabel needs {} labels, got {}",
                self.labels.len(),
                labels.len()
            )));
        }
        let labels = owned_labels(labels);
        check_labels(&labels)?;
        Ok(DensityMatrix {
            labels,
            matrix: self.matrix,
        })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::eigvalsh(&self.matrix)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn maximally_mixed<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let d = 1usize << labels.len();
        Self::new(labels, CMatrix::identity(d).scale_real(1.0 / d as f64))
    }
}

impl PureState {
    pub fn new<S: AsRef<str>>(labels: &[S], amplitudes: Vec<C64>) -> Result<Self> {
        let labels = owned_labels(labels);
        check_labels(&labels)?;
        if amplitudes.len() != 1usize << labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels need {} amplitudes, got {}",
                labels.len(),
                1usize << labels.len(),
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(PureState { labels, amplitudes })
    }

    /// Normalises `amplitudes` before construction.
    pub fn normalized<S: AsRef<str>>(labels: &[S], amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(labels, amplitudes.into_iter().map(|a| a / norm).collect())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn relabel<S: AsRef<str>>(self, labels: &[S]) -> Result<Self> {
        Self::new(labels, self.amplitudes)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_parts_unchecked(
            self.labels.clone(),
            CMatrix::outer(&self.amplitudes, &self.amplitudes),
        )
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Tensor product with disjoint labels.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        check_labels(&labels)?;
        Ok(PureState {
            labels,
            amplitudes: kron_vec(&self.amplitudes, &other.amplitudes),
        })
    }
}

fn check_bloch_angles(theta: f64, phi: f64) -> Result<()> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::out_of_range("theta", theta, "[0, π]"));
    }
    if !(0.0..2.0 * PI).contains(&phi) {
        return Err(Error::out_of_range("phi", phi, "[0, 2π)"));
    }
    Ok(())
}

/// cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩ for any real angles.
pub(crate) fn bloch_amplitudes(theta: f64, phi: f64) -> [C64; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    [C64::new(c, 0.0), C64::from_polar(s, phi)]
}

/// The companion state −e^{−iφ} sin(θ/2)|0⟩ + cos(θ/2)|1⟩.
pub(crate) fn bloch_orthogonal_amplitudes(theta: f64, phi: f64) -> [C64; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    [-C64::from_polar(s, -phi), C64::new(c, 0.0)]
}

/// Single-qubit state on the Bloch sphere, labelled `q`.
pub fn bloch_state(theta: f64, phi: f64) -> Result<PureState> {
    check_bloch_angles(theta, phi)?;
    Ok(PureState {
        labels: vec!["q".into()],
        amplitudes: bloch_amplitudes(theta, phi).to_vec(),
    })
}

/// The state orthogonal to [`bloch_state`] at the same angles.
pub fn bloch_state_orthogonal(theta: f64, phi: f64) -> Result<PureState> {
    check_bloch_angles(theta, phi)?;
    Ok(PureState {
        labels: vec!["q".into()],
        amplitudes: bloch_orthogonal_amplitudes(theta, phi).to_vec(),
    })
}

pub fn tensor(states: &[DensityMatrix]) -> Result<DensityMatrix> {
    let first = states
        .first()
        .ok_or_else(|| Error::InvalidState("tensor of an empty list".into()))?;
    let mut labels = first.labels.clone();
    let mut matrix = first.matrix.clone();
    for s in &states[1..] {
        labels.extend(s.labels.iter().cloned());
        check_labels(&labels)?;
        matrix = kron(&matrix, &s.matrix);
    }
    Ok(DensityMatrix::from_parts_unchecked(labels, matrix))
}

/// Index bookkeeping for splitting a big-endian basis index into kept and traced parts.
pub(crate) struct Split {
    /// `compose[k * traced_dim + t]` is the full index for kept part `k`, traced part `t`.
    compose: Vec<usize>,
    kept_dim: usize,
    traced_dim: usize,
}

impl Split {
    /// `kept_positions` fixes the bit order of the kept index (first = most significant);
    /// the traced index always runs over the remaining positions in ascending order.
    pub(crate) fn new_ordered(n: usize, kept_positions: &[usize]) -> Self {
        let traced: Vec<usize> = (0..n).filter(|p| !kept_positions.contains(p)).collect();
        let kept_dim = 1usize << kept_positions.len();
        let traced_dim = 1usize << traced.len();
        let mut compose = vec![0usize; kept_dim * traced_dim];
        for k in 0..kept_dim {
            for t in 0..traced_dim {
                let mut full = 0usize;
                for (j, &p) in kept_positions.iter().enumerate() {
                    let bit = (k >> (kept_positions.len() - 1 - j)) & 1;
                    full |= bit << (n - 1 - p);
                }
                for (j, &p) in traced.iter().enumerate() {
                    let bit = (t >> (traced.len() - 1 - j)) & 1;
                    full |= bit << (n - 1 - p);
                }
                compose[k * traced_dim + t] = full;
            }
        }
        Split {
            compose,
            kept_dim,
            traced_dim,
        }
    }

    pub(crate) fn kept_dim(&self) -> usize {
        self.kept_dim
    }

    pub(crate) fn traced_dim(&self) -> usize {
        self.traced_dim
    }

    #[inline]
    pub(crate) fn full(&self, kept: usize, traced: usize) -> usize {
        self.compose[kept * self.traced_dim + traced]
    }
}

pub fn partial_trace<S: AsRef<str>>(rho: &DensityMatrix, keep: &[S]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidPartition("keep set is empty".into()));
    }
    let mut positions = Vec::with_capacity(keep.len());
    for l in keep {
        let p = rho.index_of(l.as_ref())?;
        if positions.contains(&p) {
            return Err(Error::LabelCollision(l.as_ref().to_string()));
        }
        positions.push(p);
    }
    positions.sort_unstable();
    let labels: Vec<String> = positions.iter().map(|&p| rho.labels[p].clone()).collect();
    let split = Split::new_ordered(rho.num_qubits(), &positions);
    let m = &rho.matrix;
    let out = CMatrix::from_fn(split.kept_dim, split.kept_dim, |i, j| {
        (0..split.traced_dim)
            .map(|t| m[(split.full(i, t), split.full(j, t))])
            .sum()
    });
    Ok(DensityMatrix::from_parts_unchecked(labels, out))
}

/// Reorders the qubits of `rho` so that its labels follow `order`.
pub fn permute<S: AsRef<str>>(rho: &DensityMatrix, order: &[S]) -> Result<DensityMatrix> {
    if order.len() != rho.num_qubits() {
        return Err(Error::InvalidPartition(format!(
            "{} labels given for a {}-qubit state",
            order.len(),
            rho.num_qubits()
        )));
    }
    let mut positions = Vec::with_capacity(order.len());
    for l in order {
        let p = rho.index_of(l.as_ref())?;
        if positions.contains(&p) {
            return Err(Error::LabelCollision(l.as_ref().to_string()));
        }
        positions.push(p);
    }
    let labels: Vec<String> = positions.iter().map(|&p| rho.labels[p].clone()).collect();
    let split = Split::new_ordered(rho.num_qubits(), &positions);
    let m = &rho.matrix;
    let out = CMatrix::from_fn(split.kept_dim, split.kept_dim, |i, j| {
        m[(split.full(i, 0), split.full(j, 0))]
    });
    Ok(DensityMatrix::from_parts_unchecked(labels, out))
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
    rho.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
}

fn ensure_same_shape(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Uhlmann fidelity in the squared convention, F = (tr √(√ρ σ √ρ))².
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    ensure_same_shape(rho, sigma)?;
    let sqrt_rho = linalg::mat_fn(&rho.matrix, |l| l.max(0.0).sqrt(), 0.0)?;
    let inner = (&(&sqrt_rho * &sigma.matrix) * &sqrt_rho).hermitian_part();
    let root_sum: f64 = linalg::eigvalsh(&inner)?
        .into_iter()
        .map(|l| if l > linalg::EIGENVALUE_FLOOR { l.sqrt() } else { 0.0 })
        .sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

/// ⟨ψ|ρ|ψ⟩, the fidelity when one argument is pure.
pub fn fidelity_pure(psi: &PureState, rho: &DensityMatrix) -> Result<f64> {
    if psi.amplitudes.len() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state vector of length {} against a {}-dimensional state",
            psi.amplitudes.len(),
            rho.dim()
        )));
    }
    let rho_psi = rho.matrix.apply(&psi.amplitudes);
    let val: C64 = psi
        .amplitudes
        .iter()
        .zip(&rho_psi)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(val.re.clamp(0.0, 1.0))
}

/// Trace distance ½‖A − B‖₁.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    ensure_same_shape(a, b)?;
    let diff = (&a.matrix - &b.matrix).hermitian_part();
    Ok(0.5 * linalg::eigvalsh(&diff)?.iter().map(|l| l.abs()).sum::<f64>())
}

/// |+⟩ and |−⟩.
pub(crate) fn plus_minus(sign: f64) -> [C64; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [C64::new(h, 0.0), C64::new(sign * h, 0.0)]
}

pub(crate) fn computational(bit: usize) -> [C64; 2] {
    if bit == 0 {
        [ONE, ZERO]
    } else {
        [ZERO, ONE]
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_density(rng: &mut ChaCha8Rng, n: usize) -> DensityMatrix {
        let d = 1usize << n;
        let g = CMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let m = (&g * &g.adjoint()).hermitian_part();
        DensityMatrix::normalized(&default_labels(n), m).unwrap()
    }

    fn bell_phi_plus() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = vec![C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)];
        PureState::new(&["a", "b"], v).unwrap().to_density()
    }

    #[test]
    fn bloch_state_special_points() {
        let zero = bloch_state(0.0, 1.0).unwrap();
        assert!((zero.amplitudes()[0] - ONE).norm() < 1e-15);
        assert!(zero.amplitudes()[1].norm() < 1e-15);
        let plus = bloch_state(PI / 2.0, 0.0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((plus.amplitudes()[0].re - h).abs() < 1e-15);
        assert!((plus.amplitudes()[1].re - h).abs() < 1e-15);
    }

    #[test]
    fn bloch_orthogonal_companion() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let t = rng.gen_range(0.0..=PI);
            let p = rng.gen_range(0.0..2.0 * PI);
            let a = bloch_state(t, p).unwrap();
            let b = bloch_state_orthogonal(t, p).unwrap();
            assert!(a.inner(&b).norm() < 1e-14);
        }
    }

    #[test]
    fn bloch_state_rejects_out_of_range() {
        assert!(bloch_state(-0.1, 0.0).is_err());
        assert!(bloch_state(1.0, 2.0 * PI).is_err());
    }

    #[test]
    fn tensor_of_plus_states() {
        let plus = bloch_state(PI / 2.0, 0.0).unwrap().to_density();
        let a = plus.clone().relabel(&["a"]).unwrap();
        let b = plus.relabel(&["b"]).unwrap();
        let ab = tensor(&[a, b]).unwrap();
        for z in ab.matrix().as_slice() {
            assert!((z - C64::new(0.25, 0.0)).norm() < 1e-15);
        }
        assert_eq!(ab.labels(), &["a", "b"]);
    }

    #[test]
    fn tensor_rejects_label_collision() {
        let plus = bloch_state(PI / 2.0, 0.0).unwrap().to_density();
        assert!(matches!(
            tensor(&[plus.clone(), plus]),
            Err(Error::LabelCollision(_))
        ));
    }

    #[test]
    fn carriers_with_plus_memories_have_rank_two() {
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
        let joint = tensor(&[carriers, memories]).unwrap();
        assert_eq!(joint.dim(), 16);
        let rank = joint.eigenvalues().unwrap().iter().filter(|&&l| l > 1e-10).count();
        assert_eq!(rank, 2);
    }

    #[test]
    fn trace_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_density(&mut rng, 1).relabel(&["a"]).unwrap();
        let b = random_density(&mut rng, 2).relabel(&["b", "c"]).unwrap();
        let ab = tensor(&[a.clone(), b.clone()]).unwrap();
        assert!((ab.trace() - a.trace() * b.trace()).abs() < 1e-12);
    }

    #[test]
    fn bell_marginals_are_maximally_mixed() {
        let bell = bell_phi_plus();
        for keep in ["a", "b"] {
            let r = partial_trace(&bell, &[keep]).unwrap();
            assert!(r.matrix().max_abs_diff(&CMatrix::diag_real(&[0.5, 0.5])) < 1e-15);
        }
    }

    #[test]
    fn tracing_a_ghz_carrier_leaves_classical_carriers() {
        let ghz = NamedState::Ghz3.build().unwrap();
        let reduced = partial_trace(&ghz, &["q1", "q2"]).unwrap();
        let expected = NamedState::ClassicalCarriers { n: 2 }.build().unwrap();
        assert!(reduced.matrix().max_abs_diff(expected.matrix()) < 1e-14);
    }

    #[test]
    fn partial_trace_inverts_tensor_and_keeps_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_density(&mut rng, 2).relabel(&["x", "y"]).unwrap();
        let b = random_density(&mut rng, 1).relabel(&["z"]).unwrap();
        let ab = tensor(&[a.clone(), b]).unwrap();
        let back = partial_trace(&ab, &["y", "x"]).unwrap();
        assert_eq!(back.labels(), &["x", "y"]);
        assert!(back.matrix().max_abs_diff(a.matrix()) < 1e-14);
    }

    #[test]
    fn partial_trace_errors() {
        let bell = bell_phi_plus();
        assert!(matches!(partial_trace(&bell, &["nope"]), Err(Error::UnknownLabel(_))));
        let empty: [&str; 0] = [];
        assert!(partial_trace(&bell, &empty).is_err());
    }

    #[test]
    fn fidelity_basic_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = random_density(&mut rng, 2);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
        let zero = bloch_state(0.0, 0.0).unwrap().to_density();
        let one = bloch_state(PI, 0.0).unwrap().to_density();
        assert!(fidelity(&zero, &one).unwrap() < 1e-12);
    }

    #[test]
    fn fidelity_pure_path_matches_general_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let rho = random_density(&mut rng, 2);
            let amps: Vec<C64> = (0..4)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let psi = PureState::normalized(&default_labels(2), amps).unwrap();
            let general = fidelity(&psi.to_density(), &rho).unwrap();
            let oracle = fidelity_pure(&psi, &rho).unwrap();
            assert!((general - oracle).abs() < 1e-9, "{general} vs {oracle}");
        }
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let a = DensityMatrix::maximally_mixed(&["a"]).unwrap();
        let b = DensityMatrix::maximally_mixed(&["a", "b"]).unwrap();
        assert!(fidelity(&a, &b).is_err());
    }

    #[test]
    fn purity_values() {
        assert!((purity(&bell_phi_plus()) - 1.0).abs() < 1e-14);
        let mixed = DensityMatrix::maximally_mixed(&["a", "b"]).unwrap();
        assert!((purity(&mixed) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn density_constructor_rejects_invalid() {
        let bad_trace = CMatrix::diag_real(&[0.5, 0.4]);
        assert!(DensityMatrix::new(&["a"], bad_trace).is_err());
        let negative = CMatrix::diag_real(&[1.5, -0.5]);
        assert!(DensityMatrix::new(&["a"], negative).is_err());
        assert!(DensityMatrix::new(&["a"], CMatrix::identity(4).scale_real(0.25)).is_err());
    }

    #[test]
    fn trace_distance_between_orthogonal_states() {
        let zero = bloch_state(0.0, 0.0).unwrap().to_density();
        let one = bloch_state(PI, 0.0).unwrap().to_density();
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-14);
    }
}
