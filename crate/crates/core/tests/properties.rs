use std::f64::consts::PI;

use discordnet::channels::{apply_kraus, outcome_distribution, KrausChannel, MeasurementBasis};
use discordnet::correlations::{gqd, gqd_direct};
use discordnet::experiments::appendix::{outcome_branches, P1_ANGLES};
use discordnet::experiments::Settings;
use discordnet::correlations::InnerBudget;
use discordnet::linalg::{eigh, eigvalsh, CMatrix, C64};
use discordnet::protocol::{
    final_state_closed_form, final_state_closed_form_n, run_circuit, run_circuit_all_outcomes,
    run_fast_all_outcomes, Outcome, ProtocolConfig,
};
use discordnet::qstate::{default_labels, partial_trace, DensityMatrix};
use proptest::prelude::*;

fn complex_entries(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
}

/// A A† / tr(A A†) from a random square A; full rank almost surely.
fn density(n: usize, entries: &[(f64, f64)]) -> DensityMatrix {
    let d = 1 << n;
    let a = CMatrix::from_fn(d, d, |r, c| {
        let (re, im) = entries[r * d + c];
        C64::new(re, im)
    });
    let m = &a * &a.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(&default_labels(n), m.scale_real(1.0 / tr).hermitian_part()).unwrap()
}

fn angle_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.0..PI, 0.0..2.0 * PI)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn circuit_matches_closed_form((t1, p1) in angle_pair(), (t2, p2) in angle_pair()) {
        let cfg = ProtocolConfig::standard(&[(t1, p1), (t2, p2)]).unwrap();
        let circuit = run_circuit(&cfg).unwrap().final_state;
        let closed = final_state_closed_form(t1, t2, p1, p2);
        prop_assert!(circuit.matrix().max_abs_diff(closed.matrix()) < 1e-10);
    }

    #[test]
    fn three_party_circuit_matches_closed_form(a in prop::collection::vec(angle_pair(), 3)) {
        let circuit = run_circuit(&ProtocolConfig::standard(&a).unwrap()).unwrap().final_state;
        let closed = final_state_closed_form_n(&a).unwrap();
        prop_assert!(circuit.matrix().max_abs_diff(closed.matrix()) < 1e-10);
    }

    #[test]
    fn states_stay_valid(e in complex_entries(64)) {
        let rho = density(3, &e);
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        prop_assert!(rho.matrix().hermiticity_deviation() < 1e-12);
        prop_assert!(rho.eigenvalues().unwrap().iter().all(|&l| l > -1e-12));
        let pair = partial_trace(&rho, &["q1", "q3"]).unwrap();
        prop_assert!((pair.trace() - 1.0).abs() < 1e-12);
        prop_assert!(pair.validate().is_ok());
    }

    #[test]
    fn protocol_outputs_are_states((t1, p1) in angle_pair(), (t2, p2) in angle_pair()) {
        let cfg = ProtocolConfig::standard(&[(t1, p1), (t2, p2)]).unwrap().with_outcome(Outcome::All).unwrap();
        let outs = run_circuit_all_outcomes(&cfg).unwrap();
        let total: f64 = outs.iter().map(|o| o.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        for o in &outs {
            prop_assert!(o.final_state.validate().is_ok());
        }
    }

    #[test]
    fn noiseless_outcomes_share_a_spectrum((t1, p1) in angle_pair(), (t2, p2) in angle_pair()) {
        let cfg = ProtocolConfig::standard(&[(t1, p1), (t2, p2)]).unwrap().with_outcome(Outcome::All).unwrap();
        let outs = run_fast_all_outcomes(&cfg).unwrap();
        let first = outs[0].final_state.eigenvalues().unwrap();
        for o in &outs[1..] {
            let ev = o.final_state.eigenvalues().unwrap();
            for (a, b) in first.iter().zip(&ev) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pinched_gqd_equals_direct(e in complex_entries(64), a in prop::collection::vec(angle_pair(), 3)) {
        let rho = density(3, &e);
        let entries: Vec<(String, f64, f64)> =
            default_labels(3).into_iter().zip(a).map(|(l, (t, p))| (l, t, p)).collect();
        let bases = MeasurementBasis::new(&entries).unwrap();
        let fast = gqd(&rho, &bases).unwrap();
        let direct = gqd_direct(&rho, &bases).unwrap();
        prop_assert!((fast - direct).abs() < 1e-9, "{fast} vs {direct}");
    }

    #[test]
    fn dephasing_is_complete_and_trace_preserving(p in 0.0f64..=1.0, mu in 0.0f64..=1.0, e in complex_entries(16)) {
        let ch = KrausChannel::correlated_dephasing(["q1", "q2"], p, mu).unwrap();
        prop_assert!(ch.completeness_residual() < 1e-12);
        let out = apply_kraus(&density(2, &e), &ch).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
        prop_assert!(out.validate().is_ok());
    }

    #[test]
    fn measurement_probabilities_sum_to_one(e in complex_entries(64), a in prop::collection::vec(angle_pair(), 2)) {
        let rho = density(3, &e);
        let bases = MeasurementBasis::new(&[("q1", a[0].0, a[0].1), ("q3", a[1].0, a[1].1)]).unwrap();
        let dist = outcome_distribution(&rho, &bases).unwrap();
        prop_assert_eq!(dist.len(), 4);
        prop_assert!((dist.iter().map(|d| d.1).sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(dist.iter().all(|d| d.1 >= -1e-15));
    }

    #[test]
    fn eigensolver_reconstructs(n in 1usize..=16, e in complex_entries(256)) {
        let h = CMatrix::from_fn(n, n, |r, c| {
            let (re, im) = e[r.min(c) * 16 + r.max(c)];
            if r == c { C64::new(re, 0.0) } else if r < c { C64::new(re, im) } else { C64::new(re, -im) }
        });
        let dec = eigh(&h).unwrap();
        prop_assert!(dec.reconstruct().max_abs_diff(&h) < 1e-10);
        prop_assert!(dec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let vals = eigvalsh(&h).unwrap();
        for (a, b) in vals.iter().zip(&dec.eigenvalues) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn full_dephasing_makes_outcomes_matter() {
    let b = outcome_branches(&Settings::new(InnerBudget::Fast, 0)).unwrap();
    let spread = b.iter().map(|o| o.gqd).fold(f64::MIN, f64::max) - b.iter().map(|o| o.gqd).fold(f64::MAX, f64::min);
    assert!(spread > 0.1, "GQD across outcomes differs by only {spread}");
    assert!(P1_ANGLES.0 > 0.0);
}
