mod common;

use std::f64::consts::PI;

use lopt::fock::{transition_amplitude, FockState};
use lopt::linalg::CMatrix;
use lopt::toffoli::{
    analytic_amplitude, build_cphase_network, design_cphase, design_with_t1, effective_gate,
    success_probability, CPhaseDesign,
};
use lopt::Complex64;
use proptest::prelude::*;

/// Coincidence amplitude `⟨in, vacuum| U |in, vacuum⟩` from the permanent
/// of the network.
fn coincidence(d: &CPhaseDesign, index: usize) -> Complex64 {
    let (u, reg) = build_cphase_network(d).unwrap();
    let f: FockState = reg.encode(index);
    transition_amplitude(&u, &f, &f).unwrap()
}

/// Valid design from a chosen `T1`, or `None` when no `T2` balances it.
fn design(n: usize, phi: f64, t1: f64) -> Option<CPhaseDesign> {
    design_with_t1(n, phi, t1).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn coincidence_amplitudes_match_closed_form(
        n in 1usize..=4,
        phi in 0.05f64..(2.0 * PI - 0.05),
        t1 in 0.05f64..0.95,
    ) {
        let Some(d) = design(n, phi, t1) else { return Ok(()); };
        prop_assert!(d.check().is_ok());
        for index in 0..(1 << n) {
            let a = coincidence(&d, index);
            let b = analytic_amplitude(&d, index);
            prop_assert!((a - b).norm() < 1e-10, "index {}: {} vs {}", index, a, b);
        }
    }

    #[test]
    fn post_selected_gate_is_proportional_to_unitary(
        n in 1usize..=3,
        phi in 0.05f64..PI,
        t1 in 0.05f64..0.95,
    ) {
        let Some(d) = design(n, phi, t1) else { return Ok(()); };
        let gate = effective_gate(&d).unwrap();
        let g = gate.matrix.adjoint() * &gate.matrix;
        let scale = g[(0, 0)];
        let dim = 1 << n;
        let residual = (g - CMatrix::identity(dim, dim) * scale).norm();
        prop_assert!(residual < 1e-9 * scale.norm().max(1e-300) + 1e-15);
        let phase = gate.conditional_phase();
        prop_assert!(lopt::linalg::wrap_angle(phase - phi).abs() < 1e-9);
    }

    #[test]
    fn exchanging_t1_and_t2_leaves_amplitudes(
        n in 1usize..=3,
        phi in 0.05f64..PI,
        t1 in 0.05f64..0.95,
    ) {
        let Some(d) = design(n, phi, t1) else { return Ok(()); };
        let swapped = CPhaseDesign { t1: d.t2, t2: d.t1, ..d };
        for index in 0..(1 << n) {
            let a = coincidence(&d, index);
            let b = coincidence(&swapped, index);
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn grid_peak_sits_at_optimal_t1(n in 1usize..=4, phi in 0.05f64..=PI) {
        let d = design_cphase(n, phi).unwrap();
        let step = 1e-4;
        let (mut best_t, mut best_p) = (0.0, -1.0);
        for i in 0..10_000 {
            let t = (i as f64 + 0.5) * step;
            if let Ok(p) = success_probability(n, phi, t) {
                if p > best_p {
                    best_p = p;
                    best_t = t;
                }
            }
        }
        prop_assert!((best_t - d.t1).abs() <= step);
        prop_assert!((d.t2 - d.t1).abs() <= 1e-10);
        prop_assert!(best_p <= d.success_probability() + 1e-15);
    }
}

#[test]
fn optimal_cost_decreases_towards_pi() {
    for n in 1..=6 {
        let mut last = f64::INFINITY;
        for i in 1..=400 {
            let phi = PI * i as f64 / 400.0;
            let p = design_cphase(n, phi).unwrap().success_probability();
            assert!(p < last, "N={n}: P({phi}) = {p} not below {last}");
            last = p;
        }
    }
}

#[test]
fn reported_reference_value_for_three_qubits() {
    let d = design_cphase(3, PI).unwrap();
    assert!((d.t1 - 0.44252).abs() < 1e-4);
    assert!((d.success_probability() - 0.0075).abs() < 1e-4);
}
