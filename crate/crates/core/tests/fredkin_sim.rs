use lopt::fredkin::{
    ideal_fredkin, simulate_fredkin, simulate_standard_inputs, simulate_with_block,
    FredkinSolution,
};
use lopt::fock::ModeUnitary;
use lopt::linalg::{real, ZERO};

fn analytic() -> FredkinSolution {
    FredkinSolution::from_rows(
        [real(0.494); 3],
        [real(-0.416), real(0.416), real(-0.416)],
        real(0.0638),
    )
    .unwrap()
}

#[test]
fn basis_states_follow_truth_table() {
    let sol = analytic();
    let expected_p = sol.q.norm_sqr().powi(2) / 4.0;
    let runs = simulate_standard_inputs(&sol).unwrap();
    assert_eq!(runs.len(), 9);
    for (input, run) in &runs {
        assert!(
            (run.success_probability - expected_p).abs() < 1e-12,
            "P = {} vs {}",
            run.success_probability,
            expected_p
        );
        assert!((run.fidelity - 1.0).abs() < 1e-10, "F = {}", run.fidelity);
        let ideal = ideal_fredkin(input);
        let overlap: f64 = ideal
            .iter()
            .zip(&run.output)
            .map(|(a, b)| a.conj() * b)
            .sum::<lopt::Complex64>()
            .norm();
        assert!((overlap - 1.0).abs() < 1e-10);
        for p in &run.branch_probabilities {
            assert!((p - expected_p / 4.0).abs() < 1e-12);
        }
    }
}

#[test]
fn superposition_keeps_relative_phase() {
    let sol = analytic();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut input = [ZERO; 8];
    input[0b001] = real(h);
    input[0b101] = real(-h);
    let run = simulate_fredkin(&input, &sol).unwrap();
    assert!((run.fidelity - 1.0).abs() < 1e-10);
    let phase = run.output[0b110] / run.output[0b001];
    assert!((phase + 1.0).norm() < 1e-10);
}

#[test]
fn identity_blocks_fail_post_selection_for_v_control() {
    let mut input = [ZERO; 8];
    input[0b100] = real(1.0);
    let run = simulate_with_block(&input, &ModeUnitary::identity(7)).unwrap();
    assert!(run.success_probability < 1e-14);
}

#[test]
fn rejects_unnormalised_input() {
    let input = [real(1.0); 8];
    assert!(simulate_fredkin(&input, &analytic()).is_err());
}
