mod common;

use common::*;
use lopt::circuits::{complete_to_unitary, Completion};
use lopt::fock::{apply_unitary, FockState, PureState};
use lopt::fredkin::{
    conditional_amplitudes_oracle, mach_zehnder, parity_check, parity_check_target,
    simulate_standard_inputs, x_coeffs, y_coeffs, ControlPort, FredkinSolution,
};
use lopt::linalg::real;
use lopt::optimize::max_q;
use lopt::Complex64;
use proptest::prelude::*;
use rand::Rng;

/// A feasible solution with `q` a random fraction of its maximum.
fn random_solution(seed: u64, fraction: f64) -> Option<FredkinSolution> {
    let mut r = rng(seed);
    let scale = r.random_range(0.1..0.4);
    let u1 = random_row(&mut r, scale, true);
    let u2 = random_row(&mut r, scale, true);
    let m = max_q(&u1, &u2, 1e-12).ok()?;
    if m.infeasible || m.q < 1e-3 {
        return None;
    }
    FredkinSolution::from_rows(u1, u2, real(m.q * fraction)).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn closed_form_matches_fock_simulation(seed in any::<u64>(), sigma in 0.05f64..0.999) {
        let mut r = rng(seed);
        let sub = random_block(&mut r, sigma);
        let Completion::Unitary(u7) = complete_to_unitary(&sub).unwrap() else {
            return Err(TestCaseError::fail("embeddable block did not complete"));
        };
        let (x, y) = (x_coeffs(&sub), y_coeffs(&sub));
        let bx = conditional_amplitudes_oracle(&u7, ControlPort::H).unwrap();
        let by = conditional_amplitudes_oracle(&u7, ControlPort::V).unwrap();
        for n in 0..3 {
            prop_assert!((x[n] - bx[n]).norm() < 1e-10);
            prop_assert!((y[n] - by[n]).norm() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn any_valid_block_gives_the_gate(seed in any::<u64>(), fraction in 0.05f64..=1.0) {
        let Some(sol) = random_solution(seed, fraction) else { return Ok(()); };
        let expected = sol.q.norm_sqr().powi(2) / 4.0;
        for (_, run) in simulate_standard_inputs(&sol).unwrap() {
            prop_assert!(run.fidelity > 1.0 - 1e-8);
            prop_assert!(((run.success_probability - expected) / expected).abs() < 1e-8);
        }
    }

    #[test]
    fn halving_q_divides_probability_by_sixteen(seed in any::<u64>()) {
        let Some(full) = random_solution(seed, 1.0) else { return Ok(()); };
        let half = FredkinSolution::from_rows(full.u1, full.u2, full.q * 0.5).unwrap();
        let p = |s: &FredkinSolution| simulate_standard_inputs(s).unwrap()[7].1.success_probability;
        let ratio = p(&half) / p(&full);
        prop_assert!((ratio * 16.0 - 1.0).abs() < 1e-8, "ratio {}", ratio);
    }

    #[test]
    fn parity_check_ignores_the_input(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut probs = vec![];
        for _ in 0..50 {
            let (a, b) = (gaussian(&mut r), gaussian(&mut r));
            let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let res = parity_check(a / n, b / n).unwrap();
            let target = parity_check_target(a / n, b / n);
            let p = res.success_probability();
            let overlap: f64 = res.branches.iter().map(|(_, s)| s.inner(&target).norm_sqr()).sum();
            prop_assert!((overlap / p - 1.0).abs() < 1e-10);
            probs.push(p);
        }
        let mean = probs.iter().sum::<f64>() / probs.len() as f64;
        let var = probs.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / probs.len() as f64;
        prop_assert!((mean - 0.5).abs() < 1e-10);
        prop_assert!(var < 1e-10);
    }

    #[test]
    fn mach_zehnder_is_identity_without_phase(seed in any::<u64>()) {
        // two photons spread over [A_H, A_V, B_H, B_V]
        let mut r = rng(seed);
        let terms = [
            vec![1, 0, 1, 0], vec![1, 0, 0, 1], vec![0, 1, 1, 0], vec![0, 1, 0, 1],
        ]
        .map(|o| (FockState::new(o), gaussian(&mut r)));
        let s = PureState::from_terms(4, terms).unwrap().normalized().unwrap();
        let out = apply_unitary(&mach_zehnder(0.0).unwrap(), &s).unwrap();
        prop_assert!((out.inner(&s).norm_sqr() - 1.0).abs() < 1e-9);

        let swapped = apply_unitary(&mach_zehnder(std::f64::consts::PI).unwrap(), &s).unwrap();
        for (f, a) in s.iter() {
            let o = f.occupations();
            let g = FockState::new(vec![o[2], o[3], o[0], o[1]]);
            prop_assert!((swapped.amplitude(&g) - a).norm() < 1e-9);
        }
    }

    #[test]
    fn solution_json_round_trip(seed in any::<u64>()) {
        let Some(sol) = random_solution(seed, 0.7) else { return Ok(()); };
        let back = FredkinSolution::from_json(&sol.to_json()).unwrap();
        prop_assert_eq!(&back, &sol);
        prop_assert!(back.verify().is_ok());
        let _: Complex64 = back.q;
    }
}
