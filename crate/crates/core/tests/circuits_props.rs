mod common;

use common::*;
use lopt::circuits::{beam_splitter, complete_to_unitary, is_embeddable, Completion, Submatrix43};
use lopt::fredkin::unit_rows;
use lopt::linalg::real;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn completion_verdict_matches_sigma_max(seed in any::<u64>(), sigma in 0.05f64..1.6) {
        let mut r = rng(seed);
        let sub = random_block(&mut r, sigma);
        let s = sub.sigma_max();
        let c = complete_to_unitary(&sub).unwrap();
        if (s - 1.0).abs() > 1e-8 {
            prop_assert_eq!(c.is_feasible(), s < 1.0);
            prop_assert_eq!(is_embeddable(&sub).embeddable, s < 1.0);
        }
        if let Completion::Unitary(u) = c {
            prop_assert!(u.deviation() < 1e-10);
            for j in 0..4 {
                for k in 0..3 {
                    prop_assert_eq!(u.entry(j, k).re.to_bits(), sub.u[j][k].re.to_bits());
                    prop_assert_eq!(u.entry(j, k).im.to_bits(), sub.u[j][k].im.to_bits());
                }
            }
        }
    }

    #[test]
    fn beam_splitter_is_a_rotation(t in 1e-9f64..=1.0) {
        let b = beam_splitter(t).unwrap();
        let m = b.matrix();
        for z in m.iter() {
            prop_assert_eq!(z.im, 0.0);
        }
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        prop_assert!((det.re - 1.0).abs() < 1e-14);
        prop_assert!(b.deviation() < 1e-14);
    }

    #[test]
    fn sigma_max_grows_with_q(seed in any::<u64>(), complex in any::<bool>()) {
        let mut r = rng(seed);
        let scale = r.random_range(0.05..0.5);
        let u1 = random_row(&mut r, scale, complex);
        let u2 = random_row(&mut r, scale, complex);
        let Ok((v3, v4)) = unit_rows(&u1, &u2) else { return Ok(()); };
        let mut last = 0.0;
        let q_top = 1.0 / v3.iter().chain(&v4).map(|z| z.norm()).fold(1e-300, f64::max);
        for i in 0..100 {
            let q = real(q_top * i as f64 / 99.0);
            let sub = Submatrix43::from_rows([u1, u2, v3.map(|z| z * q), v4.map(|z| z * q)]);
            let s = sub.sigma_max();
            prop_assert!(s >= last - 1e-12, "sigma fell from {} to {}", last, s);
            last = s;
        }
    }

    #[test]
    fn submatrix_json_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sub = random_block(&mut r, 0.7);
        prop_assert_eq!(Submatrix43::from_json(&sub.to_json()).unwrap(), sub);
    }
}

#[test]
fn rejects_bad_transmittance() {
    for t in [0.0, -0.1, 1.0000001, f64::NAN] {
        assert!(beam_splitter(t).is_err());
    }
}
