//! Test-side oracles and random instances, independent of the library's
//! own algorithms.
#![allow(dead_code)]

use std::collections::BTreeMap;

use lopt::circuits::Submatrix43;
use lopt::fock::{FockState, ModeUnitary, PureState};
use lopt::linalg::CMatrix;
use lopt::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))
}

pub fn gaussian_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(r))
}

/// Haar-ish unitary from the QR factorisation of a Gaussian matrix.
pub fn random_unitary(r: &mut ChaCha8Rng, n: usize) -> ModeUnitary {
    let qr = gaussian_matrix(r, n, n).qr();
    let (q, rr) = (qr.q(), qr.r());
    let phases = CMatrix::from_fn(n, n, |j, k| {
        if j == k {
            rr[(j, j)] / rr[(j, j)].norm()
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    ModeUnitary::new(q * phases).expect("QR factor is unitary")
}

/// Permanent by expansion along the first row.
pub fn permanent_brute(a: &CMatrix) -> Complex64 {
    fn go(a: &CMatrix, row: usize, used: &mut Vec<bool>) -> Complex64 {
        let n = a.nrows();
        if row == n {
            return Complex64::new(1.0, 0.0);
        }
        let mut s = Complex64::new(0.0, 0.0);
        for col in 0..n {
            if !used[col] {
                used[col] = true;
                s += a[(row, col)] * go(a, row + 1, used);
                used[col] = false;
            }
        }
        s
    }
    go(a, 0, &mut vec![false; a.nrows()])
}

fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

/// `⟨out| Û |in⟩` from expanding `∏ⱼ (Σₖ uⱼₖ a†ₖ)^{nⱼ} / √(∏ nⱼ!)` on the
/// vacuum as a polynomial in creation operators.
pub fn expansion_amplitude(u: &CMatrix, input: &[u8], output: &[u8]) -> Complex64 {
    let modes = u.nrows();
    let mut poly: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
    poly.insert(vec![0; modes], Complex64::new(1.0, 0.0));
    for (j, &n) in input.iter().enumerate() {
        for _ in 0..n {
            let mut next = BTreeMap::new();
            for (mono, c) in &poly {
                for k in 0..modes {
                    let mut m = mono.clone();
                    m[k] += 1;
                    *next.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c * u[(j, k)];
                }
            }
            poly = next;
        }
    }
    let norm_in: f64 = input.iter().map(|&n| factorial(n)).product();
    let coef = poly
        .get(output)
        .copied()
        .unwrap_or(Complex64::new(0.0, 0.0));
    let norm_out: f64 = output.iter().map(|&m| factorial(m)).product();
    coef * norm_out.sqrt() / norm_in.sqrt()
}

/// All occupation vectors of `modes` modes with at most `max` photons.
pub fn occupations_up_to(modes: usize, max: u8) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..modes {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u8>| {
                let used: u8 = v.iter().sum();
                (0..=max - used).map(move |n| {
                    let mut w = v.clone();
                    w.push(n);
                    w
                })
            })
            .collect();
    }
    out
}

/// Random superposition of Fock states with at most `max` photons each.
pub fn random_state(r: &mut ChaCha8Rng, modes: usize, max: u8, terms: usize) -> PureState {
    let all = occupations_up_to(modes, max);
    let picked = (0..terms).map(|_| {
        let occ = all[r.random_range(0..all.len())].clone();
        (FockState::new(occ), gaussian(r))
    });
    PureState::from_terms(modes, picked)
        .expect("matching mode count")
        .normalized()
        .unwrap_or_else(|| PureState::from_fock(FockState::vacuum(modes)))
}

/// Gaussian 4×3 block rescaled to the given largest singular value.
pub fn random_block(r: &mut ChaCha8Rng, sigma: f64) -> Submatrix43 {
    let m = gaussian_matrix(r, 4, 3);
    let s = m.singular_values().max();
    Submatrix43::from_matrix(&(m * Complex64::new(sigma / s, 0.0))).expect("4x3 shape")
}

pub fn random_row(r: &mut ChaCha8Rng, scale: f64, complex: bool) -> [Complex64; 3] {
    std::array::from_fn(|_| {
        let z = gaussian(r) * scale;
        if complex {
            z
        } else {
            Complex64::new(z.re, 0.0)
        }
    })
}
