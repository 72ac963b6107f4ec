//! N-qubit controlled-phase gate in the coincidence basis.
//!
//! Each qubit is a photon in two rails, `|0̃⟩ = |01⟩_{L,R}` and
//! `|1̃⟩ = |10⟩_{L,R}`. Every L rail passes a `T1` splitter whose reflected
//! arm meets the L rail of the next qubit (cyclically) on a `T2` splitter;
//! the arm wrapping from the last qubit to the first carries the phase `ψ`.
//! Every R rail is attenuated by a `T3` splitter into a dump mode. The gate
//! succeeds when each qubit's rail pair holds exactly one photon and all
//! auxiliary and dump modes are empty.
//!
//! The Toffoli gate follows by Hadamard conjugation of the target,
//! `U_T = H_N · U_CP · H_N`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::circuits::{beam_splitter, compose, embed, phase_shifter};
use crate::error::{Error, Result};
use crate::fock::{apply_unitary, post_select, DetectionPattern, FockState, ModeUnitary, PureState};
use crate::linalg::{kron, real, wrap_angle, CMatrix, ONE, ZERO};

/// Largest register simulated in full (4N modes, N photons).
pub const MAX_SIMULATED_QUBITS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CPhaseDesign {
    pub qubits: usize,
    /// Target conditional phase on `|1̃…1̃⟩`.
    pub phi: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    /// Phase on the wrap-around arm.
    pub psi: f64,
}

impl CPhaseDesign {
    /// `T1ᴺ·T2ᴺ`, the success probability when the design equations hold.
    pub fn success_probability(&self) -> f64 {
        (self.t1 * self.t2).powi(self.qubits as i32)
    }

    /// Checks the three design equations: `T3 = T1·T2`, the transmittance
    /// balance against `sin²(φ/2)`, and the complex interference condition
    /// that fixes `ψ`.
    pub fn check(&self) -> Result<()> {
        let n = self.qubits as i32;
        if (self.t3 - self.t1 * self.t2).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "T3 = {} differs from T1·T2 = {}",
                self.t3,
                self.t1 * self.t2
            )));
        }
        let s2 = (self.phi / 2.0).sin().powi(2);
        let lhs = 4.0 * (self.t1 * self.t2).powi(n) * s2;
        let rhs = ((1.0 - self.t1) * (1.0 - self.t2)).powi(n);
        if (lhs - rhs).abs() > 1e-10 {
            return Err(Error::Domain(format!(
                "transmittance balance violated: {lhs} vs {rhs}"
            )));
        }
        let (a, b) = self.path_amplitudes();
        let lhs = Complex64::from_polar(a, self.phi);
        let rhs = a + Complex64::from_polar(b, self.psi);
        if (lhs - rhs).norm() > 1e-10 {
            return Err(Error::Domain(format!(
                "phase ψ = {} does not produce e^(iφ) on the all-L input",
                self.psi
            )));
        }
        Ok(())
    }

    /// `(t1ᴺ t2ᴺ, r1ᴺ r2ᴺ)`: the all-transmitted and all-reflected path
    /// amplitudes.
    fn path_amplitudes(&self) -> (f64, f64) {
        let n = self.qubits as i32;
        let tt = (self.t1 * self.t2).sqrt().powi(n);
        let rr = ((1.0 - self.t1) * (1.0 - self.t2)).sqrt().powi(n);
        (tt, rr)
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("at least one qubit is required".into()));
    }
    Ok(())
}

fn check_phase(phi: f64) -> Result<()> {
    if !phi.is_finite() {
        return Err(Error::InvalidArgument(format!("phase {phi} is not finite")));
    }
    Ok(())
}

/// Wrap-arm phase solving `e^{iφ}·a = a + e^{iψ}·b` for real positive
/// `a, b`: `ψ = arg(e^{iφ} − 1)`. For `φ ∈ (0, 2π)` this is `φ/2 + π/2`,
/// the branch of `tan ψ = −1/tan(φ/2)` with the right sign; `φ = π` gives
/// `ψ = π`. Negative phases give the conjugate network.
pub fn wrap_phase(phi: f64) -> f64 {
    let z = Complex64::from_polar(1.0, phi) - ONE;
    if z.norm() < 1e-300 {
        PI / 2.0
    } else {
        z.arg()
    }
}

/// `(4 sin²(φ/2))^{1/N}`.
fn balance_constant(n: usize, phi: f64) -> f64 {
    (4.0 * (phi / 2.0).sin().powi(2)).powf(1.0 / n as f64)
}

/// T2 that satisfies the transmittance balance for a given T1.
fn matching_t2(n: usize, phi: f64, t1: f64) -> Result<f64> {
    if !(t1 > 0.0 && t1 <= 1.0) {
        return Err(Error::Domain(format!("T1 = {t1} outside (0, 1]")));
    }
    let c = balance_constant(n, phi);
    let t2 = (1.0 - t1) / (1.0 - t1 + c * t1);
    if !(t2 > 0.0 && t2 <= 1.0) {
        return Err(Error::Domain(format!(
            "no admissible T2 for T1 = {t1} at φ = {phi}"
        )));
    }
    Ok(t2)
}

/// Optimal design `T1 = T2 = 1/(1 + |2 sin(φ/2)|^{1/N})`, `T3 = T1·T2`.
pub fn design_cphase(n: usize, phi: f64) -> Result<CPhaseDesign> {
    check_qubits(n)?;
    check_phase(phi)?;
    let t = 1.0 / (1.0 + (2.0 * (phi / 2.0).sin()).abs().powf(1.0 / n as f64));
    Ok(CPhaseDesign {
        qubits: n,
        phi,
        t1: t,
        t2: t,
        t3: t * t,
        psi: wrap_phase(phi),
    })
}

/// Design with a chosen `T1`; `T2` follows from the transmittance balance.
pub fn design_with_t1(n: usize, phi: f64, t1: f64) -> Result<CPhaseDesign> {
    check_qubits(n)?;
    check_phase(phi)?;
    let t2 = matching_t2(n, phi, t1)?;
    Ok(CPhaseDesign {
        qubits: n,
        phi,
        t1,
        t2,
        t3: t1 * t2,
        psi: wrap_phase(phi),
    })
}

/// `[T1(1−T1) / (1 − T1 + (4 sin²(φ/2))^{1/N} T1)]ᴺ`, i.e. `T1ᴺ T2ᴺ` with
/// `T2` from the transmittance balance.
pub fn success_probability(n: usize, phi: f64, t1: f64) -> Result<f64> {
    check_qubits(n)?;
    check_phase(phi)?;
    matching_t2(n, phi, t1)?;
    let c = balance_constant(n, phi);
    Ok((t1 * (1.0 - t1) / (1.0 - t1 + c * t1)).powi(n as i32))
}

/// Mode layout of the network: qubit `j` owns modes `4j..4j+4` as
/// `(L, R, aux, dump)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualRailRegister {
    /// `(L, R)` per qubit. A photon in L is `|1̃⟩`.
    pub qubits: Vec<(usize, usize)>,
    pub aux: Vec<usize>,
    pub dump: Vec<usize>,
}

impl DualRailRegister {
    pub fn new(n: usize) -> Self {
        Self {
            qubits: (0..n).map(|j| (4 * j, 4 * j + 1)).collect(),
            aux: (0..n).map(|j| 4 * j + 2).collect(),
            dump: (0..n).map(|j| 4 * j + 3).collect(),
        }
    }

    pub fn mode_count(&self) -> usize {
        4 * self.qubits.len()
    }

    /// Fock state of a logical basis state; qubit 0 is the most significant
    /// bit of `index`.
    pub fn encode(&self, index: usize) -> FockState {
        let n = self.qubits.len();
        let mut occ = vec![0u8; self.mode_count()];
        for (j, &(l, r)) in self.qubits.iter().enumerate() {
            if logical_bit(index, j, n) {
                occ[l] = 1;
            } else {
                occ[r] = 1;
            }
        }
        FockState::new(occ)
    }

    /// Detection pattern requiring empty auxiliary and dump modes. The
    /// surviving modes are `[L0, R0, L1, R1, …]`.
    pub fn vacuum_pattern(&self) -> DetectionPattern {
        self.aux
            .iter()
            .chain(&self.dump)
            .fold(DetectionPattern::unmeasured(self.mode_count()), |p, &m| p.exact(m, 0))
    }
}

/// Bit of qubit `j` (qubit 0 most significant) in an `n`-qubit basis index.
pub fn logical_bit(index: usize, j: usize, n: usize) -> bool {
    (index >> (n - 1 - j)) & 1 == 1
}

/// Decodes rails `[L0, R0, L1, R1, …]` with exactly one photon per pair.
fn decode_pairs(f: &FockState) -> Option<usize> {
    let occ = f.occupations();
    let mut index = 0usize;
    for pair in occ.chunks(2) {
        index <<= 1;
        match pair {
            [1, 0] => index |= 1,
            [0, 1] => {}
            _ => return None,
        }
    }
    Some(index)
}

/// Full mode unitary of the network and its mode layout.
pub fn build_cphase_network(d: &CPhaseDesign) -> Result<(ModeUnitary, DualRailRegister)> {
    check_qubits(d.qubits)?;
    let n = d.qubits;
    let reg = DualRailRegister::new(n);
    let modes = reg.mode_count();
    let s1 = beam_splitter(d.t1)?;
    let s2 = beam_splitter(d.t2)?;
    let s3 = beam_splitter(d.t3)?;

    let mut elements = Vec::with_capacity(3 * n + 1);
    for j in 0..n {
        elements.push(embed(&s1, &[reg.qubits[j].0, reg.aux[j]], modes)?);
    }
    elements.push(embed(&phase_shifter(d.psi), &[reg.aux[n - 1]], modes)?);
    for j in 0..n {
        let next_l = reg.qubits[(j + 1) % n].0;
        elements.push(embed(&s2, &[reg.aux[j], next_l], modes)?);
    }
    for j in 0..n {
        elements.push(embed(&s3, &[reg.qubits[j].1, reg.dump[j]], modes)?);
    }
    Ok((compose(&elements)?, reg))
}

/// Closed-form coincidence amplitude of a logical basis state (qubit 0 most
/// significant): `(t1 t2)^{N−n} t3ⁿ` when `n ≥ 1` qubits are `|0̃⟩`, and
/// `t1ᴺt2ᴺ + e^{iψ} r1ᴺr2ᴺ` for `|1̃…1̃⟩`.
pub fn analytic_amplitude(d: &CPhaseDesign, index: usize) -> Complex64 {
    let n = d.qubits;
    let zeros = (0..n).filter(|&j| !logical_bit(index, j, n)).count();
    if zeros == 0 {
        let (a, b) = d.path_amplitudes();
        real(a) + Complex64::from_polar(b, d.psi)
    } else {
        let tt = (d.t1 * d.t2).sqrt();
        real(tt.powi((n - zeros) as i32) * d.t3.sqrt().powi(zeros as i32))
    }
}

/// `diag(1, …, 1, e^{iφ})` on `n` qubits.
pub fn ideal_cphase(n: usize, phi: f64) -> CMatrix {
    let dim = 1 << n;
    let mut m = CMatrix::identity(dim, dim);
    m[(dim - 1, dim - 1)] = Complex64::from_polar(1.0, phi);
    m
}

/// Post-selected logical action of a simulated network.
#[derive(Debug, Clone)]
pub struct EffectiveGate {
    pub qubits: usize,
    /// `A[out][in]`: coincidence amplitude of logical output `out` for
    /// logical input `in`.
    pub matrix: CMatrix,
    /// `tr(A†A)/2ᴺ`, the basis-averaged success probability.
    pub success_probability: f64,
    /// `|tr(A† U)|² / (2ᴺ tr(A†A))` against the ideal gate.
    pub fidelity: f64,
}

impl EffectiveGate {
    /// Phase of the `|1̃…1̃⟩` diagonal entry relative to `|0̃…0̃⟩`, in `(−π, π]`.
    pub fn conditional_phase(&self) -> f64 {
        let last = self.matrix.nrows() - 1;
        wrap_angle((self.matrix[(last, last)] / self.matrix[(0, 0)]).arg())
    }
}

/// Gate fidelity `|tr(A†U)|² / (d·tr(A†A))` of a post-selected map `A`.
pub fn gate_fidelity(a: &CMatrix, ideal: &CMatrix) -> f64 {
    let dim = a.nrows() as f64;
    let overlap = (a.adjoint() * ideal).trace();
    let weight = (a.adjoint() * a).trace().re;
    if weight <= 0.0 {
        return 0.0;
    }
    overlap.norm_sqr() / (dim * weight)
}

/// Simulates every logical basis input through the network, keeps the
/// coincidence events and assembles the logical map.
pub fn effective_gate(d: &CPhaseDesign) -> Result<EffectiveGate> {
    let n = d.qubits;
    check_qubits(n)?;
    if n > MAX_SIMULATED_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "full simulation is capped at {MAX_SIMULATED_QUBITS} qubits, got {n}"
        )));
    }
    let (u, reg) = build_cphase_network(d)?;
    let pattern = reg.vacuum_pattern();
    let dim = 1usize << n;

    let columns: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|input| -> Result<Vec<Complex64>> {
            let out = apply_unitary(&u, &PureState::from_fock(reg.encode(input)))?;
            let kept = post_select(&out, &pattern)?;
            let mut col = vec![ZERO; dim];
            for (f, a) in kept.iter() {
                if let Some(o) = decode_pairs(f) {
                    col[o] += a;
                }
            }
            Ok(col)
        })
        .collect::<Result<_>>()?;

    let matrix = CMatrix::from_fn(dim, dim, |o, i| columns[i][o]);
    let ideal = ideal_cphase(n, d.phi);
    let success_probability = (matrix.adjoint() * &matrix).trace().re / dim as f64;
    let fidelity = gate_fidelity(&matrix, &ideal);
    Ok(EffectiveGate {
        qubits: n,
        matrix,
        success_probability,
        fidelity,
    })
}

/// Controlled-U expressed through a conditional phase: `V` rotates the
/// eigenbasis of `U` onto the computational basis, a C-phase by
/// `Δφ = φ₁ − φ₀` acts, `V†` undoes the rotation and the control picks up
/// `e^{iφ₀}`.
#[derive(Debug, Clone)]
pub struct ControlledUDecomposition {
    pub v: CMatrix,
    pub phi0: f64,
    pub delta_phi: f64,
}

impl ControlledUDecomposition {
    /// `(P(φ₀) ⊗ V†) · CP(Δφ) · (I ⊗ V)` on `|control, target⟩`.
    pub fn reconstruct(&self) -> CMatrix {
        let i2 = CMatrix::identity(2, 2);
        let mut p = CMatrix::identity(2, 2);
        p[(1, 1)] = Complex64::from_polar(1.0, self.phi0);
        kron(&p, &self.v.adjoint()) * ideal_cphase(2, self.delta_phi) * kron(&i2, &self.v)
    }
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U`.
pub fn controlled(u: &CMatrix) -> CMatrix {
    let mut m = CMatrix::identity(4, 4);
    for r in 0..2 {
        for c in 0..2 {
            m[(2 + r, 2 + c)] = u[(r, c)];
        }
    }
    m
}

/// Eigen-decomposition of a 2×2 unitary into the controlled-phase form.
///
/// Eigenvalues are ordered by principal argument, so `Δφ ∈ [0, 2π)`;
/// a diagonal `U` keeps the computational basis (`V = I`). Eigenvectors are
/// phased so their first non-zero component is real and positive.
pub fn decompose_controlled_u(u: &CMatrix) -> Result<ControlledUDecomposition> {
    if u.shape() != (2, 2) {
        return Err(Error::InvalidArgument(format!(
            "expected a 2x2 matrix, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    ModeUnitary::new(u.clone())?;
    let (a, b, c, d) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);

    if b.norm() < 1e-12 && c.norm() < 1e-12 {
        let phi0 = a.arg();
        return Ok(ControlledUDecomposition {
            v: CMatrix::identity(2, 2),
            phi0,
            delta_phi: (d.arg() - phi0).rem_euclid(2.0 * PI),
        });
    }

    let half_tr = (a + d) / 2.0;
    let disc = (half_tr * half_tr - (a * d - b * c)).sqrt();
    let mut eig = [half_tr + disc, half_tr - disc];
    eig.sort_by(|x, y| wrap_angle(x.arg()).total_cmp(&wrap_angle(y.arg())));

    let vectors: Vec<[Complex64; 2]> = eig
        .iter()
        .map(|&lambda| {
            // (U − λ)v = 0; pick the better-conditioned of the two row solutions.
            let v1 = [b, lambda - a];
            let v2 = [lambda - d, c];
            let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
            let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
            let (v, norm) = if n1 >= n2 { (v1, n1.sqrt()) } else { (v2, n2.sqrt()) };
            let lead = if v[0].norm() > 1e-12 { v[0] } else { v[1] };
            let phase = lead.conj() / lead.norm();
            [v[0] * phase / norm, v[1] * phase / norm]
        })
        .collect();

    let v = CMatrix::from_fn(2, 2, |j, k| vectors[j][k].conj());
    let phi0 = eig[0].arg();
    Ok(ControlledUDecomposition {
        v,
        phi0,
        delta_phi: (eig[1].arg() - phi0).rem_euclid(2.0 * PI),
    })
}
