//! Fredkin gate from two post-selected conditional-phase blocks.
//!
//! Qubits are polarisation encoded, `|0̃⟩ = H` and `|1̃⟩ = V`. Targets A and B
//! enter a balanced Mach–Zehnder interferometer; a π phase on its left arm
//! exchanges them. The phase is applied by two identical blocks, one on the
//! V and one on the H mode of the left arm, each controlled by a copy of the
//! control photon produced by a parity check.
//!
//! A block is a 7-mode interferometer with inputs
//! `1` (signal mode), `2` (single photon), `3`/`4` (parity-check photon for
//! control H/V) and `5–7` (vacuum). It succeeds when outputs 2 and 3 hold one
//! photon each and outputs 4–7 are empty. Writing `x_n` (`y_n`) for the
//! post-selected amplitude with `n` signal photons and the ancilla in port 3
//! (4), the block is a conditional π phase when `x_n = q` and `y_n = (−1)ⁿ q`.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{beam_splitter, complete_to_unitary, is_embeddable, Completion, Submatrix43};
use crate::error::{Error, Result};
use crate::fock::{
    apply_on_modes, apply_unitary, post_select, DetectionPattern, FockState, ModeUnitary,
    PureState,
};
use crate::linalg::{real, CMatrix, ONE, ZERO};

pub type Row3 = [Complex64; 3];

/// Tolerance on the block conditions `x = (q, q, q)`, `y = (q, −q, q)`.
pub const CONDITION_TOL: f64 = 1e-10;
/// `|det M|` below this is treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

/// Mode pair of one polarisation-encoded photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolarizationQubit {
    pub h: usize,
    pub v: usize,
}

/// Block input port carrying the copied control: 3 for H, 4 for V.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlPort {
    H,
    V,
}

impl ControlPort {
    /// Zero-based input mode of the 7-mode block.
    pub fn mode(self) -> usize {
        match self {
            ControlPort::H => 2,
            ControlPort::V => 3,
        }
    }
}

/// Post-selected block amplitudes `(c₀, c₁, c₂)` for rows `u1`, `u2` and the
/// ancilla row `r` (row 3 gives `x`, row 4 gives `y`).
pub fn block_coefficients(u1: &Row3, u2: &Row3, r: &Row3) -> Row3 {
    let [u11, u12, u13] = *u1;
    let [u21, u22, u23] = *u2;
    let [u31, u32, u33] = *r;
    let x0 = u22 * u33 + u23 * u32;
    let x1 = u11 * (u22 * u33 + u23 * u32)
        + u12 * (u23 * u31 + u21 * u33)
        + u13 * (u22 * u31 + u21 * u32);
    let x2 = u11 * u11 * (u33 * u22 + u32 * u23)
        + 2.0 * u12 * u13 * u21 * u31
        + 2.0 * u11 * u12 * (u23 * u31 + u21 * u33)
        + 2.0 * u11 * u13 * (u22 * u31 + u21 * u32);
    [x0, x1, x2]
}

/// Amplitudes with the control copy in port 3.
pub fn x_coeffs(sub: &Submatrix43) -> Row3 {
    block_coefficients(&sub.u[0], &sub.u[1], &sub.u[2])
}

/// Amplitudes with the control copy in port 4.
pub fn y_coeffs(sub: &Submatrix43) -> Row3 {
    block_coefficients(&sub.u[0], &sub.u[1], &sub.u[3])
}

/// Coefficient matrix of the block amplitudes as linear forms in the ancilla
/// row: `block_coefficients(u1, u2, r) = M · r`.
pub fn design_matrix(u1: &Row3, u2: &Row3) -> Matrix3<Complex64> {
    let [u11, u12, u13] = *u1;
    let [u21, u22, u23] = *u2;
    let two = real(2.0);
    Matrix3::new(
        ZERO,
        u23,
        u22,
        u12 * u23 + u13 * u22,
        u11 * u23 + u13 * u21,
        u11 * u22 + u12 * u21,
        two * (u12 * u13 * u21 + u11 * u12 * u23 + u11 * u13 * u22),
        u11 * u11 * u23 + two * u11 * u13 * u21,
        u11 * u11 * u22 + two * u11 * u12 * u21,
    )
}

/// Unit-`q` solutions `(v3, v4)` with `M v3 = (1, 1, 1)`, `M v4 = (1, −1, 1)`.
/// Rows 3 and 4 for shrink factor `q` are `q·v3` and `q·v4`.
pub fn unit_rows(u1: &Row3, u2: &Row3) -> Result<(Row3, Row3)> {
    let m = design_matrix(u1, u2);
    let det = m.determinant().norm();
    if !(det >= SINGULAR_TOL) {
        return Err(Error::Singular { det });
    }
    let lu = m.lu();
    let solve = |rhs: Vector3<Complex64>| -> Result<Row3> {
        let v = lu.solve(&rhs).ok_or(Error::Singular { det })?;
        Ok([v[0], v[1], v[2]])
    };
    Ok((
        solve(Vector3::new(ONE, ONE, ONE))?,
        solve(Vector3::new(ONE, -ONE, ONE))?,
    ))
}

/// Rows 3 and 4 that make the block a conditional π phase with shrink
/// factor `q`.
pub fn solve_for_rows(u1: &Row3, u2: &Row3, q: Complex64) -> Result<(Row3, Row3)> {
    let (v3, v4) = unit_rows(u1, u2)?;
    Ok((v3.map(|z| z * q), v4.map(|z| z * q)))
}

/// Closed-form family with `u11 = u12 = u13` and `u21 = −u22 = u23`.
pub fn analytic_submatrix(u11: f64, u22: f64, q: Complex64) -> Result<Submatrix43> {
    if u11 == 0.0 || u22 == 0.0 || !u11.is_finite() || !u22.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "analytic family needs finite non-zero u11, u22 (got {u11}, {u22})"
        )));
    }
    let a = u11;
    let b = u22;
    let base = q / (2.0 * a * b);
    let u1 = [real(a); 3];
    let u2 = [real(-b), real(b), real(-b)];
    let u3 = [
        -base * (1.0 - a).powi(2) / a,
        -base,
        base * (2.0 * a - 1.0),
    ];
    let u4 = [
        -base * (1.0 + a).powi(2) / a,
        base,
        base * (2.0 * a + 1.0),
    ];
    Ok(Submatrix43::from_rows([u1, u2, u3, u4]))
}

/// Brute-force block amplitudes: `|n⟩₁|1⟩₂` plus one photon in the control
/// port go through `U7`; keep one photon in outputs 2 and 3, none in 4–7.
pub fn conditional_amplitudes_oracle(u7: &ModeUnitary, port: ControlPort) -> Result<Row3> {
    if u7.size() != 7 {
        return Err(Error::DimensionMismatch {
            expected: 7,
            found: u7.size(),
        });
    }
    ModeUnitary::new(u7.matrix().clone())?;
    let pattern = (1..7).fold(DetectionPattern::unmeasured(7), |p, m| {
        p.exact(m, if m <= 2 { 1 } else { 0 })
    });
    let mut out = [ZERO; 3];
    for (n, slot) in out.iter_mut().enumerate() {
        let mut occ = vec![0u8; 7];
        occ[0] = n as u8;
        occ[1] = 1;
        occ[port.mode()] = 1;
        let evolved = apply_unitary(u7, &PureState::from_fock(FockState::new(occ)))?;
        let kept = post_select(&evolved, &pattern)?;
        *slot = kept.amplitude(&FockState::new(vec![n as u8]));
    }
    Ok(out)
}

fn condition_error(sub: &Submatrix43, q: Complex64) -> f64 {
    let x = x_coeffs(sub);
    let y = y_coeffs(sub);
    let target_y = [q, -q, q];
    (0..3)
        .map(|n| (x[n] - q).norm().max((y[n] - target_y[n]).norm()))
        .fold(0.0, f64::max)
}

/// A conditional-phase block: its defining 4×3 block, shrink factor, and a
/// completed 7×7 interferometer.
#[derive(Debug, Clone)]
pub struct CPSBlock {
    pub sub: Submatrix43,
    pub q: Complex64,
    pub unitary: ModeUnitary,
}

impl CPSBlock {
    pub fn new(sub: Submatrix43, q: Complex64) -> Result<Self> {
        let err = condition_error(&sub, q);
        if !(err <= CONDITION_TOL) {
            return Err(Error::Domain(format!(
                "block conditions violated by {err:.3e}"
            )));
        }
        match complete_to_unitary(&sub)? {
            Completion::Unitary(unitary) => Ok(Self { sub, q, unitary }),
            Completion::Infeasible { row, radicand } => Err(Error::Domain(format!(
                "block does not embed in a unitary (row {row}, radicand {radicand:.3e})"
            ))),
        }
    }
}

/// Rows of a Fredkin block design together with its shrink factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FredkinSolution {
    pub u1: Row3,
    pub u2: Row3,
    pub u3: Row3,
    pub u4: Row3,
    pub q: Complex64,
    /// `|q|⁴/4`: two blocks and two parity checks.
    pub p_succ: f64,
    pub sigma_max: f64,
}

impl FredkinSolution {
    /// Solves for rows 3–4 and fills in the derived fields.
    pub fn from_rows(u1: Row3, u2: Row3, q: Complex64) -> Result<Self> {
        let (u3, u4) = solve_for_rows(&u1, &u2, q)?;
        Ok(Self::from_submatrix(&Submatrix43::from_rows([u1, u2, u3, u4]), q))
    }

    pub fn from_submatrix(sub: &Submatrix43, q: Complex64) -> Self {
        Self {
            u1: sub.u[0],
            u2: sub.u[1],
            u3: sub.u[2],
            u4: sub.u[3],
            q,
            p_succ: success_probability(q),
            sigma_max: sub.sigma_max(),
        }
    }

    pub fn submatrix(&self) -> Submatrix43 {
        Submatrix43::from_rows([self.u1, self.u2, self.u3, self.u4])
    }

    /// Re-checks the block conditions, embeddability and `P = |q|⁴/4`.
    pub fn verify(&self) -> Result<()> {
        let sub = self.submatrix();
        let err = condition_error(&sub, self.q);
        if !(err <= CONDITION_TOL) {
            return Err(Error::Domain(format!(
                "block conditions violated by {err:.3e}"
            )));
        }
        let e = is_embeddable(&sub);
        if !e.embeddable {
            return Err(Error::Domain(format!(
                "block is not embeddable (σ_max = {})",
                e.sigma_max
            )));
        }
        if (self.p_succ - success_probability(self.q)).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "P_succ = {} inconsistent with |q|⁴/4 = {}",
                self.p_succ,
                success_probability(self.q)
            )));
        }
        Ok(())
    }

    pub fn block(&self) -> Result<CPSBlock> {
        CPSBlock::new(self.submatrix(), self.q)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SolutionJson::from(self)).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SolutionJson =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(raw.into())
    }
}

/// `|q|⁴/4`.
pub fn success_probability(q: Complex64) -> f64 {
    q.norm_sqr().powi(2) / 4.0
}

type Pair = [f64; 2];

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn unpair(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// On-disk form: complex numbers as `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionJson {
    pub u1: [Pair; 3],
    pub u2: [Pair; 3],
    pub u3: [Pair; 3],
    pub u4: [Pair; 3],
    pub q: Pair,
    #[serde(rename = "P_succ")]
    pub p_succ: f64,
    pub sigma_max: f64,
}

impl From<&FredkinSolution> for SolutionJson {
    fn from(s: &FredkinSolution) -> Self {
        Self {
            u1: s.u1.map(pair),
            u2: s.u2.map(pair),
            u3: s.u3.map(pair),
            u4: s.u4.map(pair),
            q: pair(s.q),
            p_succ: s.p_succ,
            sigma_max: s.sigma_max,
        }
    }
}

impl From<SolutionJson> for FredkinSolution {
    fn from(s: SolutionJson) -> Self {
        Self {
            u1: s.u1.map(unpair),
            u2: s.u2.map(unpair),
            u3: s.u3.map(unpair),
            u4: s.u4.map(unpair),
            q: unpair(s.q),
            p_succ: s.p_succ,
            sigma_max: s.sigma_max,
        }
    }
}

// ---------------------------------------------------------------------------
// Optical register bookkeeping for the end-to-end simulation.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Photon {
    C,
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Mode {
    Qubit(Photon, Polarization),
    /// EPR photon coupled to the control on the PBS.
    EprA(usize, Polarization),
    /// EPR photon routed to block ports 3 (H) and 4 (V).
    EprB(usize, Polarization),
    /// Block port 2.
    Single(usize),
    /// Block ports 5–7.
    Vacuum(usize, u8),
}

/// A state together with the labels of its modes.
#[derive(Debug, Clone)]
struct Register {
    labels: Vec<Mode>,
    state: PureState,
}

impl Register {
    fn index(&self, label: Mode) -> usize {
        self.labels
            .iter()
            .position(|&l| l == label)
            .unwrap_or_else(|| panic!("mode {label:?} not in register"))
    }

    fn apply(&self, u: &ModeUnitary, on: &[Mode]) -> Result<Register> {
        let modes: Vec<usize> = on.iter().map(|&l| self.index(l)).collect();
        Ok(Register {
            labels: self.labels.clone(),
            state: apply_on_modes(u, &modes, &self.state)?,
        })
    }

    fn phase(&self, label: Mode, phase: f64) -> Register {
        Register {
            labels: self.labels.clone(),
            state: self.state.phase_on_mode(self.index(label), phase),
        }
    }

    /// Post-selects exact counts and drops the measured modes.
    fn detect(&self, counts: &[(Mode, u8)]) -> Result<Register> {
        let pattern = counts.iter().fold(
            DetectionPattern::unmeasured(self.labels.len()),
            |p, &(l, n)| p.exact(self.index(l), n),
        );
        let state = post_select(&self.state, &pattern)?;
        let labels = self
            .labels
            .iter()
            .copied()
            .filter(|l| !counts.iter().any(|(m, _)| m == l))
            .collect();
        Ok(Register { labels, state })
    }
}

fn swap_unitary() -> ModeUnitary {
    ModeUnitary::new(CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]))
        .expect("swap is unitary")
}

/// Which detector behind the ±45° analyser fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityOutcome {
    /// First analyser output; needs a π phase on the control's V mode.
    Diagonal,
    AntiDiagonal,
}

const PARITY_OUTCOMES: [ParityOutcome; 2] = [ParityOutcome::Diagonal, ParityOutcome::AntiDiagonal];

/// Parity check between the control and EPR photon `a` of block `block`:
/// PBS (exchange of the two V modes), ±45° analysis of the PBS output that
/// does not continue as the control, one photon in exactly one detector,
/// and a feed-forward π phase on the control's V mode after the
/// [`ParityOutcome::Diagonal`] click.
fn parity_check_on(reg: &Register, block: usize) -> Result<Vec<(ParityOutcome, Register)>> {
    use Polarization::{H, V};
    let cv = Mode::Qubit(Photon::C, V);
    let (ah, av) = (Mode::EprA(block, H), Mode::EprA(block, V));
    let after_pbs = reg.apply(&swap_unitary(), &[cv, av])?;
    let analysed = after_pbs.apply(&beam_splitter(0.5)?, &[ah, av])?;
    PARITY_OUTCOMES
        .iter()
        .map(|&outcome| {
            let clicks = match outcome {
                ParityOutcome::Diagonal => [(ah, 1), (av, 0)],
                ParityOutcome::AntiDiagonal => [(ah, 0), (av, 1)],
            };
            let kept = analysed.detect(&clicks)?;
            let fixed = match outcome {
                ParityOutcome::Diagonal => kept.phase(cv, std::f64::consts::PI),
                ParityOutcome::AntiDiagonal => kept,
            };
            Ok((outcome, fixed))
        })
        .collect()
}

/// `(|VV⟩ + |HH⟩)/√2` on modes `[a_H, a_V, b_H, b_V]`.
fn epr_pair() -> PureState {
    let h = real(std::f64::consts::FRAC_1_SQRT_2);
    PureState::from_terms(
        4,
        [
            (FockState::new(vec![0, 1, 0, 1]), h),
            (FockState::new(vec![1, 0, 1, 0]), h),
        ],
    )
    .expect("four-mode terms")
}

/// Parity check outcome branches over modes `[C_H, C_V, port 3, port 4]`.
#[derive(Debug, Clone)]
pub struct ParityCheckResult {
    pub branches: Vec<(ParityOutcome, PureState)>,
}

impl ParityCheckResult {
    pub fn success_probability(&self) -> f64 {
        self.branches.iter().map(|(_, s)| s.norm_sqr()).sum()
    }
}

/// Copies the control `α|V⟩ + β|H⟩` onto an EPR photon:
/// `α|V⟩_C|0⟩₃|1⟩₄ + β|H⟩_C|1⟩₃|0⟩₄`, each accepted outcome with
/// probability 1/4.
pub fn parity_check(alpha: Complex64, beta: Complex64) -> Result<ParityCheckResult> {
    use Polarization::{H, V};
    let control = PureState::from_terms(
        2,
        [
            (FockState::new(vec![1, 0]), beta),
            (FockState::new(vec![0, 1]), alpha),
        ],
    )?;
    let reg = Register {
        labels: vec![
            Mode::Qubit(Photon::C, H),
            Mode::Qubit(Photon::C, V),
            Mode::EprA(0, H),
            Mode::EprA(0, V),
            Mode::EprB(0, H),
            Mode::EprB(0, V),
        ],
        state: control.tensor(&epr_pair()),
    };
    let branches = parity_check_on(&reg, 0)?
        .into_iter()
        .map(|(o, r)| (o, r.state))
        .collect();
    Ok(ParityCheckResult { branches })
}

/// Ideal right-hand side of the parity check, `α|0101⟩ + β|1010⟩` on
/// `[C_H, C_V, port 3, port 4]`.
pub fn parity_check_target(alpha: Complex64, beta: Complex64) -> PureState {
    PureState::from_terms(
        4,
        [
            (FockState::new(vec![0, 1, 0, 1]), alpha),
            (FockState::new(vec![1, 0, 1, 0]), beta),
        ],
    )
    .expect("four-mode terms")
}

/// Balanced Mach–Zehnder interferometer on `[A_H, A_V, B_H, B_V]` with an
/// optional phase on both left-arm (A-slot) modes between the splitters.
pub fn mach_zehnder(arm_phase: f64) -> Result<ModeUnitary> {
    use crate::circuits::{compose, embed, phase_shifter};
    let bs = beam_splitter(0.5)?;
    let ps = phase_shifter(arm_phase);
    compose(&[
        embed(&bs, &[0, 2], 4)?,
        embed(&bs, &[1, 3], 4)?,
        embed(&ps, &[0], 4)?,
        embed(&ps, &[1], 4)?,
        embed(&bs.adjoint(), &[0, 2], 4)?,
        embed(&bs.adjoint(), &[1, 3], 4)?,
    ])
}

/// Logical index `4c + 2a + b` → index after the controlled swap.
pub fn fredkin_index(index: usize) -> usize {
    let (c, a, b) = ((index >> 2) & 1, (index >> 1) & 1, index & 1);
    if c == 1 {
        (c << 2) | (b << 1) | a
    } else {
        index
    }
}

/// Ideal Fredkin action on a logical 3-qubit vector.
pub fn ideal_fredkin(input: &[Complex64; 8]) -> [Complex64; 8] {
    let mut out = [ZERO; 8];
    for (i, a) in input.iter().enumerate() {
        out[fredkin_index(i)] += a;
    }
    out
}

/// Fock encoding of a logical state over `[C_H, C_V, A_H, A_V, B_H, B_V]`.
pub fn encode_logical(state: &[Complex64; 8]) -> PureState {
    let terms = state.iter().enumerate().map(|(i, &a)| {
        let mut occ = vec![0u8; 6];
        for (q, bit) in [(i >> 2) & 1, (i >> 1) & 1, i & 1].into_iter().enumerate() {
            occ[2 * q + bit] = 1;
        }
        (FockState::new(occ), a)
    });
    PureState::from_terms(6, terms).expect("six-mode terms")
}

/// Logical amplitudes of the terms with one photon per qubit.
pub fn decode_logical(state: &PureState) -> [Complex64; 8] {
    let mut out = [ZERO; 8];
    for (f, a) in state.iter() {
        let occ = f.occupations();
        let mut index = 0;
        let mut valid = true;
        for q in 0..3 {
            index <<= 1;
            match (occ[2 * q], occ[2 * q + 1]) {
                (1, 0) => {}
                (0, 1) => index |= 1,
                _ => valid = false,
            }
        }
        if valid {
            out[index] += a;
        }
    }
    out
}

/// Result of pushing one logical input through the full optical circuit.
#[derive(Debug, Clone)]
pub struct FredkinRun {
    /// Normalised logical output of the most probable detection branch.
    pub output: [Complex64; 8],
    /// Total probability of all accepted detection records.
    pub success_probability: f64,
    /// Branch-weighted fidelity with the ideal Fredkin output.
    pub fidelity: f64,
    /// Probability of each accepted parity-check record.
    pub branch_probabilities: Vec<f64>,
}

fn block_modes(signal: Mode, block: usize) -> [Mode; 7] {
    use Polarization::{H, V};
    [
        signal,
        Mode::Single(block),
        Mode::EprB(block, H),
        Mode::EprB(block, V),
        Mode::Vacuum(block, 5),
        Mode::Vacuum(block, 6),
        Mode::Vacuum(block, 7),
    ]
}

fn run_block(reg: &Register, u7: &ModeUnitary, signal: Mode, block: usize) -> Result<Register> {
    let modes = block_modes(signal, block);
    let after = reg.apply(u7, &modes)?;
    let counts: Vec<(Mode, u8)> = modes[1..]
        .iter()
        .enumerate()
        .map(|(k, &m)| (m, if k < 2 { 1 } else { 0 }))
        .collect();
    after.detect(&counts)
}

/// Full Fock-space simulation of the Fredkin gate: nine photons (three
/// qubits, two EPR pairs, two single photons) over 22 modes, applied as a
/// sequence of small interferometers with post-selection right after each
/// detection stage.
pub fn simulate_fredkin(input: &[Complex64; 8], sol: &FredkinSolution) -> Result<FredkinRun> {
    let block = sol.block()?;
    simulate_with_block(input, &block.unitary)
}

/// As [`simulate_fredkin`] with an explicit 7-mode block interferometer.
pub fn simulate_with_block(input: &[Complex64; 8], u7: &ModeUnitary) -> Result<FredkinRun> {
    use Polarization::{H, V};
    let norm: f64 = input.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "input state has squared norm {norm}, expected 1"
        )));
    }
    if u7.size() != 7 {
        return Err(Error::DimensionMismatch {
            expected: 7,
            found: u7.size(),
        });
    }

    let mut labels = vec![];
    for p in [Photon::C, Photon::A, Photon::B] {
        labels.push(Mode::Qubit(p, H));
        labels.push(Mode::Qubit(p, V));
    }
    let mut state = encode_logical(input);
    for b in 0..2 {
        labels.extend([
            Mode::EprA(b, H),
            Mode::EprA(b, V),
            Mode::EprB(b, H),
            Mode::EprB(b, V),
            Mode::Single(b),
            Mode::Vacuum(b, 5),
            Mode::Vacuum(b, 6),
            Mode::Vacuum(b, 7),
        ]);
        let ancilla = epr_pair().tensor(&PureState::from_fock(FockState::new(vec![1, 0, 0, 0])));
        state = state.tensor(&ancilla);
    }
    let reg = Register { labels, state };

    // Block 0 drives the V mode of the left arm, block 1 the H mode.
    let mut branches = vec![reg];
    for b in 0..2 {
        let mut next = Vec::with_capacity(2 * branches.len());
        for r in &branches {
            next.extend(parity_check_on(r, b)?.into_iter().map(|(_, r)| r));
        }
        branches = next;
    }

    let bs = beam_splitter(0.5)?;
    let bs_inv = bs.adjoint();
    let left = |p| Mode::Qubit(Photon::A, p);
    let right = |p| Mode::Qubit(Photon::B, p);

    let finals: Vec<Register> = branches
        .par_iter()
        .map(|r| -> Result<Register> {
            let mut r = r.apply(&bs, &[left(H), right(H)])?;
            r = r.apply(&bs, &[left(V), right(V)])?;
            r = run_block(&r, u7, left(V), 0)?;
            r = run_block(&r, u7, left(H), 1)?;
            r = r.apply(&bs_inv, &[left(H), right(H)])?;
            r.apply(&bs_inv, &[left(V), right(V)])
        })
        .collect::<Result<_>>()?;

    let ideal = encode_logical(&ideal_fredkin(input));
    let mut total = 0.0;
    let mut overlap = 0.0;
    let mut probs = Vec::with_capacity(finals.len());
    for r in &finals {
        debug_assert_eq!(r.labels.len(), 6);
        let p = r.state.norm_sqr();
        probs.push(p);
        total += p;
        overlap += ideal.inner(&r.state).norm_sqr();
    }
    let fidelity = if total > 0.0 { overlap / total } else { 0.0 };

    let best = finals
        .iter()
        .max_by(|a, b| a.state.norm_sqr().total_cmp(&b.state.norm_sqr()))
        .expect("four branches");
    let mut output = decode_logical(&best.state);
    let n: f64 = output.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        output.iter_mut().for_each(|a| *a /= n);
    }

    Ok(FredkinRun {
        output,
        success_probability: total,
        fidelity,
        branch_probabilities: probs,
    })
}

/// Runs all eight logical basis states plus `(|0̃⟩ + |1̃⟩)/√2 ⊗ |0̃1̃⟩`.
/// Runs are independent and evaluated in parallel; results keep the basis
/// order with the superposition last.
pub fn simulate_standard_inputs(sol: &FredkinSolution) -> Result<Vec<([Complex64; 8], FredkinRun)>> {
    let block = sol.block()?;
    let mut inputs: Vec<[Complex64; 8]> = (0..8)
        .map(|i| {
            let mut v = [ZERO; 8];
            v[i] = ONE;
            v
        })
        .collect();
    let h = real(std::f64::consts::FRAC_1_SQRT_2);
    let mut sup = [ZERO; 8];
    sup[0b001] = h;
    sup[0b101] = h;
    inputs.push(sup);
    inputs
        .into_par_iter()
        .map(|input| Ok((input, simulate_with_block(&input, &block.unitary)?)))
        .collect()
}
