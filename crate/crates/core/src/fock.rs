//! Exact Fock-space representation of multimode photonic states.
//!
//! A mode unitary `U` acts on creation operators row-wise,
//! `a†_in,j = Σ_k u_jk a†_out,k`, so a single photon entering mode `j` leaves
//! mode `k` with amplitude `u_jk`. Multiphoton amplitudes are permanents of
//! submatrices of `U` (rows repeated by input occupations, columns by output
//! occupations).

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{unitarity_deviation, CMatrix, ONE, ZERO};

/// Amplitudes below this modulus are dropped after every interferometer pass.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Frobenius tolerance on `UᴴU − I` accepted by [`ModeUnitary::new`].
pub const UNITARITY_TOL: f64 = 1e-10;

/// Occupation numbers of a fixed set of optical modes.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState(Box<[u8]>);

impl FockState {
    pub fn new(occupations: impl Into<Vec<u8>>) -> Self {
        Self(occupations.into().into_boxed_slice())
    }

    pub fn vacuum(modes: usize) -> Self {
        Self(vec![0; modes].into_boxed_slice())
    }

    /// One photon in `mode`, vacuum elsewhere.
    pub fn single(modes: usize, mode: usize) -> Self {
        let mut occ = vec![0; modes];
        occ[mode] = 1;
        Self::new(occ)
    }

    pub fn mode_count(&self) -> usize {
        self.0.len()
    }

    pub fn occupations(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, mode: usize) -> u8 {
        self.0[mode]
    }

    pub fn photon_count(&self) -> usize {
        self.0.iter().map(|&n| n as usize).sum()
    }

    /// Concatenates the mode lists of two states.
    pub fn concat(&self, other: &FockState) -> FockState {
        let mut occ = self.0.to_vec();
        occ.extend_from_slice(&other.0);
        FockState::new(occ)
    }

    /// `∏ n_i!`, the squared norm of the monomial `∏ (a†_i)^{n_i}|0⟩`.
    fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&n| factorial(n as usize)).product()
    }
}

impl fmt::Debug for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Sparse superposition of Fock states over a common set of modes.
///
/// After post-selection the state is generally subnormalised; its squared
/// norm is then the probability of the detection record that produced it.
#[derive(Clone, PartialEq)]
pub struct PureState {
    modes: usize,
    terms: BTreeMap<FockState, Complex64>,
}

impl PureState {
    /// The zero vector.
    pub fn zero(modes: usize) -> Self {
        Self {
            modes,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_fock(state: FockState) -> Self {
        let modes = state.mode_count();
        let mut terms = BTreeMap::new();
        terms.insert(state, ONE);
        Self { modes, terms }
    }

    /// Builds a state from `(occupation, amplitude)` pairs, summing repeated
    /// occupations.
    pub fn from_terms(
        modes: usize,
        terms: impl IntoIterator<Item = (FockState, Complex64)>,
    ) -> Result<Self> {
        let mut s = Self::zero(modes);
        for (f, a) in terms {
            s.add(f, a)?;
        }
        s.prune();
        Ok(s)
    }

    pub fn add(&mut self, state: FockState, amplitude: Complex64) -> Result<()> {
        if state.mode_count() != self.modes {
            return Err(Error::DimensionMismatch {
                expected: self.modes,
                found: state.mode_count(),
            });
        }
        *self.terms.entry(state).or_insert(ZERO) += amplitude;
        Ok(())
    }

    pub fn mode_count(&self) -> usize {
        self.modes
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, state: &FockState) -> Complex64 {
        self.terms.get(state).copied().unwrap_or(ZERO)
    }

    /// Terms in lexicographic order of occupation vectors.
    pub fn iter(&self) -> impl Iterator<Item = (&FockState, &Complex64)> {
        self.terms.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.terms
            .iter()
            .filter_map(|(f, a)| other.terms.get(f).map(|b| a.conj() * b))
            .sum()
    }

    pub fn scaled(&self, factor: Complex64) -> PureState {
        let mut out = self.clone();
        for a in out.terms.values_mut() {
            *a *= factor;
        }
        out
    }

    pub fn normalized(&self) -> Option<PureState> {
        let n = self.norm();
        (n > 0.0).then(|| self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    /// Tensor product; the modes of `other` are appended after those of `self`.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut terms = BTreeMap::new();
        for (f, a) in &self.terms {
            for (g, b) in &other.terms {
                terms.insert(f.concat(g), a * b);
            }
        }
        let mut out = PureState {
            modes: self.modes + other.modes,
            terms,
        };
        out.prune();
        out
    }

    /// Multiplies every term by `exp(i·phase·n_mode)`.
    pub fn phase_on_mode(&self, mode: usize, phase: f64) -> PureState {
        let mut out = self.clone();
        for (f, a) in out.terms.iter_mut() {
            let n = f.get(mode) as f64;
            *a *= Complex64::from_polar(1.0, phase * n);
        }
        out
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(f, a)| TermRecord {
                occ: f.occupations().to_vec(),
                re: a.re,
                im: a.im,
            })
            .collect()
    }

    pub fn from_records(records: &[TermRecord]) -> Result<Self> {
        let modes = records
            .first()
            .map(|r| r.occ.len())
            .ok_or_else(|| Error::InvalidArgument("empty state record list".into()))?;
        Self::from_terms(
            modes,
            records
                .iter()
                .map(|r| (FockState::new(r.occ.clone()), Complex64::new(r.re, r.im))),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_records()).expect("state records serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let records: Vec<TermRecord> =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::from_records(&records)
    }
}

impl fmt::Debug for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, a) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i){:?}", a.re, a.im, k)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// One serialized term: `{"occ": [...], "re": .., "im": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub occ: Vec<u8>,
    pub re: f64,
    pub im: f64,
}

/// An `M×M` unitary acting on mode creation operators.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeUnitary(CMatrix);

impl ModeUnitary {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let deviation = unitarity_deviation(&m);
        if !(deviation <= UNITARITY_TOL) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self(m))
    }

    /// Skips the unitarity check. The caller guarantees `m` is unitary up to
    /// rounding.
    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        debug_assert!(m.is_square());
        Self(m)
    }

    pub fn identity(modes: usize) -> Self {
        Self(CMatrix::identity(modes, modes))
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// `u_jk`: amplitude for a photon entering mode `j` to leave mode `k`.
    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        self.0[(j, k)]
    }

    pub fn adjoint(&self) -> ModeUnitary {
        Self(self.0.adjoint())
    }

    pub fn deviation(&self) -> f64 {
        unitarity_deviation(&self.0)
    }
}

/// Matrix permanent by Ryser's inclusion–exclusion formula with Gray-code
/// updates, `O(2ⁿ·n)`.
pub fn permanent(a: &CMatrix) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = a.nrows();
    Ok(ryser(n, |i, j| a[(i, j)]))
}

fn ryser(n: usize, at: impl Fn(usize, usize) -> Complex64) -> Complex64 {
    match n {
        0 => return ONE,
        1 => return at(0, 0),
        2 => return at(0, 0) * at(1, 1) + at(0, 1) * at(1, 0),
        _ => {}
    }
    assert!(n < 64, "permanent of a {n}x{n} matrix is out of reach");
    let mut row_sums = vec![ZERO; n];
    let mut total = ZERO;
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        gray ^= 1 << j;
        if gray & (1 << j) != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += at(i, j);
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= at(i, j);
            }
        }
        let prod: Complex64 = row_sums.iter().product();
        if gray.count_ones() % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

fn expand_modes(f: &FockState) -> Vec<usize> {
    f.occupations()
        .iter()
        .enumerate()
        .flat_map(|(m, &n)| std::iter::repeat_n(m, n as usize))
        .collect()
}

fn check_modes(u: &ModeUnitary, f: &FockState) -> Result<()> {
    if f.mode_count() != u.size() {
        return Err(Error::DimensionMismatch {
            expected: u.size(),
            found: f.mode_count(),
        });
    }
    Ok(())
}

/// `⟨output| Û |input⟩`. Zero when the photon numbers differ.
pub fn transition_amplitude(
    u: &ModeUnitary,
    input: &FockState,
    output: &FockState,
) -> Result<Complex64> {
    check_modes(u, input)?;
    check_modes(u, output)?;
    Ok(amplitude_on(u.matrix(), input, output))
}

fn amplitude_on(m: &CMatrix, input: &FockState, output: &FockState) -> Complex64 {
    if input.photon_count() != output.photon_count() {
        return ZERO;
    }
    let rows = expand_modes(input);
    let cols = expand_modes(output);
    let perm = ryser(rows.len(), |a, b| m[(rows[a], cols[b])]);
    perm / (input.factorial_product() * output.factorial_product()).sqrt()
}

/// All occupation vectors of `modes` modes holding `photons` photons in total,
/// in lexicographic order.
pub fn occupations_with(modes: usize, photons: usize) -> Vec<FockState> {
    fn rec(buf: &mut Vec<u8>, mode: usize, modes: usize, left: usize, out: &mut Vec<FockState>) {
        if mode + 1 == modes {
            buf.push(left as u8);
            out.push(FockState::new(buf.clone()));
            buf.pop();
            return;
        }
        for n in 0..=left {
            buf.push(n as u8);
            rec(buf, mode + 1, modes, left - n, out);
            buf.pop();
        }
    }
    let mut out = Vec::new();
    if modes == 0 {
        if photons == 0 {
            out.push(FockState::vacuum(0));
        }
        return out;
    }
    rec(&mut Vec::with_capacity(modes), 0, modes, photons, &mut out);
    out
}

/// Applies `U` to every term of `s`.
pub fn apply_unitary(u: &ModeUnitary, s: &PureState) -> Result<PureState> {
    if s.mode_count() != u.size() {
        return Err(Error::DimensionMismatch {
            expected: u.size(),
            found: s.mode_count(),
        });
    }
    let modes: Vec<usize> = (0..u.size()).collect();
    apply_on_modes(u, &modes, s)
}

/// Applies a small unitary to the listed modes of a larger state; all other
/// modes are left untouched. Equivalent to `apply_unitary` with the embedded
/// matrix but never materialises it.
pub fn apply_on_modes(u: &ModeUnitary, modes: &[usize], s: &PureState) -> Result<PureState> {
    if modes.len() != u.size() {
        return Err(Error::DimensionMismatch {
            expected: u.size(),
            found: modes.len(),
        });
    }
    let total = s.mode_count();
    let mut seen = vec![false; total];
    for &m in modes {
        if m >= total {
            return Err(Error::InvalidMode {
                index: m,
                modes: total,
            });
        }
        if std::mem::replace(&mut seen[m], true) {
            return Err(Error::DuplicateMode(m));
        }
    }

    let mut cache: HashMap<FockState, Vec<(FockState, Complex64)>> = HashMap::new();
    let mut out: BTreeMap<FockState, Complex64> = BTreeMap::new();
    for (f, a) in s.iter() {
        let local_in = FockState::new(modes.iter().map(|&m| f.get(m)).collect::<Vec<_>>());
        let branches = cache.entry(local_in.clone()).or_insert_with(|| {
            occupations_with(modes.len(), local_in.photon_count())
                .into_iter()
                .filter_map(|local_out| {
                    let amp = amplitude_on(u.matrix(), &local_in, &local_out);
                    (amp.norm() > 0.0).then_some((local_out, amp))
                })
                .collect()
        });
        for (local_out, amp) in branches.iter() {
            let mut occ = f.occupations().to_vec();
            for (i, &m) in modes.iter().enumerate() {
                occ[m] = local_out.get(i);
            }
            *out.entry(FockState::new(occ)).or_insert(ZERO) += a * amp;
        }
    }
    let mut result = PureState {
        modes: total,
        terms: out,
    };
    result.prune();
    Ok(result)
}

/// Per-mode detector constraints. `None` leaves a mode unmeasured.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionPattern(Vec<Option<u8>>);

impl DetectionPattern {
    /// All modes unmeasured.
    pub fn unmeasured(modes: usize) -> Self {
        Self(vec![None; modes])
    }

    pub fn from_counts(counts: Vec<Option<u8>>) -> Self {
        Self(counts)
    }

    /// Requires exactly `count` photons in `mode`.
    pub fn exact(mut self, mode: usize, count: u8) -> Self {
        self.0[mode] = Some(count);
        self
    }

    pub fn mode_count(&self) -> usize {
        self.0.len()
    }

    pub fn constraint(&self, mode: usize) -> Option<u8> {
        self.0[mode]
    }

    pub fn matches(&self, f: &FockState) -> bool {
        self.0
            .iter()
            .zip(f.occupations())
            .all(|(c, &n)| c.is_none_or(|c| c == n))
    }

    pub fn unmeasured_modes(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&m| self.0[m].is_none()).collect()
    }
}

/// Keeps the terms consistent with `pattern` and drops the measured modes.
/// The squared norm of the result is the probability of the pattern.
pub fn post_select(s: &PureState, pattern: &DetectionPattern) -> Result<PureState> {
    if pattern.mode_count() != s.mode_count() {
        return Err(Error::DimensionMismatch {
            expected: s.mode_count(),
            found: pattern.mode_count(),
        });
    }
    let keep = pattern.unmeasured_modes();
    let mut out = PureState::zero(keep.len());
    for (f, a) in s.iter() {
        if pattern.matches(f) {
            let occ: Vec<u8> = keep.iter().map(|&m| f.get(m)).collect();
            out.add(FockState::new(occ), *a)?;
        }
    }
    out.prune();
    Ok(out)
}
