//! Optical elements as mode unitaries, and completion of a 4×3 block to a
//! 7×7 unitary.
//!
//! Beam splitters use the real convention `[[t, r], [−r, t]]`; every other
//! phase is carried by explicit phase shifters.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeUnitary, UNITARITY_TOL};
use crate::linalg::{real, sigma_max, CMatrix, ONE, ZERO};

/// Radicands above `-RADICAND_TOL` are clamped to zero.
pub const RADICAND_TOL: f64 = 1e-12;
/// Pivots below this are treated as zero.
pub const PIVOT_TOL: f64 = 1e-10;
/// Slack on `σ_max ≤ 1` for [`is_embeddable`].
pub const EMBED_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    transmittance: f64,
}

impl BeamSplitter {
    pub fn new(transmittance: f64) -> Result<Self> {
        if !(transmittance > 0.0 && transmittance <= 1.0) {
            return Err(Error::InvalidTransmittance(transmittance));
        }
        Ok(Self { transmittance })
    }

    /// Intensity transmittance `T`.
    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    /// Amplitude transmittance `t = √T`.
    pub fn t(&self) -> f64 {
        self.transmittance.sqrt()
    }

    /// Amplitude reflectance `r = √(1 − T)`.
    pub fn r(&self) -> f64 {
        (1.0 - self.transmittance).sqrt()
    }

    pub fn unitary(&self) -> ModeUnitary {
        let (t, r) = (self.t(), self.r());
        ModeUnitary::new_unchecked(CMatrix::from_row_slice(
            2,
            2,
            &[real(t), real(r), real(-r), real(t)],
        ))
    }
}

/// Two-mode splitter `[[t, r], [−r, t]]` with `t = √T`, `r = √(1−T)`.
pub fn beam_splitter(transmittance: f64) -> Result<ModeUnitary> {
    Ok(BeamSplitter::new(transmittance)?.unitary())
}

/// Single-mode phase `e^{iψ}`.
pub fn phase_shifter(psi: f64) -> ModeUnitary {
    ModeUnitary::new_unchecked(CMatrix::from_element(1, 1, Complex64::from_polar(1.0, psi)))
}

/// Places `small` on `targets` inside an `modes`-mode identity.
pub fn embed(small: &ModeUnitary, targets: &[usize], modes: usize) -> Result<ModeUnitary> {
    if targets.len() != small.size() {
        return Err(Error::DimensionMismatch {
            expected: small.size(),
            found: targets.len(),
        });
    }
    let mut seen = vec![false; modes];
    for &m in targets {
        if m >= modes {
            return Err(Error::InvalidMode { index: m, modes });
        }
        if std::mem::replace(&mut seen[m], true) {
            return Err(Error::DuplicateMode(m));
        }
    }
    let mut out = CMatrix::identity(modes, modes);
    for (a, &i) in targets.iter().enumerate() {
        for (b, &j) in targets.iter().enumerate() {
            out[(i, j)] = small.entry(a, b);
        }
    }
    Ok(ModeUnitary::new_unchecked(out))
}

/// Net unitary of elements applied in list order (first element first).
///
/// With the row convention `a†_in = U a†_out`, passing `U₁` then `U₂` gives
/// the matrix product `U₁·U₂`.
pub fn compose(elements: &[ModeUnitary]) -> Result<ModeUnitary> {
    let (first, rest) = elements
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("nothing to compose".into()))?;
    let mut acc = first.matrix().clone();
    for u in rest {
        if u.size() != first.size() {
            return Err(Error::DimensionMismatch {
                expected: first.size(),
                found: u.size(),
            });
        }
        acc *= u.matrix();
    }
    Ok(ModeUnitary::new_unchecked(acc))
}

/// The 4×3 block `u_jk` (rows: interferometer inputs 1–4, columns: outputs
/// 1–3) that fixes a conditional-phase block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Submatrix43 {
    pub u: [[Complex64; 3]; 4],
}

impl Submatrix43 {
    pub fn zero() -> Self {
        Self { u: [[ZERO; 3]; 4] }
    }

    pub fn from_rows(rows: [[Complex64; 3]; 4]) -> Self {
        Self { u: rows }
    }

    /// Zero-based row.
    pub fn row(&self, j: usize) -> [Complex64; 3] {
        self.u[j]
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_fn(4, 3, |j, k| self.u[j][k])
    }

    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        if m.shape() != (4, 3) {
            return Err(Error::InvalidArgument(format!(
                "expected a 4x3 matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut u = [[ZERO; 3]; 4];
        for (j, row) in u.iter_mut().enumerate() {
            for (k, e) in row.iter_mut().enumerate() {
                *e = m[(j, k)];
            }
        }
        Ok(Self { u })
    }

    pub fn sigma_max(&self) -> f64 {
        sigma_max(&self.to_matrix())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&Submatrix43Json::from(self)).expect("submatrix serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Submatrix43Json =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        raw.try_into()
    }
}

/// `{"rows": 4, "cols": 3, "re": [[...]], "im": [[...]]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Submatrix43Json {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&Submatrix43> for Submatrix43Json {
    fn from(s: &Submatrix43) -> Self {
        Self {
            rows: 4,
            cols: 3,
            re: s.u.iter().map(|r| r.iter().map(|z| z.re).collect()).collect(),
            im: s.u.iter().map(|r| r.iter().map(|z| z.im).collect()).collect(),
        }
    }
}

impl TryFrom<Submatrix43Json> for Submatrix43 {
    type Error = Error;

    fn try_from(raw: Submatrix43Json) -> Result<Self> {
        let shape_ok = |m: &Vec<Vec<f64>>| m.len() == 4 && m.iter().all(|r| r.len() == 3);
        if raw.rows != 4 || raw.cols != 3 || !shape_ok(&raw.re) || !shape_ok(&raw.im) {
            return Err(Error::InvalidArgument(
                "submatrix must be 4 rows by 3 columns".into(),
            ));
        }
        let mut u = [[ZERO; 3]; 4];
        for j in 0..4 {
            for k in 0..3 {
                let z = Complex64::new(raw.re[j][k], raw.im[j][k]);
                if !z.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "non-finite entry at ({j}, {k})"
                    )));
                }
                u[j][k] = z;
            }
        }
        Ok(Self { u })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Embeddability {
    pub embeddable: bool,
    pub sigma_max: f64,
    /// `1 − σ_max`; negative when the block cannot sit inside a unitary.
    pub margin: f64,
}

/// A block fits inside a unitary iff its largest singular value is at most 1.
pub fn is_embeddable(sub: &Submatrix43) -> Embeddability {
    let s = sub.sigma_max();
    Embeddability {
        embeddable: s <= 1.0 + EMBED_TOL,
        sigma_max: s,
        margin: 1.0 - s,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Completion {
    Unitary(ModeUnitary),
    /// Normalisation of `row` (zero-based) would need `√radicand` with a
    /// negative radicand.
    Infeasible { row: usize, radicand: f64 },
}

impl Completion {
    pub fn unitary(&self) -> Option<&ModeUnitary> {
        match self {
            Completion::Unitary(u) => Some(u),
            Completion::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Completion::Unitary(_))
    }
}

/// Row-by-row completion of a 4×3 block to a 7×7 unitary.
///
/// For row `j` the entry in column `j+3` is the real non-negative root that
/// normalises the row, later columns are zero, and the entries of rows
/// `k > j` in column `j+3` are fixed by orthogonality to row `j`. The
/// resulting 4×7 isometry is extended by Gram–Schmidt over the canonical
/// basis in index order. The block is copied verbatim into the result.
pub fn complete_to_unitary(sub: &Submatrix43) -> Result<Completion> {
    let mut u = CMatrix::zeros(7, 7);
    for j in 0..4 {
        for k in 0..3 {
            u[(j, k)] = sub.u[j][k];
        }
    }

    for j in 0..4 {
        let pivot_col = j + 3;
        let used: f64 = (0..pivot_col).map(|k| u[(j, k)].norm_sqr()).sum();
        let radicand = 1.0 - used;
        if radicand < -RADICAND_TOL {
            return Ok(Completion::Infeasible { row: j, radicand });
        }
        let pivot = radicand.max(0.0).sqrt();
        u[(j, pivot_col)] = real(pivot);
        for k in (j + 1)..4 {
            let overlap: Complex64 = (0..pivot_col).map(|l| u[(j, l)].conj() * u[(k, l)]).sum();
            u[(k, pivot_col)] = if pivot < PIVOT_TOL {
                if overlap.norm() > PIVOT_TOL {
                    return Err(Error::Degenerate { row: j });
                }
                ZERO
            } else {
                -overlap / pivot
            };
        }
    }

    let mut next = 4;
    for i in 0..7 {
        if next == 7 {
            break;
        }
        let mut v: Vec<Complex64> = (0..7).map(|l| if l == i { ONE } else { ZERO }).collect();
        // twice is enough
        for _ in 0..2 {
            for r in 0..next {
                let proj: Complex64 = (0..7).map(|l| u[(r, l)].conj() * v[l]).sum();
                for (l, x) in v.iter_mut().enumerate() {
                    *x -= proj * u[(r, l)];
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            for (l, x) in v.iter().enumerate() {
                u[(next, l)] = x / norm;
            }
            next += 1;
        }
    }
    debug_assert_eq!(next, 7);

    let out = ModeUnitary::new_unchecked(u);
    let deviation = out.deviation();
    if !(deviation <= UNITARITY_TOL) {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(Completion::Unitary(out))
}
