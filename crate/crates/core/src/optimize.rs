//! Maximising the shrink factor `q` of a Fredkin block.
//!
//! For fixed rows 1–2 the rows 3–4 are linear in `q`, and the largest
//! singular value of the stacked block grows with `q`, so the feasible `q`
//! form an interval `[0, q_max]` found by bisection. The outer search runs a
//! multistart Nelder–Mead simplex over rows 1–2.

use std::time::Instant;

use nalgebra::{Matrix3, Matrix4x3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fredkin::{
    conditional_amplitudes_oracle, unit_rows, ControlPort, FredkinSolution, Row3,
};
use crate::linalg::real;

/// Upper end of the first bisection bracket.
pub const INITIAL_Q_HI: f64 = 1.0;
/// Agreement required between closed-form and brute-force block amplitudes
/// before a solution is returned.
pub const ORACLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub seed: u64,
    pub budget_seconds: f64,
    pub bisection_tol: f64,
    pub simplex_tol: f64,
    pub allow_complex: bool,
    /// Objective evaluations per simplex run.
    pub max_evals: usize,
    /// Simplex restarts from the last optimum.
    pub restarts: usize,
    /// Points per axis of the analytic-family grid.
    pub grid: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 200,
            seed: 42,
            budget_seconds: 600.0,
            bisection_tol: 1e-12,
            simplex_tol: 1e-10,
            allow_complex: false,
            max_evals: 8000,
            restarts: 4,
            grid: 60,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.into()));
        if self.starts == 0 {
            return bad("starts must be at least 1");
        }
        if !(self.budget_seconds > 0.0) {
            return bad("budget_seconds must be positive");
        }
        if !(self.bisection_tol > 0.0) || !(self.simplex_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_evals == 0 {
            return bad("max_evals must be at least 1");
        }
        if self.grid < 2 {
            return bad("grid needs at least 2 points per axis");
        }
        Ok(())
    }
}

/// Outcome of [`max_q`].
#[derive(Debug, Clone, PartialEq)]
pub struct MaxQ {
    pub q: f64,
    /// Rows 1–2 alone already violate `σ_max ≤ 1`; `q` is then 0.
    pub infeasible: bool,
    pub solution: FredkinSolution,
}

fn sigma_max_rows(rows: &[Row3]) -> f64 {
    // λ_max of the 3×3 Gram matrix.
    let mut g = Matrix3::<Complex64>::zeros();
    for r in rows {
        for j in 0..3 {
            for k in 0..3 {
                g[(j, k)] += r[j].conj() * r[k];
            }
        }
    }
    g.symmetric_eigenvalues().max().max(0.0).sqrt()
}

fn stacked_sigma(u1: &Row3, u2: &Row3, v3: &Row3, v4: &Row3, q: f64) -> f64 {
    let s = Matrix4x3::from_fn(|j, k| match j {
        0 => u1[k],
        1 => u2[k],
        2 => v3[k] * q,
        _ => v4[k] * q,
    });
    let g = s.adjoint() * s;
    g.symmetric_eigenvalues().max().max(0.0).sqrt()
}

/// Largest `q ≥ 0` for which the block built from `u1`, `u2` still embeds
/// in a unitary, to within `tol` in `q`.
pub fn max_q(u1: &Row3, u2: &Row3, tol: f64) -> Result<MaxQ> {
    let (v3, v4) = unit_rows(u1, u2)?;
    if sigma_max_rows(&[*u1, *u2]) > 1.0 {
        return Ok(MaxQ {
            q: 0.0,
            infeasible: true,
            solution: FredkinSolution::from_rows(*u1, *u2, real(0.0))?,
        });
    }
    let feasible = |q: f64| stacked_sigma(u1, u2, &v3, &v4, q) <= 1.0;
    let mut lo = 0.0;
    let mut hi = INITIAL_Q_HI;
    while feasible(hi) {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Domain("q is unbounded".into()));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = real(lo);
    let sub = crate::circuits::Submatrix43::from_rows([
        *u1,
        *u2,
        v3.map(|z| z * q),
        v4.map(|z| z * q),
    ]);
    Ok(MaxQ {
        q: lo,
        infeasible: false,
        solution: FredkinSolution::from_submatrix(&sub, q),
    })
}

/// Minimisation objective: `−q_max`, 0 for a singular design matrix, and
/// `σ_max(rows 1–2) − 1` when rows 1–2 are already too large, which gives
/// the simplex a slope back towards the feasible region.
pub fn objective(u1: &Row3, u2: &Row3, tol: f64) -> f64 {
    let s12 = sigma_max_rows(&[*u1, *u2]);
    if s12 > 1.0 {
        return s12 - 1.0;
    }
    match max_q(u1, u2, tol) {
        Ok(m) => -m.q,
        Err(_) => 0.0,
    }
}

/// Rows 1–2 from a flat parameter vector: 6 reals, or 6 real parts
/// followed by 6 imaginary parts.
pub fn rows_from_params(p: &[f64]) -> Result<(Row3, Row3)> {
    let z: Vec<Complex64> = match p.len() {
        6 => p.iter().map(|&x| real(x)).collect(),
        12 => (0..6).map(|k| Complex64::new(p[k], p[k + 6])).collect(),
        n => {
            return Err(Error::DimensionMismatch {
                expected: 6,
                found: n,
            })
        }
    };
    Ok(([z[0], z[1], z[2]], [z[3], z[4], z[5]]))
}

fn param_objective(p: &[f64], tol: f64) -> f64 {
    let (u1, u2) = rows_from_params(p).expect("parameter length fixed by caller");
    objective(&u1, &u2, tol)
}

/// Result of one simplex run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
}

/// Adaptive Nelder–Mead (dimension-dependent coefficients). Stops when
/// both the value spread and the simplex diameter fall below `tol`, or
/// after `max_evals` evaluations.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    tol: f64,
    max_evals: usize,
) -> SimplexResult {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for k in 0..n {
        let mut v = x0.to_vec();
        v[k] = if v[k] != 0.0 { 1.05 * v[k] } else { 0.00025 };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = n + 1;

    let order = |simplex: &mut Vec<Vec<f64>>, values: &mut Vec<f64>| {
        let mut idx: Vec<usize> = (0..simplex.len()).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        *simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        *values = idx.iter().map(|&i| values[i]).collect();
    };

    while evals < max_evals {
        order(&mut simplex, &mut values);
        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= tol && diameter <= tol {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / nf)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha);
        let fr = f(&xr);
        evals += 1;
        if fr < values[0] {
            let xe = along(alpha * gamma);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(alpha * rho);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < fr.min(values[n]) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        for i in 1..=n {
            let shrunk: Vec<f64> = simplex[0]
                .iter()
                .zip(&simplex[i])
                .map(|(b, v)| b + sigma * (v - b))
                .collect();
            values[i] = f(&shrunk);
            simplex[i] = shrunk;
        }
        evals += n;
    }
    order(&mut simplex, &mut values);
    SimplexResult {
        x: simplex.swap_remove(0),
        f: values[0],
        evaluations: evals,
    }
}

/// Repeated simplex runs, each starting from the previous optimum.
fn polish<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], cfg: &OptimizerConfig) -> SimplexResult {
    let mut best = nelder_mead(&mut f, x0, cfg.simplex_tol, cfg.max_evals);
    let mut evaluations = best.evaluations;
    for _ in 0..cfg.restarts {
        let next = nelder_mead(&mut f, &best.x, cfg.simplex_tol, cfg.max_evals);
        evaluations += next.evaluations;
        let improved = next.f < best.f;
        if next.f <= best.f {
            best = next;
        }
        if !improved {
            break;
        }
    }
    best.evaluations = evaluations;
    best
}

/// Optimum of the symmetric analytic family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyOptimum {
    pub u11: f64,
    pub u22: f64,
    pub q: f64,
    #[serde(rename = "P_succ")]
    pub p_succ: f64,
}

/// `q_max` on the family `u1 = (a, a, a)`, `u2 = (−b, b, −b)`; 0 where the
/// design matrix is singular or rows 1–2 do not fit.
pub fn family_q(u11: f64, u22: f64, tol: f64) -> f64 {
    let u1 = [real(u11); 3];
    let u2 = [real(-u22), real(u22), real(-u22)];
    match max_q(&u1, &u2, tol) {
        Ok(m) => m.q,
        Err(_) => 0.0,
    }
}

fn family_optimum(u11: f64, u22: f64, q: f64) -> FamilyOptimum {
    FamilyOptimum {
        u11,
        u22,
        q,
        p_succ: q.powi(4) / 4.0,
    }
}

fn grid_axis(n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |i| (i as f64 + 0.5) / n as f64)
}

/// Best point of an `n × n` grid over `(0, 1)²` with no refinement.
pub fn family_grid_search(n: usize, tol: f64) -> FamilyOptimum {
    let axis = grid_axis(n);
    let best = axis
        .clone()
        .flat_map(|a| axis.clone().map(move |b| (a, b)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(a, b)| (a, b, family_q(a, b, tol)))
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0, -1.0), |acc, p| if p.2 > acc.2 { p } else { acc });
    family_optimum(best.0, best.1, best.2)
}

/// Grid over `(0, 1)²` followed by simplex refinement.
pub fn optimize_analytic_family(cfg: &OptimizerConfig) -> Result<FamilyOptimum> {
    cfg.validate()?;
    let tol = cfg.bisection_tol;
    let coarse = family_grid_search(cfg.grid, tol);
    let r = polish(
        |p: &[f64]| -family_q(p[0], p[1], tol),
        &[coarse.u11, coarse.u22],
        cfg,
    );
    let (u11, u22, q) = if -r.f >= coarse.q {
        (r.x[0], r.x[1], -r.f)
    } else {
        (coarse.u11, coarse.u22, coarse.q)
    };
    Ok(family_optimum(u11, u22, q))
}

/// Family optimum restricted to `u11 = u22`.
pub fn optimize_family_diagonal(cfg: &OptimizerConfig) -> Result<FamilyOptimum> {
    cfg.validate()?;
    let tol = cfg.bisection_tol;
    let start = grid_axis(cfg.grid * cfg.grid)
        .map(|a| (a, family_q(a, a, tol)))
        .fold((0.0, -1.0), |acc, p| if p.1 > acc.1 { p } else { acc });
    let r = polish(|p: &[f64]| -family_q(p[0], p[0], tol), &[start.0], cfg);
    let (a, q) = if -r.f >= start.1 {
        (r.x[0], -r.f)
    } else {
        start
    };
    Ok(family_optimum(a, a, q))
}

/// One multistart run as logged to CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub start: usize,
    pub q: f64,
    pub evaluations: usize,
    pub wall_seconds: f64,
    /// Start skipped because the wall-clock budget ran out.
    pub skipped: bool,
}

/// Outcome of [`optimize_global`].
#[derive(Debug, Clone)]
pub struct GlobalResult {
    pub solution: FredkinSolution,
    pub best_start: usize,
    pub params: Vec<f64>,
    pub log: Vec<StartRecord>,
}

/// Start point of multistart run `index`: Gaussian entries rescaled so
/// that rows 1–2 have `σ_max` uniform in `[0.3, 0.95)`.
pub fn start_point(seed: u64, index: usize, complex: bool) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let dim = if complex { 12 } else { 6 };
    loop {
        let mut p: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let target: f64 = rng.random_range(0.3..0.95);
        let (u1, u2) = rows_from_params(&p).expect("dimension is 6 or 12");
        let s = sigma_max_rows(&[u1, u2]);
        if s > 1e-6 {
            p.iter_mut().for_each(|x| *x *= target / s);
            return p;
        }
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Multistart simplex search over rows 1–2. Starts run in parallel with
/// per-start RNG streams; merging is in start order, so the result does not
/// depend on scheduling. Starts not begun before the budget expires are
/// logged as skipped.
pub fn optimize_global(cfg: &OptimizerConfig) -> Result<GlobalResult> {
    cfg.validate()?;
    let deadline = Instant::now() + std::time::Duration::from_secs_f64(cfg.budget_seconds);
    let tol = cfg.bisection_tol;

    let runs: Vec<(StartRecord, Vec<f64>)> = (0..cfg.starts)
        .into_par_iter()
        .map(|index| {
            let began = Instant::now();
            if began >= deadline {
                let rec = StartRecord {
                    start: index,
                    q: 0.0,
                    evaluations: 0,
                    wall_seconds: 0.0,
                    skipped: true,
                };
                return (rec, vec![]);
            }
            let x0 = start_point(cfg.seed, index, cfg.allow_complex);
            let r = polish(|p: &[f64]| param_objective(p, tol), &x0, cfg);
            let rec = StartRecord {
                start: index,
                q: (-r.f).max(0.0),
                evaluations: r.evaluations,
                wall_seconds: began.elapsed().as_secs_f64(),
                skipped: false,
            };
            (rec, r.x)
        })
        .collect();

    let mut best: Option<usize> = None;
    for (i, (rec, x)) in runs.iter().enumerate() {
        if rec.skipped {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(b) => {
                let (brec, bx) = &runs[b];
                let better = rec.q > brec.q || (rec.q == brec.q && lex_less(x, bx));
                Some(if better { i } else { b })
            }
        };
    }
    let best = best.ok_or_else(|| Error::Domain("budget expired before any start".into()))?;
    let params = runs[best].1.clone();
    let (u1, u2) = rows_from_params(&params)?;
    let m = max_q(&u1, &u2, tol)?;
    check_solution(&m.solution)?;
    Ok(GlobalResult {
        solution: m.solution,
        best_start: best,
        params,
        log: runs.into_iter().map(|(r, _)| r).collect(),
    })
}

/// Full re-verification of a solution: closed-form block conditions,
/// embeddability, `P = |q|⁴/4`, and brute-force amplitudes of the completed
/// interferometer.
pub fn check_solution(sol: &FredkinSolution) -> Result<()> {
    sol.verify()?;
    let block = sol.block()?;
    let x = conditional_amplitudes_oracle(&block.unitary, ControlPort::H)?;
    let y = conditional_amplitudes_oracle(&block.unitary, ControlPort::V)?;
    for n in 0..3 {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let err = (x[n] - sol.q).norm().max((y[n] - sol.q * sign).norm());
        if err > ORACLE_TOL {
            return Err(Error::Domain(format!(
                "brute-force amplitude {n} off by {err:.3e}"
            )));
        }
    }
    Ok(())
}
