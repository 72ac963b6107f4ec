mod angle;
mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use lopt::circuits::{complete_to_unitary, is_embeddable, Completion, Submatrix43};
use lopt::fredkin::FredkinSolution;
use lopt::linalg::{operator_distance, CMatrix};
use lopt::optimize::{
    check_solution, max_q, optimize_analytic_family, optimize_global, OptimizerConfig,
};
use lopt::toffoli::{
    controlled, decompose_controlled_u, design_cphase, design_with_t1, effective_gate,
    MAX_SIMULATED_QUBITS,
};
use lopt::verify::{self, Context, FIVE_GATE_REFERENCE, GLOBAL_FLOOR, GLOBAL_TARGET};
use lopt::Complex64;

use angle::parse_angle;
use output::render;

const SEED_ENV: &str = "LOPT_SEED";

#[derive(Parser, Debug)]
#[command(name = "lopt", version, about = "Linear-optics gate design and simulation")]
struct Cli {
    /// TOML file with an [optimizer] table
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for parallel simulation and search
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// N-qubit conditional-phase network
    Toffoli(ToffoliArgs),
    /// Reduce a controlled-U to a conditional phase plus local gates
    ControlledU(ControlledUArgs),
    /// Fredkin gate blocks
    #[command(subcommand)]
    Fredkin(FredkinCommand),
    /// Complete a 4x3 block to a 7x7 unitary
    Complete(CompleteArgs),
    /// Run the numerical claim suite
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct ToffoliArgs {
    #[arg(long)]
    qubits: usize,
    /// Radians, or multiples of pi such as `pi/2`
    #[arg(long, allow_hyphen_values = true)]
    phase: String,
    /// Override the optimal first transmittance
    #[arg(long)]
    t1: Option<f64>,
    /// Also run the Fock-space simulation (up to four qubits)
    #[arg(long)]
    simulate: bool,
}

#[derive(Args, Debug)]
struct ControlledUArgs {
    /// 2x2 matrix as JSON {"re": [[..],[..]], "im": [[..],[..]]}
    #[arg(long, conflicts_with = "matrix_file")]
    matrix: Option<String>,
    #[arg(long)]
    matrix_file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum FredkinCommand {
    /// Optimum of the symmetric two-parameter family
    Analytic {
        /// Write the solution JSON here
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Multistart search over the full block
    Optimize(OptimizeArgs),
    /// Nine-photon simulation of a stored solution
    Simulate {
        #[arg(long)]
        solution: PathBuf,
    },
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Wall-clock budget in seconds
    #[arg(long)]
    budget: Option<f64>,
    /// Search over complex entries
    #[arg(long)]
    complex: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Per-start CSV log
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompleteArgs {
    /// Block JSON {"rows": 4, "cols": 3, "re": [...], "im": [...]}
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Claim ids or groups to run (repeatable)
    #[arg(long)]
    only: Vec<String>,
}

/// Failure classes and their exit codes.
#[derive(Debug)]
enum Failure {
    /// Exit 2: bad arguments or unreadable input.
    Usage(String),
    /// Exit 1: a computed check did not hold.
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Check(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Check(m) => m,
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    optimizer: OptimizerConfig,
}

fn load_config(path: Option<&Path>) -> CliResult<OptimizerConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            toml::from_str::<ConfigFile>(&text)
                .map_err(|e| usage(format!("{}: {e}", p.display())))?
                .optimizer
        }
        None => OptimizerConfig::default(),
    };
    if let Ok(s) = std::env::var(SEED_ENV) {
        cfg.seed = s
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_ENV}={s:?} is not an unsigned integer")))?;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn matrix_json(m: &CMatrix) -> Value {
    let part = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|j| (0..m.ncols()).map(|k| f(&m[(j, k)])).collect()).collect()
    };
    json!({ "rows": m.nrows(), "cols": m.ncols(), "re": part(|z| z.re), "im": part(|z| z.im) })
}

#[derive(Deserialize)]
struct MatrixInput {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn parse_matrix2(text: &str) -> CliResult<CMatrix> {
    let m: MatrixInput = serde_json::from_str(text).map_err(|e| usage(format!("matrix: {e}")))?;
    let ok = |p: &Vec<Vec<f64>>| p.len() == 2 && p.iter().all(|r| r.len() == 2);
    if !ok(&m.re) || !ok(&m.im) {
        return Err(usage("matrix must be 2x2"));
    }
    let out = CMatrix::from_fn(2, 2, |j, k| Complex64::new(m.re[j][k], m.im[j][k]));
    if out.iter().any(|z| !z.is_finite()) {
        return Err(usage("matrix has non-finite entries"));
    }
    Ok(out)
}

fn cmd_toffoli(a: &ToffoliArgs) -> CliResult<Value> {
    if a.qubits == 0 {
        return Err(usage("--qubits must be at least 1"));
    }
    if a.simulate && a.qubits > MAX_SIMULATED_QUBITS {
        return Err(usage(format!(
            "--simulate supports at most {MAX_SIMULATED_QUBITS} qubits"
        )));
    }
    let phi = parse_angle(&a.phase).map_err(usage)?;
    let d = match a.t1 {
        Some(t1) => design_with_t1(a.qubits, phi, t1),
        None => design_cphase(a.qubits, phi),
    }
    .map_err(usage)?;
    let mut report = json!({
        "qubits": d.qubits,
        "phi": d.phi,
        "t1": d.t1,
        "t2": d.t2,
        "t3": d.t3,
        "psi": d.psi,
        "success_probability_analytic": d.success_probability(),
    });
    if a.simulate {
        let gate = effective_gate(&d).map_err(|e| Failure::Check(e.to_string()))?;
        report["simulated"] = json!({
            "success_probability": gate.success_probability,
            "fidelity": gate.fidelity,
            "conditional_phase": gate.conditional_phase(),
        });
        if gate.fidelity < 1.0 - 1e-6 {
            emit(report);
            return Err(Failure::Check(format!("gate fidelity {} below 1 - 1e-6", gate.fidelity)));
        }
    }
    Ok(report)
}

fn cmd_controlled_u(a: &ControlledUArgs) -> CliResult<Value> {
    let text = match (&a.matrix, &a.matrix_file) {
        (Some(m), _) => m.clone(),
        (None, Some(p)) => read_file(p)?,
        (None, None) => return Err(usage("give --matrix or --matrix-file")),
    };
    let u = parse_matrix2(&text)?;
    let dec = decompose_controlled_u(&u).map_err(usage)?;
    let error = operator_distance(&dec.reconstruct(), &controlled(&u));
    let cphase = design_cphase(2, dec.delta_phi).map_err(|e| Failure::Check(e.to_string()))?;
    let report = json!({
        "v": matrix_json(&dec.v),
        "phi0": dec.phi0,
        "delta_phi": dec.delta_phi,
        "reconstruction_error": error,
        "cphase": {
            "t1": cphase.t1,
            "t2": cphase.t2,
            "t3": cphase.t3,
            "psi": cphase.psi,
            "success_probability": cphase.success_probability(),
        },
    });
    if error > 1e-10 {
        emit(report);
        return Err(Failure::Check(format!("reconstruction error {error:e}")));
    }
    Ok(report)
}

fn solution_json(sol: &FredkinSolution) -> Value {
    serde_json::from_str(&sol.to_json()).expect("solution json is valid")
}

fn context_fields(report: &mut Value) {
    report["reference"] = json!({
        "five_two_qubit_gates": FIVE_GATE_REFERENCE,
        "note": "4^-5: five two-qubit gates at success probability 1/4 each",
    });
}

fn cmd_fredkin(c: &FredkinCommand, cfg: OptimizerConfig) -> CliResult<Value> {
    match c {
        FredkinCommand::Analytic { output } => {
            let fam = optimize_analytic_family(&cfg).map_err(usage)?;
            let u1 = [Complex64::new(fam.u11, 0.0); 3];
            let u2 = [-fam.u22, fam.u22, -fam.u22].map(|x| Complex64::new(x, 0.0));
            let sol = max_q(&u1, &u2, cfg.bisection_tol)
                .map_err(|e| Failure::Check(e.to_string()))?
                .solution;
            check_solution(&sol).map_err(|e| Failure::Check(e.to_string()))?;
            if let Some(p) = output {
                write_file(p, &sol.to_json())?;
            }
            let mut report = json!({
                "u11": fam.u11,
                "u22": fam.u22,
                "q": fam.q,
                "P_succ": fam.p_succ,
                "solution": solution_json(&sol),
            });
            context_fields(&mut report);
            Ok(report)
        }
        FredkinCommand::Optimize(a) => {
            let mut cfg = cfg;
            if let Some(s) = a.starts {
                cfg.starts = s;
            }
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            if let Some(b) = a.budget {
                cfg.budget_seconds = b;
            }
            cfg.allow_complex |= a.complex;
            cfg.validate().map_err(usage)?;
            let res = optimize_global(&cfg).map_err(|e| Failure::Check(e.to_string()))?;
            if let Some(p) = &a.output {
                write_file(p, &res.solution.to_json())?;
            }
            if let Some(p) = &a.log {
                let mut w = csv::Writer::from_path(p).map_err(usage)?;
                for r in &res.log {
                    w.serialize(r).map_err(usage)?;
                }
                w.flush().map_err(usage)?;
            }
            let p = res.solution.p_succ;
            let mut report = json!({
                "config": serde_json::to_value(&cfg).expect("config serializes"),
                "best_start": res.best_start,
                "q": res.solution.q.norm(),
                "P_succ": p,
                "target": GLOBAL_TARGET,
                "gap_to_target": GLOBAL_TARGET - p,
                "floor": GLOBAL_FLOOR,
                "meets_floor": p >= GLOBAL_FLOOR,
                "completed_starts": res.log.iter().filter(|r| !r.skipped).count(),
                "solution": solution_json(&res.solution),
            });
            context_fields(&mut report);
            Ok(report)
        }
        FredkinCommand::Simulate { solution } => {
            let sol = FredkinSolution::from_json(&read_file(solution)?).map_err(usage)?;
            check_solution(&sol).map_err(|e| Failure::Check(format!("solution rejected: {e}")))?;
            let runs = lopt::fredkin::simulate_standard_inputs(&sol)
                .map_err(|e| Failure::Check(e.to_string()))?;
            let expected = sol.q.norm_sqr().powi(2) / 4.0;
            let mut min_fidelity: f64 = 1.0;
            let rows: Vec<Value> = runs
                .iter()
                .map(|(input, run)| {
                    min_fidelity = min_fidelity.min(run.fidelity);
                    json!({
                        "input": input.iter().map(|&z| pair(z)).collect::<Vec<_>>(),
                        "output": run.output.iter().map(|&z| pair(z)).collect::<Vec<_>>(),
                        "fidelity": run.fidelity,
                        "P_succ": run.success_probability,
                    })
                })
                .collect();
            let mut report = json!({
                "q": [sol.q.re, sol.q.im],
                "P_succ_expected": expected,
                "min_fidelity": min_fidelity,
                "runs": rows,
            });
            context_fields(&mut report);
            if min_fidelity < 1.0 - 1e-8 {
                emit(report);
                return Err(Failure::Check(format!("fidelity {min_fidelity} below 1 - 1e-8")));
            }
            Ok(report)
        }
    }
}

fn cmd_complete(a: &CompleteArgs) -> CliResult<Value> {
    let sub = Submatrix43::from_json(&read_file(&a.input)?).map_err(usage)?;
    let e = is_embeddable(&sub);
    match complete_to_unitary(&sub).map_err(|e| Failure::Check(e.to_string()))? {
        Completion::Unitary(u) => {
            if let Some(p) = &a.output {
                write_file(p, &matrix_json(u.matrix()).to_string())?;
            }
            Ok(json!({
                "embeddable": true,
                "sigma_max": e.sigma_max,
                "deviation": u.deviation(),
                "unitary": matrix_json(u.matrix()),
            }))
        }
        Completion::Infeasible { row, radicand } => {
            emit(json!({
                "embeddable": false,
                "sigma_max": e.sigma_max,
                "failed_row": row,
                "radicand": radicand,
            }));
            Err(Failure::Check(format!(
                "block does not embed (sigma_max = {})",
                e.sigma_max
            )))
        }
    }
}

fn cmd_verify(a: &VerifyArgs, cfg: OptimizerConfig) -> CliResult<Value> {
    let known: Vec<&str> = verify::claims().iter().flat_map(|c| [c.id, c.group]).collect();
    if let Some(bad) = a.only.iter().find(|o| !known.contains(&o.as_str())) {
        return Err(usage(format!("unknown claim or group {bad:?}")));
    }
    let report = verify::run(&a.only, &Context::new(cfg));
    eprint!("{}", report.table());
    let value = serde_json::to_value(&report).expect("report serializes");
    if report.all_pass() {
        Ok(value)
    } else {
        emit(value);
        Err(Failure::Check("some claims failed".into()))
    }
}

/// Prints a report; a closed stdout is not an error worth reporting.
fn emit(v: Value) {
    let _ = writeln!(std::io::stdout().lock(), "{}", render(v));
}

fn run(cli: Cli) -> CliResult<Value> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(usage)?;
    }
    let cfg = || load_config(cli.config.as_deref());
    match &cli.command {
        Command::Toffoli(a) => cmd_toffoli(a),
        Command::ControlledU(a) => cmd_controlled_u(a),
        Command::Fredkin(c) => cmd_fredkin(c, cfg()?),
        Command::Complete(a) => cmd_complete(a),
        Command::Verify(a) => cmd_verify(a, cfg()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(v) => {
            emit(v);
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
