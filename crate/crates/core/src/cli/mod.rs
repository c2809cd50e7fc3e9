//! Command-line front end: `run`, `oracle` and `selftest`.

pub mod config;
pub mod experiment;
pub mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ansatz::AnsatzError;
use crate::estimate::{hoeffding_shots, Estimator};
use crate::linalg::{ComplexMatrix, LinalgError, C64};
use crate::objective::{ConstrainedHamiltonian, ObjectiveError};
use crate::optimizer::{parameter_shift_gradient, OptimizerError};
use crate::oracle::{exact_negativity, exact_trace_distance, sdp_cham_value, OracleError};

pub use config::{AnsatzKind, AnsatzSpec, ExperimentConfig, ProblemTag};
pub use experiment::{Experiment, Outcome};

/// Relative output directories are resolved under this.
pub const OUTPUT_ROOT_ENV: &str = "QSLACK_OUTPUT_ROOT";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Parser)]
#[command(name = "qslack", about = "Penalty-method primal/dual bounds with parameterized states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every seed of an experiment and write CSV, JSON and SVG outputs.
    Run {
        config: PathBuf,
        /// Override the output root (otherwise $QSLACK_OUTPUT_ROOT or ./output).
        #[arg(long)]
        output_root: Option<PathBuf>,
    },
    /// Print the ground-truth value for a config's problem instance.
    Oracle { config: PathBuf },
    /// Quick internal consistency checks.
    Selftest,
}

pub fn output_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("output"))
}

/// Load, run and write one experiment. Returns the outcome and its directory.
pub fn run_experiment(cfg: ExperimentConfig, root: &Path) -> Result<(Outcome, PathBuf), CliError> {
    let dir = cfg.output_path(root);
    let out = Experiment::new(cfg)?.run_all()?;
    output::write_outcome(&dir, &out)?;
    Ok((out, dir))
}

pub fn main_with(cli: Cli) -> ExitCode {
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Run { config, output_root: root } => {
            let cfg = ExperimentConfig::load(&config)?;
            let (out, dir) = run_experiment(cfg, &output_root(root))?;
            println!(
                "{}: oracle {:.6}, median final error {:.3e} over {} runs -> {}",
                out.config.problem,
                out.oracle.value,
                out.median_final_error(),
                out.records.len(),
                dir.display()
            );
            for (k, r) in out.records.iter().enumerate() {
                if let Some(m) = &r.aborted {
                    eprintln!("run {k} aborted: {m}");
                }
            }
            Ok(out.all_completed())
        }
        Command::Oracle { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let inputs = experiment::build_inputs(&cfg)?;
            let r = experiment::compute_oracle(&cfg, &inputs)?;
            println!("{}", serde_json::to_string(&r).map_err(|e| CliError::Io(e.to_string()))?);
            Ok(true)
        }
        Command::Selftest => Ok(selftest()),
    }
}

fn check(name: &str, ok: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

/// Oracle golden values, expansion against dense evaluation on every problem,
/// the Hoeffding count and one parameter-shift derivative.
pub fn selftest() -> bool {
    let mut ok = true;
    let k0 = ComplexMatrix::diag(&[1.0, 0.0]);
    let plus = ComplexMatrix::from_fn(2, 2, |_, _| C64::new(0.5, 0.0));
    let td = exact_trace_distance(&k0, &plus).unwrap_or(f64::NAN);
    ok &= check("trace distance |0> vs |+>", (td - 0.5f64.sqrt()).abs() < 1e-9, format!("{td:.10}"));
    let bell = ComplexMatrix::from_fn(4, 4, |i, j| C64::new(if (i == 0 || i == 3) && (j == 0 || j == 3) { 0.5 } else { 0.0 }, 0.0));
    let neg = exact_negativity(&bell, 2, 2).unwrap_or(f64::NAN);
    ok &= check("Bell negativity", (neg - 2.0).abs() < 1e-9, format!("{neg:.10}"));
    let inst = ConstrainedHamiltonian::two_qubit_example();
    let a: Vec<ComplexMatrix> = (0..inst.n_constraints()).map(|i| inst.constraint(i)).collect();
    let cham = sdp_cham_value(&inst.hamiltonian(), &a, inst.bounds()).map(|r| r.value).unwrap_or(f64::NAN);
    ok &= check("constrained Hamiltonian", (cham + 2.2097).abs() < 1e-3, format!("{cham:.6}"));
    let h = hoeffding_shots(0.1, 0.05).unwrap_or(0);
    ok &= check("Hoeffding shots (0.1, 0.05)", h == 185, h.to_string());

    let mut worst = 0.0f64;
    let mut failed = None;
    for tag in ProblemTag::ALL {
        let kind = if tag.is_classical() { AnsatzKind::Born } else { AnsatzKind::Purification };
        let exp = match Experiment::new(ExperimentConfig::defaults(tag, kind)) {
            Ok(e) => e,
            Err(e) => {
                failed = Some(format!("{tag}: {e}"));
                break;
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let mut p = exp.objective.init_params(&mut rng);
            for x in &mut p[exp.objective.scalar_range()] {
                *x += 0.5;
            }
            match (exp.objective.value(&p, &mut Estimator::exact()), exp.objective.dense_value(&p)) {
                (Ok(a), Ok(b)) => worst = worst.max((a - b).abs() / (1.0 + b.abs())),
                (Err(ObjectiveError::Infeasible(_)), _) => {}
                (a, b) => failed = Some(format!("{tag}: {a:?} / {b:?}")),
            }
        }
    }
    ok &= check(
        "expansion matches dense evaluation",
        failed.is_none() && worst < 1e-9,
        failed.unwrap_or_else(|| format!("worst relative gap {worst:.2e}")),
    );

    let mut cfg = ExperimentConfig::defaults(ProblemTag::TraceDistanceDual, AnsatzKind::Purification);
    cfg.n_qubits = 1;
    let shift = Experiment::new(cfg).map_err(|e| e.to_string()).and_then(|exp| {
        let obj = &exp.objective;
        let p = obj.init_params(&mut ChaCha8Rng::seed_from_u64(3));
        let g = parameter_shift_gradient(obj, &p, 0).map_err(|e| e.to_string())?;
        let (mut hi, mut lo) = (p.clone(), p);
        hi[0] += 1e-5;
        lo[0] -= 1e-5;
        let fd = (obj.dense_value(&hi).map_err(|e| e.to_string())? - obj.dense_value(&lo).map_err(|e| e.to_string())?)
            / 2e-5;
        Ok((g - fd).abs())
    });
    ok &= match shift {
        Ok(d) => check("parameter shift vs finite difference", d < 1e-6, format!("{d:.2e}")),
        Err(e) => check("parameter shift vs finite difference", false, e),
    };
    ok
}
