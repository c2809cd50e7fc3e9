//! Turning a config into inputs, a bound objective and its ground truth, and
//! running the seeded campaign.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{AnsatzSpec, ExperimentConfig, ProblemTag};
use super::CliError;
use crate::ansatz::{Ansatz, BornMachine, ConvexCombinationAnsatz, PurificationAnsatz};
use crate::estimate::{Estimator, ShotModel};
use crate::linalg::ComplexMatrix;
use crate::objective::{
    ChamDual, ChamInteriorPoint, ChamPrimal, ClassicalChamDual, ClassicalChamPrimal, ClassicalInstance,
    ConstrainedHamiltonian, FidelityDual, FidelityPrimal, NegativityDual, NegativityPrimal, PenaltyObjective, Problem,
    SlotKind, TraceDistanceDual, TraceDistancePrimal, TvdDual, TvdPrimal,
};
use crate::optimizer::{aggregate_runs, run_optimization, AggregatePoint, RunRecord, SpsaConfig};
use crate::oracle::{
    exact_negativity, exact_root_fidelity, exact_trace_distance, exact_tvd, lp_classical_cham_value, sdp_cham_value,
    OracleResult,
};

/// Attempts at drawing a strictly feasible start for the barrier objective.
const MAX_FEASIBLE_DRAWS: usize = 10_000;

/// Fixed problem data fed to the objective.
#[derive(Clone, Debug)]
pub enum Inputs {
    States(Vec<ComplexMatrix>),
    Distributions(Vec<Vec<f64>>),
    Quantum(ConstrainedHamiltonian),
    Classical(ClassicalInstance),
}

/// SplitMix64 finalizer, used to derive independent stream seeds.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn random_angles(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    use rand::Rng;
    (0..n).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect()
}

/// Random input states from the same ansatz family as the trainable ones.
fn input_state(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<ComplexMatrix, CliError> {
    let (n, l) = (cfg.n_qubits, cfg.input_layers);
    Ok(match cfg.ansatz {
        AnsatzSpec::ConvexCombination { .. } => {
            let a = ConvexCombinationAnsatz::new(n, l, l);
            a.realize_matrix(&random_angles(a.n_params(), rng))?
        }
        _ => {
            let a = PurificationAnsatz::new(n, n, l);
            a.realize_matrix(&random_angles(a.n_params(), rng))?
        }
    })
}

/// Subsystem split for negativity: B gets the extra qubit when n is odd.
pub fn bipartition(n: usize) -> (usize, usize) {
    (n / 2, n - n / 2)
}

pub fn build_inputs(cfg: &ExperimentConfig) -> Result<Inputs, CliError> {
    use ProblemTag::*;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.input_seed);
    Ok(match cfg.problem {
        TraceDistancePrimal | TraceDistanceDual | FidelityPrimal | FidelityDual => {
            Inputs::States(vec![input_state(cfg, &mut rng)?, input_state(cfg, &mut rng)?])
        }
        NegativityPrimal | NegativityDual => Inputs::States(vec![input_state(cfg, &mut rng)?]),
        ChamPrimal | ChamDual | ChamInteriorPoint => Inputs::Quantum(ConstrainedHamiltonian::two_qubit_example()),
        TvdPrimal | TvdDual => {
            let born = BornMachine::new(cfg.n_qubits, cfg.input_layers);
            let p = born.distribution(&random_angles(born.n_params(), &mut rng))?;
            let q = born.distribution(&random_angles(born.n_params(), &mut rng))?;
            Inputs::Distributions(vec![p, q])
        }
        ClassicalChamPrimal | ClassicalChamDual => Inputs::Classical(ClassicalInstance::two_bit_example()),
    })
}

pub fn build_problem(cfg: &ExperimentConfig, inputs: &Inputs) -> Result<Box<dyn Problem>, CliError> {
    use ProblemTag as P;
    let (n, c) = (cfg.n_qubits, cfg.penalty);
    let mismatch = || CliError::Config(format!("inputs do not fit {}", cfg.problem));
    Ok(match (cfg.problem, inputs) {
        (P::TraceDistancePrimal, Inputs::States(s)) => Box::new(TraceDistancePrimal::new(n, s[0].clone(), s[1].clone(), c)?),
        (P::TraceDistanceDual, Inputs::States(s)) => Box::new(TraceDistanceDual::new(n, s[0].clone(), s[1].clone(), c)?),
        (P::FidelityPrimal, Inputs::States(s)) => Box::new(FidelityPrimal::new(n, s[0].clone(), s[1].clone(), c)?),
        (P::FidelityDual, Inputs::States(s)) => Box::new(FidelityDual::new(n, s[0].clone(), s[1].clone(), c)?),
        (P::NegativityPrimal, Inputs::States(s)) => {
            let (na, nb) = bipartition(n);
            Box::new(NegativityPrimal::new(na, nb, s[0].clone(), c)?)
        }
        (P::NegativityDual, Inputs::States(s)) => {
            let (na, nb) = bipartition(n);
            Box::new(NegativityDual::new(na, nb, s[0].clone(), c)?)
        }
        (P::ChamPrimal, Inputs::Quantum(h)) => Box::new(ChamPrimal::new(h.clone(), c)?),
        (P::ChamDual, Inputs::Quantum(h)) => Box::new(ChamDual::new(h.clone(), c)?),
        (P::ChamInteriorPoint, Inputs::Quantum(h)) => Box::new(ChamInteriorPoint::new(h.clone(), cfg.eta)?),
        (P::TvdPrimal, Inputs::Distributions(d)) => Box::new(TvdPrimal::new(n, d[0].clone(), d[1].clone(), c)?),
        (P::TvdDual, Inputs::Distributions(d)) => Box::new(TvdDual::new(n, d[0].clone(), d[1].clone(), c)?),
        (P::ClassicalChamPrimal, Inputs::Classical(i)) => Box::new(ClassicalChamPrimal::new(i.clone(), c)?),
        (P::ClassicalChamDual, Inputs::Classical(i)) => Box::new(ClassicalChamDual::new(i.clone(), c)?),
        _ => return Err(mismatch()),
    })
}

/// One trainable ansatz per slot, sized to the slot.
pub fn build_objective(cfg: &ExperimentConfig, problem: Box<dyn Problem>) -> Result<PenaltyObjective, CliError> {
    let ansatze = problem
        .slots()
        .iter()
        .map(|s| match (cfg.ansatz, s.kind) {
            (AnsatzSpec::Purification { layers }, SlotKind::Quantum) => {
                Ok(Ansatz::Purification(PurificationAnsatz::new(s.n, s.n, layers)))
            }
            (AnsatzSpec::ConvexCombination { layers, born_layers }, SlotKind::Quantum) => {
                Ok(Ansatz::ConvexCombination(ConvexCombinationAnsatz::new(s.n, layers, born_layers)))
            }
            (AnsatzSpec::Born { layers }, SlotKind::Classical) => Ok(Ansatz::Born(BornMachine::new(s.n, layers))),
            _ => Err(CliError::Config(format!("{} ansatz cannot fill slot {}", cfg.ansatz.kind_name(), s.name))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PenaltyObjective::new(problem, ansatze)?)
}

pub fn compute_oracle(cfg: &ExperimentConfig, inputs: &Inputs) -> Result<OracleResult, CliError> {
    use ProblemTag::*;
    Ok(match (cfg.problem, inputs) {
        (TraceDistancePrimal | TraceDistanceDual, Inputs::States(s)) => {
            OracleResult::closed(exact_trace_distance(&s[0], &s[1])?)
        }
        (FidelityPrimal | FidelityDual, Inputs::States(s)) => OracleResult::closed(exact_root_fidelity(&s[0], &s[1])?),
        (NegativityPrimal | NegativityDual, Inputs::States(s)) => {
            let (na, nb) = bipartition(cfg.n_qubits);
            OracleResult::closed(exact_negativity(&s[0], 1 << na, 1 << nb)?)
        }
        (ChamPrimal | ChamDual | ChamInteriorPoint, Inputs::Quantum(h)) => {
            let a: Vec<ComplexMatrix> = (0..h.n_constraints()).map(|i| h.constraint(i)).collect();
            sdp_cham_value(&h.hamiltonian(), &a, h.bounds())?
        }
        (TvdPrimal | TvdDual, Inputs::Distributions(d)) => OracleResult::closed(exact_tvd(&d[0], &d[1])?),
        (ClassicalChamPrimal | ClassicalChamDual, Inputs::Classical(i)) => {
            let a: Vec<Vec<f64>> = (0..i.n_constraints()).map(|k| i.constraint_vector(k)).collect();
            lp_classical_cham_value(&i.h_vector(), &a, i.bounds())?
        }
        _ => return Err(CliError::Config(format!("inputs do not fit {}", cfg.problem))),
    })
}

/// Everything needed to train: objective, ground truth and the config.
#[derive(Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub objective: PenaltyObjective,
    pub oracle: OracleResult,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self, CliError> {
        config.validate()?;
        let inputs = build_inputs(&config)?;
        let oracle = compute_oracle(&config, &inputs)?;
        let objective = build_objective(&config, build_problem(&config, &inputs)?)?;
        Ok(Self { config, objective, oracle })
    }

    pub fn run_seed(&self, k: usize) -> u64 {
        mix_seed(self.config.seed, k as u64)
    }

    /// Uniform angles and default scalars; for the barrier objective the
    /// angles are redrawn until the start is strictly feasible.
    pub fn initial_params(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, CliError> {
        if self.config.problem != ProblemTag::ChamInteriorPoint {
            return Ok(self.objective.init_params(rng));
        }
        for _ in 0..MAX_FEASIBLE_DRAWS {
            let p = self.objective.init_params(rng);
            if self.objective.value(&p, &mut Estimator::exact()).is_ok() {
                return Ok(p);
            }
        }
        Err(CliError::Config(format!("no strictly feasible start in {MAX_FEASIBLE_DRAWS} draws")))
    }

    /// Run `k` of the campaign.
    pub fn run(&self, k: usize) -> Result<RunRecord, CliError> {
        let cfg = &self.config;
        let seed = self.run_seed(k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let init = self.initial_params(&mut rng)?;
        let spsa = SpsaConfig {
            perturbation: cfg.perturbation,
            learning_rate: cfg.learning_rate,
            normalize: cfg.normalize,
            max_iters: cfg.max_iters,
            seed: mix_seed(seed, 1),
        };
        let mut est = match cfg.shots {
            ShotModel::Exact => Estimator::exact(),
            ShotModel::Shots { n, seed: s } => Estimator::new(ShotModel::Shots { n, seed: mix_seed(seed, 2) ^ s }),
        };
        let mut rec = run_optimization(&self.objective, init, &spsa, &cfg.schedule, &mut est, Some(self.oracle.value))?;
        rec.seed = seed;
        Ok(rec)
    }

    pub fn run_all(&self) -> Result<Outcome, CliError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let records: Vec<RunRecord> =
            pool.install(|| (0..self.config.n_runs).into_par_iter().map(|k| self.run(k)).collect::<Result<_, _>>())?;
        let summary = aggregate_runs(&records);
        Ok(Outcome { config: self.config.clone(), oracle: self.oracle.clone(), records, summary })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub config: ExperimentConfig,
    pub oracle: OracleResult,
    pub records: Vec<RunRecord>,
    pub summary: Vec<AggregatePoint>,
}

impl Outcome {
    pub fn final_errors(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.final_error()).collect()
    }

    pub fn final_objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.final_objective()).collect()
    }

    pub fn median_final_error(&self) -> f64 {
        crate::optimizer::median(&self.final_errors())
    }

    pub fn all_completed(&self) -> bool {
        self.records.iter().all(|r| r.aborted.is_none())
    }
}
