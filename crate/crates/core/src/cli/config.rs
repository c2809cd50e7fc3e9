//! Experiment configuration: a JSON document whose omitted fields are filled
//! from the per-problem hyperparameter tables.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::estimate::ShotModel;
use crate::optimizer::LrSchedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemTag {
    TraceDistancePrimal,
    TraceDistanceDual,
    FidelityPrimal,
    FidelityDual,
    NegativityPrimal,
    NegativityDual,
    ChamPrimal,
    ChamDual,
    ChamInteriorPoint,
    TvdPrimal,
    TvdDual,
    ClassicalChamPrimal,
    ClassicalChamDual,
}

impl ProblemTag {
    pub const ALL: [ProblemTag; 13] = [
        ProblemTag::TraceDistancePrimal,
        ProblemTag::TraceDistanceDual,
        ProblemTag::FidelityPrimal,
        ProblemTag::FidelityDual,
        ProblemTag::NegativityPrimal,
        ProblemTag::NegativityDual,
        ProblemTag::ChamPrimal,
        ProblemTag::ChamDual,
        ProblemTag::ChamInteriorPoint,
        ProblemTag::TvdPrimal,
        ProblemTag::TvdDual,
        ProblemTag::ClassicalChamPrimal,
        ProblemTag::ClassicalChamDual,
    ];

    pub fn is_classical(self) -> bool {
        matches!(
            self,
            ProblemTag::TvdPrimal | ProblemTag::TvdDual | ProblemTag::ClassicalChamPrimal | ProblemTag::ClassicalChamDual
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ProblemTag::TraceDistancePrimal => "trace_distance_primal",
            ProblemTag::TraceDistanceDual => "trace_distance_dual",
            ProblemTag::FidelityPrimal => "fidelity_primal",
            ProblemTag::FidelityDual => "fidelity_dual",
            ProblemTag::NegativityPrimal => "negativity_primal",
            ProblemTag::NegativityDual => "negativity_dual",
            ProblemTag::ChamPrimal => "cham_primal",
            ProblemTag::ChamDual => "cham_dual",
            ProblemTag::ChamInteriorPoint => "cham_interior_point",
            ProblemTag::TvdPrimal => "tvd_primal",
            ProblemTag::TvdDual => "tvd_dual",
            ProblemTag::ClassicalChamPrimal => "classical_cham_primal",
            ProblemTag::ClassicalChamDual => "classical_cham_dual",
        }
    }
}

impl fmt::Display for ProblemTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnsatzSpec {
    Purification { layers: usize },
    ConvexCombination { layers: usize, born_layers: usize },
    Born { layers: usize },
}

impl AnsatzSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            AnsatzSpec::Purification { .. } => "purification",
            AnsatzSpec::ConvexCombination { .. } => "convex_combination",
            AnsatzSpec::Born { .. } => "born",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    Purification,
    ConvexCombination,
    Born,
}

/// The document as written; every field except `problem` is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: Option<ProblemTag>,
    n_qubits: Option<usize>,
    ansatz: Option<AnsatzSpec>,
    ansatz_kind: Option<AnsatzKind>,
    penalty: Option<f64>,
    eta: Option<f64>,
    shots: Option<ShotModel>,
    perturbation: Option<f64>,
    learning_rate: Option<f64>,
    normalize: Option<bool>,
    max_iters: Option<usize>,
    schedule: Option<LrSchedule>,
    n_runs: Option<usize>,
    seed: Option<u64>,
    input_seed: Option<u64>,
    input_layers: Option<usize>,
    output_dir: Option<String>,
    workers: Option<usize>,
}

/// A fully resolved experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemTag,
    pub n_qubits: usize,
    pub ansatz: AnsatzSpec,
    pub penalty: f64,
    /// Barrier weight, used by the interior-point variant only.
    pub eta: f64,
    pub shots: ShotModel,
    pub perturbation: f64,
    pub learning_rate: f64,
    pub normalize: bool,
    pub max_iters: usize,
    pub schedule: LrSchedule,
    pub n_runs: usize,
    pub seed: u64,
    /// Seed for the random input states or distributions.
    pub input_seed: u64,
    /// Layers of the circuits that generate the inputs.
    pub input_layers: usize,
    pub output_dir: String,
    pub workers: usize,
}

/// Per-problem hyperparameter defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub ansatz: AnsatzSpec,
    pub penalty: f64,
    pub schedule: LrSchedule,
    pub learning_rate: f64,
    pub normalize: bool,
    pub max_iters: usize,
}

pub const QUANTUM_ITERS: usize = 100_000;
pub const CLASSICAL_ITERS: usize = 10_000;
pub const DEFAULT_PERTURBATION: f64 = 0.01;

fn reg(window: usize) -> LrSchedule {
    LrSchedule::Regression { window, min_lr: 0.001 }
}

fn bidir(window: usize, factor: f64) -> LrSchedule {
    LrSchedule::RegressionBidir { window, factor, min_lr: 0.001, max_lr: 0.1 }
}

fn halve(period: usize) -> LrSchedule {
    LrSchedule::HalveEvery { period, min_lr: 0.001 }
}

pub fn table_defaults(problem: ProblemTag, kind: AnsatzKind) -> TableRow {
    use ProblemTag::*;
    let row = |ansatz, penalty, schedule| TableRow {
        ansatz,
        penalty,
        schedule,
        learning_rate: 0.1,
        normalize: true,
        max_iters: if problem.is_classical() { CLASSICAL_ITERS } else { QUANTUM_ITERS },
    };
    let pur = |layers| AnsatzSpec::Purification { layers };
    let cc = |layers, born_layers| AnsatzSpec::ConvexCombination { layers, born_layers };
    let born = |layers| AnsatzSpec::Born { layers };
    match (problem, kind) {
        (_, AnsatzKind::Born) | (TvdPrimal | TvdDual | ClassicalChamPrimal | ClassicalChamDual, _) => match problem {
            TvdPrimal => row(born(2), 10.0, reg(300)),
            TvdDual => row(born(2), 100.0, reg(300)),
            ClassicalChamPrimal | ClassicalChamDual => row(born(3), 10.0, reg(300)),
            _ => row(born(2), 10.0, reg(300)),
        },
        (TraceDistancePrimal, AnsatzKind::Purification) => row(pur(3), 10.0, reg(500)),
        (TraceDistanceDual, AnsatzKind::Purification) => row(pur(3), 100.0, reg(500)),
        (FidelityPrimal, AnsatzKind::Purification) => row(pur(4), 45.0, reg(500)),
        (FidelityDual, AnsatzKind::Purification) => row(pur(3), 5.0, reg(300)),
        (NegativityPrimal, AnsatzKind::Purification) => row(pur(3), 5.0, reg(500)),
        (NegativityDual, AnsatzKind::Purification) => row(pur(3), 100.0, reg(500)),
        (ChamPrimal, AnsatzKind::Purification) => row(pur(2), 100.0, halve(10000)),
        // Plain SPSA steps scale with the penalty gradient, so this one starts small.
        (ChamDual, AnsatzKind::Purification) => TableRow {
            normalize: false,
            learning_rate: 5e-5,
            ..row(pur(2), 100.0, LrSchedule::HalveEvery { period: 1000, min_lr: 1e-5 })
        },
        (ChamInteriorPoint, AnsatzKind::Purification) => row(pur(2), 1.0, reg(500)),
        (TraceDistancePrimal, AnsatzKind::ConvexCombination) => {
            TableRow { learning_rate: 0.005, ..row(cc(4, 2), 10.0, LrSchedule::Fixed) }
        }
        (TraceDistanceDual, AnsatzKind::ConvexCombination) => row(cc(3, 2), 100.0, halve(1000)),
        (FidelityPrimal, AnsatzKind::ConvexCombination) => row(cc(8, 3), 50.0, bidir(500, 1.1)),
        (FidelityDual, AnsatzKind::ConvexCombination) => row(cc(4, 3), 5.0, bidir(500, 1.1)),
        (NegativityPrimal, AnsatzKind::ConvexCombination) => row(cc(2, 1), 5.0, reg(500)),
        (NegativityDual, AnsatzKind::ConvexCombination) => row(cc(3, 2), 100.0, reg(500)),
        (ChamPrimal | ChamDual, AnsatzKind::ConvexCombination) => row(cc(15, 2), 100.0, halve(1000)),
        (ChamInteriorPoint, AnsatzKind::ConvexCombination) => row(cc(15, 2), 1.0, reg(500)),
    }
}

fn ansatz_kind(spec: &AnsatzSpec) -> AnsatzKind {
    match spec {
        AnsatzSpec::Purification { .. } => AnsatzKind::Purification,
        AnsatzSpec::ConvexCombination { .. } => AnsatzKind::ConvexCombination,
        AnsatzSpec::Born { .. } => AnsatzKind::Born,
    }
}

impl ExperimentConfig {
    /// Table defaults for `problem` with the given ansatz family.
    pub fn defaults(problem: ProblemTag, kind: AnsatzKind) -> Self {
        let row = table_defaults(problem, kind);
        Self {
            problem,
            n_qubits: 2,
            ansatz: row.ansatz,
            penalty: row.penalty,
            eta: 0.01,
            shots: ShotModel::Exact,
            perturbation: DEFAULT_PERTURBATION,
            learning_rate: row.learning_rate,
            normalize: row.normalize,
            max_iters: row.max_iters,
            schedule: row.schedule,
            n_runs: 5,
            seed: 0,
            input_seed: 2024,
            input_layers: 2,
            output_dir: format!("{}_{}", problem.name(), row.ansatz.kind_name()),
            workers: 1,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
        let problem = raw.problem.ok_or_else(|| CliError::Config("missing field `problem`".into()))?;
        let kind = match (raw.ansatz.as_ref(), raw.ansatz_kind) {
            (Some(spec), _) => ansatz_kind(spec),
            (None, Some(k)) => k,
            (None, None) if problem.is_classical() => AnsatzKind::Born,
            (None, None) => AnsatzKind::Purification,
        };
        let mut cfg = Self::defaults(problem, kind);
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = raw.$f { cfg.$f = v; })* };
        }
        take!(n_qubits, ansatz, penalty, eta, shots, perturbation, learning_rate, normalize, max_iters, schedule);
        take!(n_runs, seed, input_seed, input_layers, output_dir, workers);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |s: String| Err(CliError::Config(s));
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return bad(format!("penalty must be positive, got {}", self.penalty));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if self.n_qubits == 0 || self.n_qubits > 4 {
            return bad(format!("n_qubits must be between 1 and 4, got {}", self.n_qubits));
        }
        if self.n_runs == 0 || self.workers == 0 || self.input_layers == 0 {
            return bad("n_runs, workers and input_layers must be positive".into());
        }
        let layers = match self.ansatz {
            AnsatzSpec::Purification { layers } | AnsatzSpec::Born { layers } => layers,
            AnsatzSpec::ConvexCombination { layers, born_layers } => layers.min(born_layers),
        };
        if layers == 0 {
            return bad("ansatz layer counts must be positive".into());
        }
        let classical_ansatz = matches!(self.ansatz, AnsatzSpec::Born { .. });
        if classical_ansatz != self.problem.is_classical() {
            return bad(format!("{} cannot use the {} ansatz", self.problem, self.ansatz.kind_name()));
        }
        let fixed_size = matches!(
            self.problem,
            ProblemTag::ChamPrimal
                | ProblemTag::ChamDual
                | ProblemTag::ChamInteriorPoint
                | ProblemTag::ClassicalChamPrimal
                | ProblemTag::ClassicalChamDual
        );
        if fixed_size && self.n_qubits != 2 {
            return bad(format!("{} is defined on 2 (qu)bits", self.problem));
        }
        if !(self.perturbation > 0.0) || !(self.learning_rate > 0.0) {
            return bad("perturbation and learning_rate must be positive".into());
        }
        self.schedule.validate().map_err(|e| CliError::Config(e.to_string()))
    }

    /// `output_dir` under `root` unless it is absolute.
    pub fn output_path(&self, root: &Path) -> PathBuf {
        let p = Path::new(&self.output_dir);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            root.join(p)
        }
    }
}
