//! SPSA training loop, parameter-shift gradients and learning-rate schedules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ansatz::Realized;
use crate::estimate::Estimator;
use crate::objective::{combine, ObjectiveError, PenaltyObjective, Sense};

/// Learning-rate schedules are revisited only at multiples of this.
pub const LR_CHECK_PERIOD: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("bad optimizer config: {0}")]
    Config(String),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

pub type Result<T> = std::result::Result<T, OptimizerError>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpsaConfig {
    #[serde(default = "default_perturbation")]
    pub perturbation: f64,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_true")]
    pub normalize: bool,
    pub max_iters: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_perturbation() -> f64 {
    0.01
}

fn default_lr() -> f64 {
    0.1
}

fn default_true() -> bool {
    true
}

impl SpsaConfig {
    pub fn new(max_iters: usize, seed: u64) -> Self {
        Self { perturbation: default_perturbation(), learning_rate: 0.1, normalize: true, max_iters, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.perturbation > 0.0 && self.perturbation.is_finite()) {
            return Err(OptimizerError::Config(format!("perturbation must be positive, got {}", self.perturbation)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(OptimizerError::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LrSchedule {
    Fixed,
    /// Halve every `period` iterations, not below `min_lr`.
    HalveEvery {
        period: usize,
        #[serde(default = "default_min_lr")]
        min_lr: f64,
    },
    /// Halve when a line fit over the last `window` objectives moves the wrong way.
    Regression {
        window: usize,
        #[serde(default = "default_min_lr")]
        min_lr: f64,
    },
    /// As `Regression`, and multiply by `factor` (up to `max_lr`) when it moves the right way.
    RegressionBidir {
        window: usize,
        factor: f64,
        #[serde(default = "default_min_lr")]
        min_lr: f64,
        #[serde(default = "default_lr")]
        max_lr: f64,
    },
}

fn default_min_lr() -> f64 {
    0.001
}

impl LrSchedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(OptimizerError::Config(s));
        match *self {
            LrSchedule::Fixed => Ok(()),
            LrSchedule::HalveEvery { period, min_lr } => {
                if period == 0 || period % LR_CHECK_PERIOD != 0 {
                    return bad(format!("halving period must be a positive multiple of {LR_CHECK_PERIOD}"));
                }
                if !(min_lr > 0.0) {
                    return bad("min_lr must be positive".into());
                }
                Ok(())
            }
            LrSchedule::Regression { window, min_lr } => {
                if window < 2 || !(min_lr > 0.0) {
                    return bad("regression window must be ≥ 2 and min_lr positive".into());
                }
                Ok(())
            }
            LrSchedule::RegressionBidir { window, factor, min_lr, max_lr } => {
                if window < 2 || !(min_lr > 0.0) || !(factor > 1.0) || !(max_lr >= min_lr) {
                    return bad("need window ≥ 2, factor > 1 and 0 < min_lr ≤ max_lr".into());
                }
                Ok(())
            }
        }
    }
}

/// Least-squares slope of `ys` against 0, 1, 2, ...
pub fn regression_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    if ys.len() < 2 {
        return 0.0;
    }
    let xm = (n - 1.0) / 2.0;
    let ym = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (y - ym);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// New learning rate after `iter` completed iterations with objective `history`.
/// Changes happen only when `iter` is a positive multiple of [`LR_CHECK_PERIOD`].
/// A slope of exactly zero counts as neither adverse nor favorable.
pub fn lr_step(schedule: &LrSchedule, iter: usize, history: &[f64], sense: Sense, lr: f64) -> f64 {
    if iter == 0 || iter % LR_CHECK_PERIOD != 0 {
        return lr;
    }
    let trend = |window: usize| -> Option<f64> {
        if history.len() < window {
            return None;
        }
        // positive means improving
        Some(-sense.descent_sign() * regression_slope(&history[history.len() - window..]))
    };
    match *schedule {
        LrSchedule::Fixed => lr,
        LrSchedule::HalveEvery { period, min_lr } => {
            if iter % period == 0 {
                (lr / 2.0).max(min_lr)
            } else {
                lr
            }
        }
        LrSchedule::Regression { window, min_lr } => match trend(window) {
            Some(t) if t < 0.0 => (lr / 2.0).max(min_lr),
            _ => lr,
        },
        LrSchedule::RegressionBidir { window, factor, min_lr, max_lr } => match trend(window) {
            Some(t) if t < 0.0 => (lr / 2.0).max(min_lr),
            Some(t) if t > 0.0 && lr < max_lr => (lr * factor).min(max_lr),
            _ => lr,
        },
    }
}

/// One SPSA draw: ĝ_k = [f(θ + cΔ) − f(θ − cΔ)] / (2cΔ_k), Δ_k = ±1.
pub fn spsa_gradient<E, F, R>(mut f: F, theta: &[f64], c_pert: f64, rng: &mut R) -> std::result::Result<Vec<f64>, E>
where
    F: FnMut(&[f64]) -> std::result::Result<f64, E>,
    R: Rng + ?Sized,
{
    let delta: Vec<f64> = (0..theta.len()).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + c_pert * d).collect();
    let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - c_pert * d).collect();
    let diff = f(&plus)? - f(&minus)?;
    Ok(delta.iter().map(|d| diff / (2.0 * c_pert * d)).collect())
}

/// g/‖g‖, or zero when ‖g‖ < 1e-15.
pub fn normalize_gradient(g: &[f64]) -> Vec<f64> {
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-15 {
        return vec![0.0; g.len()];
    }
    g.iter().map(|x| x / norm).collect()
}

/// Exact ∂/∂θ_k of the objective. Circuit angles use the shifted-state
/// substitution ½[ρ(θ + π/2 e_k) − ρ(θ − π/2 e_k)], valid because every
/// parameter drives one half-angle Pauli rotation. Scalars enter at most
/// quadratically and use a unit central difference, which is exact there.
pub fn parameter_shift_gradient(obj: &PenaltyObjective, params: &[f64], k: usize) -> Result<f64> {
    if k >= obj.n_params() {
        return Err(OptimizerError::Config(format!("parameter index {k} out of range")));
    }
    let states = obj.realize(params)?;
    let scalars = &params[obj.scalar_range()];
    if k >= obj.n_circuit_params() {
        let mut est = Estimator::exact();
        let mut p = params.to_vec();
        p[k] = params[k] + 1.0;
        let plus = obj.value(&p, &mut est)?;
        p[k] = params[k] - 1.0;
        let minus = obj.value(&p, &mut est)?;
        return Ok((plus - minus) / 2.0);
    }
    let slot = (0..obj.slots().len()).find(|&s| obj.slot_range(s).contains(&k)).expect("index inside a slot");
    let range = obj.slot_range(slot);
    let ansatz = &obj.ansatze()[slot];
    let mut local = params[range.clone()].to_vec();
    let j = k - range.start;
    local[j] = params[k] + std::f64::consts::FRAC_PI_2;
    let plus = ansatz.realize(&local).map_err(ObjectiveError::from)?;
    local[j] = params[k] - std::f64::consts::FRAC_PI_2;
    let minus = ansatz.realize(&local).map_err(ObjectiveError::from)?;
    let dir = match combine(&plus, &minus, -1.0) {
        Realized::Density(m) => Realized::Density(m.scale(0.5)),
        Realized::Distribution(p) => Realized::Distribution(p.iter().map(|x| x / 2.0).collect()),
    };
    Ok(obj.problem().state_derivative(&states, scalars, slot, &dir)?)
}

pub fn parameter_shift_full(obj: &PenaltyObjective, params: &[f64]) -> Result<Vec<f64>> {
    (0..obj.n_params()).map(|k| parameter_shift_gradient(obj, params, k)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub objective: f64,
    pub penalty: f64,
    pub error: Option<f64>,
    pub lr: f64,
    pub scalars: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    /// Entry 0 is the initial point; one more entry per completed step.
    pub iterations: Vec<IterRecord>,
    pub final_params: Vec<f64>,
    /// Steps skipped because a perturbed point left the barrier's domain.
    pub skipped_steps: usize,
    /// Set when the run stopped on a non-finite objective.
    pub aborted: Option<String>,
}

impl RunRecord {
    pub fn last(&self) -> &IterRecord {
        self.iterations.last().expect("record holds the initial evaluation")
    }

    pub fn final_objective(&self) -> f64 {
        self.last().objective
    }

    pub fn final_error(&self) -> Option<f64> {
        self.last().error
    }
}

fn clamp_nonneg(params: &mut [f64], mask: &[bool]) {
    for (p, &m) in params.iter_mut().zip(mask) {
        if m && *p < 0.0 {
            *p = 0.0;
        }
    }
}

/// Train from `init` for `cfg.max_iters` SPSA steps. Each step spends one
/// evaluation to record the current objective and two on the gradient.
pub fn run_optimization(
    obj: &PenaltyObjective,
    init: Vec<f64>,
    cfg: &SpsaConfig,
    schedule: &LrSchedule,
    est: &mut Estimator,
    oracle: Option<f64>,
) -> Result<RunRecord> {
    cfg.validate()?;
    schedule.validate()?;
    if init.len() != obj.n_params() {
        return Err(OptimizerError::Config(format!("expected {} initial parameters, got {}", obj.n_params(), init.len())));
    }
    let mask = obj.nonneg_mask();
    let sense = obj.sense();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = init;
    clamp_nonneg(&mut params, &mask);
    let mut lr = cfg.learning_rate;
    let mut history = Vec::with_capacity(cfg.max_iters + 1);
    let mut record = RunRecord {
        seed: cfg.seed,
        iterations: Vec::with_capacity(cfg.max_iters + 1),
        final_params: Vec::new(),
        skipped_steps: 0,
        aborted: None,
    };
    for iter in 0..=cfg.max_iters {
        let tb = obj.evaluate(&params, est)?;
        if !tb.value.is_finite() {
            record.aborted = Some(format!("non-finite objective {} at iteration {iter}", tb.value));
            break;
        }
        history.push(tb.value);
        lr = lr_step(schedule, iter, &history, sense, lr);
        record.iterations.push(IterRecord {
            iter,
            objective: tb.value,
            penalty: tb.penalty,
            error: oracle.map(|o| (tb.value - o).abs()),
            lr,
            scalars: params[obj.scalar_range()].to_vec(),
        });
        if iter == cfg.max_iters {
            break;
        }
        let g = match spsa_gradient(|t| obj.value(t, est), &params, cfg.perturbation, &mut rng) {
            Ok(g) => g,
            Err(ObjectiveError::Infeasible(_)) => {
                record.skipped_steps += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        if g.iter().any(|x| !x.is_finite()) {
            record.aborted = Some(format!("non-finite gradient at iteration {iter}"));
            break;
        }
        let g = if cfg.normalize { normalize_gradient(&g) } else { g };
        let step = sense.descent_sign() * lr;
        for (p, gk) in params.iter_mut().zip(&g) {
            *p -= step * gk;
        }
        clamp_nonneg(&mut params, &mask);
    }
    record.final_params = params;
    Ok(record)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregatePoint {
    pub iter: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub median_error: Option<f64>,
}

/// Quantile by linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

/// Per-iteration median and interquartile range over runs, truncated to the
/// shortest run.
pub fn aggregate_runs(records: &[RunRecord]) -> Vec<AggregatePoint> {
    let len = records.iter().map(|r| r.iterations.len()).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let mut v: Vec<f64> = records.iter().map(|r| r.iterations[i].objective).collect();
            v.sort_by(f64::total_cmp);
            let errs: Option<Vec<f64>> = records.iter().map(|r| r.iterations[i].error).collect();
            AggregatePoint {
                iter: records[0].iterations[i].iter,
                median: quantile(&v, 0.5),
                q1: quantile(&v, 0.25),
                q3: quantile(&v, 0.75),
                median_error: errs.map(|e| median(&e)),
            }
        })
        .collect()
}
