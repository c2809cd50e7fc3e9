//! Penalty objectives. Each problem exposes a term-by-term evaluation through
//! an [`Estimator`] and an independent dense evaluation; [`PenaltyObjective`]
//! binds a problem to concrete ansätze and a flat parameter vector.

mod classical;
mod fidelity;
mod generic;
mod hamiltonian;
mod negativity;
mod trace_distance;

pub use classical::{ClassicalChamDual, ClassicalChamPrimal, ClassicalInstance, TvdDual, TvdPrimal};
pub use fidelity::{FidelityDual, FidelityPrimal};
pub use generic::{GenericDual, GenericPrimal, OperatorBasis, OperatorExpansion, SdpInstance, SuperOperator};
pub use hamiltonian::{ChamDual, ChamInteriorPoint, ChamPrimal, ConstrainedHamiltonian};
pub use negativity::{NegativityDual, NegativityPrimal};
pub use trace_distance::{TraceDistanceDual, TraceDistancePrimal};

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::ansatz::{Ansatz, AnsatzError, Realized};
use crate::estimate::{Estimate, EstimateError, Estimator};
use crate::linalg::{ComplexMatrix, LinalgError};
use crate::pauli::{default_term_cap, PauliError, PauliString};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error("parameter layout: {0}")]
    Layout(String),
    #[error("dimension mismatch: {0}")]
    Dim(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("barrier violated: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

pub type Result<T> = std::result::Result<T, ObjectiveError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// +1 for minimization, -1 for maximization: descent direction multiplier.
    pub fn descent_sign(self) -> f64 {
        match self {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotKind {
    Quantum,
    Classical,
}

/// A trainable state or distribution the problem consumes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSlot {
    pub name: &'static str,
    pub n: usize,
    pub kind: SlotKind,
}

impl StateSlot {
    pub fn quantum(name: &'static str, n: usize) -> Self {
        Self { name, n, kind: SlotKind::Quantum }
    }

    pub fn classical(name: &'static str, n: usize) -> Self {
        Self { name, n, kind: SlotKind::Classical }
    }
}

/// A trainable scalar: λ, μ, a slack z_i, one real coefficient of α, ...
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSpec {
    pub name: &'static str,
    pub index: Option<usize>,
    pub nonneg: bool,
    pub init: f64,
}

impl ScalarSpec {
    pub fn nonneg(name: &'static str, init: f64) -> Self {
        Self { name, index: None, nonneg: true, init }
    }

    pub fn free(name: &'static str, init: f64) -> Self {
        Self { name, index: None, nonneg: false, init }
    }

    pub fn at(mut self, index: usize) -> Self {
        self.index = Some(index);
        self
    }

    pub fn label(&self) -> String {
        match self.index {
            Some(i) => format!("{}[{i}]", self.name),
            None => self.name.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub name: &'static str,
    pub index: Option<usize>,
    pub estimate: Estimate,
}

impl Term {
    pub fn label(&self) -> String {
        match self.index {
            Some(i) => format!("{}[{i}]", self.name),
            None => self.name.to_string(),
        }
    }
}

/// Every estimated quantity plus the recombined objective. `penalty` is the
/// squared constraint violation before multiplication by c.
#[derive(Clone, Debug, PartialEq)]
pub struct TermBreakdown {
    pub terms: Vec<Term>,
    pub value: f64,
    pub penalty: f64,
}

impl TermBreakdown {
    pub fn get(&self, name: &str, index: Option<usize>) -> Option<&Estimate> {
        self.terms.iter().find(|t| t.name == name && t.index == index).map(|t| &t.estimate)
    }
}

/// Records each estimate as it is drawn.
pub struct Recorder<'a> {
    est: &'a mut Estimator,
    terms: Vec<Term>,
}

impl<'a> Recorder<'a> {
    pub fn new(est: &'a mut Estimator) -> Self {
        Self { est, terms: Vec::new() }
    }

    fn push(&mut self, name: &'static str, index: Option<usize>, estimate: Estimate) -> f64 {
        self.terms.push(Term { name, index, estimate });
        estimate.value
    }

    pub fn pauli(&mut self, name: &'static str, index: Option<usize>, rho: &ComplexMatrix, p: &PauliString) -> Result<f64> {
        let e = self.est.pauli(rho, p)?;
        Ok(self.push(name, index, e))
    }

    pub fn overlap(&mut self, name: &'static str, index: Option<usize>, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
        let e = self.est.overlap(a, b)?;
        Ok(self.push(name, index, e))
    }

    pub fn collision(&mut self, name: &'static str, index: Option<usize>, p: &[f64], q: &[f64]) -> Result<f64> {
        let e = self.est.collision(p, q)?;
        Ok(self.push(name, index, e))
    }

    pub fn walsh(&mut self, name: &'static str, index: Option<usize>, p: &[f64], w: &crate::pauli::WalshString) -> Result<f64> {
        let e = self.est.walsh(p, w)?;
        Ok(self.push(name, index, e))
    }

    pub fn finish(self, value: f64, penalty: f64) -> TermBreakdown {
        TermBreakdown { terms: self.terms, value, penalty }
    }
}

/// A penalized primal or dual program over trainable states and scalars.
pub trait Problem: fmt::Debug + Send + Sync {
    fn tag(&self) -> &'static str;
    fn sense(&self) -> Sense;
    fn slots(&self) -> Vec<StateSlot>;
    fn scalars(&self) -> Vec<ScalarSpec>;
    fn penalty_c(&self) -> f64;

    /// Term-by-term evaluation; `states` follow `slots()` order.
    fn evaluate(&self, states: &[Realized], scalars: &[f64], est: &mut Estimator) -> Result<TermBreakdown>;

    /// Direct dense evaluation without the term expansion.
    fn dense(&self, states: &[Realized], scalars: &[f64]) -> Result<f64>;

    /// d/dt Obj(state_slot + t·dir) at t = 0, exact mode. The default is
    /// exact for objectives of degree ≤ 2 in each state.
    fn state_derivative(&self, states: &[Realized], scalars: &[f64], slot: usize, dir: &Realized) -> Result<f64> {
        let mut est = Estimator::exact();
        let mut shifted = states.to_vec();
        shifted[slot] = combine(&states[slot], dir, 1.0);
        let plus = self.evaluate(&shifted, scalars, &mut est)?.value;
        shifted[slot] = combine(&states[slot], dir, -1.0);
        let minus = self.evaluate(&shifted, scalars, &mut est)?.value;
        Ok((plus - minus) / 2.0)
    }
}

/// a + s·b, elementwise.
pub fn combine(a: &Realized, b: &Realized, s: f64) -> Realized {
    match (a, b) {
        (Realized::Density(x), Realized::Density(y)) => {
            let mut out = x.clone();
            out.axpy(crate::linalg::C64::new(s, 0.0), y);
            Realized::Density(out)
        }
        (Realized::Distribution(x), Realized::Distribution(y)) => {
            Realized::Distribution(x.iter().zip(y).map(|(u, v)| u + s * v).collect())
        }
        _ => panic!("mismatched realization kinds"),
    }
}

/// Pauli strings used for a trainable coefficient vector: every string when
/// 4ⁿ fits under the term cap, otherwise the lowest-weight strings up to it.
pub fn coefficient_basis(n: usize, cap: Option<usize>) -> Vec<PauliString> {
    let cap = cap.unwrap_or_else(|| default_term_cap(n));
    let mut all = PauliString::all(n);
    if all.len() > cap {
        all.sort_by_key(|s| (s.labels().iter().filter(|&&l| l != 0).count(), s.clone()));
        all.truncate(cap);
        all.sort();
    }
    all
}

pub(crate) fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(ObjectiveError::Invalid(format!("penalty constant must be positive, got {c}")));
    }
    Ok(())
}

pub(crate) fn check_state(name: &str, m: &ComplexMatrix, n: usize) -> Result<()> {
    if m.rows() != 1 << n || !m.is_square() {
        return Err(ObjectiveError::Dim(format!("{name} is {}x{}, expected {n} qubits", m.rows(), m.cols())));
    }
    crate::linalg::DensityMatrix::new(m.clone())?;
    Ok(())
}

pub(crate) fn check_dist(name: &str, p: &[f64], n: usize) -> Result<()> {
    if p.len() != 1 << n {
        return Err(ObjectiveError::Dim(format!("{name} has length {}, expected 2^{n}", p.len())));
    }
    let s: f64 = p.iter().sum();
    if p.iter().any(|&x| !(x >= -1e-12)) || (s - 1.0).abs() > 1e-10 {
        return Err(ObjectiveError::Invalid(format!("{name} is not a probability vector")));
    }
    Ok(())
}

/// Index bookkeeping for a problem bound to ansätze.
#[derive(Debug)]
pub struct PenaltyObjective {
    problem: Box<dyn Problem>,
    ansatze: Vec<Ansatz>,
    slots: Vec<StateSlot>,
    scalars: Vec<ScalarSpec>,
    offsets: Vec<usize>,
}

impl PenaltyObjective {
    pub fn new(problem: Box<dyn Problem>, ansatze: Vec<Ansatz>) -> Result<Self> {
        let slots = problem.slots();
        if slots.len() != ansatze.len() {
            return Err(ObjectiveError::Layout(format!(
                "{} needs {} ansätze, got {}",
                problem.tag(),
                slots.len(),
                ansatze.len()
            )));
        }
        for (s, a) in slots.iter().zip(&ansatze) {
            let classical = a.is_classical();
            if (s.kind == SlotKind::Classical) != classical || s.n != a.n_system() {
                return Err(ObjectiveError::Layout(format!(
                    "slot {} wants a {:?} variable on {} (qu)bits, got a {} one on {}",
                    s.name,
                    s.kind,
                    s.n,
                    if classical { "classical" } else { "quantum" },
                    a.n_system()
                )));
            }
        }
        let mut offsets = vec![0];
        for a in &ansatze {
            offsets.push(offsets.last().unwrap() + a.n_params());
        }
        let scalars = problem.scalars();
        Ok(Self { problem, ansatze, slots, scalars, offsets })
    }

    pub fn problem(&self) -> &dyn Problem {
        self.problem.as_ref()
    }

    pub fn ansatze(&self) -> &[Ansatz] {
        &self.ansatze
    }

    pub fn slots(&self) -> &[StateSlot] {
        &self.slots
    }

    pub fn scalar_specs(&self) -> &[ScalarSpec] {
        &self.scalars
    }

    pub fn sense(&self) -> Sense {
        self.problem.sense()
    }

    pub fn n_circuit_params(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn n_params(&self) -> usize {
        self.n_circuit_params() + self.scalars.len()
    }

    /// Parameter range of slot `k`.
    pub fn slot_range(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    pub fn scalar_range(&self) -> std::ops::Range<usize> {
        self.n_circuit_params()..self.n_params()
    }

    /// Which entries of the flat vector must stay ≥ 0.
    pub fn nonneg_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n_circuit_params()];
        m.extend(self.scalars.iter().map(|s| s.nonneg));
        m
    }

    /// Circuit angles ~ U[0, 2π), scalars at their problem defaults.
    pub fn init_params<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut p: Vec<f64> = (0..self.n_circuit_params())
            .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
            .collect();
        p.extend(self.scalars.iter().map(|s| s.init));
        p
    }

    fn check(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(ObjectiveError::Layout(format!("expected {} parameters, got {}", self.n_params(), params.len())));
        }
        Ok(())
    }

    pub fn realize(&self, params: &[f64]) -> Result<Vec<Realized>> {
        self.check(params)?;
        self.ansatze
            .iter()
            .enumerate()
            .map(|(k, a)| Ok(a.realize(&params[self.slot_range(k)])?))
            .collect()
    }

    pub fn evaluate(&self, params: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        let states = self.realize(params)?;
        self.problem.evaluate(&states, &params[self.scalar_range()], est)
    }

    pub fn value(&self, params: &[f64], est: &mut Estimator) -> Result<f64> {
        Ok(self.evaluate(params, est)?.value)
    }

    pub fn dense_value(&self, params: &[f64]) -> Result<f64> {
        let states = self.realize(params)?;
        self.problem.dense(&states, &params[self.scalar_range()])
    }
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;
    use crate::linalg::{C64, DensityMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Random full-rank density matrix G G† / Tr.
    pub fn random_density(n: usize, r: &mut ChaCha8Rng) -> ComplexMatrix {
        let d = 1 << n;
        let g = ComplexMatrix::from_fn(d, d, |_, _| C64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5));
        let m = &g * &g.adjoint();
        let t = m.trace().re;
        DensityMatrix::new(m.scale(1.0 / t)).unwrap().into_matrix()
    }

    pub fn random_dist(n: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
        let v: Vec<f64> = (0..1 << n).map(|_| r.random::<f64>()).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    }

    pub fn random_scalars(specs: &[ScalarSpec], r: &mut ChaCha8Rng) -> Vec<f64> {
        specs
            .iter()
            .map(|s| if s.nonneg { 2.0 * r.random::<f64>() } else { 2.0 * r.random::<f64>() - 1.0 })
            .collect()
    }

    pub fn random_states(slots: &[StateSlot], r: &mut ChaCha8Rng) -> Vec<Realized> {
        slots
            .iter()
            .map(|s| match s.kind {
                SlotKind::Quantum => Realized::Density(random_density(s.n, r)),
                SlotKind::Classical => Realized::Distribution(random_dist(s.n, r)),
            })
            .collect()
    }

    /// Exact-mode expansion agrees with dense evaluation.
    pub fn assert_expansion_matches(p: &dyn Problem, seed: u64, draws: usize) {
        let mut r = rng(seed);
        let mut est = Estimator::exact();
        for _ in 0..draws {
            let states = random_states(&p.slots(), &mut r);
            let scalars = random_scalars(&p.scalars(), &mut r);
            let a = p.evaluate(&states, &scalars, &mut est).unwrap().value;
            let b = p.dense(&states, &scalars).unwrap();
            assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{}: {a} vs {b}", p.tag());
        }
    }
}
