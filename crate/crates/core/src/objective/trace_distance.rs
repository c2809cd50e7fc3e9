//! Normalized trace distance ½‖ρ − σ‖₁ from above (dual) and below (primal).

use super::{check_c, check_state, Problem, Recorder, Result, ScalarSpec, Sense, StateSlot, TermBreakdown};
use crate::ansatz::Realized;
use crate::estimate::Estimator;
use crate::linalg::{hs_norm_sq, trace_product_real, ComplexMatrix, C64};

/// inf λ + c‖λω − ρ + σ − μτ‖² over λ, μ ≥ 0 and states ω, τ.
#[derive(Clone, Debug)]
pub struct TraceDistanceDual {
    n: usize,
    rho: ComplexMatrix,
    sigma: ComplexMatrix,
    c: f64,
}

impl TraceDistanceDual {
    pub fn new(n: usize, rho: ComplexMatrix, sigma: ComplexMatrix, c: f64) -> Result<Self> {
        check_c(c)?;
        check_state("rho", &rho, n)?;
        check_state("sigma", &sigma, n)?;
        Ok(Self { n, rho, sigma, c })
    }

    pub fn objective(
        &self,
        omega: &ComplexMatrix,
        tau: &ComplexMatrix,
        lambda: f64,
        mu: f64,
        est: &mut Estimator,
    ) -> Result<TermBreakdown> {
        let (rho, sigma) = (&self.rho, &self.sigma);
        let mut r = Recorder::new(est);
        let omega_sq = r.overlap("tr_omega_sq", None, omega, omega)?;
        let rho_sq = r.overlap("tr_rho_sq", None, rho, rho)?;
        let sigma_sq = r.overlap("tr_sigma_sq", None, sigma, sigma)?;
        let tau_sq = r.overlap("tr_tau_sq", None, tau, tau)?;
        let omega_rho = r.overlap("tr_omega_rho", None, omega, rho)?;
        let omega_sigma = r.overlap("tr_omega_sigma", None, omega, sigma)?;
        let omega_tau = r.overlap("tr_omega_tau", None, omega, tau)?;
        let rho_sigma = r.overlap("tr_rho_sigma", None, rho, sigma)?;
        let rho_tau = r.overlap("tr_rho_tau", None, rho, tau)?;
        let sigma_tau = r.overlap("tr_sigma_tau", None, sigma, tau)?;
        let penalty = lambda * lambda * omega_sq + rho_sq + sigma_sq + mu * mu * tau_sq - 2.0 * lambda * omega_rho
            + 2.0 * lambda * omega_sigma
            - 2.0 * lambda * mu * omega_tau
            - 2.0 * rho_sigma
            + 2.0 * mu * rho_tau
            - 2.0 * mu * sigma_tau;
        Ok(r.finish(lambda + self.c * penalty, penalty))
    }
}

impl Problem for TraceDistanceDual {
    fn tag(&self) -> &'static str {
        "trace_distance_dual"
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn slots(&self) -> Vec<StateSlot> {
        vec![StateSlot::quantum("omega", self.n), StateSlot::quantum("tau", self.n)]
    }

    fn scalars(&self) -> Vec<ScalarSpec> {
        vec![ScalarSpec::nonneg("lambda", 1.0), ScalarSpec::nonneg("mu", 1.0)]
    }

    fn penalty_c(&self) -> f64 {
        self.c
    }

    fn evaluate(&self, states: &[Realized], scalars: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        self.objective(states[0].density(), states[1].density(), scalars[0], scalars[1], est)
    }

    fn dense(&self, states: &[Realized], scalars: &[f64]) -> Result<f64> {
        let (lambda, mu) = (scalars[0], scalars[1]);
        let mut m = states[0].density().scale(lambda);
        m.axpy(C64::new(-1.0, 0.0), &self.rho);
        m.axpy(C64::new(1.0, 0.0), &self.sigma);
        m.axpy(C64::new(-mu, 0.0), states[1].density());
        Ok(lambda + self.c * hs_norm_sq(&m))
    }
}

/// sup λTr[τ(ρ − σ)] − c‖I − λτ − μω‖² over λ, μ ≥ 0 and states τ, ω.
#[derive(Clone, Debug)]
pub struct TraceDistancePrimal {
    n: usize,
    rho: ComplexMatrix,
    sigma: ComplexMatrix,
    c: f64,
}

impl TraceDistancePrimal {
    pub fn new(n: usize, rho: ComplexMatrix, sigma: ComplexMatrix, c: f64) -> Result<Self> {
        check_c(c)?;
        check_state("rho", &rho, n)?;
        check_state("sigma", &sigma, n)?;
        Ok(Self { n, rho, sigma, c })
    }

    pub fn objective(
        &self,
        tau: &ComplexMatrix,
        omega: &ComplexMatrix,
        lambda: f64,
        mu: f64,
        est: &mut Estimator,
    ) -> Result<TermBreakdown> {
        let mut r = Recorder::new(est);
        let tau_rho = r.overlap("tr_tau_rho", None, tau, &self.rho)?;
        let tau_sigma = r.overlap("tr_tau_sigma", None, tau, &self.sigma)?;
        let tau_sq = r.overlap("tr_tau_sq", None, tau, tau)?;
        let omega_sq = r.overlap("tr_omega_sq", None, omega, omega)?;
        let tau_omega = r.overlap("tr_tau_omega", None, tau, omega)?;
        let dim = (1u64 << self.n) as f64;
        let penalty = dim + lambda * lambda * tau_sq + mu * mu * omega_sq - 2.0 * lambda - 2.0 * mu
            + 2.0 * lambda * mu * tau_omega;
        Ok(r.finish(lambda * tau_rho - lambda * tau_sigma - self.c * penalty, penalty))
    }
}

impl Problem for TraceDistancePrimal {
    fn tag(&self) -> &'static str {
        "trace_distance_primal"
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn slots(&self) -> Vec<StateSlot> {
        vec![StateSlot::quantum("tau", self.n), StateSlot::quantum("omega", self.n)]
    }

    fn scalars(&self) -> Vec<ScalarSpec> {
        vec![ScalarSpec::nonneg("lambda", 1.0), ScalarSpec::nonneg("mu", 1.0)]
    }

    fn penalty_c(&self) -> f64 {
        self.c
    }

    fn evaluate(&self, states: &[Realized], scalars: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        self.objective(states[0].density(), states[1].density(), scalars[0], scalars[1], est)
    }

    fn dense(&self, states: &[Realized], scalars: &[f64]) -> Result<f64> {
        let (lambda, mu) = (scalars[0], scalars[1]);
        let (tau, omega) = (states[0].density(), states[1].density());
        let diff = &self.rho - &self.sigma;
        let mut m = ComplexMatrix::identity(1 << self.n);
        m.axpy(C64::new(-lambda, 0.0), tau);
        m.axpy(C64::new(-mu, 0.0), omega);
        Ok(lambda * trace_product_real(tau, &diff) - self.c * hs_norm_sq(&m))
    }
}
