//! Root fidelity √F(ρ, σ) = ‖√ρ√σ‖₁. Both programs use an extra block qubit,
//! placed first, so that |0><0| ⊗ ρ + |1><1| ⊗ σ sits on n + 1 qubits.

use super::{
    check_c, check_state, coefficient_basis, Problem, Recorder, Result, ScalarSpec, Sense, StateSlot, TermBreakdown,
};
use crate::ansatz::Realized;
use crate::estimate::Estimator;
use crate::linalg::{hs_norm_sq, kron, ComplexMatrix, C64};
use crate::pauli::PauliString;

fn projector(bit: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(2, 2);
    p[(bit, bit)] = C64::new(1.0, 0.0);
    p
}

/// |a><b| on the block qubit.
fn block_unit(a: usize, b: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(2, 2);
    p[(a, b)] = C64::new(1.0, 0.0);
    p
}

fn prefixed(first: u8, s: &PauliString) -> PauliString {
    let mut labels = vec![first];
    labels.extend_from_slice(s.labels());
    PauliString::new(labels).expect("valid labels")
}

/// sup 2ⁿRe α₀ − c‖|0><0|⊗ρ + |1><1|⊗σ + |0><1|⊗X† + |1><0|⊗X − λω‖²,
/// with X = Σ_x α_x σ_x complex and ω a state on n + 1 qubits.
#[derive(Clone, Debug)]
pub struct FidelityPrimal {
    n: usize,
    rho: ComplexMatrix,
    sigma: ComplexMatrix,
    c: f64,
    basis: Vec<PauliString>,
    x_strings: Vec<PauliString>,
    y_strings: Vec<PauliString>,
    block_rho: ComplexMatrix,
    block_sigma: ComplexMatrix,
}

impl FidelityPrimal {
    pub fn new(n: usize, rho: ComplexMatrix, sigma: ComplexMatrix, c: f64) -> Result<Self> {
        Self::with_basis(n, rho, sigma, c, coefficient_basis(n, None))
    }

    pub fn with_basis(n: usize, rho: ComplexMatrix, sigma: ComplexMatrix, c: f64, basis: Vec<PauliString>) -> Result<Self> {
        check_c(c)?;
        check_state("rho", &rho, n)?;
        check_state("sigma", &sigma, n)?;
        if basis.iter().any(|s| s.n_qubits() != n) {
            return Err(super::ObjectiveError::Dim("coefficient basis qubit count".into()));
        }
        let x_strings = basis.iter().map(|s| prefixed(1, s)).collect();
        let y_strings = basis.iter().map(|s| prefixed(2, s)).collect();
        let block_rho = kron(&projector(0), &rho);
        let block_sigma = kron(&projector(1), &sigma);
        Ok(Self { n, rho, sigma, c, basis, x_strings, y_strings, block_rho, block_sigma })
    }

    pub fn basis(&self) -> &[PauliString] {
        &self.basis
    }

    /// Scalars are λ followed by (Re α_x, Im α_x) pairs in basis order.
    pub fn objective(&self, omega: &ComplexMatrix, lambda: f64, alpha: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        let dim = (1u64 << self.n) as f64;
        let mut r = Recorder::new(est);
        let rho_sq = r.overlap("tr_rho_sq", None, &self.rho, &self.rho)?;
        let sigma_sq = r.overlap("tr_sigma_sq", None, &self.sigma, &self.sigma)?;
        let omega_sq = r.overlap("tr_omega_sq", None, omega, omega)?;
        let block_rho = r.overlap("tr_block_rho_omega", None, &self.block_rho, omega)?;
        let block_sigma = r.overlap("tr_block_sigma_omega", None, &self.block_sigma, omega)?;
        let mut alpha_sq = 0.0;
        let mut offdiag = 0.0;
        let mut trace_x = 0.0;
        for (k, s) in self.basis.iter().enumerate() {
            let (re, im) = (alpha[2 * k], alpha[2 * k + 1]);
            alpha_sq += re * re + im * im;
            if s.is_identity() {
                trace_x = dim * re;
            }
            let a = r.pauli("tr_x_omega", Some(k), omega, &self.x_strings[k])?;
            let b = r.pauli("tr_y_omega", Some(k), omega, &self.y_strings[k])?;
            offdiag += re * a + im * b;
        }
        let penalty = rho_sq + sigma_sq + lambda * lambda * omega_sq + 2.0 * dim * alpha_sq
            - 2.0 * lambda * block_rho
            - 2.0 * lambda * block_sigma
            - 2.0 * lambda * offdiag;
        Ok(r.finish(trace_x - self.c * penalty, penalty))
    }

    /// Σ_x α_x σ_x as a dense matrix.
    pub fn operator(&self, alpha: &[f64]) -> ComplexMatrix {
        let d = 1 << self.n;
        let mut x = ComplexMatrix::zeros(d, d);
        for (k, s) in self.basis.iter().enumerate() {
            x.axpy(C64::new(alpha[2 * k], alpha[2 * k + 1]), s.dense().matrix());
        }
        x
    }
}

impl Problem for FidelityPrimal {
    fn tag(&self) -> &'static str {
        "fidelity_primal"
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn slots(&self) -> Vec<StateSlot> {
        vec![StateSlot::quantum("omega", self.n + 1)]
    }

    fn scalars(&self) -> Vec<ScalarSpec> {
        let mut v = vec![ScalarSpec::nonneg("lambda", 1.0)];
        for k in 0..self.basis.len() {
            v.push(ScalarSpec::free("alpha_re", 0.0).at(k));
            v.push(ScalarSpec::free("alpha_im", 0.0).at(k));
        }
        v
    }

    fn penalty_c(&self) -> f64 {
        self.c
    }

    fn evaluate(&self, states: &[Realized], scalars: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        self.objective(states[0].density(), scalars[0], &scalars[1..], est)
    }

    fn dense(&self, states: &[Realized], scalars: &[f64]) -> Result<f64> {
        let lambda = scalars[0];
        let x = self.operator(&scalars[1..]);
        let mut m = &self.block_rho + &self.block_sigma;
        m = &m + &kron(&block_unit(0, 1), &x.adjoint());
        m = &m + &kron(&block_unit(1, 0), &x);
        m.axpy(C64::new(-lambda, 0.0), states[0].density());
        Ok(x.trace().re - self.c * hs_norm_sq(&m))
    }
}

/// inf ½λTr[ωρ] + ½μTr[τσ] + c‖|0><0|⊗λω + |1><1|⊗μτ + σ_X⊗I − νξ‖²,
/// with ξ a state on n + 1 qubits.
#[derive(Clone, Debug)]
pub struct FidelityDual {
    n: usize,
    rho: ComplexMatrix,
    sigma: ComplexMatrix,
    c: f64,
    x_identity: PauliString,
}

impl FidelityDual {
    pub fn new(n: usize, rho: ComplexMatrix, sigma: ComplexMatrix, c: f64) -> Result<Self> {
        check_c(c)?;
        check_state("rho", &rho, n)?;
        check_state("sigma", &sigma, n)?;
        let x_identity = prefixed(1, &PauliString::identity(n));
        Ok(Self { n, rho, sigma, c, x_identity })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn objective(
        &self,
        omega: &ComplexMatrix,
        tau: &ComplexMatrix,
        xi: &ComplexMatrix,
        lambda: f64,
        mu: f64,
        nu: f64,
        est: &mut Estimator,
    ) -> Result<TermBreakdown> {
        let dim = (1u64 << self.n) as f64;
        let mut r = Recorder::new(est);
        let omega_rho = r.overlap("tr_omega_rho", None, omega, &self.rho)?;
        let tau_sigma = r.overlap("tr_tau_sigma", None, tau, &self.sigma)?;
        let omega_sq = r.overlap("tr_omega_sq", None, omega, omega)?;
        let tau_sq = r.overlap("tr_tau_sq", None, tau, tau)?;
        let xi_sq = r.overlap("tr_xi_sq", None, xi, xi)?;
        let block_omega = r.overlap("tr_block_omega_xi", None, &kron(&projector(0), omega), xi)?;
        let block_tau = r.overlap("tr_block_tau_xi", None, &kron(&projector(1), tau), xi)?;
        let x_xi = r.pauli("tr_x_xi", None, xi, &self.x_identity)?;
        let penalty = lambda * lambda * omega_sq + mu * mu * tau_sq + 2.0 * dim + nu * nu * xi_sq
            - 2.0 * lambda * nu * block_omega
            - 2.0 * mu * nu * block_tau
            - 2.0 * nu * x_xi;
        let value = 0.5 * lambda * omega_rho + 0.5 * mu * tau_sigma + self.c * penalty;
        Ok(r.finish(value, penalty))
    }
}

impl Problem for FidelityDual {
    fn tag(&self) -> &'static str {
        "fidelity_dual"
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn slots(&self) -> Vec<StateSlot> {
        vec![
            StateSlot::quantum("omega", self.n),
            StateSlot::quantum("tau", self.n),
            StateSlot::quantum("xi", self.n + 1),
        ]
    }

    fn scalars(&self) -> Vec<ScalarSpec> {
        vec![ScalarSpec::nonneg("lambda", 1.0), ScalarSpec::nonneg("mu", 1.0), ScalarSpec::nonneg("nu", 1.0)]
    }

    fn penalty_c(&self) -> f64 {
        self.c
    }

    fn evaluate(&self, states: &[Realized], scalars: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        self.objective(
            states[0].density(),
            states[1].density(),
            states[2].density(),
            scalars[0],
            scalars[1],
            scalars[2],
            est,
        )
    }

    fn dense(&self, states: &[Realized], scalars: &[f64]) -> Result<f64> {
        let (lambda, mu, nu) = (scalars[0], scalars[1], scalars[2]);
        let (omega, tau, xi) = (states[0].density(), states[1].density(), states[2].density());
        let mut m = kron(&projector(0), &omega.scale(lambda));
        m = &m + &kron(&projector(1), &tau.scale(mu));
        m = &m + self.x_identity.dense().matrix();
        m.axpy(C64::new(-nu, 0.0), xi);
        let value = 0.5 * lambda * crate::linalg::trace_product_real(omega, &self.rho)
            + 0.5 * mu * crate::linalg::trace_product_real(tau, &self.sigma)
            + self.c * hs_norm_sq(&m);
        Ok(value)
    }
}
