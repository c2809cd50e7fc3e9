//! General penalized primal and dual programs for an instance given as real
//! combinations of basis operators, either density matrices or Pauli strings.
//!
//! A = Σ α_i A_i on X, B = Σ β_j B_j on Y, Φ(X) = Σ φ_ij F_j Tr[E_i X].

use super::{check_c, check_state, ObjectiveError, Problem, Recorder, Result, ScalarSpec, Sense, StateSlot, TermBreakdown};
use crate::ansatz::Realized;
use crate::estimate::Estimator;
use crate::linalg::{hs_inner, hs_norm_sq, ComplexMatrix, C64};
use crate::pauli::PauliString;

/// Operators a combination is built from.
#[derive(Clone, Debug)]
pub enum OperatorBasis {
    States { n: usize, states: Vec<ComplexMatrix> },
    Pauli { n: usize, strings: Vec<PauliString> },
}

impl OperatorBasis {
    pub fn states(n: usize, states: Vec<ComplexMatrix>) -> Result<Self> {
        for s in &states {
            check_state("basis state", s, n)?;
        }
        Ok(Self::States { n, states })
    }

    pub fn pauli(n: usize, strings: Vec<PauliString>) -> Result<Self> {
        if let Some(s) = strings.iter().find(|s| s.n_qubits() != n) {
            return Err(ObjectiveError::Dim(format!("Pauli string {s} is not on {n} qubits")));
        }
        Ok(Self::Pauli { n, strings })
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Self::States { n, .. } | Self::Pauli { n, .. } => *n,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::States { states, .. } => states.len(),
            Self::Pauli { strings, .. } => strings.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn element(&self, k: usize) -> ComplexMatrix {
        match self {
            Self::States { states, .. } => states[k].clone(),
            Self::Pauli { strings, .. } => strings[k].dense().into_inner(),
        }
    }

    /// Tr[element_k · state], estimated.
    fn trace_state(&self, r: &mut Recorder<'_>, name: &'static str, idx: usize, state: &ComplexMatrix) -> Result<f64> {
        match self {
            Self::States { states, .. } => r.overlap(name, Some(idx), &states[idx], state),
            Self::Pauli { strings, .. } => r.pauli(name, Some(idx), state, &strings[idx]),
        }
    }
}

/// Tr[a_i b_j] between basis elements. Pauli–Pauli traces are the known
/// constants 2ⁿδ and are not estimated.
fn cross_trace(
    r: &mut Recorder<'_>,
    name: &'static str,
    idx: usize,
    a: &OperatorBasis,
    i: usize,
    b: &OperatorBasis,
    j: usize,
) -> Result<f64> {
    use OperatorBasis::*;
    match (a, b) {
        (States { states: sa, .. }, States { states: sb, .. }) => r.overlap(name, Some(idx), &sa[i], &sb[j]),
        (States { states, .. }, Pauli { strings, .. }) => r.pauli(name, Some(idx), &states[i], &strings[j]),
        (Pauli { strings, .. }, States { states, .. }) => r.pauli(name, Some(idx), &states[j], &strings[i]),
        (Pauli { n, strings: pa }, Pauli { strings: pb, .. }) => {
            Ok(if pa[i] == pb[j] { (1u64 << n) as f64 } else { 0.0 })
        }
    }
}

/// Σ c_k O_k over a basis.
#[derive(Clone, Debug)]
pub struct OperatorExpansion {
    pub basis: OperatorBasis,
    pub coeffs: Vec<f64>,
}

impl OperatorExpansion {
    pub fn new(basis: OperatorBasis, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(ObjectiveError::Layout(format!("{} coefficients for {} operators", coeffs.len(), basis.len())));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(ObjectiveError::Invalid("non-finite coefficient".into()));
        }
        Ok(Self { basis, coeffs })
    }

    pub fn zero(n: usize) -> Self {
        Self { basis: OperatorBasis::Pauli { n, strings: Vec::new() }, coeffs: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.basis.n_qubits()
    }

    pub fn dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(1 << self.n_qubits(), 1 << self.n_qubits());
        for (k, &c) in self.coeffs.iter().enumerate() {
            m.axpy(C64::new(c, 0.0), &self.basis.element(k));
        }
        m
    }

    /// Tr[op · state] from per-element estimates.
    fn trace_state(&self, r: &mut Recorder<'_>, name: &'static str, state: &ComplexMatrix) -> Result<f64> {
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate() {
            acc += c * self.basis.trace_state(r, name, k, state)?;
        }
        Ok(acc)
    }

    /// ‖op‖₂² from the pairwise Gram entries.
    fn norm_sq(&self, r: &mut Recorder<'_>, name: &'static str) -> Result<f64> {
        let m = self.coeffs.len();
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                acc += self.coeffs[i] * self.coeffs[j] * cross_trace(r, name, i * m + j, &self.basis, i, &self.basis, j)?;
            }
        }
        Ok(acc)
    }
}

/// Φ(X) = Σ_ij φ_ij F_j Tr[E_i X] with E on the input space, F on the output.
#[derive(Clone, Debug)]
pub struct SuperOperator {
    pub inputs: OperatorBasis,
    pub outputs: OperatorBasis,
    pub coeffs: Vec<Vec<f64>>,
}

impl SuperOperator {
    pub fn new(inputs: OperatorBasis, outputs: OperatorBasis, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if coeffs.len() != inputs.len() || coeffs.iter().any(|row| row.len() != outputs.len()) {
            return Err(ObjectiveError::Layout(format!(
                "coefficient table must be {}x{}",
                inputs.len(),
                outputs.len()
            )));
        }
        if coeffs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(ObjectiveError::Invalid("non-finite coefficient".into()));
        }
        Ok(Self { inputs, outputs, coeffs })
    }

    /// The identity channel on n qubits in the Pauli basis: φ = 2⁻ⁿ δ.
    pub fn identity(n: usize) -> Self {
        let strings = PauliString::all(n);
        let d = (1u64 << n) as f64;
        let m = strings.len();
        let coeffs = (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 / d } else { 0.0 }).collect()).collect();
        Self {
            inputs: OperatorBasis::Pauli { n, strings: strings.clone() },
            outputs: OperatorBasis::Pauli { n, strings },
            coeffs,
        }
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = 1 << self.outputs.n_qubits();
        let mut out = ComplexMatrix::zeros(d, d);
        for (i, row) in self.coeffs.iter().enumerate() {
            let t = hs_inner(&self.inputs.element(i), x)?;
            for (j, &phi) in row.iter().enumerate() {
                out.axpy(t * phi, &self.outputs.element(j));
            }
        }
        Ok(out)
    }

    pub fn apply_adjoint(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = 1 << self.inputs.n_qubits();
        let mut out = ComplexMatrix::zeros(d, d);
        for j in 0..self.outputs.len() {
            let t = hs_inner(&self.outputs.element(j), y)?;
            for (i, row) in self.coeffs.iter().enumerate() {
                out.axpy(t * row[j], &self.inputs.element(i));
            }
        }
        Ok(out)
    }
}

/// sup Tr[AX] s.t. Φ(X) ≤ B, X ≥ 0; inf Tr[BY] s.t. Φ†(Y) ≥ A, Y ≥ 0.
#[derive(Clone, Debug)]
pub struct SdpInstance {
    pub a: OperatorExpansion,
    pub b: OperatorExpansion,
    pub phi: SuperOperator,
}

impl SdpInstance {
    pub fn new(a: OperatorExpansion, b: OperatorExpansion, phi: SuperOperator) -> Result<Self> {
        if a.n_qubits() != phi.inputs.n_qubits() || b.n_qubits() != phi.outputs.n_qubits() {
            return Err(ObjectiveError::Dim(format!(
                "A on {} qubits, B on {}, map {} -> {}",
                a.n_qubits(),
                b.n_qubits(),
                phi.inputs.n_qubits(),
                phi.outputs.n_qubits()
            )));
        }
        Ok(Self { a, b, phi })
    }

    pub fn n_x(&self) -> usize {
        self.a.n_qubits()
    }

    pub fn n_y(&self) -> usize {
        self.b.n_qubits()
    }
}

/// sup λTr[Aρ] − c‖B − λΦ(ρ) − μσ‖² over λ, μ ≥ 0, ρ on X, σ on Y.
#[derive(Clone, Debug)]
pub struct GenericPrimal {
    inst: SdpInstance,
    c: f64,
}

impl GenericPrimal {
    pub fn new(inst: SdpInstance, c: f64) -> Result<Self> {
        check_c(c)?;
        Ok(Self { inst, c })
    }

    pub fn objective(
        &self,
        rho: &ComplexMatrix,
        sigma: &ComplexMatrix,
        lambda: f64,
        mu: f64,
        est: &mut Estimator,
    ) -> Result<TermBreakdown> {
        let SdpInstance { a, b, phi } = &self.inst;
        let (ne, nf, nb) = (phi.inputs.len(), phi.outputs.len(), b.coeffs.len());
        let mut r = Recorder::new(est);
        let tr_a_rho = a.trace_state(&mut r, "tr_a_rho", rho)?;
        let b_sq = b.norm_sq(&mut r, "tr_b_b")?;
        let sigma_sq = r.overlap("tr_sigma_sq", None, sigma, sigma)?;
        let tr_b_sigma = b.trace_state(&mut r, "tr_b_sigma", sigma)?;
        let t: Vec<f64> =
            (0..ne).map(|i| phi.inputs.trace_state(&mut r, "tr_e_rho", i, rho)).collect::<Result<_>>()?;
        let f_sigma: Vec<f64> =
            (0..nf).map(|j| phi.outputs.trace_state(&mut r, "tr_f_sigma", j, sigma)).collect::<Result<_>>()?;
        let mut ff = vec![0.0; nf * nf];
        for j in 0..nf {
            for k in 0..nf {
                ff[j * nf + k] = cross_trace(&mut r, "tr_f_f", j * nf + k, &phi.outputs, j, &phi.outputs, k)?;
            }
        }
        let mut bf = vec![0.0; nb * nf];
        for k in 0..nb {
            for j in 0..nf {
                bf[k * nf + j] = cross_trace(&mut r, "tr_b_f", k * nf + j, &b.basis, k, &phi.outputs, j)?;
            }
        }
        // Φ(ρ) = Σ_j w_j F_j
        let w: Vec<f64> = (0..nf).map(|j| (0..ne).map(|i| phi.coeffs[i][j] * t[i]).sum()).collect();
        let mut phi_sq = 0.0;
        for j in 0..nf {
            for k in 0..nf {
                phi_sq += w[j] * w[k] * ff[j * nf + k];
            }
        }
        let mut b_phi = 0.0;
        for k in 0..nb {
            for j in 0..nf {
                b_phi += b.coeffs[k] * w[j] * bf[k * nf + j];
            }
        }
        let phi_sigma: f64 = w.iter().zip(&f_sigma).map(|(x, y)| x * y).sum();
        let penalty = b_sq + lambda * lambda * phi_sq + mu * mu * sigma_sq - 2.0 * lambda * b_phi - 2.0 * mu * tr_b_sigma
            + 2.0 * lambda * mu * phi_sigma;
        Ok(r.finish(lambda * tr_a_rho - self.c * penalty, penalty))
    }
}

impl Problem for GenericPrimal {
    fn tag(&self) -> &'static str {
        "generic_primal"
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn slots(&self) -> Vec<StateSlot> {
        vec![StateSlot::quantum("rho", self.inst.n_x()), StateSlot::quantum("sigma", self.inst.n_y())]
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
        let (rho, sigma) = (states[0].density(), states[1].density());
        let mut m = self.inst.b.dense();
        m.axpy(C64::new(-lambda, 0.0), &self.inst.phi.apply(rho)?);
        m.axpy(C64::new(-mu, 0.0), sigma);
        let obj = hs_inner(&self.inst.a.dense(), rho)?.re;
        Ok(lambda * obj - self.c * hs_norm_sq(&m))
    }
}

/// inf κTr[Bτ] + c‖κΦ†(τ) − A − νω‖² over κ, ν ≥ 0, τ on Y, ω on X.
#[derive(Clone, Debug)]
pub struct GenericDual {
    inst: SdpInstance,
    c: f64,
}

impl GenericDual {
    pub fn new(inst: SdpInstance, c: f64) -> Result<Self> {
        check_c(c)?;
        Ok(Self { inst, c })
    }

    pub fn objective(
        &self,
        tau: &ComplexMatrix,
        omega: &ComplexMatrix,
        kappa: f64,
        nu: f64,
        est: &mut Estimator,
    ) -> Result<TermBreakdown> {
        let SdpInstance { a, b, phi } = &self.inst;
        let (ne, nf, na) = (phi.inputs.len(), phi.outputs.len(), a.coeffs.len());
        let mut r = Recorder::new(est);
        let tr_b_tau = b.trace_state(&mut r, "tr_b_tau", tau)?;
        let a_sq = a.norm_sq(&mut r, "tr_a_a")?;
        let omega_sq = r.overlap("tr_omega_sq", None, omega, omega)?;
        let tr_a_omega = a.trace_state(&mut r, "tr_a_omega", omega)?;
        let s: Vec<f64> =
            (0..nf).map(|j| phi.outputs.trace_state(&mut r, "tr_f_tau", j, tau)).collect::<Result<_>>()?;
        let e_omega: Vec<f64> =
            (0..ne).map(|i| phi.inputs.trace_state(&mut r, "tr_e_omega", i, omega)).collect::<Result<_>>()?;
        let mut ee = vec![0.0; ne * ne];
        for i in 0..ne {
            for k in 0..ne {
                ee[i * ne + k] = cross_trace(&mut r, "tr_e_e", i * ne + k, &phi.inputs, i, &phi.inputs, k)?;
            }
        }
        let mut ae = vec![0.0; na * ne];
        for k in 0..na {
            for i in 0..ne {
                ae[k * ne + i] = cross_trace(&mut r, "tr_a_e", k * ne + i, &a.basis, k, &phi.inputs, i)?;
            }
        }
        // Φ†(τ) = Σ_i v_i E_i
        let v: Vec<f64> = (0..ne).map(|i| (0..nf).map(|j| phi.coeffs[i][j] * s[j]).sum()).collect();
        let mut adj_sq = 0.0;
        for i in 0..ne {
            for k in 0..ne {
                adj_sq += v[i] * v[k] * ee[i * ne + k];
            }
        }
        let mut a_adj = 0.0;
        for k in 0..na {
            for i in 0..ne {
                a_adj += a.coeffs[k] * v[i] * ae[k * ne + i];
            }
        }
        let adj_omega: f64 = v.iter().zip(&e_omega).map(|(x, y)| x * y).sum();
        let penalty = kappa * kappa * adj_sq + a_sq + nu * nu * omega_sq - 2.0 * kappa * a_adj
            - 2.0 * kappa * nu * adj_omega
            + 2.0 * nu * tr_a_omega;
        Ok(r.finish(kappa * tr_b_tau + self.c * penalty, penalty))
    }
}

impl Problem for GenericDual {
    fn tag(&self) -> &'static str {
        "generic_dual"
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn slots(&self) -> Vec<StateSlot> {
        vec![StateSlot::quantum("tau", self.inst.n_y()), StateSlot::quantum("omega", self.inst.n_x())]
    }

    fn scalars(&self) -> Vec<ScalarSpec> {
        vec![ScalarSpec::nonneg("kappa", 1.0), ScalarSpec::nonneg("nu", 1.0)]
    }

    fn penalty_c(&self) -> f64 {
        self.c
    }

    fn evaluate(&self, states: &[Realized], scalars: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        self.objective(states[0].density(), states[1].density(), scalars[0], scalars[1], est)
    }

    fn dense(&self, states: &[Realized], scalars: &[f64]) -> Result<f64> {
        let (kappa, nu) = (scalars[0], scalars[1]);
        let (tau, omega) = (states[0].density(), states[1].density());
        let mut m = self.inst.phi.apply_adjoint(tau)?.scale(kappa);
        m.axpy(C64::new(-1.0, 0.0), &self.inst.a.dense());
        m.axpy(C64::new(-nu, 0.0), omega);
        let obj = hs_inner(&self.inst.b.dense(), tau)?.re;
        Ok(kappa * obj + self.c * hs_norm_sq(&m))
    }
}
