//! Ground energy of H under constraints Tr[A_i ρ] ≥ b_i, with H and A_i in
//! the Pauli input model.

use std::collections::BTreeSet;

use super::{check_c, ObjectiveError, Problem, Recorder, Result, ScalarSpec, Sense, StateSlot, TermBreakdown};
use crate::ansatz::Realized;
use crate::estimate::Estimator;
use crate::linalg::{hs_norm_sq, trace_product_real, ComplexMatrix, C64};
use crate::pauli::{PauliObservable, PauliString};

/// H, (A_i, b_i) expanded over the union of their Pauli supports.
#[derive(Clone, Debug)]
pub struct ConstrainedHamiltonian {
    n: usize,
    strings: Vec<PauliString>,
    h: Vec<f64>,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

fn real_coeffs(o: &PauliObservable, strings: &[PauliString]) -> Result<Vec<f64>> {
    if !o.is_hermitian() {
        return Err(ObjectiveError::Invalid("observables must have real Pauli coefficients".into()));
    }
    Ok(strings.iter().map(|s| o.coeff(s).re).collect())
}

impl ConstrainedHamiltonian {
    pub fn new(h: &PauliObservable, constraints: &[(PauliObservable, f64)]) -> Result<Self> {
        let n = h.n_qubits();
        if constraints.iter().any(|(a, _)| a.n_qubits() != n) {
            return Err(ObjectiveError::Dim("constraint observables must act on the same qubits as H".into()));
        }
        let mut set: BTreeSet<PauliString> = h.terms().map(|(s, _)| s.clone()).collect();
        for (a, _) in constraints {
            set.extend(a.terms().map(|(s, _)| s.clone()));
        }
        let strings: Vec<PauliString> = set.into_iter().collect();
        let hc = real_coeffs(h, &strings)?;
        let a = constraints.iter().map(|(a, _)| real_coeffs(a, &strings)).collect::<Result<Vec<_>>>()?;
        let b = constraints.iter().map(|&(_, b)| b).collect();
        Ok(Self { n, strings, h: hc, a, b })
    }

    /// H = ZZ + XI + IX with Tr[(Y⊗I)ρ] ≥ 0.2 and Tr[(I⊗Z)ρ] ≥ 0.1.
    pub fn two_qubit_example() -> Self {
        let h = PauliObservable::from_real_terms(2, [("ZZ", 1.0), ("XI", 1.0), ("IX", 1.0)]).unwrap();
        let a1 = PauliObservable::from_real_terms(2, [("YI", 1.0)]).unwrap();
        let a2 = PauliObservable::from_real_terms(2, [("IZ", 1.0)]).unwrap();
        Self::new(&h, &[(a1, 0.2), (a2, 0.1)]).unwrap()
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn n_constraints(&self) -> usize {
        self.b.len()
    }

    pub fn bounds(&self) -> &[f64] {
        &self.b
    }

    fn dim(&self) -> f64 {
        (1u64 << self.n) as f64
    }

    fn dense_of(&self, coeffs: &[f64]) -> ComplexMatrix {
        let d = 1 << self.n;
        let mut m = ComplexMatrix::zeros(d, d);
        for (s, &c) in self.strings.iter().zip(coeffs) {
            if c != 0.0 {
                m.axpy(C64::new(c, 0.0), s.dense().matrix());
            }
        }
        m
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        self.dense_of(&self.h)
    }

    pub fn constraint(&self, i: usize) -> ComplexMatrix {
        self.dense_of(&self.a[i])
    }

    fn dot(u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    fn identity_index(&self) -> Option<usize> {
        self.strings.iter().position(|s| s.is_identity())
    }

    /// Tr[σ_x ρ] for every string in the support.
    fn expectations(&self, r: &mut Recorder<'_>, name: &'static str, rho: &ComplexMatrix) -> Result<Vec<f64>> {
        self.strings.iter().enumerate().map(|(k, s)| r.pauli(name, Some(k), rho, s)).collect()
    }
}

/// inf Tr[Hρ] + c Σ_i (Tr[A_i ρ] − b_i − z_i)² over states ρ and slacks z ≥ 0.
#[derive(Clone, Debug)]
pub struct ChamPrimal {
    inst: ConstrainedHamiltonian,
    c: f64,
    z_init: Vec<f64>,
}

impl ChamPrimal {
    pub fn new(inst: ConstrainedHamiltonian, c: f64) -> Result<Self> {
        let z_init = match inst.n_constraints() {
            2 => vec![0.1, 0.5],
            l => vec![0.1; l],
        };
        Self::with_slack_init(inst, c, z_init)
    }

    pub fn with_slack_init(inst: ConstrainedHamiltonian, c: f64, z_init: Vec<f64>) -> Result<Self> {
        check_c(c)?;
        if z_init.len() != inst.n_constraints() {
            return Err(ObjectiveError::Layout("one slack initial value per constraint".into()));
        }
        Ok(Self { inst, c, z_init })
    }

    pub fn objective(&self, rho: &ComplexMatrix, z: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        let inst = &self.inst;
        let mut r = Recorder::new(est);
        let t = inst.expectations(&mut r, "tr_pauli_rho", rho)?;
        let energy = ConstrainedHamiltonian::dot(&inst.h, &t);
        let penalty: f64 = inst
            .a
            .iter()
            .zip(&inst.b)
            .zip(z)
            .map(|((a, b), z)| (ConstrainedHamiltonian::dot(a, &t) - b - z).powi(2))
            .sum();
        Ok(r.finish(energy + self.c * penalty, penalty))
    }
}

impl Problem for ChamPrimal {
    fn tag(&self) -> &'static str {
        "cham_primal"
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn slots(&self) -> Vec<StateSlot> {
        vec![StateSlot::quantum("rho", self.inst.n)]
    }

    fn scalars(&self) -> Vec<ScalarSpec> {
        self.z_init.iter().enumerate().map(|(i, &z)| ScalarSpec::nonneg("z", z).at(i)).collect()
    }

    fn penalty_c(&self) -> f64 {
        self.c
    }

    fn evaluate(&self, states: &[Realized], scalars: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        self.objective(states[0].density(), scalars, est)
    }

    fn dense(&self, states: &[Realized], scalars: &[f64]) -> Result<f64> {
        let rho = states[0].density();
        let mut penalty = 0.0;
        for (i, (&b, &z)) in self.inst.b.iter().zip(scalars).enumerate() {
            penalty += (trace_product_real(&self.inst.constraint(i), rho) - b - z).powi(2);
        }
        Ok(trace_product_real(&self.inst.hamiltonian(), rho) + self.c * penalty)
    }
}

/// sup Σ b_i y_i + μ − c‖H − Σ y_i A_i − μI − νω‖² over y, ν ≥ 0, μ free, states ω.
#[derive(Clone, Debug)]
pub struct ChamDual {
    inst: ConstrainedHamiltonian,
    c: f64,
}

impl ChamDual {
    pub fn new(inst: ConstrainedHamiltonian, c: f64) -> Result<Self> {
        check_c(c)?;
        Ok(Self { inst, c })
    }

    pub fn objective(&self, omega: &ComplexMatrix, y: &[f64], mu: f64, nu: f64, est: &mut Estimator) -> Result<TermBreakdown> {
        let inst = &self.inst;
        let dim = inst.dim();
        let dot = ConstrainedHamiltonian::dot;
        let mut r = Recorder::new(est);
        let omega_sq = r.overlap("tr_omega_sq", None, omega, omega)?;
        let t = inst.expectations(&mut r, "tr_pauli_omega", omega)?;
        let h0 = inst.identity_index().map_or(0.0, |k| inst.h[k]);
        let a0 = |i: usize| inst.identity_index().map_or(0.0, |k| inst.a[i][k]);
        let mut f = dim * dot(&inst.h, &inst.h) + mu * mu * dim + nu * nu * omega_sq
            - 2.0 * dim * mu * h0
            - 2.0 * nu * dot(&inst.h, &t)
            + 2.0 * mu * nu;
        for (i, ai) in inst.a.iter().enumerate() {
            for (j, aj) in inst.a.iter().enumerate() {
                f += dim * y[i] * y[j] * dot(ai, aj);
            }
            f += -2.0 * dim * y[i] * dot(&inst.h, ai) + 2.0 * dim * mu * y[i] * a0(i) + 2.0 * nu * y[i] * dot(ai, &t);
        }
        let value = dot(&inst.b, y) + mu - self.c * f;
        Ok(r.finish(value, f))
    }
}

impl Problem for ChamDual {
    fn tag(&self) -> &'static str {
        "cham_dual"
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn slots(&self) -> Vec<StateSlot> {
        vec![StateSlot::quantum("omega", self.inst.n)]
    }

    fn scalars(&self) -> Vec<ScalarSpec> {
        let mut v: Vec<ScalarSpec> =
            (0..self.inst.n_constraints()).map(|i| ScalarSpec::nonneg("y", 0.001).at(i)).collect();
        v.push(ScalarSpec::free("mu", -0.005));
        v.push(ScalarSpec::nonneg("nu", 0.001));
        v
    }

    fn penalty_c(&self) -> f64 {
        self.c
    }

    fn evaluate(&self, states: &[Realized], scalars: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        let l = self.inst.n_constraints();
        self.objective(states[0].density(), &scalars[..l], scalars[l], scalars[l + 1], est)
    }

    fn dense(&self, states: &[Realized], scalars: &[f64]) -> Result<f64> {
        let inst = &self.inst;
        let l = inst.n_constraints();
        let (y, mu, nu) = (&scalars[..l], scalars[l], scalars[l + 1]);
        let mut m = inst.hamiltonian();
        for (i, &yi) in y.iter().enumerate() {
            m.axpy(C64::new(-yi, 0.0), &inst.constraint(i));
        }
        m.axpy(C64::new(-mu, 0.0), &ComplexMatrix::identity(m.rows()));
        m.axpy(C64::new(-nu, 0.0), states[0].density());
        Ok(ConstrainedHamiltonian::dot(&inst.b, y) + mu - self.c * hs_norm_sq(&m))
    }
}

/// inf Tr[Hρ] − η Σ_i ln(Tr[A_i ρ] − b_i); infeasible states are an error.
#[derive(Clone, Debug)]
pub struct ChamInteriorPoint {
    inst: ConstrainedHamiltonian,
    eta: f64,
}

impl ChamInteriorPoint {
    pub fn new(inst: ConstrainedHamiltonian, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(ObjectiveError::Invalid(format!("barrier weight must be positive, got {eta}")));
        }
        Ok(Self { inst, eta })
    }

    fn slacks(&self, t: &[f64]) -> Result<Vec<f64>> {
        self.inst
            .a
            .iter()
            .zip(&self.inst.b)
            .enumerate()
            .map(|(i, (a, b))| {
                let g = ConstrainedHamiltonian::dot(a, t) - b;
                if g > 0.0 {
                    Ok(g)
                } else {
                    Err(ObjectiveError::Infeasible(format!("constraint {i} has Tr[Aρ] - b = {g}")))
                }
            })
            .collect()
    }

    pub fn objective(&self, rho: &ComplexMatrix, est: &mut Estimator) -> Result<TermBreakdown> {
        let mut r = Recorder::new(est);
        let t = self.inst.expectations(&mut r, "tr_pauli_rho", rho)?;
        let energy = ConstrainedHamiltonian::dot(&self.inst.h, &t);
        let barrier: f64 = -self.slacks(&t)?.iter().map(|g| g.ln()).sum::<f64>();
        Ok(r.finish(energy + self.eta * barrier, barrier))
    }
}

impl Problem for ChamInteriorPoint {
    fn tag(&self) -> &'static str {
        "cham_interior_point"
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn slots(&self) -> Vec<StateSlot> {
        vec![StateSlot::quantum("rho", self.inst.n)]
    }

    fn scalars(&self) -> Vec<ScalarSpec> {
        Vec::new()
    }

    fn penalty_c(&self) -> f64 {
        self.eta
    }

    fn evaluate(&self, states: &[Realized], _scalars: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        self.objective(states[0].density(), est)
    }

    fn dense(&self, states: &[Realized], _scalars: &[f64]) -> Result<f64> {
        let rho = states[0].density();
        let mut value = trace_product_real(&self.inst.hamiltonian(), rho);
        for (i, &b) in self.inst.b.iter().enumerate() {
            let g = trace_product_real(&self.inst.constraint(i), rho) - b;
            if g <= 0.0 {
                return Err(ObjectiveError::Infeasible(format!("constraint {i} has Tr[Aρ] - b = {g}")));
            }
            value -= self.eta * g.ln();
        }
        Ok(value)
    }

    /// Chain rule; the barrier is not polynomial in ρ.
    fn state_derivative(&self, states: &[Realized], _scalars: &[f64], _slot: usize, dir: &Realized) -> Result<f64> {
        let mut est = Estimator::exact();
        let mut r = Recorder::new(&mut est);
        let t = self.inst.expectations(&mut r, "tr_pauli_rho", states[0].density())?;
        let dt = self.inst.expectations(&mut r, "tr_pauli_dir", dir.density())?;
        let g = self.slacks(&t)?;
        let mut d = ConstrainedHamiltonian::dot(&self.inst.h, &dt);
        for (a, gi) in self.inst.a.iter().zip(&g) {
            d -= self.eta * ConstrainedHamiltonian::dot(a, &dt) / gi;
        }
        Ok(d)
    }
}
