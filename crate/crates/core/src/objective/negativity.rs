//! Entanglement negativity ‖T_B(ρ_AB)‖₁ with trainable Pauli coefficient
//! vectors. T_B(σ_x) = (-1)^{#Y on B} σ_x, so partial transposes only flip signs.

use super::{
    check_c, check_state, coefficient_basis, ObjectiveError, Problem, Recorder, Result, ScalarSpec, Sense, StateSlot,
    TermBreakdown,
};
use crate::ansatz::Realized;
use crate::estimate::Estimator;
use crate::linalg::{hs_norm_sq, partial_transpose_b, trace_product_real, ComplexMatrix, C64};
use crate::pauli::PauliString;

#[derive(Clone, Debug)]
struct Bipartite {
    n_a: usize,
    n_b: usize,
    rho: ComplexMatrix,
    basis: Vec<PauliString>,
    signs: Vec<f64>,
}

impl Bipartite {
    fn new(n_a: usize, n_b: usize, rho: ComplexMatrix, basis: Vec<PauliString>) -> Result<Self> {
        let n = n_a + n_b;
        if n_b == 0 {
            return Err(ObjectiveError::Invalid("B must hold at least one qubit".into()));
        }
        check_state("rho", &rho, n)?;
        if basis.iter().any(|s| s.n_qubits() != n) {
            return Err(ObjectiveError::Dim("coefficient basis qubit count".into()));
        }
        let signs = basis.iter().map(|s| if s.count_y(n_a..n) % 2 == 1 { -1.0 } else { 1.0 }).collect();
        Ok(Self { n_a, n_b, rho, basis, signs })
    }

    fn n(&self) -> usize {
        self.n_a + self.n_b
    }

    fn dim(&self) -> f64 {
        (1u64 << self.n()) as f64
    }

    fn operator(&self, coeffs: &[f64]) -> ComplexMatrix {
        let d = 1 << self.n();
        let mut h = ComplexMatrix::zeros(d, d);
        for (s, &a) in self.basis.iter().zip(coeffs) {
            h.axpy(C64::new(a, 0.0), s.dense().matrix());
        }
        h
    }

    fn identity_coeff(&self, coeffs: &[f64]) -> f64 {
        self.basis.iter().zip(coeffs).find(|(s, _)| s.is_identity()).map_or(0.0, |(_, &a)| a)
    }

    fn partial_transpose(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        Ok(partial_transpose_b(m, 1 << self.n_a, 1 << self.n_b)?)
    }
}

/// sup Tr[H T_B(ρ)] − c(‖I − H − λσ‖² + ‖I + H − μτ‖²), H = Σ α_x σ_x.
#[derive(Clone, Debug)]
pub struct NegativityPrimal {
    inner: Bipartite,
    c: f64,
}

impl NegativityPrimal {
    pub fn new(n_a: usize, n_b: usize, rho: ComplexMatrix, c: f64) -> Result<Self> {
        Self::with_basis(n_a, n_b, rho, c, coefficient_basis(n_a + n_b, None))
    }

    pub fn with_basis(n_a: usize, n_b: usize, rho: ComplexMatrix, c: f64, basis: Vec<PauliString>) -> Result<Self> {
        check_c(c)?;
        Ok(Self { inner: Bipartite::new(n_a, n_b, rho, basis)?, c })
    }

    pub fn basis(&self) -> &[PauliString] {
        &self.inner.basis
    }

    pub fn objective(
        &self,
        sigma: &ComplexMatrix,
        tau: &ComplexMatrix,
        lambda: f64,
        mu: f64,
        alpha: &[f64],
        est: &mut Estimator,
    ) -> Result<TermBreakdown> {
        let b = &self.inner;
        let mut r = Recorder::new(est);
        let sigma_sq = r.overlap("tr_sigma_sq", None, sigma, sigma)?;
        let tau_sq = r.overlap("tr_tau_sq", None, tau, tau)?;
        let (mut g1, mut alpha_sq, mut h_sigma, mut h_tau) = (0.0, 0.0, 0.0, 0.0);
        for (k, s) in b.basis.iter().enumerate() {
            let a = alpha[k];
            alpha_sq += a * a;
            g1 += b.signs[k] * a * r.pauli("tr_pauli_rho", Some(k), &b.rho, s)?;
            h_sigma += a * r.pauli("tr_pauli_sigma", Some(k), sigma, s)?;
            h_tau += a * r.pauli("tr_pauli_tau", Some(k), tau, s)?;
        }
        let dim = b.dim();
        let g2 = 2.0 * dim + 2.0 * dim * alpha_sq + lambda * lambda * sigma_sq + mu * mu * tau_sq
            - 2.0 * lambda
            - 2.0 * mu
            + 2.0 * lambda * h_sigma
            - 2.0 * mu * h_tau;
        Ok(r.finish(g1 - self.c * g2, g2))
    }
}

impl Problem for NegativityPrimal {
    fn tag(&self) -> &'static str {
        "negativity_primal"
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn slots(&self) -> Vec<StateSlot> {
        let n = self.inner.n();
        vec![StateSlot::quantum("sigma", n), StateSlot::quantum("tau", n)]
    }

    fn scalars(&self) -> Vec<ScalarSpec> {
        let mut v = vec![ScalarSpec::nonneg("lambda", 1.0), ScalarSpec::nonneg("mu", 1.0)];
        v.extend((0..self.inner.basis.len()).map(|k| ScalarSpec::free("alpha", 0.0).at(k)));
        v
    }

    fn penalty_c(&self) -> f64 {
        self.c
    }

    fn evaluate(&self, states: &[Realized], scalars: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        self.objective(states[0].density(), states[1].density(), scalars[0], scalars[1], &scalars[2..], est)
    }

    fn dense(&self, states: &[Realized], scalars: &[f64]) -> Result<f64> {
        let b = &self.inner;
        let (lambda, mu) = (scalars[0], scalars[1]);
        let h = b.operator(&scalars[2..]);
        let id = ComplexMatrix::identity(h.rows());
        let mut lower = &id - &h;
        lower.axpy(C64::new(-lambda, 0.0), states[0].density());
        let mut upper = &id + &h;
        upper.axpy(C64::new(-mu, 0.0), states[1].density());
        let g1 = trace_product_real(&h, &b.partial_transpose(&b.rho)?);
        Ok(g1 - self.c * (hs_norm_sq(&lower) + hs_norm_sq(&upper)))
    }
}

/// inf Tr[K] + Tr[L] + c(‖T_B(K − L) − ρ‖² + ‖K − λσ‖² + ‖L − μτ‖²),
/// K = Σ α_x σ_x, L = Σ β_x σ_x.
#[derive(Clone, Debug)]
pub struct NegativityDual {
    inner: Bipartite,
    c: f64,
}

impl NegativityDual {
    pub fn new(n_a: usize, n_b: usize, rho: ComplexMatrix, c: f64) -> Result<Self> {
        Self::with_basis(n_a, n_b, rho, c, coefficient_basis(n_a + n_b, None))
    }

    pub fn with_basis(n_a: usize, n_b: usize, rho: ComplexMatrix, c: f64, basis: Vec<PauliString>) -> Result<Self> {
        check_c(c)?;
        Ok(Self { inner: Bipartite::new(n_a, n_b, rho, basis)?, c })
    }

    pub fn basis(&self) -> &[PauliString] {
        &self.inner.basis
    }

    #[allow(clippy::too_many_arguments)]
    pub fn objective(
        &self,
        sigma: &ComplexMatrix,
        tau: &ComplexMatrix,
        lambda: f64,
        mu: f64,
        alpha: &[f64],
        beta: &[f64],
        est: &mut Estimator,
    ) -> Result<TermBreakdown> {
        let b = &self.inner;
        let dim = b.dim();
        let mut r = Recorder::new(est);
        let rho_sq = r.overlap("tr_rho_sq", None, &b.rho, &b.rho)?;
        let sigma_sq = r.overlap("tr_sigma_sq", None, sigma, sigma)?;
        let tau_sq = r.overlap("tr_tau_sq", None, tau, tau)?;
        let (mut norms, mut cross, mut pt, mut k_sigma, mut l_tau) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (k, s) in b.basis.iter().enumerate() {
            let (a, be) = (alpha[k], beta[k]);
            norms += a * a + be * be;
            cross += a * be;
            pt += b.signs[k] * (a - be) * r.pauli("tr_pauli_rho", Some(k), &b.rho, s)?;
            k_sigma += a * r.pauli("tr_pauli_sigma", Some(k), sigma, s)?;
            l_tau += be * r.pauli("tr_pauli_tau", Some(k), tau, s)?;
        }
        let g3 = 2.0 * dim * norms + rho_sq + mu * mu * tau_sq - 2.0 * pt - 2.0 * dim * cross + lambda * lambda * sigma_sq
            - 2.0 * lambda * k_sigma
            - 2.0 * mu * l_tau;
        let value = dim * (b.identity_coeff(alpha) + b.identity_coeff(beta)) + self.c * g3;
        Ok(r.finish(value, g3))
    }
}

impl Problem for NegativityDual {
    fn tag(&self) -> &'static str {
        "negativity_dual"
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn slots(&self) -> Vec<StateSlot> {
        let n = self.inner.n();
        vec![StateSlot::quantum("sigma", n), StateSlot::quantum("tau", n)]
    }

    fn scalars(&self) -> Vec<ScalarSpec> {
        let m = self.inner.basis.len();
        let mut v = vec![ScalarSpec::nonneg("lambda", 1.0), ScalarSpec::nonneg("mu", 1.0)];
        v.extend((0..m).map(|k| ScalarSpec::free("alpha", 0.0).at(k)));
        v.extend((0..m).map(|k| ScalarSpec::free("beta", 0.0).at(k)));
        v
    }

    fn penalty_c(&self) -> f64 {
        self.c
    }

    fn evaluate(&self, states: &[Realized], scalars: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        let m = self.inner.basis.len();
        self.objective(
            states[0].density(),
            states[1].density(),
            scalars[0],
            scalars[1],
            &scalars[2..2 + m],
            &scalars[2 + m..],
            est,
        )
    }

    fn dense(&self, states: &[Realized], scalars: &[f64]) -> Result<f64> {
        let b = &self.inner;
        let m = b.basis.len();
        let (lambda, mu) = (scalars[0], scalars[1]);
        let k = b.operator(&scalars[2..2 + m]);
        let l = b.operator(&scalars[2 + m..]);
        let mut first = b.partial_transpose(&(&k - &l))?;
        first.axpy(C64::new(-1.0, 0.0), &b.rho);
        let mut second = k.clone();
        second.axpy(C64::new(-lambda, 0.0), states[0].density());
        let mut third = l.clone();
        third.axpy(C64::new(-mu, 0.0), states[1].density());
        let g3 = hs_norm_sq(&first) + hs_norm_sq(&second) + hs_norm_sq(&third);
        Ok(k.trace().re + l.trace().re + self.c * g3)
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_util::*;
    use super::*;
    use crate::linalg::{eig, spectral_map};

    #[test]
    fn expansions_match_dense() {
        let mut r = rng(20);
        for (na, nb) in [(0, 1), (1, 1)] {
            let rho = random_density(na + nb, &mut r);
            assert_expansion_matches(&NegativityPrimal::new(na, nb, rho.clone(), 5.0).unwrap(), 5, 40);
            assert_expansion_matches(&NegativityDual::new(na, nb, rho, 100.0).unwrap(), 6, 40);
        }
    }

    #[test]
    fn identity_coefficient_gives_unit_g1() {
        let mut r = rng(21);
        let rho = random_density(2, &mut r);
        let p = NegativityPrimal::new(1, 1, rho.clone(), 5.0).unwrap();
        let mut alpha = vec![0.0; p.basis().len()];
        alpha[0] = 1.0;
        let tb = p.objective(&rho, &rho, 1.0, 1.0, &alpha, &mut Estimator::exact()).unwrap();
        assert!((tb.value + 5.0 * tb.penalty - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dual_bell_certificate() {
        let h = 0.5f64.sqrt();
        let bell = ComplexMatrix::outer(&[C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)]);
        let p = NegativityDual::new(1, 1, bell.clone(), 100.0).unwrap();
        let pt = partial_transpose_b(&bell, 2, 2).unwrap();
        let e = eig(&pt).unwrap();
        let pos = spectral_map(&e, |x| x.max(0.0));
        let neg = spectral_map(&e, |x| (-x).max(0.0));
        let (k, l) = (pos, neg);
        let coeffs = |m: &ComplexMatrix| -> Vec<f64> {
            p.basis().iter().map(|s| trace_product_real(s.dense().matrix(), m) / 4.0).collect()
        };
        let (tk, tl) = (k.trace().re, l.trace().re);
        let tb = p
            .objective(&k.scale(1.0 / tk), &l.scale(1.0 / tl), tk, tl, &coeffs(&k), &coeffs(&l), &mut Estimator::exact())
            .unwrap();
        assert!(tb.penalty.abs() < 1e-10);
        assert!((tb.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn dual_zero_everything() {
        let mut r = rng(22);
        let rho = random_density(2, &mut r);
        let p = NegativityDual::new(1, 1, rho.clone(), 100.0).unwrap();
        let z = vec![0.0; p.basis().len()];
        let tb = p.objective(&rho, &rho, 0.0, 0.0, &z, &z, &mut Estimator::exact()).unwrap();
        assert!((tb.value - 100.0 * hs_norm_sq(&rho)).abs() < 1e-10);
    }
}
