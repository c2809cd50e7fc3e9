//! Classical programs over probability vectors: total variation distance and
//! the constrained classical Hamiltonian in the Walsh–Hadamard input model.

use std::collections::BTreeSet;

use super::{check_c, check_dist, ObjectiveError, Problem, Recorder, Result, ScalarSpec, Sense, StateSlot, TermBreakdown};
use crate::ansatz::Realized;
use crate::estimate::Estimator;
use crate::pauli::{WalshObservable, WalshString};

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn norm_sq(u: &[f64]) -> f64 {
    dot(u, u)
}

/// inf λ + c‖λr − p + q − μs‖² over λ, μ ≥ 0 and distributions r, s.
#[derive(Clone, Debug)]
pub struct TvdDual {
    n: usize,
    p: Vec<f64>,
    q: Vec<f64>,
    c: f64,
}

impl TvdDual {
    pub fn new(n: usize, p: Vec<f64>, q: Vec<f64>, c: f64) -> Result<Self> {
        check_c(c)?;
        check_dist("p", &p, n)?;
        check_dist("q", &q, n)?;
        Ok(Self { n, p, q, c })
    }

    pub fn objective(&self, r_: &[f64], s: &[f64], lambda: f64, mu: f64, est: &mut Estimator) -> Result<TermBreakdown> {
        let (p, q) = (&self.p, &self.q);
        let mut r = Recorder::new(est);
        let rr = r.collision("rr", None, r_, r_)?;
        let pp = r.collision("pp", None, p, p)?;
        let qq = r.collision("qq", None, q, q)?;
        let ss = r.collision("ss", None, s, s)?;
        let rp = r.collision("rp", None, r_, p)?;
        let rq = r.collision("rq", None, r_, q)?;
        let rs = r.collision("rs", None, r_, s)?;
        let pq = r.collision("pq", None, p, q)?;
        let ps = r.collision("ps", None, p, s)?;
        let qs = r.collision("qs", None, q, s)?;
        let penalty = lambda * lambda * rr + pp + qq + mu * mu * ss - 2.0 * lambda * rp + 2.0 * lambda * rq
            - 2.0 * lambda * mu * rs
            - 2.0 * pq
            + 2.0 * mu * ps
            - 2.0 * mu * qs;
        Ok(r.finish(lambda + self.c * penalty, penalty))
    }
}

impl Problem for TvdDual {
    fn tag(&self) -> &'static str {
        "tvd_dual"
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn slots(&self) -> Vec<StateSlot> {
        vec![StateSlot::classical("r", self.n), StateSlot::classical("s", self.n)]
    }

    fn scalars(&self) -> Vec<ScalarSpec> {
        vec![ScalarSpec::nonneg("lambda", 1.0), ScalarSpec::nonneg("mu", 1.0)]
    }

    fn penalty_c(&self) -> f64 {
        self.c
    }

    fn evaluate(&self, states: &[Realized], scalars: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        self.objective(states[0].distribution(), states[1].distribution(), scalars[0], scalars[1], est)
    }

    fn dense(&self, states: &[Realized], scalars: &[f64]) -> Result<f64> {
        let (lambda, mu) = (scalars[0], scalars[1]);
        let (r, s) = (states[0].distribution(), states[1].distribution());
        let v: Vec<f64> = (0..r.len()).map(|i| lambda * r[i] - self.p[i] + self.q[i] - mu * s[i]).collect();
        Ok(lambda + self.c * norm_sq(&v))
    }
}

/// sup λrᵀ(p − q) − c‖1 − λr − μs‖² over λ, μ ≥ 0 and distributions r, s.
#[derive(Clone, Debug)]
pub struct TvdPrimal {
    n: usize,
    p: Vec<f64>,
    q: Vec<f64>,
    c: f64,
}

impl TvdPrimal {
    pub fn new(n: usize, p: Vec<f64>, q: Vec<f64>, c: f64) -> Result<Self> {
        check_c(c)?;
        check_dist("p", &p, n)?;
        check_dist("q", &q, n)?;
        Ok(Self { n, p, q, c })
    }

    pub fn objective(&self, r_: &[f64], s: &[f64], lambda: f64, mu: f64, est: &mut Estimator) -> Result<TermBreakdown> {
        let mut r = Recorder::new(est);
        let rp = r.collision("rp", None, r_, &self.p)?;
        let rq = r.collision("rq", None, r_, &self.q)?;
        let rr = r.collision("rr", None, r_, r_)?;
        let ss = r.collision("ss", None, s, s)?;
        let rs = r.collision("rs", None, r_, s)?;
        let dim = (1u64 << self.n) as f64;
        let penalty = dim + lambda * lambda * rr + mu * mu * ss - 2.0 * lambda - 2.0 * mu + 2.0 * lambda * mu * rs;
        Ok(r.finish(lambda * (rp - rq) - self.c * penalty, penalty))
    }
}

impl Problem for TvdPrimal {
    fn tag(&self) -> &'static str {
        "tvd_primal"
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn slots(&self) -> Vec<StateSlot> {
        vec![StateSlot::classical("r", self.n), StateSlot::classical("s", self.n)]
    }

    fn scalars(&self) -> Vec<ScalarSpec> {
        vec![ScalarSpec::nonneg("lambda", 1.0), ScalarSpec::nonneg("mu", 1.0)]
    }

    fn penalty_c(&self) -> f64 {
        self.c
    }

    fn evaluate(&self, states: &[Realized], scalars: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        self.objective(states[0].distribution(), states[1].distribution(), scalars[0], scalars[1], est)
    }

    fn dense(&self, states: &[Realized], scalars: &[f64]) -> Result<f64> {
        let (lambda, mu) = (scalars[0], scalars[1]);
        let (r, s) = (states[0].distribution(), states[1].distribution());
        let diff: Vec<f64> = self.p.iter().zip(&self.q).map(|(a, b)| a - b).collect();
        let v: Vec<f64> = (0..r.len()).map(|i| 1.0 - lambda * r[i] - mu * s[i]).collect();
        Ok(lambda * dot(r, &diff) - self.c * norm_sq(&v))
    }
}

/// h, (a_i, b_i) in the Walsh basis, expanded over the union of supports.
#[derive(Clone, Debug)]
pub struct ClassicalInstance {
    n: usize,
    strings: Vec<WalshString>,
    h: Vec<f64>,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl ClassicalInstance {
    pub fn new(h: &WalshObservable, constraints: &[(WalshObservable, f64)]) -> Result<Self> {
        let n = h.n_bits();
        if constraints.iter().any(|(a, _)| a.n_bits() != n) {
            return Err(ObjectiveError::Dim("constraint vectors must match h".into()));
        }
        let mut set: BTreeSet<WalshString> = h.terms().map(|(s, _)| s.clone()).collect();
        for (a, _) in constraints {
            set.extend(a.terms().map(|(s, _)| s.clone()));
        }
        let strings: Vec<WalshString> = set.into_iter().collect();
        let hc = strings.iter().map(|s| h.coeff(s)).collect();
        let a = constraints.iter().map(|(a, _)| strings.iter().map(|s| a.coeff(s)).collect()).collect();
        let b = constraints.iter().map(|&(_, b)| b).collect();
        Ok(Self { n, strings, h: hc, a, b })
    }

    /// h = s₁⊗s₁, a₁ = 0.5 s₁⊗s₀ with b₁ = 0.1, a₂ = 0.7 s₀⊗s₁ with b₂ = 0.3.
    pub fn two_bit_example() -> Self {
        let h = WalshObservable::from_terms(2, [("11", 1.0)]).unwrap();
        let a1 = WalshObservable::from_terms(2, [("10", 0.5)]).unwrap();
        let a2 = WalshObservable::from_terms(2, [("01", 0.7)]).unwrap();
        Self::new(&h, &[(a1, 0.1), (a2, 0.3)]).unwrap()
    }

    pub fn n_bits(&self) -> usize {
        self.n
    }

    pub fn n_constraints(&self) -> usize {
        self.b.len()
    }

    pub fn bounds(&self) -> &[f64] {
        &self.b
    }

    fn dense_of(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; 1 << self.n];
        for (s, &c) in self.strings.iter().zip(coeffs) {
            for (x, sx) in v.iter_mut().zip(s.vector()) {
                *x += c * sx;
            }
        }
        v
    }

    pub fn h_vector(&self) -> Vec<f64> {
        self.dense_of(&self.h)
    }

    pub fn constraint_vector(&self, i: usize) -> Vec<f64> {
        self.dense_of(&self.a[i])
    }

    fn zero_index(&self) -> Option<usize> {
        self.strings.iter().position(|s| s.is_zero())
    }

    fn expectations(&self, r: &mut Recorder<'_>, name: &'static str, p: &[f64]) -> Result<Vec<f64>> {
        self.strings.iter().enumerate().map(|(k, s)| r.walsh(name, Some(k), p, s)).collect()
    }
}

/// inf hᵀp + c Σ_i (a_iᵀp − b_i − z_i)² over distributions p and z ≥ 0.
#[derive(Clone, Debug)]
pub struct ClassicalChamPrimal {
    inst: ClassicalInstance,
    c: f64,
    z_init: Vec<f64>,
}

impl ClassicalChamPrimal {
    pub fn new(inst: ClassicalInstance, c: f64) -> Result<Self> {
        let z_init = vec![0.1; inst.n_constraints()];
        Self::with_slack_init(inst, c, z_init)
    }

    pub fn with_slack_init(inst: ClassicalInstance, c: f64, z_init: Vec<f64>) -> Result<Self> {
        check_c(c)?;
        if z_init.len() != inst.n_constraints() {
            return Err(ObjectiveError::Layout("one slack initial value per constraint".into()));
        }
        Ok(Self { inst, c, z_init })
    }

    pub fn objective(&self, p: &[f64], z: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        let inst = &self.inst;
        let mut r = Recorder::new(est);
        let t = inst.expectations(&mut r, "walsh_p", p)?;
        let energy = dot(&inst.h, &t);
        let penalty: f64 =
            inst.a.iter().zip(&inst.b).zip(z).map(|((a, b), z)| (dot(a, &t) - b - z).powi(2)).sum();
        Ok(r.finish(energy + self.c * penalty, penalty))
    }
}

impl Problem for ClassicalChamPrimal {
    fn tag(&self) -> &'static str {
        "classical_cham_primal"
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn slots(&self) -> Vec<StateSlot> {
        vec![StateSlot::classical("p", self.inst.n)]
    }

    fn scalars(&self) -> Vec<ScalarSpec> {
        self.z_init.iter().enumerate().map(|(i, &z)| ScalarSpec::nonneg("z", z).at(i)).collect()
    }

    fn penalty_c(&self) -> f64 {
        self.c
    }

    fn evaluate(&self, states: &[Realized], scalars: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        self.objective(states[0].distribution(), scalars, est)
    }

    fn dense(&self, states: &[Realized], scalars: &[f64]) -> Result<f64> {
        let p = states[0].distribution();
        let mut penalty = 0.0;
        for (i, (&b, &z)) in self.inst.b.iter().zip(scalars).enumerate() {
            penalty += (dot(&self.inst.constraint_vector(i), p) - b - z).powi(2);
        }
        Ok(dot(&self.inst.h_vector(), p) + self.c * penalty)
    }
}

/// sup bᵀy + μ − c‖h − Σ y_i a_i − μ1 − νw‖² over y, ν ≥ 0, μ free, distributions w.
#[derive(Clone, Debug)]
pub struct ClassicalChamDual {
    inst: ClassicalInstance,
    c: f64,
    nu_init: f64,
}

impl ClassicalChamDual {
    pub fn new(inst: ClassicalInstance, c: f64) -> Result<Self> {
        check_c(c)?;
        Ok(Self { inst, c, nu_init: 1.0 })
    }

    pub fn objective(&self, w: &[f64], y: &[f64], mu: f64, nu: f64, est: &mut Estimator) -> Result<TermBreakdown> {
        let inst = &self.inst;
        let dim = (1u64 << inst.n) as f64;
        let mut r = Recorder::new(est);
        let ww = r.collision("ww", None, w, w)?;
        let t = inst.expectations(&mut r, "walsh_w", w)?;
        let h0 = inst.zero_index().map_or(0.0, |k| inst.h[k]);
        let a0 = |i: usize| inst.zero_index().map_or(0.0, |k| inst.a[i][k]);
        let mut f = dim * norm_sq(&inst.h) + mu * mu * dim + nu * nu * ww
            - 2.0 * dim * mu * h0
            - 2.0 * nu * dot(&inst.h, &t)
            + 2.0 * mu * nu;
        for (i, ai) in inst.a.iter().enumerate() {
            for (j, aj) in inst.a.iter().enumerate() {
                f += dim * y[i] * y[j] * dot(ai, aj);
            }
            f += -2.0 * dim * y[i] * dot(&inst.h, ai) + 2.0 * dim * mu * y[i] * a0(i) + 2.0 * nu * y[i] * dot(ai, &t);
        }
        Ok(r.finish(dot(&inst.b, y) + mu - self.c * f, f))
    }
}

impl Problem for ClassicalChamDual {
    fn tag(&self) -> &'static str {
        "classical_cham_dual"
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn slots(&self) -> Vec<StateSlot> {
        vec![StateSlot::classical("w", self.inst.n)]
    }

    fn scalars(&self) -> Vec<ScalarSpec> {
        let mut v: Vec<ScalarSpec> = (0..self.inst.n_constraints()).map(|i| ScalarSpec::nonneg("y", 0.0).at(i)).collect();
        v.push(ScalarSpec::free("mu", 0.0));
        v.push(ScalarSpec::nonneg("nu", self.nu_init));
        v
    }

    fn penalty_c(&self) -> f64 {
        self.c
    }

    fn evaluate(&self, states: &[Realized], scalars: &[f64], est: &mut Estimator) -> Result<TermBreakdown> {
        let l = self.inst.n_constraints();
        self.objective(states[0].distribution(), &scalars[..l], scalars[l], scalars[l + 1], est)
    }

    fn dense(&self, states: &[Realized], scalars: &[f64]) -> Result<f64> {
        let inst = &self.inst;
        let l = inst.n_constraints();
        let (y, mu, nu) = (&scalars[..l], scalars[l], scalars[l + 1]);
        let w = states[0].distribution();
        let mut v = inst.h_vector();
        for (i, &yi) in y.iter().enumerate() {
            for (x, a) in v.iter_mut().zip(inst.constraint_vector(i)) {
                *x -= yi * a;
            }
        }
        for (x, wi) in v.iter_mut().zip(w) {
            *x -= mu + nu * wi;
        }
        Ok(dot(&inst.b, y) + mu - self.c * norm_sq(&v))
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_util::*;
    use super::*;
    use rand::Rng;

    #[test]
    fn expansions_match_dense() {
        let mut r = rng(40);
        for n in 1..=2 {
            let (p, q) = (random_dist(n, &mut r), random_dist(n, &mut r));
            assert_expansion_matches(&TvdDual::new(n, p.clone(), q.clone(), 100.0).unwrap(), 9, 50);
            assert_expansion_matches(&TvdPrimal::new(n, p, q, 10.0).unwrap(), 10, 50);
            let obs = |r: &mut rand_chacha::ChaCha8Rng| {
                let mut o = WalshObservable::new(n);
                for s in WalshString::all(n) {
                    o.add(s, r.random::<f64>() - 0.5).unwrap();
                }
                o
            };
            let h = obs(&mut r);
            let cons = vec![(obs(&mut r), 0.1), (obs(&mut r), -0.2)];
            let inst = ClassicalInstance::new(&h, &cons).unwrap();
            assert_expansion_matches(&ClassicalChamPrimal::new(inst.clone(), 10.0).unwrap(), 11, 50);
            assert_expansion_matches(&ClassicalChamDual::new(inst, 10.0).unwrap(), 12, 50);
        }
    }

    #[test]
    fn tvd_dual_special_points() {
        let mut r = rng(41);
        let (p, q, x) = (random_dist(2, &mut r), random_dist(2, &mut r), random_dist(2, &mut r));
        let same = TvdDual::new(2, p.clone(), p.clone(), 100.0).unwrap();
        let tb = same.objective(&x, &x, 1.0, 1.0, &mut Estimator::exact()).unwrap();
        assert!((tb.value - 1.0).abs() < 1e-12);
        let d = TvdDual::new(2, p.clone(), q.clone(), 100.0).unwrap();
        let tb = d.objective(&x, &x, 0.0, 0.0, &mut Estimator::exact()).unwrap();
        let want: f64 = p.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>() * 100.0;
        assert!((tb.value - want).abs() < 1e-12);
    }

    #[test]
    fn unconstrained_uniform_is_mean_of_h() {
        let h = WalshObservable::from_terms(2, [("00", 0.3), ("11", 1.0)]).unwrap();
        let inst = ClassicalInstance::new(&h, &[]).unwrap();
        let p = ClassicalChamPrimal::new(inst.clone(), 10.0).unwrap();
        let tb = p.objective(&[0.25; 4], &[], &mut Estimator::exact()).unwrap();
        let hv = inst.h_vector();
        assert!((tb.value - hv.iter().sum::<f64>() / 4.0).abs() < 1e-15);
    }
}
