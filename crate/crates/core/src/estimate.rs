//! Estimators for the primitive quantities that objectives are built from:
//! Pauli expectations, state overlaps, collision probabilities and Walsh
//! expectations. `Estimator` runs either in exact (infinite-shot) mode or
//! emulates the shot noise of a finite number of circuit repetitions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::ansatz::{AnsatzError, ConvexCombinationAnsatz};
use crate::linalg::{trace_product_real, ComplexMatrix, DensityMatrix, LinalgError, C64};
use crate::pauli::{pauli_eigenbasis_sampler, PauliError, PauliString, WalshString};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
    #[error("argument out of range: {0}")]
    Range(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
}

pub type Result<T> = std::result::Result<T, EstimateError>;

/// Above this many shots the binomial draw is replaced by its Gaussian limit.
pub const GAUSSIAN_SHOTS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ShotModel {
    #[default]
    Exact,
    Shots {
        #[serde(deserialize_with = "de_count")]
        n: u64,
        #[serde(default)]
        seed: u64,
    },
}

// Accepts `1e12` as well as `1000000000000`.
fn de_count<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u64, D::Error> {
    let x = f64::deserialize(d)?;
    if !(x >= 1.0) || x.fract() != 0.0 || x > u64::MAX as f64 {
        return Err(serde::de::Error::custom(format!("shot count must be a positive integer, got {x}")));
    }
    Ok(x as u64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
    pub n_shots: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_err: 0.0, n_shots: 0 }
    }
}

/// Source of term estimates. One sequential RNG stream serves all terms.
#[derive(Clone, Debug)]
pub struct Estimator {
    shots: Option<u64>,
    rng: ChaCha8Rng,
}

impl Estimator {
    pub fn exact() -> Self {
        Self { shots: None, rng: ChaCha8Rng::seed_from_u64(0) }
    }

    pub fn new(model: ShotModel) -> Self {
        match model {
            ShotModel::Exact => Self::exact(),
            ShotModel::Shots { n, seed } => Self { shots: Some(n), rng: ChaCha8Rng::seed_from_u64(seed) },
        }
    }

    pub fn is_exact(&self) -> bool {
        self.shots.is_none()
    }

    pub fn shots(&self) -> Option<u64> {
        self.shots
    }

    /// Sample mean of N draws of a ±1 variable with mean `m`.
    /// Exact mode passes `m` through unclamped so that objectives stay
    /// polynomial when evaluated on non-state matrices.
    pub fn pm_one(&mut self, m: f64) -> Estimate {
        let Some(n) = self.shots else {
            return Estimate::exact(m);
        };
        let m = m.clamp(-1.0, 1.0);
        let nf = n as f64;
        let value = if n > GAUSSIAN_SHOTS {
            let z: f64 = self.rng.sample(StandardNormal);
            (m + z * ((1.0 - m * m) / nf).sqrt()).clamp(-1.0, 1.0)
        } else {
            let k = Binomial::new(n, (1.0 + m) / 2.0).expect("valid binomial").sample(&mut self.rng);
            2.0 * k as f64 / nf - 1.0
        };
        Estimate { value, std_err: ((1.0 - value * value).max(0.0) / nf).sqrt(), n_shots: n }
    }

    /// Sample frequency of N Bernoulli(p) draws.
    pub fn bernoulli(&mut self, p: f64) -> Estimate {
        let Some(n) = self.shots else {
            return Estimate::exact(p);
        };
        let p = p.clamp(0.0, 1.0);
        let nf = n as f64;
        let value = if n > GAUSSIAN_SHOTS {
            let z: f64 = self.rng.sample(StandardNormal);
            (p + z * (p * (1.0 - p) / nf).sqrt()).clamp(0.0, 1.0)
        } else {
            Binomial::new(n, p).expect("valid binomial").sample(&mut self.rng) as f64 / nf
        };
        Estimate { value, std_err: (value * (1.0 - value) / nf).sqrt(), n_shots: n }
    }

    /// Tr[σ_x ρ]; `rho` is taken as given (no density checks on the hot path).
    pub fn pauli(&mut self, rho: &ComplexMatrix, p: &PauliString) -> Result<Estimate> {
        check_len(rho.rows(), 1 << p.n_qubits())?;
        if p.is_identity() {
            return Ok(Estimate::exact(rho.trace().re));
        }
        let m = p.masks().trace_with(rho).re;
        Ok(self.pm_one(m))
    }

    /// Tr[ρσ] by the destructive swap test: a ±1 outcome with mean Tr[ρσ].
    pub fn overlap(&mut self, rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<Estimate> {
        check_len(rho.rows(), sigma.rows())?;
        let m = trace_product_real(rho, sigma);
        Ok(self.pm_one(m))
    }

    /// pᵀq by the collision test.
    pub fn collision(&mut self, p: &[f64], q: &[f64]) -> Result<Estimate> {
        check_len(p.len(), q.len())?;
        let m: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
        Ok(self.bernoulli(m))
    }

    /// s_xᵀp, the mean of (-1)^{x·i} for i ~ p.
    pub fn walsh(&mut self, p: &[f64], w: &WalshString) -> Result<Estimate> {
        if w.is_zero() {
            check_len(p.len(), 1 << w.n_bits())?;
            return Ok(Estimate::exact(p.iter().sum()));
        }
        let m = w.dot(p)?;
        Ok(self.pm_one(m))
    }
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(EstimateError::Length(a, b));
    }
    Ok(())
}

pub fn estimate_pauli_expect(rho: &DensityMatrix, p: &PauliString, est: &mut Estimator) -> Result<Estimate> {
    est.pauli(rho.matrix(), p)
}

pub fn estimate_overlap_swap(rho: &DensityMatrix, sigma: &DensityMatrix, est: &mut Estimator) -> Result<Estimate> {
    est.overlap(rho.matrix(), sigma.matrix())
}

pub fn estimate_collision(p: &[f64], q: &[f64], est: &mut Estimator) -> Result<Estimate> {
    est.collision(p, q)
}

/// Literal per-shot sampler: measure each qubit of ρ in the eigenbasis of
/// its Pauli factor T times and average the signed outcomes.
pub fn sample_pauli_mean<R: Rng + ?Sized>(rho: &DensityMatrix, p: &PauliString, t: u64, rng: &mut R) -> Result<Estimate> {
    let n = p.n_qubits();
    let d = 1usize << n;
    check_len(rho.dim(), d)?;
    if t == 0 {
        return Err(EstimateError::Range("T must be positive".into()));
    }
    let bases = pauli_eigenbasis_sampler(p);
    let rho = rho.matrix();
    let mut probs = Vec::with_capacity(d);
    let mut signs = Vec::with_capacity(d);
    for y in 0..d {
        let mut phi = vec![C64::new(1.0, 0.0)];
        let mut sign = 1.0;
        for (j, b) in bases.iter().enumerate() {
            let bit = (y >> (n - 1 - j)) & 1;
            let ket = b.kets[bit];
            phi = phi.iter().flat_map(|a| [a * ket[0], a * ket[1]]).collect();
            if b.in_sign && bit == 1 {
                sign = -sign;
            }
        }
        let mut pr = C64::new(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                pr += phi[i].conj() * rho[(i, k)] * phi[k];
            }
        }
        probs.push(pr.re.max(0.0));
        signs.push(sign);
    }
    let mut sum = 0.0;
    for _ in 0..t {
        sum += signs[crate::ansatz::sample_index(&probs, rng)];
    }
    let value = sum / t as f64;
    Ok(Estimate { value, std_err: ((1.0 - value * value).max(0.0) / t as f64).sqrt(), n_shots: t })
}

/// Second argument of the Loschmidt-echo overlap.
#[derive(Clone, Copy, Debug)]
pub enum OverlapPartner<'a> {
    Density(&'a ComplexMatrix),
    ConvexCombination(&'a ConvexCombinationAnsatz, &'a [f64]),
}

/// Tr[ρσ] for a convex-combination ρ = Σ_x p(x) U|x><x|U†, as the probability
/// that measuring U†σU returns the sampled x. With σ also of convex-combination
/// form V, the measured state is U†V|y> with y ~ r.
pub fn estimate_overlap_loschmidt(
    cc: &ConvexCombinationAnsatz,
    params: &[f64],
    other: OverlapPartner<'_>,
    est: &mut Estimator,
) -> Result<Estimate> {
    let p = cc.distribution(params)?;
    let u = cc.basis_unitary(params)?;
    let d = p.len();
    let success = match other {
        OverlapPartner::Density(sigma) => {
            check_len(sigma.rows(), d)?;
            let rotated = u.adjoint().matmul(sigma)?.matmul(&u)?;
            (0..d).map(|x| p[x] * rotated[(x, x)].re).sum::<f64>()
        }
        OverlapPartner::ConvexCombination(cc2, params2) => {
            let r = cc2.distribution(params2)?;
            check_len(r.len(), d)?;
            let w = u.adjoint().matmul(&cc2.basis_unitary(params2)?)?;
            let mut s = 0.0;
            for x in 0..d {
                for y in 0..d {
                    s += p[x] * r[y] * w[(x, y)].norm_sqr();
                }
            }
            s
        }
    };
    Ok(est.bernoulli(success))
}

/// Smallest T with T ≥ ln(2/δ) / (2ε²).
pub fn hoeffding_shots(epsilon: f64, delta: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(EstimateError::Range(format!("epsilon = {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(EstimateError::Range(format!("delta = {delta}")));
    }
    let t = (2.0 / delta).ln() / (2.0 * epsilon * epsilon);
    Ok(((t - 1e-9).ceil()).max(1.0) as u64)
}
