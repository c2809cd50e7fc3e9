//! Pauli strings, sparse Pauli expansions and the Walsh–Hadamard vectors
//! that play the same role for diagonal (classical) problems.
//!
//! Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of
//! a computational basis index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::linalg::{ComplexMatrix, HermitianMatrix, LinalgError, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("invalid Pauli label {0:?}")]
    BadLabel(char),
    #[error("invalid Walsh label {0:?}")]
    BadWalshLabel(char),
    #[error("empty string")]
    Empty,
    #[error("length mismatch: expected {expected} qubits, got {got}")]
    Length { expected: usize, got: usize },
    #[error("term cap exceeded: {count} terms, cap {cap}")]
    TermCap { count: usize, cap: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, PauliError>;

const I: C64 = C64::new(0.0, 1.0);

/// Default cap on stored terms: every string for n <= 2, 64 beyond.
pub fn default_term_cap(n: usize) -> usize {
    if n <= 2 {
        4usize.pow(n as u32)
    } else {
        64
    }
}

/// Tensor product of single-qubit Paulis; label 0=I, 1=X, 2=Y, 3=Z.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<u8>);

impl PauliString {
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        if labels.is_empty() {
            return Err(PauliError::Empty);
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 3) {
            return Err(PauliError::BadLabel(char::from(b'0' + bad.min(9))));
        }
        Ok(Self(labels))
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// Every string on n qubits in lexicographic label order.
    pub fn all(n: usize) -> Vec<Self> {
        (0..4usize.pow(n as u32)).map(|k| Self::from_index(n, k)).collect()
    }

    /// Base-4 digits of k, most significant first.
    pub fn from_index(n: usize, mut k: usize) -> Self {
        let mut labels = vec![0u8; n];
        for slot in labels.iter_mut().rev() {
            *slot = (k % 4) as u8;
            k /= 4;
        }
        Self(labels)
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &l| acc * 4 + l as usize)
    }

    pub fn labels(&self) -> &[u8] {
        &self.0
    }

    pub fn n_qubits(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&l| l == 0)
    }

    /// Number of Y factors among qubits in `range`.
    pub fn count_y(&self, range: std::ops::Range<usize>) -> usize {
        self.0[range].iter().filter(|&&l| l == 2).count()
    }

    /// Concatenation self ⊗ other.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut labels = self.0.clone();
        labels.extend_from_slice(&other.0);
        Self(labels)
    }

    pub fn masks(&self) -> PauliMasks {
        let n = self.0.len();
        let mut m = PauliMasks { flip: 0, phase: 0, n_y: 0 };
        for (q, &l) in self.0.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match l {
                1 => m.flip |= bit,
                2 => {
                    m.flip |= bit;
                    m.phase |= bit;
                    m.n_y += 1;
                }
                3 => m.phase |= bit,
                _ => {}
            }
        }
        m
    }

    pub fn dense(&self) -> HermitianMatrix {
        let d = 1usize << self.0.len();
        let m = self.masks();
        let mut out = ComplexMatrix::zeros(d, d);
        for k in 0..d {
            out[(k ^ m.flip, k)] = m.phase_of(k);
        }
        HermitianMatrix::new(out).expect("Pauli strings are Hermitian")
    }

    /// Tr[σ ρ] for any square operator of matching dimension, computed
    /// from the permutation-with-phase structure of σ.
    pub fn trace_with(&self, rho: &ComplexMatrix) -> C64 {
        self.masks().trace_with(rho)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.0 {
            f.write_str(["I", "X", "Y", "Z"][l as usize])?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;
    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' | '0' => Ok(0),
                'X' | '1' => Ok(1),
                'Y' | '2' => Ok(2),
                'Z' | '3' => Ok(3),
                other => Err(PauliError::BadLabel(other)),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(labels)
    }
}

/// Bit masks describing σ|k> = phase(k) |k ⊕ flip>.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliMasks {
    pub flip: usize,
    pub phase: usize,
    pub n_y: u32,
}

impl PauliMasks {
    /// i^{n_Y} (-1)^{popcount(k & phase)}
    pub fn phase_of(&self, k: usize) -> C64 {
        let base = I.powu(self.n_y);
        if (k & self.phase).count_ones() % 2 == 1 {
            -base
        } else {
            base
        }
    }

    pub fn trace_with(&self, rho: &ComplexMatrix) -> C64 {
        let d = rho.rows();
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..d {
            let v = rho[(k, k ^ self.flip)];
            if (k & self.phase).count_ones() % 2 == 1 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        acc * I.powu(self.n_y)
    }

    /// ψ ← σ ψ, written into `out`.
    pub fn apply(&self, psi: &[C64], out: &mut [C64]) {
        let base = I.powu(self.n_y);
        for (j, o) in out.iter_mut().enumerate() {
            let k = j ^ self.flip;
            let s = if (k & self.phase).count_ones() % 2 == 1 { -base } else { base };
            *o = s * psi[k];
        }
    }
}

/// Sparse expansion Σ_x c_x σ_x. Coefficients are complex so the same type
/// can hold a general operator; Hermitian observables keep them real.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliObservable {
    n: usize,
    cap: usize,
    terms: BTreeMap<PauliString, C64>,
}

impl PauliObservable {
    pub fn new(n: usize) -> Self {
        Self { n, cap: default_term_cap(n), terms: BTreeMap::new() }
    }

    pub fn with_cap(n: usize, cap: usize) -> Self {
        Self { n, cap, terms: BTreeMap::new() }
    }

    pub fn from_real_terms<'a>(n: usize, terms: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let mut o = Self::new(n);
        for (s, c) in terms {
            o.add(s.parse()?, C64::new(c, 0.0))?;
        }
        Ok(o)
    }

    /// Dense real coefficient vector over all 4^n strings, lexicographic.
    pub fn from_dense_real(n: usize, coeffs: &[f64]) -> Result<Self> {
        let mut o = Self::with_cap(n, 4usize.pow(n as u32));
        for (k, &c) in coeffs.iter().enumerate() {
            o.add(PauliString::from_index(n, k), C64::new(c, 0.0))?;
        }
        Ok(o)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Adds c to the coefficient of s; zero results are dropped.
    pub fn add(&mut self, s: PauliString, c: C64) -> Result<()> {
        if s.n_qubits() != self.n {
            return Err(PauliError::Length { expected: self.n, got: s.n_qubits() });
        }
        let entry = self.terms.entry(s.clone()).or_insert(C64::new(0.0, 0.0));
        *entry += c;
        if *entry == C64::new(0.0, 0.0) {
            self.terms.remove(&s);
        }
        if self.terms.len() > self.cap {
            return Err(PauliError::TermCap { count: self.terms.len(), cap: self.cap });
        }
        Ok(())
    }

    pub fn coeff(&self, s: &PauliString) -> C64 {
        self.terms.get(s).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every coefficient is real, so the dense operator is Hermitian.
    pub fn is_hermitian(&self) -> bool {
        self.terms.values().all(|c| c.im == 0.0)
    }

    /// Squared Euclidean norm of the coefficient vector.
    pub fn coeff_norm_sq(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn dense(&self) -> ComplexMatrix {
        let d = 1usize << self.n;
        let mut out = ComplexMatrix::zeros(d, d);
        for (s, &c) in &self.terms {
            let m = s.masks();
            for k in 0..d {
                out[(k ^ m.flip, k)] += c * m.phase_of(k);
            }
        }
        out
    }

    /// Σ c_x Tr[σ_x ρ].
    pub fn expect(&self, rho: &ComplexMatrix) -> Result<C64> {
        if rho.rows() != 1 << self.n || !rho.is_square() {
            return Err(PauliError::Length { expected: self.n, got: rho.rows().trailing_zeros() as usize });
        }
        Ok(self.terms.iter().map(|(s, &c)| c * s.trace_with(rho)).sum())
    }
}

/// Measurement basis for one qubit of a Pauli string (Algorithm-1 style):
/// kets |φ_{0,x}>, |φ_{1,x}> and whether the outcome enters the sign.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitBasis {
    pub label: u8,
    pub kets: [[C64; 2]; 2],
    pub in_sign: bool,
}

/// Per-qubit eigenbases used to measure σ_x; the product of (-1)^{y_j} over
/// qubits with `in_sign` is an unbiased ±1 sample of Tr[σ_x ρ].
pub fn pauli_eigenbasis_sampler(p: &PauliString) -> Vec<QubitBasis> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| C64::new(x, 0.0);
    p.labels()
        .iter()
        .map(|&l| {
            let kets = match l {
                1 => [[r(h), r(h)], [r(h), r(-h)]],
                2 => [[r(h), C64::new(0.0, h)], [r(h), C64::new(0.0, -h)]],
                _ => [[r(1.0), r(0.0)], [r(0.0), r(1.0)]],
            };
            QubitBasis { label: l, kets, in_sign: l != 0 }
        })
        .collect()
}

/// s_x = s_{x1} ⊗ … ⊗ s_{xn} with s_0 = (1,1), s_1 = (1,-1).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WalshString(Vec<u8>);

impl WalshString {
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        if labels.is_empty() {
            return Err(PauliError::Empty);
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(PauliError::BadWalshLabel(char::from(b'0' + bad.min(9))));
        }
        Ok(Self(labels))
    }

    pub fn from_index(n: usize, k: usize) -> Self {
        Self((0..n).map(|q| ((k >> (n - 1 - q)) & 1) as u8).collect())
    }

    pub fn all(n: usize) -> Vec<Self> {
        (0..1usize << n).map(|k| Self::from_index(n, k)).collect()
    }

    pub fn labels(&self) -> &[u8] {
        &self.0
    }

    pub fn n_bits(&self) -> usize {
        self.0.len()
    }

    pub fn mask(&self) -> usize {
        self.0.iter().fold(0, |acc, &l| (acc << 1) | l as usize)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&l| l == 0)
    }

    /// Entry i of s_x is (-1)^{x·i}.
    pub fn vector(&self) -> Vec<f64> {
        let m = self.mask();
        (0..1usize << self.0.len())
            .map(|i| if (i & m).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
            .collect()
    }

    pub fn dot(&self, p: &[f64]) -> Result<f64> {
        if p.len() != 1 << self.0.len() {
            return Err(PauliError::Length { expected: 1 << self.0.len(), got: p.len() });
        }
        let m = self.mask();
        Ok(p.iter()
            .enumerate()
            .map(|(i, &x)| if (i & m).count_ones() % 2 == 0 { x } else { -x })
            .sum())
    }
}

impl fmt::Display for WalshString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for WalshString {
    type Err = PauliError;
    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(PauliError::BadWalshLabel(other)),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(labels)
    }
}

/// s_x^T p.
pub fn walsh_dot(w: &WalshString, p: &[f64]) -> Result<f64> {
    w.dot(p)
}

/// Real expansion Σ_x c_x s_x.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct WalshObservable {
    n: usize,
    terms: BTreeMap<WalshString, f64>,
}

impl WalshObservable {
    pub fn new(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn from_terms<'a>(n: usize, terms: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let mut o = Self::new(n);
        for (s, c) in terms {
            o.add(s.parse()?, c)?;
        }
        Ok(o)
    }

    pub fn add(&mut self, s: WalshString, c: f64) -> Result<()> {
        if s.n_bits() != self.n {
            return Err(PauliError::Length { expected: self.n, got: s.n_bits() });
        }
        let entry = self.terms.entry(s.clone()).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&s);
        }
        Ok(())
    }

    pub fn n_bits(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, s: &WalshString) -> f64 {
        self.terms.get(s).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&WalshString, &f64)> {
        self.terms.iter()
    }

    pub fn coeff_norm_sq(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum()
    }

    pub fn dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; 1 << self.n];
        for (s, &c) in &self.terms {
            for (o, v) in out.iter_mut().zip(s.vector()) {
                *o += c * v;
            }
        }
        out
    }

    pub fn expect(&self, p: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for (s, &c) in &self.terms {
            acc += c * s.dot(p)?;
        }
        Ok(acc)
    }
}
