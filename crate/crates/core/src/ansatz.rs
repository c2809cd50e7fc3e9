//! Parameterized circuits and the two mixed-state ansätze.
//!
//! Every parameterized gate is a half-angle Pauli rotation exp(-iθG/2), so
//! θ = 0 is the identity and the ±π/2 shift rule applies to each angle.
//! Register order for purifications is R ⊗ S (reference first).

use rand::Rng;
use thiserror::Error;

use crate::linalg::{ComplexMatrix, DensityMatrix, LinalgError, C64};
use crate::pauli::{PauliMasks, PauliString};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnsatzError {
    #[error("expected {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("invalid ansatz: {0}")]
    Invalid(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, AnsatzError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Rxx,
    Ryy,
    Rzz,
}

impl GateKind {
    fn label(self) -> u8 {
        match self {
            GateKind::Rx | GateKind::Rxx => 1,
            GateKind::Ry | GateKind::Ryy => 2,
            GateKind::Rz | GateKind::Rzz => 3,
        }
    }

    fn is_two_qubit(self) -> bool {
        matches!(self, GateKind::Rxx | GateKind::Ryy | GateKind::Rzz)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub param: usize,
    masks: PauliMasks,
}

impl Gate {
    fn new(n: usize, kind: GateKind, qubits: Vec<usize>, param: usize) -> Self {
        let mut labels = vec![0u8; n];
        for &q in &qubits {
            labels[q] = kind.label();
        }
        let masks = PauliString::new(labels).expect("valid labels").masks();
        Self { kind, qubits, param, masks }
    }

    /// ψ ← exp(-iθG/2) ψ
    fn apply(&self, theta: f64, psi: &mut [C64]) {
        apply_rotation(&self.masks, theta, psi);
    }
}

/// ψ ← (cos(θ/2) I − i sin(θ/2) G) ψ for a Pauli string G given by masks.
pub fn apply_rotation(m: &PauliMasks, theta: f64, psi: &mut [C64]) {
    let (s, c) = (theta / 2.0).sin_cos();
    let mis = C64::new(0.0, -s);
    if m.flip == 0 {
        for (j, a) in psi.iter_mut().enumerate() {
            *a *= C64::new(c, 0.0) + mis * m.phase_of(j);
        }
        return;
    }
    for j in 0..psi.len() {
        let k = j ^ m.flip;
        if j < k {
            let a = psi[j];
            let b = psi[k];
            psi[j] = a * c + mis * m.phase_of(k) * b;
            psi[k] = b * c + mis * m.phase_of(j) * a;
        }
    }
}

/// A fixed gate layout with one angle per gate.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamCircuit {
    n_qubits: usize,
    layers: usize,
    gates: Vec<Gate>,
}

fn ring_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    if n >= 3 {
        pairs.push((n - 1, 0));
    }
    pairs
}

impl ParamCircuit {
    fn layered(n: usize, layers: usize, single: [GateKind; 2]) -> Self {
        let mut gates = Vec::new();
        let mut p = 0;
        for _ in 0..layers {
            for q in 0..n {
                for kind in single {
                    gates.push(Gate::new(n, kind, vec![q], p));
                    p += 1;
                }
            }
            for (a, b) in ring_pairs(n) {
                gates.push(Gate::new(n, GateKind::Rzz, vec![a, b], p));
                p += 1;
            }
        }
        Self { n_qubits: n, layers, gates }
    }

    /// Each layer: Ry, Rz on every qubit, then Rzz on the ring (i, i+1), (n-1, 0).
    pub fn layered_unitary(n: usize, layers: usize) -> Self {
        Self::layered(n, layers, [GateKind::Ry, GateKind::Rz])
    }

    /// Born machine layer: Rx, Rz on every qubit, then the Rzz ring.
    pub fn qcbm(n: usize, layers: usize) -> Self {
        Self::layered(n, layers, [GateKind::Rx, GateKind::Rz])
    }

    /// Arbitrary gate list; parameter indices must be 0..len in order.
    pub fn from_gates(n: usize, spec: &[(GateKind, Vec<usize>)]) -> Result<Self> {
        let mut gates = Vec::new();
        for (p, (kind, qubits)) in spec.iter().enumerate() {
            let want = if kind.is_two_qubit() { 2 } else { 1 };
            if qubits.len() != want || qubits.iter().any(|&q| q >= n) {
                return Err(AnsatzError::Invalid(format!("gate {kind:?} on {qubits:?}")));
            }
            gates.push(Gate::new(n, *kind, qubits.clone(), p));
        }
        Ok(Self { n_qubits: n, layers: 1, gates })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn n_params(&self) -> usize {
        self.gates.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(AnsatzError::ParamCount { expected: self.n_params(), got: theta.len() });
        }
        Ok(())
    }

    /// ψ ← U(θ) ψ
    pub fn apply(&self, theta: &[f64], psi: &mut [C64]) -> Result<()> {
        self.check(theta)?;
        for g in &self.gates {
            g.apply(theta[g.param], psi);
        }
        Ok(())
    }

    /// U(θ)|0…0>
    pub fn statevector(&self, theta: &[f64]) -> Result<Vec<C64>> {
        let mut psi = basis_state(1 << self.n_qubits, 0);
        self.apply(theta, &mut psi)?;
        Ok(psi)
    }

    pub fn unitary(&self, theta: &[f64]) -> Result<ComplexMatrix> {
        self.check(theta)?;
        let d = 1usize << self.n_qubits;
        let mut u = ComplexMatrix::zeros(d, d);
        for col in 0..d {
            let mut psi = basis_state(d, col);
            self.apply(theta, &mut psi)?;
            for (row, a) in psi.into_iter().enumerate() {
                u[(row, col)] = a;
            }
        }
        Ok(u)
    }
}

fn basis_state(d: usize, k: usize) -> Vec<C64> {
    let mut psi = vec![C64::new(0.0, 0.0); d];
    psi[k] = C64::new(1.0, 0.0);
    psi
}

/// Layered unitary U(θ) built from the default layout.
pub fn build_layered_unitary(n: usize, layers: usize, theta: &[f64]) -> Result<ComplexMatrix> {
    ParamCircuit::layered_unitary(n, layers).unitary(theta)
}

/// p_φ(x) = |<x|U'(φ)|0>|²
pub fn qcbm_distribution(born: &ParamCircuit, phi: &[f64]) -> Result<Vec<f64>> {
    Ok(born.statevector(phi)?.iter().map(|a| a.norm_sqr()).collect())
}

/// Tr_R |ψ><ψ| for ψ on R ⊗ S with dim S = ds.
pub fn reduce_to_system(psi: &[C64], ds: usize) -> ComplexMatrix {
    let dr = psi.len() / ds;
    let mut rho = ComplexMatrix::zeros(ds, ds);
    for r in 0..dr {
        let block = &psi[r * ds..(r + 1) * ds];
        for i in 0..ds {
            let a = block[i];
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..ds {
                rho[(i, j)] += a * block[j].conj();
            }
        }
    }
    rho
}

/// ρ_S(θ) = Tr_R[|ψ(θ)><ψ(θ)|] with |ψ(θ)> = U(θ)|0>_{RS}.
#[derive(Clone, Debug, PartialEq)]
pub struct PurificationAnsatz {
    n_system: usize,
    n_reference: usize,
    circuit: ParamCircuit,
}

impl PurificationAnsatz {
    pub fn new(n_system: usize, n_reference: usize, layers: usize) -> Self {
        Self {
            n_system,
            n_reference,
            circuit: ParamCircuit::layered_unitary(n_system + n_reference, layers),
        }
    }

    pub fn with_circuit(n_system: usize, circuit: ParamCircuit) -> Result<Self> {
        if circuit.n_qubits() < n_system {
            return Err(AnsatzError::Invalid("circuit smaller than system".into()));
        }
        let n_reference = circuit.n_qubits() - n_system;
        Ok(Self { n_system, n_reference, circuit })
    }

    pub fn n_system(&self) -> usize {
        self.n_system
    }

    pub fn n_reference(&self) -> usize {
        self.n_reference
    }

    pub fn circuit(&self) -> &ParamCircuit {
        &self.circuit
    }

    pub fn n_params(&self) -> usize {
        self.circuit.n_params()
    }

    /// Unchecked realization; entries are a valid density matrix up to rounding.
    pub fn realize_matrix(&self, theta: &[f64]) -> Result<ComplexMatrix> {
        let psi = self.circuit.statevector(theta)?;
        Ok(reduce_to_system(&psi, 1 << self.n_system))
    }

    pub fn realize(&self, theta: &[f64]) -> Result<DensityMatrix> {
        Ok(DensityMatrix::new(self.realize_matrix(theta)?)?)
    }
}

/// ρ(φ,γ) = Σ_x p_φ(x) U(γ)|x><x|U(γ)†; parameters are φ followed by γ.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexCombinationAnsatz {
    n: usize,
    born: ParamCircuit,
    basis: ParamCircuit,
}

/// One draw from a convex-combination state: the index x and U(γ)|x>.
#[derive(Clone, Debug, PartialEq)]
pub struct CcSample {
    pub index: usize,
    pub state: Vec<C64>,
}

impl ConvexCombinationAnsatz {
    pub fn new(n: usize, layers: usize, born_layers: usize) -> Self {
        Self {
            n,
            born: ParamCircuit::qcbm(n, born_layers),
            basis: ParamCircuit::layered_unitary(n, layers),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn born_circuit(&self) -> &ParamCircuit {
        &self.born
    }

    pub fn basis_circuit(&self) -> &ParamCircuit {
        &self.basis
    }

    pub fn n_params(&self) -> usize {
        self.born.n_params() + self.basis.n_params()
    }

    pub fn split<'a>(&self, params: &'a [f64]) -> Result<(&'a [f64], &'a [f64])> {
        if params.len() != self.n_params() {
            return Err(AnsatzError::ParamCount { expected: self.n_params(), got: params.len() });
        }
        Ok(params.split_at(self.born.n_params()))
    }

    pub fn distribution(&self, params: &[f64]) -> Result<Vec<f64>> {
        let (phi, _) = self.split(params)?;
        qcbm_distribution(&self.born, phi)
    }

    pub fn basis_unitary(&self, params: &[f64]) -> Result<ComplexMatrix> {
        let (_, gamma) = self.split(params)?;
        self.basis.unitary(gamma)
    }

    pub fn realize_matrix(&self, params: &[f64]) -> Result<ComplexMatrix> {
        let p = self.distribution(params)?;
        let u = self.basis_unitary(params)?;
        Ok(spectral_sum(&p, &u))
    }

    pub fn realize(&self, params: &[f64]) -> Result<DensityMatrix> {
        Ok(DensityMatrix::new(self.realize_matrix(params)?)?)
    }

    /// Draw x ~ p_φ and return U(γ)|x>.
    pub fn sample<R: Rng + ?Sized>(&self, params: &[f64], rng: &mut R) -> Result<CcSample> {
        let p = self.distribution(params)?;
        let index = sample_index(&p, rng);
        let (_, gamma) = self.split(params)?;
        let mut state = basis_state(1 << self.n, index);
        self.basis.apply(gamma, &mut state)?;
        Ok(CcSample { index, state })
    }

    /// (I_R ⊗ U(γ)) (Π_i CNOT_{R_i → S_i}) (U'(φ) ⊗ I_S) |0>_R |0>_S on 2n qubits.
    pub fn purified_state(&self, params: &[f64]) -> Result<Vec<C64>> {
        let (phi, gamma) = self.split(params)?;
        let n = self.n;
        let d = 1usize << n;
        let born_state = self.born.statevector(phi)?;
        // after U' on R and the CNOT fan-out: Σ_x a_x |x>_R |x>_S
        let mut psi = vec![C64::new(0.0, 0.0); d * d];
        for (x, &a) in born_state.iter().enumerate() {
            psi[x * d + x] = a;
        }
        for r in 0..d {
            self.basis.apply(gamma, &mut psi[r * d..(r + 1) * d])?;
        }
        Ok(psi)
    }

    pub fn purification_density(&self, params: &[f64]) -> Result<ComplexMatrix> {
        Ok(reduce_to_system(&self.purified_state(params)?, 1 << self.n))
    }
}

/// Σ_x p(x) u_x u_x† with u_x the columns of u.
pub fn spectral_sum(p: &[f64], u: &ComplexMatrix) -> ComplexMatrix {
    let d = p.len();
    let mut rho = ComplexMatrix::zeros(d, d);
    for (x, &w) in p.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for i in 0..d {
            let a = u[(i, x)] * w;
            for j in 0..d {
                rho[(i, j)] += a * u[(j, x)].conj();
            }
        }
    }
    rho
}

/// Inverse-CDF draw from a probability vector.
pub fn sample_index<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &w) in p.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    p.iter().rposition(|&w| w > 0.0).unwrap_or(p.len() - 1)
}

/// Born-machine distribution as a trainable classical variable.
#[derive(Clone, Debug, PartialEq)]
pub struct BornMachine {
    circuit: ParamCircuit,
}

impl BornMachine {
    pub fn new(n: usize, layers: usize) -> Self {
        Self { circuit: ParamCircuit::qcbm(n, layers) }
    }

    pub fn n_bits(&self) -> usize {
        self.circuit.n_qubits()
    }

    pub fn n_params(&self) -> usize {
        self.circuit.n_params()
    }

    pub fn circuit(&self) -> &ParamCircuit {
        &self.circuit
    }

    pub fn distribution(&self, phi: &[f64]) -> Result<Vec<f64>> {
        qcbm_distribution(&self.circuit, phi)
    }
}

/// What a trainable variable slot holds once realized.
#[derive(Clone, Debug, PartialEq)]
pub enum Realized {
    Density(ComplexMatrix),
    Distribution(Vec<f64>),
}

impl Realized {
    pub fn density(&self) -> &ComplexMatrix {
        match self {
            Realized::Density(m) => m,
            Realized::Distribution(_) => panic!("expected a density matrix"),
        }
    }

    pub fn distribution(&self) -> &[f64] {
        match self {
            Realized::Distribution(p) => p,
            Realized::Density(_) => panic!("expected a distribution"),
        }
    }
}

/// Any of the parameterizations a problem variable can use.
#[derive(Clone, Debug, PartialEq)]
pub enum Ansatz {
    Purification(PurificationAnsatz),
    ConvexCombination(ConvexCombinationAnsatz),
    Born(BornMachine),
}

impl Ansatz {
    pub fn n_params(&self) -> usize {
        match self {
            Ansatz::Purification(a) => a.n_params(),
            Ansatz::ConvexCombination(a) => a.n_params(),
            Ansatz::Born(a) => a.n_params(),
        }
    }

    /// Qubits (or bits) of the realized object.
    pub fn n_system(&self) -> usize {
        match self {
            Ansatz::Purification(a) => a.n_system(),
            Ansatz::ConvexCombination(a) => a.n_qubits(),
            Ansatz::Born(a) => a.n_bits(),
        }
    }

    pub fn is_classical(&self) -> bool {
        matches!(self, Ansatz::Born(_))
    }

    pub fn realize(&self, params: &[f64]) -> Result<Realized> {
        Ok(match self {
            Ansatz::Purification(a) => Realized::Density(a.realize_matrix(params)?),
            Ansatz::ConvexCombination(a) => Realized::Density(a.realize_matrix(params)?),
            Ansatz::Born(a) => Realized::Distribution(a.distribution(params)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig, hs_norm_sq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_angles(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.random::<f64>() * 2.0 * PI).collect()
    }

    #[test]
    fn zero_angles_give_identity() {
        let c = ParamCircuit::layered_unitary(3, 2);
        let u = c.unitary(&vec![0.0; c.n_params()]).unwrap();
        assert!(hs_norm_sq(&(&u - &ComplexMatrix::identity(8))) < 1e-28);
    }

    #[test]
    fn ry_pi_flips() {
        let c = ParamCircuit::from_gates(1, &[(GateKind::Ry, vec![0])]).unwrap();
        let psi = c.statevector(&[PI]).unwrap();
        assert!(psi[0].norm() < 1e-15);
        assert!((psi[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unitarity_and_param_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            let c = ParamCircuit::layered_unitary(n, 2);
            let ring = match n {
                1 => 0,
                2 => 1,
                _ => n,
            };
            assert_eq!(c.n_params(), 2 * (2 * n + ring));
            let u = c.unitary(&random_angles(c.n_params(), &mut rng)).unwrap();
            let g = &u.adjoint() * &u;
            assert!(hs_norm_sq(&(&g - &ComplexMatrix::identity(1 << n))) < 1e-20);
        }
    }

    #[test]
    fn qcbm_distributions() {
        let born = ParamCircuit::qcbm(2, 2);
        let p = qcbm_distribution(&born, &vec![0.0; born.n_params()]).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.0, 0.0]);
        let single = ParamCircuit::from_gates(1, &[(GateKind::Ry, vec![0])]).unwrap();
        let p = qcbm_distribution(&single, &[PI / 2.0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pure_when_no_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = PurificationAnsatz::new(2, 0, 2);
        let rho = a.realize(&random_angles(a.n_params(), &mut rng)).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_bound_with_small_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = PurificationAnsatz::new(2, 1, 2);
        let rho = a.realize(&random_angles(a.n_params(), &mut rng)).unwrap();
        let e = eig(rho.matrix()).unwrap();
        assert!(e.values.iter().filter(|&&x| x > 1e-10).count() <= 2);
    }

    #[test]
    fn cc_spectrum_matches_born_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = ConvexCombinationAnsatz::new(2, 2, 2);
        let params = random_angles(a.n_params(), &mut rng);
        let rho = a.realize(&params).unwrap();
        let mut p = a.distribution(&params).unwrap();
        p.sort_by(f64::total_cmp);
        let e = eig(rho.matrix()).unwrap();
        for (x, y) in e.values.iter().zip(&p) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn cc_purification_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 1..=2 {
            let a = ConvexCombinationAnsatz::new(n, 2, 2);
            let params = random_angles(a.n_params(), &mut rng);
            let direct = a.realize_matrix(&params).unwrap();
            let purified = a.purification_density(&params).unwrap();
            assert!(hs_norm_sq(&(&direct - &purified)).sqrt() < 1e-9);
        }
    }

    #[test]
    fn cc_zero_params_is_ground_state() {
        let a = ConvexCombinationAnsatz::new(2, 2, 2);
        let rho = a.realize_matrix(&vec![0.0; a.n_params()]).unwrap();
        assert!((rho[(0, 0)].re - 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert_eq!(a.sample(&vec![0.0; a.n_params()], &mut rng).unwrap().index, 0);
        }
    }

    #[test]
    fn cc_sample_returns_basis_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = ConvexCombinationAnsatz::new(2, 2, 2);
        let params = random_angles(a.n_params(), &mut rng);
        let u = a.basis_unitary(&params).unwrap();
        let s = a.sample(&params, &mut rng).unwrap();
        for i in 0..4 {
            assert!((s.state[i] - u[(i, s.index)]).norm() < 1e-14);
        }
    }

    #[test]
    fn param_mismatch_is_an_error() {
        let c = ParamCircuit::layered_unitary(2, 1);
        assert!(matches!(c.unitary(&[0.0]), Err(AnsatzError::ParamCount { .. })));
    }
}
