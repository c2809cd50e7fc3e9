//! Independent reference computations built on nalgebra.
#![allow(dead_code)]

use nalgebra::{Complex, DMatrix};
use qslack::linalg::{ComplexMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type NaMatrix = DMatrix<Complex<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_na(m: &ComplexMatrix) -> NaMatrix {
    NaMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        let z = m[(i, j)];
        Complex::new(z.re, z.im)
    })
}

pub fn from_na(m: &NaMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| C64::new(m[(i, j)].re, m[(i, j)].im))
}

pub fn eigenvalues(m: &NaMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub fn trace_norm(m: &NaMatrix) -> f64 {
    eigenvalues(m).iter().map(|x| x.abs()).sum()
}

pub fn psd_sqrt(m: &NaMatrix) -> NaMatrix {
    let e = m.clone().symmetric_eigen();
    let d = NaMatrix::from_diagonal(&e.eigenvalues.map(|x| Complex::new(x.max(0.0).sqrt(), 0.0)));
    &e.eigenvectors * d * e.eigenvectors.adjoint()
}

/// Tr sqrt(sqrt(rho) sigma sqrt(rho)).
pub fn root_fidelity(rho: &NaMatrix, sigma: &NaMatrix) -> f64 {
    let s = psd_sqrt(rho);
    let inner = &s * sigma * &s;
    let inner = (&inner + inner.adjoint()).scale(0.5);
    eigenvalues(&inner).iter().map(|x| x.max(0.0).sqrt()).sum()
}

/// Transpose on the second tensor factor, by explicit index shuffling.
pub fn partial_transpose(m: &NaMatrix, da: usize, db: usize) -> NaMatrix {
    NaMatrix::from_fn(da * db, da * db, |r, c| {
        let (a, b) = (r / db, r % db);
        let (a2, b2) = (c / db, c % db);
        m[(a * db + b2, a2 * db + b)]
    })
}

pub fn negativity(m: &NaMatrix, da: usize, db: usize) -> f64 {
    trace_norm(&partial_transpose(m, da, db))
}

pub fn random_density_na(dim: usize, rank: usize, r: &mut impl Rng) -> NaMatrix {
    let g = NaMatrix::from_fn(dim, rank, |_, _| Complex::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5));
    let m = &g * g.adjoint();
    let t = m.trace().re;
    m.scale(1.0 / t)
}

pub fn random_density(n: usize, r: &mut impl Rng) -> ComplexMatrix {
    let d = 1 << n;
    from_na(&random_density_na(d, d, r))
}

pub fn random_pure(n: usize, r: &mut impl Rng) -> ComplexMatrix {
    from_na(&random_density_na(1 << n, 1, r))
}

pub fn random_dist(n: usize, r: &mut impl Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..1 << n).map(|_| r.random::<f64>()).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

pub fn hs_norm_sq(m: &NaMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Outcome of one unbiasedness / calibration check.
pub struct StatCheck {
    pub name: String,
    pub exact: f64,
    pub mean: f64,
    pub pooled_se: f64,
    pub empirical_std: f64,
    pub predicted_std: f64,
}

impl StatCheck {
    pub fn unbiased(&self) -> bool {
        (self.mean - self.exact).abs() <= 3.0 * self.pooled_se
    }

    pub fn calibrated(&self) -> bool {
        (self.empirical_std - self.predicted_std).abs() <= 0.1 * self.predicted_std
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: exact {:.5}, mean {:.5} (3se {:.1e}), std {:.3e} vs {:.3e}",
            self.name,
            self.exact,
            self.mean,
            3.0 * self.pooled_se,
            self.empirical_std,
            self.predicted_std
        )
    }
}

fn stat_check(name: &str, exact: f64, predicted_std: f64, draws: &[f64]) -> StatCheck {
    let k = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / k;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    StatCheck {
        name: name.into(),
        exact,
        mean,
        pooled_se: predicted_std / k.sqrt(),
        empirical_std: var.sqrt(),
        predicted_std,
    }
}

/// Shot-mode estimators at N shots over `emulations` repetitions.
pub fn estimator_statistics(shots: u64, emulations: usize) -> Vec<StatCheck> {
    use qslack::ansatz::ConvexCombinationAnsatz;
    use qslack::estimate::{estimate_overlap_loschmidt, Estimator, OverlapPartner, ShotModel};
    use qslack::pauli::{PauliString, WalshString};

    let mut r = rng(11);
    let rho = random_density(2, &mut r);
    let sigma = random_density(2, &mut r);
    let zz = PauliString::new(vec![3, 3]).unwrap();
    let xy = PauliString::new(vec![1, 2]).unwrap();
    let p = random_dist(2, &mut r);
    let q = random_dist(2, &mut r);
    let w = WalshString::from_index(2, 3);
    let cc = ConvexCombinationAnsatz::new(2, 2, 1);
    let theta: Vec<f64> = (0..cc.n_params()).map(|_| r.random::<f64>() * std::f64::consts::TAU).collect();

    let mut est = Estimator::new(ShotModel::Shots { n: shots, seed: 5 });
    let nf = shots as f64;
    let pm = |m: f64| ((1.0 - m * m) / nf).sqrt();
    let bern = |p: f64| (p * (1.0 - p) / nf).sqrt();

    let mut out = Vec::new();
    let m = zz.trace_with(&rho).re;
    let d: Vec<f64> = (0..emulations).map(|_| est.pauli(&rho, &zz).unwrap().value).collect();
    out.push(stat_check("pauli ZZ", m, pm(m), &d));
    let m = xy.trace_with(&rho).re;
    let d: Vec<f64> = (0..emulations).map(|_| est.pauli(&rho, &xy).unwrap().value).collect();
    out.push(stat_check("pauli XY", m, pm(m), &d));
    let m = (&rho * &sigma).trace().re;
    let d: Vec<f64> = (0..emulations).map(|_| est.overlap(&rho, &sigma).unwrap().value).collect();
    out.push(stat_check("swap-test overlap", m, pm(m), &d));
    let m: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
    let d: Vec<f64> = (0..emulations).map(|_| est.collision(&p, &q).unwrap().value).collect();
    out.push(stat_check("collision", m, bern(m), &d));
    let m = w.dot(&p).unwrap();
    let d: Vec<f64> = (0..emulations).map(|_| est.walsh(&p, &w).unwrap().value).collect();
    out.push(stat_check("walsh", m, pm(m), &d));
    let m = (&cc.realize_matrix(&theta).unwrap() * &sigma).trace().re;
    let d: Vec<f64> = (0..emulations)
        .map(|_| estimate_overlap_loschmidt(&cc, &theta, OverlapPartner::Density(&sigma), &mut est).unwrap().value)
        .collect();
    out.push(stat_check("loschmidt overlap", m, bern(m), &d));
    out
}

pub fn random_coeffs(m: usize, r: &mut impl Rng) -> Vec<f64> {
    (0..m).map(|_| 2.0 * r.random::<f64>() - 1.0).collect()
}

/// Every objective builder on random inputs at `n` qubits or bits.
pub fn catalogue(n: usize, r: &mut ChaCha8Rng) -> Vec<Box<dyn qslack::objective::Problem>> {
    use qslack::objective::*;
    use qslack::pauli::{PauliObservable, PauliString, WalshObservable, WalshString};

    let (rho, sigma) = (random_density(n, r), random_density(n, r));
    let (p, q) = (random_dist(n, r), random_dist(n, r));
    let (na, nb) = (n / 2, n - n / 2);

    let pauli_obs = |r: &mut ChaCha8Rng| PauliObservable::from_dense_real(n, &random_coeffs(1 << (2 * n), r)).unwrap();
    let mut h = pauli_obs(r);
    h.add(PauliString::identity(n), qslack::linalg::C64::new(0.0, 0.0)).unwrap();
    let qinst = ConstrainedHamiltonian::new(&h, &[(pauli_obs(r), -0.3), (pauli_obs(r), -0.5)]).unwrap();

    let walsh_obs = |r: &mut ChaCha8Rng| {
        let mut o = WalshObservable::new(n);
        for (k, c) in random_coeffs(1 << n, r).into_iter().enumerate() {
            o.add(WalshString::from_index(n, k), c).unwrap();
        }
        o
    };
    let cinst = ClassicalInstance::new(&walsh_obs(r), &[(walsh_obs(r), -0.2), (walsh_obs(r), 0.1)]).unwrap();

    let basis = |states: bool, r: &mut ChaCha8Rng| {
        if states {
            OperatorBasis::states(n, (0..3).map(|_| random_density(n, r)).collect()).unwrap()
        } else {
            OperatorBasis::pauli(n, PauliString::all(n).into_iter().skip(1).take(3).collect()).unwrap()
        }
    };
    let a = OperatorExpansion::new(basis(true, r), random_coeffs(3, r)).unwrap();
    let b = OperatorExpansion::new(basis(false, r), random_coeffs(3, r)).unwrap();
    let table = (0..3).map(|_| random_coeffs(3, r)).collect();
    let phi = SuperOperator::new(basis(false, r), basis(true, r), table).unwrap();
    let sdp = SdpInstance::new(a, b, phi).unwrap();

    vec![
        Box::new(TraceDistancePrimal::new(n, rho.clone(), sigma.clone(), 10.0).unwrap()),
        Box::new(TraceDistanceDual::new(n, rho.clone(), sigma.clone(), 100.0).unwrap()),
        Box::new(FidelityPrimal::new(n, rho.clone(), sigma.clone(), 45.0).unwrap()),
        Box::new(FidelityDual::new(n, rho.clone(), sigma.clone(), 5.0).unwrap()),
        Box::new(NegativityPrimal::new(na, nb, rho.clone(), 5.0).unwrap()),
        Box::new(NegativityDual::new(na, nb, rho.clone(), 100.0).unwrap()),
        Box::new(GenericPrimal::new(sdp.clone(), 7.0).unwrap()),
        Box::new(GenericDual::new(sdp, 7.0).unwrap()),
        Box::new(ChamPrimal::new(qinst.clone(), 100.0).unwrap()),
        Box::new(ChamDual::new(qinst.clone(), 100.0).unwrap()),
        Box::new(ChamInteriorPoint::new(qinst, 0.01).unwrap()),
        Box::new(TvdPrimal::new(n, p.clone(), q.clone(), 10.0).unwrap()),
        Box::new(TvdDual::new(n, p, q, 100.0).unwrap()),
        Box::new(ClassicalChamPrimal::new(cinst.clone(), 10.0).unwrap()),
        Box::new(ClassicalChamDual::new(cinst, 10.0).unwrap()),
    ]
}

/// Largest |expansion − dense| / (1 + |dense|) over random states and scalars.
/// Draws where a barrier objective is undefined are skipped.
pub fn expansion_gap(p: &dyn qslack::objective::Problem, draws: usize, r: &mut ChaCha8Rng) -> Result<f64, String> {
    use qslack::ansatz::Realized;
    use qslack::estimate::Estimator;
    use qslack::objective::{ObjectiveError, SlotKind};

    let mut worst = 0.0f64;
    let mut est = Estimator::exact();
    for _ in 0..draws {
        let states: Vec<Realized> = p
            .slots()
            .iter()
            .map(|s| match s.kind {
                SlotKind::Quantum => Realized::Density(random_density(s.n, r)),
                SlotKind::Classical => Realized::Distribution(random_dist(s.n, r)),
            })
            .collect();
        let scalars: Vec<f64> =
            p.scalars().iter().map(|s| if s.nonneg { 3.0 * r.random::<f64>() } else { 4.0 * r.random::<f64>() - 2.0 }).collect();
        match (p.evaluate(&states, &scalars, &mut est), p.dense(&states, &scalars)) {
            (Ok(a), Ok(b)) => worst = worst.max((a.value - b).abs() / (1.0 + b.abs())),
            (Err(ObjectiveError::Infeasible(_)), _) => {}
            (a, b) => return Err(format!("{}: {:?} / {:?}", p.tag(), a.map(|t| t.value), b)),
        }
    }
    Ok(worst)
}

/// A penalty objective over purification (or Born) ansätze for `p`.
pub fn wrap(p: Box<dyn qslack::objective::Problem>, layers: usize) -> qslack::objective::PenaltyObjective {
    use qslack::ansatz::{Ansatz, BornMachine, PurificationAnsatz};
    use qslack::objective::SlotKind;
    let ansatze = p
        .slots()
        .iter()
        .map(|s| match s.kind {
            SlotKind::Quantum => Ansatz::Purification(PurificationAnsatz::new(s.n, s.n, layers)),
            SlotKind::Classical => Ansatz::Born(BornMachine::new(s.n, layers)),
        })
        .collect();
    qslack::objective::PenaltyObjective::new(p, ansatze).unwrap()
}

/// Largest |parameter shift − central difference (h = 1e-5)| over all
/// parameters, at a random point where the objective is defined.
pub fn shift_vs_difference(obj: &qslack::objective::PenaltyObjective, r: &mut ChaCha8Rng) -> Result<f64, String> {
    use qslack::estimate::Estimator;
    use qslack::optimizer::parameter_shift_full;
    let mut est = Estimator::exact();
    for _ in 0..200 {
        let mut x = obj.init_params(r);
        for v in &mut x[obj.scalar_range()] {
            *v += r.random::<f64>();
        }
        if obj.value(&x, &mut est).is_err() {
            continue;
        }
        let g = parameter_shift_full(obj, &x).map_err(|e| e.to_string())?;
        let h = 1e-5;
        let mut worst = 0.0f64;
        for k in 0..x.len() {
            let (mut a, mut b) = (x.clone(), x.clone());
            a[k] += h;
            b[k] -= h;
            let fd = (obj.value(&a, &mut est).map_err(|e| e.to_string())?
                - obj.value(&b, &mut est).map_err(|e| e.to_string())?)
                / (2.0 * h);
            worst = worst.max((g[k] - fd).abs());
        }
        return Ok(worst);
    }
    Err(format!("{}: no point in the domain", obj.problem().tag()))
}

/// Largest deviation of the mean SPSA estimate of ∇‖θ‖² from 2θ.
pub fn spsa_mean_error(samples: usize, seed: u64) -> f64 {
    let theta = [0.1, -0.05, 0.08];
    let mut r = rng(seed);
    let mut mean = [0.0; 3];
    for _ in 0..samples {
        let g = qslack::optimizer::spsa_gradient(
            |t: &[f64]| Ok::<f64, ()>(t.iter().map(|x| x * x).sum()),
            &theta,
            0.01,
            &mut r,
        )
        .unwrap();
        for k in 0..3 {
            mean[k] += g[k] / samples as f64;
        }
    }
    (0..3).map(|k| (mean[k] - 2.0 * theta[k]).abs()).fold(0.0, f64::max)
}

pub struct Golden {
    pub name: String,
    pub got: f64,
    pub want: f64,
    pub tol: f64,
}

impl Golden {
    pub fn ok(&self) -> bool {
        (self.got - self.want).abs() <= self.tol
    }

    pub fn summary(&self) -> String {
        format!("{}: got {}, want {} ± {}", self.name, self.got, self.want, self.tol)
    }
}

/// Every row of the golden fixture next to the value computed now.
pub fn golden_checks() -> Vec<Golden> {
    use qslack::estimate::hoeffding_shots;
    use qslack::objective::{ClassicalInstance, ConstrainedHamiltonian};
    use qslack::oracle::*;
    use qslack::pauli::PauliObservable;

    let zero = ComplexMatrix::diag(&[1.0, 0.0]);
    let plus = ComplexMatrix::from_fn(2, 2, |_, _| C64::new(0.5, 0.0));
    let bell =
        ComplexMatrix::from_fn(4, 4, |i, j| C64::new(if (i == 0 || i == 3) && (j == 0 || j == 3) { 0.5 } else { 0.0 }, 0.0));
    let inst = ConstrainedHamiltonian::two_qubit_example();
    let a: Vec<ComplexMatrix> = (0..inst.n_constraints()).map(|i| inst.constraint(i)).collect();
    let h = PauliObservable::from_real_terms(2, [("ZZ", 1.0), ("XI", 1.0), ("IX", 1.0)]).unwrap();
    let free = ConstrainedHamiltonian::new(&h, &[]).unwrap();
    let c = ClassicalInstance::two_bit_example();
    let ca: Vec<Vec<f64>> = (0..c.n_constraints()).map(|i| c.constraint_vector(i)).collect();
    let nan = |r: std::result::Result<f64, OracleError>| r.unwrap_or(f64::NAN);

    let computed: Vec<(&str, f64)> = vec![
        ("trace_distance_zero_plus", nan(exact_trace_distance(&zero, &plus))),
        ("root_fidelity_mixed_zero", nan(exact_root_fidelity(&ComplexMatrix::identity(2).scale(0.5), &zero))),
        ("negativity_bell", nan(exact_negativity(&bell, 2, 2))),
        ("negativity_separable_mixture", nan(exact_negativity(&ComplexMatrix::diag(&[0.5, 0.0, 0.0, 0.5]), 2, 2))),
        ("cham_two_qubit", nan(sdp_cham_value(&inst.hamiltonian(), &a, inst.bounds()).map(|r| r.value))),
        ("cham_unconstrained", nan(sdp_cham_value(&free.hamiltonian(), &[], &[]).map(|r| r.value))),
        ("classical_cham_two_bit", nan(lp_classical_cham_value(&c.h_vector(), &ca, c.bounds()).map(|r| r.value))),
        ("classical_cham_two_bit", nan(lp_vertex_enumeration(&c.h_vector(), &ca, c.bounds()))),
        ("tvd_biased_coin", nan(exact_tvd(&[0.7, 0.3], &[0.5, 0.5]))),
        ("hoeffding_shots_0.1_0.05", hoeffding_shots(0.1, 0.05).map(|n| n as f64).unwrap_or(f64::NAN)),
    ];
    let table: std::collections::HashMap<&str, (f64, f64)> = include_str!("../fixtures/golden.csv")
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0], (f[1].parse().unwrap(), f[2].parse().unwrap()))
        })
        .collect();
    computed
        .into_iter()
        .map(|(name, got)| {
            let (want, tol) = table[name];
            Golden { name: name.into(), got, want, tol }
        })
        .collect()
}
