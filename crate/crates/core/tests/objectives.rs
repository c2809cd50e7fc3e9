mod common;

use common::*;
use proptest::prelude::*;
use qslack::ansatz::Realized;
use qslack::estimate::Estimator;
use qslack::linalg::{eig, partial_transpose_b, spectral_map, ComplexMatrix, C64};
use qslack::objective::*;
use qslack::oracle::{exact_negativity, exact_trace_distance};
use qslack::pauli::PauliString;

#[test]
fn expansion_matches_dense_for_every_builder() {
    for n in 1..=2 {
        let mut r = rng(100 + n as u64);
        for p in catalogue(n, &mut r) {
            let gap = expansion_gap(p.as_ref(), 200, &mut r).unwrap();
            assert!(gap < 1e-9, "{} at n = {n}: {gap:e}", p.tag());
        }
    }
}

#[test]
fn catalogue_covers_every_builder() {
    let mut tags: Vec<&str> = catalogue(1, &mut rng(0)).iter().map(|p| p.tag()).collect();
    tags.sort();
    tags.dedup();
    assert_eq!(tags.len(), 15);
}

#[test]
fn trace_distance_against_nalgebra() {
    let mut r = rng(7);
    let (rho, sigma) = (random_density(2, &mut r), random_density(2, &mut r));
    let dual = TraceDistanceDual::new(2, rho.clone(), sigma.clone(), 100.0).unwrap();
    let primal = TraceDistancePrimal::new(2, rho.clone(), sigma.clone(), 10.0).unwrap();
    let mut est = Estimator::exact();
    for _ in 0..50 {
        let (w, t) = (random_density(2, &mut r), random_density(2, &mut r));
        let (l, m) = (2.0 * rand::Rng::random::<f64>(&mut r), 2.0 * rand::Rng::random::<f64>(&mut r));
        let (rn, sn, wn, tn) = (to_na(&rho), to_na(&sigma), to_na(&w), to_na(&t));
        // Dual: λ + c‖λω − ρ + σ − μτ‖².
        let d = &wn * nalgebra::Complex::new(l, 0.0) - &rn + &sn - &tn * nalgebra::Complex::new(m, 0.0);
        let want = l + 100.0 * hs_norm_sq(&d);
        let got = dual.evaluate(&[Realized::Density(w.clone()), Realized::Density(t.clone())], &[l, m], &mut est).unwrap();
        assert!((got.value - want).abs() < 1e-9 * (1.0 + want.abs()));
        // Primal: λTr[τ(ρ − σ)] − c‖I − λτ − μω‖², slots (τ, ω).
        let id = nalgebra::DMatrix::<nalgebra::Complex<f64>>::identity(4, 4);
        let e = &id - &tn * nalgebra::Complex::new(l, 0.0) - &wn * nalgebra::Complex::new(m, 0.0);
        let want = l * (&tn * (&rn - &sn)).trace().re - 10.0 * hs_norm_sq(&e);
        let got = primal.evaluate(&[Realized::Density(t), Realized::Density(w)], &[l, m], &mut est).unwrap();
        assert!((got.value - want).abs() < 1e-9 * (1.0 + want.abs()));
    }
}

/// Positive and negative parts of a Hermitian matrix.
fn jordan(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let e = eig(m).unwrap();
    (spectral_map(&e, |x| x.max(0.0)), spectral_map(&e, |x| (-x).max(0.0)))
}

#[test]
fn trace_distance_dual_certificate_attains_oracle() {
    let mut r = rng(8);
    let (rho, sigma) = (random_density(2, &mut r), random_density(2, &mut r));
    let (pos, neg) = jordan(&(&rho - &sigma));
    let (l, m) = (pos.trace().re, neg.trace().re);
    let p = TraceDistanceDual::new(2, rho.clone(), sigma.clone(), 100.0).unwrap();
    let states = [Realized::Density(pos.scale(1.0 / l)), Realized::Density(neg.scale(1.0 / m))];
    let tb = p.evaluate(&states, &[l, m], &mut Estimator::exact()).unwrap();
    assert!(tb.penalty < 1e-14, "{}", tb.penalty);
    assert!((tb.value - exact_trace_distance(&rho, &sigma).unwrap()).abs() < 1e-10);
}

#[test]
fn negativity_dual_certificate_attains_oracle() {
    let mut r = rng(9);
    let rho = random_pure(2, &mut r);
    let (k, l) = jordan(&partial_transpose_b(&rho, 2, 2).unwrap());
    let p = NegativityDual::new(1, 1, rho.clone(), 100.0).unwrap();
    let coeff = |m: &ComplexMatrix, s: &PauliString| s.trace_with(m).re / 4.0;
    let mut scalars = vec![k.trace().re, l.trace().re];
    scalars.extend(p.basis().iter().map(|s| coeff(&k, s)));
    scalars.extend(p.basis().iter().map(|s| coeff(&l, s)));
    let states = [Realized::Density(k.scale(1.0 / scalars[0])), Realized::Density(l.scale(1.0 / scalars[1]))];
    let tb = p.evaluate(&states, &scalars, &mut Estimator::exact()).unwrap();
    assert!(tb.penalty < 1e-14, "{}", tb.penalty);
    assert!((tb.value - exact_negativity(&rho, 2, 2).unwrap()).abs() < 1e-10);
    assert!(tb.value > 1.0);
}

#[test]
fn cham_dual_certificate() {
    let inst = ConstrainedHamiltonian::two_qubit_example();
    let h = inst.hamiltonian();
    let lmin = eig(&h).unwrap().values[0];
    let mut slack = h.clone();
    slack.axpy(C64::new(-lmin, 0.0), &ComplexMatrix::identity(4));
    let nu = slack.trace().re;
    let p = ChamDual::new(inst, 100.0).unwrap();
    let tb = p.evaluate(&[Realized::Density(slack.scale(1.0 / nu))], &[0.0, 0.0, lmin, nu], &mut Estimator::exact()).unwrap();
    assert!(tb.penalty < 1e-14, "{}", tb.penalty);
    assert!((tb.value - lmin).abs() < 1e-10);
}

#[test]
fn tvd_dual_certificate() {
    let (p, q): (Vec<f64>, Vec<f64>) = (vec![0.4, 0.1, 0.3, 0.2], vec![0.1, 0.2, 0.3, 0.4]);
    let pos: Vec<f64> = p.iter().zip(&q).map(|(a, b)| (a - b).max(0.0)).collect();
    let neg: Vec<f64> = p.iter().zip(&q).map(|(a, b)| (b - a).max(0.0)).collect();
    let (l, m) = (pos.iter().sum::<f64>(), neg.iter().sum::<f64>());
    let obj = TvdDual::new(2, p, q, 100.0).unwrap();
    let states = [
        Realized::Distribution(pos.iter().map(|x| x / l).collect()),
        Realized::Distribution(neg.iter().map(|x| x / m).collect()),
    ];
    let tb = obj.evaluate(&states, &[l, m], &mut Estimator::exact()).unwrap();
    assert!(tb.penalty < 1e-14, "{}", tb.penalty);
    assert!((tb.value - 0.3).abs() < 1e-12);
}

#[test]
fn parameter_shift_matches_differences() {
    let mut r = rng(12);
    for p in catalogue(1, &mut r) {
        let tag = p.tag();
        let obj = wrap(p, 2);
        let d = shift_vs_difference(&obj, &mut r).unwrap();
        assert!(d < 1e-6, "{tag}: {d:e}");
    }
}

#[test]
fn slot_layout_is_checked() {
    let mut r = rng(13);
    let p = TraceDistanceDual::new(1, random_density(1, &mut r), random_density(1, &mut r), 1.0).unwrap();
    let one = qslack::ansatz::Ansatz::Purification(qslack::ansatz::PurificationAnsatz::new(1, 1, 1));
    assert!(PenaltyObjective::new(Box::new(p.clone()), vec![one.clone()]).is_err());
    let born = qslack::ansatz::Ansatz::Born(qslack::ansatz::BornMachine::new(1, 1));
    assert!(PenaltyObjective::new(Box::new(p), vec![one, born]).is_err());
}

#[test]
fn invalid_penalty_rejected() {
    let m = ComplexMatrix::identity(2).scale(0.5);
    assert!(TraceDistanceDual::new(1, m.clone(), m.clone(), 0.0).is_err());
    assert!(TraceDistanceDual::new(1, m.clone(), m, f64::NAN).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn penalties_are_nonnegative(seed in 0u64..10_000, n in 1usize..=2) {
        let mut r = rng(seed);
        let mut est = Estimator::exact();
        for p in catalogue(n, &mut r) {
            let states: Vec<Realized> = p.slots().iter().map(|s| match s.kind {
                SlotKind::Quantum => Realized::Density(random_density(s.n, &mut r)),
                SlotKind::Classical => Realized::Distribution(random_dist(s.n, &mut r)),
            }).collect();
            let scalars: Vec<f64> = p.scalars().iter().map(|s| s.init + 0.5).collect();
            // The barrier term of the interior-point objective has no sign.
            if p.tag() == "cham_interior_point" {
                continue;
            }
            if let Ok(tb) = p.evaluate(&states, &scalars, &mut est) {
                prop_assert!(tb.penalty >= -1e-9, "{}: {}", p.tag(), tb.penalty);
            }
        }
    }

    #[test]
    fn objective_linear_in_penalty_weight(seed in 0u64..10_000) {
        // value(c) is affine in c with slope ∓penalty.
        let mut r = rng(seed);
        let (rho, sigma) = (random_density(1, &mut r), random_density(1, &mut r));
        let states = [Realized::Density(random_density(1, &mut r)), Realized::Density(random_density(1, &mut r))];
        let mut est = Estimator::exact();
        let a = TraceDistanceDual::new(1, rho.clone(), sigma.clone(), 1.0).unwrap().evaluate(&states, &[0.7, 0.4], &mut est).unwrap();
        let b = TraceDistanceDual::new(1, rho, sigma, 3.0).unwrap().evaluate(&states, &[0.7, 0.4], &mut est).unwrap();
        prop_assert!((b.value - a.value - 2.0 * a.penalty).abs() < 1e-10);
    }
}
