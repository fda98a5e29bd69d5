use proptest::prelude::*;

use pt_anneal::dynamics::{evolve_driven_with, evolve_static, linspace, ModelHandle, OdeOptions, Schedule};
use pt_anneal::effective::{effective_params, initial_down_state};
use pt_anneal::lzs::{lzs_probability, probability_from_exponent};
use pt_anneal::model::{build_hamiltonian, hamiltonian_parts, pt_transform, ChainParams};
use pt_anneal::operator::StateVector;
use pt_anneal::spectrum::{classify_phase, eigenvalues, phase_tolerance, secular_residual, TAU_CONJ};

fn params() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.0..1.5f64, 0.0..0.6f64, 0.2..2.0f64, 0.0..=1.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hamiltonian_is_pt_invariant((eps, gamma, g, s) in params()) {
        let p = ChainParams::two_qubit(eps, gamma, g).unwrap();
        let h = build_hamiltonian(&p, s);
        prop_assert!(pt_transform(&h, 2).unwrap().max_abs_diff(&h) < 1e-14);
    }

    #[test]
    fn hamiltonian_is_affine_in_s((eps, gamma, g, s) in params()) {
        let p = ChainParams::two_qubit(eps, gamma, g).unwrap();
        let parts = hamiltonian_parts(&p);
        prop_assert!(parts.at(s).max_abs_diff(&build_hamiltonian(&p, s)) < 1e-14);
        let mid = build_hamiltonian(&p, 0.5 * s);
        let avg = build_hamiltonian(&p, 0.0).scale(0.5.into()).into_matrix() + build_hamiltonian(&p, s).scale(0.5.into()).into_matrix();
        prop_assert!((mid.into_matrix() - avg).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn spectrum_sums_to_trace_and_closes_under_conjugation((eps, gamma, g, s) in params()) {
        let p = ChainParams::two_qubit(eps, gamma, g).unwrap();
        let h = build_hamiltonian(&p, s);
        let eigs = eigenvalues(&h).unwrap();
        let sum: pt_anneal::operator::C64 = eigs.iter().sum();
        prop_assert!((sum - h.trace()).norm() < 1e-10);
        let tol = phase_tolerance(&eigs).max(TAU_CONJ);
        for e in &eigs {
            prop_assert!(eigs.iter().any(|f| (f - e.conj()).norm() <= tol * e.norm().max(1.0)));
            prop_assert!(secular_residual(&p, s, *e).unwrap() < 1e-10);
        }
        prop_assert!(classify_phase(&eigs, phase_tolerance(&eigs)).is_ok());
    }

    #[test]
    fn lzs_probability_decreases_with_speed(eps in 0.0..0.95f64, gamma in 0.01..0.3f64, k in 1e-3..0.1f64) {
        let eff = effective_params(&ChainParams::two_qubit(eps, gamma, 1.0).unwrap()).unwrap();
        let slow = lzs_probability(&eff, k).unwrap();
        let fast = lzs_probability(&eff, 2.0 * k).unwrap();
        prop_assert!(fast.p_ground <= slow.p_ground);
        prop_assert!((0.0..=0.5).contains(&slow.p_ground));
    }

    #[test]
    fn lzs_probability_is_monotone_in_exponent(x in 0.0..800.0f64, dx in 0.0..5.0f64) {
        prop_assert!(probability_from_exponent(x + dx) >= probability_from_exponent(x));
        prop_assert!(probability_from_exponent(x) <= 0.5);
    }

    #[test]
    fn populations_sum_to_one((eps, gamma, g, s) in params(), t in 0.1..30.0f64) {
        let p = ChainParams::two_qubit(eps, gamma, g).unwrap();
        let h = build_hamiltonian(&p, s);
        let psi0 = StateVector::basis(4, 0);
        let traj = evolve_static(&h, &psi0, &[0.0, t]).unwrap();
        for sample in &traj.samples {
            prop_assert!((sample.populations.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!((sample.raw_norm - sample.state.raw_norm() * 2f64.powi(sample.log2_scale as i32)).abs() <= 1e-12 * sample.raw_norm);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hermitian_driven_evolution_conserves_norm(eps in 0.0..0.9f64, g in 0.5..1.5f64, k in 0.005..0.05f64) {
        let p = ChainParams::two_qubit(eps, 0.0, g).unwrap();
        let model = ModelHandle::Full(p);
        let psi0 = model.initial_state();
        let traj = evolve_driven_with(&model, Schedule::Linear { k }, &psi0, &linspace(0.0, 1.0, 11), &OdeOptions::default()).unwrap();
        for sample in &traj.samples {
            prop_assert!((sample.raw_norm - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn step_halving_leaves_final_populations_unchanged() {
    let eff = effective_params(&ChainParams::two_qubit(0.0, 0.1, 1.0).unwrap()).unwrap();
    let model = ModelHandle::Effective(eff);
    let psi0 = initial_down_state();
    let (lo, hi) = model.natural_range();
    let run = |opts: OdeOptions| {
        evolve_driven_with(&model, Schedule::Linear { k: 0.02 }, &psi0, &[lo, hi], &opts).unwrap().last().unwrap().populations.clone()
    };
    // The integrator is fifth order, so a 32-fold tighter tolerance halves its steps.
    let base = OdeOptions::default();
    let coarse = run(base);
    let fine = run(OdeOptions { rtol: base.rtol / 32.0, atol: base.atol / 32.0, ..base });
    for (a, b) in coarse.iter().zip(&fine) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn static_step_halving_matches() {
    let p = ChainParams::two_qubit(0.3, 0.1, 1.0).unwrap();
    let h = build_hamiltonian(&p, 0.45);
    let psi0 = StateVector::basis(4, 1);
    let coarse = evolve_static(&h, &psi0, &linspace(0.0, 50.0, 51)).unwrap();
    let fine = evolve_static(&h, &psi0, &linspace(0.0, 50.0, 101)).unwrap();
    for (a, b) in coarse.last().unwrap().populations.iter().zip(&fine.last().unwrap().populations) {
        assert!((a - b).abs() < 1e-6);
    }
}
