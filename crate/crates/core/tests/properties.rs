use ncjoin_core::algebra::{commutant, pauli, random_multimatrix, MatrixAlgebra};
use ncjoin_core::gns_modular::{modular_report, standard_form};
use ncjoin_core::joining::{
    check_intertwining, gns_of_functional, invariance_residual, product_joining, verify_joining,
    verify_joining_with_tol,
};
use ncjoin_core::mirror::{is_product, mirror_joining, mirror_system};
use ncjoin_core::numerics::random::{random_density, random_hermitian};
use ncjoin_core::numerics::{hermitian_eig, project_psd, CMatrix};
use ncjoin_core::solver::{
    build_problem, ergodic_average, find_joining, verify_found, AveragingSchedule, SearchOptions,
};
use ncjoin_core::system::{
    fixed_point_factor, identity_system, is_ergodic, DynamicalSystem, FiniteGroup, GroupAction, QState,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn blocks() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((1usize..=2, 1usize..=2), 1..=3).prop_filter("d <= 6", |b| {
        b.iter().map(|&(n, m)| n * m).sum::<usize>() <= 6
    })
}

fn random_system(blocks: &[(usize, usize)], seed: u64) -> DynamicalSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_multimatrix(blocks, &mut rng).unwrap();
    let rho = random_density(a.hilbert_dim(), &mut rng);
    identity_system(a, QState::new(rho).unwrap()).unwrap()
}

fn pauli_twirl() -> DynamicalSystem {
    let a = MatrixAlgebra::full(2);
    let (x, _, z) = pauli();
    let act = GroupAction::finite_from_unitaries(FiniteGroup::klein_four(), &a, &[(1, x), (2, z)]).unwrap();
    DynamicalSystem::new(a, QState::maximally_mixed(2), act).unwrap()
}

fn classical(probs: &[f64]) -> DynamicalSystem {
    identity_system(MatrixAlgebra::diagonal(probs.len()), QState::new(CMatrix::diag_real(probs)).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eig_reconstructs(n in 1usize..=10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(n, &mut rng);
        let eig = hermitian_eig(&h).unwrap();
        prop_assert!(eig.reconstruct().max_abs_diff(&h) <= 1e-10);
    }

    #[test]
    fn psd_projection_is_idempotent(n in 1usize..=8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(n, &mut rng);
        let p = project_psd(&h).unwrap();
        prop_assert!(project_psd(&p).unwrap().max_abs_diff(&p) <= 1e-9);
        prop_assert!(hermitian_eig(&p).unwrap().min() >= -1e-12);
    }

    #[test]
    fn bicommutant_recovers_algebra(b in blocks(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_multimatrix(&b, &mut rng).unwrap();
        prop_assert_eq!(a.dim(), b.iter().map(|&(n, _)| n * n).sum::<usize>());
        let bicomm = commutant(&commutant(&a).unwrap()).unwrap();
        prop_assert!(bicomm.span_distance(&a) <= 1e-8);
    }

    #[test]
    fn tomita_on_random_systems(b in blocks(), seed in any::<u64>()) {
        let sys = random_system(&b, seed);
        let (g, m) = standard_form(&sys).unwrap();
        let report = modular_report(&g, &m, &sys.action, 1e-8);
        prop_assert!(report.passed(), "{}", report);
    }

    #[test]
    fn product_joining_is_a_joining(b1 in blocks(), b2 in blocks(), seed in any::<u64>()) {
        let a = random_system(&b1, seed);
        let b = random_system(&b2, seed.wrapping_add(1));
        let w = product_joining(&a, &b).unwrap();
        prop_assert!(verify_joining(&w, &a, &b).passed());
        let ce = gns_of_functional(&w, &a, &b).unwrap();
        prop_assert!(check_intertwining(&ce));
    }

    #[test]
    fn mirror_joining_is_product_iff_factor_trivial(b in blocks(), seed in any::<u64>()) {
        let sys = random_system(&b, seed);
        let f = fixed_point_factor(&sys).unwrap();
        let md = mirror_system(&sys, &f).unwrap();
        let w = mirror_joining(&sys, &md).unwrap();
        prop_assert!(verify_joining_with_tol(&w, &sys, &md.b_sys, 1e-9).passed());
        prop_assert_eq!(is_product(&w, &sys, &md.b_sys), f.source.algebra.dim() == 1);
    }

    #[test]
    fn finite_group_average_is_invariant(seed in any::<u64>()) {
        let sys = pauli_twirl();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = ncjoin_core::numerics::random::random_matrix(2, 2, &mut rng);
        let sched = AveragingSchedule::for_group(sys.action.group(), 2);
        let e = &ergodic_average(&sys, &a, &sched).unwrap()[0];
        let mean = e + &CMatrix::identity(2).scale(sys.state.eval(&a));
        for g in 0..4 {
            let moved = GroupAction::apply(&sys.algebra, sys.action.element_map(g).unwrap(), &mean);
            prop_assert!(moved.max_abs_diff(&mean) <= 1e-9);
        }
        prop_assert!(e.frobenius_norm() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn found_joinings_verify(p in 0.2f64..0.8, q in 0.2f64..0.8, seed in any::<u64>()) {
        let a = classical(&[p, 1.0 - p]);
        let b = classical(&[q, 1.0 - q]);
        let problem = build_problem(&a, &b).unwrap();
        let opts = SearchOptions { seed, ..SearchOptions::default() };
        let out = find_joining(&problem, &opts).unwrap();
        let w = out.joining().expect("couplings exist");
        prop_assert!(verify_found(&problem, w, 1e-7).passed());
    }

    #[test]
    fn ergodic_against_identity_is_product(probs in prop::collection::vec(0.1f64..1.0, 2..=3), seed in any::<u64>()) {
        let total: f64 = probs.iter().sum();
        let probs: Vec<f64> = probs.iter().map(|x| x / total).collect();
        let a = pauli_twirl();
        prop_assert!(is_ergodic(&a).unwrap());
        let b = classical(&probs);
        let problem = build_problem(&a, &b).unwrap();
        let opts = SearchOptions { seed, ..SearchOptions::default() };
        let w = find_joining(&problem, &opts).unwrap().joining().cloned().expect("product is feasible");
        prop_assert!(w.product_deviation(&a, &b).0 <= 1e-6);
        prop_assert!(invariance_residual(&w, &a, &b).unwrap() <= 1e-8);
    }
}
