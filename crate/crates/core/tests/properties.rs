use proptest::prelude::*;

use pmi_core::bounds::{best_upper_bound, enumerate_partitions, lower_bound, DEFAULT_ALPHAS};
use pmi_core::clifford::CliffordEncoding;
use pmi_core::ensemble::DEFAULT_MAX_VECTORS;
use pmi_core::linalg::{c, CMatrix, EIGEN_TOL};
use pmi_core::oracles::{qubit_grid_search, Mode};
use pmi_core::random;
use pmi_core::sdp::PovmKey;
use pmi_core::{solve_pmi, solve_standard, AnswerVector, HermitianOperator, SolverOptions};

fn cheap() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

fn solver() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), d in 1usize..7) {
        let a = random::hermitian(d, &mut random::rng(seed));
        let e = a.eig().unwrap();
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let back = e.map_values(|x| x);
        prop_assert!(back.distance(&a) <= 1e-10 * (1.0 + a.frobenius_norm()));
        let unitary = e.vectors.adjoint() * &e.vectors - CMatrix::identity(d, d);
        prop_assert!(unitary.norm() <= 1e-10);
    }

    #[test]
    fn fractional_powers_invert(seed in any::<u64>(), d in 1usize..6, p in 1.1f64..8.0) {
        let rho = random::density(d, d, &mut random::rng(seed));
        // root first: the other order loses small eigenvalues to roundoff
        let there = rho.frac_power(1.0 / p, EIGEN_TOL).unwrap();
        let back = there.frac_power(p, EIGEN_TOL).unwrap();
        prop_assert!(back.distance(&rho) <= 1e-8);
    }

    #[test]
    fn hilbert_schmidt_is_symmetric(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = random::rng(seed);
        let (a, b) = (random::hermitian(d, &mut rng), random::hermitian(d, &mut rng));
        let (ab, ba) = (a.hs_inner(&b).unwrap(), b.hs_inner(&a).unwrap());
        prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab.abs()));
    }

    #[test]
    fn weighted_states_have_the_right_trace(seed in any::<u64>(), d in 1usize..4, n in 1usize..4, l in 1usize..4) {
        let e = random::ensemble(d, n, l, seed % 2 == 0, &mut random::rng(seed));
        for v in e.answer_vectors() {
            let expected: f64 = v.entries().iter().enumerate().map(|(b, &x)| e.prob(x, b)).sum();
            prop_assert!((e.tau(&v).unwrap().trace() - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn relabeling_twice_is_the_identity(seed in any::<u64>(), l in 1usize..5) {
        let mut rng = random::rng(seed);
        let e = random::ensemble(2, 2, l, true, &mut rng);
        let v = AnswerVector((0..l).map(|b| ((seed >> b) & 1) as usize).collect());
        let twice = e.relabel(&v).unwrap().relabel(&v).unwrap();
        for x in 0..2 {
            for b in 0..l {
                prop_assert_eq!(twice.state(x, b), e.state(x, b));
                prop_assert_eq!(twice.prob(x, b), e.prob(x, b));
            }
        }
    }

    #[test]
    fn answer_vectors_are_ranked_lexicographically(n in 1usize..5, l in 1usize..5) {
        for (i, v) in AnswerVector::enumerate(n, l).enumerate() {
            prop_assert_eq!(v.rank(n), i);
        }
    }

    #[test]
    fn partitions_tile_the_answer_vectors(n in 1usize..5, l in 1usize..4) {
        let ps = enumerate_partitions(n, l, DEFAULT_MAX_VECTORS).unwrap();
        let mut seen = vec![false; n.pow(l as u32)];
        for p in &ps {
            prop_assert_eq!(p.members.len(), n);
            for m in &p.members {
                let r = m.rank(n);
                prop_assert!(!seen[r]);
                seen[r] = true;
            }
        }
        prop_assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn clifford_certificate_is_scalar(seed in any::<u64>(), n in 1usize..3, l in 1usize..4) {
        let e = CliffordEncoding::random(n, l, &mut random::rng(seed)).unwrap();
        let ens = e.to_ensemble().unwrap();
        for v in ens.answer_vectors() {
            let m = e.closed_form_measurement(&v).unwrap();
            let mp = m.povm.get(&PovmKey::Vector(v.clone())).unwrap();
            let mm = m.povm.get(&PovmKey::Vector(v.complement())).unwrap();
            let a = ens.rho_avg(&v).unwrap();
            let b = ens.rho_avg(&v.complement()).unwrap();
            let direct = (a.matrix() * mp.matrix() + b.matrix() * mm.matrix()) * c(0.5, 0.0);
            prop_assert!((direct - e.q_certificate(&v).unwrap().matrix()).norm() <= 1e-12);
            let numeric = a.lambda_max().unwrap();
            prop_assert!((numeric - e.lambda_max_avg(&v).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn grid_refinement_never_hurts(seed in any::<u64>(), steps in 1usize..40, l in 1usize..4) {
        let e = random::ensemble(2, 2, l, true, &mut random::rng(seed));
        for mode in [Mode::Pmi, Mode::Standard] {
            let coarse = qubit_grid_search(&e, steps, mode).unwrap().value;
            let fine = qubit_grid_search(&e, 2 * steps, mode).unwrap().value;
            prop_assert!(fine >= coarse);
        }
    }
}

proptest! {
    #![proptest_config(solver())]

    #[test]
    fn iterates_respect_weak_duality(seed in any::<u64>(), d in 2usize..5, n in 2usize..4, l in 1usize..4) {
        let e = random::ensemble(d, n, l, seed % 2 == 0, &mut random::rng(seed));
        let sol = solve_pmi(&e, &SolverOptions::default()).unwrap();
        for it in &sol.history {
            prop_assert!(it.primal <= it.dual + 1e-12, "{:?}", it);
        }
        prop_assert!(sol.gap >= -1e-12 && sol.gap <= 1e-7);
    }

    #[test]
    fn complementary_slackness(seed in any::<u64>(), d in 2usize..5, n in 2usize..4, l in 1usize..4) {
        let tol = 1e-7;
        let e = random::ensemble(d, n, l, seed % 2 == 0, &mut random::rng(seed));
        let sol = solve_pmi(&e, &SolverOptions::with_tol(tol)).unwrap();
        let q = &sol.dual_certificate;
        let mut slack = 0.0;
        for (key, m) in sol.measurement.outcomes() {
            let PovmKey::Vector(v) = key else { unreachable!() };
            let s = q - &e.tau(v).unwrap();
            prop_assert!(s.lambda_min().unwrap() >= -1e-12);
            slack += s.hs_inner(m).unwrap();
        }
        prop_assert!(slack <= 10.0 * tol, "slack {}", slack);
    }

    #[test]
    fn information_never_hurts(seed in any::<u64>(), d in 2usize..4, n in 2usize..4, l in 1usize..4) {
        let e = random::ensemble(d, n, l, seed % 2 == 0, &mut random::rng(seed));
        let opts = SolverOptions::default();
        let pmi = solve_pmi(&e, &opts).unwrap().primal_value;
        let std = solve_standard(&e, &opts).unwrap().primal_value;
        prop_assert!(pmi >= std - 2e-7);
        prop_assert!(pmi <= 1.0 + 1e-9);
    }

    #[test]
    fn relabeling_preserves_the_pmi_value(seed in any::<u64>(), d in 2usize..4, l in 1usize..4) {
        let e = random::ensemble(d, 2, l, true, &mut random::rng(seed));
        let v = AnswerVector((0..l).map(|b| ((seed >> (b + 7)) & 1) as usize).collect());
        let opts = SolverOptions::default();
        let before = solve_pmi(&e, &opts).unwrap().primal_value;
        let after = solve_pmi(&e.relabel(&v).unwrap(), &opts).unwrap().primal_value;
        prop_assert!((before - after).abs() <= 2e-7);
    }

    #[test]
    fn bounds_sandwich_the_optimum(seed in any::<u64>(), d in 2usize..5, l in 2usize..4) {
        let e = random::ensemble(d, 2, l, true, &mut random::rng(seed));
        let opts = SolverOptions::default();
        let p = solve_pmi(&e, &opts).unwrap().primal_value;
        let (lo, _) = lower_bound(&e, &opts).unwrap();
        let (hi, _) = best_upper_bound(&e, &DEFAULT_ALPHAS, DEFAULT_MAX_VECTORS).unwrap();
        prop_assert!(lo <= p + 2e-7 && p <= hi + 2e-7, "{} {} {}", lo, p, hi);
    }

    #[test]
    fn clifford_closed_form_is_tight(seed in any::<u64>(), n in 1usize..3, l in 1usize..4) {
        let e = CliffordEncoding::random(n, l, &mut random::rng(seed)).unwrap();
        let p = solve_pmi(&e.to_ensemble().unwrap(), &SolverOptions::default()).unwrap().primal_value;
        prop_assert!((e.analyze().unwrap().p_pmi - p).abs() <= 2e-7);
    }

    #[test]
    fn scaling_identity_states_keeps_uniform_value(d in 1usize..5, n in 1usize..5) {
        let rho = HermitianOperator::identity(d).scale(1.0 / d as f64);
        let e = pmi_core::Ensemble::uniform_standard(vec![rho; n]).unwrap();
        let p = solve_standard(&e, &SolverOptions::default()).unwrap().primal_value;
        prop_assert!((p - 1.0 / n as f64).abs() <= 2e-7);
    }
}
