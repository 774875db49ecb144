use komatsu_spectral::diophantine::{AlphaLinear, DivisorProblem};
use komatsu_spectral::harmonic::{GroupGrid, GroupId, HalfInt};
use komatsu_spectral::normalform::{psi_apply, random_bandlimited, GridPlan};
use komatsu_spectral::transform::{forward_partial, Variable};
use komatsu_spectral::weights::WeightSequence;
use num_complex::Complex64;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resonance_matches_rational_arithmetic(
        p in -20i64..=20, q in 1i64..=12, r in -20i64..=20, t in 1i64..=6,
        lam in -60i64..=60, twice_mu in -60i64..=60,
    ) {
        let prob = DivisorProblem::exact(
            GroupId::T1,
            GroupId::SU2,
            AlphaLinear::from_ratio(p, q),
            AlphaLinear::zero(),
            AlphaLinear::from_ratio(r, t),
        );
        let test = prob.resonance_test().unwrap();
        // lambda + a0 mu + Im q0 = 0 with Re q0 = 0
        let lhs = Ratio::from_integer(lam) + Ratio::new(p, q) * Ratio::new(twice_mu, 2) + Ratio::new(r, t);
        prop_assert_eq!(test.is_resonant(HalfInt::from_int(lam), HalfInt::from_twice(twice_mu)), lhs == Ratio::from_integer(0));
    }

    #[test]
    fn real_part_of_q0_removes_resonances(lam in -30i64..=30, twice_mu in -30i64..=30, x in 1i64..=5) {
        let prob = DivisorProblem::exact(
            GroupId::T1,
            GroupId::SU2,
            AlphaLinear::from_ratio(1, 1),
            AlphaLinear::from_ratio(x, 3),
            AlphaLinear::zero(),
        );
        prop_assert!(!prob.resonance_test().unwrap().is_resonant(HalfInt::from_int(lam), HalfInt::from_twice(twice_mu)));
    }

    #[test]
    fn single_group_round_trip(seed in any::<u64>(), band in 1i64..=6, su2 in any::<bool>()) {
        let g = if su2 { GroupGrid::su2(HalfInt::from_twice(band)).unwrap() } else { GroupGrid::torus(band).unwrap() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefs: Vec<Complex64> = (0..g.ncoef())
            .map(|_| Complex64::new(rand::Rng::gen_range(&mut rng, -1.0..1.0), rand::Rng::gen_range(&mut rng, -1.0..1.0)))
            .collect();
        let back = g.forward(&g.inverse(&coefs).unwrap()).unwrap();
        let err = coefs.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-11, "{}", err);
    }

    #[test]
    fn associated_is_monotone_and_dominates_terms(s in 1.0f64..3.0, r in 0.05f64..200.0, dr in 0.0f64..50.0, k in 0usize..40) {
        let w = WeightSequence::gevrey(s).unwrap();
        let (a, b) = (w.associated(r).unwrap().result, w.associated(r + dr).unwrap().result);
        prop_assert!(b >= a - 1e-12);
        prop_assert!(a >= 0.0);
        // M(r) >= ln(r^k / M_k)
        prop_assert!(a >= k as f64 * r.ln() - w.log_value(k).unwrap() - 1e-9 * (1.0 + a.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn psi_is_unitary_and_invertible(seed in any::<u64>(), amp in 0.0f64..20.0) {
        let grid = GridPlan::new(HalfInt::from_int(6), HalfInt::from_int(2)).build(GroupId::T1, GroupId::SU2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_bandlimited(&grid, HalfInt::from_int(3), HalfInt::from_int(2), &mut rng).unwrap();
        let pf = forward_partial(&u, Variable::Second).unwrap();
        let a: Vec<Complex64> =
            (0..grid.g1.npoints()).map(|i| Complex64::new(amp * (grid.g1.coords(i)[0] * 2.0).sin(), 0.0)).collect();
        let fwd = psi_apply(&a, &pf, 1.0).unwrap();
        let back = psi_apply(&a, &fwd, -1.0).unwrap();
        for ((x, y), z) in pf.values.iter().zip(&back.values).zip(&fwd.values) {
            prop_assert!((x - y).norm() < 1e-11);
            prop_assert!((x.norm() - z.norm()).abs() < 1e-11);
        }
    }
}
