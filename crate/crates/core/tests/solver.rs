use komatsu_spectral::builtins;
use komatsu_spectral::diophantine::ReportOptions;
use komatsu_spectral::harmonic::{GroupId, HalfInt, Oversample};
use komatsu_spectral::normalform::{apply_operator, conjugate_forward, random_bandlimited, GridPlan};
use komatsu_spectral::solver::{analyze, solve_constant, solve_variable, NormalForm, Property, DEFAULT_THRESHOLD};
use komatsu_spectral::transform::{forward_full, partial_to_full, GridFunction};
use komatsu_spectral::weights::WeightSequence;
use komatsu_spectral::{Error, Verdict};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn t1s3_plan() -> GridPlan {
    GridPlan::new(HalfInt::from_int(32), HalfInt::from_int(4))
}

#[test]
fn manufactured_solution_recovery() {
    let spec = builtins::load("t1s3_La", 2).unwrap().spec;
    let grid = t1s3_plan().build(GroupId::T1, GroupId::SU2).unwrap();
    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u0 = random_bandlimited(&grid, HalfInt::from_int(4), HalfInt::from_int(4), &mut rng).unwrap();
        let f = apply_operator(&spec, &u0).unwrap();
        let (u, rep) = solve_variable(&spec, &f, DEFAULT_THRESHOLD).unwrap();
        assert!(rep.residual.unwrap() < 1e-6, "seed {seed}: {:?}", rep.residual);
        // u − u0 lies in the kernel
        let d = u.zip_with(&u0, |a, b| a - b).unwrap();
        assert!(apply_operator(&spec, &d).unwrap().norm() < 1e-6 * f.norm());
    }
}

#[test]
fn constant_rhs_is_outside_j() {
    let spec = builtins::load("t1s3_La", 2).unwrap().spec;
    let grid = t1s3_plan().build(GroupId::T1, GroupId::SU2).unwrap();
    let f = GridFunction::constant(&grid, Complex64::new(1.0, 0.0));
    match solve_variable(&spec, &f, DEFAULT_THRESHOLD) {
        Err(Error::NotInJ { resonant_mass, modes }) => {
            assert!((resonant_mass - 1.0).abs() < 1e-9);
            assert!(!modes.is_empty());
        }
        other => panic!("expected NotInJ, got {:?}", other.map(|x| x.1)),
    }
}

#[test]
fn perturbed_example_solves_constant_rhs() {
    let spec = builtins::load("t1s3_Laq_half_i", 2).unwrap().spec;
    let plan = GridPlan::new(HalfInt::from_int(32), HalfInt::from_int(6))
        .with_oversample(Oversample::default(), Oversample { phi: 1.0, theta: 1.0, psi: 2.0 });
    let grid = plan.build(GroupId::T1, GroupId::SU2).unwrap();
    let f = GridFunction::constant(&grid, Complex64::new(1.0, 0.0));
    let (_, rep) = solve_variable(&spec, &f, DEFAULT_THRESHOLD).unwrap();
    assert!(rep.residual.unwrap() < 1e-6, "{:?}", rep.residual);
}

#[test]
fn transfer_consistency() {
    // solve_variable on f succeeds iff solve_constant on Ψ_a f does
    let spec = builtins::load("t1s3_La", 2).unwrap().spec;
    let nf = NormalForm::from_spec(&spec).unwrap();
    let grid = t1s3_plan().build(GroupId::T1, GroupId::SU2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..6 {
        let u0 = random_bandlimited(&grid, HalfInt::from_int(3), HalfInt::from_int(2), &mut rng).unwrap();
        // odd trials add a constant, which leaves the compatibility set
        let f = apply_operator(&spec, &u0).unwrap().map(|v| if trial % 2 == 1 { v + 0.3 } else { v });
        let g = partial_to_full(&conjugate_forward(&spec, &f).unwrap()).unwrap();
        let direct = solve_constant(&nf, &g, DEFAULT_THRESHOLD).is_ok();
        let variable = solve_variable(&spec, &f, DEFAULT_THRESHOLD).is_ok();
        assert_eq!(direct, variable, "trial {trial}");
        assert_eq!(direct, trial % 2 == 0);
    }
}

#[test]
fn solve_duality_on_nonresonant_support() {
    let spec = builtins::load("t1s3_La", 2).unwrap().spec;
    let grid = t1s3_plan().build(GroupId::T1, GroupId::SU2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u0 = random_bandlimited(&grid, HalfInt::from_int(3), HalfInt::from_int(3), &mut rng).unwrap();
    let f = apply_operator(&spec, &u0).unwrap();
    let (u, _) = solve_variable(&spec, &f, DEFAULT_THRESHOLD).unwrap();
    let (fa, fb) = (forward_full(&apply_operator(&spec, &u).unwrap()).unwrap(), forward_full(&f).unwrap());
    let worst = fa.coefs.iter().zip(&fb.coefs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}

fn opts(cutoff: f64) -> ReportOptions {
    ReportOptions {
        cutoff,
        c_cutoffs: vec![cutoff / 4.0, cutoff / 2.0, cutoff],
        weights: vec![WeightSequence::gevrey(1.0).unwrap(), WeightSequence::gevrey(2.0).unwrap()],
        ..ReportOptions::default()
    }
}

#[test]
fn verdicts_t1s3_la() {
    let spec = builtins::load("t1s3_La", 2).unwrap().spec;
    let v = analyze(&spec, &opts(400.0)).unwrap();
    for w in ["gevrey(1)", "gevrey(2)"] {
        assert_eq!(v.get(Property::GhRoumieu, Some(w)), Some(Verdict::Refuted));
        assert_eq!(v.get(Property::GsRoumieu, Some(w)), Some(Verdict::Consistent));
    }
    assert_eq!(v.get(Property::GsSmooth, None), Some(Verdict::Refuted));
    assert_eq!(v.get(Property::GhSmooth, None), Some(Verdict::Refuted));
    assert!(v.chain_violations.is_empty(), "{:?}", v.chain_violations);
}

#[test]
fn verdicts_perturbed_half_i() {
    let spec = builtins::load("t1s3_Laq_half_i", 2).unwrap().spec;
    let v = analyze(&spec, &opts(400.0)).unwrap();
    assert_eq!(v.get(Property::GhRoumieu, Some("gevrey(1)")), Some(Verdict::Consistent));
    assert_eq!(v.get(Property::GsSmooth, None), Some(Verdict::Refuted));
    assert!(v.chain_violations.is_empty(), "{:?}", v.chain_violations);
}

#[test]
fn verdicts_s3s3_lh() {
    let spec = builtins::load("s3s3_Lh", 2).unwrap().spec;
    let v = analyze(&spec, &opts(400.0)).unwrap();
    assert_eq!(v.get(Property::GhRoumieu, Some("gevrey(1)")), Some(Verdict::Refuted));
    assert_eq!(v.get(Property::GsRoumieu, Some("gevrey(1)")), Some(Verdict::Consistent));
    assert_eq!(v.get(Property::GsSmooth, None), Some(Verdict::Refuted));
}

#[test]
fn missing_primitive_downgrades_to_undecided() {
    let mut spec = builtins::load("t1s3_La", 2).unwrap().spec;
    spec.a.primitive = None;
    let v = analyze(&spec, &opts(100.0)).unwrap();
    assert!(!v.normal_form);
    assert!(v.entries.iter().all(|e| e.verdict == Verdict::Undecided));
}
