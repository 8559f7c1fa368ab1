mod common;

use common::*;
use qhnf::corpus;
use qhnf::homolog::Mode;
use qhnf::hopfzero::{hz_principal, hz_type};
use qhnf::nform::{check_assumptions, is_squarefree, lie_series, normal_form, pre_normalize, NFProblem};
use qhnf::qhpoly::{Poly, QHType};
use qhnf::vfield::{PrincipalPart, VField};
use qhnf::QhError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn squarefree_examples() {
    for (s, expect) in [
        ("x^2 + y^2", true),
        ("x y", true),
        ("1/2 y^2 - 1/3 x^3", true),
        ("x^2 y + 1/3 y^3", true),
        ("x^2 y^2", false),
        ("x^3", false),
        ("y^2", false),
        ("x^2 + 2 x y + y^2", false),
        ("0", false),
    ] {
        assert_eq!(is_squarefree(&p2(s)), expect, "{s}");
    }
}

#[test]
fn assumption_reports() {
    assert!(check_assumptions(&hz_principal::<Q>()).passed());
    let bad = PrincipalPart::new(p2("x^2 y^2"), p2("0"), QHType::spatial(1, 1, 2), 2).unwrap();
    let rep = check_assumptions(&bad);
    assert!(!rep.squarefree && !rep.passed());
    assert!(!rep.messages.is_empty());
    // Saddle with drift x^2: the planar Lie derivative hits x^2 and y^2.
    let saddle = PrincipalPart::new(p2("x y"), p2("x^2"), QHType::spatial(1, 1, 2), 0).unwrap();
    let rep = check_assumptions(&saddle);
    assert!(rep.squarefree && !rep.drift_reduced);
}

#[test]
fn drift_reduction_removes_the_range_part() {
    let field = field3("-x", "y", "x^2 + x y");
    let problem = NFProblem::from_field(field, QHType::spatial(1, 1, 2), 0, 2, Mode::Conjugation).unwrap();
    assert!(!check_assumptions(&problem.principal).drift_reduced);
    let (reduced, shift) = pre_normalize(&problem).unwrap();
    assert_eq!(shift.nu, p2("-1/2 x^2"));
    assert_eq!(reduced.principal.f, p2("x y"));
    assert!(check_assumptions(&reduced.principal).passed());
    // Already reduced input is left alone.
    let hz = NFProblem::from_field(hz_principal::<Q>().field(), hz_type(), 0, 3, Mode::Conjugation).unwrap();
    let (same, shift) = pre_normalize(&hz).unwrap();
    assert!(shift.nu.is_zero());
    assert_eq!(same.field, hz.field);
}

#[test]
fn problems_reject_low_degree_terms() {
    let f = hz_principal::<Q>().field().add(&field3("1", "0", "0"));
    assert!(matches!(
        NFProblem::from_field(f, hz_type(), 0, 3, Mode::Conjugation),
        Err(QhError::Assumption(_))
    ));
    let nonsquarefree = field3("-2 x^2 y", "2 x y^2", "0");
    let p = NFProblem::from_field(nonsquarefree, QHType::spatial(1, 1, 2), 2, 2, Mode::Conjugation).unwrap();
    assert!(matches!(normal_form(&p), Err(QhError::Assumption(_))));
}

#[test]
fn trivial_generator_is_the_identity() {
    let t = hz_type();
    let f = corpus::hz_field(&mut ChaCha8Rng::seed_from_u64(3), 3);
    let g = lie_series(&f, &VField::zero(3, 3), &Poly::zero(3), 1, &t, 3).unwrap();
    assert_eq!(g, f.truncate(&t, 3));
}

#[test]
fn normal_input_is_a_fixed_point() {
    let f = field3("-y + x z - y z", "x + y z + x z", "1/2 x^2 + 1/2 y^2 + z^2 - 3 z^3");
    let p = NFProblem::from_field(f.clone(), hz_type(), 0, 4, Mode::Conjugation).unwrap();
    let res = normal_form(&p).unwrap();
    assert!(res.generator.is_zero() && res.mu.is_zero());
    assert_eq!(res.normal_form, f.truncate(&hz_type(), 4));
    assert!(res.records.iter().all(|r| r.certified));
}

#[test]
fn both_modes_certify_and_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for mode in [Mode::Conjugation, Mode::Orbital] {
        for _ in 0..3 {
            let f = corpus::hz_field(&mut rng, 4);
            let p = NFProblem::from_field(f.clone(), hz_type(), 0, 4, mode).unwrap();
            let res = normal_form(&p).unwrap();
            assert!(res.records.iter().all(|r| r.certified));
            assert!(hz_shape_ok(
                &res.normal_form.sub(&hz_principal::<Q>().field()),
                mode == Mode::Conjugation
            ));
            assert_eq!(res.replay(&f).unwrap(), res.normal_form);
            let sum = res
                .records
                .iter()
                .fold(hz_principal::<Q>().field(), |acc, r| acc.add(&r.term));
            assert_eq!(sum, res.normal_form);
            assert!(mode == Mode::Orbital || res.mu.is_zero());
        }
    }
}

#[test]
fn a_second_principal_part_normalizes() {
    // h = x^3/3 - y^2/2 on (2, 3, 5), r = 1, with a drift a x^3 + b y^2.
    let t = QHType::spatial(2, 3, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (a, b) in [("1", "1"), ("2", "-1/3"), ("0", "1")] {
        let h = p2("1/3 x^3 - 1/2 y^2");
        let f = p2(&format!("{a} x^3 + {b} y^2"));
        let pp = PrincipalPart::new(h, f, t.clone(), 1).unwrap();
        let field = (1..=3).fold(pp.field(), |acc, k| {
            acc.add(&corpus::homogeneous_field(&mut rng, &t, 1 + k, 0.4))
        });
        for mode in [Mode::Conjugation, Mode::Orbital] {
            let p = NFProblem::from_field(field.clone(), t.clone(), 1, 3, mode).unwrap();
            let res = normal_form(&p).unwrap();
            assert!(res.records.iter().all(|r| r.certified), "a = {a}, b = {b}");
            assert_eq!(res.replay(&field).unwrap(), res.normal_form);
            assert!(check_assumptions(&res.principal).passed());
        }
    }
}
