mod common;

use common::*;
use proptest::prelude::*;
use qhnf::corpus;
use qhnf::qhpoly::{graded_basis, Monomial, Poly, QHType};
use qhnf::vfield::planar_euler;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn hz() -> QHType {
    QHType::spatial(1, 1, 2)
}

#[test]
fn degrees_of_sample_polynomials() {
    let t = hz();
    assert_eq!(p3("1/2 x^2 + 1/2 y^2").qh_degree(&t), Ok(2));
    assert_eq!(p3("z").qh_degree(&t), Ok(2));
    assert!(p3("x + z").qh_degree(&t).is_err());
    assert_eq!(Poly::<Q>::zero(3).qh_degree(&t), Err(qhnf::QhError::DegreeUndefined));
}

#[test]
fn decompositions() {
    let t = QHType::planar(1, 1);
    let parts = p2("x^3 - x").qh_decompose(&t);
    assert_eq!(parts, vec![(1, p2("-x")), (3, p2("x^3"))]);
    // Cubic nonlinearity of the FHN model with a* = -2.
    let parts = p2("x^3 + x^2").qh_decompose(&t);
    assert_eq!(parts, vec![(2, p2("x^2")), (3, p2("x^3"))]);
    assert!(Poly::<Q>::zero(2).qh_decompose(&t).is_empty());
}

#[test]
fn gradients() {
    assert_eq!(p2("1/2 x^2 + 1/2 y^2").partials(), vec![p2("x"), p2("y")]);
    assert_eq!(p2("7/3").partials(), vec![Poly::zero(2), Poly::zero(2)]);
}

#[test]
fn graded_bases() {
    let b = graded_basis(&hz(), 2);
    let names: Vec<[u32; 3]> = b.basis.iter().map(|m| m.0).collect();
    assert_eq!(b.dim(), 4);
    for m in [[2, 0, 0], [1, 1, 0], [0, 2, 0], [0, 0, 1]] {
        assert!(names.contains(&m));
    }
    assert_eq!(graded_basis(&hz(), -1).dim(), 0);
    assert_eq!(graded_basis(&QHType::planar(1, 1), 3).dim(), 4);
    // Completeness against brute-force enumeration.
    let t = QHType::spatial(2, 3, 1);
    for k in 0..10 {
        let mut count = 0;
        for a in 0..=k {
            for b in 0..=k {
                for c in 0..=k {
                    if 2 * a + 3 * b + c == k {
                        count += 1;
                        assert!(graded_basis(&t, k as i64).basis.contains(&Monomial([a, b, c])));
                    }
                }
            }
        }
        assert_eq!(graded_basis(&t, k as i64).dim(), count);
    }
}

#[test]
fn canonical_text_round_trip() {
    let p = p3("-3/2 x^2 y z^0 + 4 y");
    assert_eq!(p, p3("4 y - 3/2 x^2 y"));
    assert_eq!(Poly::parse(&p.to_string(), &["x", "y", "z"]).unwrap(), p);
    assert!(Poly::parse("x^ + y", &["x", "y", "z"]).is_err());
    assert!(matches!(
        Poly::parse("x + w", &["x", "y", "z"]),
        Err(qhnf::QhError::Parse { column: 5, .. })
    ));
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn distributive(seed in any::<u64>(), k in 0i64..5, l in 0i64..5, m in 0i64..5) {
        let mut r = rng(seed);
        let t = hz();
        let (p, q, s) = (
            corpus::homogeneous_poly(&mut r, &t, k, 0.5),
            corpus::homogeneous_poly(&mut r, &t, l, 0.5),
            corpus::homogeneous_poly(&mut r, &t, m, 0.5),
        );
        prop_assert_eq!(p.add(&q).mul(&s), p.mul(&s).add(&q.mul(&s)));
        prop_assert_eq!(p.mul(&q), q.mul(&p));
    }

    #[test]
    fn decomposition_resums(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = hz();
        let p = (0..6).fold(Poly::zero(3), |acc, k| acc.add(&corpus::homogeneous_poly(&mut r, &t, k, 0.3)));
        let parts = p.qh_decompose(&t);
        prop_assert!(parts.windows(2).all(|w| w[0].0 < w[1].0));
        prop_assert!(parts.iter().all(|(k, c)| in_degree(c, &t, *k) && !c.is_zero()));
        let back = parts.iter().fold(Poly::zero(3), |acc, (_, c)| acc.add(c));
        prop_assert_eq!(back, p);
    }

    #[test]
    fn degree_additivity(seed in any::<u64>(), k in 0i64..6, l in 0i64..6) {
        let mut r = rng(seed);
        let t = QHType::spatial(2, 3, 1);
        let p = corpus::homogeneous_poly(&mut r, &t, k, 0.7);
        let q = corpus::homogeneous_poly(&mut r, &t, l, 0.7);
        prop_assert!(p.mul(&q).in_slice(&t, k + l));
        for i in 0..3 {
            prop_assert!(p.partial(i).in_slice(&t, k - t.weight(i)));
        }
    }

    #[test]
    fn euler_identity(seed in any::<u64>(), l in 0i64..8, wx in 1u32..4, wy in 1u32..4) {
        let mut r = rng(seed);
        let t = QHType::planar(wx, wy);
        let mu = corpus::homogeneous_poly(&mut r, &t, l, 0.6);
        let d0 = planar_euler::<Q>(&t, 2);
        let lhs = mu.partial(0).mul(d0.comp(0)).add(&mu.partial(1).mul(d0.comp(1)));
        prop_assert_eq!(lhs, mu.scale(&Q::from_integer(l.into())));
    }
}
