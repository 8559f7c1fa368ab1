use nalgebra::Complex;
use proptest::prelude::*;
use qhnf::fhn::{
    closed_form_coeffs, eigenvalue_defect, engine_coeffs, fhn_coeffs, fhn_reduce, fhn_reduce_with, fhn_unfolding,
    predict_orbit, FHNParams, FHNTransform, NFCoeffs, ReductionOrder,
};
use qhnf::hopfzero::{hz_principal, hz_type};

const TOL: f64 = 1e-9;

/// Coefficients of the reduced critical system worked out by hand; a
/// simulation of the full system agrees with these.
fn expected(b: f64, d: f64) -> NFCoeffs {
    let w2 = (1.0 - b * b * d.powi(3)) / d;
    let w = w2.sqrt();
    let a1 = -b * b * (1.0 - d).powi(2) / w2.powi(3);
    NFCoeffs {
        a1,
        b1: -a1,
        c1: -b * (1.0 - d).powi(2) / (d * w.powi(5)),
    }
}

fn det3(m: [[Complex<f64>; 3]; 3]) -> Complex<f64> {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[test]
fn rotation_speed() {
    let p = FHNParams::critical(0.5, 0.5).unwrap();
    assert!((p.omega() - 31f64.sqrt() / 4.0).abs() < 1e-15);
    assert_eq!((p.a, p.c), (-2.0, 0.25));
}

#[test]
fn critical_spectrum() {
    for (b, d) in [(0.5, 0.5), (0.2, 2.0), (0.9, 0.7)] {
        let p = FHNParams::critical(b, d).unwrap();
        assert!(eigenvalue_defect(&p) < 1e-12);
        // det(L − λ I) vanishes at λ = 0 and λ = ±iω.
        for lam in [Complex::new(0.0, 0.0), Complex::new(0.0, p.omega())] {
            let r = |a: f64, diag: bool| Complex::new(a, 0.0) - if diag { lam } else { Complex::new(0.0, 0.0) };
            let m = [
                [r(0.0, true), r(0.0, false), r(1.0, false)],
                [r(b, false), r(-b * d, true), r(0.0, false)],
                [r(p.a, false), r(1.0, false), r(p.c, true)],
            ];
            assert!(det3(m).norm() < 1e-12);
        }
    }
}

#[test]
fn reduction_vector() {
    for (b, d) in [(0.5, 0.5), (0.2, 2.0), (0.3, 0.7)] {
        let p = FHNParams::critical(b, d).unwrap();
        let w = p.omega();
        let t = FHNTransform::new(&p).unwrap();
        let want = [-b * d / w.powi(3), -1.0 / (w * w), b / w.powi(3)];
        for (i, (got, want)) in t.k.iter().zip(want).enumerate() {
            assert!((got - want).abs() < 1e-12, "k{} = {got} vs {want}", i + 1);
        }
    }
}

#[test]
fn unit_d_is_degenerate() {
    assert!(FHNTransform::new(&FHNParams::critical(0.5, 1.0).unwrap()).is_err());
    assert!(fhn_reduce(&FHNParams::critical(0.5, 1.0).unwrap()).is_err());
    assert!(FHNParams::critical(0.5, 0.0).is_err());
    assert!(FHNParams::critical(2.0, 1.0).is_err());
}

#[test]
fn reduced_principal_part_is_hopf_zero() {
    let red = fhn_reduce(&FHNParams::critical(0.2, 2.0).unwrap()).unwrap();
    assert!(red.principal_residual < 1e-12);
    assert_eq!(red.field.homogeneous_part(&hz_type(), 0), hz_principal::<f64>().field());
}

#[test]
fn coefficients_against_hand_computation() {
    for (b, d) in [(0.2, 0.3), (0.5, 0.5), (0.9, 0.7), (0.2, 2.0)] {
        let p = FHNParams::critical(b, d).unwrap();
        let c = fhn_coeffs(&p).unwrap().engine;
        let e = expected(b, d);
        assert!((c.a1 - e.a1).abs() < TOL && (c.b1 - e.b1).abs() < TOL && (c.c1 - e.c1).abs() < TOL);
        assert!((c.a1 + c.b1).abs() < TOL);
        let other = engine_coeffs(&fhn_reduce_with(&p, ReductionOrder::ScaleThenShift).unwrap()).unwrap();
        assert!((other.a1 - c.a1).abs() < TOL && (other.b1 - c.b1).abs() < TOL && (other.c1 - c.c1).abs() < TOL);
    }
}

#[test]
fn reference_closed_form() {
    let c = closed_form_coeffs(&FHNParams::critical(0.5, 0.5).unwrap());
    assert!((c.c1 + 0.5).abs() < 1e-15);
    assert!((c.a1 + c.b1).abs() < 1e-15);
    // The ratio c1/a1 agrees with the engine even though magnitudes do not.
    let cmp = fhn_coeffs(&FHNParams::critical(0.5, 0.5).unwrap()).unwrap();
    assert!((cmp.engine.c1 / cmp.engine.a1 - c.c1 / c.a1).abs() < 1e-9);
    assert!(!cmp.agrees(1e-3));
}

#[test]
fn unfolding_routes_agree_to_first_order() {
    for (da, dc) in [(1e-5, 0.0), (0.0, 1e-5), (1e-5, -1e-5)] {
        let u = fhn_unfolding(&FHNParams::near_critical(0.5, 0.5, da, dc).unwrap()).unwrap();
        let s = da.abs() + dc.abs();
        assert!((u.miniversal.0 - u.spectral.0).abs() < 50.0 * s * s);
        assert!((u.miniversal.1 - u.spectral.1).abs() < 50.0 * s * s);
        assert!(u.reduction.residual < 1e-12);
    }
    let u = fhn_unfolding(&FHNParams::critical(0.5, 0.5).unwrap()).unwrap();
    assert!(u.epsilon().abs() < 1e-15 && u.delta().abs() < 1e-15);
}

#[test]
fn zero_a1_has_no_prediction() {
    let c = NFCoeffs {
        a1: 0.0,
        b1: 1.0,
        c1: 0.0,
    };
    assert!(predict_orbit(&c, 1e-3, 1e-3).is_err());
}

proptest! {
    #[test]
    fn radius_matches_the_amplitude_equation(
        a1 in -2.0f64..2.0, b1 in -2.0f64..2.0, eps in -1e-2f64..1e-2, delta in -1e-2f64..1e-2,
    ) {
        prop_assume!(a1.abs() > 1e-3);
        let c = NFCoeffs { a1, b1, c1: 0.3 };
        let p = predict_orbit(&c, eps, delta).unwrap();
        let s = eps * (a1 * delta - b1 * eps);
        prop_assert_eq!(p.exists, s > 0.0);
        if p.exists {
            prop_assert!((p.radius * p.radius * a1 * a1 / 2.0 - s).abs() <= 1e-12 * s.abs().max(1e-300) + 1e-300);
        }
        prop_assert!((p.z_offset + eps / a1).abs() < 1e-15);
        prop_assert!((p.period() - 2.0 * std::f64::consts::PI / (1.0 - 0.3 * eps / a1)).abs() < 1e-12);
    }

    #[test]
    fn reduced_coordinates_round_trip(b in 0.1f64..0.9, d in 0.2f64..0.9, x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
        let t = FHNTransform::new(&FHNParams::critical(b, d).unwrap()).unwrap();
        let back = t.from_reduced(&t.to_reduced(&[x, y, z]));
        for (u, v) in back.iter().zip([x, y, z]) {
            prop_assert!((u - v).abs() < 1e-9);
        }
    }
}
