//! Oracles written directly from definitions, independent of the engine's
//! structured code paths.
#![allow(dead_code)]

use qhnf::qhpoly::{Monomial, Poly, QHType};
use qhnf::split::Split4;
use qhnf::vfield::{PrincipalPart, VField};
use qhnf::Rational;

pub type Q = Rational;

pub fn p2(s: &str) -> Poly<Q> {
    Poly::parse(s, &["x", "y"]).unwrap()
}

pub fn p3(s: &str) -> Poly<Q> {
    Poly::parse(s, &["x", "y", "z"]).unwrap()
}

pub fn field3(a: &str, b: &str, c: &str) -> VField<Q> {
    VField::from_array([p3(a), p3(b), p3(c)])
}

/// `[P, F]_j = Σ_i ∂P_j/∂x_i F_i − ∂F_j/∂x_i P_i`, term by term.
pub fn jacobian_bracket(p: &VField<Q>, f: &VField<Q>) -> VField<Q> {
    let n = p.ncomps();
    let comps = (0..n)
        .map(|j| {
            let mut acc = Poly::zero(p.arity());
            for i in 0..n {
                acc = acc
                    .add(&p.comp(j).partial(i).mul(f.comp(i)))
                    .sub(&f.comp(j).partial(i).mul(p.comp(i)));
            }
            acc
        })
        .collect();
    VField::new(comps).unwrap()
}

/// `(−∂g/∂y, ∂g/∂x)` with `ncomps` components (third one zero).
pub fn ham(g: &Poly<Q>, ncomps: usize) -> VField<Q> {
    let mut c = vec![g.partial(1).neg(), g.partial(0)];
    if ncomps == 3 {
        c.push(Poly::zero(g.arity()));
    }
    VField::new(c).unwrap()
}

/// `(t1 x, t2 y[, 0])` over `arity` variables.
pub fn euler(t: &QHType, arity: usize, ncomps: usize) -> VField<Q> {
    let w = |i: usize| Poly::var(arity, i).scale(&Q::from_integer(t.weight(i).into()));
    let mut c = vec![w(0), w(1)];
    if ncomps == 3 {
        c.push(Poly::zero(arity));
    }
    VField::new(c).unwrap()
}

/// `(X_g, 0) + mu (D0, 0) + lambda (X_h, 0) + (0, f)`.
pub fn assemble4(s: &Split4<Q>, pp: &PrincipalPart<Q>) -> VField<Q> {
    let h = pp.h.lift3();
    ham(&s.g, 3)
        .add(&euler(&pp.t, 3, 3).mul_poly(&s.mu))
        .add(&ham(&h, 3).mul_poly(&s.lambda))
        .add(&VField::from_array([Poly::zero(3), Poly::zero(3), s.f.clone()]))
}

/// Every monomial of `p` has qh-degree `k`.
pub fn in_degree(p: &Poly<Q>, t: &QHType, k: i64) -> bool {
    p.terms().all(|(m, _)| t.degree(m) == k)
}

/// Hopf-zero normal-form shape: `P(z)(x, y, 0) + Q(z)(−y, x, 0) + R(z) e3`,
/// with `Q = 0` unless `rotation` is allowed.
pub fn hz_shape_ok(g: &VField<Q>, rotation: bool) -> bool {
    let z_power = |m: &Monomial, e: [u32; 2]| m.0[0] == e[0] && m.0[1] == e[1];
    let mut ok = g.comp(2).terms().all(|(m, _)| z_power(m, [0, 0]));
    for (m, c) in g.comp(0).terms() {
        let l = m.0[2];
        if z_power(m, [1, 0]) {
            ok &= g.comp(1).coeff(&Monomial([0, 1, l])) == *c;
        } else if z_power(m, [0, 1]) {
            ok &= rotation && g.comp(1).coeff(&Monomial([1, 0, l])) == -c.clone();
        } else {
            ok = false;
        }
    }
    for (m, c) in g.comp(1).terms() {
        let l = m.0[2];
        if z_power(m, [0, 1]) {
            ok &= g.comp(0).coeff(&Monomial([1, 0, l])) == *c;
        } else if z_power(m, [1, 0]) {
            ok &= rotation && g.comp(0).coeff(&Monomial([0, 1, l])) == -c.clone();
        } else {
            ok = false;
        }
    }
    ok
}

/// Rank by plain Gaussian elimination over `Q`.
pub fn rank(vectors: &[Vec<Q>]) -> usize {
    let mut rows: Vec<Vec<Q>> = vectors.to_vec();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] != Q::from_integer(0.into())) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        for i in 0..rows.len() {
            if i != r && rows[i][c] != Q::from_integer(0.into()) {
                let f = rows[i][c].clone() / pivot.clone();
                let pivot_row = rows[r].clone();
                for (dst, src) in rows[i][c..].iter_mut().zip(&pivot_row[c..]) {
                    *dst -= src.clone() * f.clone();
                }
            }
        }
        r += 1;
    }
    r
}

/// Coefficient vectors of `polys` over the monomials of degree `k`.
pub fn coords(polys: &[Poly<Q>], t: &QHType, k: i64) -> Vec<Vec<Q>> {
    let basis = qhnf::graded_basis(t, k).basis;
    polys
        .iter()
        .map(|p| basis.iter().map(|m| p.coeff(m)).collect())
        .collect()
}
