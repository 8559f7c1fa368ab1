//! Seeded random inputs for property checks and the acceptance run.
//!
//! The base seed comes from `QHNF_SEED` when set, so a failing corpus can be
//! regenerated exactly; each named stream derives its own generator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hopfzero::hz_principal;
use crate::qhpoly::{graded_basis, Monomial, Poly, QHType};
use crate::scalar::{q, Rational};
use crate::vfield::{PrincipalPart, VField};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;
pub const SEED_ENV: &str = "QHNF_SEED";

/// `QHNF_SEED` parsed as an integer, else [`DEFAULT_SEED`].
pub fn base_seed() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// Independent generator for the stream called `label`.
pub fn stream(label: &str) -> ChaCha8Rng {
    // FNV-1a keeps stream seeds stable across toolchains.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(base_seed() ^ h)
}

/// Small rational `n/d`, `|n| <= 5`, `1 <= d <= 4`; nonzero when asked.
pub fn rational(rng: &mut impl Rng, nonzero: bool) -> Rational {
    loop {
        let n = rng.gen_range(-5..=5);
        if n != 0 || !nonzero {
            return q(n, rng.gen_range(1..=4));
        }
    }
}

/// Random element of the graded slice of degree `k`, each basis monomial
/// kept with probability `density`.
pub fn homogeneous_poly(rng: &mut impl Rng, t: &QHType, k: i64, density: f64) -> Poly<Rational> {
    let slice = graded_basis(t, k);
    let mut terms: Vec<(Monomial, Rational)> = Vec::new();
    for m in &slice.basis {
        if rng.gen_bool(density) {
            terms.push((*m, rational(rng, true)));
        }
    }
    Poly::from_terms(t.arity(), terms)
}

/// Random field of degree `k`: component `j` lies in the slice `k + t_j`.
pub fn homogeneous_field(rng: &mut impl Rng, t: &QHType, k: i64, density: f64) -> VField<Rational> {
    let comps = (0..t.arity())
        .map(|j| homogeneous_poly(rng, t, k + t.weight(j), density))
        .collect();
    VField::new(comps).expect("components share the arity of the type")
}

/// Same, for a planar field under the planar restriction of `t`.
pub fn planar_field(rng: &mut impl Rng, t: &QHType, k: i64, density: f64) -> VField<Rational> {
    homogeneous_field(rng, &t.planar_part(), k, density)
}

/// Principal parts the structural checks cycle through.
pub fn principal_catalog() -> Vec<PrincipalPart<Rational>> {
    let p = |s: &str| Poly::parse(s, &["x", "y"]).expect("catalog polynomials parse");
    vec![
        hz_principal(),
        PrincipalPart::new(p("1/2 y^2 - 1/3 x^3"), p("x"), QHType::spatial(2, 3, 1), 1).expect("cusp principal part"),
        PrincipalPart::new(p("x y"), p("x y"), QHType::spatial(1, 1, 2), 0).expect("saddle principal part"),
        PrincipalPart::new(p("x^2 y + 1/3 y^3"), p("0"), QHType::spatial(1, 1, 1), 1).expect("cubic principal part"),
    ]
}

/// Perturbation of the critical Hopf-zero field through degree `max`, with
/// about a third of the monomials populated.
pub fn hz_perturbation(rng: &mut impl Rng, max: i64) -> VField<Rational> {
    let t = crate::hopfzero::hz_type();
    (1..=max)
        .map(|k| homogeneous_field(rng, &t, k, 0.35))
        .fold(VField::zero(3, 3), |acc, f| acc.add(&f))
}

/// Critical Hopf-zero field plus a random perturbation through `max`.
pub fn hz_field(rng: &mut impl Rng, max: i64) -> VField<Rational> {
    hz_principal::<Rational>().field().add(&hz_perturbation(rng, max))
}

/// Picks one entry of a nonempty slice.
pub fn pick<'a, T>(rng: &mut impl Rng, items: &'a [T]) -> &'a T {
    items.choose(rng).expect("nonempty choice")
}
