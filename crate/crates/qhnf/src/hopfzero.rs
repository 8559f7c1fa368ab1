//! Hopf-zero singularity, type `(1, 1, 2)` with `h = f = (x^2 + y^2)/2`.
//!
//! The parametric computation runs the general engine over [`ParamScalar`],
//! the ring `Q[eps, delta]` modulo second-order terms, with the unfolded
//! principal field `(−y + eps x, x + eps y, delta z + h)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::ser::SerializeStruct;

use crate::error::{QhError, Result};
use crate::homolog::Mode;
use crate::nform::{NFEngine, NFResult, PreNormalization};
use crate::qhpoly::{Monomial, Poly, QHType};
use crate::scalar::{q, rational_string, Rational, Scalar};
use crate::vfield::{change_coordinates, PrincipalPart, VField};

/// `c0 + c_eps eps + c_delta delta`, products of parameters dropped.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ParamScalar {
    pub c0: Rational,
    pub c_eps: Rational,
    pub c_delta: Rational,
}

impl ParamScalar {
    pub fn new(c0: Rational, c_eps: Rational, c_delta: Rational) -> Self {
        ParamScalar { c0, c_eps, c_delta }
    }

    pub fn constant(c0: Rational) -> Self {
        ParamScalar::new(c0, Rational::zero(), Rational::zero())
    }

    pub fn eps() -> Self {
        ParamScalar::new(Rational::zero(), Rational::one(), Rational::zero())
    }

    pub fn delta() -> Self {
        ParamScalar::new(Rational::zero(), Rational::zero(), Rational::one())
    }

    /// Value at `eps = delta = 0`.
    pub fn critical(&self) -> Rational {
        self.c0.clone()
    }

    /// First-order evaluation at numeric parameters.
    pub fn eval(&self, eps: f64, delta: f64) -> f64 {
        let f = |r: &Rational| r.to_f64().unwrap_or(f64::NAN);
        f(&self.c0) + f(&self.c_eps) * eps + f(&self.c_delta) * delta
    }

    /// `["c0", "c_eps", "c_delta"]` as exact `p/q` strings.
    pub fn triple(&self) -> [String; 3] {
        [
            rational_string(&self.c0),
            rational_string(&self.c_eps),
            rational_string(&self.c_delta),
        ]
    }
}

impl fmt::Display for ParamScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.c0.is_zero() {
            parts.push(rational_string(&self.c0));
        }
        if !self.c_eps.is_zero() {
            parts.push(format!("{}*eps", rational_string(&self.c_eps)));
        }
        if !self.c_delta.is_zero() {
            parts.push(format!("{}*delta", rational_string(&self.c_delta)));
        }
        match parts.len() {
            0 => write!(f, "0"),
            1 => write!(f, "{}", parts[0]),
            _ => write!(f, "({})", parts.join(" + ")),
        }
    }
}

impl serde::Serialize for ParamScalar {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let [c0, ce, cd] = self.triple();
        let mut st = s.serialize_struct("ParamScalar", 3)?;
        st.serialize_field("c0", &c0)?;
        st.serialize_field("c_eps", &ce)?;
        st.serialize_field("c_delta", &cd)?;
        st.end()
    }
}

impl Add for ParamScalar {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        ParamScalar::new(self.c0 + o.c0, self.c_eps + o.c_eps, self.c_delta + o.c_delta)
    }
}

impl Sub for ParamScalar {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        ParamScalar::new(self.c0 - o.c0, self.c_eps - o.c_eps, self.c_delta - o.c_delta)
    }
}

impl Neg for ParamScalar {
    type Output = Self;
    fn neg(self) -> Self {
        ParamScalar::new(-self.c0, -self.c_eps, -self.c_delta)
    }
}

impl Mul for ParamScalar {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        ParamScalar::new(
            &self.c0 * &o.c0,
            &self.c0 * &o.c_eps + &self.c_eps * &o.c0,
            &self.c0 * &o.c_delta + &self.c_delta * &o.c0,
        )
    }
}

impl Zero for ParamScalar {
    fn zero() -> Self {
        ParamScalar::default()
    }
    fn is_zero(&self) -> bool {
        self.c0.is_zero() && self.c_eps.is_zero() && self.c_delta.is_zero()
    }
}

impl One for ParamScalar {
    fn one() -> Self {
        ParamScalar::constant(Rational::one())
    }
}

impl Scalar for ParamScalar {
    fn from_rational(q: &Rational) -> Self {
        ParamScalar::constant(q.clone())
    }
    /// Units are exactly the elements with nonzero constant term.
    fn inverse(&self) -> Option<Self> {
        if self.c0.is_zero() {
            return None;
        }
        let inv = self.c0.recip();
        let inv2 = &inv * &inv;
        Some(ParamScalar::new(inv, -(&self.c_eps * &inv2), -(&self.c_delta * &inv2)))
    }
    fn pivot_weight(&self) -> Option<f64> {
        if self.c0.is_zero() {
            None
        } else {
            Some(1.0)
        }
    }
    fn negligible(&self) -> bool {
        self.is_zero()
    }
    fn approx(&self) -> f64 {
        self.c0.to_f64().unwrap_or(f64::NAN)
    }
}

pub type ParamPoly = Poly<ParamScalar>;
pub type ParamVField = VField<ParamScalar>;

pub fn hz_type() -> QHType {
    QHType::spatial(1, 1, 2)
}

/// `F0 = (−y, x, (x^2 + y^2)/2)`.
pub fn hz_principal<S: Scalar>() -> PrincipalPart<S> {
    let h = Poly::var(2, 0)
        .pow(2)
        .add(&Poly::var(2, 1).pow(2))
        .scale(&S::ratio(1, 2));
    PrincipalPart::new(h.clone(), h, hz_type(), 0).expect("Hopf-zero principal part is valid")
}

/// `(−y + eps x, x + eps y, delta z + (x^2 + y^2)/2)`.
pub fn unfolded_principal_field() -> ParamVField {
    let x = ParamPoly::var(3, 0);
    let y = ParamPoly::var(3, 1);
    let z = ParamPoly::var(3, 2);
    let h = x.pow(2).add(&y.pow(2)).scale(&ParamScalar::from_rational(&q(1, 2)));
    VField::from_array([
        y.neg().add(&x.scale(&ParamScalar::eps())),
        x.add(&y.scale(&ParamScalar::eps())),
        z.scale(&ParamScalar::delta()).add(&h),
    ])
}

/// `(component, exponents)` with `None` for the two parameter couplings.
struct Slot {
    name: &'static str,
    comp: usize,
    exp: [u32; 3],
    /// `Some(true)` couples with `eps`, `Some(false)` with `delta`.
    param: Option<bool>,
}

const fn slot(name: &'static str, comp: usize, exp: [u32; 3]) -> Slot {
    Slot {
        name,
        comp,
        exp,
        param: None,
    }
}

const fn coupling(name: &'static str, comp: usize, eps: bool) -> Slot {
    Slot {
        name,
        comp,
        exp: [0, 0, 1],
        param: Some(eps),
    }
}

/// Every coefficient name, keyed by the exponents of its monomial.
const SLOTS: &[Slot] = &[
    slot("A200", 0, [2, 0, 0]),
    slot("A110", 0, [1, 1, 0]),
    slot("A020", 0, [0, 2, 0]),
    coupling("A'001", 0, true),
    coupling("A''001", 0, false),
    slot("B200", 1, [2, 0, 0]),
    slot("B110", 1, [1, 1, 0]),
    slot("B020", 1, [0, 2, 0]),
    coupling("B'001", 1, true),
    coupling("B''001", 1, false),
    slot("C300", 2, [3, 0, 0]),
    slot("C210", 2, [2, 1, 0]),
    slot("C120", 2, [1, 2, 0]),
    slot("C030", 2, [0, 3, 0]),
    slot("C101", 2, [1, 0, 1]),
    slot("C011", 2, [0, 1, 1]),
    slot("A300", 0, [3, 0, 0]),
    slot("A210", 0, [2, 1, 0]),
    slot("A120", 0, [1, 2, 0]),
    slot("A030", 0, [0, 3, 0]),
    slot("A101", 0, [1, 0, 1]),
    slot("A011", 0, [0, 1, 1]),
    slot("B300", 1, [3, 0, 0]),
    slot("B210", 1, [2, 1, 0]),
    slot("B120", 1, [1, 2, 0]),
    slot("B030", 1, [0, 3, 0]),
    slot("B101", 1, [1, 0, 1]),
    slot("B011", 1, [0, 1, 1]),
    slot("C400", 2, [4, 0, 0]),
    slot("C310", 2, [3, 1, 0]),
    slot("C220", 2, [2, 2, 0]),
    slot("C130", 2, [1, 3, 0]),
    slot("C040", 2, [0, 4, 0]),
    slot("C201", 2, [2, 0, 1]),
    slot("C111", 2, [1, 1, 1]),
    slot("C021", 2, [0, 2, 1]),
    slot("C002", 2, [0, 0, 2]),
];

/// Alternative spellings: ASCII primes and the index-shifted names that place
/// the `z` weight in the last slot.
const ALIASES: &[(&str, &str)] = &[
    ("Ap001", "A'001"),
    ("App001", "A''001"),
    ("Bp001", "B'001"),
    ("Bpp001", "B''001"),
    ("A102", "A101"),
    ("A012", "A011"),
    ("B102", "B101"),
    ("B012", "B011"),
    ("C102", "C101"),
    ("C012", "C011"),
];

pub fn coefficient_names() -> impl Iterator<Item = &'static str> {
    SLOTS.iter().map(|s| s.name)
}

pub fn canonical_name(name: &str) -> Option<&'static str> {
    let name = name.trim();
    let name = ALIASES.iter().find(|(a, _)| *a == name).map_or(name, |(_, c)| c);
    SLOTS.iter().find(|s| s.name == name).map(|s| s.name)
}

/// Named coefficients of the first two perturbation degrees; unnamed ones
/// are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HZInput {
    values: BTreeMap<&'static str, Rational>,
}

impl HZInput {
    pub fn new() -> Self {
        HZInput::default()
    }

    pub fn set(&mut self, name: &str, value: Rational) -> Result<()> {
        let key = canonical_name(name).ok_or_else(|| QhError::UnknownCoefficient(name.to_string()))?;
        if value.is_zero() {
            self.values.remove(key);
        } else {
            self.values.insert(key, value);
        }
        Ok(())
    }

    pub fn with(mut self, name: &str, value: Rational) -> Result<Self> {
        self.set(name, value)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Rational {
        canonical_name(name)
            .and_then(|k| self.values.get(k).cloned())
            .unwrap_or_else(Rational::zero)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (&'static str, &Rational)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    /// Every coefficient drawn as `n/d` with `|n| <= 6`, `1 <= d <= 4`.
    pub fn random(rng: &mut impl Rng) -> Self {
        let mut input = HZInput::new();
        for s in SLOTS {
            let v = q(rng.gen_range(-6..=6), rng.gen_range(1..=4));
            input.set(s.name, v).expect("slot names are canonical");
        }
        input
    }

    /// Perturbation `F1 + F2` over the parameter ring.
    pub fn perturbation(&self) -> ParamVField {
        let mut comps = vec![ParamPoly::zero(3); 3];
        for s in SLOTS {
            let v = self.get(s.name);
            if v.is_zero() {
                continue;
            }
            let c = match s.param {
                None => ParamScalar::constant(v),
                Some(true) => ParamScalar::new(Rational::zero(), v, Rational::zero()),
                Some(false) => ParamScalar::new(Rational::zero(), Rational::zero(), v),
            };
            comps[s.comp].add_term(Monomial(s.exp), c);
        }
        VField::new(comps).expect("three spatial components")
    }

    /// The full unfolded system `F0 + F1 + F2`.
    pub fn system(&self) -> ParamVField {
        unfolded_principal_field().add(&self.perturbation())
    }

    /// Critical (`eps = delta = 0`) system over `Q`.
    pub fn critical_system(&self) -> VField<Rational> {
        self.system().map(|c| c.critical())
    }
}

/// Cubic-order Hopf-zero coefficients; orbital results carry no `c1`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct HZCoeffs {
    pub a1: ParamScalar,
    pub b1: ParamScalar,
    pub c1: Option<ParamScalar>,
}

#[derive(Clone, Debug)]
pub struct ParametricNF {
    pub coeffs: HZCoeffs,
    /// Generators of degrees 1, 2, 3.
    pub generators: [ParamVField; 3],
    /// Time rescaling of degree 2 (a multiple of `z`).
    pub mu2: ParamPoly,
    pub result: NFResult<ParamScalar>,
}

/// Reads `(a1, b1, c1)` off `a1 z (x,y,0) + b1 z^2 e3 + c1 z (−y,x,0)`.
pub fn extract_coeffs<S: Scalar>(g2: &VField<S>) -> (S, S, S) {
    let xz = Monomial([1, 0, 1]);
    let zz = Monomial([0, 0, 2]);
    (g2.comp(0).coeff(&xz), g2.comp(2).coeff(&zz), g2.comp(1).coeff(&xz))
}

/// True when a degree-2 term is a combination of the admitted shapes.
pub fn has_degree2_shape<S: Scalar>(g2: &VField<S>, mode: Mode) -> bool {
    let (a, b, c) = extract_coeffs(g2);
    let x = Poly::<S>::var(3, 0);
    let y = Poly::<S>::var(3, 1);
    let z = Poly::<S>::var(3, 2);
    let c = if mode == Mode::Orbital { S::zero() } else { c };
    let model = VField::from_array([
        x.mul(&z).scale(&a).sub(&y.mul(&z).scale(&c)),
        y.mul(&z).scale(&a).add(&x.mul(&z).scale(&c)),
        z.pow(2).scale(&b),
    ]);
    g2.sub(&model).negligible()
}

/// Degrees 1 to 3 of the parametric normal form with the `1 − mu`
/// time convention.
pub fn parametric_normal_form(input: &HZInput, mode: Mode) -> Result<ParametricNF> {
    parametric_normal_form_with(input, mode, -1)
}

/// Same with an explicit time convention `1 + sigma mu`.
pub fn parametric_normal_form_with(input: &HZInput, mode: Mode, sigma: i64) -> Result<ParametricNF> {
    let field = input.system();
    parametric_normal_form_field(&field, mode, sigma)
}

/// Runs the reduction on an arbitrary field whose degree-0 part must be the
/// unfolded principal field.
pub fn parametric_normal_form_field(field: &ParamVField, mode: Mode, sigma: i64) -> Result<ParametricNF> {
    let t = hz_type();
    let f0 = unfolded_principal_field();
    if !field.homogeneous_part(&t, 0).sub(&f0).is_zero() {
        return Err(QhError::Assumption(
            "degree-0 part must be (−y + eps x, x + eps y, delta z + (x^2+y^2)/2)".into(),
        ));
    }
    if field.qh_components(&t).keys().next().is_some_and(|&k| k < 0) {
        return Err(QhError::Assumption("field has terms of negative degree".into()));
    }
    let mut engine = NFEngine::new(hz_principal::<ParamScalar>(), mode, sigma).with_principal_field(f0);
    let injective = engine.operator(1)?.op.kernel().is_empty();
    if !injective {
        return Err(QhError::KernelHypothesis { degree: 1, dim: 1 });
    }
    let result = engine.run(field, 3, PreNormalization { nu: Poly::zero(2) })?;
    let g2 = result.term(2).expect("degree 2 recorded").clone();
    let (a1, b1, c1) = extract_coeffs(&g2);
    let coeffs = HZCoeffs {
        a1,
        b1,
        c1: (mode == Mode::Conjugation).then_some(c1),
    };
    let generators = [0, 1, 2].map(|i| result.records[i].generator.clone());
    let mu2 = result.records[1].mu.clone();
    Ok(ParametricNF {
        coeffs,
        generators,
        mu2,
        result,
    })
}

/// Closed-form `(a1, b1, c1)` through first order in the parameters.
pub fn hz_coefficient_formulas(input: &HZInput) -> HZCoeffs {
    let g = |n: &str| input.get(n);
    let r = |n: i64, d: i64| q(n, d);
    let (ap, app, bp, bpp) = (g("A'001"), g("A''001"), g("B'001"), g("B''001"));
    // Terms shared by the delta parts of a1 and b1.
    let cubic_shared = -r(1, 4) * g("A120") - r(3, 4) * g("A300") - r(3, 4) * g("B030") - r(1, 4) * g("B210");
    let quad_shared = -r(1, 4) * g("A020") * g("A110") - r(1, 4) * g("A110") * g("A200")
        + r(1, 4) * g("B020") * g("B110")
        + r(1, 4) * g("B110") * g("B200")
        - r(1, 2) * g("A020") * g("B020")
        + r(1, 2) * g("A200") * g("B200");

    let a1 = ParamScalar::new(
        r(1, 2) * g("A101") + r(1, 2) * g("B011"),
        r(1, 2) * &ap * g("A110") + &ap * g("B020") - r(1, 2) * &ap * g("C011") - g("A200") * &bp
            + r(1, 2) * &bp * g("C101")
            - r(1, 2) * &bp * g("B110"),
        cubic_shared.clone() + quad_shared.clone() + r(1, 2) * &app * g("A110") + &app * g("B020")
            - r(1, 2) * &app * g("C011")
            - g("A200") * &bpp
            + r(1, 2) * &bpp * g("C101")
            - r(1, 2) * &bpp * g("B110"),
    );

    let b1 = ParamScalar::new(
        g("C002"),
        &ap * g("C011") - &bp * g("C101"),
        cubic_shared - r(1, 2) * g("C021") - r(1, 2) * g("C201") + quad_shared
            - r(1, 2) * g("A020") * g("C011")
            - r(1, 2) * g("A200") * g("C011")
            + r(1, 2) * g("B020") * g("C101")
            + r(1, 2) * g("B200") * g("C101")
            + &app * g("C011")
            - &bpp * g("C101"),
    );

    let sq = |n: &str| g(n) * g(n);
    let c1 = ParamScalar::new(
        -r(1, 2) * g("A011") + r(1, 2) * g("B101"),
        -(&ap * g("A020")) + r(1, 2) * &ap * g("B110") - r(1, 2) * &ap * g("C101") + r(1, 2) * g("A110") * &bp
            - r(1, 2) * &bp * g("C011")
            - &bp * g("B200"),
        r(3, 4) * g("A030") + r(1, 4) * g("A210") - r(1, 4) * g("B120") - r(3, 4) * g("B300")
            + r(5, 6) * sq("A020")
            + r(1, 12) * sq("A110")
            + r(1, 3) * sq("A200")
            + r(1, 3) * sq("B020")
            + r(1, 12) * sq("B110")
            + r(5, 6) * sq("B200")
            - r(1, 12) * g("A020") * g("B110")
            - r(1, 12) * g("A110") * g("B200")
            + r(5, 6) * g("A020") * g("A200")
            - r(5, 12) * g("A110") * g("B020")
            - r(5, 12) * g("A200") * g("B110")
            + r(5, 6) * g("B020") * g("B200")
            - &app * g("A020")
            + r(1, 2) * &app * g("B110")
            - r(1, 2) * &app * g("C101")
            + r(1, 2) * g("A110") * &bpp
            - r(1, 2) * &bpp * g("C011")
            - &bpp * g("B200"),
    );
    HZCoeffs { a1, b1, c1: Some(c1) }
}

/// Closed-form degree-1 generator at `eps = delta = 0`.
pub fn u1_closed_form(input: &HZInput) -> VField<Rational> {
    let g = |n: &str| input.get(n);
    let r = |n: i64, d: i64| q(n, d);
    let p = |s: &[(Rational, [u32; 3])]| {
        let mut out = Poly::zero(3);
        for (c, e) in s {
            out.add_term(Monomial(*e), c.clone());
        }
        out
    };
    let p1 = p(&[
        (
            -(r(1, 3) * g("A110") + r(2, 3) * g("B020") + r(1, 3) * g("B200")),
            [2, 0, 0],
        ),
        (
            r(2, 3) * g("A200") + r(1, 3) * g("B110") - r(2, 3) * g("A020"),
            [1, 1, 0],
        ),
        (
            r(1, 3) * g("A110") - r(1, 3) * g("B020") - r(2, 3) * g("B200"),
            [0, 2, 0],
        ),
    ]);
    let q1 = p(&[
        (
            r(2, 3) * g("A020") + r(1, 3) * g("A200") - r(1, 3) * g("B110"),
            [2, 0, 0],
        ),
        (
            r(2, 3) * g("B200") - r(1, 3) * g("A110") - r(2, 3) * g("B020"),
            [1, 1, 0],
        ),
        (
            r(2, 3) * g("A200") + r(1, 3) * g("B110") + r(1, 3) * g("A020"),
            [0, 2, 0],
        ),
    ]);
    let r1 = p(&[
        (-g("C011"), [1, 0, 1]),
        (g("C101"), [0, 1, 1]),
        (
            r(1, 2) * g("C101")
                - r(2, 9) * g("B110")
                - r(2, 3) * g("C030")
                - r(2, 9) * g("A020")
                - r(7, 9) * g("A200")
                - r(1, 3) * g("C210"),
            [3, 0, 0],
        ),
        (
            g("C300") + r(1, 2) * g("C011") - r(2, 3) * g("B020") - r(1, 3) * g("B200") - r(1, 3) * g("A110"),
            [2, 1, 0],
        ),
        (
            r(1, 2) * g("C101") - r(2, 3) * g("A200") - r(1, 3) * g("B110") - r(1, 3) * g("A020") - g("C030"),
            [1, 2, 0],
        ),
        (
            r(1, 2) * g("C011") - r(7, 9) * g("B020") + r(1, 3) * g("C120") - r(2, 9) * g("B200") + r(2, 3) * g("C300")
                - r(2, 9) * g("A110"),
            [0, 3, 0],
        ),
    ]);
    VField::from_array([p1, q1, r1])
}

/// Linear and quadratic data of the versal family
/// `(−(1+α2) y + α1 x, (1+β2) x + β1 y, h + γ1 x + γ2 y + γ3 z + γ4 xy + γ5 x^2 + γ6 y^2)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct VersalParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma: [f64; 6],
}

impl VersalParams {
    pub fn field(&self) -> VField<f64> {
        let x = Poly::<f64>::var(3, 0);
        let y = Poly::<f64>::var(3, 1);
        let z = Poly::<f64>::var(3, 2);
        let g = self.gamma;
        let third = x
            .pow(2)
            .scale(&(0.5 + g[4]))
            .add(&y.pow(2).scale(&(0.5 + g[5])))
            .add(&x.scale(&g[0]))
            .add(&y.scale(&g[1]))
            .add(&z.scale(&g[2]))
            .add(&x.mul(&y).scale(&g[3]));
        VField::from_array([
            y.scale(&-(1.0 + self.alpha2)).add(&x.scale(&self.alpha1)),
            x.scale(&(1.0 + self.beta2)).add(&y.scale(&self.beta1)),
            third,
        ])
    }
}

/// Every intermediate quantity of the reduction to the miniversal family.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct MiniversalReduction {
    pub epsilon: f64,
    pub delta: f64,
    /// `z`-shift of the first step.
    pub d_tilde: [f64; 2],
    pub a_tilde1: f64,
    /// Mixing coefficient of the second step.
    pub mix: f64,
    pub a_hat1: f64,
    pub eps_hat: f64,
    pub c_hat: [f64; 2],
    pub gamma_hat4: f64,
    /// Shear and scale of the last step.
    pub d_hat: [f64; 2],
    pub scale: f64,
    /// Max coefficient deviation of the final field from the miniversal form.
    pub residual: f64,
}

const CHAIN_TOL: f64 = 1e-12;

fn coeff3(p: &Poly<f64>, e: [u32; 3]) -> f64 {
    p.coeff(&Monomial(e))
}

fn linear3(comps: [[f64; 3]; 3]) -> [Poly<f64>; 3] {
    comps.map(|row| {
        let mut p = Poly::zero(3);
        for (i, c) in row.iter().enumerate() {
            if *c != 0.0 {
                p.add_term(Monomial::var(i), *c);
            }
        }
        p
    })
}

fn check_form(step: &str, value: f64) -> Result<()> {
    if value.abs() > CHAIN_TOL {
        return Err(QhError::Numeric(format!("{step}: off-form coefficient {value:e}")));
    }
    Ok(())
}

/// Reduces the versal family to `(−y + eps x, x + eps y, delta z + h)` by a
/// `z`-shift with anisotropic rescale, a symmetric linear mix, a time
/// rescale and a final shear of `z`, checking each intermediate form.
pub fn miniversal_reduce(p: &VersalParams) -> Result<MiniversalReduction> {
    let (a1, a2, b1, b2) = (p.alpha1, p.alpha2, p.beta1, p.beta2);
    let g = p.gamma;
    if 1.0 + a2 <= 0.0 || 1.0 + b2 <= 0.0 {
        return Err(QhError::Domain("need 1 + alpha2 > 0 and 1 + beta2 > 0".into()));
    }
    let field = p.field();

    // Step 1: remove the linear x, y terms of the z equation.
    let det = (a1 - g[2]) * (b1 - g[2]) + (1.0 + a2) * (1.0 + b2);
    if det.abs() < CHAIN_TOL {
        return Err(QhError::Domain("z-shift system is singular".into()));
    }
    let d1 = ((g[2] - b1) * g[0] + (1.0 + b2) * g[1]) / det;
    let d2 = (-(1.0 + a2) * g[0] + (g[2] - a1) * g[1]) / det;
    let (s1, s2) = ((1.0 + a2).sqrt(), (1.0 + b2).sqrt());
    let fwd = linear3([[1.0 / s1, 0.0, 0.0], [0.0, 1.0 / s2, 0.0], [d1, d2, 1.0]]);
    let inv = linear3([[s1, 0.0, 0.0], [0.0, s2, 0.0], [-d1 * s1, -d2 * s2, 1.0]]);
    let f1 = change_coordinates(&field, &fwd, &inv)?;
    let at1 = s1 * s2;
    check_form("z-shift", coeff3(f1.comp(2), [1, 0, 0]))?;
    check_form("z-shift", coeff3(f1.comp(2), [0, 1, 0]))?;

    // Step 2: balance the diagonal of the planar linear part with the small
    // root of a^2 (α1−β1) + 4 ã1 a + (α1−β1) = 0.
    let diff = a1 - b1;
    // Rationalized so that no cancellation occurs; vanishes at α1 = β1.
    let disc = 4.0 * at1 * at1 - diff * diff;
    if disc < 0.0 {
        return Err(QhError::Domain("planar linear part has real eigenvalues".into()));
    }
    let mix = -diff / (2.0 * at1 + disc.sqrt());
    let one_m = 1.0 - mix * mix;
    let fwd = linear3([[1.0, mix, 0.0], [mix, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    let inv = linear3([
        [1.0 / one_m, -mix / one_m, 0.0],
        [-mix / one_m, 1.0 / one_m, 0.0],
        [0.0, 0.0, 1.0],
    ]);
    let f2 = change_coordinates(&f1, &fwd, &inv)?;
    let eps_hat = coeff3(f2.comp(0), [1, 0, 0]);
    let a_hat1 = coeff3(f2.comp(1), [1, 0, 0]);
    check_form("mix", coeff3(f2.comp(1), [0, 1, 0]) - eps_hat)?;
    check_form("mix", coeff3(f2.comp(0), [0, 1, 0]) + a_hat1)?;
    if a_hat1 <= 0.0 {
        return Err(QhError::Domain("rotation speed must stay positive".into()));
    }
    let c_hat = [coeff3(f2.comp(2), [2, 0, 0]), coeff3(f2.comp(2), [0, 2, 0])];
    let gamma_hat4 = coeff3(f2.comp(2), [1, 1, 0]);
    let gamma3 = coeff3(f2.comp(2), [0, 0, 1]);

    // Step 3: shear z to equalize x^2, y^2 and kill xy; rescale z and time.
    let e = 2.0 * eps_hat - gamma3;
    let den = e * e + 4.0 * a_hat1 * a_hat1;
    let dh1 = -(e * gamma_hat4 + 2.0 * (c_hat[0] - c_hat[1]) * a_hat1) / den;
    let dh2 = -(e * (c_hat[0] - c_hat[1]) - 2.0 * gamma_hat4 * a_hat1) / den;
    let scale = 2.0 * (e * e * c_hat[1] + e * gamma_hat4 * a_hat1 + 2.0 * (c_hat[0] + c_hat[1]) * a_hat1 * a_hat1)
        / (a_hat1 * den);
    if scale.abs() < CHAIN_TOL {
        return Err(QhError::Domain("quadratic drift degenerates".into()));
    }
    let x = Poly::<f64>::var(3, 0);
    let y = Poly::<f64>::var(3, 1);
    let z = Poly::<f64>::var(3, 2);
    let fwd = [
        x.clone(),
        y.clone(),
        z.add(&x.mul(&y).scale(&dh1))
            .add(&x.pow(2).scale(&dh2))
            .scale(&(1.0 / scale)),
    ];
    let inv = [
        x.clone(),
        y.clone(),
        z.scale(&scale).sub(&x.mul(&y).scale(&dh1)).sub(&x.pow(2).scale(&dh2)),
    ];
    let f3 = change_coordinates(&f2, &fwd, &inv)?.scale(&(1.0 / a_hat1));
    let epsilon = eps_hat / a_hat1;
    let delta = gamma3 / a_hat1;
    let target = VersalParams {
        alpha1: epsilon,
        beta1: epsilon,
        gamma: [0.0, 0.0, delta, 0.0, 0.0, 0.0],
        ..VersalParams::default()
    }
    .field();
    let residual = f3.sub(&target).max_abs();
    Ok(MiniversalReduction {
        epsilon,
        delta,
        d_tilde: [d1, d2],
        a_tilde1: at1,
        mix,
        a_hat1,
        eps_hat,
        c_hat,
        gamma_hat4,
        d_hat: [dh1, dh2],
        scale,
        residual,
    })
}
