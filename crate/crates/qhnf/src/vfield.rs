//! Polynomial vector fields and the Lie-calculus operations on them.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{QhError, Result};
use crate::qhpoly::{format_poly, Poly, QHType};
use crate::scalar::Scalar;

/// Tuple of 2 or 3 polynomial components sharing one arity.
///
/// A two-component field over three variables is a "partial lift": it acts
/// through the planar gradient only (see [`hamiltonian_field`]).
#[derive(Clone, PartialEq, Debug)]
pub struct VField<S> {
    comps: Vec<Poly<S>>,
}

impl<S: Scalar> VField<S> {
    pub fn new(comps: Vec<Poly<S>>) -> Result<Self> {
        if !(2..=3).contains(&comps.len()) {
            return Err(QhError::ArityMismatch(format!(
                "a field has 2 or 3 components, got {}",
                comps.len()
            )));
        }
        let a = comps[0].arity();
        if comps.iter().any(|c| c.arity() != a) {
            return Err(QhError::ArityMismatch("components differ in arity".into()));
        }
        if comps.len() > a {
            return Err(QhError::ArityMismatch("more components than variables".into()));
        }
        Ok(VField { comps })
    }

    pub fn from_array<const N: usize>(comps: [Poly<S>; N]) -> Self {
        Self::new(comps.to_vec()).expect("well-formed field")
    }

    pub fn zero(ncomps: usize, arity: usize) -> Self {
        VField {
            comps: vec![Poly::zero(arity); ncomps],
        }
    }

    pub fn arity(&self) -> usize {
        self.comps[0].arity()
    }

    pub fn ncomps(&self) -> usize {
        self.comps.len()
    }

    pub fn comp(&self, i: usize) -> &Poly<S> {
        &self.comps[i]
    }

    pub fn comps(&self) -> &[Poly<S>] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn negligible(&self) -> bool {
        self.comps.iter().all(|c| c.negligible())
    }

    fn zip(&self, other: &Self, f: impl Fn(&Poly<S>, &Poly<S>) -> Poly<S>) -> Self {
        assert_eq!(self.ncomps(), other.ncomps(), "component count mismatch");
        VField {
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> Self {
        self.map_comps(|c| c.neg())
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map_comps(|c| c.scale(s))
    }

    /// `mu * F`
    pub fn mul_poly(&self, mu: &Poly<S>) -> Self {
        self.map_comps(|c| c.mul(mu))
    }

    pub fn map_comps(&self, f: impl Fn(&Poly<S>) -> Poly<S>) -> Self {
        VField {
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> VField<T> {
        VField {
            comps: self.comps.iter().map(|c| c.map(f)).collect(),
        }
    }

    /// Appends `third` as the last component (`(X, third)`).
    pub fn with_third(&self, third: Poly<S>) -> Self {
        assert_eq!(self.ncomps(), 2, "with_third expects two components");
        let mut comps = self.comps.clone();
        comps.push(third);
        Self::new(comps).expect("three components over three variables")
    }

    /// `(X, 0)` for a planar-shaped field over three variables.
    pub fn with_zero_third(&self) -> Self {
        self.with_third(Poly::zero(self.arity()))
    }

    /// First two components.
    pub fn planar_part(&self) -> Self {
        VField {
            comps: self.comps[..2].to_vec(),
        }
    }

    pub fn lift3(&self) -> Self {
        self.map_comps(|c| c.lift3())
    }

    /// `F ∈ Q^t_k` iff component `j` lies in `P^t_{k + t_j}`.
    pub fn in_slice(&self, t: &QHType, k: i64) -> bool {
        self.comps
            .iter()
            .enumerate()
            .all(|(j, c)| c.in_slice(t, k + t.weight(j)))
    }

    /// Degree `k` of a homogeneous nonzero field.
    pub fn qh_degree(&self, t: &QHType) -> Result<i64> {
        let parts = self.qh_components(t);
        let mut keys = parts.keys();
        let first = *keys.next().ok_or(QhError::DegreeUndefined)?;
        if let Some(&last) = parts.keys().next_back() {
            if last != first {
                return Err(QhError::NotHomogeneous(first, last));
            }
        }
        Ok(first)
    }

    /// Homogeneous components `F_k` keyed by degree.
    pub fn qh_components(&self, t: &QHType) -> BTreeMap<i64, Self> {
        assert_eq!(t.arity(), self.arity(), "type arity must match field arity");
        let mut out: BTreeMap<i64, Self> = BTreeMap::new();
        for (j, c) in self.comps.iter().enumerate() {
            for (m, coef) in c.terms() {
                let k = t.degree(m) - t.weight(j);
                let entry = out.entry(k).or_insert_with(|| Self::zero(self.ncomps(), self.arity()));
                entry.comps[j].add_term(*m, coef.clone());
            }
        }
        out
    }

    pub fn homogeneous_part(&self, t: &QHType, k: i64) -> Self {
        VField {
            comps: self
                .comps
                .iter()
                .enumerate()
                .map(|(j, c)| c.homogeneous_part(t, k + t.weight(j)))
                .collect(),
        }
    }

    /// Keeps components of field-degree at most `max`.
    pub fn truncate(&self, t: &QHType, max: i64) -> Self {
        VField {
            comps: self
                .comps
                .iter()
                .enumerate()
                .map(|(j, c)| c.truncate(t, max + t.weight(j)))
                .collect(),
        }
    }

    /// `DF · G` restricted to the variables `G` has components for.
    pub fn jacobian_apply(&self, g: &Self) -> Self {
        assert_eq!(self.arity(), g.arity(), "field arity mismatch");
        self.map_comps(|c| directional(c, g))
    }

    /// Evaluates at a point.
    pub fn eval(&self, point: &[S]) -> Vec<S> {
        self.comps.iter().map(|c| c.eval(point)).collect()
    }

    /// Substitutes polynomials for the variables in every component.
    pub fn substitute(&self, subs: &[Poly<S>]) -> Self {
        self.map_comps(|c| c.substitute(subs))
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    pub fn display_with(&self, t: Option<&QHType>) -> String {
        let parts: Vec<String> = self.comps.iter().map(|c| format_poly(c, t)).collect();
        format!("({})", parts.join(", "))
    }
}

impl<S: Scalar> fmt::Display for VField<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(None))
    }
}

/// `∇p · G`, summing over the components of `G`.
fn directional<S: Scalar>(p: &Poly<S>, g: &VField<S>) -> Poly<S> {
    let mut acc = Poly::zero(p.arity());
    for (i, gi) in g.comps().iter().enumerate() {
        if gi.is_zero() {
            continue;
        }
        let d = p.partial(i);
        if !d.is_zero() {
            acc = acc.add(&d.mul(gi));
        }
    }
    acc
}

fn require_full<S: Scalar>(f: &VField<S>, what: &str) -> Result<()> {
    if f.ncomps() != f.arity() {
        return Err(QhError::ArityMismatch(format!(
            "{what}: expected {} components, got {}",
            f.arity(),
            f.ncomps()
        )));
    }
    Ok(())
}

/// `[P, F] = DP·F − DF·P`.
pub fn lie_bracket<S: Scalar>(p: &VField<S>, f: &VField<S>) -> Result<VField<S>> {
    if p.arity() != f.arity() || p.ncomps() != f.ncomps() {
        return Err(QhError::ArityMismatch("bracket operands differ in shape".into()));
    }
    require_full(p, "lie_bracket")?;
    Ok(p.jacobian_apply(f).sub(&f.jacobian_apply(p)))
}

/// `[P, F]` with every component truncated at field degree `max`; equals
/// `lie_bracket(p, f)?.truncate(t, max)` without forming the high terms.
pub fn lie_bracket_truncated<S: Scalar>(p: &VField<S>, f: &VField<S>, t: &QHType, max: i64) -> Result<VField<S>> {
    if p.arity() != f.arity() || p.ncomps() != f.ncomps() {
        return Err(QhError::ArityMismatch("bracket operands differ in shape".into()));
    }
    require_full(p, "lie_bracket")?;
    let apply = |a: &VField<S>, b: &VField<S>| -> Vec<Poly<S>> {
        (0..a.ncomps())
            .map(|j| {
                let cap = max + t.weight(j);
                (0..b.ncomps()).fold(Poly::zero(a.arity()), |acc, i| {
                    acc.add(&a.comp(j).partial(i).mul_truncated(b.comp(i), t, cap))
                })
            })
            .collect()
    };
    let (dp, df) = (apply(p, f), apply(f, p));
    VField::new(dp.iter().zip(&df).map(|(x, y)| x.sub(y)).collect())
}

/// `Σ ∂F_i/∂x_i` over the field's components.
pub fn divergence<S: Scalar>(f: &VField<S>) -> Poly<S> {
    f.comps()
        .iter()
        .enumerate()
        .fold(Poly::zero(f.arity()), |acc, (i, c)| acc.add(&c.partial(i)))
}

/// `F ∧ G = F1 G2 − F2 G1` for planar fields.
pub fn wedge<S: Scalar>(f: &VField<S>, g: &VField<S>) -> Result<Poly<S>> {
    if f.ncomps() != 2 || g.ncomps() != 2 {
        return Err(QhError::ArityMismatch("wedge is defined for planar fields".into()));
    }
    Ok(f.comp(0).mul(g.comp(1)).sub(&f.comp(1).mul(g.comp(0))))
}

/// `X_h = (−∂h/∂y, ∂h/∂x)`; for a three-variable `h` this is the partial
/// lift with two components.
pub fn hamiltonian_field<S: Scalar>(h: &Poly<S>) -> VField<S> {
    VField {
        comps: vec![h.partial(1).neg(), h.partial(0)],
    }
}

/// `∇μ · F` (planar gradient when `F` has two components).
pub fn lie_derivative<S: Scalar>(mu: &Poly<S>, f: &VField<S>) -> Result<Poly<S>> {
    if mu.arity() != f.arity() {
        return Err(QhError::ArityMismatch("lie_derivative operand arity".into()));
    }
    Ok(directional(mu, f))
}

/// Field in new coordinates `u = forward(x)` with inverse `x = inverse(u)`:
/// `(Dforward · F) ∘ inverse`.
pub fn change_coordinates<S: Scalar>(f: &VField<S>, forward: &[Poly<S>], inverse: &[Poly<S>]) -> Result<VField<S>> {
    let n = f.arity();
    if forward.len() != n || inverse.len() != n || f.ncomps() != n {
        return Err(QhError::ArityMismatch(
            "coordinate change needs one map per variable".into(),
        ));
    }
    let comps = forward
        .iter()
        .map(|phi| directional(phi, f).substitute(inverse))
        .collect();
    VField::new(comps)
}

/// `D0 = (t1 x, t2 y)` over `arity` variables.
pub fn planar_euler<S: Scalar>(t: &QHType, arity: usize) -> VField<S> {
    VField {
        comps: vec![
            Poly::var(arity, 0).scale(&S::from_int(t.weight(0))),
            Poly::var(arity, 1).scale(&S::from_int(t.weight(1))),
        ],
    }
}

/// Euler field `(t1 x, t2 y, t3 z)` of a spatial type.
pub fn euler_field<S: Scalar>(t: &QHType) -> VField<S> {
    let n = t.arity();
    VField {
        comps: (0..n)
            .map(|i| Poly::var(n, i).scale(&S::from_int(t.weight(i))))
            .collect(),
    }
}

/// The principal part `F_r = (X_h, f)` of type `t`, degree `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalPart<S> {
    pub h: Poly<S>,
    pub f: Poly<S>,
    pub t: QHType,
    pub r: i64,
}

impl<S: Scalar> PrincipalPart<S> {
    /// Validates `h ∈ P_{r+|t̂|}`, `f ∈ P_{r+t3}`, both vanishing at 0.
    pub fn new(h: Poly<S>, f: Poly<S>, t: QHType, r: i64) -> Result<Self> {
        if t.arity() != 3 {
            return Err(QhError::InvalidType("principal part needs three weights".into()));
        }
        if h.arity() != 2 || f.arity() != 2 {
            return Err(QhError::ArityMismatch("h and f must be planar".into()));
        }
        let tp = t.planar_part();
        if h.is_zero() {
            return Err(QhError::Assumption("Hamiltonian h is zero".into()));
        }
        if !h.in_slice(&tp, r + t.planar_modulus()) {
            return Err(QhError::Assumption(format!(
                "h must be quasi-homogeneous of degree {}",
                r + t.planar_modulus()
            )));
        }
        if !f.in_slice(&tp, r + t.weight(2)) {
            return Err(QhError::Assumption(format!(
                "f must be quasi-homogeneous of degree {}",
                r + t.weight(2)
            )));
        }
        if r + t.planar_modulus() <= 0 || r + t.weight(2) <= 0 && !f.is_zero() {
            return Err(QhError::Assumption("h and f must vanish at the origin".into()));
        }
        Ok(PrincipalPart { h, f, t, r })
    }

    /// `(X_h, f)` as a spatial field.
    pub fn field(&self) -> VField<S> {
        hamiltonian_field(&self.h.lift3()).with_third(self.f.lift3())
    }

    pub fn planar_type(&self) -> QHType {
        self.t.planar_part()
    }

    /// Reads `(X_h, f)` off a homogeneous degree-`r` field.
    pub fn from_field(fr: &VField<S>, t: &QHType, r: i64) -> Result<Self> {
        if fr.ncomps() != 3 || fr.arity() != 3 {
            return Err(QhError::ArityMismatch("principal field must be spatial".into()));
        }
        if !fr.in_slice(t, r) {
            return Err(QhError::Assumption(format!(
                "principal part is not quasi-homogeneous of degree {r}"
            )));
        }
        let planar = VField::new(vec![fr.comp(0).restrict2()?, fr.comp(1).restrict2()?])
            .map_err(|_| QhError::Assumption("principal part depends on z".into()))?;
        let f = fr
            .comp(2)
            .restrict2()
            .map_err(|_| QhError::Assumption("drift depends on z".into()))?;
        let tp = t.planar_part();
        let k = r + tp.planar_modulus();
        let d0 = planar_euler::<S>(&tp, 2);
        let kk = S::from_int(k);
        let inv = kk
            .inverse()
            .ok_or_else(|| QhError::Assumption("degenerate principal degree".into()))?;
        let h = wedge(&d0, &planar)?.scale(&inv);
        if !divergence(&planar).negligible() || !hamiltonian_field(&h).sub(&planar).negligible() {
            return Err(QhError::Assumption("planar principal part is not Hamiltonian".into()));
        }
        Self::new(h, f, t.clone(), r)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> PrincipalPart<T> {
        PrincipalPart {
            h: self.h.map(f),
            f: self.f.map(f),
            t: self.t.clone(),
            r: self.r,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn p3(s: &str) -> Poly<Rational> {
        Poly::parse(s, &["x", "y", "z"]).unwrap()
    }
    fn p2(s: &str) -> Poly<Rational> {
        Poly::parse(s, &["x", "y"]).unwrap()
    }
    fn f3(a: &str, b: &str, c: &str) -> VField<Rational> {
        VField::from_array([p3(a), p3(b), p3(c)])
    }

    #[test]
    fn euler_commutes_with_principal() {
        let t = QHType::spatial(1, 1, 2);
        let e = euler_field::<Rational>(&t);
        let f0 = f3("-y", "x", "1/2 x^2 + 1/2 y^2");
        assert!(lie_bracket(&e, &f0).unwrap().is_zero());
        assert!(lie_bracket(&f0, &f0).unwrap().is_zero());
        assert!(divergence(&f0).is_zero());
    }

    #[test]
    fn wedge_examples() {
        let t = QHType::planar(1, 1);
        let d0 = planar_euler::<Rational>(&t, 2);
        assert!(wedge(&d0, &d0).unwrap().is_zero());
        let rot = VField::from_array([p2("-y"), p2("x")]);
        assert_eq!(wedge(&d0, &rot).unwrap(), p2("x^2 + y^2"));
        assert!(wedge(&f3("x", "y", "z"), &f3("x", "y", "z")).is_err());
        assert_eq!(divergence(&d0), p2("2"));
    }

    #[test]
    fn hamiltonian_examples() {
        let h = p2("1/2 x^2 + 1/2 y^2");
        assert_eq!(hamiltonian_field(&h), VField::from_array([p2("-y"), p2("x")]));
        assert!(hamiltonian_field(&p2("3")).is_zero());
        assert!(lie_derivative(&h, &hamiltonian_field(&h)).unwrap().is_zero());
        let f0 = f3("-y", "x", "1/2 x^2 + 1/2 y^2");
        assert_eq!(lie_derivative(&p3("z"), &f0).unwrap(), p3("1/2 x^2 + 1/2 y^2"));
    }

    #[test]
    fn qh_membership() {
        let t = QHType::spatial(1, 1, 2);
        let f0 = f3("-y", "x", "1/2 x^2 + 1/2 y^2");
        assert!(f0.in_slice(&t, 0));
        assert_eq!(f0.qh_degree(&t), Ok(0));
        let mixed = f3("x^2", "0", "0").add(&f0);
        assert!(mixed.qh_degree(&t).is_err());
        assert_eq!(mixed.qh_components(&t).len(), 2);
    }

    #[test]
    fn principal_from_field() {
        let t = QHType::spatial(1, 1, 2);
        let pp = PrincipalPart::from_field(&f3("-y", "x", "1/2 x^2 + 1/2 y^2"), &t, 0).unwrap();
        assert_eq!(pp.h, p2("1/2 x^2 + 1/2 y^2"));
        assert!(PrincipalPart::from_field(&f3("x", "y", "x^2"), &t, 0).is_err());
    }
}
