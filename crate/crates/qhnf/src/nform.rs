//! Degree-by-degree normal forms under conjugation or orbital equivalence.
//!
//! With generator `U = Σ U_k` and time rescaling `1 + σ mu`, the transformed
//! field is the Lie series `G = Σ_n ad_U^n((1+σ mu) F)/n!`, `ad_U X = [X, U]`.
//! At degree `k` the current term `P_k = G_{r+k}` is written as
//! `[U_k, F_r] − nu F_r + residual`, the residual lying on cokernel
//! coordinates, and `mu_k = σ nu`.  Each step leaves lower degrees untouched,
//! so replaying the accumulated `(U, mu)` on the input reproduces the result.

use std::collections::BTreeMap;

use crate::error::{QhError, Result};
use crate::homolog::{
    a0, op_lie, op_lie_planar, op_lie_restricted, planar_cokernel, HomologicalOperator, Mode, PlanarCokernel,
};
use crate::linalg::Echelon;
use crate::qhpoly::{graded_basis, Monomial, Poly, QHType};
use crate::scalar::Scalar;
use crate::split::{Split4, Splitter};
use crate::vfield::{lie_bracket_truncated, PrincipalPart, VField};

/// Outcome of the hypothesis checks on a principal part.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct AssumptionReport {
    /// `h` has only simple factors over the complex numbers.
    pub squarefree: bool,
    /// The drift has no component in the range of the planar Lie derivative.
    pub drift_reduced: bool,
    pub messages: Vec<String>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.squarefree && self.drift_reduced
    }
}

/// Coefficients of `p(x, 1)` by ascending power of `x`.
fn dehomogenize<S: Scalar>(p: &Poly<S>) -> Vec<S> {
    let deg = p.terms().map(|(m, _)| m.exp(0) as usize).max().unwrap_or(0);
    let mut v = vec![S::zero(); deg + 1];
    for (m, c) in p.terms() {
        let i = m.exp(0) as usize;
        v[i] = v[i].clone() + c.clone();
    }
    trim(v)
}

fn trim<S: Scalar>(mut v: Vec<S>) -> Vec<S> {
    while v.last().is_some_and(|c| c.negligible()) {
        v.pop();
    }
    v
}

fn derivative<S: Scalar>(v: &[S]) -> Vec<S> {
    trim(
        v.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.clone() * S::from_int(i as i64))
            .collect(),
    )
}

/// Remainder of `a` modulo `b` (`b` nonzero with unit leading coefficient).
fn rem<S: Scalar>(a: &[S], b: &[S]) -> Option<Vec<S>> {
    let mut a = a.to_vec();
    let lead_inv = b.last()?.inverse()?;
    while a.len() >= b.len() {
        let shift = a.len() - b.len();
        let c = a.last().expect("nonempty").clone() * lead_inv.clone();
        for (i, bi) in b.iter().enumerate() {
            a[shift + i] = a[shift + i].clone() - c.clone() * bi.clone();
        }
        a.pop();
        a = trim(a);
    }
    Some(a)
}

/// Degree of `gcd(a, b)` by Euclid's algorithm.
fn gcd_degree<S: Scalar>(a: &[S], b: &[S]) -> Option<usize> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = rem(&a, &b)?;
        a = b;
        b = r;
    }
    Some(a.len().saturating_sub(1))
}

/// Squarefree test for a quasi-homogeneous planar `h`: `y^2` must not
/// divide `h` and `h(x, 1)` must be coprime to its derivative.
pub fn is_squarefree<S: Scalar>(h: &Poly<S>) -> bool {
    if h.is_zero() {
        return false;
    }
    if h.terms().all(|(m, _)| m.exp(1) >= 2) {
        return false;
    }
    let u = dehomogenize(h);
    let du = derivative(&u);
    if du.is_empty() {
        return true;
    }
    gcd_degree(&u, &du) == Some(0)
}

pub fn check_assumptions<S: Scalar>(pp: &PrincipalPart<S>) -> AssumptionReport {
    let mut messages = Vec::new();
    let squarefree = is_squarefree(&pp.h);
    if !squarefree {
        messages.push("h has a repeated factor".to_string());
    }
    let drift_reduced = match PlanarCokernel::new(pp, pp.r + pp.t.weight(2)).and_then(|c| c.range_part(&pp.f)) {
        Ok(part) => part.negligible(),
        Err(e) => {
            messages.push(format!("drift check failed: {e}"));
            false
        }
    };
    if !drift_reduced {
        messages.push("drift has a component in the range of the planar Lie derivative".to_string());
    }
    AssumptionReport {
        squarefree,
        drift_reduced,
        messages,
    }
}

/// Problem statement for the general engine.
#[derive(Clone, Debug)]
pub struct NFProblem<S> {
    pub field: VField<S>,
    pub principal: PrincipalPart<S>,
    pub max_degree: i64,
    pub mode: Mode,
}

impl<S: Scalar> NFProblem<S> {
    /// Reads the principal part off the degree-`r` component of `field`.
    pub fn from_field(field: VField<S>, t: QHType, r: i64, max_degree: i64, mode: Mode) -> Result<Self> {
        if field.ncomps() != 3 || field.arity() != 3 {
            return Err(QhError::ArityMismatch("normal forms need a spatial field".into()));
        }
        if let Some((&low, _)) = field.qh_components(&t).iter().next() {
            if low < r {
                return Err(QhError::Assumption(format!(
                    "field has terms of degree {low} below r = {r}"
                )));
            }
        }
        let principal = PrincipalPart::from_field(&field.homogeneous_part(&t, r), &t, r)?;
        Ok(NFProblem {
            field,
            principal,
            max_degree,
            mode,
        })
    }
}

/// The shift `z̃ = z − nu(x, y)` used to reduce the drift.
#[derive(Clone, Debug, PartialEq)]
pub struct PreNormalization<S> {
    pub nu: Poly<S>,
}

impl<S: Scalar> PreNormalization<S> {
    /// Field in the coordinates `(x, y, z − nu)`.
    pub fn apply(&self, field: &VField<S>) -> VField<S> {
        let nu3 = self.nu.lift3();
        let third = field
            .comp(2)
            .sub(&nu3.partial(0).mul(field.comp(0)))
            .sub(&nu3.partial(1).mul(field.comp(1)));
        let shifted = VField::from_array([field.comp(0).clone(), field.comp(1).clone(), third]);
        let subs = [Poly::var(3, 0), Poly::var(3, 1), Poly::var(3, 2).add(&nu3)];
        shifted.substitute(&subs)
    }
}

/// Removes the range part of the drift; identity when already reduced.
pub fn pre_normalize<S: Scalar>(problem: &NFProblem<S>) -> Result<(NFProblem<S>, PreNormalization<S>)> {
    let pp = &problem.principal;
    let cok = PlanarCokernel::new(pp, pp.r + pp.t.weight(2))?;
    let (nu, _) = cok.decompose(&pp.f)?;
    let shift = PreNormalization { nu };
    if shift.nu.is_zero() {
        return Ok((problem.clone(), shift));
    }
    let field = shift.apply(&problem.field);
    let out = NFProblem::from_field(
        field.truncate(&pp.t, pp.r + problem.max_degree),
        pp.t.clone(),
        pp.r,
        problem.max_degree,
        problem.mode,
    )?;
    Ok((out, shift))
}

/// `Σ_n ad_U^n((1 + σ mu) F)/n!` truncated at degree `max`.
pub fn lie_series<S: Scalar>(
    field: &VField<S>,
    generator: &VField<S>,
    mu: &Poly<S>,
    sigma: i64,
    t: &QHType,
    max: i64,
) -> Result<VField<S>> {
    let rescale = Poly::one(3).add(&mu.scale(&S::from_int(sigma)));
    let mut term = field.mul_poly(&rescale).truncate(t, max);
    let mut total = term.clone();
    if generator.is_zero() {
        return Ok(total);
    }
    let low_f = field.qh_components(t).keys().next().copied().unwrap_or(max);
    let low_u = generator.qh_components(t).keys().next().copied().unwrap_or(1).max(1);
    let depth = ((max - low_f).max(0) / low_u) + 1;
    for n in 1..=depth {
        term = lie_bracket_truncated(&term, generator, t, max)?;
        if term.is_zero() {
            break;
        }
        term = term.scale(&S::ratio(1, n));
        total = total.add(&term);
    }
    Ok(total)
}

/// What the engine recorded at one degree.
#[derive(Clone, Debug)]
pub struct DegreeRecord<S> {
    pub degree: i64,
    /// Surviving term `G_{r+k}`.
    pub term: VField<S>,
    pub generator: VField<S>,
    pub mu: Poly<S>,
    pub split: Split4<S>,
    /// The term lies on the operator's cokernel coordinates.
    pub certified: bool,
}

#[derive(Clone, Debug)]
pub struct NFResult<S> {
    pub principal: PrincipalPart<S>,
    pub mode: Mode,
    pub sigma: i64,
    pub max_degree: i64,
    pub shift: PreNormalization<S>,
    pub records: Vec<DegreeRecord<S>>,
    /// `G` through degree `r + N`.
    pub normal_form: VField<S>,
    pub generator: VField<S>,
    pub mu: Poly<S>,
}

impl<S: Scalar> NFResult<S> {
    pub fn term(&self, k: i64) -> Option<&VField<S>> {
        self.records.iter().find(|r| r.degree == k).map(|r| &r.term)
    }

    /// Re-applies the recorded transformation to `original`.
    pub fn replay(&self, original: &VField<S>) -> Result<VField<S>> {
        let t = &self.principal.t;
        let top = self.principal.r + self.max_degree;
        let field = self.shift.apply(original).truncate(t, top);
        lie_series(&field, &self.generator, &self.mu, self.sigma, t, top)
    }
}

/// Reduction engine bound to one principal part.
#[derive(Debug)]
pub struct NFEngine<S> {
    splitter: Splitter<S>,
    principal_field: Option<VField<S>>,
    mode: Mode,
    sigma: i64,
    operators: BTreeMap<i64, HomologicalOperator<S>>,
}

impl<S: Scalar> NFEngine<S> {
    /// `sigma = +1` rescales time by `1 + mu`, `-1` by `1 − mu`.
    pub fn new(principal: PrincipalPart<S>, mode: Mode, sigma: i64) -> Self {
        NFEngine {
            splitter: Splitter::new(principal),
            principal_field: None,
            mode,
            sigma,
            operators: BTreeMap::new(),
        }
    }

    /// Uses `field` (in `Q_r`) as the operator's principal field while
    /// splitting and cokernels stay those of the principal part.
    pub fn with_principal_field(mut self, field: VField<S>) -> Self {
        self.principal_field = Some(field);
        self.operators.clear();
        self
    }

    pub fn splitter(&self) -> &Splitter<S> {
        &self.splitter
    }

    pub fn operator(&mut self, k: i64) -> Result<&HomologicalOperator<S>> {
        if !self.operators.contains_key(&k) {
            let op = HomologicalOperator::build(&self.splitter, k, self.mode, self.principal_field.as_ref())?;
            self.operators.insert(k, op);
        }
        Ok(&self.operators[&k])
    }

    /// The restricted operator at field degree `k` must be injective.
    pub fn check_kernel(&self, k: i64) -> Result<()> {
        let pp = self.splitter.principal();
        let n = k + pp.t.planar_modulus();
        let op = op_lie_restricted(&self.splitter, n, &a0::<S>(pp, k))?;
        let dim = op.op.kernel().len();
        if dim > 0 {
            return Err(QhError::KernelHypothesis { degree: k, dim });
        }
        Ok(())
    }

    /// Runs degrees `1..=N` on `field`, which must already be pre-normalized.
    pub fn run(&mut self, field: &VField<S>, max_degree: i64, shift: PreNormalization<S>) -> Result<NFResult<S>> {
        let pp = self.splitter.principal().clone();
        let t = pp.t.clone();
        let r = pp.r;
        let field = field.truncate(&t, r + max_degree);
        let mut generator = VField::zero(3, 3);
        let mut mu = Poly::zero(3);
        let mut records = Vec::new();
        for k in 1..=max_degree {
            self.check_kernel(k)?;
            let g = lie_series(&field, &generator, &mu, self.sigma, &t, r + k)?;
            let pk = g.homogeneous_part(&t, r + k);
            let sigma = self.sigma;
            let op = self.operator(k)?.clone();
            let sol = op.solve(&self.splitter, &pk)?;
            let coords = op.codomain.coords(&sol.residual)?;
            let certified = op.certifies(&coords);
            let mu_k = sol.nu.scale(&S::from_int(sigma));
            generator = generator.add(&sol.generator);
            mu = mu.add(&mu_k);
            records.push(DegreeRecord {
                degree: k,
                term: sol.residual.assemble(&pp),
                generator: sol.generator,
                mu: mu_k,
                split: sol.residual,
                certified,
            });
        }
        let normal_form = lie_series(&field, &generator, &mu, self.sigma, &t, r + max_degree)?;
        Ok(NFResult {
            principal: pp,
            mode: self.mode,
            sigma: self.sigma,
            max_degree,
            shift,
            records,
            normal_form,
            generator,
            mu,
        })
    }
}

/// Full pipeline: assumption gate, drift reduction, degree loop.
pub fn normal_form<S: Scalar>(problem: &NFProblem<S>) -> Result<NFResult<S>> {
    let report = check_assumptions(&problem.principal);
    if !report.squarefree {
        return Err(QhError::Assumption("h must be squarefree".into()));
    }
    let (reduced, shift) = pre_normalize(problem)?;
    let report = check_assumptions(&reduced.principal);
    if !report.passed() {
        return Err(QhError::Assumption(report.messages.join("; ")));
    }
    let mut engine = NFEngine::new(reduced.principal.clone(), reduced.mode, 1);
    engine.run(&reduced.field, reduced.max_degree, shift)
}

/// One summand of the closed-form cokernel of `ℓ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorPiece<S> {
    /// Power of `z` multiplying the planar part.
    pub z_power: u32,
    /// `"full"`, `"cor"` or `"v"`.
    pub kind: &'static str,
    pub basis: Vec<Poly<S>>,
}

/// Closed-form complement of `Range(ℓ)` in `P^t_{r+k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorStructure<S> {
    pub k1: i64,
    pub k2: i64,
    pub pieces: Vec<CorPiece<S>>,
}

impl<S: Scalar> CorStructure<S> {
    pub fn dim(&self) -> usize {
        self.pieces.iter().map(|p| p.basis.len()).sum()
    }

    pub fn basis(&self) -> Vec<Poly<S>> {
        self.pieces.iter().flat_map(|p| p.basis.iter().cloned()).collect()
    }
}

/// Complement of `Range(ℓ̂_m) ⊕ f Ker(ℓ̂_{m−t3})` in `P^t̂_m`, by non-pivot
/// monomials.
pub fn v_complement<S: Scalar>(pp: &PrincipalPart<S>, m: i64) -> Result<Vec<Poly<S>>> {
    let tp = pp.t.planar_part();
    let slice = graded_basis(&tp, m);
    let mut vectors: Vec<Vec<S>> = op_lie_planar(pp, m - pp.r)?.op.matrix().columns().to_vec();
    for kv in op_lie_planar(pp, m - pp.t.weight(2) - pp.r)?.kernel_polys() {
        vectors.push(slice.coords(&pp.f.mul(&kv))?);
    }
    let scan: Vec<usize> = (0..slice.dim()).rev().collect();
    let e = Echelon::from_vectors(slice.dim(), &scan, &vectors);
    Ok(e.non_pivots()
        .into_iter()
        .map(|i| Poly::monomial(2, slice.basis[i], S::one()))
        .collect())
}

/// Direct-sum description `z^{k1+1} P ⊕ z^{k1} Cor(ℓ̂_{r+k2}) ⊕ Σ_{l<k1} z^l V`
/// with `k = k1 t3 + k2`.
pub fn cor_structure<S: Scalar>(pp: &PrincipalPart<S>, k: i64) -> Result<CorStructure<S>> {
    let t3 = pp.t.weight(2);
    let (k1, k2) = (k.div_euclid(t3), k.rem_euclid(t3));
    let tp = pp.t.planar_part();
    let lift = |l: i64, p: &Poly<S>| Poly::from_z_slice(l as u32, p);
    let mut pieces = Vec::new();
    let mut l = k1 + 1;
    while pp.r + k - l * t3 >= 0 {
        let basis = graded_basis(&tp, pp.r + k - l * t3)
            .basis
            .iter()
            .map(|m| lift(l, &Poly::monomial(2, *m, S::one())))
            .collect();
        pieces.push(CorPiece {
            z_power: l as u32,
            kind: "full",
            basis,
        });
        l += 1;
    }
    if k1 >= 0 {
        let basis = planar_cokernel(pp, pp.r + k2)?.iter().map(|p| lift(k1, p)).collect();
        pieces.push(CorPiece {
            z_power: k1 as u32,
            kind: "cor",
            basis,
        });
    }
    for l in 0..k1.max(0) {
        let basis = v_complement(pp, pp.r + k - l * t3)?
            .iter()
            .map(|p| lift(l, p))
            .collect();
        pieces.push(CorPiece {
            z_power: l as u32,
            kind: "v",
            basis,
        });
    }
    Ok(CorStructure { k1, k2, pieces })
}

/// True when `basis` complements `Range(ℓ)` in `P^t_{r+k}`.
pub fn complements_lie_range<S: Scalar>(pp: &PrincipalPart<S>, k: i64, basis: &[Poly<S>]) -> Result<bool> {
    let op = op_lie(pp, k)?;
    let mut e = Echelon::from_vectors(
        op.codomain.dim(),
        &(0..op.codomain.dim()).collect::<Vec<_>>(),
        op.op.matrix().columns(),
    );
    let rank = e.rank();
    for b in basis {
        if !e.insert(&op.codomain.coords(b)?) {
            return Ok(false);
        }
    }
    Ok(rank + basis.len() == op.codomain.dim())
}

/// Monomial shape of every term of a field: `(component, monomial)`.
pub fn term_shapes<S: Scalar>(f: &VField<S>) -> Vec<(usize, Monomial)> {
    let mut out = Vec::new();
    for (j, c) in f.comps().iter().enumerate() {
        for (m, coef) in c.terms() {
            if !coef.negligible() {
                out.push((j, *m));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn p2(s: &str) -> Poly<Rational> {
        Poly::parse(s, &["x", "y"]).unwrap()
    }

    fn hz() -> PrincipalPart<Rational> {
        let h = p2("1/2 x^2 + 1/2 y^2");
        PrincipalPart::new(h.clone(), h, QHType::spatial(1, 1, 2), 0).unwrap()
    }

    #[test]
    fn squarefree_examples() {
        assert!(is_squarefree(&p2("1/2 x^2 + 1/2 y^2")));
        assert!(!is_squarefree(&p2("x^2 y^2")));
        assert!(!is_squarefree(&p2("x^2 + 2 x y + y^2")));
        assert!(is_squarefree(&p2("x y")));
        assert!(is_squarefree(&p2("y^2 - x^3")));
    }

    #[test]
    fn hopf_zero_passes_checks() {
        let r = check_assumptions(&hz());
        assert!(r.passed(), "{:?}", r.messages);
    }

    #[test]
    fn cor_structure_hopf_zero() {
        let pp = hz();
        for k in 0..=8 {
            let c = cor_structure(&pp, k).unwrap();
            let cok = op_lie(&pp, k).unwrap();
            assert_eq!(c.dim(), cok.cokernel_monomials().len(), "k = {k}");
            assert!(complements_lie_range(&pp, k, &c.basis()).unwrap());
        }
    }
}
