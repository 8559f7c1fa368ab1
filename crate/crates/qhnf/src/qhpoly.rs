//! Multivariate polynomials in two or three variables with a
//! quasi-homogeneous grading.
//!
//! A [`Poly`] stores only nonzero coefficients and carries its arity; a
//! planar polynomial is never silently treated as a spatial one (see
//! [`Poly::lift3`]).  Graded slices are enumerated by [`graded_basis`] in the
//! canonical order: increasing quasi-homogeneous degree, then descending
//! lexicographic order of the exponent vector (so `x^2, xy, y^2, z`).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{QhError, Result};
use crate::scalar::{parse_rational, Rational, Scalar};

/// Weights `(t1, t2[, t3])`, each at least one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QHType {
    weights: Vec<u32>,
}

impl QHType {
    pub fn new(weights: &[u32]) -> Result<Self> {
        if !(2..=3).contains(&weights.len()) {
            return Err(QhError::InvalidType(format!(
                "expected 2 or 3 weights, got {}",
                weights.len()
            )));
        }
        if weights.contains(&0) {
            return Err(QhError::InvalidType("weights must be positive".into()));
        }
        Ok(QHType {
            weights: weights.to_vec(),
        })
    }

    pub fn planar(t1: u32, t2: u32) -> Self {
        Self::new(&[t1, t2]).expect("positive planar weights")
    }

    pub fn spatial(t1: u32, t2: u32, t3: u32) -> Self {
        Self::new(&[t1, t2, t3]).expect("positive spatial weights")
    }

    pub fn arity(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> i64 {
        self.weights[i] as i64
    }

    /// `|t|`
    pub fn modulus(&self) -> i64 {
        self.weights.iter().map(|&w| w as i64).sum()
    }

    /// `t̂ = (t1, t2)`
    pub fn planar_part(&self) -> QHType {
        QHType {
            weights: self.weights[..2].to_vec(),
        }
    }

    /// `|t̂| = t1 + t2`
    pub fn planar_modulus(&self) -> i64 {
        self.weight(0) + self.weight(1)
    }

    pub fn degree(&self, m: &Monomial) -> i64 {
        (0..self.arity()).map(|i| self.weight(i) * m.0[i] as i64).sum()
    }
}

impl fmt::Display for QHType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Exponent vector; unused trailing slots are zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub [u32; 3]);

impl Monomial {
    pub fn new(exps: &[u32]) -> Self {
        assert!(exps.len() <= 3, "at most three variables");
        let mut e = [0u32; 3];
        e[..exps.len()].copy_from_slice(exps);
        Monomial(e)
    }

    pub const ONE: Monomial = Monomial([0, 0, 0]);

    pub fn var(i: usize) -> Self {
        let mut e = [0u32; 3];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exp(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial([self.0[0] + other.0[0], self.0[1] + other.0[1], self.0[2] + other.0[2]])
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        (0..3).all(|i| self.0[i] <= other.0[i])
    }

    /// Only the third variable appears (includes the constant monomial).
    pub fn is_pure_z(&self) -> bool {
        self.0[0] == 0 && self.0[1] == 0
    }

    /// Canonical order under `t`: degree ascending, then exponent vector
    /// descending lexicographically.
    pub fn canonical_cmp(&self, other: &Monomial, t: &QHType) -> Ordering {
        t.degree(self).cmp(&t.degree(other)).then_with(|| other.0.cmp(&self.0))
    }

    pub fn drops_arity(&self, arity: usize) -> bool {
        self.0[arity..].iter().all(|&e| e == 0)
    }
}

/// A graded slice `P^t_k` with its monomial basis in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedSlice {
    pub qh_type: QHType,
    pub degree: i64,
    pub basis: Vec<Monomial>,
}

impl GradedSlice {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.basis.iter().position(|b| b == m)
    }

    /// Coordinates of a polynomial lying in the slice.
    pub fn coords<S: Scalar>(&self, p: &Poly<S>) -> Result<Vec<S>> {
        let mut v = vec![S::zero(); self.dim()];
        for (m, c) in p.terms() {
            let i = self
                .index_of(m)
                .ok_or_else(|| QhError::NotHomogeneous(self.degree, self.qh_type.degree(m)))?;
            v[i] = c.clone();
        }
        Ok(v)
    }

    pub fn from_coords<S: Scalar>(&self, v: &[S]) -> Poly<S> {
        Poly::from_terms(self.qh_type.arity(), self.basis.iter().copied().zip(v.iter().cloned()))
    }
}

/// All monomials of quasi-homogeneous degree `k` under `t`, canonical order.
pub fn graded_basis(t: &QHType, k: i64) -> GradedSlice {
    let mut basis = Vec::new();
    if k >= 0 {
        let w: Vec<i64> = (0..t.arity()).map(|i| t.weight(i)).collect();
        let mut exps = [0u32; 3];
        enumerate(&w, 0, k, &mut exps, &mut basis);
    }
    GradedSlice {
        qh_type: t.clone(),
        degree: k,
        basis,
    }
}

fn enumerate(w: &[i64], i: usize, rest: i64, exps: &mut [u32; 3], out: &mut Vec<Monomial>) {
    if i + 1 == w.len() {
        if rest % w[i] == 0 {
            exps[i] = (rest / w[i]) as u32;
            out.push(Monomial(*exps));
        }
        return;
    }
    let mut e = rest / w[i];
    loop {
        exps[i] = e as u32;
        enumerate(w, i + 1, rest - e * w[i], exps, out);
        if e == 0 {
            break;
        }
        e -= 1;
    }
    exps[i] = 0;
}

/// Polynomial with coefficients in `S` and explicit arity 2 or 3.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly<S> {
    arity: usize,
    terms: BTreeMap<Monomial, S>,
}

/// Variable names by position.
pub const VAR_NAMES: [&str; 3] = ["x", "y", "z"];

impl<S: Scalar> Poly<S> {
    pub fn zero(arity: usize) -> Self {
        assert!((2..=3).contains(&arity), "arity must be 2 or 3");
        Poly {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, c: S) -> Self {
        Self::monomial(arity, Monomial::ONE, c)
    }

    pub fn one(arity: usize) -> Self {
        Self::constant(arity, S::one())
    }

    pub fn var(arity: usize, i: usize) -> Self {
        assert!(i < arity);
        Self::monomial(arity, Monomial::var(i), S::one())
    }

    pub fn monomial(arity: usize, m: Monomial, c: S) -> Self {
        let mut p = Self::zero(arity);
        p.add_term(m, c);
        p
    }

    pub fn from_terms(arity: usize, terms: impl IntoIterator<Item = (Monomial, S)>) -> Self {
        let mut p = Self::zero(arity);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Adds `c * m` in place, dropping exact zeros.
    pub fn add_term(&mut self, m: Monomial, c: S) {
        assert!(m.drops_arity(self.arity), "monomial exceeds arity");
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let s = existing.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every coefficient is negligible in the ring.
    pub fn negligible(&self) -> bool {
        self.terms.values().all(|c| c.negligible())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> std::collections::btree_map::Iter<'_, Monomial, S> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> S {
        self.terms.get(m).cloned().unwrap_or_else(S::zero)
    }

    /// Terms sorted in the canonical order of `t`.
    pub fn sorted_terms(&self, t: &QHType) -> Vec<(Monomial, S)> {
        let mut v: Vec<(Monomial, S)> = self.terms.iter().map(|(m, c)| (*m, c.clone())).collect();
        v.sort_by(|a, b| a.0.canonical_cmp(&b.0, t));
        v
    }

    fn check_arity(&self, other: &Self) {
        assert_eq!(
            self.arity, other.arity,
            "polynomial arity mismatch ({} vs {})",
            self.arity, other.arity
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_arity(other);
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(*m, c.clone());
        }
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_arity(other);
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(*m, -c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c.clone())
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Self::zero(self.arity);
        }
        Self::from_terms(self.arity, self.terms.iter().map(|(m, c)| (*m, c.clone() * s.clone())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_arity(other);
        let mut r = Self::zero(self.arity);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                r.add_term(m1.mul(m2), c1.clone() * c2.clone());
            }
        }
        r
    }

    /// Product keeping only monomials of qh-degree at most `max`.
    pub fn mul_truncated(&self, other: &Self, t: &QHType, max: i64) -> Self {
        self.check_arity(other);
        let mut r = Self::zero(self.arity);
        let rhs: Vec<(i64, &Monomial, &S)> = other.terms.iter().map(|(m, c)| (t.degree(m), m, c)).collect();
        for (m1, c1) in &self.terms {
            let d1 = t.degree(m1);
            for (d2, m2, c2) in &rhs {
                if d1 + d2 <= max {
                    r.add_term(m1.mul(m2), c1.clone() * (*c2).clone());
                }
            }
        }
        r
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Self::from_terms(self.arity, self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut r = Self::one(self.arity);
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    /// Exact partial derivative in variable `i`.
    pub fn partial(&self, i: usize) -> Self {
        assert!(i < self.arity);
        let mut r = Self::zero(self.arity);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut dm = *m;
            dm.0[i] -= 1;
            r.add_term(dm, c.clone() * S::from_int(e as i64));
        }
        r
    }

    /// Gradient over all variables.
    pub fn partials(&self) -> Vec<Self> {
        (0..self.arity).map(|i| self.partial(i)).collect()
    }

    /// Single qh-degree of a homogeneous polynomial.
    pub fn qh_degree(&self, t: &QHType) -> Result<i64> {
        self.check_type(t)?;
        let mut it = self.terms.keys().map(|m| t.degree(m));
        let first = it.next().ok_or(QhError::DegreeUndefined)?;
        for d in it {
            if d != first {
                return Err(QhError::NotHomogeneous(first.min(d), first.max(d)));
            }
        }
        Ok(first)
    }

    fn check_type(&self, t: &QHType) -> Result<()> {
        if t.arity() != self.arity {
            return Err(QhError::ArityMismatch(format!(
                "type {} applied to a polynomial in {} variables",
                t, self.arity
            )));
        }
        Ok(())
    }

    /// True when the polynomial is zero or homogeneous of degree `k`.
    pub fn in_slice(&self, t: &QHType, k: i64) -> bool {
        self.arity == t.arity() && self.terms.keys().all(|m| t.degree(m) == k)
    }

    /// Homogeneous components in increasing degree.
    pub fn qh_decompose(&self, t: &QHType) -> Vec<(i64, Self)> {
        assert_eq!(t.arity(), self.arity, "type arity must match polynomial arity");
        let mut by_deg: BTreeMap<i64, Self> = BTreeMap::new();
        for (m, c) in &self.terms {
            by_deg
                .entry(t.degree(m))
                .or_insert_with(|| Self::zero(self.arity))
                .add_term(*m, c.clone());
        }
        by_deg.into_iter().collect()
    }

    pub fn homogeneous_part(&self, t: &QHType, k: i64) -> Self {
        Self::from_terms(
            self.arity,
            self.terms
                .iter()
                .filter(|(m, _)| t.degree(m) == k)
                .map(|(m, c)| (*m, c.clone())),
        )
    }

    /// Keeps terms of degree at most `max`.
    pub fn truncate(&self, t: &QHType, max: i64) -> Self {
        Self::from_terms(
            self.arity,
            self.terms
                .iter()
                .filter(|(m, _)| t.degree(m) <= max)
                .map(|(m, c)| (*m, c.clone())),
        )
    }

    /// Planar polynomial viewed in three variables (no third variable).
    pub fn lift3(&self) -> Self {
        assert_eq!(self.arity, 2, "lift3 expects a planar polynomial");
        Poly {
            arity: 3,
            terms: self.terms.clone(),
        }
    }

    /// Drops to two variables; fails if the third variable occurs.
    pub fn restrict2(&self) -> Result<Self> {
        if self.arity == 2 {
            return Ok(self.clone());
        }
        if self.terms.keys().any(|m| m.0[2] != 0) {
            return Err(QhError::ArityMismatch("polynomial depends on z".into()));
        }
        Ok(Poly {
            arity: 2,
            terms: self.terms.clone(),
        })
    }

    /// `p = Σ z^l p_l(x, y)`, returned as `(l, p_l)` with planar `p_l`.
    pub fn z_slices(&self) -> BTreeMap<u32, Self> {
        assert_eq!(self.arity, 3, "z_slices expects three variables");
        let mut out: BTreeMap<u32, Self> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.0[2])
                .or_insert_with(|| Self::zero(2))
                .add_term(Monomial([m.0[0], m.0[1], 0]), c.clone());
        }
        out
    }

    /// `z^l * p` for planar `p`, as a three-variable polynomial.
    pub fn from_z_slice(l: u32, planar: &Self) -> Self {
        assert_eq!(planar.arity, 2);
        planar.lift3().mul_monomial(&Monomial([0, 0, l]))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Poly<T> {
        Poly::from_terms(self.arity, self.terms.iter().map(|(m, c)| (*m, f(c))))
    }

    pub fn eval(&self, point: &[S]) -> S {
        assert!(point.len() >= self.arity);
        let mut acc = S::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, &e) in m.0.iter().enumerate().take(self.arity) {
                for _ in 0..e {
                    v = v * point[i].clone();
                }
            }
            acc = acc + v;
        }
        acc
    }

    /// Substitutes polynomial `subs[i]` for variable `i`.
    pub fn substitute(&self, subs: &[Self]) -> Self {
        assert_eq!(subs.len(), self.arity, "one substitute per variable");
        let out_arity = subs[0].arity;
        let mut powers: Vec<Vec<Self>> = subs.iter().map(|s| vec![Self::one(s.arity)]).collect();
        let mut r = Self::zero(out_arity);
        for (m, c) in &self.terms {
            let mut term = Self::constant(out_arity, c.clone());
            for i in 0..self.arity {
                let e = m.0[i] as usize;
                while powers[i].len() <= e {
                    let next = powers[i].last().unwrap().mul(&subs[i]);
                    powers[i].push(next);
                }
                if e > 0 {
                    term = term.mul(&powers[i][e]);
                }
            }
            r = r.add(&term);
        }
        r
    }

    /// Largest coefficient magnitude (leading numeric parts).
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.approx().abs()).fold(0.0, f64::max)
    }
}

impl Poly<Rational> {
    /// Parses the text syntax `-3/2 x^2 y z^0 + 4 y`; `vars` are the names of
    /// the variables in order (their count fixes the arity).
    pub fn parse(src: &str, vars: &[&str]) -> Result<Self> {
        parse_poly(src, vars, 1, 1)
    }
}

impl<S: Scalar> fmt::Display for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_poly(self, None))
    }
}

/// Text rendering; with a type the terms follow the canonical order.
pub fn format_poly<S: Scalar>(p: &Poly<S>, t: Option<&QHType>) -> String {
    format_poly_named(p, t, &VAR_NAMES)
}

/// Text rendering with caller-chosen variable names.
pub fn format_poly_named<S: Scalar>(p: &Poly<S>, t: Option<&QHType>, names: &[&str]) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let terms: Vec<(Monomial, S)> = match t {
        Some(t) => p.sorted_terms(t),
        None => p.terms().rev().map(|(m, c)| (*m, c.clone())).collect(),
    };
    let mut out = String::new();
    for (i, (m, c)) in terms.iter().enumerate() {
        let (neg, mag) = c.sign_split();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let vars: Vec<String> = (0..p.arity())
            .filter(|&j| m.0[j] > 0)
            .map(|j| {
                if m.0[j] == 1 {
                    names[j].to_string()
                } else {
                    format!("{}^{}", names[j], m.0[j])
                }
            })
            .collect();
        let unit = mag == S::one();
        if vars.is_empty() {
            out.push_str(&mag.to_string());
        } else if unit {
            out.push_str(&vars.join(" "));
        } else {
            out.push_str(&format!("{} {}", mag, vars.join(" ")));
        }
    }
    out
}

/// Parser shared with the vector-field file reader; `line`/`col0` locate
/// `src` inside a larger document for error messages.
pub(crate) fn parse_poly(src: &str, vars: &[&str], line: usize, col0: usize) -> Result<Poly<Rational>> {
    let arity = vars.len();
    if !(2..=3).contains(&arity) {
        return Err(QhError::parse(line, col0, "expected 2 or 3 variables"));
    }
    let chars: Vec<char> = src.chars().collect();
    let mut pos = 0usize;
    let err = |pos: usize, msg: &str| QhError::parse(line, col0 + pos, msg.to_string());
    let skip_ws = |pos: &mut usize| {
        while *pos < chars.len() && chars[*pos].is_whitespace() {
            *pos += 1;
        }
    };
    let mut poly = Poly::<Rational>::zero(arity);
    let mut first = true;
    loop {
        skip_ws(&mut pos);
        if pos >= chars.len() {
            if first {
                return Err(err(pos, "empty polynomial"));
            }
            break;
        }
        let mut negative = false;
        let mut saw_sep = first;
        while pos < chars.len() && (chars[pos] == '+' || chars[pos] == '-') {
            if chars[pos] == '-' {
                negative = !negative;
            }
            saw_sep = true;
            pos += 1;
            skip_ws(&mut pos);
        }
        if !saw_sep {
            return Err(err(pos, "expected '+' or '-' between terms"));
        }
        if pos >= chars.len() {
            return Err(err(pos, "dangling sign"));
        }
        let term_start = pos;
        let mut coeff = Rational::from_integer(1.into());
        if chars[pos].is_ascii_digit() || chars[pos] == '.' {
            let start = pos;
            while pos < chars.len() && (chars[pos].is_ascii_digit() || chars[pos] == '/' || chars[pos] == '.') {
                pos += 1;
            }
            let text: String = chars[start..pos].iter().collect();
            coeff = parse_rational(&text).ok_or_else(|| err(start, "malformed coefficient"))?;
        }
        let mut mono = [0u32; 3];
        loop {
            skip_ws(&mut pos);
            if pos < chars.len() && chars[pos] == '*' {
                pos += 1;
                skip_ws(&mut pos);
            }
            if pos >= chars.len() || !(chars[pos].is_alphabetic() || chars[pos] == '_') {
                break;
            }
            let start = pos;
            while pos < chars.len() && (chars[pos].is_alphanumeric() || chars[pos] == '_') {
                pos += 1;
            }
            let name: String = chars[start..pos].iter().collect();
            let idx = vars
                .iter()
                .position(|v| *v == name)
                .ok_or_else(|| err(start, &format!("unknown variable '{name}'")))?;
            skip_ws(&mut pos);
            let mut e = 1u32;
            if pos < chars.len() && chars[pos] == '^' {
                pos += 1;
                skip_ws(&mut pos);
                let es = pos;
                while pos < chars.len() && chars[pos].is_ascii_digit() {
                    pos += 1;
                }
                if es == pos {
                    return Err(err(es, "expected exponent"));
                }
                let text: String = chars[es..pos].iter().collect();
                e = text.parse().map_err(|_| err(es, "exponent too large"))?;
            }
            mono[idx] += e;
        }
        if pos == term_start {
            return Err(err(pos, "expected coefficient or variable"));
        }
        if negative {
            coeff = -coeff;
        }
        poly.add_term(Monomial(mono), coeff);
        first = false;
    }
    Ok(poly)
}
