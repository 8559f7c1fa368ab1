//! Splittings of quasi-homogeneous vector fields relative to a principal
//! part `F_r = (X_h, f)`.
//!
//! * [`split_cd`]: a planar field is `X_H + mu D0`.
//! * [`split_planar3`]: a planar field is `X_g + mu D0 + lambda X_h` with
//!   `g` in the complement of the `h`-multiples.
//! * [`split_3d4`]: a spatial field is `(X_g, 0) + (mu D0, 0) + (lambda X_h, 0)
//!   + (0, f)`, obtained slice by slice in `z`.
//!
//! The complement of the `h`-multiples is spanned by the monomials that carry
//! no pivot when the multiples are row-reduced with the last canonical
//! monomial scanned first.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{QhError, Result};
use crate::linalg::Echelon;
use crate::qhpoly::{graded_basis, GradedSlice, Monomial, Poly, QHType};
use crate::scalar::Scalar;
use crate::vfield::{divergence, hamiltonian_field, lie_derivative, planar_euler, wedge, PrincipalPart, VField};

/// `P^t_n = Delta_n ⊕ h P^t_{n - deg h}` for a fixed `h`.
#[derive(Clone, Debug)]
pub struct DeltaDecomposition<S> {
    pub ambient: GradedSlice,
    pub lambda_slice: GradedSlice,
    /// `lambda_i h` for the monomials `lambda_i` of `lambda_slice`.
    pub multiples: Vec<Poly<S>>,
    /// Monomials of `ambient` spanning the complement, canonical order.
    pub complement: Vec<Monomial>,
    echelon: Echelon<S>,
}

impl<S: Scalar> DeltaDecomposition<S> {
    /// `h` must be homogeneous under `t` (either arity); `n` is the ambient
    /// degree.
    pub fn new(h: &Poly<S>, t: &QHType, n: i64) -> Result<Self> {
        if h.is_zero() {
            return Err(QhError::Domain("h-multiples of the zero polynomial".into()));
        }
        let dh = h.qh_degree(t)?;
        let ambient = graded_basis(t, n);
        let lambda_slice = graded_basis(t, n - dh);
        let multiples: Vec<Poly<S>> = lambda_slice.basis.iter().map(|m| h.mul_monomial(m)).collect();
        let vectors = multiples
            .iter()
            .map(|p| ambient.coords(p))
            .collect::<Result<Vec<_>>>()?;
        let scan: Vec<usize> = (0..ambient.dim()).rev().collect();
        let echelon = Echelon::from_vectors(ambient.dim(), &scan, &vectors);
        let complement = echelon.non_pivots().into_iter().map(|i| ambient.basis[i]).collect();
        Ok(DeltaDecomposition {
            ambient,
            lambda_slice,
            multiples,
            complement,
            echelon,
        })
    }

    pub fn dim_multiples(&self) -> usize {
        self.echelon.rank()
    }

    /// `p = comp + lambda h` with `comp` on the complement monomials.
    pub fn decompose(&self, p: &Poly<S>) -> Result<(Poly<S>, Poly<S>)> {
        let red = self.echelon.reduce(&self.ambient.coords(p)?);
        let comp = self.ambient.from_coords(&red.residual);
        let lambda = self.lambda_slice.from_coords(&red.coeffs);
        Ok((comp, lambda))
    }

    pub fn proj_complement(&self, p: &Poly<S>) -> Result<Poly<S>> {
        Ok(self.decompose(p)?.0)
    }

    /// Projection onto the multiples, returned as the multiple itself.
    pub fn proj_multiples(&self, p: &Poly<S>) -> Result<Poly<S>> {
        Ok(p.sub(&self.decompose(p)?.0))
    }
}

/// Free-standing version of [`DeltaDecomposition::new`].
pub fn delta_complement<S: Scalar>(h: &Poly<S>, t: &QHType, n: i64) -> Result<DeltaDecomposition<S>> {
    DeltaDecomposition::new(h, t, n)
}

/// Planar `P = X_H + mu D0`, with `H = D0∧P/(k+|t̂|)` and `mu = div P/(k+|t̂|)`.
pub fn split_cd<S: Scalar>(p: &VField<S>, t: &QHType, k: i64) -> Result<(Poly<S>, Poly<S>)> {
    if p.ncomps() != 2 || t.arity() != 2 {
        return Err(QhError::ArityMismatch(
            "split_cd expects a planar field and type".into(),
        ));
    }
    if !p.in_slice(t, k) {
        return Err(QhError::Assumption(format!("field is not in Q_{k}")));
    }
    let n = S::from_int(k + t.planar_modulus());
    let inv = n
        .inverse()
        .ok_or_else(|| QhError::Domain("degree k + |t| vanishes".into()))?;
    let d0 = planar_euler::<S>(t, p.arity());
    Ok((wedge(&d0, p)?.scale(&inv), divergence(p).scale(&inv)))
}

/// Planar three-way split `P = X_g + mu D0 + lambda X_h`.
#[derive(Clone, Debug, PartialEq)]
pub struct Split3<S> {
    pub g: Poly<S>,
    pub mu: Poly<S>,
    pub lambda: Poly<S>,
}

impl<S: Scalar> Split3<S> {
    pub fn assemble(&self, h: &Poly<S>, t: &QHType) -> VField<S> {
        let d0 = planar_euler::<S>(t, 2);
        hamiltonian_field(&self.g)
            .add(&d0.mul_poly(&self.mu))
            .add(&hamiltonian_field(h).mul_poly(&self.lambda))
    }
}

/// Spatial four-way split; every part is a three-variable polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct Split4<S> {
    pub g: Poly<S>,
    pub mu: Poly<S>,
    pub lambda: Poly<S>,
    pub f: Poly<S>,
}

impl<S: Scalar> Split4<S> {
    pub fn zero() -> Self {
        Split4 {
            g: Poly::zero(3),
            mu: Poly::zero(3),
            lambda: Poly::zero(3),
            f: Poly::zero(3),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Split4 {
            g: self.g.add(&o.g),
            mu: self.mu.add(&o.mu),
            lambda: self.lambda.add(&o.lambda),
            f: self.f.add(&o.f),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        Split4 {
            g: self.g.scale(s),
            mu: self.mu.scale(s),
            lambda: self.lambda.scale(s),
            f: self.f.scale(s),
        }
    }

    /// `(X_g + mu D0 + lambda X_h, f)`.
    pub fn assemble(&self, principal: &PrincipalPart<S>) -> VField<S> {
        let d0 = planar_euler::<S>(&principal.t.planar_part(), 3);
        hamiltonian_field(&self.g)
            .add(&d0.mul_poly(&self.mu))
            .add(&hamiltonian_field(&principal.h.lift3()).mul_poly(&self.lambda))
            .with_third(self.f.clone())
    }
}

/// One pure component of the four-way split.
#[derive(Clone, Debug, PartialEq)]
pub enum Component<S> {
    C(Poly<S>),
    D(Poly<S>),
    F(Poly<S>),
    G(Poly<S>),
}

impl<S: Scalar> Component<S> {
    pub fn as_split(&self) -> Split4<S> {
        let mut s = Split4::zero();
        match self {
            Component::C(p) => s.g = p.clone(),
            Component::D(p) => s.mu = p.clone(),
            Component::F(p) => s.lambda = p.clone(),
            Component::G(p) => s.f = p.clone(),
        }
        s
    }
}

/// Complements keyed by `(arity, ambient degree)`.
type DeltaCache<S> = HashMap<(usize, i64), Arc<DeltaDecomposition<S>>>;

/// Splitting context for one principal part, caching complements by
/// `(arity, ambient degree)`.
#[derive(Debug)]
pub struct Splitter<S> {
    principal: PrincipalPart<S>,
    cache: Mutex<DeltaCache<S>>,
}

impl<S: Scalar> Clone for Splitter<S> {
    fn clone(&self) -> Self {
        Splitter::new(self.principal.clone())
    }
}

impl<S: Scalar> Splitter<S> {
    pub fn new(principal: PrincipalPart<S>) -> Self {
        Splitter {
            principal,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn principal(&self) -> &PrincipalPart<S> {
        &self.principal
    }

    fn t(&self) -> &QHType {
        &self.principal.t
    }

    fn h_mod(&self) -> i64 {
        self.t().planar_modulus()
    }

    /// Decomposition of `P^t_n` (arity 3) or `P^t̂_n` (arity 2).
    pub fn delta(&self, arity: usize, n: i64) -> Result<Arc<DeltaDecomposition<S>>> {
        if let Some(d) = self.cache.lock().expect("cache lock").get(&(arity, n)) {
            return Ok(d.clone());
        }
        let d = Arc::new(match arity {
            2 => DeltaDecomposition::new(&self.principal.h, &self.t().planar_part(), n)?,
            _ => DeltaDecomposition::new(&self.principal.h.lift3(), self.t(), n)?,
        });
        self.cache.lock().expect("cache lock").insert((arity, n), d.clone());
        Ok(d)
    }

    /// Planar split of `P ∈ Q^t̂_k`.
    pub fn split_planar3(&self, p: &VField<S>, k: i64) -> Result<Split3<S>> {
        let tp = self.t().planar_part();
        if p.arity() != 2 || p.ncomps() != 2 {
            return Err(QhError::ArityMismatch("split_planar3 expects a planar field".into()));
        }
        if !p.in_slice(&tp, k) {
            return Err(QhError::Assumption(format!("field is not in Q_{k}")));
        }
        if p.is_zero() {
            return Ok(Split3 {
                g: Poly::zero(2),
                mu: Poly::zero(2),
                lambda: Poly::zero(2),
            });
        }
        let n = k + self.h_mod();
        let inv_n = S::from_int(n)
            .inverse()
            .ok_or_else(|| QhError::Domain("k + |t| vanishes".into()))?;
        let d0 = planar_euler::<S>(&tp, 2);
        let w = wedge(&d0, p)?;
        let (comp, lam_w) = self.delta(2, n)?.decompose(&w)?;
        let g = comp.scale(&inv_n);
        // D0∧(lambda X_h) = (r+|t̂|) lambda h.
        let inv_h = S::from_int(self.principal.r + self.h_mod())
            .inverse()
            .ok_or_else(|| QhError::Domain("degree of h vanishes".into()))?;
        let lambda = lam_w.scale(&inv_h);
        let xh = hamiltonian_field(&self.principal.h);
        let mu = divergence(p).sub(&lie_derivative(&lambda, &xh)?).scale(&inv_n);
        Ok(Split3 { g, mu, lambda })
    }

    /// Spatial split of `P ∈ Q^t_k`.
    pub fn split_3d4(&self, p: &VField<S>, k: i64) -> Result<Split4<S>> {
        let t = self.t().clone();
        if p.arity() != 3 || p.ncomps() != 3 {
            return Err(QhError::ArityMismatch("split_3d4 expects a spatial field".into()));
        }
        if !p.in_slice(&t, k) {
            return Err(QhError::Assumption(format!("field is not in Q_{k}")));
        }
        let s0 = p.comp(0).z_slices();
        let s1 = p.comp(1).z_slices();
        let mut levels: Vec<u32> = s0.keys().chain(s1.keys()).copied().collect();
        levels.sort_unstable();
        levels.dedup();
        let mut out = Split4::zero();
        out.f = p.comp(2).clone();
        for l in levels {
            let a = s0.get(&l).cloned().unwrap_or_else(|| Poly::zero(2));
            let b = s1.get(&l).cloned().unwrap_or_else(|| Poly::zero(2));
            let planar = VField::from_array([a, b]);
            let sp = self.split_planar3(&planar, k - l as i64 * t.weight(2))?;
            out.g = out.g.add(&Poly::from_z_slice(l, &sp.g));
            out.mu = out.mu.add(&Poly::from_z_slice(l, &sp.mu));
            out.lambda = out.lambda.add(&Poly::from_z_slice(l, &sp.lambda));
        }
        Ok(out)
    }

    /// `[P, F_r]` for a pure component `P` of degree `k`, as a split of
    /// degree `r + k`, computed from the closed forms for each component.
    pub fn bracket_structured(&self, c: &Component<S>, k: i64) -> Result<Split4<S>> {
        let pp = &self.principal;
        let t = &pp.t;
        let r = pp.r;
        let h3 = pp.h.lift3();
        let f3 = pp.f.lift3();
        let fr = pp.field();
        let xh = hamiltonian_field(&h3);
        let mut out = Split4::zero();
        match c {
            Component::C(g) => return self.bracket_c(g, k),
            Component::D(mu) => {
                out.mu = lie_derivative(mu, &fr)?;
                out.lambda = mu.scale(&S::from_int(-r));
                out.f = mu.mul(&f3).scale(&S::from_int(-(r + t.weight(2))));
            }
            Component::F(lambda) => {
                out.lambda = lie_derivative(lambda, &fr)?;
                out.f = lambda.mul(&lie_derivative(&f3, &xh)?).neg();
            }
            Component::G(fk) => {
                out.f = lie_derivative(fk, &fr)?;
            }
        }
        Ok(out)
    }

    /// Item for `(X_g, 0)`: the planar part of the bracket is
    /// `[X_g, X_h] + f X_{∂g/∂z}`, split slice by slice; a `z^{j+1}` slice of
    /// `g` feeds slice `j` with weight `deg(g_{j+1}) / N_j`, where `N_j` is the
    /// Hamiltonian degree of slice `j`.
    fn bracket_c(&self, g: &Poly<S>, k: i64) -> Result<Split4<S>> {
        let pp = &self.principal;
        let t = &pp.t;
        let (r, t3, hm) = (pp.r, t.weight(2), self.h_mod());
        let xh2 = hamiltonian_field(&pp.h);
        let f2 = &pp.f;
        let slices = g.z_slices();
        let top = slices.keys().next_back().copied().unwrap_or(0);
        let mut out = Split4::zero();
        for j in 0..=top {
            let gj = slices.get(&j).cloned().unwrap_or_else(|| Poly::zero(2));
            let gn = slices.get(&(j + 1)).cloned().unwrap_or_else(|| Poly::zero(2));
            let nj = r + k - j as i64 * t3 + hm;
            if gj.is_zero() && gn.is_zero() {
                continue;
            }
            let inv_nj = S::from_int(nj)
                .inverse()
                .ok_or_else(|| QhError::Domain("slice degree vanishes".into()))?;
            let gn_scaled = gn.scale(&S::from_int(j as i64 + 1));
            let deg_gn = nj - r - t3;
            let weight = S::from_int(deg_gn) * inv_nj.clone();
            let ham = lie_derivative(&gj, &xh2)?.add(&f2.mul(&gn_scaled).scale(&weight));
            let (gt, lam_w) = self.delta(2, nj)?.decompose(&ham)?;
            let scale_l = S::from_int(nj)
                * S::from_int(r + hm)
                    .inverse()
                    .ok_or_else(|| QhError::Domain("degree of h vanishes".into()))?;
            let lt = lam_w.scale(&scale_l);
            let mt = lie_derivative(f2, &hamiltonian_field(&gn_scaled))?
                .sub(&lie_derivative(&lt, &xh2)?)
                .scale(&inv_nj);
            out.g = out.g.add(&Poly::from_z_slice(j, &gt));
            out.lambda = out.lambda.add(&Poly::from_z_slice(j, &lt));
            out.mu = out.mu.add(&Poly::from_z_slice(j, &mt));
        }
        let xg = hamiltonian_field(g);
        out.f = lie_derivative(&f2.lift3(), &xg)?.neg();
        Ok(out)
    }
}

/// Free-standing planar split with a fresh complement.
pub fn split_planar3<S: Scalar>(p: &VField<S>, h: &Poly<S>, t: &QHType, k: i64, r: i64) -> Result<Split3<S>> {
    let pp = PrincipalPart {
        h: h.clone(),
        f: Poly::zero(2),
        t: QHType::new(&[t.weights()[0], t.weights()[1], 1])?,
        r,
    };
    Splitter::new(pp).split_planar3(p, k)
}

/// Free-standing spatial split with a fresh complement.
pub fn split_3d4<S: Scalar>(p: &VField<S>, principal: &PrincipalPart<S>, k: i64) -> Result<Split4<S>> {
    Splitter::new(principal.clone()).split_3d4(p, k)
}

/// Coordinates of degree-`m` spatial fields in the four-way split.
///
/// Blocks in order: `C` (complement monomials of `Delta_{m+|t̂|}` that are not
/// pure powers of `z`), `D` (`P_m`), `F` (`P_{m-r}`), `G` (`P_{m+t3}`).
#[derive(Clone, Debug)]
pub struct StructuredBasis {
    pub degree: i64,
    pub c: Vec<Monomial>,
    pub d: GradedSlice,
    pub f: GradedSlice,
    pub g: GradedSlice,
}

/// Which block a structured coordinate belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    C,
    D,
    F,
    G,
}

impl StructuredBasis {
    pub fn new<S: Scalar>(splitter: &Splitter<S>, m: i64) -> Result<Self> {
        let pp = splitter.principal();
        let t = &pp.t;
        let delta = splitter.delta(3, m + t.planar_modulus())?;
        let c = delta.complement.iter().copied().filter(|mo| !mo.is_pure_z()).collect();
        Ok(StructuredBasis {
            degree: m,
            c,
            d: graded_basis(t, m),
            f: graded_basis(t, m - pp.r),
            g: graded_basis(t, m + t.weight(2)),
        })
    }

    pub fn dim(&self) -> usize {
        self.c.len() + self.d.dim() + self.f.dim() + self.g.dim()
    }

    pub fn offsets(&self) -> [usize; 4] {
        let a = self.c.len();
        let b = a + self.d.dim();
        let c = b + self.f.dim();
        [0, a, b, c]
    }

    pub fn block_of(&self, i: usize) -> Block {
        let o = self.offsets();
        if i < o[1] {
            Block::C
        } else if i < o[2] {
            Block::D
        } else if i < o[3] {
            Block::F
        } else {
            Block::G
        }
    }

    /// Scan order: `C` first, then `D`, `F`, `G`, each block last-first.
    pub fn scan(&self) -> Vec<usize> {
        let o = self.offsets();
        let ends = [o[1], o[2], o[3], self.dim()];
        let mut s = Vec::with_capacity(self.dim());
        for b in 0..4 {
            s.extend((o[b]..ends[b]).rev());
        }
        s
    }

    pub fn coords<S: Scalar>(&self, s: &Split4<S>) -> Result<Vec<S>> {
        let mut v = Vec::with_capacity(self.dim());
        for m in &self.c {
            v.push(s.g.coeff(m));
        }
        let covered = s.g.terms().all(|(m, _)| self.c.contains(m));
        if !covered {
            return Err(QhError::Assumption("g leaves the complement".into()));
        }
        v.extend(self.d.coords(&s.mu)?);
        v.extend(self.f.coords(&s.lambda)?);
        v.extend(self.g.coords(&s.f)?);
        Ok(v)
    }

    pub fn element<S: Scalar>(&self, v: &[S]) -> Split4<S> {
        let o = self.offsets();
        let g = Poly::from_terms(3, self.c.iter().copied().zip(v[..o[1]].iter().cloned()));
        Split4 {
            g,
            mu: self.d.from_coords(&v[o[1]..o[2]]),
            lambda: self.f.from_coords(&v[o[2]..o[3]]),
            f: self.g.from_coords(&v[o[3]..]),
        }
    }

    /// The `i`-th basis element as a pure component.
    pub fn component<S: Scalar>(&self, i: usize) -> Component<S> {
        let o = self.offsets();
        let one = S::one();
        match self.block_of(i) {
            Block::C => Component::C(Poly::monomial(3, self.c[i], one)),
            Block::D => Component::D(Poly::monomial(3, self.d.basis[i - o[1]], one)),
            Block::F => Component::F(Poly::monomial(3, self.f.basis[i - o[2]], one)),
            Block::G => Component::G(Poly::monomial(3, self.g.basis[i - o[3]], one)),
        }
    }
}
