//! Matrices of the Lie-derivative and homological operators attached to a
//! principal part, with kernel, range, cokernel and solve.
//!
//! Every "complement to the range" is the span of the codomain coordinates
//! that carry no pivot (see [`crate::linalg`]).  Two refinements apply:
//! planar Lie-derivative cokernels are chosen cyclically (`h` times the
//! cokernel `deg h` degrees lower) and the homological operator on fields is
//! written in the four-way split coordinates, so its cokernel respects the
//! block-triangular structure.

use crate::error::{QhError, Result};
use crate::linalg::{Echelon, Matrix, Reduction};
use crate::qhpoly::{graded_basis, GradedSlice, Monomial, Poly};
use crate::scalar::Scalar;
use crate::split::{Split4, Splitter, StructuredBasis};
use crate::vfield::{hamiltonian_field, lie_bracket, lie_derivative, PrincipalPart, VField};

/// A matrix together with its column echelon under a codomain priority.
#[derive(Clone, Debug)]
pub struct LinearOperator<S> {
    matrix: Matrix<S>,
    echelon: Echelon<S>,
}

impl<S: Scalar> LinearOperator<S> {
    pub fn new(matrix: Matrix<S>, scan: &[usize]) -> Self {
        let echelon = matrix.echelon(scan);
        LinearOperator { matrix, echelon }
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.echelon.rank()
    }

    pub fn dim_domain(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn dim_codomain(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        self.matrix.apply(x)
    }

    pub fn kernel(&self) -> Vec<Vec<S>> {
        self.echelon.kernel()
    }

    /// Codomain coordinates spanning a complement of the range.
    pub fn cokernel_coords(&self) -> Vec<usize> {
        self.echelon.non_pivots()
    }

    pub fn reduce(&self, b: &[S]) -> Reduction<S> {
        self.echelon.reduce(b)
    }

    /// Solution with dependent columns set to zero; fails off the range.
    pub fn solve(&self, b: &[S]) -> Result<Vec<S>> {
        let red = self.reduce(b);
        if !red.in_span() {
            let worst = red
                .residual
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(", ");
            return Err(QhError::NotInRange { residual: worst });
        }
        Ok(red.coeffs)
    }

    /// Rows of the matrix as comma-separated values.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.matrix.nrows() {
            let row: Vec<String> = (0..self.matrix.ncols())
                .map(|j| self.matrix.entry(i, j).to_string())
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Operator between polynomial slices given by monomial bases.
#[derive(Clone, Debug)]
pub struct PolyOperator<S> {
    pub domain: GradedSlice,
    pub codomain: GradedSlice,
    pub op: LinearOperator<S>,
}

impl<S: Scalar> PolyOperator<S> {
    /// Builds the matrix column by column; the codomain is scanned last
    /// monomial first.
    pub fn build(
        domain: GradedSlice,
        codomain: GradedSlice,
        image: impl Fn(&Poly<S>) -> Result<Poly<S>>,
    ) -> Result<Self> {
        let arity = domain.qh_type.arity();
        let cols = domain
            .basis
            .iter()
            .map(|m| codomain.coords(&image(&Poly::monomial(arity, *m, S::one()))?))
            .collect::<Result<Vec<_>>>()?;
        let scan: Vec<usize> = (0..codomain.dim()).rev().collect();
        let op = LinearOperator::new(Matrix::from_columns(codomain.dim(), cols), &scan);
        Ok(PolyOperator { domain, codomain, op })
    }

    pub fn apply_poly(&self, p: &Poly<S>) -> Result<Poly<S>> {
        Ok(self.codomain.from_coords(&self.op.apply(&self.domain.coords(p)?)))
    }

    pub fn kernel_polys(&self) -> Vec<Poly<S>> {
        self.op.kernel().iter().map(|v| self.domain.from_coords(v)).collect()
    }

    pub fn cokernel_monomials(&self) -> Vec<Monomial> {
        self.op
            .cokernel_coords()
            .into_iter()
            .map(|i| self.codomain.basis[i])
            .collect()
    }

    pub fn range_polys(&self) -> Vec<Poly<S>> {
        self.op
            .matrix()
            .columns()
            .iter()
            .map(|c| self.codomain.from_coords(c))
            .collect()
    }

    /// `target = op(pre) + rest` with `rest` on the cokernel monomials.
    pub fn decompose(&self, target: &Poly<S>) -> Result<(Poly<S>, Poly<S>)> {
        let red = self.op.reduce(&self.codomain.coords(target)?);
        Ok((
            self.domain.from_coords(&red.coeffs),
            self.codomain.from_coords(&red.residual),
        ))
    }

    pub fn solve_poly(&self, target: &Poly<S>) -> Result<Poly<S>> {
        Ok(self.domain.from_coords(&self.op.solve(&self.codomain.coords(target)?)?))
    }
}

/// `ℓ`: `P^t_k -> P^t_{r+k}`, `mu ↦ ∇mu·F_r`.
pub fn op_lie<S: Scalar>(pp: &PrincipalPart<S>, k: i64) -> Result<PolyOperator<S>> {
    let fr = pp.field();
    PolyOperator::build(graded_basis(&pp.t, k), graded_basis(&pp.t, pp.r + k), |mu| {
        lie_derivative(mu, &fr)
    })
}

/// `ℓ_A`: `mu ↦ ∇̂mu·X_h + A f ∂mu/∂z`; `A = 1` gives [`op_lie`].
pub fn op_lie_a<S: Scalar>(pp: &PrincipalPart<S>, k: i64, a: &S) -> Result<PolyOperator<S>> {
    let xh = hamiltonian_field(&pp.h.lift3());
    let f3 = pp.f.lift3();
    PolyOperator::build(graded_basis(&pp.t, k), graded_basis(&pp.t, pp.r + k), |mu| {
        Ok(lie_derivative(mu, &xh)?.add(&f3.mul(&mu.partial(2)).scale(a)))
    })
}

/// Planar `ℓ̂`: `P^t̂_k -> P^t̂_{r+k}`, `mu ↦ ∇̂mu·X_h`.
pub fn op_lie_planar<S: Scalar>(pp: &PrincipalPart<S>, k: i64) -> Result<PolyOperator<S>> {
    let tp = pp.t.planar_part();
    let xh = hamiltonian_field(&pp.h);
    PolyOperator::build(graded_basis(&tp, k), graded_basis(&tp, pp.r + k), |mu| {
        lie_derivative(mu, &xh)
    })
}

/// Complement slice `Delta_n` without pure powers of `z` (their Hamiltonian
/// fields vanish).
pub fn delta_reduced<S: Scalar>(splitter: &Splitter<S>, n: i64) -> Result<GradedSlice> {
    let d = splitter.delta(3, n)?;
    Ok(GradedSlice {
        qh_type: splitter.principal().t.clone(),
        degree: n,
        basis: d.complement.iter().copied().filter(|m| !m.is_pure_z()).collect(),
    })
}

/// `ℓᶜ_A`: projection onto `Delta_{r+n}` of `ℓ_A` restricted to `Delta_n`.
pub fn op_lie_restricted<S: Scalar>(splitter: &Splitter<S>, n: i64, a: &S) -> Result<PolyOperator<S>> {
    let pp = splitter.principal();
    let xh = hamiltonian_field(&pp.h.lift3());
    let f3 = pp.f.lift3();
    let target = splitter.delta(3, pp.r + n)?;
    PolyOperator::build(delta_reduced(splitter, n)?, delta_reduced(splitter, pp.r + n)?, |g| {
        let img = lie_derivative(g, &xh)?.add(&f3.mul(&g.partial(2)).scale(a));
        target.proj_complement(&img)
    })
}

/// `A0 = (k+|t̂|)/(r+k+|t|)` for the field degree `k`.
pub fn a0<S: Scalar>(pp: &PrincipalPart<S>, k: i64) -> S {
    S::ratio(k + pp.t.planar_modulus(), pp.r + k + pp.t.modulus())
}

/// Complement of `Range(ℓ̂)` in `P^t̂_m`, chosen as `h` times the complement
/// `deg h` degrees lower whenever that really is a complement, otherwise the
/// non-pivot monomials.
pub fn planar_cokernel<S: Scalar>(pp: &PrincipalPart<S>, m: i64) -> Result<Vec<Poly<S>>> {
    let dh = pp.r + pp.t.planar_modulus();
    let op = op_lie_planar(pp, m - pp.r)?;
    let fallback = || -> Vec<Poly<S>> {
        op.cokernel_monomials()
            .into_iter()
            .map(|mo| Poly::monomial(2, mo, S::one()))
            .collect()
    };
    if m < dh {
        return Ok(fallback());
    }
    let lower = planar_cokernel(pp, m - dh)?;
    let cyclic: Vec<Poly<S>> = lower.iter().map(|w| w.mul(&pp.h)).collect();
    let mut e = op.op.echelon_clone();
    let independent = cyclic
        .iter()
        .map(|w| op.codomain.coords(w).map(|c| e.insert(&c)))
        .collect::<Result<Vec<bool>>>()?;
    if independent.iter().all(|&b| b) && e.rank() == op.codomain.dim() {
        Ok(cyclic)
    } else {
        Ok(fallback())
    }
}

impl<S: Scalar> LinearOperator<S> {
    pub(crate) fn echelon_clone(&self) -> Echelon<S> {
        self.echelon.clone()
    }
}

/// `P^t̂_m = Range(ℓ̂) ⊕ span(basis)` with an explicit basis.
#[derive(Clone, Debug)]
pub struct PlanarCokernel<S> {
    pub op: PolyOperator<S>,
    pub basis: Vec<Poly<S>>,
    residuals: Echelon<S>,
}

impl<S: Scalar> PlanarCokernel<S> {
    pub fn new(pp: &PrincipalPart<S>, m: i64) -> Result<Self> {
        let op = op_lie_planar(pp, m - pp.r)?;
        let basis = planar_cokernel(pp, m)?;
        let n = op.codomain.dim();
        let mut residuals = Echelon::new(n, &(0..n).rev().collect::<Vec<_>>());
        for w in &basis {
            let red = op.op.reduce(&op.codomain.coords(w)?);
            residuals.insert(&red.residual);
        }
        Ok(PlanarCokernel { op, basis, residuals })
    }

    /// `p = ℓ̂(pre) + Σ c_i basis_i`; returns `(pre, c)`.
    pub fn decompose(&self, p: &Poly<S>) -> Result<(Poly<S>, Vec<S>)> {
        let red = self.op.op.reduce(&self.op.codomain.coords(p)?);
        let cok = self.residuals.reduce(&red.residual);
        if !cok.in_span() {
            return Err(QhError::Numeric(
                "planar cokernel basis does not span the complement".into(),
            ));
        }
        // Undo the range parts that the basis vectors themselves carried.
        let mut pre = self.op.domain.from_coords(&red.coeffs);
        for (w, c) in self.basis.iter().zip(&cok.coeffs) {
            if c.is_zero() {
                continue;
            }
            let wr = self.op.op.reduce(&self.op.codomain.coords(w)?);
            pre = pre.sub(&self.op.domain.from_coords(&wr.coeffs).scale(c));
        }
        Ok((pre, cok.coeffs))
    }

    /// Component of `p` in the range of `ℓ̂`.
    pub fn range_part(&self, p: &Poly<S>) -> Result<Poly<S>> {
        let (pre, _) = self.decompose(p)?;
        self.op.apply_poly(&pre)
    }
}

/// Conjugation (`mu ≡ 0`) or orbital equivalence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Mode {
    #[serde(rename = "conj")]
    Conjugation,
    #[serde(rename = "orbital")]
    Orbital,
}

/// Homological operator on `Q^t_k` (times `Cor(ℓ)` in orbital mode), in
/// four-way split coordinates of degrees `k` and `r+k`.
#[derive(Clone, Debug)]
pub struct HomologicalOperator<S> {
    pub degree: i64,
    pub mode: Mode,
    pub domain: StructuredBasis,
    /// Time-rescaling directions, spanning `Cor(ℓ)` in `P^t_k`.
    pub mu_basis: Vec<Poly<S>>,
    pub codomain: StructuredBasis,
    pub op: LinearOperator<S>,
}

/// Solution of one homological step.
#[derive(Clone, Debug, PartialEq)]
pub struct HomologicalSolution<S> {
    pub generator: VField<S>,
    pub nu: Poly<S>,
    /// Remainder in split coordinates, supported on cokernel coordinates.
    pub residual: Split4<S>,
}

impl<S: Scalar> HomologicalOperator<S> {
    /// `principal_field` overrides `F_r` (it must lie in `Q_r`); the splitting
    /// always uses the principal part of `splitter`.
    pub fn build(splitter: &Splitter<S>, k: i64, mode: Mode, principal_field: Option<&VField<S>>) -> Result<Self> {
        let pp = splitter.principal();
        let r = pp.r;
        let domain = StructuredBasis::new(splitter, k)?;
        let codomain = StructuredBasis::new(splitter, r + k)?;
        let fr = principal_field.cloned().unwrap_or_else(|| pp.field());
        let mut cols = Vec::with_capacity(domain.dim());
        for i in 0..domain.dim() {
            let comp = domain.component::<S>(i);
            let img = match principal_field {
                None => splitter.bracket_structured(&comp, k)?,
                Some(f) => splitter.split_3d4(&lie_bracket(&comp.as_split().assemble(pp), f)?, r + k)?,
            };
            cols.push(codomain.coords(&img)?);
        }
        let mu_basis = match mode {
            Mode::Conjugation => Vec::new(),
            Mode::Orbital => op_lie(pp, k - r)?
                .cokernel_monomials()
                .into_iter()
                .map(|m| Poly::monomial(3, m, S::one()))
                .collect(),
        };
        for mu in &mu_basis {
            let img = splitter.split_3d4(&fr.mul_poly(mu).neg(), r + k)?;
            cols.push(codomain.coords(&img)?);
        }
        let op = LinearOperator::new(Matrix::from_columns(codomain.dim(), cols), &codomain.scan());
        Ok(HomologicalOperator {
            degree: k,
            mode,
            domain,
            mu_basis,
            codomain,
            op,
        })
    }

    /// Splits `target ∈ Q_{r+k}` as `[U, F] − nu F + residual`.
    pub fn solve(&self, splitter: &Splitter<S>, target: &VField<S>) -> Result<HomologicalSolution<S>> {
        let pp = splitter.principal();
        let s = splitter.split_3d4(target, pp.r + self.degree)?;
        let red = self.op.reduce(&self.codomain.coords(&s)?);
        let nd = self.domain.dim();
        let generator = self.domain.element(&red.coeffs[..nd]).assemble(pp);
        let nu = self
            .mu_basis
            .iter()
            .zip(&red.coeffs[nd..])
            .fold(Poly::zero(3), |acc, (m, c)| acc.add(&m.scale(c)));
        Ok(HomologicalSolution {
            generator,
            nu,
            residual: self.codomain.element(&red.residual),
        })
    }

    /// Cokernel directions as fields of degree `r+k`.
    pub fn cokernel_fields(&self, pp: &PrincipalPart<S>) -> Vec<VField<S>> {
        let n = self.codomain.dim();
        self.op
            .cokernel_coords()
            .into_iter()
            .map(|i| {
                let mut v = vec![S::zero(); n];
                v[i] = S::one();
                self.codomain.element(&v).assemble(pp)
            })
            .collect()
    }

    /// Kernel dimension of the `C -> C` diagonal block.
    pub fn c_block_kernel_dim(&self) -> usize {
        let nc = self.domain.c.len();
        let mc = self.codomain.c.len();
        let cols: Vec<Vec<S>> = (0..nc).map(|j| self.op.matrix().column(j)[..mc].to_vec()).collect();
        let e = Echelon::from_vectors(mc, &(0..mc).rev().collect::<Vec<_>>(), &cols);
        nc - e.rank()
    }

    /// True when `v` (codomain coordinates) is supported on cokernel
    /// coordinates.
    pub fn certifies(&self, v: &[S]) -> bool {
        let cok = self.op.cokernel_coords();
        v.iter().enumerate().all(|(i, c)| c.negligible() || cok.contains(&i))
    }
}
