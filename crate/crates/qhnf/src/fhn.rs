//! FitzHugh-Nagumo travelling-wave system near its Hopf-zero point.
//!
//! `x' = z, y' = b (x − d y), z' = x (x − 1)(x − a) + y + c z` has the
//! Hopf-zero singularity at `a = −1/d`, `c = b d` when `d (1 − b^2 d^3) > 0`.
//! All work here is binary64.

use nalgebra::{Complex, Matrix3, Vector3};
use serde::Serialize;

use crate::error::{QhError, Result};
use crate::homolog::Mode;
use crate::hopfzero::{extract_coeffs, hz_principal, hz_type, miniversal_reduce, MiniversalReduction, VersalParams};
use crate::nform::{NFEngine, PreNormalization};
use crate::qhpoly::Poly;
use crate::vfield::{change_coordinates, VField};

/// Tolerance on structural residuals of the reduction.
pub const STRUCTURE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FHNParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl FHNParams {
    /// Critical point for `(b, d)`.
    pub fn critical(b: f64, d: f64) -> Result<Self> {
        Self::near_critical(b, d, 0.0, 0.0)
    }

    /// `a = a* + da`, `c = c* + dc`.
    pub fn near_critical(b: f64, d: f64, da: f64, dc: f64) -> Result<Self> {
        if d == 0.0 {
            return Err(QhError::Domain("d must be nonzero".into()));
        }
        if d * (1.0 - b * b * d * d * d) <= 0.0 {
            return Err(QhError::Domain("need d (1 − b^2 d^3) > 0".into()));
        }
        Ok(FHNParams {
            a: -1.0 / d + da,
            b,
            c: b * d + dc,
            d,
        })
    }

    pub fn a_star(&self) -> f64 {
        -1.0 / self.d
    }

    pub fn c_star(&self) -> f64 {
        self.b * self.d
    }

    /// Rotation speed at criticality.
    pub fn omega(&self) -> f64 {
        ((1.0 - self.b * self.b * self.d.powi(3)) / self.d).sqrt()
    }

    pub fn delta_a(&self) -> f64 {
        self.a - self.a_star()
    }

    pub fn delta_c(&self) -> f64 {
        self.c - self.c_star()
    }

    pub fn at_critical(&self) -> Self {
        FHNParams {
            a: self.a_star(),
            c: self.c_star(),
            ..*self
        }
    }

    pub fn linearization(&self) -> Matrix3<f64> {
        Matrix3::new(0.0, 0.0, 1.0, self.b, -self.b * self.d, 0.0, self.a, 1.0, self.c)
    }

    pub fn eigenvalues(&self) -> [Complex<f64>; 3] {
        let ev = self.linearization().complex_eigenvalues();
        let mut v = [ev[0], ev[1], ev[2]];
        v.sort_by(|p, q| p.im.partial_cmp(&q.im).expect("finite eigenvalues"));
        v
    }

    /// Right-hand side at a point.
    pub fn rhs(&self, p: &[f64; 3]) -> [f64; 3] {
        let [x, y, z] = *p;
        [
            z,
            self.b * (x - self.d * y),
            x * (x - 1.0) * (x - self.a) + y + self.c * z,
        ]
    }

    pub fn field(&self) -> VField<f64> {
        let x = Poly::<f64>::var(3, 0);
        let y = Poly::<f64>::var(3, 1);
        let z = Poly::<f64>::var(3, 2);
        let cubic = x
            .mul(&x.sub(&Poly::constant(3, 1.0)))
            .mul(&x.sub(&Poly::constant(3, self.a)));
        VField::from_array([
            z.clone(),
            x.sub(&y.scale(&self.d)).scale(&self.b),
            cubic.add(&y).add(&z.scale(&self.c)),
        ])
    }
}

/// Largest deviation of the critical spectrum from `{0, ±ω i}`.
pub fn eigenvalue_defect(p: &FHNParams) -> f64 {
    let w = p.omega();
    let ev = p.at_critical().eigenvalues();
    let want = [Complex::new(0.0, -w), Complex::new(0.0, 0.0), Complex::new(0.0, w)];
    ev.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

/// Order of the last two steps of the reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionOrder {
    ShiftThenScale,
    ScaleThenShift,
}

/// Maps between FHN coordinates and the reduced Hopf-zero coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FHNTransform {
    pub omega: f64,
    /// Columns are the images of the reduced basis.
    pub p: [[f64; 3]; 3],
    pub p_inv: [[f64; 3]; 3],
    /// `P^{-1} (0, 0, 1/ω)`.
    pub k: [f64; 3],
    /// Coefficient of `XY` in the near-identity shift of `Z`.
    pub kappa: f64,
    /// Final scale `z̃ = ẑ / C`.
    pub c_scale: f64,
}

fn rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)]))
}

fn linear_polys(m: &[[f64; 3]; 3]) -> [Poly<f64>; 3] {
    m.map(|row| {
        (0..3).fold(Poly::zero(3), |acc, j| {
            if row[j] == 0.0 {
                acc
            } else {
                acc.add(&Poly::var(3, j).scale(&row[j]))
            }
        })
    })
}

impl FHNTransform {
    pub fn new(params: &FHNParams) -> Result<Self> {
        let (b, d) = (params.b, params.d);
        let w = params.omega();
        if !w.is_finite() || w <= 0.0 {
            return Err(QhError::Domain("need d (1 − b^2 d^3) > 0".into()));
        }
        if b == 0.0 {
            return Err(QhError::Domain("b=0: C=0".into()));
        }
        let p = Matrix3::new(1.0, 0.0, d, b * b * d * d, b * d * w, 1.0, 0.0, -w, 0.0);
        let p_inv = p
            .try_inverse()
            .ok_or_else(|| QhError::Numeric("singular reduction matrix".into()))?;
        let k = p_inv * Vector3::new(0.0, 0.0, 1.0 / w);
        let c_scale = k[2] * (1.0 - d) / d;
        if c_scale.abs() < STRUCTURE_TOL {
            return Err(QhError::Domain("d=1: C=0".into()));
        }
        Ok(FHNTransform {
            omega: w,
            p: rows(&p),
            p_inv: rows(&p_inv),
            k: [k[0], k[1], k[2]],
            kappa: k[2] * (d - 1.0) / (2.0 * d),
            c_scale,
        })
    }

    fn p_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.p[i][j])
    }

    fn p_inv_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.p_inv[i][j])
    }

    /// Reduced coordinates of an FHN point.
    pub fn to_reduced(&self, x: &[f64; 3]) -> [f64; 3] {
        let v = self.p_inv_matrix() * Vector3::new(x[0], x[1], x[2]);
        [v[0], v[1], (v[2] + self.kappa * v[0] * v[1]) / self.c_scale]
    }

    /// FHN point of reduced coordinates.
    pub fn from_reduced(&self, u: &[f64; 3]) -> [f64; 3] {
        let z = self.c_scale * u[2] - self.kappa * u[0] * u[1];
        let v = self.p_matrix() * Vector3::new(u[0], u[1], z);
        [v[0], v[1], v[2]]
    }

    /// The FHN field in reduced coordinates and time `T = ω t`.
    pub fn apply(&self, field: &VField<f64>, order: ReductionOrder) -> Result<VField<f64>> {
        let mut g =
            change_coordinates(field, &linear_polys(&self.p_inv), &linear_polys(&self.p))?.scale(&(1.0 / self.omega));
        let x = Poly::<f64>::var(3, 0);
        let y = Poly::<f64>::var(3, 1);
        let z = Poly::<f64>::var(3, 2);
        let xy = x.mul(&y);
        let shift = |g: &VField<f64>, k: f64| {
            change_coordinates(
                g,
                &[x.clone(), y.clone(), z.add(&xy.scale(&k))],
                &[x.clone(), y.clone(), z.sub(&xy.scale(&k))],
            )
        };
        let scale = |g: &VField<f64>, c: f64| {
            change_coordinates(
                g,
                &[x.clone(), y.clone(), z.scale(&(1.0 / c))],
                &[x.clone(), y.clone(), z.scale(&c)],
            )
        };
        match order {
            ReductionOrder::ShiftThenScale => {
                g = shift(&g, self.kappa)?;
                g = scale(&g, self.c_scale)?;
            }
            ReductionOrder::ScaleThenShift => {
                g = scale(&g, self.c_scale)?;
                g = shift(&g, self.kappa / self.c_scale)?;
            }
        }
        Ok(g)
    }
}

/// Reduced critical system with its principal part set exactly.
#[derive(Clone, Debug)]
pub struct FHNReduction {
    pub params: FHNParams,
    pub transform: FHNTransform,
    pub field: VField<f64>,
    /// Deviation of the computed principal part (and of any lower-degree
    /// terms) from the Hopf-zero principal field.
    pub principal_residual: f64,
}

pub fn fhn_reduce(params: &FHNParams) -> Result<FHNReduction> {
    fhn_reduce_with(params, ReductionOrder::ShiftThenScale)
}

pub fn fhn_reduce_with(params: &FHNParams, order: ReductionOrder) -> Result<FHNReduction> {
    let crit = params.at_critical();
    let transform = FHNTransform::new(&crit)?;
    let g = transform.apply(&crit.field(), order)?;
    let t = hz_type();
    let f0 = hz_principal::<f64>().field();
    let mut residual = g.homogeneous_part(&t, 0).sub(&f0).max_abs();
    for (k, part) in g.qh_components(&t) {
        if k < 0 {
            residual = residual.max(part.max_abs());
        }
    }
    if residual > STRUCTURE_TOL {
        return Err(QhError::Numeric(format!("principal part off by {residual:e}")));
    }
    let higher = g.sub(&g.truncate(&t, 0));
    Ok(FHNReduction {
        params: *params,
        transform,
        field: f0.add(&higher),
        principal_residual: residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NFCoeffs {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
}

/// Engine result next to the reference closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoeffComparison {
    pub engine: NFCoeffs,
    pub closed_form: NFCoeffs,
    pub max_abs_diff: f64,
}

impl CoeffComparison {
    pub fn agrees(&self, tol: f64) -> bool {
        self.max_abs_diff <= tol
    }
}

/// `(−d^2/(2ω), d^2/(2ω), −d/(2b))`.
pub fn closed_form_coeffs(p: &FHNParams) -> NFCoeffs {
    let w = p.omega();
    NFCoeffs {
        a1: -p.d * p.d / (2.0 * w),
        b1: p.d * p.d / (2.0 * w),
        c1: -p.d / (2.0 * p.b),
    }
}

/// Normal-form coefficients of the reduced critical system.
pub fn engine_coeffs(red: &FHNReduction) -> Result<NFCoeffs> {
    let mut engine = NFEngine::new(hz_principal::<f64>(), Mode::Conjugation, -1);
    let res = engine.run(&red.field, 2, PreNormalization { nu: Poly::zero(2) })?;
    let (a1, b1, c1) = extract_coeffs(res.term(2).expect("degree 2 recorded"));
    Ok(NFCoeffs { a1, b1, c1 })
}

pub fn fhn_coeffs(params: &FHNParams) -> Result<CoeffComparison> {
    let engine = engine_coeffs(&fhn_reduce(params)?)?;
    let closed_form = closed_form_coeffs(params);
    let max_abs_diff = [
        engine.a1 - closed_form.a1,
        engine.b1 - closed_form.b1,
        engine.c1 - closed_form.c1,
    ]
    .iter()
    .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(CoeffComparison {
        engine,
        closed_form,
        max_abs_diff,
    })
}

/// Unfolding parameters by three routes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Unfolding {
    /// Published first-order expressions.
    pub reference: (f64, f64),
    /// Miniversal reduction of the linearized perturbation.
    pub miniversal: (f64, f64),
    /// `(Re λ / Im λ, λ0 / Im λ)` from the exact spectrum.
    pub spectral: (f64, f64),
    pub reduction: MiniversalReduction,
}

impl Unfolding {
    pub fn epsilon(&self) -> f64 {
        self.miniversal.0
    }

    pub fn delta(&self) -> f64 {
        self.miniversal.1
    }
}

/// The reference first-order `(eps, delta)`.
pub fn reference_unfolding(p: &FHNParams) -> (f64, f64) {
    let (b, d, w) = (p.b, p.d, p.omega());
    let (da, dc) = (p.delta_a(), p.delta_c());
    let s = 1.0 + d * d;
    let eps =
        d * d * (1.0 - d * d) * (b * d - 2.0 * w.powi(3)) / (w.powi(3) * s * s) * da - (1.0 - d * d) / (w * s * s) * dc;
    let delta = b * d * (d * d - 1.0) / (w.powi(3) * s) * da;
    (eps, delta)
}

/// Versal data read off the perturbed linear part in reduced coordinates.
pub fn versal_params(p: &FHNParams) -> VersalParams {
    let (b, d, w) = (p.b, p.d, p.omega());
    let (da, dc) = (p.delta_a(), p.delta_c());
    let w3 = w.powi(3);
    let k1 = -b * d / w3;
    VersalParams {
        alpha1: -b * d / w3 * da,
        alpha2: -b * d / (w * w) * dc,
        beta1: dc / w,
        beta2: -da / (w * w),
        gamma: [b / w3 * da, -b / (w * w) * dc, b * d / w3 * da, 0.0, k1 * da, 0.0],
    }
}

/// Ratios of the perturbed spectrum: `(Re λ / Im λ, λ0 / Im λ)`.
pub fn spectral_unfolding(p: &FHNParams) -> (f64, f64) {
    let ev = p.eigenvalues();
    let pair = ev[2];
    let real = ev[1];
    (pair.re / pair.im, real.re / pair.im)
}

pub fn fhn_unfolding(p: &FHNParams) -> Result<Unfolding> {
    let reduction = miniversal_reduce(&versal_params(p))?;
    Ok(Unfolding {
        reference: reference_unfolding(p),
        miniversal: (reduction.epsilon, reduction.delta),
        spectral: spectral_unfolding(p),
        reduction,
    })
}

/// Periodic orbit of the truncated parametric normal form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitPrediction {
    pub exists: bool,
    pub radius: f64,
    /// Height of the orbit, `−eps/a1`.
    pub z_offset: f64,
    /// The reference height `−(eps/a1) sqrt(eps (a1 delta − b1 eps))`.
    pub reference_z_offset: f64,
    pub angular_frequency: f64,
    /// Nontrivial multipliers as `(re, im)`; the third is `1`.
    pub multipliers: [(f64, f64); 2],
}

impl OrbitPrediction {
    /// Period in normal-form time.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.angular_frequency
    }
}

pub fn predict_orbit(c: &NFCoeffs, eps: f64, delta: f64) -> Result<OrbitPrediction> {
    if c.a1 == 0.0 {
        return Err(QhError::Domain("a1 = 0: no orbit prediction".into()));
    }
    let s = eps * (c.a1 * delta - c.b1 * eps);
    let exists = s > 0.0;
    let root = s.max(0.0).sqrt();
    let lin = c.a1 * delta - 2.0 * c.b1 * eps;
    let disc = Complex::new(lin * lin + 8.0 * c.a1 * eps * (c.a1 * delta - c.b1 * eps), 0.0).sqrt();
    let mult = |sign: f64| {
        let m = (Complex::<f64>::i() * (Complex::new(lin, 0.0) + disc * sign) / (2.0 * c.a1)).exp();
        (m.re, m.im)
    };
    Ok(OrbitPrediction {
        exists,
        radius: std::f64::consts::SQRT_2 / c.a1.abs() * root,
        z_offset: -eps / c.a1,
        reference_z_offset: -eps / c.a1 * root,
        angular_frequency: 1.0 - c.c1 * eps / c.a1,
        multipliers: [mult(1.0), mult(-1.0)],
    })
}

/// Sign test of the reference existence condition, `d ≠ ±1` included.
pub fn reference_existence(p: &FHNParams) -> bool {
    let (b, d, w) = (p.b, p.d, p.omega());
    let (da, dc) = (p.delta_a(), p.delta_c());
    let w2 = w * w;
    let w3 = w2 * w;
    let l = (b + 2.0 * d * w3) * d * da + w2 * dc;
    let r = (b * d - 2.0 * w3) * d * d * da - w2 * dc;
    d.abs() != 1.0 && l != 0.0 && r != 0.0 && l.signum() == r.signum()
}
