//! Adaptive integration, Poincaré return maps and periodic-orbit checks.
//!
//! The integrator is the Dormand-Prince 5(4) pair with its free quartic
//! dense output; section crossings are located on the dense output.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{QhError, Result};
use crate::fhn::{fhn_coeffs, fhn_reduce, fhn_unfolding, predict_orbit, FHNParams, NFCoeffs, OrbitPrediction};

pub type State = [f64; 3];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (also the last stage row: first same as last).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
/// Dense-output weights.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerance {
    pub fn uniform(tol: f64) -> Self {
        Tolerance { rtol: tol, atol: tol }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Stats {
    pub steps: usize,
    pub rejected: usize,
    /// Largest accepted scaled error estimate (at most 1).
    pub max_error: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub stats: Stats,
}

impl Trajectory {
    pub fn last(&self) -> Option<(f64, State)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    /// `t,x,y,z` lines with a header; `{}` formatting of `f64` round-trips.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,y,z\n");
        for (t, p) in self.times.iter().zip(&self.states) {
            let _ = writeln!(s, "{t},{},{},{}", p[0], p[1], p[2]);
        }
        s
    }
}

/// One accepted step with its dense-output coefficients.
struct Step {
    t: f64,
    h: f64,
    cont: [State; 5],
}

impl Step {
    fn at(&self, s: f64) -> State {
        let c = &self.cont;
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = c[0][i] + s * (c[1][i] + (1.0 - s) * (c[2][i] + s * (c[3][i] + (1.0 - s) * c[4][i])));
        }
        out
    }
}

fn axpy(y: &State, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (a, k) in terms {
        for i in 0..3 {
            out[i] += a * k[i];
        }
    }
    out
}

/// Adaptive Dormand-Prince integrator over a vector field.
pub struct Integrator<'f> {
    field: &'f dyn Fn(&State) -> State,
    tol: Tolerance,
    /// Smallest allowed step relative to the time span.
    pub min_step_ratio: f64,
    pub max_steps: usize,
}

impl<'f> Integrator<'f> {
    pub fn new(field: &'f dyn Fn(&State) -> State, tol: Tolerance) -> Result<Self> {
        if !(tol.rtol > 0.0 && tol.atol > 0.0) {
            return Err(QhError::Domain("tolerances must be positive".into()));
        }
        Ok(Integrator {
            field,
            tol,
            min_step_ratio: 1e-14,
            max_steps: 2_000_000,
        })
    }

    /// Starting step from first- and second-derivative estimates.
    fn initial_step(&self, y: &State, f0: &State, span: f64) -> f64 {
        let f = self.field;
        let sc: State = [0, 1, 2].map(|i| self.tol.atol + self.tol.rtol * y[i].abs());
        let rms = |v: &State| ((0..3).map(|i| (v[i] / sc[i]).powi(2)).sum::<f64>() / 3.0).sqrt();
        let (d0, d1) = (rms(y), rms(f0));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span.abs());
        let y1 = axpy(y, &[(h0 * span.signum(), f0)]);
        let f1 = f(&y1);
        let d2 = rms(&[0, 1, 2].map(|i| f1[i] - f0[i])) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span.abs())
    }

    /// Runs until `t1` or until `stop` returns `Some(time, state)` for an
    /// accepted step.
    fn run(
        &self,
        t0: f64,
        y0: State,
        t1: f64,
        mut on_step: impl FnMut(&Step, &State, &State) -> Option<(f64, State)>,
        traj: &mut Trajectory,
    ) -> Result<Option<(f64, State)>> {
        let f = self.field;
        let span = t1 - t0;
        let dir = span.signum();
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(&y);
        let mut h = self.initial_step(&y, &k1, span) * dir;
        let h_min = self.min_step_ratio * span.abs().max(1.0);
        traj.times.push(t);
        traj.states.push(y);
        while (t1 - t) * dir > 0.0 {
            if traj.stats.steps >= self.max_steps {
                return Err(QhError::Numeric("step budget exhausted".into()));
            }
            if (t + h - t1) * dir > 0.0 {
                h = t1 - t;
            }
            let mut k = [[0.0; 3]; 7];
            k[0] = k1;
            for s in 1..7 {
                let terms: Vec<(f64, &State)> = (0..s).map(|j| (h * A[s][j], &k[j])).collect();
                let ys = axpy(&y, &terms);
                k[s] = f(&ys);
            }
            let ynew = axpy(&y, &(0..7).map(|j| (h * B5[j], &k[j])).collect::<Vec<_>>());
            let mut err: f64 = 0.0;
            for i in 0..3 {
                let e: f64 = (0..7).map(|j| E[j] * k[j][i]).sum::<f64>() * h;
                let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(ynew[i].abs());
                err = err.max((e / sc).abs());
            }
            if err <= 1.0 {
                traj.stats.steps += 1;
                traj.stats.max_error = traj.stats.max_error.max(err);
                let c1: State = [0, 1, 2].map(|i| ynew[i] - y[i]);
                let c2: State = [0, 1, 2].map(|i| h * k[0][i] - c1[i]);
                let c3: State = [0, 1, 2].map(|i| c1[i] - h * k[6][i] - c2[i]);
                let c4: State = [0, 1, 2].map(|i| h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>());
                let step = Step {
                    t,
                    h,
                    cont: [y, c1, c2, c3, c4],
                };
                if let Some(hit) = on_step(&step, &y, &ynew) {
                    traj.times.push(hit.0);
                    traj.states.push(hit.1);
                    return Ok(Some(hit));
                }
                t += h;
                y = ynew;
                k1 = k[6];
                traj.times.push(t);
                traj.states.push(y);
            } else {
                traj.stats.rejected += 1;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
            if h.abs() < h_min {
                return Err(QhError::Numeric(format!("step size underflow at t = {t}")));
            }
        }
        Ok(None)
    }

    pub fn integrate(&self, y0: State, t0: f64, t1: f64) -> Result<Trajectory> {
        let mut traj = Trajectory::default();
        self.run(t0, y0, t1, |_, _, _| None, &mut traj)?;
        Ok(traj)
    }
}

/// `integrate` with a plain closure.
pub fn integrate(field: &dyn Fn(&State) -> State, y0: State, t_span: (f64, f64), tol: f64) -> Result<Trajectory> {
    Integrator::new(field, Tolerance::uniform(tol))?.integrate(y0, t_span.0, t_span.1)
}

fn dot(a: &State, b: &State) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Half-plane `{p : normal·p = 0, half·p > 0}` with coordinates
/// `p = u e1 + v e2`; crossings count when `normal·p` increases through 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Section {
    pub normal: State,
    pub half: State,
    pub e1: State,
    pub e2: State,
}

impl Section {
    /// `{y = 0, x > 0}` with in-plane coordinates `(x, z)`.
    pub fn y_zero() -> Self {
        Section {
            normal: [0.0, 1.0, 0.0],
            half: [1.0, 0.0, 0.0],
            e1: [1.0, 0.0, 0.0],
            e2: [0.0, 0.0, 1.0],
        }
    }

    pub fn point(&self, uv: [f64; 2]) -> State {
        [0, 1, 2].map(|i| uv[0] * self.e1[i] + uv[1] * self.e2[i])
    }

    /// In-plane coordinates of a point on the plane.
    pub fn coords(&self, p: &State) -> [f64; 2] {
        let g11 = dot(&self.e1, &self.e1);
        let g12 = dot(&self.e1, &self.e2);
        let g22 = dot(&self.e2, &self.e2);
        let (r1, r2) = (dot(p, &self.e1), dot(p, &self.e2));
        let det = g11 * g22 - g12 * g12;
        [(g22 * r1 - g12 * r2) / det, (g11 * r2 - g12 * r1) / det]
    }

    fn level(&self, p: &State) -> f64 {
        dot(&self.normal, p)
    }
}

/// First positive crossing of the section after leaving `uv`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Return {
    pub point: [f64; 2],
    pub time: f64,
}

pub fn return_map(
    field: &dyn Fn(&State) -> State,
    section: &Section,
    uv: [f64; 2],
    time_cap: f64,
    tol: Tolerance,
) -> Result<Return> {
    let integ = Integrator::new(field, tol)?;
    let mut traj = Trajectory::default();
    let hit = integ.run(
        0.0,
        section.point(uv),
        time_cap,
        |step, y, ynew| {
            let (g0, g1) = (section.level(y), section.level(ynew));
            if !(g0 < 0.0 && g1 >= 0.0) {
                return None;
            }
            // Bisection then secant polish on the dense output.
            let (mut lo, mut hi) = (0.0, 1.0);
            let (mut glo, mut ghi) = (g0, g1);
            for _ in 0..60 {
                let s = if ghi != glo {
                    lo - glo * (hi - lo) / (ghi - glo)
                } else {
                    0.5 * (lo + hi)
                };
                let s = if s <= lo || s >= hi { 0.5 * (lo + hi) } else { s };
                let gs = section.level(&step.at(s));
                if gs < 0.0 {
                    lo = s;
                    glo = gs;
                } else {
                    hi = s;
                    ghi = gs;
                }
                if hi - lo < 1e-15 || gs.abs() < 1e-17 {
                    break;
                }
            }
            let s = if glo.abs() < ghi.abs() { lo } else { hi };
            let p = step.at(s);
            (dot(&section.half, &p) > 0.0).then_some((step.t + s * step.h, p))
        },
        &mut traj,
    )?;
    match hit {
        Some((t, p)) => Ok(Return {
            point: section.coords(&p),
            time: t,
        }),
        None => Err(QhError::Numeric(format!(
            "no return to the section within t = {time_cap}"
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoincareFixedPoint {
    pub point: [f64; 2],
    pub return_time: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Newton iteration on `Π(p) − p` with a forward-difference Jacobian of
/// step `1e-6 (1 + |p|)`.
pub fn poincare_fixed_point(
    field: &dyn Fn(&State) -> State,
    section: &Section,
    guess: [f64; 2],
    time_cap: f64,
    tol: Tolerance,
    residual_tol: f64,
) -> Result<PoincareFixedPoint> {
    let defect = |p: [f64; 2]| -> Result<([f64; 2], f64)> {
        let r = return_map(field, section, p, time_cap, tol)?;
        Ok(([r.point[0] - p[0], r.point[1] - p[1]], r.time))
    };
    let mut p = guess;
    let (mut f, mut time) = defect(p)?;
    let norm = |v: [f64; 2]| v[0].hypot(v[1]);
    let start = norm(f);
    for it in 0..30 {
        let res = norm(f);
        if res < residual_tol {
            return Ok(PoincareFixedPoint {
                point: p,
                return_time: time,
                residual: res,
                iterations: it,
                converged: true,
            });
        }
        let step = 1e-6 * (1.0 + norm(p));
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let mut q = p;
            q[j] += step;
            let (fq, _) = defect(q)?;
            for i in 0..2 {
                jac[i][j] = (fq[i] - f[i]) / step;
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(QhError::Numeric("singular return-map Jacobian".into()));
        }
        let dx = [
            -(jac[1][1] * f[0] - jac[0][1] * f[1]) / det,
            -(-jac[1][0] * f[0] + jac[0][0] * f[1]) / det,
        ];
        p = [p[0] + dx[0], p[1] + dx[1]];
        let next = defect(p)?;
        f = next.0;
        time = next.1;
        if !norm(f).is_finite() || norm(f) > 1e6 * start.max(residual_tol) {
            return Err(QhError::Numeric("Newton iteration diverged".into()));
        }
    }
    let res = norm(f);
    Ok(PoincareFixedPoint {
        point: p,
        return_time: time,
        residual: res,
        iterations: 30,
        converged: res < residual_tol,
    })
}

/// Truncated parametric normal form with cubic-order coefficients.
pub fn truncated_nf(c: NFCoeffs, eps: f64, delta: f64) -> impl Fn(&State) -> State {
    move |p: &State| {
        let [x, y, z] = *p;
        [
            -y + eps * x + c.a1 * z * x - c.c1 * z * y,
            x + eps * y + c.a1 * z * y + c.c1 * z * x,
            delta * z + 0.5 * (x * x + y * y) + c.b1 * z * z,
        ]
    }
}

/// Measured orbit against the prediction, in reduced coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitValidation {
    pub params: FHNParams,
    pub coeffs: NFCoeffs,
    pub epsilon: f64,
    pub delta: f64,
    pub prediction: OrbitPrediction,
    /// `None` when no orbit was found near the seed.
    pub fixed_point: Option<PoincareFixedPoint>,
    /// Mean planar radius over one period, reduced coordinates.
    pub measured_radius: Option<f64>,
    pub relative_error: Option<f64>,
    /// Why no orbit was reported.
    pub failure: Option<String>,
    #[serde(skip)]
    pub orbit: Option<Trajectory>,
}

impl OrbitValidation {
    pub fn found(&self) -> bool {
        self.measured_radius.is_some()
    }
}

/// Seeks the predicted orbit of the full FHN system.
pub fn validate_fhn_orbit(params: &FHNParams, tol: f64) -> Result<OrbitValidation> {
    let red = fhn_reduce(params)?;
    let coeffs = fhn_coeffs(params)?.engine;
    let unfolding = fhn_unfolding(params)?;
    let (eps, delta) = (unfolding.epsilon(), unfolding.delta());
    let prediction = predict_orbit(&coeffs, eps, delta)?;
    let tr = &red.transform;
    let row = |i: usize| tr.p_inv[i];
    let col = |j: usize| [tr.p[0][j], tr.p[1][j], tr.p[2][j]];
    let section = Section {
        normal: row(1),
        half: row(0),
        e1: col(0),
        e2: col(2),
    };
    // Seed from the prediction: (X, Y, z̃) = (r, 0, z*), so Z = C z*.
    let seed_radius = if prediction.exists {
        prediction.radius
    } else {
        std::f64::consts::SQRT_2 / coeffs.a1.abs() * (eps * (coeffs.a1 * delta - coeffs.b1 * eps)).abs().sqrt()
    };
    let seed = [seed_radius, tr.c_scale * prediction.z_offset];
    let p = *params;
    let field = move |s: &State| p.rhs(s);
    let period = 2.0 * PI / tr.omega;
    // Absolute error is measured against the orbit's own size.
    let tolerance = Tolerance {
        rtol: tol,
        atol: tol * seed_radius.clamp(1e-300, 1.0),
    };
    let mut out = OrbitValidation {
        params: *params,
        coeffs,
        epsilon: eps,
        delta,
        prediction: prediction.clone(),
        fixed_point: None,
        measured_radius: None,
        relative_error: None,
        failure: None,
        orbit: None,
    };
    if seed_radius == 0.0 {
        out.failure = Some("prediction radius is zero".into());
        return Ok(out);
    }
    let fp = match poincare_fixed_point(
        &field,
        &section,
        seed,
        4.0 * period,
        tolerance,
        1e-10 * seed_radius.max(1e-3),
    ) {
        Ok(fp) => fp,
        Err(e) => {
            out.failure = Some(format!("solver: {e}"));
            return Ok(out);
        }
    };
    if !fp.converged {
        out.failure = Some("Newton did not converge".into());
        out.fixed_point = Some(fp);
        return Ok(out);
    }
    let start = section.point(fp.point);
    let traj = Integrator::new(&field, tolerance)?.integrate(start, 0.0, fp.return_time)?;
    let radius = mean_planar_radius(&traj, |x| tr.to_reduced(x));
    out.fixed_point = Some(fp);
    if radius < 0.1 * seed_radius || radius > 10.0 * seed_radius {
        out.failure = Some(format!("converged to radius {radius:e}, far from the seed"));
        return Ok(out);
    }
    out.measured_radius = Some(radius);
    if prediction.exists {
        out.relative_error = Some((radius - prediction.radius).abs() / prediction.radius);
    }
    out.orbit = Some(traj);
    Ok(out)
}

/// Time average of `sqrt(X^2 + Y^2)` along a trajectory.
pub fn mean_planar_radius(traj: &Trajectory, to_reduced: impl Fn(&State) -> State) -> f64 {
    let r: Vec<f64> = traj
        .states
        .iter()
        .map(|s| {
            let u = to_reduced(s);
            u[0].hypot(u[1])
        })
        .collect();
    let mut acc = 0.0;
    for i in 1..r.len() {
        acc += 0.5 * (r[i] + r[i - 1]) * (traj.times[i] - traj.times[i - 1]);
    }
    let span = traj.times.last().unwrap_or(&0.0) - traj.times.first().unwrap_or(&0.0);
    if span > 0.0 {
        acc / span
    } else {
        r.first().copied().unwrap_or(0.0)
    }
}
