//! `qhnf`: normal forms of quasi-homogeneous vector fields from the command
//! line.
//!
//! Exit codes: 0 success, 2 parse, 3 assumption, 4 numeric or solver.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use qhnf::fhn::{closed_form_coeffs, fhn_coeffs, fhn_unfolding, predict_orbit, reference_existence, FHNParams};
use qhnf::format::{parse_assignment, parse_hz_input, to_json, HZReport, RunReport, VFieldFile};
use qhnf::homolog::{HomologicalOperator, Mode};
use qhnf::hopfzero::{hz_coefficient_formulas, parametric_normal_form, HZInput};
use qhnf::nform::{check_assumptions, normal_form, NFProblem};
use qhnf::sim::validate_fhn_orbit;
use qhnf::split::Splitter;
use qhnf::{QHType, QhError};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "qhnf", version, about = "Quasi-homogeneous normal forms of 3D vector fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normal form of the field in FILE through degree r + N.
    Normalize {
        file: PathBuf,
        /// Weights overriding the file header, e.g. `1,1,2`.
        #[arg(long = "type", value_name = "T1,T2,T3")]
        qh_type: Option<String>,
        #[arg(long, default_value_t = 5)]
        degree: i64,
        #[arg(long, value_enum, default_value_t = ModeArg::Conj)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Writes each homological operator matrix as `op_<k>.csv` into DIR.
        #[arg(long, value_name = "DIR")]
        dump_matrices: Option<PathBuf>,
    },
    /// Hopf-zero coefficients of a perturbation given by named coefficients.
    Hopfzero {
        /// `NAME = value` lines or a JSON object.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Coefficient assignment, applied after the file; repeatable.
        #[arg(long = "set", value_name = "NAME=VALUE")]
        set: Vec<String>,
    },
    /// FitzHugh-Nagumo near its Hopf-zero point `a = -1/d`, `c = b d`.
    Fhn {
        #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
        d: f64,
        /// Offset of `a` from its critical value.
        #[arg(long, value_parser = parse_real, allow_hyphen_values = true, default_value = "0")]
        da: f64,
        /// Offset of `c` from its critical value.
        #[arg(long, value_parser = parse_real, allow_hyphen_values = true, default_value = "0")]
        dc: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(subcommand)]
        action: Option<FhnAction>,
    },
}

#[derive(Subcommand)]
enum FhnAction {
    /// Integrates the full system and measures the predicted orbit.
    Simulate {
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Trajectory CSV of one period of the measured orbit.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Conj,
    Orbital,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Conj => Mode::Conjugation,
            ModeArg::Orbital => Mode::Orbital,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Failures sorted by exit code.
enum Failure {
    Parse(String),
    Assumption(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Assumption(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Assumption(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<QhError> for Failure {
    fn from(e: QhError) -> Self {
        let m = e.to_string();
        match e {
            QhError::Parse { .. } | QhError::UnknownCoefficient(_) => Failure::Parse(m),
            QhError::Assumption(_)
            | QhError::KernelHypothesis { .. }
            | QhError::Domain(_)
            | QhError::InvalidType(_)
            | QhError::NotHomogeneous(..)
            | QhError::DegreeUndefined
            | QhError::ArityMismatch(_) => Failure::Assumption(m),
            QhError::NotInRange { .. } | QhError::Numeric(_) => Failure::Numeric(m),
        }
    }
}

/// A decimal, scientific or `p/q` literal.
fn parse_real(s: &str) -> Result<f64, String> {
    let bad = || format!("'{s}' is not a number or a fraction p/q");
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad())?;
            let d: f64 = d.trim().parse().map_err(|_| bad())?;
            n / d
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Numeric(format!("{}: {e}", path.display())))
}

fn parse_type(s: &str) -> Result<QHType, Failure> {
    let w: Option<Vec<u32>> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().ok())
        .collect();
    w.filter(|w| w.len() == 3)
        .and_then(|w| QHType::new(&w).ok())
        .ok_or_else(|| Failure::Parse(format!("--type: expected three positive weights, got '{s}'")))
}

fn normalize(
    file: &Path,
    qh_type: Option<&str>,
    degree: i64,
    mode: Mode,
    format: Format,
    dump: Option<&Path>,
) -> Result<String, Failure> {
    let start = Instant::now();
    let mut vf = VFieldFile::parse(&read(file)?)?;
    if let Some(t) = qh_type {
        vf.qh_type = parse_type(t)?;
    }
    if degree < 1 {
        return Err(Failure::Assumption("--degree must be at least 1".into()));
    }
    let problem = NFProblem::from_field(vf.field.clone(), vf.qh_type.clone(), vf.r, degree, mode)?;
    let result = normal_form(&problem)?;
    let replay_ok = result.replay(&vf.field)? == result.normal_form;
    if let Some(dir) = dump {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Numeric(format!("{}: {e}", dir.display())))?;
        let splitter = Splitter::new(result.principal.clone());
        for k in 1..=degree {
            let op = HomologicalOperator::build(&splitter, k, mode, None)?;
            write(&dir.join(format!("op_{k}.csv")), &op.op.to_csv())?;
        }
    }
    let report = RunReport::new(
        &vf,
        &result,
        check_assumptions(&result.principal),
        replay_ok,
        start.elapsed().as_secs_f64() * 1e3,
    );
    Ok(match format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    })
}

fn hopfzero(file: Option<&Path>, set: &[String]) -> Result<String, Failure> {
    let mut input = match file {
        Some(p) => parse_hz_input(&read(p)?)?,
        None => HZInput::new(),
    };
    for s in set {
        let (name, value) = parse_assignment(s)?;
        input.set(&name, value)?;
    }
    let conj = parametric_normal_form(&input, Mode::Conjugation)?;
    let orbital = parametric_normal_form(&input, Mode::Orbital)?;
    Ok(to_json(&HZReport::new(
        &input,
        &conj,
        &orbital,
        hz_coefficient_formulas(&input),
    )))
}

#[derive(Serialize)]
struct FhnReport {
    params: FHNParams,
    omega: f64,
    coefficients: qhnf::fhn::NFCoeffs,
    closed_form: qhnf::fhn::NFCoeffs,
    unfolding: qhnf::fhn::Unfolding,
    exists: bool,
    reference_exists: bool,
    prediction: qhnf::fhn::OrbitPrediction,
    #[serde(skip_serializing_if = "Option::is_none")]
    simulation: Option<SimReport>,
}

#[derive(Serialize)]
struct SimReport {
    tol: f64,
    found: bool,
    measured_radius: Option<f64>,
    predicted_radius: f64,
    relative_error: Option<f64>,
    return_time: Option<f64>,
    failure: Option<String>,
}

fn fhn(b: f64, d: f64, da: f64, dc: f64, format: Format, action: Option<&FhnAction>) -> Result<String, Failure> {
    let params = FHNParams::near_critical(b, d, da, dc)?;
    let cmp = fhn_coeffs(&params)?;
    let unfolding = fhn_unfolding(&params)?;
    let prediction = predict_orbit(&cmp.engine, unfolding.epsilon(), unfolding.delta())?;
    let mut report = FhnReport {
        params,
        omega: params.omega(),
        coefficients: cmp.engine,
        closed_form: closed_form_coeffs(&params),
        exists: prediction.exists,
        reference_exists: reference_existence(&params),
        prediction,
        unfolding,
        simulation: None,
    };
    if let Some(FhnAction::Simulate { tol, out }) = action {
        if tol.is_nan() || *tol <= 0.0 {
            return Err(Failure::Assumption("--tol must be positive".into()));
        }
        let v = validate_fhn_orbit(&params, *tol)?;
        if let (Some(path), Some(orbit)) = (out, &v.orbit) {
            write(path, &orbit.to_csv())?;
        }
        report.simulation = Some(SimReport {
            tol: *tol,
            found: v.found(),
            measured_radius: v.measured_radius,
            predicted_radius: v.prediction.radius,
            relative_error: v.relative_error,
            return_time: v.fixed_point.as_ref().map(|f| f.return_time),
            failure: v.failure.clone(),
        });
    }
    Ok(match format {
        Format::Json => to_json(&report),
        Format::Text => fhn_text(&report),
    })
}

fn fhn_text(r: &FhnReport) -> String {
    let mut s = String::new();
    let p = &r.params;
    let _ = writeln!(s, "params: a = {}, b = {}, c = {}, d = {}", p.a, p.b, p.c, p.d);
    let _ = writeln!(s, "omega: {}", r.omega);
    let c = &r.coefficients;
    let _ = writeln!(s, "a1: {}\nb1: {}\nc1: {}", c.a1, c.b1, c.c1);
    let f = &r.closed_form;
    let _ = writeln!(s, "closed form: a1 = {}, b1 = {}, c1 = {}", f.a1, f.b1, f.c1);
    let u = &r.unfolding;
    let _ = writeln!(s, "epsilon: {}\ndelta: {}", u.epsilon(), u.delta());
    let _ = writeln!(
        s,
        "reference unfolding: epsilon = {}, delta = {}",
        u.reference.0, u.reference.1
    );
    let _ = writeln!(
        s,
        "spectral unfolding: epsilon = {}, delta = {}",
        u.spectral.0, u.spectral.1
    );
    let _ = writeln!(s, "exists: {} (reference condition: {})", r.exists, r.reference_exists);
    let o = &r.prediction;
    let _ = writeln!(
        s,
        "radius: {}\nz_offset: {}\nperiod: {}",
        o.radius,
        o.z_offset,
        o.period()
    );
    if let Some(sim) = &r.simulation {
        let _ = writeln!(s, "simulation (tol {}): found = {}", sim.tol, sim.found);
        if let Some(m) = sim.measured_radius {
            let _ = writeln!(s, "  measured radius: {m}");
        }
        if let Some(e) = sim.relative_error {
            let _ = writeln!(s, "  relative error: {e}");
        }
        if let Some(f) = &sim.failure {
            let _ = writeln!(s, "  failure: {f}");
        }
    }
    s
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Normalize {
            file,
            qh_type,
            degree,
            mode,
            format,
            dump_matrices,
        } => normalize(
            &file,
            qh_type.as_deref(),
            degree,
            mode.into(),
            format,
            dump_matrices.as_deref(),
        ),
        Command::Hopfzero { file, set } => hopfzero(file.as_deref(), &set),
        Command::Fhn {
            b,
            d,
            da,
            dc,
            format,
            action,
        } => fhn(b, d, da, dc, format, action.as_ref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(mut out) => {
            if !out.ends_with('\n') {
                out.push('\n');
            }
            // A closed pipe downstream is not an error of ours.
            let _ = std::io::stdout().lock().write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
