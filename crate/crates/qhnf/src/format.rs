//! Text formats read by the command line and the reports it writes.
//!
//! A vector-field file is a header followed by one line per component:
//!
//! ```text
//! # comment
//! vars: x y z
//! type: 1 1 2
//! r: 0
//! dx: -y + x z
//! dy: x
//! dz: 1/2 x^2 + 1/2 y^2
//! ```
//!
//! Printing a parsed file and parsing it again yields the same value.
//! Reports keep every exact coefficient as a `p/q` string.

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::error::{QhError, Result};
use crate::homolog::Mode;
use crate::hopfzero::{canonical_name, HZCoeffs, HZInput, ParametricNF};
use crate::nform::{AssumptionReport, NFResult};
use crate::qhpoly::{format_poly_named, parse_poly, QHType};
use crate::scalar::{parse_rational, Rational};
use crate::vfield::VField;

const COMPONENT_KEYS: [&str; 3] = ["dx", "dy", "dz"];

/// A parsed vector-field file.
#[derive(Clone, Debug, PartialEq)]
pub struct VFieldFile {
    pub vars: [String; 3],
    pub qh_type: QHType,
    /// Declared principal degree.
    pub r: i64,
    pub field: VField<Rational>,
}

impl VFieldFile {
    pub fn new(field: VField<Rational>, qh_type: QHType, r: i64) -> Self {
        VFieldFile {
            vars: ["x", "y", "z"].map(String::from),
            qh_type,
            r,
            field,
        }
    }

    pub fn parse(src: &str) -> Result<Self> {
        let mut vars: Option<[String; 3]> = None;
        let mut qh_type = None;
        let mut r = None;
        let mut comps: [Option<(usize, usize, String)>; 3] = [None, None, None];
        for (idx, raw) in src.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("");
            if body.trim().is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once(':') else {
                let col = body.len() - body.trim_start().len() + 1;
                return Err(QhError::parse(line, col, "expected 'key: value'"));
            };
            let key_trim = key.trim();
            let value_col = key.len() + 2 + (value.len() - value.trim_start().len());
            let value = value.trim();
            match key_trim {
                "vars" => {
                    let names: Vec<&str> = value.split_whitespace().collect();
                    let valid = |s: &&str| {
                        s.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
                            && s.chars().all(|c| c.is_alphanumeric() || c == '_')
                    };
                    if names.len() != 3 || !names.iter().all(valid) {
                        return Err(QhError::parse(line, value_col, "expected three variable names"));
                    }
                    if names[0] == names[1] || names[0] == names[2] || names[1] == names[2] {
                        return Err(QhError::parse(line, value_col, "variable names must be distinct"));
                    }
                    vars = Some([names[0], names[1], names[2]].map(String::from));
                }
                "type" => {
                    let w: Option<Vec<u32>> = value
                        .split(|c: char| c.is_whitespace() || c == ',')
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse().ok())
                        .collect();
                    let t = w
                        .filter(|w| w.len() == 3)
                        .and_then(|w| QHType::new(&w).ok())
                        .ok_or_else(|| QhError::parse(line, value_col, "expected three positive weights"))?;
                    qh_type = Some(t);
                }
                "r" => {
                    let v = value
                        .parse()
                        .map_err(|_| QhError::parse(line, value_col, "expected an integer degree"))?;
                    r = Some(v);
                }
                k => match COMPONENT_KEYS.iter().position(|c| *c == k) {
                    Some(j) if comps[j].is_some() => {
                        return Err(QhError::parse(line, 1, format!("duplicate component '{k}'")));
                    }
                    Some(j) => comps[j] = Some((line, value_col, value.to_string())),
                    None => {
                        let col = key.len() - key.trim_start().len() + 1;
                        return Err(QhError::parse(line, col, format!("unknown key '{k}'")));
                    }
                },
            }
        }
        let last = src.lines().count().max(1);
        let vars = vars.unwrap_or_else(|| ["x", "y", "z"].map(String::from));
        let qh_type = qh_type.ok_or_else(|| QhError::parse(last, 1, "missing 'type' header"))?;
        let r = r.unwrap_or(0);
        let names: Vec<&str> = vars.iter().map(String::as_str).collect();
        let mut polys = Vec::with_capacity(3);
        for (j, c) in comps.into_iter().enumerate() {
            let (line, col, text) =
                c.ok_or_else(|| QhError::parse(last, 1, format!("missing component '{}'", COMPONENT_KEYS[j])))?;
            polys.push(parse_poly(&text, &names, line, col)?);
        }
        Ok(VFieldFile {
            vars,
            qh_type,
            r,
            field: VField::new(polys)?,
        })
    }

    fn names(&self) -> [&str; 3] {
        [self.vars[0].as_str(), self.vars[1].as_str(), self.vars[2].as_str()]
    }
}

impl fmt::Display for VFieldFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.qh_type.weights();
        writeln!(f, "vars: {}", self.vars.join(" "))?;
        writeln!(f, "type: {} {} {}", w[0], w[1], w[2])?;
        writeln!(f, "r: {}", self.r)?;
        for (j, key) in COMPONENT_KEYS.iter().enumerate() {
            let text = format_poly_named(self.field.comp(j), Some(&self.qh_type), &self.names());
            writeln!(f, "{key}: {text}")?;
        }
        Ok(())
    }
}

/// Reads Hopf-zero input: a JSON object `{"NAME": "p/q" | integer}` when the
/// text starts with `{`, otherwise `NAME = value` lines with `#` comments.
pub fn parse_hz_input(src: &str) -> Result<HZInput> {
    if src.trim_start().starts_with('{') {
        return parse_hz_json(src);
    }
    let mut input = HZInput::new();
    for (idx, raw) in src.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let (name, value) = body
            .split_once('=')
            .ok_or_else(|| QhError::parse(idx + 1, 1, "expected 'NAME = value'"))?;
        let col = name.len() + 2;
        let v = parse_rational(value).ok_or_else(|| QhError::parse(idx + 1, col, "malformed rational"))?;
        input.set(name.trim(), v)?;
    }
    Ok(input)
}

fn parse_hz_json(src: &str) -> Result<HZInput> {
    let map: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(src).map_err(|e| QhError::parse(e.line(), e.column(), e.to_string()))?;
    let mut input = HZInput::new();
    for (name, value) in &map {
        let text = match value {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) if n.is_i64() => n.to_string(),
            _ => {
                return Err(QhError::parse(
                    1,
                    1,
                    format!("'{name}': expected an integer or a \"p/q\" string"),
                ))
            }
        };
        let v = parse_rational(&text).ok_or_else(|| QhError::parse(1, 1, format!("'{name}': malformed rational")))?;
        input.set(name, v)?;
    }
    Ok(input)
}

/// Parses one `NAME=value` assignment.
pub fn parse_assignment(s: &str) -> Result<(String, Rational)> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| QhError::parse(1, 1, format!("expected NAME=VALUE, got '{s}'")))?;
    let v = parse_rational(value).ok_or_else(|| QhError::parse(1, name.len() + 2, "malformed rational"))?;
    let name = name.trim();
    canonical_name(name).ok_or_else(|| QhError::UnknownCoefficient(name.to_string()))?;
    Ok((name.to_string(), v))
}

fn render_field(f: &VField<Rational>, t: &QHType, names: &[&str]) -> [String; 3] {
    [0, 1, 2].map(|j| format_poly_named(f.comp(j), Some(t), names))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrincipalReport {
    pub h: String,
    pub f: String,
    #[serde(rename = "type")]
    pub qh_type: [u32; 3],
    pub r: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeReport {
    pub degree: i64,
    pub term: [String; 3],
    pub generator: [String; 3],
    pub mu: String,
    pub certified: bool,
}

/// Outcome of a `normalize` run.  The text rendering prints exactly the
/// fields that the JSON rendering serializes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub mode: Mode,
    pub principal: PrincipalReport,
    pub assumptions: AssumptionReport,
    pub max_degree: i64,
    /// Drift shift `z -> z - nu(x, y)` applied before the degree loop.
    pub shift: String,
    pub degrees: Vec<DegreeReport>,
    pub normal_form: [String; 3],
    /// Generator and time rescaling accumulated over all degrees.
    pub generator: [String; 3],
    pub mu: String,
    /// Replaying the recorded transformation on the input reproduced the
    /// normal form.
    pub replay_ok: bool,
    pub elapsed_ms: f64,
}

impl RunReport {
    pub fn new(
        file: &VFieldFile,
        result: &NFResult<Rational>,
        assumptions: AssumptionReport,
        replay_ok: bool,
        elapsed_ms: f64,
    ) -> Self {
        let names = file.names();
        let t = &result.principal.t;
        let planar = &names[..2];
        let p = |q: &crate::Poly<Rational>, arity_names: &[&str]| format_poly_named(q, Some(t), arity_names);
        let w = t.weights();
        RunReport {
            mode: result.mode,
            principal: PrincipalReport {
                h: p(&result.principal.h, planar),
                f: p(&result.principal.f, planar),
                qh_type: [w[0], w[1], w[2]],
                r: result.principal.r,
            },
            assumptions,
            max_degree: result.max_degree,
            shift: p(&result.shift.nu, &names[..result.shift.nu.arity()]),
            degrees: result
                .records
                .iter()
                .map(|rec| DegreeReport {
                    degree: rec.degree,
                    term: render_field(&rec.term, t, &names),
                    generator: render_field(&rec.generator, t, &names),
                    mu: p(&rec.mu, &names),
                    certified: rec.certified,
                })
                .collect(),
            normal_form: render_field(&result.normal_form, t, &names),
            generator: render_field(&result.generator, t, &names),
            mu: p(&result.mu, &names),
            replay_ok,
            elapsed_ms,
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mode = match self.mode {
            Mode::Conjugation => "conj",
            Mode::Orbital => "orbital",
        };
        let field = |s: &mut String, label: &str, f: &[String; 3]| {
            let _ = writeln!(s, "{label}:");
            let pad = " ".repeat(label.len() - label.trim_start().len() + 2);
            for (k, c) in COMPONENT_KEYS.iter().zip(f) {
                let _ = writeln!(s, "{pad}{k}: {c}");
            }
        };
        let _ = writeln!(s, "mode: {mode}");
        let pr = &self.principal;
        let _ = writeln!(
            s,
            "principal: h = {}, f = {}, type = {} {} {}, r = {}",
            pr.h, pr.f, pr.qh_type[0], pr.qh_type[1], pr.qh_type[2], pr.r
        );
        let a = &self.assumptions;
        let _ = writeln!(
            s,
            "assumptions: squarefree = {}, drift_reduced = {}",
            a.squarefree, a.drift_reduced
        );
        for m in &a.messages {
            let _ = writeln!(s, "  note: {m}");
        }
        let _ = writeln!(s, "max_degree: {}", self.max_degree);
        let _ = writeln!(s, "shift: {}", self.shift);
        for d in &self.degrees {
            let _ = writeln!(s, "degree {} (certified = {}):", d.degree, d.certified);
            field(&mut s, "  term", &d.term);
            field(&mut s, "  generator", &d.generator);
            let _ = writeln!(s, "  mu: {}", d.mu);
        }
        field(&mut s, "normal_form", &self.normal_form);
        field(&mut s, "generator", &self.generator);
        let _ = writeln!(s, "mu: {}", self.mu);
        let _ = writeln!(s, "replay_ok: {}", self.replay_ok);
        let _ = writeln!(s, "elapsed_ms: {:.3}", self.elapsed_ms);
        s
    }
}

/// Result of the `hopfzero` command: engine coefficients, the closed-form
/// evaluation, and whether the two agree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HZReport {
    pub input: Vec<(String, String)>,
    pub engine: HZCoeffs,
    pub formulas: HZCoeffs,
    pub orbital: HZCoeffs,
    pub two_path: &'static str,
}

impl HZReport {
    pub fn new(input: &HZInput, conj: &ParametricNF, orbital: &ParametricNF, formulas: HZCoeffs) -> Self {
        // Orbital coefficients match the closed forms at eps = delta = 0.
        let agree = conj.coeffs == formulas
            && orbital.coeffs.a1.critical() == formulas.a1.critical()
            && orbital.coeffs.b1.critical() == formulas.b1.critical();
        HZReport {
            input: input
                .nonzero()
                .map(|(n, v)| (n.to_string(), crate::scalar::rational_string(v)))
                .collect(),
            engine: conj.coeffs.clone(),
            formulas,
            orbital: orbital.coeffs.clone(),
            two_path: if agree { "pass" } else { "fail" },
        }
    }
}

/// Pretty JSON; exact values are already strings so nothing is rounded.
pub fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report types serialize infallibly")
}
