//! The batch pipeline behind the command line: critical points, point
//! selection, local frame, expansion, and comparison against exact values.

use std::path::PathBuf;

use rug::{Complex, Rational};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::exec::Exec;
use crate::expansion::{self, Expansion};
use crate::geometry::{
    check_minimality, check_smooth, solve_critical, CriticalPointReport, Direction, MinimalityOptions, SolveOptions,
    Verdict,
};
use crate::localdata::{vanishing_order, LocalFrame};
use crate::num::{self, Precision};
use crate::oracle::{self, CoeffTable};
use crate::problem::Problem;
use crate::series::{GaussRat, SparsePoly};

pub const PRECISION_ENV: &str = "GFASYM_PRECISION_BITS";

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default)]
    pub assume_strictly_minimal: bool,
    #[serde(default)]
    pub force_degenerate: bool,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

fn default_one() -> Value {
    json!([{"exp": [], "coef": "1"}])
}

fn default_p() -> u32 {
    1
}

fn default_n() -> u32 {
    2
}

/// One expansion request, as read from JSON.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub variables: Vec<String>,
    #[serde(rename = "G", default = "default_one")]
    pub g: Value,
    #[serde(rename = "G_den", default)]
    pub g_den: Option<Value>,
    #[serde(rename = "H")]
    pub h: Value,
    #[serde(default = "default_p")]
    pub p: u32,
    pub alpha: Vec<Value>,
    #[serde(rename = "N", default = "default_n")]
    pub n_terms: u32,
    #[serde(default)]
    pub n_values: Vec<u64>,
    #[serde(default)]
    pub seeds: Option<Vec<Vec<Value>>>,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default)]
    pub precision_bits: Option<u32>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub exec: Exec,
}

/// A failed run: process exit code, the error, and a diagnostic payload.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: Error,
    pub diagnostic: Value,
}

impl Failure {
    fn new(code: i32, error: Error, diagnostic: Value) -> Self {
        Failure { code, error, diagnostic }
    }

    pub fn to_json(&self) -> Value {
        json!({"exit_code": self.code, "error": self.error.to_string(), "diagnostic": self.diagnostic})
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::OriginOnVariety => 2,
            Error::DegenerateHighDimension(_) => 4,
            _ => 1,
        };
        Failure::new(code, e, Value::Null)
    }
}

pub type RunResult<T> = std::result::Result<T, Failure>;

fn parse_alpha(v: &[Value]) -> crate::Result<Direction> {
    let parts = v
        .iter()
        .map(|x| match x {
            Value::String(s) => num::parse_rational(s),
            Value::Number(n) => num::parse_rational(&n.to_string()),
            other => Err(Error::InvalidDirection(format!("bad component {other}"))),
        })
        .collect::<crate::Result<Vec<Rational>>>()?;
    Direction::new(parts)
}

impl ProblemSpec {
    pub fn from_json_str(s: &str) -> crate::Result<Self> {
        let spec: ProblemSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &std::path::Path) -> crate::Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> crate::Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidPolynomial("pole order p must be at least 1".into()));
        }
        if self.n_terms == 0 {
            return Err(Error::Expansion("N must be at least 1".into()));
        }
        Ok(())
    }

    pub fn nvars(&self) -> usize {
        self.alpha.len()
    }

    /// Precision from the problem file, else the environment, else the default.
    pub fn precision(&self) -> crate::Result<Precision> {
        if let Some(b) = self.precision_bits {
            return Precision::new(b);
        }
        match std::env::var(PRECISION_ENV) {
            Ok(s) => {
                let b = s.trim().parse::<u32>().map_err(|_| Error::Parse(format!("{PRECISION_ENV}={s:?}")))?;
                Precision::new(b)
            }
            Err(_) => Ok(Precision::default()),
        }
    }

    pub fn problem(&self) -> crate::Result<Problem> {
        let d = self.nvars();
        let poly = |v: &Value| -> crate::Result<SparsePoly> {
            // an empty exponent list stands for the constant term
            let expanded = match v.as_array() {
                Some(arr) => Value::Array(
                    arr.iter()
                        .map(|t| match t.get("exp").and_then(Value::as_array) {
                            Some(e) if e.is_empty() => {
                                let mut t = t.clone();
                                t["exp"] = json!(vec![0; d]);
                                t
                            }
                            _ => t.clone(),
                        })
                        .collect(),
                ),
                None => v.clone(),
            };
            SparsePoly::from_json(&expanded, Some(d))
        };
        let alpha = parse_alpha(&self.alpha)?;
        let g = poly(&self.g)?;
        let g_den = self.g_den.as_ref().map(&poly).transpose()?;
        let h = poly(&self.h)?;
        if !self.variables.is_empty() && self.variables.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.variables.len() });
        }
        Problem::new(g, g_den, h, self.p, alpha)
    }

    pub fn seeds(&self, prec: Precision) -> crate::Result<Option<Vec<Vec<Complex>>>> {
        self.seeds
            .as_ref()
            .map(|s| {
                s.iter()
                    .map(|pt| pt.iter().map(|z| crate::json::parse_complex(z, prec)).collect::<crate::Result<Vec<_>>>())
                    .collect::<crate::Result<Vec<_>>>()
            })
            .transpose()
    }
}

fn origin_check(problem: &Problem) -> RunResult<()> {
    if problem.h.constant_term().is_zero() {
        return Err(Failure::new(2, Error::OriginOnVariety, json!({"reason": "origin on variety", "H(0)": "0"})));
    }
    Ok(())
}

/// Every critical point found, with smoothness and minimality verdicts.
pub fn run_critical(spec: &ProblemSpec) -> RunResult<Vec<CriticalPointReport>> {
    let problem = spec.problem()?;
    let prec = spec.precision()?;
    origin_check(&problem)?;
    let seeds = spec.seeds(prec)?;
    let opts = SolveOptions { prec, exec: spec.exec, ..SolveOptions::default() };
    let outcome = solve_critical(&problem.h, &problem.alpha, seeds.as_deref(), &opts)?;
    let mopts = MinimalityOptions { prec, exec: spec.exec, ..MinimalityOptions::default() };
    let mut reports = Vec::new();
    for s in outcome.points {
        let Ok(smooth) = check_smooth(&problem.h, &s.point, prec) else {
            continue;
        };
        let minimality = check_minimality(&problem.h, &s.point, &mopts).unwrap_or_else(|e| crate::geometry::Minimality {
            verdict: Verdict::Unknown,
            evidence: format!("minimality test failed: {e}"),
            companions: vec![],
            witness: None,
        });
        reports.push(CriticalPointReport {
            point: s.point,
            smooth,
            minimality,
            residual_h: s.residual_h,
            residual_system: s.residual_system,
            isolated: s.isolated,
            prec,
        });
    }
    if reports.is_empty() {
        return Err(Failure::new(
            2,
            Error::RootFinding("no critical point found".into()),
            json!({"reason": "no critical point", "solver": outcome.diagnostics}),
        ));
    }
    Ok(reports)
}

fn close(a: &[Complex], b: &[Complex]) -> bool {
    a.iter().zip(b).all(|(x, y)| {
        let diff = Complex::with_val(x.prec().0, x - y);
        num::abs_f64(&diff) <= 1e-15 * (1.0 + num::abs_f64(x))
    })
}

/// Indices of the reports to expand at, or the reason none qualifies.
pub fn select_points(reports: &[CriticalPointReport], overrides: &Overrides) -> RunResult<Vec<usize>> {
    let all: Vec<Value> = reports.iter().map(CriticalPointReport::to_json).collect();
    let valid: Vec<usize> = (0..reports.len()).filter(|&i| reports[i].valid()).collect();
    if valid.is_empty() {
        return Err(Failure::new(
            2,
            Error::Expansion("no valid critical point".into()),
            json!({"reason": "no smooth critical point off the coordinate hyperplanes", "points": all}),
        ));
    }
    let verdict = |i: usize| reports[i].minimality.verdict;
    let pick = |cands: Vec<usize>| -> usize {
        cands.iter().copied().find(|&i| reports[i].is_positive_real()).unwrap_or(cands[0])
    };
    let strict: Vec<usize> = valid.iter().copied().filter(|&i| verdict(i) == Verdict::StrictlyMinimal).collect();
    if !strict.is_empty() {
        return Ok(vec![pick(strict)]);
    }
    let finite: Vec<usize> = valid.iter().copied().filter(|&i| verdict(i) == Verdict::FinitelyMinimal).collect();
    if !finite.is_empty() {
        let lead = pick(finite);
        let mut out = vec![lead];
        // companions that are themselves critical contribute at the same rate
        for comp in &reports[lead].minimality.companions {
            if let Some(j) = valid.iter().copied().find(|&j| j != lead && close(&reports[j].point, comp)) {
                if !out.contains(&j) {
                    out.push(j);
                }
            }
        }
        return Ok(out);
    }
    if overrides.assume_strictly_minimal {
        let mut ranked = valid.clone();
        ranked.sort_by_key(|&i| (verdict(i) == Verdict::NotMinimal, !reports[i].is_positive_real()));
        return Ok(vec![ranked[0]]);
    }
    if valid.iter().any(|&i| matches!(verdict(i), Verdict::Unknown | Verdict::Minimal)) {
        return Err(Failure::new(
            3,
            Error::Expansion("minimality unknown".into()),
            json!({"reason": "minimality could not be established; rerun with --assume-strictly-minimal to proceed", "points": all}),
        ));
    }
    Err(Failure::new(
        2,
        Error::Expansion("no minimal critical point".into()),
        json!({"reason": "every valid critical point is not minimal", "points": all}),
    ))
}

/// Jet order for the smooth path.
pub fn smooth_order(n_terms: u32, d: usize) -> u32 {
    let half = (d as u32).saturating_sub(1).div_ceil(2);
    (2 * n_terms + 2).max(3 * (n_terms + half) + 1).max(6 * n_terms)
}

/// Jet order for the degenerate path with vanishing order `v`.
pub fn degenerate_order(n_terms: u32, v: u32) -> u32 {
    let needed = if v % 2 == 0 { 2 * n_terms * (v + 1) } else { n_terms * (v + 1) };
    ((v + 1) * (n_terms + 1) + 1).max(needed)
}

/// Expansion at one report, choosing the smooth or degenerate path.
pub fn expand_at(
    problem: &Problem,
    report: &CriticalPointReport,
    n_terms: u32,
    force_degenerate: bool,
    exec: Exec,
) -> RunResult<(Expansion, LocalFrame)> {
    let prec = report.prec;
    let d = problem.nvars();
    let perm = &report.smooth.permutation;
    if d == 1 {
        let frame = LocalFrame::build(problem, &report.point, perm, 1, prec)?;
        let e = expansion::expand_univariate(&frame, &report.point)?;
        return Ok((e, frame));
    }
    let frame = LocalFrame::build(problem, &report.point, perm, smooth_order(n_terms, d), prec)?;
    let det = num::abs_f64(&frame.hessian_det());
    if !force_degenerate && det > 1e-10 {
        let e = expansion::expand_smooth(&frame, &report.point, n_terms, exec)?;
        return Ok((e, frame));
    }
    if d >= 3 {
        return Err(Failure::new(
            4,
            Error::DegenerateHighDimension(d),
            json!({"reason": "degenerate Hessian in three or more variables", "hessian_det_abs": det}),
        ));
    }
    let v = vanishing_order(&frame.gt_jet, 1e-12)?;
    let order = degenerate_order(n_terms, v);
    let frame = if order > frame.order() { LocalFrame::build(problem, &report.point, perm, order, prec)? } else { frame };
    let e = expansion::expand_degenerate(&frame, &report.point, n_terms, exec)?;
    Ok((e, frame))
}

/// One line of the comparison table.
#[derive(Clone, Debug)]
pub struct Row {
    pub n: u64,
    pub exact: GaussRat,
    pub approx_1: Complex,
    pub approx_n: Complex,
    pub rel_err_1: Complex,
    pub rel_err_n: Complex,
}

/// `(exact - approx) / exact`.
pub fn relative_error(exact: &Complex, approx: &Complex) -> Complex {
    let p = exact.prec().0;
    Complex::with_val(p, exact - approx) / exact
}

#[derive(Clone, Debug)]
pub struct ExpandResult {
    pub reports: Vec<CriticalPointReport>,
    pub selected: Vec<usize>,
    pub expansion: Expansion,
    pub frames: Vec<LocalFrame>,
    pub rows: Vec<Row>,
    /// Requested `n` with non-integral `n alpha`, left out of the table.
    pub skipped: Vec<u64>,
    pub overrides_used: Vec<String>,
    pub prec: Precision,
}

fn oracle_table(problem: &Problem, indices: &[Vec<u64>]) -> RunResult<Option<CoeffTable>> {
    if indices.is_empty() {
        return Ok(None);
    }
    let d = problem.nvars();
    let bounds: Vec<u32> = (0..d).map(|k| indices.iter().map(|ix| ix[k] as u32).max().unwrap_or(0)).collect();
    Ok(Some(oracle::maclaurin_table(&problem.g, problem.g_den.as_ref(), &problem.h, problem.p, &bounds)?))
}

/// Critical points, expansion, and the exact-vs-approximate table.
pub fn run_expand(spec: &ProblemSpec) -> RunResult<ExpandResult> {
    let problem = spec.problem()?;
    let prec = spec.precision()?;
    let reports = run_critical(spec)?;
    let selected = select_points(&reports, &spec.overrides)?;
    let mut overrides_used = Vec::new();
    if spec.overrides.assume_strictly_minimal
        && !selected.iter().any(|&i| reports[i].minimality.verdict.is_minimal() && reports[i].minimality.verdict != Verdict::Minimal)
    {
        overrides_used.push("assume_strictly_minimal".to_string());
    }
    if spec.overrides.force_degenerate {
        overrides_used.push("force_degenerate".to_string());
    }
    let mut parts = Vec::new();
    let mut frames = Vec::new();
    for &i in &selected {
        let (e, f) = expand_at(&problem, &reports[i], spec.n_terms, spec.overrides.force_degenerate, spec.exec)?;
        parts.push(e);
        frames.push(f);
    }
    let expansion = expansion::combine_points(parts)?;

    let mut usable = Vec::new();
    let mut skipped = Vec::new();
    for &n in &spec.n_values {
        match problem.alpha.index(n) {
            Ok(ix) if n > 0 => usable.push((n, ix)),
            _ => skipped.push(n),
        }
    }
    let indices: Vec<Vec<u64>> = usable.iter().map(|(_, ix)| ix.clone()).collect();
    let table = oracle_table(&problem, &indices)?;
    let rows = spec.exec.map(&usable, |(n, ix)| -> crate::Result<Row> {
        let beta: Vec<u32> = ix.iter().map(|&b| b as u32).collect();
        let exact = oracle::coeff_at(table.as_ref().expect("table built for usable n"), &beta)?.clone();
        let ex = exact.to_complex(prec);
        let approx_1 = expansion.evaluate_terms(*n, Some(1))?.value;
        let approx_n = expansion.evaluate(*n)?.value;
        Ok(Row {
            n: *n,
            rel_err_1: relative_error(&ex, &approx_1),
            rel_err_n: relative_error(&ex, &approx_n),
            exact,
            approx_1,
            approx_n,
        })
    });
    let rows = rows.into_iter().collect::<crate::Result<Vec<_>>>()?;
    Ok(ExpandResult { reports, selected, expansion, frames, rows, skipped, overrides_used, prec })
}

/// Fixed-digit rendering: the real part alone when the value is real.
pub fn fmt_value(z: &Complex, digits: usize) -> String {
    let re = num::fmt_float(z.real(), digits);
    let scale = num::abs_f64(z).max(f64::MIN_POSITIVE);
    if z.imag().is_zero() || z.imag().to_f64().abs() <= 1e-40 * scale {
        re
    } else {
        let im = num::fmt_float(z.imag(), digits);
        let sign = if im.starts_with('-') { "" } else { "+" };
        format!("{re}{sign}{im}i")
    }
}

pub const CSV_DIGITS: usize = 16;

impl ExpandResult {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> crate::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "exact", "approx_1", "approx_N", "rel_err_1", "rel_err_N"]).map_err(oracle::csv_err)?;
        for r in &self.rows {
            let exact = if r.exact.is_real() && r.exact.re.is_integer() {
                r.exact.re.numer().to_string()
            } else {
                oracle::decimal(&r.exact, CSV_DIGITS)
            };
            wr.write_record([
                r.n.to_string(),
                exact,
                fmt_value(&r.approx_1, CSV_DIGITS),
                fmt_value(&r.approx_n, CSV_DIGITS),
                fmt_value(&r.rel_err_1, CSV_DIGITS),
                fmt_value(&r.rel_err_n, CSV_DIGITS),
            ])
            .map_err(oracle::csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_json(&self, spec: &ProblemSpec) -> Value {
        let prec = self.prec;
        let e = &self.expansion;
        let mut out = e.to_json();
        let base: Vec<Value> = (0..e.components.len()).map(|i| crate::json::complex(&e.base(i), prec)).collect();
        let flat: Vec<Value> = e.components[0]
            .flattened
            .iter()
            .map(|(x, c)| json!({"exponent": crate::json::rational(x), "coef": crate::json::complex(c, prec)}))
            .collect();
        let err = match &e.error_exponent {
            Some(r) => crate::json::rational(r),
            None => json!("-inf"),
        };
        if let Value::Object(m) = &mut out {
            m.insert("base".into(), Value::Array(base));
            m.insert("flattened".into(), Value::Array(flat));
            m.insert("error_exponent".into(), err);
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "n": r.n,
                    "exact": r.exact.to_string(),
                    "approx_1": fmt_value(&r.approx_1, CSV_DIGITS),
                    "approx_N": fmt_value(&r.approx_n, CSV_DIGITS),
                    "rel_err_1": fmt_value(&r.rel_err_1, CSV_DIGITS),
                    "rel_err_N": fmt_value(&r.rel_err_n, CSV_DIGITS),
                })
            })
            .collect();
        json!({
            "name": spec.name,
            "expansion": out,
            "critical_points": self.reports.iter().map(CriticalPointReport::to_json).collect::<Vec<_>>(),
            "selected": self.selected,
            "frames": self.frames.iter().map(|f| json!({
                "permutation": f.permutation,
                "order": f.order(),
                "hessian": crate::json::matrix(&f.hessian, prec),
                "q_identity_residual": f.q_identity_residual,
            })).collect::<Vec<_>>(),
            "table": rows,
            "skipped_n": self.skipped,
            "provenance": provenance(prec, &self.overrides_used, spec),
        })
    }
}

pub fn provenance(prec: Precision, overrides_used: &[String], spec: &ProblemSpec) -> Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "precision_bits": prec.bits(),
        "overrides": {
            "assume_strictly_minimal": spec.overrides.assume_strictly_minimal,
            "force_degenerate": spec.overrides.force_degenerate,
            "applied": overrides_used,
        },
        "N": spec.n_terms,
        "p": spec.p,
    })
}

/// Exact coefficients at `n alpha` for each requested `n`, as CSV rows `n, beta.., exact, decimal`.
pub fn run_oracle<W: std::io::Write>(spec: &ProblemSpec, w: W) -> RunResult<()> {
    let problem = spec.problem()?;
    origin_check(&problem)?;
    let mut usable = Vec::new();
    for &n in &spec.n_values {
        if let Ok(ix) = problem.alpha.index(n) {
            usable.push((n, ix));
        }
    }
    let indices: Vec<Vec<u64>> = usable.iter().map(|(_, ix)| ix.clone()).collect();
    let table = oracle_table(&problem, &indices)?;
    let mut wr = csv::Writer::from_writer(w);
    let d = problem.nvars();
    let mut header = vec!["n".to_string()];
    header.extend((0..d).map(|i| format!("beta_{i}")));
    header.push("exact".into());
    header.push("decimal".into());
    wr.write_record(&header).map_err(|e| Failure::from(oracle::csv_err(e)))?;
    for (n, ix) in &usable {
        let beta: Vec<u32> = ix.iter().map(|&b| b as u32).collect();
        let v = oracle::coeff_at(table.as_ref().expect("nonempty"), &beta)?;
        let mut row = vec![n.to_string()];
        row.extend(beta.iter().map(u32::to_string));
        row.push(v.to_string());
        row.push(oracle::decimal(v, 10));
        wr.write_record(&row).map_err(|e| Failure::from(oracle::csv_err(e)))?;
    }
    wr.flush().map_err(|e| Failure::from(Error::Io(e)))?;
    Ok(())
}
