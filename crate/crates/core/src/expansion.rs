//! Assembled coefficient expansions
//! `F_{n alpha} ~ c^{-n alpha} sum_m b_m n^{e_m}` at one or more points,
//! and formal arithmetic on such series.
//!
//! At a point, with `w = alpha_d n` and `I_j` the Fourier-Laplace integral of
//! amplitude `u~_j` against the phase `g~`,
//! `F_{n alpha} ~ c^{-n alpha} (2 pi)^{-(d-1)} sum_{j<p} W_j(n) I_j(w)` with
//! `W_j(n) = (alpha_d n + 1)^{rising(p-1-j)} / ((p-1-j)! j!)`.

use std::collections::BTreeMap;

use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::flterms::{self, PhaseDecomposition};
use crate::geometry::Direction;
use crate::json;
use crate::localdata::{self, LocalFrame};
use crate::num::{self, Precision};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Smooth,
    DegenerateEven,
    DegenerateOdd,
    Univariate,
    Combined,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Smooth => "smooth",
            Kind::DegenerateEven => "degenerate-even",
            Kind::DegenerateOdd => "degenerate-odd",
            Kind::Univariate => "univariate",
            Kind::Combined => "combined",
        }
    }
}

/// One `(j, k)` term: `coefficient * W_j(n) * (alpha_d n)^{omega_exponent}`.
#[derive(Clone, Debug)]
pub struct StructuredTerm {
    pub j: u32,
    pub k: u32,
    pub omega_exponent: Rational,
    pub coefficient: Complex,
}

/// The contribution of a single point.
#[derive(Clone, Debug)]
pub struct PointComponent {
    /// The point in the original coordinate order.
    pub point: Vec<Complex>,
    /// `alpha` component of the distinguished coordinate.
    pub alpha_d: Rational,
    /// Vanishing order of the phase (2 when nondegenerate).
    pub v: u32,
    pub structured: Vec<StructuredTerm>,
    /// `(e_m, b_m)`, exponents strictly decreasing, all above the error exponent.
    pub flattened: Vec<(Rational, Complex)>,
    /// First discarded flattened term, when known.
    pub next_term: Option<(Rational, Complex)>,
    pub hessian_det: Option<Complex>,
}

#[derive(Clone, Debug)]
pub struct Expansion {
    pub kind: Kind,
    pub alpha: Direction,
    pub p: u32,
    pub n_terms: u32,
    /// Exponent of the `O(n^e)` remainder relative to the base; `None` when
    /// the remainder is exponentially small.
    pub error_exponent: Option<Rational>,
    pub components: Vec<PointComponent>,
    pub prec: Precision,
}

/// Coefficients (ascending in `n`) of `W_j(n)`.
pub fn rising_weight(p: u32, j: u32, alpha_d: &Rational) -> Vec<Rational> {
    let r = p - 1 - j;
    let mut poly = vec![Rational::from(1)];
    for i in 1..=r {
        // multiply by (alpha_d n + i)
        let mut next = vec![Rational::new(); poly.len() + 1];
        for (e, c) in poly.iter().enumerate() {
            next[e] += Rational::from(c * i);
            next[e + 1] += Rational::from(c * alpha_d);
        }
        poly = next;
    }
    let denom = Integer::from(Integer::factorial(r)) * Integer::from(Integer::factorial(j));
    poly.into_iter().map(|c| c / Rational::from(&denom)).collect()
}

fn real_pow(prec: Precision, x: &Rational, e: &Rational) -> Float {
    num::pow_rat(prec, &Float::with_val(prec.bits(), x), e)
}

/// Collect structured terms into powers of `n`; keeps exponents above `error` (all when `None`).
fn flatten_terms(
    structured: &[StructuredTerm],
    p: u32,
    alpha_d: &Rational,
    prec: Precision,
) -> Vec<(Rational, Complex)> {
    let mut acc: BTreeMap<Rational, Complex> = BTreeMap::new();
    for t in structured {
        let w = rising_weight(p, t.j, alpha_d);
        let scale = real_pow(prec, alpha_d, &t.omega_exponent);
        for (r, a) in w.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let e = Rational::from(r) + &t.omega_exponent;
            let c = Complex::with_val(prec.bits(), &t.coefficient * &scale) * Float::with_val(prec.bits(), a);
            *acc.entry(e).or_insert_with(|| num::czero(prec)) += c;
        }
    }
    acc.into_iter().rev().collect()
}

/// Split a full flattening at the error exponent into retained terms and the next term.
fn split_at(all: Vec<(Rational, Complex)>, error: &Option<Rational>) -> (Vec<(Rational, Complex)>, Option<(Rational, Complex)>) {
    match error {
        None => (all, None),
        Some(err) => {
            let mut keep = Vec::new();
            let mut next = None;
            for (e, c) in all {
                if e > *err {
                    keep.push((e, c));
                } else if e == *err {
                    next = Some((e, c));
                }
            }
            (keep, next)
        }
    }
}

fn two_pi_power(prec: Precision, n: usize) -> Float {
    let two_pi = num::pi(prec) * 2u32;
    Float::with_val(prec.bits(), two_pi.pow(-(n as i32)))
}

fn from_phase(
    frame: &LocalFrame,
    point: &[Complex],
    phase: &PhaseDecomposition,
    n_terms: u32,
    exec: Exec,
) -> Result<(PointComponent, Rational)> {
    let prec = frame.prec;
    let d = frame.dim();
    let alpha_d = frame.alpha.last().clone();
    let norm = two_pi_power(prec, d - 1);
    // terms k <= N: the last one only feeds the error estimate
    let pairs: Vec<(u32, u32)> = (0..frame.p).flat_map(|j| (0..=n_terms).map(move |k| (j, k))).collect();
    let pre = phase.prefactor();
    let values = exec.map(&pairs, |&(j, k)| flterms::Lk(&frame.ut_jets[j as usize], phase, k));
    let mut structured = Vec::with_capacity(pairs.len());
    for (&(j, k), l) in pairs.iter().zip(values) {
        let c = Complex::with_val(prec.bits(), l? * &pre) * &norm;
        structured.push(StructuredTerm { j, k, omega_exponent: phase.exponent(k), coefficient: c });
    }
    let top = Rational::from(frame.p as i64 - 1);
    let error = top + phase.exponent(n_terms);
    let all = flatten_terms(&structured, frame.p, &alpha_d, prec);
    let (flattened, next_term) = split_at(all, &Some(error.clone()));
    structured.retain(|t| t.k < n_terms);
    let component = PointComponent {
        point: point.to_vec(),
        alpha_d,
        v: phase.v(),
        structured,
        flattened,
        next_term,
        hessian_det: matches!(phase.kind, flterms::PhaseKind::Smooth { .. }).then(|| frame.hessian_det()),
    };
    Ok((component, error))
}

fn ensure_order(frame: &LocalFrame, phase: &PhaseDecomposition, n_terms: u32) -> Result<()> {
    let needed = phase.order_needed(n_terms);
    if needed > frame.order() {
        return Err(Error::OrderBudgetExceeded { needed, available: frame.order() });
    }
    Ok(())
}

/// `N` terms at a nondegenerate point, plus the next one as an error estimate.
/// The frame must carry jets through order `6 N`.
pub fn expand_smooth(frame: &LocalFrame, point: &[Complex], n_terms: u32, exec: Exec) -> Result<Expansion> {
    if frame.dim() < 2 {
        return Err(Error::Expansion("smooth expansion needs at least two variables".into()));
    }
    let det = frame.hessian_det();
    let det_abs = num::abs_f64(&det);
    if det_abs <= 1e-10 {
        return Err(if frame.dim() == 2 { Error::DegenerateHessian(det_abs) } else { Error::DegenerateHighDimension(frame.dim()) });
    }
    let phase = PhaseDecomposition::smooth(&frame.gt_jet)?;
    ensure_order(frame, &phase, n_terms)?;
    let (component, error) = from_phase(frame, point, &phase, n_terms, exec)?;
    Ok(Expansion {
        kind: Kind::Smooth,
        alpha: frame.alpha.clone(),
        p: frame.p,
        n_terms,
        error_exponent: Some(error),
        components: vec![component],
        prec: frame.prec,
    })
}

/// `N` terms at a two-variable point whose phase vanishes to order `v >= 2`.
pub fn expand_degenerate(frame: &LocalFrame, point: &[Complex], n_terms: u32, exec: Exec) -> Result<Expansion> {
    if frame.dim() != 2 {
        return Err(Error::DegenerateHighDimension(frame.dim()));
    }
    let v = localdata::vanishing_order(&frame.gt_jet, 1e-12)?;
    let phase = PhaseDecomposition::degenerate(&frame.gt_jet, v)?;
    ensure_order(frame, &phase, n_terms)?;
    let (component, error) = from_phase(frame, point, &phase, n_terms, exec)?;
    Ok(Expansion {
        kind: if v % 2 == 0 { Kind::DegenerateEven } else { Kind::DegenerateOdd },
        alpha: frame.alpha.clone(),
        p: frame.p,
        n_terms,
        error_exponent: Some(error),
        components: vec![component],
        prec: frame.prec,
    })
}

/// One variable: `F_n = c^{-n alpha} sum_{j<p} W_j(n) u_j` up to an exponentially small error.
pub fn expand_univariate(frame: &LocalFrame, point: &[Complex]) -> Result<Expansion> {
    if frame.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: frame.dim() });
    }
    let prec = frame.prec;
    let structured: Vec<StructuredTerm> = (0..frame.p)
        .map(|j| StructuredTerm {
            j,
            k: 0,
            omega_exponent: Rational::new(),
            coefficient: frame.u_jets[j as usize].constant_term().clone(),
        })
        .collect();
    let alpha_d = frame.alpha.last().clone();
    let flat = flatten_terms(&structured, frame.p, &alpha_d, prec);
    // keep every power n^{p-1}, ..., n^0, zeros included
    let flattened = (0..frame.p as i64)
        .rev()
        .map(|e| {
            let e = Rational::from(e);
            let c = flat.iter().find(|t| t.0 == e).map(|t| t.1.clone()).unwrap_or_else(|| num::czero(prec));
            (e, c)
        })
        .collect();
    Ok(Expansion {
        kind: Kind::Univariate,
        alpha: frame.alpha.clone(),
        p: frame.p,
        n_terms: frame.p,
        error_exponent: None,
        components: vec![PointComponent {
            point: point.to_vec(),
            alpha_d,
            v: 0,
            structured,
            flattened,
            next_term: None,
            hessian_det: None,
        }],
        prec,
    })
}

/// Termwise sum over the points of a torus, each keeping its own base.
pub fn combine_points(expansions: Vec<Expansion>) -> Result<Expansion> {
    let mut it = expansions.into_iter();
    let Some(first) = it.next() else {
        return Err(Error::Expansion("no expansions to combine".into()));
    };
    let rest: Vec<Expansion> = it.collect();
    if rest.is_empty() {
        return Ok(first);
    }
    let mut out = first.clone();
    out.kind = Kind::Combined;
    let base_mod = first.base_modulus(0);
    for e in rest {
        if e.alpha.alpha() != first.alpha.alpha() && !same_ray(&e.alpha, &first.alpha) {
            return Err(Error::InvalidDirection("expansions along different directions".into()));
        }
        let m = e.base_modulus(0);
        if (m - base_mod).abs() > 1e-10 * base_mod.abs().max(1.0) {
            return Err(Error::Expansion("points lie on different tori".into()));
        }
        for comp in e.components {
            if out.components.iter().any(|c| same_point(&c.point, &comp.point)) {
                return Err(Error::Expansion("duplicate point in combination".into()));
            }
            out.components.push(comp);
        }
        out.error_exponent = match (&out.error_exponent, &e.error_exponent) {
            (None, x) | (x, None) => x.clone(),
            (Some(a), Some(b)) => Some(a.clone().max(b.clone())),
        };
        out.n_terms = out.n_terms.min(e.n_terms);
        out.p = out.p.max(e.p);
    }
    Ok(out)
}

fn same_ray(a: &Direction, b: &Direction) -> bool {
    a.primitive() == b.primitive()
}

fn same_point(a: &[Complex], b: &[Complex]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            num::abs_f64(&Complex::with_val(x.prec().0, x - y)) <= 1e-20 * (1.0 + num::abs_f64(x))
        })
}

/// `(flattened, error exponent)` of a component. With a single point this is the
/// whole expansion's flattening.
pub fn flatten(e: &Expansion) -> Vec<(Rational, Complex)> {
    e.components.first().map(|c| c.flattened.clone()).unwrap_or_default()
}

/// Value and a size estimate of the first dropped term.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: Complex,
    pub error_estimate: Option<f64>,
}

impl Expansion {
    /// `|c^{-alpha}|`, the exponential growth rate per unit `n`.
    pub fn base_modulus(&self, component: usize) -> f64 {
        let prec = self.prec;
        let c = &self.components[component].point;
        let mut acc = Float::new(prec.bits());
        for (z, a) in c.iter().zip(self.alpha.alpha()) {
            let l = Float::with_val(prec.bits(), num::fabs(z).ln());
            acc -= l * Float::with_val(prec.bits(), a);
        }
        acc.exp().to_f64()
    }

    /// `c^{-alpha}` with principal logarithms; `evaluate` uses exact integer powers instead.
    pub fn base(&self, component: usize) -> Complex {
        let prec = self.prec;
        let mut acc = num::czero(prec);
        for (z, a) in self.components[component].point.iter().zip(self.alpha.alpha()) {
            acc -= Complex::with_val(prec.bits(), z.ln_ref()) * Float::with_val(prec.bits(), a);
        }
        acc.exp()
    }

    fn base_power(&self, component: usize, n: u64) -> Result<Complex> {
        let idx = self.alpha.index(n)?;
        let mut acc = num::cone(self.prec);
        for (z, e) in self.components[component].point.iter().zip(idx) {
            acc *= num::cpow_int(z, &-Integer::from(e));
        }
        Ok(acc)
    }

    /// The flattened expansion summed at `n`, using the first `count` terms
    /// of each point (all when `None`).
    pub fn evaluate_terms(&self, n: u64, count: Option<usize>) -> Result<Evaluation> {
        if n == 0 {
            return Err(Error::NonIntegralIndex(0));
        }
        let prec = self.prec;
        let nf = Float::with_val(prec.bits(), n);
        let npow = |e: &Rational| num::pow_rat(prec, &nf, e);
        let mut value = num::czero(prec);
        let mut err = 0.0;
        let mut have_err = false;
        for (i, comp) in self.components.iter().enumerate() {
            let base = self.base_power(i, n)?;
            let take = count.unwrap_or(comp.flattened.len()).min(comp.flattened.len());
            let mut s = num::czero(prec);
            for (e, b) in &comp.flattened[..take] {
                s += Complex::with_val(prec.bits(), b * npow(e));
            }
            value += Complex::with_val(prec.bits(), &s * &base);
            let next = if take < comp.flattened.len() { Some(&comp.flattened[take]) } else { comp.next_term.as_ref() };
            if let Some((e, b)) = next {
                have_err = true;
                err += num::abs_f64(b) * npow(e).to_f64() * num::abs_f64(&base);
            }
        }
        Ok(Evaluation { value, error_estimate: have_err.then_some(err) })
    }

    pub fn evaluate(&self, n: u64) -> Result<Evaluation> {
        self.evaluate_terms(n, None)
    }

    /// Sum of every computed structured term, rising factorials evaluated
    /// directly; matches the untruncated flattening.
    pub fn evaluate_structured(&self, n: u64) -> Result<Complex> {
        let prec = self.prec;
        let mut value = num::czero(prec);
        for (i, comp) in self.components.iter().enumerate() {
            let base = self.base_power(i, n)?;
            let omega = Float::with_val(prec.bits(), &comp.alpha_d * Rational::from(n));
            let mut s = num::czero(prec);
            for t in &comp.structured {
                let r = self.p - 1 - t.j;
                let mut w = Float::with_val(prec.bits(), 1);
                for i in 1..=r {
                    w *= Float::with_val(prec.bits(), &omega + i);
                }
                w /= num::factorial(prec, r) * num::factorial(prec, t.j);
                let om = num::pow_rat(prec, &omega, &t.omega_exponent);
                s += Complex::with_val(prec.bits(), &t.coefficient * w) * om;
            }
            value += s * base;
        }
        Ok(value)
    }

    /// Every structured term flattened with no truncation (first point).
    pub fn flatten_untruncated(&self) -> Vec<(Rational, Complex)> {
        let c = &self.components[0];
        flatten_terms(&c.structured, self.p, &c.alpha_d, self.prec)
    }

    pub fn to_json(&self) -> Value {
        let prec = self.prec;
        let flat = |f: &[(Rational, Complex)]| -> Value {
            Value::Array(
                f.iter()
                    .map(|(e, c)| json!({"exponent": json::rational(e), "coef": json::complex(c, prec)}))
                    .collect(),
            )
        };
        let comps: Vec<Value> = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                json!({
                    "point": json::complex_vec(&c.point, prec),
                    "base": json::complex(&self.base(i), prec),
                    "base_modulus": self.base_modulus(i),
                    "vanishing_order": c.v,
                    "hessian_det": c.hessian_det.as_ref().map(|d| json::complex(d, prec)),
                    "flattened": flat(&c.flattened),
                    "next_term": c.next_term.as_ref().map(|(e, b)| json!({"exponent": json::rational(e), "coef": json::complex(b, prec)})),
                    "structured": c.structured.iter().map(|t| json!({
                        "j": t.j, "k": t.k,
                        "omega_exponent": json::rational(&t.omega_exponent),
                        "coef": json::complex(&t.coefficient, prec),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "kind": self.kind.as_str(),
            "alpha": self.alpha.to_json(),
            "p": self.p,
            "N": self.n_terms,
            "base": (0..self.components.len()).map(|i| json::complex(&self.base(i), prec)).collect::<Vec<_>>(),
            "flattened": flat(&flatten(self)),
            "error_exponent": match &self.error_exponent {
                Some(e) => json::rational(e),
                None => Value::String("-inf".into()),
            },
            "components": comps,
        })
    }
}

/// A descending series `sum c_m n^{e_m} + O(n^{error})` (`error = None`: exact).
#[derive(Clone, Debug)]
pub struct AsymptoticSeries {
    pub terms: Vec<(Rational, Complex)>,
    pub error: Option<Rational>,
    pub prec: Precision,
}

fn above(e: &Rational, err: &Option<Rational>) -> bool {
    err.as_ref().is_none_or(|x| e > x)
}

fn min_err(a: Option<Rational>, b: Option<Rational>) -> Option<Rational> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => Some(a.max(b)),
    }
}

impl AsymptoticSeries {
    pub fn new(mut terms: Vec<(Rational, Complex)>, error: Option<Rational>, prec: Precision) -> Self {
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        terms.retain(|(e, _)| above(e, &error));
        AsymptoticSeries { terms, error, prec }
    }

    /// Single-point expansion without its base.
    pub fn from_expansion(e: &Expansion) -> Result<Self> {
        if e.components.len() != 1 {
            return Err(Error::Expansion("series arithmetic needs a single-point expansion".into()));
        }
        Ok(AsymptoticSeries::new(flatten(e), e.error_exponent.clone(), e.prec))
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.terms.first().map(|t| &t.0)
    }

    fn collect(map: BTreeMap<Rational, Complex>, error: Option<Rational>, prec: Precision) -> Self {
        AsymptoticSeries::new(map.into_iter().collect(), error, prec)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut m: BTreeMap<Rational, Complex> = BTreeMap::new();
        for (e, c) in self.terms.iter().chain(&o.terms) {
            *m.entry(e.clone()).or_insert_with(|| num::czero(self.prec)) += c;
        }
        AsymptoticSeries::collect(m, min_err(self.error.clone(), o.error.clone()), self.prec)
    }

    pub fn neg(&self) -> Self {
        AsymptoticSeries {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), Complex::with_val(self.prec.bits(), -c))).collect(),
            error: self.error.clone(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut m: BTreeMap<Rational, Complex> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e = Rational::from(ea + eb);
                *m.entry(e).or_insert_with(|| num::czero(self.prec)) += Complex::with_val(self.prec.bits(), ca * cb);
            }
        }
        let ea = self.leading().cloned();
        let eb = o.leading().cloned();
        let e1 = match (&ea, &o.error) {
            (Some(l), Some(err)) => Some(Rational::from(l + err)),
            _ => None,
        };
        let e2 = match (&eb, &self.error) {
            (Some(l), Some(err)) => Some(Rational::from(l + err)),
            _ => None,
        };
        AsymptoticSeries::collect(m, min_err(e1, e2), self.prec)
    }

    /// Formal quotient, at most `max_terms` terms on the common exponent grid.
    pub fn div(&self, o: &Self, max_terms: usize) -> Result<Self> {
        let prec = self.prec;
        let (Some(ea), Some(eb)) = (self.leading().cloned(), o.leading().cloned()) else {
            return Err(Error::Expansion("division by an empty series".into()));
        };
        let b0 = &o.terms[0].1;
        if num::abs_f64(b0) <= 1e-30 * o.terms.iter().map(|t| num::abs_f64(&t.1)).fold(0.0, f64::max) {
            return Err(Error::Expansion("leading denominator coefficient is zero".into()));
        }
        // common grid step 1/L for all exponent offsets
        let mut l = Integer::from(1);
        let offsets = self
            .terms
            .iter()
            .map(|t| Rational::from(&ea - &t.0))
            .chain(o.terms.iter().map(|t| Rational::from(&eb - &t.0)))
            .chain(self.error.iter().map(|e| Rational::from(&ea - e)))
            .chain(o.error.iter().map(|e| Rational::from(&eb - e)));
        for off in offsets {
            l.lcm_mut(off.denom());
        }
        let step = Rational::from((1, l));
        let grid = |lead: &Rational, err: &Option<Rational>| -> Option<usize> {
            err.as_ref().map(|e| {
                let span = Rational::from(lead - e) / &step;
                // positions strictly above the error exponent
                let s = span.numer().to_usize().unwrap_or(usize::MAX);
                s.max(0)
            })
        };
        let ka = grid(&ea, &self.error);
        let kb = grid(&eb, &o.error);
        let k = [ka, kb, Some(max_terms)].into_iter().flatten().min().unwrap();
        let coeff_at = |s: &Self, lead: &Rational, i: usize| -> Complex {
            let e = Rational::from(lead - Rational::from(&step * i as u64));
            s.terms.iter().find(|t| t.0 == e).map(|t| t.1.clone()).unwrap_or_else(|| num::czero(prec))
        };
        let a: Vec<Complex> = (0..k).map(|i| coeff_at(self, &ea, i)).collect();
        let b: Vec<Complex> = (0..k).map(|i| coeff_at(o, &eb, i)).collect();
        let mut c: Vec<Complex> = Vec::with_capacity(k);
        for i in 0..k {
            let mut acc = a[i].clone();
            for j in 1..=i {
                acc -= Complex::with_val(prec.bits(), &b[j] * &c[i - j]);
            }
            c.push(acc / b0);
        }
        let lead = Rational::from(&ea - &eb);
        let terms: Vec<(Rational, Complex)> = c
            .into_iter()
            .enumerate()
            .map(|(i, v)| (Rational::from(&lead - Rational::from(&step * i as u64)), v))
            .collect();
        let error = Some(Rational::from(&lead - Rational::from(&step * k as u64)));
        Ok(AsymptoticSeries::new(terms, error, prec))
    }

    pub fn eval(&self, n: f64) -> Complex {
        let nf = Float::with_val(self.prec.bits(), n);
        let mut acc = num::czero(self.prec);
        for (e, c) in &self.terms {
            acc += Complex::with_val(self.prec.bits(), c * num::pow_rat(self.prec, &nf, e));
        }
        acc
    }

    /// Coefficient at exponent `e`, zero when absent.
    pub fn coeff(&self, e: &Rational) -> Complex {
        self.terms.iter().find(|t| t.0 == *e).map(|t| t.1.clone()).unwrap_or_else(|| num::czero(self.prec))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "terms": self.terms.iter().map(|(e, c)| json!({"exponent": json::rational(e), "coef": json::complex(c, self.prec)})).collect::<Vec<_>>(),
            "error_exponent": self.error.as_ref().map(json::rational).unwrap_or(Value::String("-inf".into())),
        })
    }
}

/// Formal quotient of two single-point expansions sharing a base, in up to `n_terms` terms.
pub fn ratio_asymptotics(numer: &Expansion, denom: &Expansion, n_terms: usize) -> Result<AsymptoticSeries> {
    if numer.components.len() != 1 || denom.components.len() != 1 {
        return Err(Error::Expansion("ratios need single-point expansions".into()));
    }
    let (bn, bd) = (numer.base(0), denom.base(0));
    let diff = num::abs_f64(&Complex::with_val(numer.prec.bits(), &bn - &bd));
    if diff > 1e-10 * num::abs_f64(&bd).max(1.0) || numer.alpha.alpha() != denom.alpha.alpha() {
        return Err(Error::Expansion("ratio of expansions with different bases".into()));
    }
    AsymptoticSeries::from_expansion(numer)?.div(&AsymptoticSeries::from_expansion(denom)?, n_terms)
}
