use std::f64::consts::PI;

use num_complex::Complex64;
use rug::Complex;
use serde_json::{json, Value};

use super::{aperiodic, on_variety};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::json;
use crate::linalg;
use crate::num::{self, Precision};
use crate::series::upoly::UPoly;
use crate::series::{GaussRat, SparsePoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    StrictlyMinimal,
    FinitelyMinimal,
    Minimal,
    Unknown,
    NotMinimal,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::StrictlyMinimal => "strictly-minimal",
            Verdict::FinitelyMinimal => "finitely-minimal",
            Verdict::Minimal => "minimal",
            Verdict::Unknown => "unknown",
            Verdict::NotMinimal => "not-minimal",
        }
    }

    /// Minimal in the weak sense (no variety point strictly smaller in every modulus).
    pub fn is_minimal(self) -> bool {
        matches!(self, Verdict::StrictlyMinimal | Verdict::FinitelyMinimal | Verdict::Minimal)
    }
}

#[derive(Clone, Debug)]
pub struct Minimality {
    pub verdict: Verdict,
    pub evidence: String,
    /// Other variety points on the same torus (finitely minimal case).
    pub companions: Vec<Vec<Complex>>,
    /// A variety point strictly inside the polydisc (not-minimal case).
    pub witness: Option<Vec<Complex>>,
}

impl Minimality {
    fn new(verdict: Verdict, evidence: impl Into<String>) -> Self {
        Minimality { verdict, evidence: evidence.into(), companions: vec![], witness: None }
    }

    pub fn to_json(&self, prec: Precision) -> Value {
        json!({
            "verdict": self.verdict.as_str(),
            "evidence": self.evidence,
            "companions": self.companions.iter().map(|c| json::complex_vec(c, prec)).collect::<Vec<_>>(),
            "witness": self.witness.as_ref().map(|w| json::complex_vec(w, prec)),
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MinimalityOptions {
    pub prec: Precision,
    pub exec: Exec,
    /// Radius levels for the two-variable slice grid.
    pub radii: usize,
    /// Angles per radius for the two-variable slice grid.
    pub angles: usize,
    /// Sample count for polydisc sampling in three or more variables.
    pub samples: usize,
}

impl Default for MinimalityOptions {
    fn default() -> Self {
        MinimalityOptions { prec: Precision::default(), exec: Exec::default(), radii: 16, angles: 64, samples: 4096 }
    }
}

fn positive_real(c: &[Complex]) -> bool {
    c.iter().all(|z| {
        let re = z.real().to_f64();
        re > 0.0 && z.imag().to_f64().abs() <= 1e-30 * re.max(1.0)
    })
}

fn fmt_point(p: &[Complex]) -> String {
    let parts: Vec<String> = p
        .iter()
        .map(|z| {
            let w = num::to_c64(z);
            format!("{:.6e}{:+.6e}i", w.re, w.im)
        })
        .collect();
    format!("({})", parts.join(", "))
}

fn univariate(h: &SparsePoly, c: &Complex, prec: Precision) -> Result<Minimality> {
    let deg = h.degree_in(0) as usize;
    let mut co = vec![GaussRat::zero(); deg + 1];
    for (e, v) in h.terms() {
        co[e[0] as usize] = v.clone();
    }
    let roots = linalg::poly_roots(&UPoly::new(co).squarefree().to_complex(prec), prec)?;
    let m = num::abs_f64(c);
    let mut companions = Vec::new();
    for r in roots {
        let diff = num::abs_f64(&Complex::with_val(prec.bits(), &r - c));
        if diff <= 1e-20 * m.max(1.0) {
            continue;
        }
        let rm = num::abs_f64(&r);
        if rm < m * (1.0 - 1e-12) {
            let mut out = Minimality::new(
                Verdict::NotMinimal,
                format!("root {} of smaller modulus", fmt_point(std::slice::from_ref(&r))),
            );
            out.witness = Some(vec![r]);
            return Ok(out);
        }
        if rm <= m * (1.0 + 1e-12) {
            companions.push(vec![r]);
        }
    }
    if companions.is_empty() {
        Ok(Minimality::new(Verdict::StrictlyMinimal, "all roots enumerated; no other root of modulus <= |c|"))
    } else {
        let mut out = Minimality::new(
            Verdict::FinitelyMinimal,
            format!("all roots enumerated; {} other root(s) on |x| = |c|", companions.len()),
        );
        out.companions = companions;
        Ok(out)
    }
}

/// Coefficients of powers of `x_s`, as polynomials in the remaining variables
/// (with `x_s` still present but at exponent zero).
fn slice_coeffs(h: &SparsePoly, s: usize) -> Vec<SparsePoly> {
    let deg = h.degree_in(s) as usize;
    let mut out = vec![SparsePoly::zero(h.nvars()); deg + 1];
    for (e, v) in h.terms() {
        let mut e2 = e.clone();
        e2[s] = 0;
        out[e[s] as usize].add_term(e2, v.clone());
    }
    out
}

/// Search for a variety point strictly inside the polydisc of `c` by fixing
/// all coordinates but `x_s` at sampled smaller moduli and solving for `x_s`.
fn sample_for_witness(
    h: &SparsePoly,
    c: &[Complex],
    points: &[Vec<Complex64>],
    s: usize,
    opts: &MinimalityOptions,
) -> Result<Option<Vec<Complex>>> {
    let slice = slice_coeffs(h, s);
    let cs = num::abs_f64(&c[s]);
    let hits = opts.exec.map(points, |x| {
        let co: Vec<Complex64> = slice.iter().map(|p| p.eval_f64(x)).collect();
        let roots = linalg::companion_roots_f64(&co).ok()?;
        roots.into_iter().find(|r| r.norm() < cs * (1.0 - 1e-9)).map(|r| (x.clone(), r))
    });
    let prec = opts.prec;
    for (x, r) in hits.into_iter().flatten() {
        // polish the free coordinate at full precision with the others fixed
        let xs: Vec<Complex> = x.iter().map(|z| num::from_c64(prec, *z)).collect();
        let co: Vec<Complex> = slice.iter().map(|p| p.eval(&xs, prec)).collect();
        let roots = linalg::poly_roots(&co, prec)?;
        let best = roots
            .into_iter()
            .min_by(|a, b| (num::to_c64(a) - r).norm().partial_cmp(&(num::to_c64(b) - r).norm()).unwrap());
        let Some(y) = best else { continue };
        if num::abs_f64(&y) >= cs * (1.0 - 1e-9) {
            continue;
        }
        let mut w = xs;
        w[s] = y;
        let (v, scale) = h.eval_with_scale(&w, prec);
        if num::abs_f64(&v) <= 1e-30 * scale.max(1.0) {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

fn kronecker(k: usize, dims: usize) -> Vec<f64> {
    const PRIMES: [f64; 16] = [2., 3., 5., 7., 11., 13., 17., 19., 23., 29., 31., 37., 41., 43., 47., 53.];
    (0..dims)
        .map(|j| {
            let a = PRIMES[j % PRIMES.len()].sqrt() + (j / PRIMES.len()) as f64;
            (k as f64 * a).fract()
        })
        .collect()
}

/// Minimality verdict for a variety point `c` of `H`.
///
/// One variable: complete root enumeration. Otherwise the positivity route
/// (nonnegative aperiodic `1 - H/H(0)` at a positive real point), then
/// sampling, which can only produce `not-minimal` (with a witness) or `unknown`.
pub fn check_minimality(h: &SparsePoly, c: &[Complex], opts: &MinimalityOptions) -> Result<Minimality> {
    let prec = opts.prec;
    on_variety(h, c, prec)?;
    let h0 = h.constant_term();
    if h0.is_zero() {
        return Err(Error::OriginOnVariety);
    }
    let d = h.nvars();
    if d == 1 {
        return univariate(h, &c[0], prec);
    }

    let normalized = h.scale(&h0.inv()?);
    let q = SparsePoly::one(d).sub(&normalized);
    let nonneg = !q.is_zero() && q.terms().all(|(_, v)| v.is_real() && v.re >= 0);
    if nonneg && positive_real(c) {
        return Ok(if aperiodic(&q)? {
            Minimality::new(Verdict::StrictlyMinimal, "1 - H/H(0) has nonnegative coefficients and aperiodic support; c is positive real")
        } else {
            Minimality::new(Verdict::Minimal, "1 - H/H(0) has nonnegative coefficients; c is positive real; support is periodic")
        });
    }

    // solve for the variable of highest degree, keeping the others sampled
    let s = (0..d).rev().max_by_key(|&j| h.degree_in(j)).unwrap();
    let others: Vec<usize> = (0..d).filter(|&j| j != s).collect();
    let mut points = Vec::new();
    if d == 2 {
        for i in 1..=opts.radii {
            let rf = i as f64 / (opts.radii + 1) as f64;
            for a in 0..opts.angles {
                let th = 2.0 * PI * a as f64 / opts.angles as f64;
                let mut x = vec![Complex64::new(0.0, 0.0); 2];
                x[others[0]] = Complex64::from_polar(rf * num::abs_f64(&c[others[0]]), th);
                points.push(x);
            }
        }
    } else {
        for k in 1..=opts.samples {
            let u = kronecker(k, 2 * others.len());
            let mut x = vec![Complex64::new(0.0, 0.0); d];
            for (i, &j) in others.iter().enumerate() {
                let rf = u[2 * i].max(1e-6);
                x[j] = Complex64::from_polar(rf * num::abs_f64(&c[j]), 2.0 * PI * u[2 * i + 1]);
            }
            points.push(x);
        }
    }
    let route = if d == 2 { "radius-angle slice grid" } else { "polydisc sampling" };
    match sample_for_witness(h, c, &points, s, opts)? {
        Some(w) => {
            let mut out = Minimality::new(
                Verdict::NotMinimal,
                format!("{route}: variety point {} strictly inside the polydisc", fmt_point(&w)),
            );
            out.witness = Some(w);
            Ok(out)
        }
        None => Ok(Minimality::new(
            Verdict::Unknown,
            format!("{route}: {} samples found no smaller variety point; not a proof", points.len()),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Float;

    fn p() -> Precision {
        Precision::default()
    }

    fn delannoy_points() -> (Vec<Complex>, Vec<Complex>) {
        let s13 = Float::with_val(p().bits(), 13).sqrt();
        let pos = vec![
            num::creal(p(), &((s13.clone() - 2) / 3)),
            num::creal(p(), &((s13.clone() - 3) / 2)),
        ];
        let neg = vec![
            num::creal(p(), &((-s13.clone() - 2) / 3)),
            num::creal(p(), &((-s13 - 3) / 2)),
        ];
        (pos, neg)
    }

    #[test]
    fn delannoy_verdicts() {
        let h = SparsePoly::from_int_terms(2, &[(&[0, 0], 1), (&[1, 0], -1), (&[0, 1], -1), (&[1, 1], -1)]);
        let (pos, neg) = delannoy_points();
        let opts = MinimalityOptions::default();
        assert_eq!(check_minimality(&h, &pos, &opts).unwrap().verdict, Verdict::StrictlyMinimal);
        let m = check_minimality(&h, &neg, &opts).unwrap();
        assert_eq!(m.verdict, Verdict::NotMinimal);
        let w = m.witness.unwrap();
        assert!(num::abs_f64(&w[0]) < num::abs_f64(&neg[0]));
        assert!(num::abs_f64(&w[1]) < num::abs_f64(&neg[1]));
    }

    #[test]
    fn univariate_cases() {
        let one = num::cone(p());
        let h = SparsePoly::from_int_terms(1, &[(&[0], 1), (&[2], -1)]);
        let m = check_minimality(&h, std::slice::from_ref(&one), &MinimalityOptions::default()).unwrap();
        assert_eq!(m.verdict, Verdict::FinitelyMinimal);
        assert_eq!(m.companions.len(), 1);
        assert!((m.companions[0][0].real().to_f64() + 1.0).abs() < 1e-30);
        let h = SparsePoly::from_int_terms(1, &[(&[0], 2), (&[1], -3), (&[2], 1)]);
        let two = num::cint(p(), 2);
        let m = check_minimality(&h, &[two], &MinimalityOptions::default()).unwrap();
        assert_eq!(m.verdict, Verdict::NotMinimal);
        let m = check_minimality(&h, &[one], &MinimalityOptions::default()).unwrap();
        assert_eq!(m.verdict, Verdict::StrictlyMinimal);
    }

    #[test]
    fn positivity_route() {
        let half = Complex::with_val(p().bits(), 0.5);
        let h = SparsePoly::from_int_terms(2, &[(&[0, 0], 1), (&[1, 0], -1), (&[0, 1], -1)]);
        let m = check_minimality(&h, &[half.clone(), half.clone()], &MinimalityOptions::default()).unwrap();
        assert_eq!(m.verdict, Verdict::StrictlyMinimal);
        // 1 - x^2 - y^2 is nonnegative but periodic
        let h = SparsePoly::from_int_terms(2, &[(&[0, 0], 2), (&[2, 0], -4), (&[0, 2], -4)]);
        let m = check_minimality(&h, &[half.clone(), half], &MinimalityOptions::default()).unwrap();
        assert_eq!(m.verdict, Verdict::Minimal);
    }

    #[test]
    fn sampling_three_variables() {
        // c = (1, 1, -1/2) on 1 - x - y + ... is dominated by (1/3, 1/3, 1/3)-type points
        let h = SparsePoly::from_int_terms(
            3,
            &[(&[0, 0, 0], 1), (&[1, 0, 0], -1), (&[0, 1, 0], -1), (&[0, 0, 1], -1)],
        );
        let c = vec![num::cint(p(), 1), num::cint(p(), 1), num::cint(p(), -1)];
        let m = check_minimality(&h, &c, &MinimalityOptions::default()).unwrap();
        assert_eq!(m.verdict, Verdict::NotMinimal);
        assert!(m.witness.is_some());
    }
}
