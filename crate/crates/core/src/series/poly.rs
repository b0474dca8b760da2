use std::collections::BTreeMap;
use std::fmt;

use rug::{Complex, Rational};
use serde_json::{json, Value};

use super::coeff::GaussRat;
use crate::error::{Error, Result};
use crate::num::{self, Precision};

/// Multivariate polynomial with exact Gaussian-rational coefficients.
///
/// Terms are keyed by exponent vector; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsePoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, GaussRat>,
}

impl SparsePoly {
    pub fn zero(nvars: usize) -> Self {
        SparsePoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: GaussRat) -> Self {
        let mut p = SparsePoly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        SparsePoly::constant(nvars, GaussRat::one())
    }

    /// The coordinate polynomial `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = SparsePoly::zero(nvars);
        p.add_term(e, GaussRat::one());
        p
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, GaussRat)>,
    {
        let mut p = SparsePoly::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: e.len() });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    /// Convenience constructor from small integer coefficients.
    pub fn from_int_terms(nvars: usize, terms: &[(&[u32], i64)]) -> Self {
        SparsePoly::from_terms(
            nvars,
            terms.iter().map(|(e, c)| (e.to_vec(), GaussRat::from_int(*c))),
        )
        .expect("exponent length matches nvars")
    }

    pub fn add_term(&mut self, exp: Vec<u32>, c: GaussRat) {
        debug_assert_eq!(exp.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(exp).or_default();
        *slot += &c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &GaussRat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exp: &[u32]) -> GaussRat {
        self.terms.get(exp).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> GaussRat {
        self.coeff(&vec![0; self.nvars])
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        let mut out = SparsePoly::zero(self.nvars);
        if c.is_zero() {
            return out;
        }
        for (e, v) in &self.terms {
            out.terms.insert(e.clone(), v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, v) in &other.terms {
            out.add_term(e.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&GaussRat::from_int(-1)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut acc: BTreeMap<Vec<u32>, GaussRat> = BTreeMap::new();
        for (ea, va) in &self.terms {
            for (eb, vb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_default() += &(va * vb);
            }
        }
        acc.retain(|_, v| !v.is_zero());
        SparsePoly { nvars: self.nvars, terms: acc }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = SparsePoly::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Partial derivative with respect to variable `var`.
    pub fn partial(&self, var: usize) -> Self {
        let mut out = SparsePoly::zero(self.nvars);
        for (e, v) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[var] -= 1;
            out.add_term(ne, v * &GaussRat::from_int(e[var] as i64));
        }
        out
    }

    /// Multiply by `x_var`.
    pub fn times_var(&self, var: usize) -> Self {
        let terms = self.terms.iter().map(|(e, v)| {
            let mut ne = e.clone();
            ne[var] += 1;
            (ne, v.clone())
        });
        SparsePoly { nvars: self.nvars, terms: terms.collect() }
    }

    /// Reorder variables: new variable `k` is old variable `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.nvars);
        let terms = self
            .terms
            .iter()
            .map(|(e, v)| (perm.iter().map(|&old| e[old]).collect(), v.clone()));
        SparsePoly { nvars: self.nvars, terms: terms.collect() }
    }

    /// Invariant under every permutation of variables. Adjacent
    /// transpositions generate the symmetric group, so those suffice.
    pub fn is_symmetric(&self) -> bool {
        (0..self.nvars.saturating_sub(1)).all(|i| {
            let mut perm: Vec<usize> = (0..self.nvars).collect();
            perm.swap(i, i + 1);
            self.permute(&perm) == *self
        })
    }

    pub fn eval_exact(&self, x: &[GaussRat]) -> GaussRat {
        assert_eq!(x.len(), self.nvars);
        let mut acc = GaussRat::zero();
        for (e, v) in &self.terms {
            let mut m = v.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    m = &m * xi;
                }
            }
            acc += &m;
        }
        acc
    }

    /// Evaluate at a complex point at the given precision.
    pub fn eval(&self, x: &[Complex], prec: Precision) -> Complex {
        self.eval_with_scale(x, prec).0
    }

    /// Value together with the sum of term magnitudes, which is the natural
    /// scale against which the value's size should be judged.
    pub fn eval_with_scale(&self, x: &[Complex], prec: Precision) -> (Complex, f64) {
        assert_eq!(x.len(), self.nvars);
        let powers: Vec<Vec<Complex>> = (0..self.nvars)
            .map(|i| {
                let deg = self.degree_in(i) as usize;
                let mut ps = Vec::with_capacity(deg + 1);
                ps.push(num::cone(prec));
                for k in 1..=deg {
                    let next = Complex::with_val(prec.bits(), &ps[k - 1] * &x[i]);
                    ps.push(next);
                }
                ps
            })
            .collect();
        let mut acc = num::czero(prec);
        let mut scale = 0.0;
        for (e, v) in &self.terms {
            let mut m = v.to_complex(prec);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    m *= &powers[i][k as usize];
                }
            }
            scale += num::abs_f64(&m);
            acc += &m;
        }
        (acc, scale)
    }

    pub fn eval_f64(&self, x: &[num_complex::Complex64]) -> num_complex::Complex64 {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for (e, v) in &self.terms {
            let (re, im) = v.to_f64_pair();
            let mut m = num_complex::Complex64::new(re, im);
            for (xi, &k) in x.iter().zip(e) {
                m *= xi.powu(k);
            }
            acc += m;
        }
        acc
    }

    /// Substitute exact values for the variables listed in `fixed`, keeping the
    /// remaining variables (in order) as the new variables.
    pub fn specialize(&self, fixed: &[(usize, GaussRat)]) -> Self {
        let keep: Vec<usize> = (0..self.nvars)
            .filter(|i| !fixed.iter().any(|(j, _)| j == i))
            .collect();
        let mut out = SparsePoly::zero(keep.len());
        for (e, v) in &self.terms {
            let mut c = v.clone();
            for (j, val) in fixed {
                for _ in 0..e[*j] {
                    c = &c * val;
                }
            }
            out.add_term(keep.iter().map(|&k| e[k]).collect(), c);
        }
        out
    }

    /// Parse the JSON text format: a list of `{"exp": [..], "coef": ..}` where
    /// `coef` is a rational string, a JSON number, or `{"re": .., "im": ..}`.
    pub fn from_json(v: &Value, nvars: Option<usize>) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::InvalidPolynomial("expected a JSON list of terms".into()))?;
        let mut n = nvars;
        let mut terms = Vec::with_capacity(arr.len());
        for t in arr {
            let exp = t
                .get("exp")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::InvalidPolynomial(format!("term without exp: {t}")))?;
            let exp = exp
                .iter()
                .map(|x| {
                    x.as_u64()
                        .map(|u| u as u32)
                        .ok_or_else(|| Error::InvalidPolynomial(format!("bad exponent {x}")))
                })
                .collect::<Result<Vec<u32>>>()?;
            match n {
                None => n = Some(exp.len()),
                Some(k) if k != exp.len() => {
                    return Err(Error::DimensionMismatch { expected: k, got: exp.len() })
                }
                _ => {}
            }
            let coef = t
                .get("coef")
                .ok_or_else(|| Error::InvalidPolynomial(format!("term without coef: {t}")))?;
            terms.push((exp, parse_coef(coef)?));
        }
        let n = n.ok_or_else(|| {
            Error::InvalidPolynomial("empty term list needs an explicit variable count".into())
        })?;
        SparsePoly::from_terms(n, terms)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(e, c)| {
                    let coef = if c.is_real() {
                        json!(c.re.to_string())
                    } else {
                        json!({"re": c.re.to_string(), "im": c.im.to_string()})
                    };
                    json!({"exp": e, "coef": coef})
                })
                .collect(),
        )
    }
}

fn parse_scalar(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => num::parse_rational(s),
        Value::Number(n) => num::parse_rational(&n.to_string()),
        _ => Err(Error::InvalidPolynomial(format!("bad coefficient {v}"))),
    }
}

fn parse_coef(v: &Value) -> Result<GaussRat> {
    match v {
        Value::Object(m) => {
            let re = m.get("re").map(parse_scalar).transpose()?.unwrap_or_default();
            let im = m.get("im").map(parse_scalar).transpose()?.unwrap_or_default();
            Ok(GaussRat::new(re, im))
        }
        other => Ok(GaussRat::real(parse_scalar(other)?)),
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    k => write!(f, "*x{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}
