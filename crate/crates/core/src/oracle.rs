//! Ground truth: exact Maclaurin coefficients by series division, and
//! adaptive quadrature of Fourier-Laplace integrals.

use std::io::Write;

use num_complex::Complex64;
use rug::Rational;

use crate::error::{Error, Result};
use crate::series::{GaussRat, Jet, SparsePoly};

/// Exact coefficients of `G / (G_den H^p)` on the box `0 <= beta <= bounds`.
#[derive(Clone, Debug)]
pub struct CoeffTable {
    bounds: Vec<u32>,
    strides: Vec<usize>,
    values: Vec<GaussRat>,
}

fn strides(bounds: &[u32]) -> Vec<usize> {
    let mut s = vec![1; bounds.len()];
    for i in (0..bounds.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * (bounds[i + 1] as usize + 1);
    }
    s
}

/// Advance a multi-index through the box in lexicographic order.
fn next_index(beta: &mut [u32], bounds: &[u32]) -> bool {
    for i in (0..beta.len()).rev() {
        if beta[i] < bounds[i] {
            beta[i] += 1;
            return true;
        }
        beta[i] = 0;
    }
    false
}

/// The full denominator `G_den * H^p`.
pub fn denominator(h: &SparsePoly, g_den: Option<&SparsePoly>, p: u32) -> SparsePoly {
    let hp = h.pow(p);
    match g_den {
        Some(d) => d.mul(&hp),
        None => hp,
    }
}

impl CoeffTable {
    pub fn bounds(&self) -> &[u32] {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn offset(&self, beta: &[u32]) -> Option<usize> {
        if beta.len() != self.bounds.len() || beta.iter().zip(&self.bounds).any(|(b, m)| b > m) {
            return None;
        }
        Some(beta.iter().zip(&self.strides).map(|(&b, &s)| b as usize * s).sum())
    }

    pub fn get(&self, beta: &[u32]) -> Option<&GaussRat> {
        self.offset(beta).map(|o| &self.values[o])
    }

    /// Every `(beta, F_beta)` in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<u32>, &GaussRat)> {
        let mut beta = vec![0; self.bounds.len()];
        let mut first = true;
        let bounds = self.bounds.clone();
        self.values.iter().map(move |v| {
            if !first {
                next_index(&mut beta, &bounds);
            }
            first = false;
            (beta.clone(), v)
        })
    }

    /// `sum_gamma D_gamma F_{beta-gamma} - N_beta` at every box point; all
    /// zero for a correct table.
    pub fn residual_is_zero(&self, numer: &SparsePoly, denom: &SparsePoly) -> bool {
        self.iter().all(|(beta, _)| {
            let mut acc = Rational::new();
            let mut acc_i = Rational::new();
            for (gamma, d) in denom.terms() {
                if gamma.iter().zip(&beta).any(|(g, b)| g > b) {
                    continue;
                }
                let idx: Vec<u32> = beta.iter().zip(gamma).map(|(b, g)| b - g).collect();
                let t = d * self.get(&idx).unwrap();
                acc += &t.re;
                acc_i += &t.im;
            }
            let n = numer.coeff(&beta);
            acc == n.re && acc_i == n.im
        })
    }

    /// CSV rows `beta_0, .., beta_{d-1}, exact, decimal`.
    pub fn write_csv<W: Write>(&self, w: W, digits: usize) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let d = self.bounds.len();
        let mut header: Vec<String> = (0..d).map(|i| format!("beta_{i}")).collect();
        header.push("exact".into());
        header.push("decimal".into());
        wr.write_record(&header).map_err(csv_err)?;
        for (beta, v) in self.iter() {
            let mut row: Vec<String> = beta.iter().map(|b| b.to_string()).collect();
            row.push(v.to_string());
            row.push(decimal(v, digits));
            wr.write_record(&row).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Decimal rendering of an exact value at `digits` significant digits.
pub fn decimal(v: &GaussRat, digits: usize) -> String {
    let bits = ((digits as f64) * std::f64::consts::LOG2_10 + 16.0) as u32;
    let prec = crate::num::Precision::new(bits.max(53)).unwrap();
    let z = v.to_complex(prec);
    let re = crate::num::fmt_float(z.real(), digits);
    if v.is_real() {
        re
    } else {
        format!("{re}{}{}i", if z.imag().is_sign_negative() { "" } else { "+" }, crate::num::fmt_float(z.imag(), digits))
    }
}

/// Exact `F_beta` for `0 <= beta <= bounds` from the convolution recurrence
/// `D_0 F_beta = G_beta - sum_{gamma != 0} D_gamma F_{beta - gamma}` with `D = G_den H^p`.
pub fn maclaurin_table(
    g: &SparsePoly,
    g_den: Option<&SparsePoly>,
    h: &SparsePoly,
    p: u32,
    bounds: &[u32],
) -> Result<CoeffTable> {
    let d = h.nvars();
    if bounds.len() != d || g.nvars() != d {
        return Err(Error::DimensionMismatch { expected: d, got: bounds.len() });
    }
    let denom = denominator(h, g_den, p);
    let d0 = denom.constant_term();
    if d0.is_zero() {
        return Err(Error::OriginOnVariety);
    }
    let d0inv = d0.inv()?;
    let strides = strides(bounds);
    let total: usize = bounds.iter().map(|&b| b as usize + 1).product();
    let others: Vec<(Vec<u32>, GaussRat, usize)> = denom
        .terms()
        .filter(|(e, _)| e.iter().any(|&k| k > 0))
        .map(|(e, c)| {
            let off = e.iter().zip(&strides).map(|(&k, &s)| k as usize * s).sum();
            (e.clone(), c.clone(), off)
        })
        .collect();
    let mut values: Vec<GaussRat> = Vec::with_capacity(total);
    let mut beta = vec![0u32; d];
    for pos in 0..total {
        let mut acc = g.coeff(&beta);
        for (gamma, c, off) in &others {
            if gamma.iter().zip(&beta).any(|(g, b)| g > b) {
                continue;
            }
            let f = &values[pos - off];
            if f.is_zero() {
                continue;
            }
            acc -= &(c * f);
        }
        values.push(&acc * &d0inv);
        next_index(&mut beta, bounds);
    }
    Ok(CoeffTable { bounds: bounds.to_vec(), strides, values })
}

pub fn coeff_at<'a>(table: &'a CoeffTable, beta: &[u32]) -> Result<&'a GaussRat> {
    table.get(beta).ok_or_else(|| Error::OutOfBounds(beta.to_vec()))
}

fn truncate_total(p: &SparsePoly, max: u32) -> SparsePoly {
    SparsePoly::from_terms(p.nvars(), p.terms().filter(|(e, _)| e.iter().sum::<u32>() <= max).map(|(e, c)| (e.clone(), c.clone())))
        .expect("same arity")
}

/// Coefficients through total degree `max` by an independent route:
/// `1/D = (1/D_0) sum_k (1 - D/D_0)^k`, truncated, times `G`.
pub fn geometric_series(g: &SparsePoly, g_den: Option<&SparsePoly>, h: &SparsePoly, p: u32, max: u32) -> Result<SparsePoly> {
    let denom = denominator(h, g_den, p);
    let d0 = denom.constant_term();
    if d0.is_zero() {
        return Err(Error::OriginOnVariety);
    }
    let d0inv = d0.inv()?;
    let n = h.nvars();
    let r = SparsePoly::one(n).sub(&denom.scale(&d0inv));
    let mut inv = SparsePoly::one(n);
    let mut pw = SparsePoly::one(n);
    // r has no constant term, so r^k starts at total degree k
    for _ in 0..max {
        pw = truncate_total(&pw.mul(&r), max);
        inv = inv.add(&pw);
    }
    Ok(truncate_total(&g.mul(&inv).scale(&d0inv), max))
}

/// Nonzero coefficients of a jet in double precision.
fn jet_f64(j: &Jet) -> Vec<(Vec<u32>, Complex64)> {
    j.iter().filter(|(_, c)| !c.is_zero()).map(|(b, c)| (b.to_vec(), crate::num::to_c64(c))).collect()
}

fn eval_f64(terms: &[(Vec<u32>, Complex64)], t: &[f64]) -> Complex64 {
    terms
        .iter()
        .map(|(b, c)| {
            let m: f64 = b.iter().zip(t).map(|(&e, &x)| x.powi(e as i32)).product();
            c * m
        })
        .sum()
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One 15-point Kronrod panel with its 7-point Gauss error estimate.
fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

fn adaptive<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> (Complex64, f64) {
    let (v, e) = gk15(f, a, b);
    if e <= tol || depth == 0 {
        return (v, e);
    }
    let m = 0.5 * (a + b);
    let (l, el) = adaptive(f, a, m, tol / 2.0, depth - 1);
    let (r, er) = adaptive(f, m, b, tol / 2.0, depth - 1);
    (l + r, el + er)
}

/// Integrate over `[a, b]` by first splitting into `pieces` panels.
fn integrate<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> (Complex64, f64) {
    let pieces = 16;
    let w = (b - a) / pieces as f64;
    let mut v = Complex64::new(0.0, 0.0);
    let mut e = 0.0;
    for i in 0..pieces {
        let lo = a + w * i as f64;
        let (pv, pe) = adaptive(f, lo, lo + w, tol / pieces as f64, 40);
        v += pv;
        e += pe;
    }
    (v, e)
}

/// `int u(t) e^{-omega g(t)} dt` over a box `window` (one `(lo, hi)` per variable,
/// one or two variables), with the truncated jets as integrand. Target
/// accuracy `1e-12` times the integral of `|u e^{-omega g}|`.
pub fn fl_quadrature(u: &Jet, g: &Jet, omega: f64, window: &[(f64, f64)]) -> Result<Complex64> {
    let n = u.nvars();
    if g.nvars() != n || window.len() != n || !(1..=2).contains(&n) {
        return Err(Error::DimensionMismatch { expected: n, got: window.len() });
    }
    let ut = jet_f64(u);
    let gt = jet_f64(g);
    let integrand = |t: &[f64]| eval_f64(&ut, t) * (-omega * eval_f64(&gt, t)).exp();
    let run = |tol: f64, modulus: bool| -> (Complex64, f64) {
        let val = |t: &[f64]| {
            let v = integrand(t);
            if modulus {
                Complex64::new(v.norm(), 0.0)
            } else {
                v
            }
        };
        if n == 1 {
            integrate(&|x| val(&[x]), window[0].0, window[0].1, tol)
        } else {
            let err = std::cell::Cell::new(0.0f64);
            let inner = |x: f64| {
                let (v, e) = integrate(&|y| val(&[x, y]), window[1].0, window[1].1, tol / (window[0].1 - window[0].0));
                err.set(err.get().max(e));
                v
            };
            let (v, e) = integrate(&inner, window[0].0, window[0].1, tol);
            (v, e + err.get() * (window[0].1 - window[0].0))
        }
    };
    let (scale, _) = run(1e-6, true);
    let target = 1e-12 * scale.re.max(f64::MIN_POSITIVE);
    let (v, e) = run(target, false);
    if e > 10.0 * target || !v.re.is_finite() {
        return Err(Error::Quadrature { achieved: e, target });
    }
    Ok(v)
}
