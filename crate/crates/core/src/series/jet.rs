//! Truncated multivariate Taylor series ("jets") with complex coefficients.
//!
//! A jet of order `T` in `n` variables stores one coefficient per
//! multi-index `beta` with `|beta| <= T`, in graded order. Coefficient
//! `beta` is the Taylor coefficient `d^beta f(center) / beta!`. Products are
//! truncated Cauchy products; nothing above `T` is ever read or written.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::num::{self, Precision};

/// Index layout shared by all jets of a given `(nvars, order)`.
#[derive(Debug)]
pub struct JetShape {
    nvars: usize,
    order: u32,
    indices: Vec<Vec<u32>>,
    degrees: Vec<u32>,
    lookup: HashMap<Vec<u32>, usize>,
    /// `pairs[k]` lists every `(i, j)` with `indices[i] + indices[j] == indices[k]`.
    pairs: Vec<Vec<(u32, u32)>>,
    /// `deg_end[t]` is the number of indices of total degree at most `t`.
    deg_end: Vec<usize>,
}

fn indices_of_degree(nvars: usize, deg: u32) -> Vec<Vec<u32>> {
    if nvars == 0 {
        return if deg == 0 { vec![vec![]] } else { vec![] };
    }
    if nvars == 1 {
        return vec![vec![deg]];
    }
    let mut out = Vec::new();
    for first in (0..=deg).rev() {
        for mut rest in indices_of_degree(nvars - 1, deg - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl JetShape {
    fn build(nvars: usize, order: u32) -> JetShape {
        let mut indices = Vec::new();
        let mut degrees = Vec::new();
        let mut deg_end = Vec::new();
        // a zero-variable jet is just a constant, whatever its nominal order
        for t in 0..=order {
            for idx in indices_of_degree(nvars, t) {
                indices.push(idx);
                degrees.push(t);
            }
            deg_end.push(indices.len());
        }
        let lookup: HashMap<Vec<u32>, usize> =
            indices.iter().enumerate().map(|(i, b)| (b.clone(), i)).collect();
        let mut pairs = vec![Vec::new(); indices.len()];
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                if degrees[i] + degrees[j] > order {
                    continue;
                }
                let sum: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let k = lookup[&sum];
                pairs[k].push((i as u32, j as u32));
            }
        }
        JetShape { nvars, order, indices, degrees, lookup, pairs, deg_end }
    }

    /// Shared, cached shape for `(nvars, order)`.
    pub fn get(nvars: usize, order: u32) -> Arc<JetShape> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<JetShape>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(s) = cache.lock().unwrap().get(&(nvars, order)) {
            return s.clone();
        }
        let shape = Arc::new(JetShape::build(nvars, order));
        cache.lock().unwrap().entry((nvars, order)).or_insert(shape).clone()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn index_of(&self, beta: &[u32]) -> Option<usize> {
        self.lookup.get(beta).copied()
    }

    pub fn multi_index(&self, i: usize) -> &[u32] {
        &self.indices[i]
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.degrees[i]
    }

    pub fn len_through(&self, deg: u32) -> usize {
        self.deg_end[deg.min(self.order) as usize]
    }
}

#[derive(Clone, Debug)]
pub struct Jet {
    shape: Arc<JetShape>,
    center: Vec<Complex>,
    coeffs: Vec<Complex>,
    prec: Precision,
}

impl Jet {
    pub fn zero(center: &[Complex], order: u32, prec: Precision) -> Jet {
        let shape = JetShape::get(center.len(), order);
        let coeffs = vec![num::czero(prec); shape.len()];
        Jet { shape, center: center.to_vec(), coeffs, prec }
    }

    pub fn constant(center: &[Complex], order: u32, c: &Complex) -> Jet {
        let prec = Precision::new(c.prec().0).unwrap_or_default();
        let mut j = Jet::zero(center, order, prec);
        j.coeffs[0] = Complex::with_val(prec.bits(), c);
        j
    }

    pub fn one(center: &[Complex], order: u32, prec: Precision) -> Jet {
        Jet::constant(center, order, &num::cone(prec))
    }

    /// The coordinate function `x_i` expanded at the center.
    pub fn variable(center: &[Complex], order: u32, i: usize, prec: Precision) -> Jet {
        let mut j = Jet::zero(center, order, prec);
        j.coeffs[0] = Complex::with_val(prec.bits(), &center[i]);
        if order >= 1 {
            let mut e = vec![0; center.len()];
            e[i] = 1;
            let k = j.shape.index_of(&e).unwrap();
            j.coeffs[k] = num::cone(prec);
        }
        j
    }

    /// A jet centered at the origin of `nvars` variables.
    pub fn zero_at_origin(nvars: usize, order: u32, prec: Precision) -> Jet {
        Jet::zero(&vec![num::czero(prec); nvars], order, prec)
    }

    pub fn nvars(&self) -> usize {
        self.shape.nvars
    }

    pub fn order(&self) -> u32 {
        self.shape.order
    }

    pub fn center(&self) -> &[Complex] {
        &self.center
    }

    pub fn prec(&self) -> Precision {
        self.prec
    }

    pub fn shape(&self) -> &JetShape {
        &self.shape
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn constant_term(&self) -> &Complex {
        &self.coeffs[0]
    }

    /// Taylor coefficient at `beta`; `None` when `|beta|` exceeds the order.
    pub fn coeff(&self, beta: &[u32]) -> Option<&Complex> {
        self.shape.index_of(beta).map(|k| &self.coeffs[k])
    }

    pub fn set_coeff(&mut self, beta: &[u32], c: Complex) -> Result<()> {
        let k = self.shape.index_of(beta).ok_or(Error::OrderBudgetExceeded {
            needed: beta.iter().sum(),
            available: self.order(),
        })?;
        self.coeffs[k] = c;
        Ok(())
    }

    pub fn coeff_at(&self, k: usize) -> &Complex {
        &self.coeffs[k]
    }

    pub fn set_coeff_at(&mut self, k: usize, c: Complex) {
        self.coeffs[k] = c;
    }

    /// Build from explicit `(beta, coefficient)` pairs; missing entries are zero.
    pub fn from_coeffs<I>(center: &[Complex], order: u32, prec: Precision, coeffs: I) -> Result<Jet>
    where
        I: IntoIterator<Item = (Vec<u32>, Complex)>,
    {
        let mut j = Jet::zero(center, order, prec);
        for (b, c) in coeffs {
            if b.len() != center.len() {
                return Err(Error::DimensionMismatch { expected: center.len(), got: b.len() });
            }
            j.set_coeff(&b, c)?;
        }
        Ok(j)
    }

    fn check_compatible(&self, other: &Jet) -> Result<()> {
        if self.shape.nvars != other.shape.nvars
            || self.shape.order != other.shape.order
            || self.center != other.center
        {
            return Err(Error::JetMismatch);
        }
        Ok(())
    }

    fn map_coeffs(&self, coeffs: Vec<Complex>) -> Jet {
        Jet { shape: self.shape.clone(), center: self.center.clone(), coeffs, prec: self.prec }
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let p = self.prec.bits();
        Ok(self.map_coeffs(
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| Complex::with_val(p, a + b)).collect(),
        ))
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let p = self.prec.bits();
        Ok(self.map_coeffs(
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| Complex::with_val(p, a - b)).collect(),
        ))
    }

    pub fn neg(&self) -> Jet {
        self.map_coeffs(self.coeffs.iter().map(|a| Complex::with_val(self.prec.bits(), -a)).collect())
    }

    pub fn scale(&self, c: &Complex) -> Jet {
        let p = self.prec.bits();
        self.map_coeffs(self.coeffs.iter().map(|a| Complex::with_val(p, a * c)).collect())
    }

    pub fn add_scalar(&self, c: &Complex) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let p = self.prec.bits();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for pairs in &self.shape.pairs {
            let mut acc = Complex::new(p);
            for &(i, j) in pairs {
                let a = &self.coeffs[i as usize];
                if a.is_zero() {
                    continue;
                }
                acc += a * &other.coeffs[j as usize];
            }
            out.push(acc);
        }
        Ok(self.map_coeffs(out))
    }

    pub fn pow(&self, k: u32) -> Jet {
        let mut out = Jet::one(&self.center, self.order(), self.prec);
        for _ in 0..k {
            out = out.mul(self).expect("same shape");
        }
        out
    }

    /// Multiplicative inverse through the jet's order.
    pub fn reciprocal(&self) -> Result<Jet> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return Err(Error::NonInvertibleJet);
        }
        let p = self.prec.bits();
        let inv0 = Complex::with_val(p, 1) / a0;
        let mut b: Vec<Complex> = Vec::with_capacity(self.coeffs.len());
        b.push(inv0.clone());
        for k in 1..self.coeffs.len() {
            let mut acc = Complex::new(p);
            for &(i, j) in &self.shape.pairs[k] {
                if i == 0 {
                    continue;
                }
                acc += &self.coeffs[i as usize] * &b[j as usize];
            }
            b.push(-(acc * &inv0));
        }
        Ok(self.map_coeffs(b))
    }

    /// Principal logarithm. Higher coefficients come from the Euler-operator
    /// identity `E(a) = a * E(log a)` solved degree by degree.
    pub fn log(&self) -> Result<Jet> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return Err(Error::NonInvertibleJet);
        }
        let p = self.prec.bits();
        let mut l: Vec<Complex> = Vec::with_capacity(self.coeffs.len());
        l.push(Complex::with_val(p, a0.ln_ref()));
        for k in 1..self.coeffs.len() {
            let dk = self.shape.degrees[k];
            let mut acc = Complex::with_val(p, &self.coeffs[k] * dk);
            for &(i, j) in &self.shape.pairs[k] {
                if i == 0 || j == 0 {
                    continue;
                }
                let di = self.shape.degrees[i as usize];
                let t = Complex::with_val(p, &l[i as usize] * &self.coeffs[j as usize]);
                acc -= t * di;
            }
            let denom = Complex::with_val(p, a0 * dk);
            l.push(acc / denom);
        }
        Ok(self.map_coeffs(l))
    }

    /// Drop every coefficient above `order`.
    pub fn truncate(&self, order: u32) -> Jet {
        let order = order.min(self.order());
        let shape = JetShape::get(self.nvars(), order);
        let coeffs = self.coeffs[..shape.len()].to_vec();
        Jet { shape, center: self.center.clone(), coeffs, prec: self.prec }
    }

    /// Zero every coefficient of total degree at most `deg`.
    pub fn without_low_orders(&self, deg: u32) -> Jet {
        let mut out = self.clone();
        let end = self.shape.len_through(deg);
        for c in &mut out.coeffs[..end] {
            *c = num::czero(self.prec);
        }
        out
    }

    /// Apply the operator `-sum_{r,s} m[r][s] d_r d_s`, giving a jet of order `T - 2`.
    pub fn apply_second_order(&self, m: &[Vec<Complex>]) -> Result<Jet> {
        let n = self.nvars();
        if self.order() < 2 {
            return Err(Error::OrderBudgetExceeded { needed: 2, available: self.order() });
        }
        let p = self.prec.bits();
        let out_order = self.order() - 2;
        let out_shape = JetShape::get(n, out_order);
        let mut out = vec![Complex::new(p); out_shape.len()];
        for (k, gamma) in out_shape.indices.iter().enumerate() {
            let mut acc = Complex::new(p);
            for r in 0..n {
                for s in 0..n {
                    if m[r][s].is_zero() {
                        continue;
                    }
                    let mut beta = gamma.clone();
                    beta[r] += 1;
                    beta[s] += 1;
                    let weight: u64 = if r == s {
                        (gamma[r] as u64 + 2) * (gamma[r] as u64 + 1)
                    } else {
                        (gamma[r] as u64 + 1) * (gamma[s] as u64 + 1)
                    };
                    let src = &self.coeffs[self.shape.index_of(&beta).unwrap()];
                    let t = Complex::with_val(p, src * &m[r][s]);
                    acc += t * weight;
                }
            }
            out[k] = -acc;
        }
        Ok(Jet { shape: out_shape, center: self.center.clone(), coeffs: out, prec: self.prec })
    }

    /// `m`-th derivative at the center of a univariate jet, i.e. `m! * a_m`.
    pub fn derivative_at_center(&self, m: u32) -> Result<Complex> {
        if self.nvars() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: self.nvars() });
        }
        if m > self.order() {
            return Err(Error::OrderBudgetExceeded { needed: m, available: self.order() });
        }
        let f = num::factorial(self.prec, m);
        Ok(Complex::with_val(self.prec.bits(), &self.coeffs[m as usize] * &f))
    }

    /// Evaluate the truncated series at `center + delta`.
    pub fn eval_displacement(&self, delta: &[Complex]) -> Complex {
        let p = self.prec.bits();
        let mut acc = Complex::new(p);
        for (k, beta) in self.shape.indices.iter().enumerate() {
            let mut m = self.coeffs[k].clone();
            for (d, &e) in delta.iter().zip(beta) {
                for _ in 0..e {
                    m *= d;
                }
            }
            acc += m;
        }
        acc
    }

    /// Substitute `w_m = center_m * exp(i t_m)` and expand in `t` at 0,
    /// through `order` (which may not exceed this jet's order).
    pub fn circle_substitute(&self, order: u32) -> Result<Jet> {
        if order > self.order() {
            return Err(Error::OrderBudgetExceeded { needed: order, available: self.order() });
        }
        let n = self.nvars();
        let prec = self.prec;
        for (m, c) in self.center.iter().enumerate() {
            if c.is_zero() {
                return Err(Error::ZeroCenterComponent(m));
            }
        }
        let origin = vec![num::czero(prec); n];
        // delta_m(t) = c_m (e^{i t_m} - 1)
        let deltas: Vec<Jet> = (0..n)
            .map(|m| {
                let mut d = Jet::zero(&origin, order, prec);
                let mut ik = num::cone(prec);
                for k in 1..=order {
                    ik *= num::ci(prec);
                    let mut e = vec![0; n];
                    e[m] = k;
                    let f = num::factorial(prec, k);
                    let v = Complex::with_val(prec.bits(), &ik * &self.center[m]) / f;
                    d.set_coeff(&e, v).unwrap();
                }
                d
            })
            .collect();
        let src_shape = &self.shape;
        let count = src_shape.len_through(order);
        let mut powers: Vec<Jet> = Vec::with_capacity(count);
        let mut out = Jet::zero(&origin, order, prec);
        for k in 0..count {
            let beta = &src_shape.indices[k];
            let pw = if k == 0 {
                Jet::one(&origin, order, prec)
            } else {
                let m = beta.iter().position(|&e| e > 0).unwrap();
                let mut prev = beta.clone();
                prev[m] -= 1;
                let pk = src_shape.index_of(&prev).unwrap();
                powers[pk].mul(&deltas[m])?
            };
            let a = &self.coeffs[k];
            if !a.is_zero() {
                out = out.add(&pw.scale(a))?;
            }
            powers.push(pw);
        }
        Ok(out)
    }

    /// Largest coefficient magnitude (as f64) among total degrees in `lo..=hi`.
    pub fn max_abs_between(&self, lo: u32, hi: u32) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(k, _)| (lo..=hi).contains(&self.shape.degrees[*k]))
            .map(|(_, c)| num::abs_f64(c))
            .fold(0.0, f64::max)
    }

    /// Coefficientwise maximum absolute difference against another jet of the same shape.
    pub fn max_abs_diff(&self, other: &Jet) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| num::abs_f64(&Complex::with_val(self.prec.bits(), a - b)))
            .fold(0.0, f64::max))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], &Complex)> {
        self.shape.indices.iter().map(|b| b.as_slice()).zip(self.coeffs.iter())
    }

    /// Real-valued magnitude of the constant term, for tolerance scaling.
    pub fn abs_constant(&self) -> Float {
        num::fabs(&self.coeffs[0])
    }
}
