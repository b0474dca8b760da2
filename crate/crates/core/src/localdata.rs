//! Point-local data at a smooth critical point: the implicit function `h`
//! with `H(w, h(w)) = 0`, the phase `g~`, the amplitudes `u_j` and `u~_j`,
//! and closed forms for the phase Hessian.
//!
//! Functions of `(w, y)` near the point are carried as "s-series": a vector
//! of jets in `w`, entry `k` being the coefficient of `s^k` with `s = y - h(w)`
//! (or `s = y - c_d` before `h` is known).

use rug::{Complex, Integer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::json;
use crate::linalg;
use crate::num::{self, Precision};
use crate::problem::Problem;
use crate::series::{jet_from_poly, Jet, SparsePoly};

/// Split `P(w, y)` by powers of the last variable: entry `e` is the
/// coefficient of `y^e`, a polynomial in the first `d - 1` variables.
fn split_last(p: &SparsePoly) -> Vec<SparsePoly> {
    let d = p.nvars();
    let deg = p.degree_in(d - 1) as usize;
    let mut out = vec![SparsePoly::zero(d - 1); deg + 1];
    for (e, v) in p.terms() {
        out[e[d - 1] as usize].add_term(e[..d - 1].to_vec(), v.clone());
    }
    out
}

fn jets_by_power(p: &SparsePoly, what: &[Complex], order: u32, prec: Precision) -> Result<Vec<Jet>> {
    split_last(p).iter().map(|q| jet_from_poly(q, what, order, prec)).collect()
}

/// s-series of `P(w, y0(w) + s)` from the per-power jets of `P` and a jet `y0`.
fn shift(parts: &[Jet], y0: &Jet) -> Result<Vec<Jet>> {
    let deg = parts.len() - 1;
    let prec = y0.prec();
    let mut powers = vec![Jet::one(y0.center(), y0.order(), prec)];
    for k in 1..=deg {
        powers.push(powers[k - 1].mul(y0)?);
    }
    let mut out = Vec::with_capacity(deg + 1);
    for k in 0..=deg {
        let mut acc = Jet::zero(y0.center(), y0.order(), prec);
        for (e, part) in parts.iter().enumerate().skip(k) {
            let b = Complex::with_val(prec.bits(), num::binomial(e as u32, k as u32));
            acc = acc.add(&part.mul(&powers[e - k])?.scale(&b))?;
        }
        out.push(acc);
    }
    Ok(out)
}

fn series_get(a: &[Jet], k: usize, like: &Jet) -> Jet {
    a.get(k).cloned().unwrap_or_else(|| Jet::zero(like.center(), like.order(), like.prec()))
}

fn series_mul(a: &[Jet], b: &[Jet], len: usize) -> Result<Vec<Jet>> {
    let like = &a[0];
    let mut out = Vec::with_capacity(len);
    for n in 0..len {
        let mut acc = Jet::zero(like.center(), like.order(), like.prec());
        for i in 0..=n {
            if i < a.len() && n - i < b.len() {
                acc = acc.add(&a[i].mul(&b[n - i])?)?;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

fn series_div(a: &[Jet], b: &[Jet], len: usize) -> Result<Vec<Jet>> {
    let like = &b[0];
    let inv0 = b[0].reciprocal()?;
    let mut out: Vec<Jet> = Vec::with_capacity(len);
    for n in 0..len {
        let mut acc = series_get(a, n, like);
        for i in 1..=n {
            if i < b.len() {
                acc = acc.sub(&b[i].mul(&out[n - i])?)?;
            }
        }
        out.push(acc.mul(&inv0)?);
    }
    Ok(out)
}

/// Jet of `h` at `c^ = (c_1..c_{d-1})` with `h(c^) = c_d` and `H(w, h(w)) = 0`,
/// by Newton iteration on jets (quadratic convergence in the order).
pub fn implicit_h_jet(h: &SparsePoly, c: &[Complex], order: u32, prec: Precision) -> Result<Jet> {
    let d = h.nvars();
    if c.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: c.len() });
    }
    let what = &c[..d - 1];
    let parts = jets_by_power(h, what, order, prec)?;
    let cd = Jet::constant(what, order, &c[d - 1]);
    let a = shift(&parts, &cd)?;
    let (_, scale) = h.eval_with_scale(c, prec);
    let r0 = num::abs_f64(a[0].constant_term());
    if r0 > 1e-10 * scale.max(1.0) {
        return Err(Error::NotOnVariety(r0));
    }
    if a.len() < 2 || num::abs_f64(a[1].constant_term()) <= 1e-10 * scale.max(1.0) {
        return Err(Error::NotSmooth);
    }
    let mut sigma = Jet::zero(what, order, prec);
    let mut iters = 2;
    while (1u64 << (iters - 2)) <= order as u64 {
        iters += 1;
    }
    for _ in 0..iters {
        // Horner for F(sigma) and F'(sigma)
        let mut f = a.last().unwrap().clone();
        let mut fp = Jet::zero(what, order, prec);
        for k in (0..a.len() - 1).rev() {
            fp = fp.mul(&sigma)?.add(&f)?;
            f = f.mul(&sigma)?.add(&a[k])?;
        }
        sigma = sigma.sub(&f.mul(&fp.reciprocal()?)?)?;
    }
    Ok(sigma.add_scalar(&c[d - 1]))
}

/// Largest coefficient of `H(w, h(w))`; zero through the jet order for a correct `h`.
pub fn composite_residual(h: &SparsePoly, h_jet: &Jet) -> Result<f64> {
    let parts = jets_by_power(h, h_jet.center(), h_jet.order(), h_jet.prec())?;
    let s = shift(&parts, h_jet)?;
    Ok(s[0].max_abs_between(0, h_jet.order()))
}

/// Jet at 0 of `g~(t) = log(h~(t) / h~(0)) + i sum_m (alpha_m / alpha_d) t_m`,
/// where `h~(t) = h(c_1 e^{i t_1}, ..)`.
pub fn gtilde_jet(h_jet: &Jet, alpha: &Direction, order: u32) -> Result<Jet> {
    let n = h_jet.nvars();
    if alpha.dim() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, got: alpha.dim() });
    }
    if h_jet.constant_term().is_zero() {
        return Err(Error::NonInvertibleJet);
    }
    let prec = h_jet.prec();
    let ht = h_jet.circle_substitute(order)?;
    let mut g = ht.log()?;
    g.set_coeff_at(0, num::czero(prec));
    for m in 0..n {
        let mut e = vec![0; n];
        e[m] = 1;
        if order >= 1 {
            let r = alpha.ratio(m);
            let add = Complex::with_val(prec.bits(), (0, &r));
            let cur = g.coeff(&e).unwrap().clone();
            g.set_coeff(&e, cur + add)?;
        }
    }
    Ok(g)
}

/// `g~''(0)` read off the order-2 coefficients of a phase jet.
pub fn hessian_from_jet(g: &Jet) -> Vec<Vec<Complex>> {
    let n = g.nvars();
    (0..n)
        .map(|l| {
            (0..n)
                .map(|m| {
                    let mut e = vec![0; n];
                    e[l] += 1;
                    e[m] += 1;
                    let v = g.coeff(&e).cloned().unwrap_or_else(|| num::czero(g.prec()));
                    if l == m {
                        v * 2u32
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect()
}

/// Closed-form `g~''(0)` from first and second partials of `H` at `c`, with
/// the last coordinate distinguished (`c_d dH/dx_d(c) != 0`).
pub fn hessian_closed_form(h: &SparsePoly, c: &[Complex], alpha: &Direction, prec: Precision) -> Result<Vec<Vec<Complex>>> {
    let d = h.nvars();
    if c.len() != d || alpha.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: c.len().min(alpha.dim()) });
    }
    let ev = |p: &SparsePoly| p.eval(c, prec);
    let dh: Vec<SparsePoly> = (0..d).map(|i| h.partial(i)).collect();
    let d1: Vec<Complex> = dh.iter().map(ev).collect();
    let d2: Vec<Vec<Complex>> = (0..d).map(|i| (0..d).map(|j| ev(&dh[i].partial(j))).collect()).collect();
    let last = d - 1;
    let hd = &d1[last];
    let (_, scale) = dh[last].eval_with_scale(c, prec);
    if num::abs_f64(hd) <= 1e-10 * scale.max(1.0) || c[last].is_zero() {
        return Err(Error::NotSmooth);
    }
    let b = prec.bits();
    let cd = &c[last];
    let hdd = &d2[last][last];
    let denom = Complex::with_val(b, cd * cd) * Complex::with_val(b, hd * hd);
    let mut out = vec![vec![num::czero(prec); d - 1]; d - 1];
    for l in 0..d - 1 {
        for m in 0..d - 1 {
            let (hl, hm) = (&d1[l], &d1[m]);
            let cross = Complex::with_val(b, hl * hm);
            let inner = Complex::with_val(b, hd * &d2[m][l])
                - Complex::with_val(b, hm * &d2[last][l])
                - Complex::with_val(b, hl * &d2[m][last])
                + Complex::with_val(b, &cross / hd) * hdd;
            let bracket = cross + Complex::with_val(b, cd * &inner);
            let pref = Complex::with_val(b, &c[l] * &c[m]) / &denom;
            let mut v = pref * bracket;
            if l == m {
                v += Complex::with_val(b, &c[l] * hl) / Complex::with_val(b, cd * hd);
            }
            out[l][m] = v;
        }
    }
    Ok(out)
}

/// Symmetric case: `q = 1 + (c_1 / dH/dx_d)(d^2H/dx_d^2 - d^2H/dx_1 dx_d)` at `c`,
/// with `g~''(0) = q (I + J)` and determinant `d q^{d-1}`.
pub fn hessian_symmetric_q(h: &SparsePoly, c: &[Complex], prec: Precision) -> Result<(Complex, Complex)> {
    if !h.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let d = h.nvars();
    if d < 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: d });
    }
    let last = d - 1;
    let hd = h.partial(last);
    let dd = hd.partial(last).eval(c, prec);
    let d1d = hd.partial(0).eval(c, prec);
    let hdv = hd.eval(c, prec);
    if hdv.is_zero() {
        return Err(Error::NotSmooth);
    }
    let q = num::cone(prec) + Complex::with_val(prec.bits(), &c[0] / &hdv) * (dd - d1d);
    let qpow = num::cpow_int(&q, &Integer::from(d as u32 - 1));
    let det = qpow * d as u32;
    Ok((q, det))
}

/// Amplitudes `u_j(w) = (-h)^{j-p} d^j/dy^j (G / Q^p)` at `y = h(w)` for
/// `j < p`, as jets at `c^`, with `Q = H / (y - h)`. Also returns the largest
/// relative deviation of `j! [s^j] Q` from `d_d^{j+1} H(c) / (j+1)` for `j <= p+2`.
pub fn u_jets(problem: &Problem, c: &[Complex], h_jet: &Jet) -> Result<(Vec<Jet>, f64)> {
    let p = problem.p as usize;
    let prec = h_jet.prec();
    let order = h_jet.order();
    let what = h_jet.center();
    let hs = shift(&jets_by_power(&problem.h, what, order, prec)?, h_jet)?;
    // Q's s-series is H's shifted down by one power
    let zero = Jet::zero(what, order, prec);
    let q: Vec<Jet> = (1..hs.len().max(p + 4)).map(|k| series_get(&hs, k, &zero)).collect();
    if q[0].constant_term().is_zero() {
        return Err(Error::NonInvertibleJet);
    }

    let d = problem.nvars();
    let last = d - 1;
    let mut worst: f64 = 0.0;
    let mut deriv = problem.h.partial(last);
    for j in 0..=p + 2 {
        let want = Complex::with_val(prec.bits(), deriv.eval(c, prec) / (j as u32 + 1));
        let mut got = series_get(&q, j, &zero).constant_term().clone();
        got *= num::factorial(prec, j as u32);
        let diff = num::abs_f64(&Complex::with_val(prec.bits(), &got - &want));
        let (_, scale) = deriv.eval_with_scale(c, prec);
        worst = worst.max(diff / scale.max(num::abs_f64(&want)).max(1e-300));
        deriv = deriv.partial(last);
    }

    let mut qp = vec![Jet::one(what, order, prec)];
    for _ in 0..p {
        qp = series_mul(&qp, &q, p)?;
    }
    let mut gs = shift(&jets_by_power(&problem.g, what, order, prec)?, h_jet)?;
    if let Some(den) = &problem.g_den {
        let ds = shift(&jets_by_power(den, what, order, prec)?, h_jet)?;
        gs = series_div(&gs, &ds, p)?;
    }
    let r = series_div(&gs, &qp, p)?;
    let minus_h_inv = h_jet.neg().reciprocal()?;
    let mut out = Vec::with_capacity(p);
    for j in 0..p {
        let f = num::factorial(prec, j as u32);
        let rj = series_get(&r, j, &zero).scale(&num::creal(prec, &f));
        out.push(rj.mul(&minus_h_inv.pow((p - j) as u32))?);
    }
    Ok((out, worst))
}

/// Least `v >= 2` whose coefficient of a univariate phase jet exceeds
/// `tol` times the largest coefficient of order at least 2.
pub fn vanishing_order(g: &Jet, tol: f64) -> Result<u32> {
    if g.nvars() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: g.nvars() });
    }
    let max = g.max_abs_between(2, g.order());
    if max == 0.0 {
        return Err(Error::PhaseFlat(g.order()));
    }
    (2..=g.order())
        .find(|&v| num::abs_f64(g.coeff_at(v as usize)) > tol * max)
        .ok_or(Error::PhaseFlat(g.order()))
}

/// All local data at one critical point, in the reordered frame.
#[derive(Clone, Debug)]
pub struct LocalFrame {
    /// The point, with the distinguished coordinate last.
    pub c: Vec<Complex>,
    /// New coordinate `k` is original coordinate `permutation[k]`.
    pub permutation: Vec<usize>,
    pub alpha: Direction,
    pub p: u32,
    pub h_jet: Jet,
    pub gt_jet: Jet,
    /// `u_j` at `c^`, `j < p`.
    pub u_jets: Vec<Jet>,
    /// `u~_j = u_j o E` at 0, `j < p`.
    pub ut_jets: Vec<Jet>,
    pub hessian: Vec<Vec<Complex>>,
    pub q_identity_residual: f64,
    pub prec: Precision,
}

impl LocalFrame {
    /// Build every jet through `order` at the critical point `c` (original
    /// coordinates), after reordering by `permutation`.
    pub fn build(problem: &Problem, c: &[Complex], permutation: &[usize], order: u32, prec: Precision) -> Result<LocalFrame> {
        let d = problem.nvars();
        if c.len() != d || permutation.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: c.len() });
        }
        let pr = problem.permute(permutation);
        let cp: Vec<Complex> = permutation.iter().map(|&i| c[i].clone()).collect();
        if cp[d - 1].is_zero() {
            return Err(Error::NotSmooth);
        }
        let h_jet = implicit_h_jet(&pr.h, &cp, order, prec)?;
        let gt_jet = gtilde_jet(&h_jet, &pr.alpha, order)?;
        let grad = gt_jet.max_abs_between(1, 1.min(order));
        if d > 1 && grad > 1e-10 {
            return Err(Error::Expansion(format!("phase gradient {grad:e} at 0: point is not critical for this direction")));
        }
        let (u_jets, q_identity_residual) = u_jets(&pr, &cp, &h_jet)?;
        let ut_jets = u_jets.iter().map(|u| u.circle_substitute(order)).collect::<Result<Vec<_>>>()?;
        let hessian = hessian_from_jet(&gt_jet);
        Ok(LocalFrame {
            c: cp,
            permutation: permutation.to_vec(),
            alpha: pr.alpha,
            p: problem.p,
            h_jet,
            gt_jet,
            u_jets,
            ut_jets,
            hessian,
            q_identity_residual,
            prec,
        })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn order(&self) -> u32 {
        self.gt_jet.order()
    }

    pub fn hessian_det(&self) -> Complex {
        if self.hessian.is_empty() {
            return num::cone(self.prec);
        }
        linalg::determinant(&self.hessian, self.prec)
    }

    pub fn to_json(&self) -> Value {
        let jet = |j: &Jet| -> Value {
            Value::Array(
                j.iter()
                    .map(|(b, v)| json!({"index": b, "coef": json::complex(v, self.prec)}))
                    .collect(),
            )
        };
        json!({
            "c": json::complex_vec(&self.c, self.prec),
            "permutation": self.permutation,
            "alpha": self.alpha.to_json(),
            "p": self.p,
            "order": self.order(),
            "h_jet": jet(&self.h_jet),
            "gtilde_jet": jet(&self.gt_jet),
            "ut_jets": self.ut_jets.iter().map(jet).collect::<Vec<_>>(),
            "hessian": json::matrix(&self.hessian, self.prec),
        })
    }
}
