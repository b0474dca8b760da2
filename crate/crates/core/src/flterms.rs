//! Term calculus for Fourier-Laplace integrals `I(w) = int u(t) e^{-w g(t)} dt`
//! with a unique stationary point of `g` at `t = 0`, `g(0) = 0`, `Re g >= 0`.
//!
//! Nondegenerate phase (any number of variables):
//! `I(w) ~ (2 pi / w)^{n/2} det(g''(0))^{-1/2} sum_k L_k w^{-k}`.
//! One variable with `g = a t^v + ...`: for even `v`,
//! `I(w) ~ (2/v) (a w)^{-1/v} sum_k L^even_k w^{-2k/v}`; for odd `v`,
//! `I(w) ~ (1/v) (|a| w)^{-1/v} sum_k L^odd_k w^{-k/v}`.

use rug::{Complex, Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::linalg;
use crate::num;
use crate::series::Jet;

#[derive(Clone, Debug)]
pub enum PhaseKind {
    Smooth {
        hessian: Vec<Vec<Complex>>,
        hessian_inverse: Vec<Vec<Complex>>,
        /// `det(g''(0))^{-1/2}` on the branch continuous from positive definite.
        det_inv_sqrt: Complex,
    },
    Even { v: u32, a: Complex, a_inv_root: Complex },
    Odd { v: u32, a: Complex, zeta: Complex, abs_inv_root: Float, sgn: Complex },
}

/// A phase jet split into its leading part and the remainder `gbar`.
#[derive(Clone, Debug)]
pub struct PhaseDecomposition {
    pub g_jet: Jet,
    /// `g` minus its quadratic part (smooth) or minus `a t^v` (degenerate).
    pub gbar_jet: Jet,
    pub kind: PhaseKind,
}

fn check_stationary(g: &Jet) -> Result<()> {
    let lo = g.max_abs_between(0, 1);
    let scale = g.max_abs_between(2, g.order()).max(1.0);
    if lo > 1e-10 * scale {
        return Err(Error::Expansion(format!("phase is not stationary at 0 (|g(0)|, |g'(0)| up to {lo:e})")));
    }
    Ok(())
}

impl PhaseDecomposition {
    pub fn smooth(g: &Jet) -> Result<Self> {
        check_stationary(g)?;
        let prec = g.prec();
        let n = g.nvars();
        let hessian = crate::localdata::hessian_from_jet(g);
        let gbar_jet = g.without_low_orders(2);
        if n == 0 {
            return Ok(PhaseDecomposition {
                g_jet: g.clone(),
                gbar_jet,
                kind: PhaseKind::Smooth { hessian, hessian_inverse: vec![], det_inv_sqrt: num::cone(prec) },
            });
        }
        let hessian_inverse = linalg::inverse(&hessian, prec).map_err(|_| Error::DegenerateHessian(0.0))?;
        let det_inv_sqrt = linalg::det_inv_sqrt(&hessian, prec)?;
        Ok(PhaseDecomposition {
            g_jet: g.clone(),
            gbar_jet,
            kind: PhaseKind::Smooth { hessian, hessian_inverse, det_inv_sqrt },
        })
    }

    /// Univariate phase with vanishing order `v`; `a = g^{(v)}(0) / v!`.
    pub fn degenerate(g: &Jet, v: u32) -> Result<Self> {
        if g.nvars() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: g.nvars() });
        }
        if v < 2 || v > g.order() {
            return Err(Error::OrderBudgetExceeded { needed: v, available: g.order() });
        }
        check_stationary(g)?;
        let prec = g.prec();
        let a = g.coeff_at(v as usize).clone();
        let mut gbar_jet = g.without_low_orders(v);
        for k in 2..v {
            // coefficients below v are numerically zero; remove them outright
            gbar_jet.set_coeff_at(k as usize, num::czero(prec));
        }
        let abs_a = num::fabs(&a);
        if abs_a.is_zero() {
            return Err(Error::InvalidLeadingCoefficient("a = 0".into()));
        }
        let kind = if v % 2 == 0 {
            if a.real().is_sign_negative() && !a.real().is_zero() {
                return Err(Error::InvalidLeadingCoefficient(format!(
                    "even order {v} needs Re a >= 0, got a = {}",
                    num::to_c64(&a)
                )));
            }
            let a_inv_root = num::cpow_neg_inv(&a, v);
            PhaseKind::Even { v, a, a_inv_root }
        } else {
            let re = a.real().to_f64().abs();
            if re > 1e-10 * abs_a.to_f64() {
                return Err(Error::InvalidLeadingCoefficient(format!(
                    "odd order {v} needs imaginary a, got a = {}",
                    num::to_c64(&a)
                )));
            }
            let sgn = Complex::with_val(prec.bits(), &a / &abs_a);
            let arg = num::pi(prec) / (2 * v);
            let (s, c) = arg.sin_cos(Float::new(prec.bits()));
            let zeta = Complex::with_val(prec.bits(), (c, s));
            let abs_inv_root = num::pow_rat(prec, &abs_a, &Rational::from((-1, v)));
            PhaseKind::Odd { v, a, zeta, abs_inv_root, sgn }
        };
        Ok(PhaseDecomposition { g_jet: g.clone(), gbar_jet, kind })
    }

    pub fn v(&self) -> u32 {
        match &self.kind {
            PhaseKind::Smooth { .. } => 2,
            PhaseKind::Even { v, .. } | PhaseKind::Odd { v, .. } => *v,
        }
    }

    /// Jet order needed for the term `k`.
    pub fn order_needed(&self, k: u32) -> u32 {
        match &self.kind {
            PhaseKind::Smooth { .. } => 6 * k,
            PhaseKind::Even { v, .. } => 2 * k * (v + 1),
            PhaseKind::Odd { v, .. } => k * (v + 1),
        }
    }

    /// Exponent of `w` carried by term `k` of the integral.
    pub fn exponent(&self, k: u32) -> Rational {
        match &self.kind {
            PhaseKind::Smooth { hessian, .. } => -Rational::from((hessian.len() as i64, 2)) - Rational::from(k),
            PhaseKind::Even { v, .. } => -Rational::from((2 * k as i64 + 1, *v)),
            PhaseKind::Odd { v, .. } => -Rational::from((k as i64 + 1, *v)),
        }
    }

    /// Constant in front of `sum_k L_k w^{...}` (the `w`-free part of the prefactor).
    pub fn prefactor(&self) -> Complex {
        let prec = self.g_jet.prec();
        match &self.kind {
            PhaseKind::Smooth { hessian, det_inv_sqrt, .. } => {
                let n = hessian.len() as i64;
                let two_pi = num::pi(prec) * 2u32;
                let f = num::pow_rat(prec, &two_pi, &Rational::from((n, 2)));
                Complex::with_val(prec.bits(), det_inv_sqrt * &f)
            }
            PhaseKind::Even { v, a_inv_root, .. } => Complex::with_val(prec.bits(), a_inv_root * 2u32) / *v,
            PhaseKind::Odd { v, abs_inv_root, .. } => num::creal(prec, abs_inv_root) / *v,
        }
    }
}

fn budget(u: &Jet, phase: &PhaseDecomposition, needed: u32) -> Result<u32> {
    let available = u.order().min(phase.gbar_jet.order());
    if needed > available {
        return Err(Error::OrderBudgetExceeded { needed, available });
    }
    Ok(available)
}

/// `u * gbar^l` for `l = 0..=lmax`, truncated to `order`.
fn amplitude_powers(u: &Jet, gbar: &Jet, lmax: u32, order: u32) -> Result<Vec<Jet>> {
    let u = u.truncate(order);
    let gbar = gbar.truncate(order);
    let mut out = vec![u];
    for l in 1..=lmax as usize {
        let next = out[l - 1].mul(&gbar)?;
        out.push(next);
    }
    Ok(out)
}

/// `L_k = sum_{l <= 2k} H^{l+k}(u gbar^l)(0) / ((-1)^k 2^{l+k} l! (l+k)!)`
/// with `H = -sum_{r,s} (g''(0)^{-1})_{rs} d_r d_s`.
#[allow(non_snake_case)]
pub fn Lk_smooth(u: &Jet, phase: &PhaseDecomposition, k: u32) -> Result<Complex> {
    let PhaseKind::Smooth { hessian_inverse, .. } = &phase.kind else {
        return Err(Error::DegenerateHessian(0.0));
    };
    let prec = u.prec();
    if u.nvars() == 0 {
        return Ok(if k == 0 { u.constant_term().clone() } else { num::czero(prec) });
    }
    let order = budget(u, phase, phase.order_needed(k))?;
    let terms = amplitude_powers(u, &phase.gbar_jet, 2 * k, order)?;
    let mut acc = num::czero(prec);
    for l in 0..=2 * k {
        let m = l + k;
        let mut j = terms[l as usize].truncate(2 * m);
        for _ in 0..m {
            j = j.apply_second_order(hessian_inverse)?;
        }
        let denom = (Integer::from(1) << m) * Integer::from(Integer::factorial(l)) * Integer::from(Integer::factorial(m));
        let mut v = Complex::with_val(prec.bits(), j.constant_term() / Complex::with_val(prec.bits(), &denom));
        if k % 2 == 1 {
            v = -v;
        }
        acc += v;
    }
    Ok(acc)
}

/// `L^even_k = sum_{l <= 2k} (-1)^l / l! * Gamma((m+1)/v) * a^{-m/v} * [t^m](u gbar^l)`, `m = 2k + v l`.
#[allow(non_snake_case)]
pub fn Lk_even(u: &Jet, phase: &PhaseDecomposition, k: u32) -> Result<Complex> {
    let PhaseKind::Even { v, a_inv_root, .. } = &phase.kind else {
        return Err(Error::WrongParity("Lk_even needs an even vanishing order".into()));
    };
    let v = *v;
    let prec = u.prec();
    let order = budget(u, phase, phase.order_needed(k))?;
    let terms = amplitude_powers(u, &phase.gbar_jet, 2 * k, order)?;
    let mut acc = num::czero(prec);
    for l in 0..=2 * k {
        let m = 2 * k + v * l;
        let coeff = terms[l as usize].coeff_at(m as usize);
        if coeff.is_zero() {
            continue;
        }
        let gamma = num::gamma_rat(prec, &Rational::from((m + 1, v)));
        let lf = num::factorial(prec, l);
        let pw = num::cpow_int(a_inv_root, &Integer::from(m));
        let mut t = Complex::with_val(prec.bits(), coeff * &pw) * (gamma / lf);
        if l % 2 == 1 {
            t = -t;
        }
        acc += t;
    }
    Ok(acc)
}

/// `L^odd_k = sum_{l <= k} (-1)^l / l! * Gamma((m+1)/v) * (zeta^{m+1} + (-1)^m zeta^{-(m+1)})
/// * (|a|^{-1/v} i sgn(a))^m * [t^m](u gbar^l)`, `m = k + v l`, `zeta = e^{i pi / (2v)}`.
#[allow(non_snake_case)]
pub fn Lk_odd(u: &Jet, phase: &PhaseDecomposition, k: u32) -> Result<Complex> {
    let PhaseKind::Odd { v, zeta, abs_inv_root, sgn, .. } = &phase.kind else {
        return Err(Error::WrongParity("Lk_odd needs an odd vanishing order".into()));
    };
    let v = *v;
    let prec = u.prec();
    let order = budget(u, phase, phase.order_needed(k))?;
    let terms = amplitude_powers(u, &phase.gbar_jet, k, order)?;
    let step = Complex::with_val(prec.bits(), sgn * num::ci(prec)) * abs_inv_root;
    let mut acc = num::czero(prec);
    for l in 0..=k {
        let m = k + v * l;
        let coeff = terms[l as usize].coeff_at(m as usize);
        if coeff.is_zero() {
            continue;
        }
        let zp = num::cpow_int(zeta, &Integer::from(m + 1));
        let zm = num::cpow_int(zeta, &-Integer::from(m + 1));
        let rot = if m % 2 == 0 { zp + zm } else { zp - zm };
        let gamma = num::gamma_rat(prec, &Rational::from((m + 1, v)));
        let lf = num::factorial(prec, l);
        let pw = num::cpow_int(&step, &Integer::from(m));
        let mut t = Complex::with_val(prec.bits(), coeff * &pw) * rot * (gamma / lf);
        if l % 2 == 1 {
            t = -t;
        }
        acc += t;
    }
    Ok(acc)
}

/// `L_k` for whichever kind of phase this is.
#[allow(non_snake_case)]
pub fn Lk(u: &Jet, phase: &PhaseDecomposition, k: u32) -> Result<Complex> {
    match phase.kind {
        PhaseKind::Smooth { .. } => Lk_smooth(u, phase, k),
        PhaseKind::Even { .. } => Lk_even(u, phase, k),
        PhaseKind::Odd { .. } => Lk_odd(u, phase, k),
    }
}

/// The first `count` terms `(exponent of w, coefficient)` of the asymptotic
/// expansion of `I(w)`.
pub fn integral_terms(u: &Jet, phase: &PhaseDecomposition, count: u32) -> Result<Vec<(Rational, Complex)>> {
    let pre = phase.prefactor();
    (0..count)
        .map(|k| Ok((phase.exponent(k), Lk(u, phase, k)? * &pre)))
        .collect()
}
