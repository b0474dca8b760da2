//! Exact sparse polynomials and complex jet arithmetic.

mod coeff;
mod jet;
mod poly;
pub mod upoly;

pub use coeff::GaussRat;
pub use jet::{Jet, JetShape};
pub use poly::SparsePoly;

use rug::{Complex, Integer};

use crate::error::{Error, Result};
use crate::num::Precision;

/// Taylor coefficients of `p` at `center`, truncated to total degree `order`.
///
/// Uses the binomial expansion of each monomial around the center, so the
/// only rounding is in the powers of the center coordinates.
pub fn jet_from_poly(p: &SparsePoly, center: &[Complex], order: u32, prec: Precision) -> Result<Jet> {
    if center.len() != p.nvars() {
        return Err(Error::DimensionMismatch { expected: p.nvars(), got: center.len() });
    }
    let n = p.nvars();
    let mut jet = Jet::zero(center, order, prec);
    let max_deg: Vec<u32> = (0..n).map(|i| p.degree_in(i)).collect();
    let powers: Vec<Vec<Complex>> = (0..n)
        .map(|i| {
            let mut v = vec![crate::num::cone(prec)];
            for k in 1..=max_deg[i] as usize {
                let next = Complex::with_val(prec.bits(), &v[k - 1] * &center[i]);
                v.push(next);
            }
            v
        })
        .collect();
    for k in 0..jet.shape().len() {
        let beta = jet.shape().multi_index(k).to_vec();
        let mut acc = crate::num::czero(prec);
        for (gamma, coef) in p.terms() {
            if gamma.iter().zip(&beta).any(|(g, b)| g < b) {
                continue;
            }
            let mut weight = Integer::from(1);
            for (g, b) in gamma.iter().zip(&beta) {
                weight *= crate::num::binomial(*g, *b);
            }
            let mut term = coef.to_complex(prec) * Complex::with_val(prec.bits(), &weight);
            for i in 0..n {
                let e = (gamma[i] - beta[i]) as usize;
                if e > 0 {
                    term *= &powers[i][e];
                }
            }
            acc += term;
        }
        jet.set_coeff_at(k, acc);
    }
    Ok(jet)
}

pub fn jet_multiply(a: &Jet, b: &Jet) -> Result<Jet> {
    a.mul(b)
}

pub fn jet_reciprocal(a: &Jet) -> Result<Jet> {
    a.reciprocal()
}

pub fn jet_log(a: &Jet) -> Result<Jet> {
    a.log()
}

pub fn jet_circle_substitute(a: &Jet, order: u32) -> Result<Jet> {
    a.circle_substitute(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num;

    #[test]
    fn linear_shift_is_exact() {
        let prec = Precision::default();
        let p = SparsePoly::from_int_terms(2, &[(&[0, 0], 1), (&[1, 0], -1), (&[0, 1], -1)]);
        let half = Complex::with_val(prec.bits(), 0.5);
        let j = jet_from_poly(&p, &[half.clone(), half], 2, prec).unwrap();
        assert!(num::abs_f64(j.coeff(&[0, 0]).unwrap()) < 1e-60);
        assert!(num::abs_f64(&Complex::with_val(prec.bits(), j.coeff(&[1, 0]).unwrap() + 1)) < 1e-60);
        assert!(num::abs_f64(&Complex::with_val(prec.bits(), j.coeff(&[0, 1]).unwrap() + 1)) < 1e-60);
        assert!(num::abs_f64(j.coeff(&[1, 1]).unwrap()) < 1e-60);
    }

    #[test]
    fn square_shift() {
        let prec = Precision::default();
        let p = SparsePoly::from_int_terms(1, &[(&[2], 1)]);
        let j = jet_from_poly(&p, &[num::cone(prec)], 2, prec).unwrap();
        for (k, want) in [1.0, 2.0, 1.0].iter().enumerate() {
            assert!((j.coeff_at(k).real().to_f64() - want).abs() < 1e-60);
        }
    }

    #[test]
    fn delannoy_point_is_on_variety() {
        let prec = Precision::default();
        let h = SparsePoly::from_int_terms(2, &[(&[0, 0], 1), (&[1, 0], -1), (&[0, 1], -1), (&[1, 1], -1)]);
        let s13 = rug::Float::with_val(prec.bits(), 13).sqrt();
        let c1 = (s13.clone() - 2) / 3;
        let c2 = (s13 - 3) / 2;
        let center = [num::creal(prec, &c1), num::creal(prec, &c2)];
        let j = jet_from_poly(&h, &center, 2, prec).unwrap();
        assert!(num::abs_f64(j.constant_term()) < 1e-60);
    }

    #[test]
    fn dimension_mismatch() {
        let prec = Precision::default();
        let p = SparsePoly::one(2);
        assert!(jet_from_poly(&p, &[num::cone(prec)], 2, prec).is_err());
    }
}
