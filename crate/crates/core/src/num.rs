//! Working-precision complex numbers and the helpers every other module
//! leans on. All floating values are `rug` MPFR/MPC numbers carrying their
//! own precision; `Precision` is the single knob.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Significand precision in bits for complex arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Precision(u32);

impl Precision {
    pub const DEFAULT_BITS: u32 = 212;

    pub fn new(bits: u32) -> Result<Self> {
        if bits < 53 {
            return Err(Error::PrecisionTooLow(bits));
        }
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Relative tolerance used for "is this numerically zero" decisions:
    /// roughly the square root of the unit roundoff.
    pub fn zero_tol(self) -> f64 {
        2f64.powi(-(self.0 as i32) / 2)
    }

    /// Unit roundoff 2^-bits as an f64 (underflows gracefully for huge precisions).
    pub fn eps(self) -> f64 {
        2f64.powi(-(self.0.min(1000) as i32))
    }

    /// Number of decimal digits that are meaningful at this precision.
    pub fn decimal_digits(self) -> usize {
        ((self.0 as f64) * std::f64::consts::LOG10_2).floor() as usize
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(Self::DEFAULT_BITS)
    }
}

pub fn czero(prec: Precision) -> Complex {
    Complex::new(prec.bits())
}

pub fn cone(prec: Precision) -> Complex {
    Complex::with_val(prec.bits(), 1)
}

pub fn ci(prec: Precision) -> Complex {
    Complex::with_val(prec.bits(), (0, 1))
}

pub fn creal(prec: Precision, x: &Float) -> Complex {
    Complex::with_val(prec.bits(), (x, 0))
}

pub fn cint(prec: Precision, x: i64) -> Complex {
    Complex::with_val(prec.bits(), x)
}

pub fn crat(prec: Precision, re: &Rational, im: &Rational) -> Complex {
    Complex::with_val(prec.bits(), (re, im))
}

pub fn pi(prec: Precision) -> Float {
    Float::with_val(prec.bits(), Constant::Pi)
}

pub fn fabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

pub fn abs_f64(z: &Complex) -> f64 {
    fabs(z).to_f64()
}

pub fn factorial(prec: Precision, n: u32) -> Float {
    Float::with_val(prec.bits(), Integer::from(Integer::factorial(n)))
}

pub fn binomial(n: u32, k: u32) -> Integer {
    Integer::from(n).binomial(k)
}

/// Γ(x) for real rational x > 0.
pub fn gamma_rat(prec: Precision, x: &Rational) -> Float {
    Float::with_val(prec.bits(), x).gamma()
}

/// x^e for real x > 0 and rational e.
pub fn pow_rat(prec: Precision, x: &Float, e: &Rational) -> Float {
    let lx = Float::with_val(prec.bits(), x.ln_ref());
    let ef = Float::with_val(prec.bits(), e);
    (lx * ef).exp()
}

/// Integer power by repeated squaring; negative exponents invert.
pub fn cpow_int(z: &Complex, e: &Integer) -> Complex {
    let prec = z.prec().0;
    let mut base = z.clone();
    if *e < 0 {
        base = Complex::with_val(prec, 1) / base;
    }
    let mut n = Integer::from(e.abs_ref());
    let mut acc = Complex::with_val(prec, 1);
    while n > 0 {
        if n.is_odd() {
            acc *= &base;
        }
        n >>= 1;
        if n > 0 {
            let sq = Complex::with_val(prec, base.square_ref());
            base = sq;
        }
    }
    acc
}

/// z^{-1/v} = |z|^{-1/v} e^{-i arg z / v}, with the principal argument.
/// Callers that need arg z in [-pi/2, pi/2] check it themselves.
pub fn cpow_neg_inv(z: &Complex, v: u32) -> Complex {
    let prec = z.prec().0;
    let modulus = Float::with_val(prec, z.abs_ref());
    let arg = Float::with_val(prec, z.arg_ref());
    let vf = Float::with_val(prec, v);
    let m = (-(modulus.ln() / &vf)).exp();
    let theta = -(arg / vf);
    let (s, c) = theta.sin_cos(Float::new(prec));
    Complex::with_val(prec, (&m * c, m * s))
}

/// Principal-branch argument in (-pi, pi].
pub fn arg(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.arg_ref())
}

/// Decimal rendering of a float with a fixed number of significant digits.
/// Output depends only on the value, so repeated runs print identically.
pub fn fmt_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits.max(2)))
}

pub fn fmt_f64_sig(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), x)
}

pub fn to_c64(z: &Complex) -> num_complex::Complex64 {
    num_complex::Complex64::new(z.real().to_f64(), z.imag().to_f64())
}

pub fn from_c64(prec: Precision, z: num_complex::Complex64) -> Complex {
    Complex::with_val(prec.bits(), (z.re, z.im))
}

/// Parse "p/q", "p", or a decimal such as "0.25" into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Ok(r) = s.parse::<Rational>() {
        return Ok(r);
    }
    // decimal with optional exponent
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (
            &s[..i],
            s[i + 1..]
                .parse::<i32>()
                .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?,
        ),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    let num: Integer = digits
        .parse()
        .map_err(|_| Error::Parse(format!("not a rational: {s:?}")))?;
    let scale = exp - frac_part.len() as i32;
    let ten = Rational::from(10);
    let factor = ten.pow(scale);
    Ok(Rational::from(num) * factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_floor() {
        assert!(Precision::new(52).is_err());
        assert_eq!(Precision::new(53).unwrap().bits(), 53);
        assert_eq!(Precision::default().bits(), 212);
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("-3/4").unwrap(), Rational::from((-3, 4)));
        assert_eq!(parse_rational("0.25").unwrap(), Rational::from((1, 4)));
        assert_eq!(parse_rational("7").unwrap(), Rational::from(7));
        assert_eq!(parse_rational("1.5e2").unwrap(), Rational::from(150));
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn integer_powers() {
        let p = Precision::default();
        let z = Complex::with_val(p.bits(), (0, 1));
        let r = cpow_int(&z, &Integer::from(4));
        assert!((r.real().to_f64() - 1.0).abs() < 1e-60);
        let r = cpow_int(&Complex::with_val(p.bits(), 2), &Integer::from(-3));
        assert!((r.real().to_f64() - 0.125).abs() < 1e-60);
    }

    #[test]
    fn inverse_root_branch() {
        let p = Precision::default();
        // (-8i)^{-1/3}: arg = -pi/2, result has arg pi/6
        let z = Complex::with_val(p.bits(), (0, -8));
        let r = cpow_neg_inv(&z, 3);
        let expect = num_complex::Complex64::from_polar(0.5, std::f64::consts::PI / 6.0);
        assert!((to_c64(&r) - expect).norm() < 1e-14);
    }

    #[test]
    fn gamma_values() {
        let p = Precision::default();
        let g = gamma_rat(p, &Rational::from((1, 2)));
        let rp = pi(p).sqrt();
        assert!(((g - rp).abs().to_f64()) < 1e-60);
    }
}
