//! JSON rendering of arbitrary-precision values. Everything is printed at a
//! fixed number of digits so identical inputs give identical bytes.

use rug::{Complex, Float, Rational};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::num::{self, Precision};

pub fn float(x: &Float, prec: Precision) -> Value {
    Value::String(num::fmt_float(x, prec.decimal_digits()))
}

pub fn complex(z: &Complex, prec: Precision) -> Value {
    json!({
        "re": num::fmt_float(z.real(), prec.decimal_digits()),
        "im": num::fmt_float(z.imag(), prec.decimal_digits()),
    })
}

pub fn complex_vec(v: &[Complex], prec: Precision) -> Value {
    Value::Array(v.iter().map(|z| complex(z, prec)).collect())
}

pub fn matrix(m: &[Vec<Complex>], prec: Precision) -> Value {
    Value::Array(m.iter().map(|r| complex_vec(r, prec)).collect())
}

pub fn rational(r: &Rational) -> Value {
    Value::String(r.to_string())
}

fn parse_float(v: &Value, prec: Precision) -> Result<Float> {
    match v {
        Value::String(s) => Float::parse(s)
            .map(|p| Float::with_val(prec.bits(), p))
            .map_err(|_| Error::Parse(format!("not a number: {s:?}"))),
        Value::Number(n) => n
            .as_f64()
            .map(|f| Float::with_val(prec.bits(), f))
            .ok_or_else(|| Error::Parse(format!("not a number: {n}"))),
        other => Err(Error::Parse(format!("not a number: {other}"))),
    }
}

/// Accepts `{"re","im"}`, a `[re, im]` pair, or a bare real.
pub fn parse_complex(v: &Value, prec: Precision) -> Result<Complex> {
    match v {
        Value::Object(o) => {
            let re = o.get("re").map(|x| parse_float(x, prec)).transpose()?;
            let im = o.get("im").map(|x| parse_float(x, prec)).transpose()?;
            let re = re.unwrap_or_else(|| Float::new(prec.bits()));
            let im = im.unwrap_or_else(|| Float::new(prec.bits()));
            Ok(Complex::with_val(prec.bits(), (re, im)))
        }
        Value::Array(a) if a.len() == 2 => Ok(Complex::with_val(
            prec.bits(),
            (parse_float(&a[0], prec)?, parse_float(&a[1], prec)?),
        )),
        other => Ok(num::creal(prec, &parse_float(other, prec)?)),
    }
}

pub fn parse_complex_vec(v: &Value, prec: Precision) -> Result<Vec<Complex>> {
    v.as_array()
        .ok_or_else(|| Error::Parse("expected a list of complex numbers".into()))?
        .iter()
        .map(|x| parse_complex(x, prec))
        .collect()
}
