//! Critical points of the singular variety of `H`: the critical system,
//! its numerical solution, smoothness and minimality.

mod minimality;
mod solve;

pub use minimality::{check_minimality, Minimality, MinimalityOptions, Verdict};
pub use solve::{newton_polish, solve_critical, CriticalSolution, SolveOptions, SolveOutcome};

use rug::{Complex, Integer, Rational};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::json;
use crate::num::{self, Precision};
use crate::series::{GaussRat, SparsePoly};

/// Direction of the coefficient ray `n * alpha`. Kept both as given and in
/// primitive integer form; `alpha = scale * primitive`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Direction {
    alpha: Vec<Rational>,
    primitive: Vec<Integer>,
    scale: Rational,
}

impl Direction {
    pub fn new(alpha: Vec<Rational>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidDirection("empty direction".into()));
        }
        if alpha.iter().any(|a| *a <= 0) {
            return Err(Error::InvalidDirection("components must be positive".into()));
        }
        let mut lcm = Integer::from(1);
        for a in &alpha {
            lcm.lcm_mut(a.denom());
        }
        let ints: Vec<Integer> = alpha.iter().map(|a| Integer::from(a.numer() * (&lcm / Integer::from(a.denom())))).collect();
        let mut g = Integer::new();
        for v in &ints {
            g.gcd_mut(v);
        }
        let primitive: Vec<Integer> = ints.iter().map(|v| Integer::from(v / &g)).collect();
        let scale = Rational::from((g, lcm));
        Ok(Direction { alpha, primitive, scale })
    }

    pub fn from_ints(alpha: &[i64]) -> Result<Self> {
        Direction::new(alpha.iter().map(|&a| Rational::from(a)).collect())
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// Components as given.
    pub fn alpha(&self) -> &[Rational] {
        &self.alpha
    }

    pub fn primitive(&self) -> &[Integer] {
        &self.primitive
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    /// `alpha_m / alpha_d`, independent of scaling.
    pub fn ratio(&self, m: usize) -> Rational {
        Rational::from(&self.alpha[m] / self.alpha.last().unwrap())
    }

    pub fn last(&self) -> &Rational {
        self.alpha.last().unwrap()
    }

    pub fn is_constant(&self) -> bool {
        self.primitive.iter().all(|v| *v == self.primitive[0])
    }

    /// The multi-index `n * alpha`, if integral.
    pub fn index(&self, n: u64) -> Result<Vec<u64>> {
        self.alpha
            .iter()
            .map(|a| {
                let v = Rational::from(n) * a;
                if *v.denom() != 1 {
                    return Err(Error::NonIntegralIndex(n));
                }
                v.numer().to_u64().ok_or(Error::NonIntegralIndex(n))
            })
            .collect()
    }

    /// New coordinate `k` is old coordinate `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Direction {
        Direction {
            alpha: perm.iter().map(|&i| self.alpha[i].clone()).collect(),
            primitive: perm.iter().map(|&i| self.primitive[i].clone()).collect(),
            scale: self.scale.clone(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "alpha": self.alpha.iter().map(json::rational).collect::<Vec<_>>(),
            "primitive": self.primitive.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "scale": json::rational(&self.scale),
        })
    }
}

/// `H` followed by `alpha_d x_m dH/dx_m - alpha_m x_d dH/dx_d` for `m < d`,
/// using the primitive direction so all coefficients stay integral.
pub fn build_critical_system(h: &SparsePoly, alpha: &Direction) -> Result<Vec<SparsePoly>> {
    let d = h.nvars();
    if alpha.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: alpha.dim() });
    }
    let mut sys = vec![h.clone()];
    let ad = GaussRat::real(Rational::from(&alpha.primitive()[d - 1]));
    let last = h.partial(d - 1).times_var(d - 1);
    for m in 0..d - 1 {
        let am = GaussRat::real(Rational::from(&alpha.primitive()[m]));
        let lhs = h.partial(m).times_var(m).scale(&ad);
        sys.push(lhs.sub(&last.scale(&am)));
    }
    Ok(sys)
}

/// Smoothness data at a variety point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Smoothness {
    pub smooth: bool,
    /// Coordinate with `c_j dH/dx_j(c) != 0`, moved last by `permutation`.
    pub coordinate: Option<usize>,
    /// New coordinate `k` is old coordinate `permutation[k]`.
    pub permutation: Vec<usize>,
}

pub(crate) fn on_variety(h: &SparsePoly, c: &[Complex], prec: Precision) -> Result<f64> {
    if c.len() != h.nvars() {
        return Err(Error::DimensionMismatch { expected: h.nvars(), got: c.len() });
    }
    let (v, scale) = h.eval_with_scale(c, prec);
    let r = num::abs_f64(&v);
    if r > 1e-10 * scale.max(1.0) {
        return Err(Error::NotOnVariety(r));
    }
    Ok(r)
}

pub fn check_smooth(h: &SparsePoly, c: &[Complex], prec: Precision) -> Result<Smoothness> {
    on_variety(h, c, prec)?;
    let d = h.nvars();
    let mut best: Option<(usize, f64)> = None;
    let mut any_partial = false;
    for j in 0..d {
        let (v, scale) = h.partial(j).eval_with_scale(c, prec);
        let dj = num::abs_f64(&v);
        if dj <= 1e-10 * scale.max(1.0) {
            continue;
        }
        any_partial = true;
        let weighted = dj * num::abs_f64(&c[j]);
        if weighted <= 1e-10 * scale.max(1.0) * num::abs_f64(&c[j]).max(1.0) {
            continue;
        }
        // keep the given order when the last coordinate already works
        if j == d - 1 {
            best = Some((j, f64::INFINITY));
        } else if best.is_none_or(|(_, b)| weighted > b) {
            best = Some((j, weighted));
        }
    }
    let coordinate = best.map(|(j, _)| j);
    let mut permutation: Vec<usize> = (0..d).collect();
    if let Some(j) = coordinate {
        permutation.retain(|&k| k != j);
        permutation.push(j);
    }
    Ok(Smoothness { smooth: any_partial, coordinate, permutation })
}

/// Whether the exponents of the support of `p` span all of `Z^d`.
pub fn aperiodic(p: &SparsePoly) -> Result<bool> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let d = p.nvars();
    let mut rows: Vec<Vec<Integer>> = p
        .terms()
        .map(|(e, _)| e.iter().map(|&k| Integer::from(k)).collect())
        .collect();
    let mut rank = 0;
    let mut det = Integer::from(1);
    for col in 0..d {
        if rank == rows.len() {
            break;
        }
        loop {
            // smallest nonzero entry in this column among the unreduced rows
            let piv = (rank..rows.len())
                .filter(|&i| rows[i][col] != 0)
                .min_by(|&a, &b| rows[a][col].clone().abs().cmp(&rows[b][col].clone().abs()));
            let Some(piv) = piv else { break };
            rows.swap(rank, piv);
            let mut done = true;
            for i in rank + 1..rows.len() {
                if rows[i][col] == 0 {
                    continue;
                }
                let q = Integer::from(&rows[i][col] / &rows[rank][col]);
                for k in col..d {
                    let t = Integer::from(&q * &rows[rank][k]);
                    rows[i][k] -= t;
                }
                if rows[i][col] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rows.get(rank).is_some_and(|r| r[col] != 0) {
            det *= &rows[rank][col];
            rank += 1;
        }
    }
    Ok(rank == d && det.abs() == 1)
}

/// Everything known about one critical point.
#[derive(Clone, Debug)]
pub struct CriticalPointReport {
    pub point: Vec<Complex>,
    pub smooth: Smoothness,
    pub minimality: Minimality,
    pub residual_h: f64,
    pub residual_system: f64,
    /// False when the Jacobian of the critical system is singular at the point.
    pub isolated: bool,
    pub prec: Precision,
}

impl CriticalPointReport {
    pub fn has_zero_coordinate(&self) -> bool {
        self.point.iter().any(|z| z.is_zero() || num::abs_f64(z) < 1e-30)
    }

    /// Usable for an expansion: smooth, off the coordinate hyperplanes, residuals small.
    pub fn valid(&self) -> bool {
        self.smooth.smooth
            && self.smooth.coordinate.is_some()
            && !self.has_zero_coordinate()
            && self.residual_h < 1e-10
            && self.residual_system < 1e-10
    }

    pub fn is_positive_real(&self) -> bool {
        self.point.iter().all(|z| {
            let re = z.real().to_f64();
            re > 0.0 && z.imag().to_f64().abs() <= 1e-30 * re.max(1.0)
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "point": json::complex_vec(&self.point, self.prec),
            "smooth": self.smooth.smooth,
            "distinguished_coordinate": self.smooth.coordinate,
            "permutation": self.smooth.permutation,
            "isolation": if self.isolated { "isolated" } else { "isolated-unverified" },
            "minimality": self.minimality.to_json(self.prec),
            "residual": {"H": self.residual_h, "system": self.residual_system},
            "valid": self.valid(),
        })
    }
}
