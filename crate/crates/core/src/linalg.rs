//! Small dense complex linear algebra and polynomial root finding at
//! working precision.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::num::{self, Precision};

pub type CMatrix = Vec<Vec<Complex>>;

pub fn identity(n: usize, prec: Precision) -> CMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { num::cone(prec) } else { num::czero(prec) }).collect())
        .collect()
}

/// Gaussian elimination with partial pivoting; returns `(LU rows, perm, sign)`.
fn lu(a: &CMatrix, prec: Precision) -> Result<(CMatrix, Vec<usize>, i32)> {
    let n = a.len();
    let mut m = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1;
    for k in 0..n {
        let (piv, best) = (k..n)
            .map(|i| (i, num::abs_f64(&m[i][k])))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == 0.0 {
            return Err(Error::SingularMatrix);
        }
        if piv != k {
            m.swap(piv, k);
            perm.swap(piv, k);
            sign = -sign;
        }
        for i in k + 1..n {
            let f = Complex::with_val(prec.bits(), &m[i][k] / &m[k][k]);
            for j in k..n {
                let t = Complex::with_val(prec.bits(), &f * &m[k][j]);
                m[i][j] -= t;
            }
            m[i][k] = f;
        }
    }
    Ok((m, perm, sign))
}

pub fn determinant(a: &CMatrix, prec: Precision) -> Complex {
    match lu(a, prec) {
        Err(_) => num::czero(prec),
        Ok((m, _, sign)) => {
            let mut d = num::cint(prec, sign as i64);
            for (i, row) in m.iter().enumerate() {
                d *= &row[i];
            }
            d
        }
    }
}

/// Solve `a x = b`.
pub fn solve(a: &CMatrix, b: &[Complex], prec: Precision) -> Result<Vec<Complex>> {
    let n = a.len();
    let (m, perm, _) = lu(a, prec)?;
    let mut y: Vec<Complex> = perm.iter().map(|&p| b[p].clone()).collect();
    for i in 0..n {
        for j in 0..i {
            let t = Complex::with_val(prec.bits(), &m[i][j] * &y[j]);
            y[i] -= t;
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            let t = Complex::with_val(prec.bits(), &m[i][j] * &y[j]);
            y[i] -= t;
        }
        y[i] /= &m[i][i];
    }
    Ok(y)
}

pub fn inverse(a: &CMatrix, prec: Precision) -> Result<CMatrix> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<Complex> =
            (0..n).map(|i| if i == j { num::cone(prec) } else { num::czero(prec) }).collect();
        cols.push(solve(a, &e, prec)?);
    }
    Ok((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}

/// Characteristic polynomial coefficients (ascending, monic) by Faddeev-LeVerrier.
pub fn charpoly(a: &CMatrix, prec: Precision) -> Vec<Complex> {
    let n = a.len();
    let mut coeffs = vec![num::czero(prec); n + 1];
    coeffs[n] = num::cone(prec);
    let mut mk = vec![vec![num::czero(prec); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = matmul(a, &mk, prec);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[n - k + 1];
        }
        mk = next;
        let am = matmul(a, &mk, prec);
        let mut tr = num::czero(prec);
        for (i, row) in am.iter().enumerate() {
            tr += &row[i];
        }
        coeffs[n - k] = -(tr / k as u32);
    }
    coeffs
}

pub fn matmul(a: &CMatrix, b: &CMatrix, prec: Precision) -> CMatrix {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = num::czero(prec);
                    for (k, brow) in b.iter().enumerate() {
                        acc += &a[i][k] * &brow[j];
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn eigenvalues(a: &CMatrix, prec: Precision) -> Result<Vec<Complex>> {
    if a.len() == 1 {
        return Ok(vec![a[0][0].clone()]);
    }
    poly_roots(&charpoly(a, prec), prec)
}

fn trimmed(coeffs: &[Complex]) -> &[Complex] {
    let max = coeffs.iter().map(num::abs_f64).fold(0.0, f64::max);
    let mut end = coeffs.len();
    while end > 0 {
        let c = &coeffs[end - 1];
        if c.is_zero() || num::abs_f64(c) <= max * 1e-300 {
            end -= 1;
        } else {
            break;
        }
    }
    &coeffs[..end]
}

/// Roots of `sum c_k z^k` in double precision from companion-matrix eigenvalues.
pub fn companion_roots_f64(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut end = coeffs.len();
    while end > 0 && coeffs[end - 1] == Complex64::new(0.0, 0.0) {
        end -= 1;
    }
    let coeffs = &coeffs[..end];
    if coeffs.len() <= 1 {
        return Ok(vec![]);
    }
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    if n == 1 {
        return Ok(vec![-coeffs[0] / lead]);
    }
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    let schur = m.schur();
    let ev = schur
        .eigenvalues()
        .ok_or_else(|| Error::RootFinding("companion Schur form not triangular".into()))?;
    Ok(ev.iter().copied().collect())
}

fn horner_with_derivative(coeffs: &[Complex], z: &Complex, prec: Precision) -> (Complex, Complex) {
    let mut p = num::czero(prec);
    let mut dp = num::czero(prec);
    for c in coeffs.iter().rev() {
        dp *= z;
        dp += &p;
        p *= z;
        p += c;
    }
    (p, dp)
}

/// All roots of `sum c_k z^k` at working precision: companion-matrix
/// eigenvalues in double precision, then simultaneous Aberth-Ehrlich
/// refinement at full precision. Multiple roots converge only linearly, so
/// exact inputs should be made square-free first.
pub fn poly_roots(coeffs: &[Complex], prec: Precision) -> Result<Vec<Complex>> {
    let coeffs = trimmed(coeffs);
    if coeffs.len() <= 1 {
        return Ok(vec![]);
    }
    let approx: Vec<Complex64> = coeffs.iter().map(num::to_c64).collect();
    let mut seeds = companion_roots_f64(&approx)?;
    // separate coincident double-precision seeds so Aberth can split them
    for i in 0..seeds.len() {
        for j in 0..i {
            if (seeds[i] - seeds[j]).norm() < 1e-12 * (1.0 + seeds[i].norm()) {
                let bump = Complex64::new(1e-7, 3e-7) * (1.0 + seeds[i].norm()) * (i as f64);
                seeds[i] += bump;
            }
        }
    }
    let mut z: Vec<Complex> = seeds.iter().map(|s| num::from_c64(prec, *s)).collect();
    let target = 2f64.powi(-(prec.bits() as i32) + 12);
    for _ in 0..200 {
        let mut worst: f64 = 0.0;
        let snapshot = z.clone();
        for i in 0..z.len() {
            let (p, dp) = horner_with_derivative(coeffs, &snapshot[i], prec);
            if p.is_zero() {
                continue;
            }
            if dp.is_zero() {
                continue;
            }
            let ratio = Complex::with_val(prec.bits(), &p / &dp);
            let mut repulse = num::czero(prec);
            for (j, zj) in snapshot.iter().enumerate() {
                if j != i {
                    let diff = Complex::with_val(prec.bits(), &snapshot[i] - zj);
                    if !diff.is_zero() {
                        repulse += Complex::with_val(prec.bits(), 1) / diff;
                    }
                }
            }
            let denom = num::cone(prec) - Complex::with_val(prec.bits(), &ratio * &repulse);
            let step = if denom.is_zero() { ratio } else { ratio / denom };
            let rel = num::abs_f64(&step) / (1.0 + num::abs_f64(&snapshot[i]));
            worst = worst.max(rel);
            z[i] = Complex::with_val(prec.bits(), &snapshot[i] - &step);
        }
        if worst < target {
            break;
        }
    }
    Ok(z)
}

/// Product of `lambda^{-1/2}` over eigenvalues with each argument taken in
/// [-pi/2, pi/2] (principal square root), giving `det^{-1/2}` on the branch
/// continuous from positive definite matrices.
pub fn det_inv_sqrt(a: &CMatrix, prec: Precision) -> Result<Complex> {
    let ev = eigenvalues(a, prec)?;
    let mut acc = num::cone(prec);
    for l in ev {
        let s = Complex::with_val(prec.bits(), l.sqrt_ref());
        acc /= s;
    }
    Ok(acc)
}

pub fn max_abs(v: &[Complex]) -> f64 {
    v.iter().map(num::abs_f64).fold(0.0, f64::max)
}

pub fn norm_f(v: &[Complex]) -> Float {
    let prec = v.first().map_or(53, |c| c.prec().0);
    let mut acc = Float::new(prec);
    for c in v {
        acc += Float::with_val(prec, c.norm_ref());
    }
    acc.sqrt()
}
