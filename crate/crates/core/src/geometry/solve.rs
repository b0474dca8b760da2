use rug::Complex;

use super::{build_critical_system, Direction};
use crate::error::Result;
use crate::exec::Exec;
use crate::linalg;
use crate::num::{self, Precision};
use crate::series::upoly::UPoly;
use crate::series::{GaussRat, SparsePoly};

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub prec: Precision,
    pub exec: Exec,
    /// Absolute residual bound for accepted solutions.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { prec: Precision::default(), exec: Exec::default(), tol: 1e-10, max_iter: 200 }
    }
}

#[derive(Clone, Debug)]
pub struct CriticalSolution {
    pub point: Vec<Complex>,
    pub residual_h: f64,
    pub residual_system: f64,
    pub isolated: bool,
}

#[derive(Clone, Debug, Default)]
pub struct SolveOutcome {
    pub points: Vec<CriticalSolution>,
    pub diagnostics: Vec<String>,
}

struct System {
    polys: Vec<SparsePoly>,
    jac: Vec<Vec<SparsePoly>>,
}

impl System {
    fn new(polys: Vec<SparsePoly>) -> System {
        let d = polys[0].nvars();
        let jac = polys.iter().map(|p| (0..d).map(|j| p.partial(j)).collect()).collect();
        System { polys, jac }
    }

    fn eval(&self, x: &[Complex], prec: Precision) -> Vec<Complex> {
        self.polys.iter().map(|p| p.eval(x, prec)).collect()
    }

    fn jacobian(&self, x: &[Complex], prec: Precision) -> Vec<Vec<Complex>> {
        self.jac.iter().map(|row| row.iter().map(|p| p.eval(x, prec)).collect()).collect()
    }

    /// Jacobian determinant relative to the Hadamard bound.
    fn conditioning(&self, x: &[Complex], prec: Precision) -> f64 {
        let j = self.jacobian(x, prec);
        let det = num::abs_f64(&linalg::determinant(&j, prec));
        let bound: f64 = j
            .iter()
            .map(|r| r.iter().map(|z| num::abs_f64(z).powi(2)).sum::<f64>().sqrt())
            .product();
        if bound == 0.0 {
            0.0
        } else {
            det / bound
        }
    }
}

/// Damped Newton iteration on a square polynomial system. Each step is
/// halved until the residual decreases; stops when no halving helps or the
/// step is at the precision floor.
pub fn newton_polish(polys: &[SparsePoly], x0: &[Complex], prec: Precision, max_iter: usize) -> Vec<Complex> {
    newton(&System::new(polys.to_vec()), x0, prec, max_iter)
}

fn newton(sys: &System, x0: &[Complex], prec: Precision, max_iter: usize) -> Vec<Complex> {
    let floor = 2f64.powi(-(prec.bits() as i32) + 16);
    let mut x = x0.to_vec();
    let mut f = sys.eval(&x, prec);
    let mut r = linalg::max_abs(&f);
    for _ in 0..max_iter {
        if r == 0.0 {
            break;
        }
        let j = sys.jacobian(&x, prec);
        let Ok(step) = linalg::solve(&j, &f, prec) else { break };
        let mut lambda = num::cone(prec);
        let mut accepted = None;
        for _ in 0..40 {
            let xn: Vec<Complex> = x
                .iter()
                .zip(&step)
                .map(|(a, s)| Complex::with_val(prec.bits(), a - Complex::with_val(prec.bits(), s * &lambda)))
                .collect();
            let fnew = sys.eval(&xn, prec);
            let rn = linalg::max_abs(&fnew);
            if rn < r {
                accepted = Some((xn, fnew, rn));
                break;
            }
            lambda /= 2;
        }
        let Some((xn, fnew, rn)) = accepted else { break };
        let size = linalg::max_abs(&step) * num::abs_f64(&lambda);
        let xmag = 1.0 + linalg::max_abs(&xn);
        x = xn;
        f = fnew;
        r = rn;
        if size <= floor * xmag {
            break;
        }
    }
    x
}

fn same_point(a: &[Complex], b: &[Complex]) -> bool {
    a.iter().zip(b).all(|(x, y)| {
        let diff = num::abs_f64(&Complex::with_val(x.prec().0, x - y));
        diff <= 1e-15 * (1.0 + num::abs_f64(x))
    })
}

fn push_unique(out: &mut Vec<Vec<Complex>>, p: Vec<Complex>) {
    if !out.iter().any(|q| same_point(q, &p)) {
        out.push(p);
    }
}

/// Coefficients of `p(x, y)` as a polynomial in `y` with coefficients in `Q(i)[x]`.
fn coeffs_in_y(p: &SparsePoly) -> Vec<UPoly> {
    let dy = p.degree_in(1) as usize;
    let dx = p.degree_in(0) as usize;
    let mut grid = vec![vec![GaussRat::zero(); dx + 1]; dy + 1];
    for (e, c) in p.terms() {
        grid[e[1] as usize][e[0] as usize] = c.clone();
    }
    grid.into_iter().map(UPoly::new).collect()
}

/// Resultant in `y` by fraction-free (Bareiss) elimination of the Sylvester matrix.
fn resultant_y(a: &SparsePoly, b: &SparsePoly) -> UPoly {
    let ca = coeffs_in_y(a);
    let cb = coeffs_in_y(b);
    let m = ca.len() - 1;
    let n = cb.len() - 1;
    let size = m + n;
    if size == 0 {
        return UPoly::constant(GaussRat::one());
    }
    let mut mat = vec![vec![UPoly::zero(); size]; size];
    for r in 0..n {
        for (k, c) in ca.iter().rev().enumerate() {
            mat[r][r + k] = c.clone();
        }
    }
    for r in 0..m {
        for (k, c) in cb.iter().rev().enumerate() {
            mat[n + r][r + k] = c.clone();
        }
    }
    let mut prev = UPoly::constant(GaussRat::one());
    let mut negate = false;
    for k in 0..size - 1 {
        if mat[k][k].is_zero() {
            match (k + 1..size).find(|&i| !mat[i][k].is_zero()) {
                Some(i) => {
                    mat.swap(i, k);
                    negate = !negate;
                }
                None => return UPoly::zero(),
            }
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let num = mat[i][j].mul(&mat[k][k]).sub(&mat[i][k].mul(&mat[k][j]));
                mat[i][j] = num.exact_div(&prev).expect("Bareiss division is exact");
            }
            mat[i][k] = UPoly::zero();
        }
        prev = mat[k][k].clone();
    }
    let det = mat[size - 1][size - 1].clone();
    if negate {
        det.neg()
    } else {
        det
    }
}

fn eval_coeffs(coeffs: &[UPoly], x: &Complex, prec: Precision) -> Vec<Complex> {
    coeffs
        .iter()
        .map(|u| {
            let mut acc = num::czero(prec);
            for c in u.to_complex(prec).iter().rev() {
                acc *= x;
                acc += c;
            }
            acc
        })
        .collect()
}

fn univariate_roots(p: &UPoly, prec: Precision) -> Result<Vec<Complex>> {
    linalg::poly_roots(&p.squarefree().to_complex(prec), prec)
}

fn to_upoly(h: &SparsePoly) -> UPoly {
    let deg = h.degree_in(0) as usize;
    let mut c = vec![GaussRat::zero(); deg + 1];
    for (e, v) in h.terms() {
        c[e[0] as usize] = v.clone();
    }
    UPoly::new(c)
}

/// `H(t, ..., t)` as a univariate polynomial.
fn diagonal(h: &SparsePoly) -> UPoly {
    let deg = h.total_degree() as usize;
    let mut c = vec![GaussRat::zero(); deg + 1];
    for (e, v) in h.terms() {
        let k: u32 = e.iter().sum();
        c[k as usize] += v;
    }
    UPoly::new(c)
}

fn solve_bivariate(sys: &[SparsePoly], prec: Precision, diag: &mut Vec<String>) -> Result<Vec<Vec<Complex>>> {
    let (p1, p2) = (&sys[0], &sys[1]);
    let res = resultant_y(p1, p2);
    if res.is_zero() {
        diag.push("resultant vanishes identically: critical set is not isolated".into());
        return Ok(vec![]);
    }
    let xs = univariate_roots(&res, prec)?;
    // back-substitute through whichever equation actually involves y
    let (eq, check) = if p1.degree_in(1) > 0 && (p2.degree_in(1) == 0 || p1.degree_in(1) <= p2.degree_in(1)) {
        (p1, p2)
    } else {
        (p2, p1)
    };
    if eq.degree_in(1) == 0 {
        diag.push("no equation involves the second variable".into());
        return Ok(vec![]);
    }
    let ecoeffs = coeffs_in_y(eq);
    let mut out = Vec::new();
    for x0 in xs {
        let ys = linalg::poly_roots(&eval_coeffs(&ecoeffs, &x0, prec), prec)?;
        for y0 in ys {
            let pt = vec![x0.clone(), y0];
            let (v, scale) = check.eval_with_scale(&pt, prec);
            if num::abs_f64(&v) <= 1e-20 * scale.max(1.0) {
                push_unique(&mut out, pt);
            }
        }
    }
    Ok(out)
}

fn default_seeds(h: &SparsePoly, prec: Precision) -> Result<Vec<Vec<Complex>>> {
    let d = h.nvars();
    let mut seeds = Vec::new();
    let dg = diagonal(h);
    if dg.degree().unwrap_or(0) > 0 {
        for t in univariate_roots(&dg, prec)? {
            seeds.push(vec![t; d]);
        }
    }
    let levels = [0.2, 0.5, 0.8];
    let total = levels.len().pow(d as u32);
    for mut k in 0..total {
        let mut s = Vec::with_capacity(d);
        for _ in 0..d {
            s.push(Complex::with_val(prec.bits(), levels[k % levels.len()]));
            k /= levels.len();
        }
        seeds.push(s);
    }
    Ok(seeds)
}

/// All isolated critical points for `d <= 2`; critical points reachable by
/// Newton iteration from the seeds (or default seeds) for `d >= 3`. User
/// seeds are always polished and merged in. Every returned point meets the
/// residual bound.
pub fn solve_critical(
    h: &SparsePoly,
    alpha: &Direction,
    seeds: Option<&[Vec<Complex>]>,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    let prec = opts.prec;
    let d = h.nvars();
    let polys = build_critical_system(h, alpha)?;
    let sys = System::new(polys.clone());
    let mut diagnostics = Vec::new();
    let mut candidates: Vec<Vec<Complex>> = Vec::new();

    match d {
        1 => {
            for r in univariate_roots(&to_upoly(h), prec)? {
                candidates.push(vec![r]);
            }
        }
        2 => candidates = solve_bivariate(&polys, prec, &mut diagnostics)?,
        _ => {
            if h.is_symmetric() && alpha.is_constant() {
                for t in univariate_roots(&diagonal(h), prec)? {
                    candidates.push(vec![t; d]);
                }
            }
        }
    }

    let mut starts: Vec<Vec<Complex>> = candidates;
    let seeded = starts.len();
    match seeds {
        Some(s) => starts.extend(s.iter().cloned()),
        None if d >= 3 => starts.extend(default_seeds(h, prec)?),
        None => {}
    }
    let polished = opts.exec.map(&starts, |x0| newton(&sys, x0, prec, opts.max_iter));

    let mut points: Vec<Vec<Complex>> = Vec::new();
    let mut failed = 0;
    for (i, p) in polished.into_iter().enumerate() {
        let r = linalg::max_abs(&sys.eval(&p, prec));
        if r.is_finite() && r < opts.tol {
            push_unique(&mut points, p);
        } else if i >= seeded {
            failed += 1;
        }
    }
    if failed > 0 {
        diagnostics.push(format!("{failed} seed(s) did not converge"));
    }
    if points.is_empty() {
        diagnostics.push("no critical point found".into());
    }
    let points = points
        .into_iter()
        .map(|p| {
            let f = sys.eval(&p, prec);
            let isolated = sys.conditioning(&p, prec) > 1e-12;
            CriticalSolution {
                residual_h: num::abs_f64(&f[0]),
                residual_system: linalg::max_abs(&f),
                point: p,
                isolated,
            }
        })
        .collect();
    Ok(SolveOutcome { points, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn sorted(out: &SolveOutcome) -> Vec<Vec<Complex64>> {
        let mut v: Vec<Vec<Complex64>> =
            out.points.iter().map(|s| s.point.iter().map(num::to_c64).collect()).collect();
        v.sort_by(|a, b| a[0].re.partial_cmp(&b[0].re).unwrap());
        v
    }

    #[test]
    fn delannoy_points() {
        let h = SparsePoly::from_int_terms(2, &[(&[0, 0], 1), (&[1, 0], -1), (&[0, 1], -1), (&[1, 1], -1)]);
        let out = solve_critical(&h, &Direction::from_ints(&[3, 2]).unwrap(), None, &SolveOptions::default()).unwrap();
        let v = sorted(&out);
        assert_eq!(v.len(), 2);
        let s13 = 13f64.sqrt();
        assert!((v[0][0].re - (-2.0 / 3.0 - s13 / 3.0)).abs() < 1e-14);
        assert!((v[0][1].re - (-1.5 - s13 / 2.0)).abs() < 1e-14);
        assert!((v[1][0].re - (-2.0 / 3.0 + s13 / 3.0)).abs() < 1e-14);
        assert!((v[1][1].re - (-1.5 + s13 / 2.0)).abs() < 1e-14);
        for s in &out.points {
            assert!(s.residual_system < 1e-50 && s.isolated);
        }
    }

    #[test]
    fn linear_cases() {
        let h = SparsePoly::from_int_terms(2, &[(&[0, 0], 1), (&[1, 0], -1), (&[0, 1], -1)]);
        let out = solve_critical(&h, &Direction::from_ints(&[1, 1]).unwrap(), None, &SolveOptions::default()).unwrap();
        let v = sorted(&out);
        assert_eq!(v.len(), 1);
        assert!((v[0][0] - Complex64::new(0.5, 0.0)).norm() < 1e-15);

        let h3 = SparsePoly::from_int_terms(
            3,
            &[(&[0, 0, 0], 1), (&[1, 0, 0], -1), (&[0, 1, 0], -1), (&[0, 0, 1], -1)],
        );
        let out =
            solve_critical(&h3, &Direction::from_ints(&[1, 1, 1]).unwrap(), None, &SolveOptions::default()).unwrap();
        let v = sorted(&out);
        assert_eq!(v.len(), 1);
        for z in &v[0] {
            assert!((z - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn asymmetric_three_variable_newton() {
        // 1 - x - 2y - z along (1, 1, 1): x = 2y = z = 1/3
        let h = SparsePoly::from_int_terms(
            3,
            &[(&[0, 0, 0], 1), (&[1, 0, 0], -1), (&[0, 1, 0], -2), (&[0, 0, 1], -1)],
        );
        let out =
            solve_critical(&h, &Direction::from_ints(&[1, 1, 1]).unwrap(), None, &SolveOptions::default()).unwrap();
        let v = sorted(&out);
        assert_eq!(v.len(), 1);
        assert!((v[0][1] - Complex64::new(1.0 / 6.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn resultant_of_lines() {
        // y - x and y + x - 2 : resultant in y is proportional to x - 1
        let a = SparsePoly::from_int_terms(2, &[(&[0, 1], 1), (&[1, 0], -1)]);
        let b = SparsePoly::from_int_terms(2, &[(&[0, 1], 1), (&[1, 0], 1), (&[0, 0], -2)]);
        let r = resultant_y(&a, &b).monic();
        assert_eq!(r, UPoly::new(vec![GaussRat::from_int(-1), GaussRat::one()]));
    }

    #[test]
    fn seeds_that_fail_are_reported() {
        let h = SparsePoly::from_int_terms(2, &[(&[0, 0], 1), (&[1, 0], -1), (&[0, 1], -1)]);
        let prec = Precision::default();
        let out = solve_critical(
            &h,
            &Direction::from_ints(&[1, 1]).unwrap(),
            Some(&[vec![num::cint(prec, 3), num::cint(prec, 3)]]),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(out.points.len(), 1);
    }
}
