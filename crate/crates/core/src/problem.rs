//! The function `F = G / (G_den * H^p)` and a direction.

use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::series::SparsePoly;

#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub g: SparsePoly,
    /// Optional extra denominator, nonvanishing near the relevant points.
    pub g_den: Option<SparsePoly>,
    pub h: SparsePoly,
    pub p: u32,
    pub alpha: Direction,
}

impl Problem {
    pub fn new(g: SparsePoly, g_den: Option<SparsePoly>, h: SparsePoly, p: u32, alpha: Direction) -> Result<Self> {
        let d = h.nvars();
        if d == 0 {
            return Err(Error::InvalidPolynomial("H needs at least one variable".into()));
        }
        for (name, q) in [("G", Some(&g)), ("G_den", g_den.as_ref())] {
            if let Some(q) = q {
                if q.nvars() != d {
                    return Err(Error::InvalidPolynomial(format!(
                        "{name} has {} variables, H has {d}",
                        q.nvars()
                    )));
                }
            }
        }
        if g_den.as_ref().is_some_and(SparsePoly::is_zero) {
            return Err(Error::ZeroPolynomial);
        }
        if h.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if p == 0 {
            return Err(Error::InvalidPolynomial("pole order p must be at least 1".into()));
        }
        if alpha.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: alpha.dim() });
        }
        Ok(Problem { g, g_den, h, p, alpha })
    }

    pub fn nvars(&self) -> usize {
        self.h.nvars()
    }

    /// New variable `k` is old variable `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Problem {
        Problem {
            g: self.g.permute(perm),
            g_den: self.g_den.as_ref().map(|q| q.permute(perm)),
            h: self.h.permute(perm),
            p: self.p,
            alpha: self.alpha.permute(perm),
        }
    }
}
