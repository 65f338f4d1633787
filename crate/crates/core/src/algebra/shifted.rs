//! Decomposition `P(z, w) = sum_j P_j(w) (w - z)^(d - j)` with `deg P_j <= j`.

use num_complex::Complex64;
use num_traits::Zero;

use super::bipoly::BiPoly;
use super::unipoly::{Degree, UniPoly};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedForm {
    pub d: usize,
    /// `parts[j]` is `P_j`, `j = 0..=d`.
    pub parts: Vec<UniPoly>,
}

impl ShiftedForm {
    pub fn new(d: usize, parts: Vec<UniPoly>) -> Result<Self> {
        if parts.len() != d + 1 {
            return Err(Error::InvalidInput(format!(
                "shifted form of degree {d} needs {} parts, got {}",
                d + 1,
                parts.len()
            )));
        }
        for (j, p) in parts.iter().enumerate() {
            if p.degree() > Degree::Finite(j) {
                return Err(Error::InvalidInput(format!(
                    "part P_{j} has degree {} > {j}",
                    p.degree()
                )));
            }
        }
        Ok(Self { d, parts })
    }

    pub fn zero(d: usize) -> Self {
        Self {
            d,
            parts: vec![UniPoly::zero(); d + 1],
        }
    }

    /// Number of free coefficients: `sum_j (j + 1) = (d+1)(d+2)/2`.
    pub fn dimension(&self) -> usize {
        (self.d + 1) * (self.d + 2) / 2
    }
}

fn binomial_table(n: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; n + 1]; n + 1];
    for m in 0..=n {
        t[m][0] = 1.0;
        for i in 1..=m {
            t[m][i] = t[m - 1][i - 1] + if i < m { t[m - 1][i] } else { 0.0 };
        }
    }
    t
}

/// Solves for the unique shifted form of `p`. Matching the coefficient of
/// `z^i` in descending order of `i` gives a unit-triangular system:
/// only `P_0, ..., P_(d-i)` contribute to `z^i`, and `P_(d-i)` appears with
/// coefficient `(-1)^i`.
pub fn to_shifted_basis(p: &BiPoly, d: usize) -> Result<ShiftedForm> {
    if let Degree::Finite(td) = p.total_degree() {
        if td > d {
            return Err(Error::DegreeTooHigh { degree: td, max: d });
        }
    }
    let binom = binomial_table(d);
    let mut parts = vec![UniPoly::zero(); d + 1];
    for i in (0..=d).rev() {
        let j_new = d - i;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        // residual coefficient of z^i after removing known parts
        let mut rest: Vec<Complex64> = (0..=j_new).map(|e| p.coeff(i, e)).collect();
        for (j, part) in parts.iter().enumerate().take(j_new) {
            // P_j(w) C(d-j, i) (-1)^i w^(d-j-i)
            let shift = d - j - i;
            let factor = binom[d - j][i] * sign;
            for (e, &c) in part.coeffs().iter().enumerate() {
                rest[e + shift] -= c * factor;
            }
        }
        parts[j_new] = UniPoly::new(rest.into_iter().map(|c| c * sign).collect());
    }
    Ok(ShiftedForm { d, parts })
}

/// Binomial expansion of `sum_j P_j(w) (w - z)^(d - j)`.
pub fn from_shifted_basis(s: &ShiftedForm) -> BiPoly {
    let d = s.d;
    let binom = binomial_table(d);
    let mut grid = vec![vec![Complex64::zero(); d + 1]; d + 1];
    for (j, part) in s.parts.iter().enumerate() {
        let m = d - j;
        for i in 0..=m {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let factor = binom[m][i] * sign;
            for (e, &c) in part.coeffs().iter().enumerate() {
                grid[i][e + m - i] += c * factor;
            }
        }
    }
    BiPoly::from_grid(grid)
}
