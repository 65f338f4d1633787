use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::unipoly::{Degree, UniPoly};

/// Dense bivariate polynomial `sum c[i][j] z^i w^j`.
///
/// Storage is row-major by powers of `z`. Trailing all-zero rows and
/// columns are trimmed on construction; the zero polynomial has no rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BiPoly {
    coeffs: Vec<Complex64>,
    rows: usize,
    cols: usize,
}

impl BiPoly {
    /// Builds from `grid[i][j]`, the coefficient of `z^i w^j`. Rows may have
    /// different lengths.
    pub fn from_grid(grid: Vec<Vec<Complex64>>) -> Self {
        let rows = grid.len();
        let cols = grid.iter().map(Vec::len).max().unwrap_or(0);
        let mut coeffs = vec![Complex64::zero(); rows * cols];
        for (i, row) in grid.into_iter().enumerate() {
            for (j, c) in row.into_iter().enumerate() {
                coeffs[i * cols + j] = c;
            }
        }
        Self::from_dense(coeffs, rows, cols)
    }

    fn from_dense(coeffs: Vec<Complex64>, rows: usize, cols: usize) -> Self {
        let mut new_rows = 0;
        let mut new_cols = 0;
        for i in 0..rows {
            for j in 0..cols {
                if !coeffs[i * cols + j].is_zero() {
                    new_rows = new_rows.max(i + 1);
                    new_cols = new_cols.max(j + 1);
                }
            }
        }
        if new_rows == rows && new_cols == cols {
            return Self { coeffs, rows, cols };
        }
        let mut trimmed = vec![Complex64::zero(); new_rows * new_cols];
        for i in 0..new_rows {
            for j in 0..new_cols {
                trimmed[i * new_cols + j] = coeffs[i * cols + j];
            }
        }
        Self {
            coeffs: trimmed,
            rows: new_rows,
            cols: new_cols,
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_grid(vec![vec![c]])
    }

    /// `c z^i w^j`
    pub fn monomial(c: Complex64, i: usize, j: usize) -> Self {
        let mut grid = vec![vec![Complex64::zero(); j + 1]; i + 1];
        grid[i][j] = c;
        Self::from_grid(grid)
    }

    pub fn z() -> Self {
        Self::monomial(Complex64::one(), 1, 0)
    }

    pub fn w() -> Self {
        Self::monomial(Complex64::one(), 0, 1)
    }

    /// Lifts a polynomial in `w`.
    pub fn from_w(p: &UniPoly) -> Self {
        Self::from_grid(vec![p.coeffs().to_vec()])
    }

    /// Lifts a polynomial in `z`.
    pub fn from_z(p: &UniPoly) -> Self {
        Self::from_grid(p.coeffs().iter().map(|&c| vec![c]).collect())
    }

    /// `(w - z)^m`
    pub fn shift_power(m: usize) -> Self {
        let mut grid = vec![vec![Complex64::zero(); m + 1]; m + 1];
        let mut binom = 1.0f64;
        for i in 0..=m {
            // coefficient of z^i w^(m-i) is C(m,i) (-1)^i
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            grid[i][m - i] = Complex64::new(sign * binom, 0.0);
            binom = binom * (m - i) as f64 / (i + 1) as f64;
        }
        Self::from_grid(grid)
    }

    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        if i < self.rows && j < self.cols {
            self.coeffs[i * self.cols + j]
        } else {
            Complex64::zero()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows == 0
    }

    /// Degree in `z`; zero for the zero polynomial.
    pub fn deg_z(&self) -> usize {
        self.rows.saturating_sub(1)
    }

    /// Degree in `w`; zero for the zero polynomial.
    pub fn deg_w(&self) -> usize {
        self.cols.saturating_sub(1)
    }

    pub fn total_degree(&self) -> Degree {
        self.terms()
            .map(|(i, j, _)| i + j)
            .max()
            .map_or(Degree::NegInfinity, Degree::Finite)
    }

    /// Nonzero terms as `(i, j, c)` for `c z^i w^j`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            (0..self.cols).filter_map(move |j| {
                let c = self.coeffs[i * self.cols + j];
                (!c.is_zero()).then_some((i, j, c))
            })
        })
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.in_w(z).eval(w)
    }

    /// `sum |c_ij| |z|^i |w|^j`
    pub fn abs_eval(&self, z: Complex64, w: Complex64) -> f64 {
        let (rz, rw) = (z.norm(), w.norm());
        self.terms()
            .map(|(i, j, c)| c.norm() * rz.powi(i as i32) * rw.powi(j as i32))
            .sum()
    }

    /// The polynomial in `w` obtained by fixing `z`.
    pub fn in_w(&self, z: Complex64) -> UniPoly {
        let mut out = vec![Complex64::zero(); self.cols];
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = (0..self.rows)
                .rev()
                .fold(Complex64::zero(), |acc, i| acc * z + self.coeffs[i * self.cols + j]);
        }
        UniPoly::new(out)
    }

    /// The polynomial in `z` obtained by fixing `w`.
    pub fn in_z(&self, w: Complex64) -> UniPoly {
        UniPoly::new(
            (0..self.rows)
                .map(|i| self.row(i).eval(w))
                .collect(),
        )
    }

    /// Coefficient of `z^i`, a polynomial in `w`.
    pub fn row(&self, i: usize) -> UniPoly {
        if i >= self.rows {
            return UniPoly::zero();
        }
        UniPoly::new(self.coeffs[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    /// Coefficient of `w^j`, a polynomial in `z`.
    pub fn column(&self, j: usize) -> UniPoly {
        UniPoly::new((0..self.rows).map(|i| self.coeff(i, j)).collect())
    }

    /// `G(w, w)`: restriction to the diagonal, whose zeros are the fixed points.
    pub fn diagonal(&self) -> UniPoly {
        let mut out = vec![Complex64::zero(); self.rows + self.cols];
        for (i, j, c) in self.terms() {
            out[i + j] += c;
        }
        UniPoly::new(out)
    }

    pub fn d_dz(&self) -> Self {
        Self::from_grid(
            (1..self.rows)
                .map(|i| (0..self.cols).map(|j| self.coeff(i, j) * i as f64).collect())
                .collect(),
        )
    }

    pub fn d_dw(&self) -> Self {
        Self::from_grid(
            (0..self.rows)
                .map(|i| (1..self.cols).map(|j| self.coeff(i, j) * j as f64).collect())
                .collect(),
        )
    }

    /// `(dG/dz, dG/dw)` at a point.
    pub fn gradient(&self, z: Complex64, w: Complex64) -> (Complex64, Complex64) {
        let (mut gz, mut gw) = (Complex64::zero(), Complex64::zero());
        let mut zp = Complex64::one();
        for i in 0..self.rows {
            let (v, dv) = self.row(i).eval_with_derivative(w);
            gw += zp * dv;
            if i > 0 {
                gz += z.powu(i as u32 - 1) * v * i as f64;
            }
            zp *= z;
        }
        (gz, gw)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_dense(
            self.coeffs.iter().map(|&c| c * s).collect(),
            self.rows,
            self.cols,
        )
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::constant(Complex64::one()), |acc, _| &acc * self)
    }

    fn combine(&self, rhs: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let rows = self.rows.max(rhs.rows);
        let cols = self.cols.max(rhs.cols);
        let mut coeffs = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                coeffs.push(f(self.coeff(i, j), rhs.coeff(i, j)));
            }
        }
        Self::from_dense(coeffs, rows, cols)
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        super::parse::write_bivariate(f, self)
    }
}

impl Add for &BiPoly {
    type Output = BiPoly;

    fn add(self, rhs: &BiPoly) -> BiPoly {
        self.combine(rhs, |a, b| a + b)
    }
}

impl Sub for &BiPoly {
    type Output = BiPoly;

    fn sub(self, rhs: &BiPoly) -> BiPoly {
        self.combine(rhs, |a, b| a - b)
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;

    fn neg(self) -> BiPoly {
        self.scale(-Complex64::one())
    }
}

impl Mul for &BiPoly {
    type Output = BiPoly;

    fn mul(self, rhs: &BiPoly) -> BiPoly {
        if self.is_zero() || rhs.is_zero() {
            return BiPoly::zero();
        }
        let rows = self.rows + rhs.rows - 1;
        let cols = self.cols + rhs.cols - 1;
        let mut coeffs = vec![Complex64::zero(); rows * cols];
        for (i1, j1, a) in self.terms() {
            for (i2, j2, b) in rhs.terms() {
                coeffs[(i1 + i2) * cols + j1 + j2] += a * b;
            }
        }
        BiPoly::from_dense(coeffs, rows, cols)
    }
}
