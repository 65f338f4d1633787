//! The multivalued map `F: z -> w` defined by a curve `G(z, w) = 0`.

mod branch;
mod certify;
mod escape;
mod family;

pub use branch::{branch_continue, branch_derivative, g_value, BranchPoint};
pub use certify::{certify, certify_with, Certificate, CertifyOptions, Witness};
pub use escape::{default_start_radius, escape_radius, escape_radius_for, EscapeMethod, EscapeRadius};
pub use family::{build_family, FamilySpec};

use num_complex::Complex64;

use crate::algebra::{
    parse_bipoly, poly_roots, BiPoly, Degree, RootMultiset, UniPoly, DEFAULT_CLUSTER_TOL,
};
use crate::error::{Error, Result};

// leading coefficients below this fraction of their absolute scale count as vanished
const DEGREE_DROP_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct Correspondence {
    curve: BiPoly,
    d: usize,
    back_degree: usize,
    lead_w: UniPoly,
    cluster_tol: f64,
}

impl Correspondence {
    pub fn new(curve: BiPoly) -> Result<Self> {
        let d = curve.deg_w();
        if curve.is_zero() || d == 0 {
            return Err(Error::InvalidInput(
                "curve must have positive degree in w".into(),
            ));
        }
        Ok(Self {
            d,
            back_degree: curve.deg_z(),
            lead_w: curve.column(d),
            curve,
            cluster_tol: DEFAULT_CLUSTER_TOL,
        })
    }

    pub fn parse(src: &str) -> Result<Self> {
        Self::new(parse_bipoly(src)?)
    }

    pub fn with_cluster_tol(mut self, tol: f64) -> Self {
        self.cluster_tol = tol;
        self
    }

    pub fn curve(&self) -> &BiPoly {
        &self.curve
    }

    /// Forward valence `deg_w`.
    pub fn degree(&self) -> usize {
        self.d
    }

    /// Backward valence `deg_z`.
    pub fn back_degree(&self) -> usize {
        self.back_degree
    }

    /// Coefficient of `w^d`, a polynomial in `z`.
    pub fn lead_w(&self) -> &UniPoly {
        &self.lead_w
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    /// True when the coefficient of `w^d` does not depend on `z`.
    pub fn has_constant_lead(&self) -> bool {
        self.lead_w.degree() == Degree::Finite(0)
    }

    /// The curve does not depend on `z`: every point maps to the same fiber.
    pub fn is_constant(&self) -> bool {
        self.back_degree == 0
    }

    /// `G(w, w)`, whose zeros are the fixed points of `F`.
    pub fn fixed_point_polynomial(&self) -> UniPoly {
        self.curve.diagonal()
    }

    /// `F(z)` with multiplicities; a drop of the `w`-degree at `z` shows up as
    /// roots at infinity.
    pub fn fiber(&self, z: Complex64) -> Result<RootMultiset> {
        let scales: Vec<f64> = (0..=self.d).map(|j| self.curve.column(j).abs_eval(z)).collect();
        solve_slice(self.curve.in_w(z), &scales, self.d, self.cluster_tol)
            .ok_or(Error::DegenerateLine { at: z })?
    }

    /// `F^dagger(w)`: the `z` with `(z, w)` on the curve.
    pub fn adjoint_fiber(&self, w: Complex64) -> Result<RootMultiset> {
        let scales: Vec<f64> = (0..=self.back_degree)
            .map(|i| self.curve.row(i).abs_eval(w))
            .collect();
        solve_slice(self.curve.in_z(w), &scales, self.back_degree, self.cluster_tol)
            .ok_or(Error::DegenerateLine { at: w })?
    }
}

/// Roots of a one-variable slice of the curve. Returns `None` when the
/// slice vanishes identically.
fn solve_slice(
    p: UniPoly,
    scales: &[f64],
    declared: usize,
    cluster_tol: f64,
) -> Option<Result<RootMultiset>> {
    let mut coeffs = p.coeffs().to_vec();
    while let Some(top) = coeffs.last() {
        let k = coeffs.len() - 1;
        if top.norm() <= DEGREE_DROP_TOL * scales.get(k).copied().unwrap_or(0.0) {
            coeffs.pop();
        } else {
            break;
        }
    }
    let reduced = UniPoly::new(coeffs);
    let finite_degree = reduced.degree().finite()?;
    let mut roots = if finite_degree == 0 {
        RootMultiset::default()
    } else {
        match poly_roots(&reduced, cluster_tol) {
            Ok(r) => r,
            Err(e) => return Some(Err(e)),
        }
    };
    roots.push_infinity(declared - finite_degree);
    Some(Ok(roots))
}
