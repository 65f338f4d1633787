use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Correspondence;
use crate::algebra::{
    from_shifted_basis, parse_unipoly, poly_roots, BiPoly, Degree, ShiftedForm, UniPoly,
    DEFAULT_CLUSTER_TOL,
};
use crate::error::{Error, Result};

/// The perturbative family `R_beta(z, w) = R0(w) + sum_j beta_j P_j(w) (w - z)^(d - j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilySpec {
    pub r0: UniPoly,
    pub parts: ShiftedForm,
    pub beta: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct FamilyJson {
    #[serde(rename = "R0")]
    r0: String,
    #[serde(rename = "P")]
    parts: Vec<String>,
    beta: Vec<[f64; 2]>,
}

impl FamilySpec {
    pub fn new(r0: UniPoly, parts: ShiftedForm, beta: Vec<Complex64>) -> Result<Self> {
        let spec = Self { r0, parts, beta };
        spec.validate()?;
        Ok(spec)
    }

    /// The unperturbed family `beta = 0`: a constant correspondence onto the zeros of `r0`.
    pub fn constant(r0: UniPoly) -> Result<Self> {
        let d = r0.degree().finite().unwrap_or(0);
        Self::new(r0, ShiftedForm::zero(d), vec![Complex64::default(); d + 1])
    }

    pub fn d(&self) -> usize {
        self.parts.d
    }

    pub fn validate(&self) -> Result<()> {
        let d = match self.r0.degree() {
            Degree::Finite(d) if d >= 1 => d,
            other => {
                return Err(Error::InvalidInput(format!(
                    "R0 must have degree >= 1, got {other}"
                )))
            }
        };
        if self.parts.d != d {
            return Err(Error::InvalidInput(format!(
                "P has degree {} but R0 has degree {d}",
                self.parts.d
            )));
        }
        if self.beta.len() != d + 1 {
            return Err(Error::InvalidInput(format!(
                "beta needs {} weights, got {}",
                d + 1,
                self.beta.len()
            )));
        }
        // re-checks deg P_j <= j for hand-assembled forms
        ShiftedForm::new(d, self.parts.parts.clone())?;
        let roots = poly_roots(&self.r0, DEFAULT_CLUSTER_TOL)?;
        let pts: Vec<Complex64> = roots.finite_expanded();
        let sep = min_separation(&pts);
        if sep <= 10.0 * DEFAULT_CLUSTER_TOL {
            return Err(Error::SimpleZeroViolation { separation: sep });
        }
        Ok(())
    }

    /// `S(w) = R0(w) + beta_d P_d(w)`, the part that survives on the diagonal.
    pub fn s_poly(&self) -> UniPoly {
        let d = self.d();
        &self.r0 + &self.parts.parts[d].scale(self.beta[d])
    }

    /// The weighted perturbation `sum_j beta_j P_j(w) (w - z)^(d - j)` as a shifted form.
    pub fn weighted_parts(&self) -> ShiftedForm {
        ShiftedForm {
            d: self.d(),
            parts: self
                .parts
                .parts
                .iter()
                .zip(&self.beta)
                .map(|(p, &b)| p.scale(b))
                .collect(),
        }
    }

    pub fn curve(&self) -> BiPoly {
        &BiPoly::from_w(&self.r0) + &from_shifted_basis(&self.weighted_parts())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: FamilyJson = serde_json::from_str(text)?;
        let r0 = parse_unipoly(&raw.r0)?;
        let parts = raw
            .parts
            .iter()
            .map(|s| parse_unipoly(s))
            .collect::<Result<Vec<_>>>()?;
        let d = parts.len().saturating_sub(1);
        let parts = ShiftedForm::new(d, parts)?;
        let beta = raw.beta.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Self::new(r0, parts, beta)
    }

    pub fn to_json(&self) -> String {
        let raw = FamilyJson {
            r0: self.r0.to_string(),
            parts: self.parts.parts.iter().map(|p| p.to_string()).collect(),
            beta: self.beta.iter().map(|b| [b.re, b.im]).collect(),
        };
        serde_json::to_string(&raw).expect("family serializes")
    }
}

pub(crate) fn min_separation(pts: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            best = best.min((a - b).norm());
        }
    }
    best
}

/// Expands the family into a correspondence. The coefficient of `w^d` is
/// independent of `z` for every valid family; this is asserted.
pub fn build_family(spec: &FamilySpec) -> Result<Correspondence> {
    spec.validate()?;
    let corr = Correspondence::new(spec.curve())?;
    if corr.degree() != spec.d() || !corr.has_constant_lead() {
        return Err(Error::HypothesisViolation(format!(
            "leading w-coefficient of the family must be a nonzero constant of degree {}",
            spec.d()
        )));
    }
    Ok(corr)
}
