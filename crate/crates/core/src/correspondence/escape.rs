use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{build_family, Correspondence, FamilySpec};
use crate::algebra::Degree;
use crate::error::{Error, Result};

pub const CIRCLE_SAMPLES: usize = 256;
const MAX_DOUBLINGS: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EscapeMethod {
    /// A coefficient bound proves `|w| < |z|/2` for every `|z| >= M`.
    Bound,
    /// Only the sampled circles `|z| = M 2^t`, `t = 0..3`, were checked.
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeRadius {
    pub radius: f64,
    pub method: EscapeMethod,
}

/// Default starting radius `2 (1 + cauchy bound of S)` where `S = G(w, w)`.
pub fn default_start_radius(corr: &Correspondence) -> f64 {
    let s = corr.fixed_point_polynomial();
    let bound = match s.degree() {
        Degree::Finite(d) if d >= 1 => s.cauchy_bound(),
        _ => 0.0,
    };
    2.0 * (1.0 + bound)
}

pub fn escape_radius(spec: &FamilySpec) -> Result<EscapeRadius> {
    let corr = build_family(spec)?;
    escape_radius_for(&corr, default_start_radius(&corr))
}

/// Smallest `M` in `m0 * 2^t` past which every fiber point satisfies
/// `|w| < |z|/2`.
pub fn escape_radius_for(corr: &Correspondence, m0: f64) -> Result<EscapeRadius> {
    let mut radius = m0;
    for _ in 0..=MAX_DOUBLINGS {
        if bound_holds(corr, radius) {
            return Ok(EscapeRadius {
                radius,
                method: EscapeMethod::Bound,
            });
        }
        if sampled_holds(corr, radius, CIRCLE_SAMPLES) {
            return Ok(EscapeRadius {
                radius,
                method: EscapeMethod::Sampled,
            });
        }
        radius *= 2.0;
    }
    Err(Error::NoEscape {
        last_radius: radius / 2.0,
    })
}

/// With `c_j(z)` the coefficient of `w^j`, all roots lie in `|w| < r` once
/// `|c_d| r^d > sum_{j<d} |c_j(z)| r^j`. Taking `r = s/2` at `|z| = s` and
/// bounding `|c_j(z)|` termwise, the condition reads
/// `|c_d| 2^-d > sum |c_ij| 2^-j s^(i+j-d)`, whose right side is
/// non-increasing in `s` when the total degree is at most `d`; checking it at
/// `s = M` covers every `|z| >= M`.
pub(crate) fn bound_holds(corr: &Correspondence, s: f64) -> bool {
    let d = corr.degree();
    if !corr.has_constant_lead() {
        return false;
    }
    if corr.curve().total_degree() > Degree::Finite(d) {
        return false;
    }
    let lead = corr.lead_w().coeff(0).norm();
    let lhs = lead * 0.5f64.powi(d as i32);
    let rhs: f64 = corr
        .curve()
        .terms()
        .filter(|&(_, j, _)| j < d)
        .map(|(i, j, c)| c.norm() * 0.5f64.powi(j as i32) * s.powi(i as i32 + j as i32 - d as i32))
        .sum();
    lhs > rhs
}

pub(crate) fn max_fiber_ratio(corr: &Correspondence, z: Complex64) -> f64 {
    match corr.fiber(z) {
        Ok(f) if f.infinite_multiplicity() == 0 => {
            f.finite().map(|(w, _)| w.norm()).fold(0.0, f64::max) / z.norm()
        }
        _ => f64::INFINITY,
    }
}

pub(crate) fn circle(radius: f64, count: usize) -> impl Iterator<Item = Complex64> {
    (0..count).map(move |k| Complex64::from_polar(radius, TAU * (k as f64 + 0.5) / count as f64))
}

fn sampled_holds(corr: &Correspondence, radius: f64, per_circle: usize) -> bool {
    (0..4).all(|t| {
        circle(radius * f64::from(1u32 << t), per_circle).all(|z| max_fiber_ratio(corr, z) < 0.5)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::UniPoly;

    #[test]
    fn contracting_line_escapes_at_start() {
        let corr = Correspondence::parse("w + 0.1*z").unwrap();
        let m0 = default_start_radius(&corr);
        let esc = escape_radius_for(&corr, m0).unwrap();
        assert_eq!(esc.radius, m0);
        assert_eq!(esc.method, EscapeMethod::Bound);
    }

    #[test]
    fn weakly_contracting_line_never_escapes() {
        let corr = Correspondence::parse("w + 0.9*z").unwrap();
        assert!(matches!(
            escape_radius_for(&corr, default_start_radius(&corr)),
            Err(Error::NoEscape { .. })
        ));
    }

    #[test]
    fn constant_family_escapes_past_its_zeros() {
        let spec = FamilySpec::constant(UniPoly::from_real(&[-1.0, 0.0, 1.0])).unwrap();
        let esc = escape_radius(&spec).unwrap();
        assert!(esc.radius > 1.0);
        assert_eq!(esc.method, EscapeMethod::Bound);
    }

    #[test]
    fn square_root_map_needs_sampling_or_larger_radius() {
        // |w| = sqrt|z| < |z|/2 only for |z| > 4; lead is constant so the bound applies
        let corr = Correspondence::parse("w^2 - z").unwrap();
        let esc = escape_radius_for(&corr, 1.0).unwrap();
        assert!(esc.radius > 4.0);
    }
}
