//! Empirical contraction certificate for a family member.
//!
//! Everything here is sampled: a passing certificate means no sampled point
//! violated the smallness conditions, never a proof.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::escape::{circle, default_start_radius, escape_radius_for, max_fiber_ratio, CIRCLE_SAMPLES};
use super::family::min_separation;
use super::{branch_derivative, build_family, g_value, Correspondence, EscapeMethod, FamilySpec};
use crate::algebra::{lex_cmp, poly_roots, Degree};
use crate::error::{Error, Result};

pub const DERIV_BOUND: f64 = 0.5;
pub const G_BOUND: f64 = 3.0;
// eta0 for a single fixed point, where no pairwise separation exists
const LONE_FIXED_POINT_ETA: f64 = 1.0 / 3.0;

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    /// points on each circle `|z - u_l| = eta0`
    pub samples_per_disk: usize,
    /// grid pitch over `D(0, M)`; default `eta0 / 8`
    pub grid_pitch: Option<f64>,
    /// the pitch is coarsened until the grid has at most this many points
    pub max_grid_points: usize,
    pub circle_samples: usize,
    pub max_witnesses: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            samples_per_disk: 64,
            grid_pitch: None,
            max_grid_points: 1 << 18,
            circle_samples: CIRCLE_SAMPLES,
            max_witnesses: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub z: Complex64,
    pub w: Option<Complex64>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(rename = "M")]
    pub m: f64,
    pub escape_method: Option<EscapeMethod>,
    pub eta0: f64,
    pub fixed_points: Vec<Complex64>,
    pub sup_deriv: f64,
    #[serde(with = "crate::io::inf_as_null")]
    pub g_lower: f64,
    pub samples: usize,
    pub pass: bool,
    pub violations: usize,
    pub witnesses: Vec<Witness>,
}

pub fn certify(spec: &FamilySpec, samples_per_disk: usize) -> Result<Certificate> {
    certify_with(
        spec,
        &CertifyOptions {
            samples_per_disk,
            ..CertifyOptions::default()
        },
    )
}

#[derive(Default)]
struct Tally {
    sup_deriv: f64,
    g_lower: f64,
    violations: usize,
    witnesses: Vec<Witness>,
}

impl Tally {
    fn new() -> Self {
        Self {
            g_lower: f64::INFINITY,
            ..Self::default()
        }
    }

    fn flag(&mut self, z: Complex64, w: Option<Complex64>, reason: impl Into<String>) {
        self.violations += 1;
        self.witnesses.push(Witness {
            z,
            w,
            reason: reason.into(),
        });
    }

    fn merge(mut self, other: Tally, cap: usize) -> Tally {
        self.sup_deriv = self.sup_deriv.max(other.sup_deriv);
        self.g_lower = self.g_lower.min(other.g_lower);
        self.violations += other.violations;
        let room = cap.saturating_sub(self.witnesses.len());
        self.witnesses.extend(other.witnesses.into_iter().take(room));
        self
    }
}

pub fn certify_with(spec: &FamilySpec, opts: &CertifyOptions) -> Result<Certificate> {
    let corr = build_family(spec)?;
    let s = spec.s_poly();
    if s.degree() != Degree::Finite(spec.d()) {
        return Err(Error::HypothesisViolation(
            "S(w) = R0 + beta_d P_d lost degree".into(),
        ));
    }
    let roots = poly_roots(&s, corr.cluster_tol())?;
    let mut fixed: Vec<Complex64> = roots.finite_expanded();
    fixed.sort_by(lex_cmp);
    let separation = min_separation(&fixed);
    if roots.roots.iter().any(|r| r.multiplicity > 1) || separation <= 10.0 * corr.cluster_tol() {
        return Err(Error::SimpleZeroViolation { separation });
    }
    let eta0 = if fixed.len() > 1 {
        separation / 3.0
    } else {
        LONE_FIXED_POINT_ETA
    };

    let mut tally = Tally::new();
    let reach = fixed.iter().map(|u| u.norm() + eta0).fold(0.0, f64::max);
    let (m, escape_method) = match escape_radius_for(&corr, default_start_radius(&corr)) {
        Ok(esc) => (esc.radius.max(reach), Some(esc.method)),
        Err(Error::NoEscape { last_radius }) => {
            tally.flag(Complex64::new(last_radius, 0.0), None, "no escape radius");
            (last_radius.max(reach), None)
        }
        Err(e) => return Err(e),
    };

    let samples = sample_points(&fixed, eta0, m, opts);
    let cap = opts.max_witnesses;
    let per_point: Vec<Tally> = samples
        .par_iter()
        .map(|&z| check_point(&corr, &fixed, eta0, z))
        .collect();
    tally = per_point.into_iter().fold(tally, |acc, t| acc.merge(t, cap));

    for scale in [1.0, 2.0, 4.0] {
        for z in circle(m * scale, opts.circle_samples) {
            if max_fiber_ratio(&corr, z) >= 0.5 {
                let mut t = Tally::new();
                t.flag(z, None, "escape: fiber point with |w| >= |z|/2");
                tally = tally.merge(t, cap);
            }
        }
    }

    let pass = tally.violations == 0 && tally.sup_deriv < DERIV_BOUND && tally.g_lower > G_BOUND;
    Ok(Certificate {
        m,
        escape_method,
        eta0,
        fixed_points: fixed,
        sup_deriv: tally.sup_deriv,
        g_lower: tally.g_lower,
        samples: samples.len(),
        pass,
        violations: tally.violations,
        witnesses: tally.witnesses,
    })
}

fn sample_points(fixed: &[Complex64], eta0: f64, m: f64, opts: &CertifyOptions) -> Vec<Complex64> {
    let mut pitch = opts.grid_pitch.unwrap_or(eta0 / 8.0);
    while ((2.0 * m / pitch).ceil() + 1.0).powi(2) > opts.max_grid_points as f64 {
        pitch *= 1.25;
    }
    let steps = (2.0 * m / pitch).ceil() as i64;
    let mut pts = Vec::new();
    for iy in 0..=steps {
        for ix in 0..=steps {
            let z = Complex64::new(-m + ix as f64 * pitch, -m + iy as f64 * pitch);
            if z.norm() <= m {
                pts.push(z);
            }
        }
    }
    for &u in fixed {
        pts.push(u);
        pts.extend(circle(eta0, opts.samples_per_disk).map(|p| u + p));
    }
    pts.extend(circle(m, opts.circle_samples));
    pts
}

fn check_point(corr: &Correspondence, fixed: &[Complex64], eta0: f64, z: Complex64) -> Tally {
    let mut t = Tally::new();
    let fiber = match corr.fiber(z) {
        Ok(f) => f,
        Err(e) => {
            t.flag(z, None, format!("fiber: {e}"));
            return t;
        }
    };
    if fiber.infinite_multiplicity() > 0 {
        t.flag(z, None, "fiber point at infinity");
        return t;
    }
    let mut hits = vec![0usize; fixed.len()];
    for (w, mult) in fiber.finite() {
        let (l, dist) = fixed
            .iter()
            .enumerate()
            .map(|(l, u)| (l, (w - u).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one fixed point");
        if dist >= eta0 {
            t.flag(z, Some(w), "fiber point outside the eta0-disks");
            continue;
        }
        hits[l] += mult;
        match branch_derivative(corr, z, w) {
            Ok(dw) => {
                t.sup_deriv = t.sup_deriv.max(dw.norm());
                t.g_lower = t.g_lower.min(g_value(corr, z, w));
            }
            Err(e) => t.flag(z, Some(w), format!("derivative: {e}")),
        }
    }
    if hits.iter().any(|&h| h != 1) {
        t.flag(z, None, "eta0-disks do not hold exactly one fiber point each");
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{ShiftedForm, UniPoly};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn tn_family(n: f64) -> FamilySpec {
        // (w^2 - 1) + (w - z)/(n - 1): T = (w^2-1) D^2 + D
        let mut parts = ShiftedForm::zero(2);
        parts.parts[1] = UniPoly::constant(c(1.0));
        FamilySpec::new(
            UniPoly::from_real(&[-1.0, 0.0, 1.0]),
            parts,
            vec![c(0.0), c(1.0 / (n - 1.0)), c(0.0)],
        )
        .unwrap()
    }

    #[test]
    fn constant_family_passes() {
        let spec = FamilySpec::constant(UniPoly::from_real(&[-1.0, 0.0, 1.0])).unwrap();
        let cert = certify(&spec, 32).unwrap();
        assert!(cert.pass, "{:?}", cert.witnesses);
        assert_eq!(cert.sup_deriv, 0.0);
        assert_eq!(cert.fixed_points.len(), 2);
        assert!((cert.fixed_points[0] - c(-1.0)).norm() < 1e-14);
        assert!((cert.eta0 - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn tn_family_at_large_n_passes() {
        let cert = certify(&tn_family(100.0), 64).unwrap();
        assert!(cert.pass, "{:?}", cert.witnesses);
        // w' = 1/(198 w + 1) with |w| near 1 on the sampled disk
        assert!(cert.sup_deriv > 1.0 / 199.0 && cert.sup_deriv < 0.01);
        assert!(cert.g_lower > 150.0);
    }

    #[test]
    fn tn_family_at_small_n_fails_with_witnesses() {
        let cert = certify(&tn_family(2.0), 64).unwrap();
        assert!(!cert.pass);
        assert!(!cert.witnesses.is_empty());
    }

    #[test]
    fn certificate_json_round_trip() {
        let spec = FamilySpec::constant(UniPoly::from_real(&[-1.0, 0.0, 1.0])).unwrap();
        let cert = certify(&spec, 8).unwrap();
        let text = serde_json::to_string(&cert).unwrap();
        assert!(text.contains("\"g_lower\":null"));
        let back: Certificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cert);
    }
}
