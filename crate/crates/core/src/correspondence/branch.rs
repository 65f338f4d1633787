//! Local analytic branches `w(z)` of the curve and their continuation.

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::Correspondence;
use crate::error::{Error, Result};

const CRITICAL_TOL: f64 = 1e-12;
const ON_CURVE_TOL: f64 = 1e-8;
// the matched root must be this much closer to the prediction than any other root
const MATCH_RATIO: f64 = 0.25;
const POLISH_STEPS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub z: Complex64,
    pub w: Complex64,
    /// `w'(z)` of the branch through `(z, w)`.
    pub deriv: Complex64,
}

impl BranchPoint {
    pub fn new(corr: &Correspondence, z: Complex64, w: Complex64) -> Result<Self> {
        let deriv = branch_derivative(corr, z, w)?;
        Ok(Self { z, w, deriv })
    }
}

fn check_on_curve(corr: &Correspondence, z: Complex64, w: Complex64) -> Result<()> {
    let residual = corr.curve().eval(z, w).norm();
    let scale = corr.curve().abs_eval(z, w).max(1.0);
    if residual > ON_CURVE_TOL * scale {
        return Err(Error::OffCurve { z, w, residual });
    }
    Ok(())
}

/// `w'(z) = -G_z / G_w` for the branch through an on-curve point.
pub fn branch_derivative(corr: &Correspondence, z: Complex64, w: Complex64) -> Result<Complex64> {
    check_on_curve(corr, z, w)?;
    let (gz, gw) = corr.curve().gradient(z, w);
    let scale = corr.curve().d_dw().abs_eval(z, w).max(1.0);
    if gw.norm() < CRITICAL_TOL * scale {
        return Err(Error::CriticalFiber { z, w });
    }
    Ok(-gz / gw)
}

/// `g = 1/w' - 1`, so that `w' = 1/(1 + g)`; infinite where the branch is
/// locally constant.
pub fn g_value(corr: &Correspondence, z: Complex64, w: Complex64) -> f64 {
    let (gz, gw) = corr.curve().gradient(z, w);
    if gz.is_zero() {
        return f64::INFINITY;
    }
    ((gw + gz) / -gz).norm()
}

/// One predictor/corrector step from `(za, wa)` to `zb`. `None` when the
/// step cannot be matched unambiguously.
fn step(corr: &Correspondence, za: Complex64, wa: Complex64, zb: Complex64) -> Option<Complex64> {
    let deriv = branch_derivative(corr, za, wa).ok()?;
    let predicted = wa + deriv * (zb - za);
    let fiber = corr.fiber(zb).ok()?;
    let mut nearest: Option<(f64, Complex64, usize)> = None;
    let mut second = f64::INFINITY;
    for (w, mult) in fiber.finite() {
        let dist = (w - predicted).norm();
        match nearest {
            Some((best, _, _)) if dist >= best => second = second.min(dist),
            _ => {
                if let Some((best, _, _)) = nearest {
                    second = second.min(best);
                }
                nearest = Some((dist, w, mult));
            }
        }
    }
    let (dist, mut w, mult) = nearest?;
    if mult > 1 || dist >= MATCH_RATIO * second {
        return None;
    }
    let g = corr.curve().in_w(zb);
    for _ in 0..POLISH_STEPS {
        let (v, dv) = g.eval_with_derivative(w);
        if dv.is_zero() {
            break;
        }
        w -= v / dv;
    }
    Some(w)
}

/// Follows the analytic branch through `start` along the segment to
/// `z_target`, halving the step whenever matching fails.
pub fn branch_continue(
    corr: &Correspondence,
    start: BranchPoint,
    z_target: Complex64,
    min_step: f64,
) -> Result<BranchPoint> {
    check_on_curve(corr, start.z, start.w)?;
    let z0 = start.z;
    let span = z_target - z0;
    let length = span.norm();
    let (mut t, mut h, mut w) = (0.0f64, 1.0f64, start.w);
    while t < 1.0 {
        h = h.min(1.0 - t);
        let za = z0 + span * t;
        let zb = if t + h >= 1.0 { z_target } else { z0 + span * (t + h) };
        match step(corr, za, w, zb) {
            Some(next) => {
                w = next;
                t += h;
                h = (2.0 * h).min(1.0);
            }
            None => {
                h *= 0.5;
                if h * length < min_step {
                    return Err(Error::BranchCollision { z: za });
                }
            }
        }
    }
    BranchPoint::new(corr, z_target, w)
}
