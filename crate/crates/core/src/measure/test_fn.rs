use num_complex::Complex64;
use serde::Serialize;

use super::{exact_pushforward, push_once, PointMeasure, DEFAULT_PRUNE_TOL};
use crate::correspondence::Correspondence;
use crate::error::Result;

/// Bounded test functions for the transfer operator and invariance checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestFunction {
    Constant(f64),
    RealPart,
    /// `(z/ρ)^p conj(z/ρ)^q` times a smooth cutoff equal to 1 on `|z| <= ρ/2`
    /// and vanishing for `|z| >= ρ`.
    Moment { p: u32, q: u32, rho: f64 },
    /// Indicator of the half-open cell `[x0, x0 + eps) × [y0, y0 + eps)`.
    Cell { x0: f64, y0: f64, eps: f64 },
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// `C^∞` step: 1 for `s <= 0`, 0 for `s >= 1`.
fn smooth_step(s: f64) -> f64 {
    let (a, b) = (bump(1.0 - s), bump(s));
    a / (a + b)
}

impl TestFunction {
    /// All moments with `p + q <= max_order`, cut off at radius `rho`.
    pub fn moment_dictionary(max_order: u32, rho: f64) -> Vec<Self> {
        let mut dict = Vec::new();
        for total in 0..=max_order {
            for p in 0..=total {
                dict.push(TestFunction::Moment { p, q: total - p, rho });
            }
        }
        dict
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match *self {
            TestFunction::Constant(c) => Complex64::new(c, 0.0),
            TestFunction::RealPart => Complex64::new(z.re, 0.0),
            TestFunction::Moment { p, q, rho } => {
                let r = z.norm();
                if r >= rho {
                    return Complex64::default();
                }
                let zeta = z / rho;
                let cutoff = smooth_step(2.0 * r / rho - 1.0);
                zeta.powu(p) * zeta.conj().powu(q) * cutoff
            }
            TestFunction::Cell { x0, y0, eps } => {
                let inside = z.re >= x0 && z.re < x0 + eps && z.im >= y0 && z.im < y0 + eps;
                Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
            }
        }
    }

    pub fn integrate(&self, mu: &PointMeasure) -> Complex64 {
        mu.integrate(|z| self.eval(z))
    }
}

/// `(A^m φ)(ξ)` for each `ξ`, where `Aφ(ξ) = (1/d) Σ_{ζ ∈ F(ξ)} φ(ζ)`.
pub fn transfer_apply(
    corr: &Correspondence,
    phi: &TestFunction,
    points: &[Complex64],
    m: usize,
    budget: usize,
) -> Result<Vec<Complex64>> {
    points
        .iter()
        .map(|&xi| Ok(phi.integrate(&exact_pushforward(corr, xi, m, DEFAULT_PRUNE_TOL, budget)?)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceResidual {
    pub per_function: Vec<f64>,
    pub max: f64,
}

/// `|<(1/d) F_* μ - μ, φ>|` for each `φ` in the dictionary.
pub fn invariance_residual(
    corr: &Correspondence,
    mu: &PointMeasure,
    dict: &[TestFunction],
) -> Result<InvarianceResidual> {
    let pushed = push_once(corr, mu)?.scaled(1.0 / corr.degree() as f64);
    let per_function: Vec<f64> = dict
        .iter()
        .map(|phi| (phi.integrate(&pushed) - phi.integrate(mu)).norm())
        .collect();
    let max = per_function.iter().copied().fold(0.0, f64::max);
    Ok(InvarianceResidual { per_function, max })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn cutoff_profile() {
        let phi = TestFunction::Moment { p: 0, q: 0, rho: 4.0 };
        assert_eq!(phi.eval(c(1.9)), c(1.0));
        assert_eq!(phi.eval(c(4.0)), c(0.0));
        let mid = phi.eval(c(3.0)).re;
        assert!(mid > 0.0 && mid < 1.0);
        let phi = TestFunction::Moment { p: 2, q: 1, rho: 4.0 };
        let z = Complex64::new(0.5, 1.0);
        assert!((phi.eval(z) - (z / 4.0).powu(2) * (z / 4.0).conj()).norm() < 1e-15);
    }

    #[test]
    fn dictionary_size() {
        assert_eq!(TestFunction::moment_dictionary(4, 1.0).len(), 15);
    }

    #[test]
    fn transfer_of_constant_is_constant() {
        let corr = Correspondence::parse("w^2 - z").unwrap();
        let out = transfer_apply(&corr, &TestFunction::Constant(1.0), &[c(4.0), c(-3.0)], 3, 1000).unwrap();
        for v in out {
            assert!((v - c(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn transfer_of_real_part() {
        let corr = Correspondence::parse("w^2 - z").unwrap();
        let out = transfer_apply(&corr, &TestFunction::RealPart, &[c(4.0)], 1, 10).unwrap();
        assert!(out[0].norm() < 1e-15);
        let constant = Correspondence::parse("w^2 - 1").unwrap();
        let out = transfer_apply(&constant, &TestFunction::RealPart, &[c(5.0)], 1, 10).unwrap();
        assert!(out[0].norm() < 1e-15);
    }

    #[test]
    fn invariance_of_fixed_and_moving_points() {
        let constant = Correspondence::parse("w^2 - 1").unwrap();
        let mu = PointMeasure::uniform(&[c(-1.0), c(1.0)]);
        let dict = TestFunction::moment_dictionary(4, 4.0);
        assert_eq!(invariance_residual(&constant, &mu, &dict).unwrap().max, 0.0);

        let moving = Correspondence::parse("w^2 - z").unwrap();
        assert!(invariance_residual(&moving, &PointMeasure::dirac(c(3.0)), &dict).unwrap().max > 0.0);
    }
}
