use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::certified_tn;
use crate::correspondence::{branch_continue, BranchPoint, Correspondence};
use crate::diffop::DiffOperator;
use crate::error::Result;

const MAX_ITERATIONS: usize = 200;
const MIN_STEP: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicOrbit {
    /// Branch labels, applied left to right; label `l` follows the fixed point `u_l`.
    pub word: Vec<usize>,
    pub point: Complex64,
    pub period: usize,
    /// Product of branch derivatives around the cycle.
    pub multiplier: Complex64,
    pub residual: f64,
}

/// Branch `l` at `z`: the continuation of the fiber point `u_l` over `u_l`.
fn branch(corr: &Correspondence, fixed: &[Complex64], l: usize, z: Complex64) -> Result<BranchPoint> {
    let u = fixed[l];
    let start = BranchPoint::new(corr, u, u)?;
    branch_continue(corr, start, z, MIN_STEP)
}

/// `w_I(z)` with the derivative of the composition.
fn apply_word(corr: &Correspondence, fixed: &[Complex64], word: &[usize], z: Complex64) -> Result<(Complex64, Complex64)> {
    let mut z = z;
    let mut deriv = Complex64::new(1.0, 0.0);
    for &l in word {
        let bp = branch(corr, fixed, l, z)?;
        deriv *= bp.deriv;
        z = bp.w;
    }
    Ok((z, deriv))
}

fn solve_word(corr: &Correspondence, fixed: &[Complex64], word: &[usize], tol: f64) -> Result<Option<PeriodicOrbit>> {
    let mut z = fixed[0];
    for _ in 0..MAX_ITERATIONS {
        let (next, _) = apply_word(corr, fixed, word, z)?;
        let step = (next - z).norm();
        z = next;
        if step <= 0.1 * tol {
            break;
        }
    }
    let (image, multiplier) = apply_word(corr, fixed, word, z)?;
    let residual = (image - z).norm();
    if residual > tol || multiplier.norm() >= 1.0 {
        return Ok(None);
    }
    Ok(Some(PeriodicOrbit {
        word: word.to_vec(),
        point: z,
        period: word.len(),
        multiplier,
        residual,
    }))
}

/// Words of length `len` over `d` labels in lexicographic order.
fn words(d: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| (0..d).map(move |l| [w.as_slice(), &[l]].concat()))
            .collect();
    }
    out
}

/// Attracting periodic points `z = w_I(z)` for words up to `max_len`,
/// breadth-first by length, stopping after `count` distinct points
/// (distinct meaning more than `10 tol` apart).
pub fn find_periodic_points(
    op: &DiffOperator,
    n: u64,
    max_len: usize,
    count: usize,
    tol: f64,
) -> Result<Vec<PeriodicOrbit>> {
    let tn = certified_tn(op, n)?;
    let corr = &tn.build.correspondence;
    let fixed = &tn.certificate.fixed_points;
    let mut found: Vec<PeriodicOrbit> = Vec::new();
    for len in 1..=max_len {
        let batch: Vec<Option<PeriodicOrbit>> = words(fixed.len(), len)
            .par_iter()
            .map(|word| match solve_word(corr, fixed, word, tol) {
                Ok(orbit) => orbit,
                Err(e) => {
                    log::info!("word {word:?} skipped: {e}");
                    None
                }
            })
            .collect();
        for orbit in batch.into_iter().flatten() {
            if found.iter().all(|o| (o.point - orbit.point).norm() > 10.0 * tol) {
                found.push(orbit);
                if found.len() >= count {
                    return Ok(found);
                }
            }
        }
    }
    Ok(found)
}
