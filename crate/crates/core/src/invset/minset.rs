use num_complex::Complex64;
use rayon::prelude::*;

use super::{certified_tn, CellSet};
use crate::correspondence::Correspondence;
use crate::diffop::DiffOperator;
use crate::error::Result;

pub const DEFAULT_MAX_ATOMS: usize = 1_000_000;

/// Orbit closure of the lexicographically first simple zero of `Q_k` under
/// `T_n`, at resolution `eps`. Refuses uncertified `T_n`.
pub fn min_invariant_set(op: &DiffOperator, n: u64, eps: f64, max_atoms: usize) -> Result<CellSet> {
    let tn = certified_tn(op, n)?;
    let seed = tn.certificate.fixed_points[0];
    Ok(expand(&tn.build.correspondence, seed, eps, tn.certificate.m, max_atoms))
}

/// Same as [`min_invariant_set`] but seeded at an arbitrary point.
pub fn min_invariant_set_from(
    op: &DiffOperator,
    n: u64,
    eps: f64,
    max_atoms: usize,
    seed: Complex64,
) -> Result<CellSet> {
    let tn = certified_tn(op, n)?;
    Ok(expand(&tn.build.correspondence, seed, eps, tn.certificate.m, max_atoms))
}

/// Breadth-first orbit expansion. A new point within `eps/4` of a stored
/// point is not expanded again. Stops after a generation that occupies no
/// new cell, or once `max_atoms` points are stored.
pub(crate) fn expand(corr: &Correspondence, seed: Complex64, eps: f64, radius: f64, max_atoms: usize) -> CellSet {
    let mut set = CellSet::covering(eps, radius.max(seed.norm()));
    set.insert(seed, 0);
    let mut stored = 1usize;
    let mut frontier = vec![seed];
    let mut generation = 0u32;
    while !frontier.is_empty() {
        generation += 1;
        // fibers in parallel, insertion in frontier order
        let images: Vec<Vec<Complex64>> = frontier
            .par_iter()
            .map(|&z| match corr.fiber(z) {
                Ok(f) => f.finite().map(|(w, _)| w).collect(),
                Err(e) => {
                    log::warn!("fiber at {z} failed: {e}");
                    Vec::new()
                }
            })
            .collect();
        let mut next = Vec::new();
        let mut new_cell = false;
        'insert: for w in images.into_iter().flatten() {
            if set.has_point_near(w, eps / 4.0) {
                continue;
            }
            new_cell |= set.insert(w, generation);
            next.push(w);
            stored += 1;
            if stored >= max_atoms {
                set.truncated = true;
                break 'insert;
            }
        }
        log::debug!("generation {generation}: {} new points, {} cells", next.len(), set.len());
        if set.truncated || !new_cell {
            break;
        }
        frontier = next;
    }
    set
}
