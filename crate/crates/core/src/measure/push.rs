use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{Atom, PointMeasure, MERGE_TOL};
use crate::algebra::{poly_roots, to_shifted_basis, RootMultiset};
use crate::correspondence::Correspondence;
use crate::error::{Error, Result};

/// Images of every finite atom, weighted by multiplicity; roots at infinity
/// feed the mass at infinity.
fn push_atoms(corr: &Correspondence, mu: &PointMeasure) -> Result<PointMeasure> {
    let images: Vec<(Vec<Atom>, f64)> = mu
        .atoms()
        .par_iter()
        .map(|a| {
            let fiber = corr.fiber(a.point)?;
            let finite = fiber
                .finite()
                .map(|(point, mult)| Atom {
                    point,
                    weight: a.weight * mult as f64,
                })
                .collect();
            Ok((finite, a.weight * fiber.infinite_multiplicity() as f64))
        })
        .collect::<Result<_>>()?;
    let mut infinity = 0.0;
    let mut atoms = Vec::with_capacity(images.iter().map(|(v, _)| v.len()).sum());
    for (finite, inf) in images {
        atoms.extend(finite);
        infinity += inf;
    }
    let mut out = PointMeasure::from_atoms(atoms);
    out.set_at_infinity(infinity);
    Ok(out)
}

/// `F_* mu`: total mass is multiplied by `d`.
pub fn push_once(corr: &Correspondence, mu: &PointMeasure) -> Result<PointMeasure> {
    if mu.at_infinity() > 0.0 {
        return Err(Error::InvalidInput(
            "measure has mass at infinity; use push_from_infinity".into(),
        ));
    }
    Ok(push_atoms(corr, mu)?.coalesced(MERGE_TOL))
}

/// `d^-m (F^m)_* δ_a`, merging atoms within `prune_tol` after every level.
pub fn exact_pushforward(
    corr: &Correspondence,
    a: Complex64,
    m: usize,
    prune_tol: f64,
    budget: usize,
) -> Result<PointMeasure> {
    let inv_d = 1.0 / corr.degree() as f64;
    let mut mu = PointMeasure::dirac(a);
    for level in 1..=m {
        let next = push_once(corr, &mu)?.scaled(inv_d).coalesced(prune_tol);
        if next.len() > budget {
            return Err(budget_exceeded(budget, level - 1, mu));
        }
        log::debug!("level {level}: {} atoms", next.len());
        mu = next;
    }
    Ok(mu)
}

fn budget_exceeded(budget: usize, completed_level: usize, measure: PointMeasure) -> Error {
    Error::BudgetExceeded {
        budget,
        completed_level,
        measure: Box::new(measure),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfinityPushforward {
    /// `d^-m (F^m)_* δ_∞`, including the mass still at infinity.
    pub measure: PointMeasure,
    /// Mass at infinity after each level `0..=m`.
    pub infinity_mass: Vec<f64>,
    /// Number of finite points in the fiber over infinity.
    pub finite_at_infinity: usize,
}

/// Fiber over `z = ∞`: the zeros of the top `z`-degree coefficient, with the
/// remaining `d - d1` branches staying at infinity.
fn fiber_at_infinity(corr: &Correspondence) -> Result<RootMultiset> {
    let curve = corr.curve();
    let d = corr.degree();
    let top = curve.row(curve.deg_z());
    if corr.is_constant() {
        return Err(Error::HypothesisUnmet(
            "the curve does not depend on z".into(),
        ));
    }
    if to_shifted_basis(curve, d).is_err() {
        return Err(Error::HypothesisUnmet(format!(
            "total degree exceeds the fiber degree {d}"
        )));
    }
    let d1 = top.degree().finite().unwrap_or(0);
    if d1 == 0 {
        return Err(Error::HypothesisUnmet(
            "leading perturbation term is constant in w: infinity is totally invariant".into(),
        ));
    }
    let mut roots = poly_roots(&top, corr.cluster_tol())?;
    roots.push_infinity(d - d1);
    Ok(roots)
}

/// Pushforward seeded at infinity. The lowest-index perturbation term must be
/// non-constant, so that part of the mass leaves infinity at every level.
pub fn push_from_infinity(corr: &Correspondence, m: usize, budget: usize) -> Result<InfinityPushforward> {
    let at_inf = fiber_at_infinity(corr)?;
    let d = corr.degree() as f64;
    let stay = at_inf.infinite_multiplicity() as f64;
    let mut mu = PointMeasure::dirac_at_infinity();
    let mut infinity_mass = vec![1.0];
    for level in 1..=m {
        let omega = mu.at_infinity();
        let mut finite = mu.clone();
        finite.set_at_infinity(0.0);
        let mut next = push_atoms(corr, &finite)?;
        let mut atoms = next.atoms().to_vec();
        atoms.extend(at_inf.finite().map(|(point, mult)| Atom {
            point,
            weight: omega * mult as f64,
        }));
        let inf = next.at_infinity() + omega * stay;
        next = PointMeasure::from_atoms(atoms);
        next.set_at_infinity(inf);
        next = next.scaled(1.0 / d).coalesced(super::DEFAULT_PRUNE_TOL);
        if next.len() > budget {
            return Err(budget_exceeded(budget, level - 1, mu));
        }
        infinity_mass.push(next.at_infinity());
        mu = next;
    }
    Ok(InfinityPushforward {
        measure: mu,
        infinity_mass,
        finite_at_infinity: at_inf.total_multiplicity() - at_inf.infinite_multiplicity(),
    })
}
