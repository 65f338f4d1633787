use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use super::{Atom, PointMeasure, MERGE_TOL};
use crate::algebra::SpherePoint;
use crate::correspondence::Correspondence;
use crate::error::{Error, Result};

/// Samples per independent chain. Chain `c` uses the seeded generator
/// advanced by `c` jumps of 2^128 steps, so the output depends on the seed
/// alone and not on how chains are scheduled.
pub const CHAIN_LENGTH: usize = 4096;

/// One step of the walk: a fiber point chosen with probability `mult / d`.
fn step(corr: &Correspondence, z: Complex64, rng: &mut Xoshiro256PlusPlus) -> Result<Complex64> {
    let fiber = corr.fiber(z)?;
    let mut pick = rng.gen_range(0..corr.degree());
    for root in &fiber.roots {
        if pick < root.multiplicity {
            return match root.value {
                SpherePoint::Finite(w) => Ok(w),
                SpherePoint::Infinity => Err(Error::HypothesisViolation(format!(
                    "random walk reached infinity from z = {z}"
                ))),
            };
        }
        pick -= root.multiplicity;
    }
    unreachable!("fiber multiplicities sum to the degree")
}

/// Empirical measure of random walks started at `a`: each chain discards
/// `burn_in` steps and then records every further position with weight
/// `1/samples`.
pub fn sample_orbit_measure(
    corr: &Correspondence,
    a: Complex64,
    burn_in: usize,
    samples: usize,
    seed: u64,
) -> Result<PointMeasure> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    let chains = samples.div_ceil(CHAIN_LENGTH);
    let mut rngs = Vec::with_capacity(chains);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    for _ in 0..chains {
        rngs.push(rng.clone());
        rng.jump();
    }
    let weight = 1.0 / samples as f64;
    let per_chain: Vec<Vec<Atom>> = rngs
        .into_par_iter()
        .enumerate()
        .map(|(c, mut rng)| {
            let len = CHAIN_LENGTH.min(samples - c * CHAIN_LENGTH);
            let mut z = a;
            for _ in 0..burn_in {
                z = step(corr, z, &mut rng)?;
            }
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                z = step(corr, z, &mut rng)?;
                out.push(Atom { point: z, weight });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(PointMeasure::from_atoms(per_chain.concat()).coalesced(MERGE_TOL))
}
