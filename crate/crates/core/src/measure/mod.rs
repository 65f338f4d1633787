//! Atomic measures, their pushforwards under a correspondence, the transfer
//! operator and the distances used to judge equidistribution.

mod distance;
mod push;
mod sample;
mod test_fn;

pub use distance::{convergence_report, measure_distance, ConvergenceReport, ConvergenceRow, Distance, ReportOptions};
pub use push::{exact_pushforward, push_from_infinity, push_once, InfinityPushforward};
pub use sample::{sample_orbit_measure, CHAIN_LENGTH};
pub use test_fn::{invariance_residual, transfer_apply, InvarianceResidual, TestFunction};

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::lex_cmp;

pub const DEFAULT_PRUNE_TOL: f64 = 1e-9;
pub const DEFAULT_BUDGET: usize = 2_000_000;
/// Tolerance for merging atoms that are the same point up to rounding.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub point: Complex64,
    pub weight: f64,
}

/// A finite positive combination of Dirac masses, plus optional mass at infinity.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointMeasure {
    atoms: Vec<Atom>,
    at_infinity: f64,
}

impl PointMeasure {
    pub fn dirac(a: Complex64) -> Self {
        Self::from_atoms(vec![Atom { point: a, weight: 1.0 }])
    }

    pub fn dirac_at_infinity() -> Self {
        Self {
            atoms: Vec::new(),
            at_infinity: 1.0,
        }
    }

    /// Drops non-positive weights and sorts; no merging.
    pub fn from_atoms(mut atoms: Vec<Atom>) -> Self {
        atoms.retain(|a| a.weight > 0.0);
        atoms.sort_by(atom_cmp);
        Self {
            atoms,
            at_infinity: 0.0,
        }
    }

    /// Equal weights `1/len` on the given points, merged at [`MERGE_TOL`].
    pub fn uniform(points: &[Complex64]) -> Self {
        let w = 1.0 / points.len() as f64;
        Self::from_atoms(points.iter().map(|&point| Atom { point, weight: w }).collect())
            .coalesced(MERGE_TOL)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.at_infinity == 0.0
    }

    pub fn at_infinity(&self) -> f64 {
        self.at_infinity
    }

    pub(crate) fn set_at_infinity(&mut self, mass: f64) {
        self.at_infinity = mass;
    }

    /// Total mass, including any mass at infinity.
    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum::<f64>() + self.at_infinity
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for a in &mut self.atoms {
            a.weight *= factor;
        }
        self.at_infinity *= factor;
        self
    }

    pub fn normalized(self) -> Self {
        let t = self.total();
        self.scaled(1.0 / t)
    }

    /// `∫ f dμ` over the finite atoms.
    pub fn integrate(&self, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        self.atoms.iter().map(|a| f(a.point) * a.weight).sum()
    }

    pub fn mean(&self) -> Complex64 {
        self.integrate(|z| z)
    }

    /// Merges atoms closer than `tol`. Atoms are visited in canonical order and
    /// each joins the first earlier representative within `tol`, so the result
    /// depends only on the multiset of atoms.
    pub fn coalesced(self, tol: f64) -> Self {
        let mut atoms = self.atoms;
        atoms.sort_by(atom_cmp);
        if tol <= 0.0 {
            return Self {
                atoms,
                at_infinity: self.at_infinity,
            };
        }
        let cell = |z: Complex64| ((z.re / tol).floor() as i64, (z.im / tol).floor() as i64);
        let mut reps: Vec<Atom> = Vec::new();
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for atom in atoms {
            let (cx, cy) = cell(atom.point);
            let mut found: Option<usize> = None;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for &r in grid.get(&(cx + dx, cy + dy)).into_iter().flatten() {
                        if (reps[r].point - atom.point).norm() <= tol && found.is_none_or(|f| r < f) {
                            found = Some(r);
                        }
                    }
                }
            }
            match found {
                Some(r) => reps[r].weight += atom.weight,
                None => {
                    grid.entry((cx, cy)).or_default().push(reps.len());
                    reps.push(atom);
                }
            }
        }
        reps.sort_by(atom_cmp);
        Self {
            atoms: reps,
            at_infinity: self.at_infinity,
        }
    }
}

fn atom_cmp(a: &Atom, b: &Atom) -> std::cmp::Ordering {
    lex_cmp(&a.point, &b.point).then(a.weight.total_cmp(&b.weight))
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    atoms: Vec<[f64; 3]>,
    total: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    infinity: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl Serialize for PointMeasure {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MeasureJson {
            atoms: self
                .atoms
                .iter()
                .map(|a| [a.point.re, a.point.im, a.weight])
                .collect(),
            total: self.total(),
            infinity: self.at_infinity,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointMeasure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = MeasureJson::deserialize(d)?;
        if raw.atoms.iter().any(|a| !(a[2] > 0.0)) || raw.infinity < 0.0 {
            return Err(serde::de::Error::custom("atom weights must be positive"));
        }
        let mut m = Self::from_atoms(
            raw.atoms
                .iter()
                .map(|&[re, im, weight]| Atom {
                    point: Complex64::new(re, im),
                    weight,
                })
                .collect(),
        );
        m.at_infinity = raw.infinity;
        let total = m.total();
        if (total - raw.total).abs() > 1e-9 * total.max(1.0) {
            return Err(serde::de::Error::custom(format!(
                "total {} does not match the atom weights {total}",
                raw.total
            )));
        }
        Ok(m)
    }
}
