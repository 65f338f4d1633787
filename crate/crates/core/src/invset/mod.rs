//! Minimal Hutchinson invariant sets of `T_n` on a square grid, with Cantor
//! diagnostics, containment checks and attracting periodic points.

mod cantor;
mod minset;
mod periodic;

pub use cantor::{cantor_diagnostics, CantorReport, CantorRow};
pub use minset::{min_invariant_set, min_invariant_set_from, DEFAULT_MAX_ATOMS};
pub use periodic::{find_periodic_points, PeriodicOrbit};

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correspondence::{certify, Certificate, FamilySpec};
use crate::diffop::{DiffOperator, TnBuild};
use crate::error::{Error, Result};

pub const CERTIFY_SAMPLES_PER_DISK: usize = 64;
// grid origin offset in cells, keeps simple points off cell boundaries
const GRID_SHIFT: f64 = 0.381_966_011_250_105;

/// `T_n` together with its family and a passing certificate.
pub struct CertifiedTn {
    pub build: TnBuild,
    pub family: FamilySpec,
    pub certificate: Certificate,
}

pub fn certified_tn(op: &DiffOperator, n: u64) -> Result<CertifiedTn> {
    let build = op.build_tn(n)?;
    let family = build.family.clone().ok_or_else(|| {
        Error::HypothesisViolation(
            "T_n has no perturbative family: T must be non-degenerate with Q_k of simple zeros".into(),
        )
    })?;
    let certificate = certify(&family, CERTIFY_SAMPLES_PER_DISK)?;
    if !certificate.pass {
        return Err(Error::NotCertified(Box::new(certificate)));
    }
    Ok(CertifiedTn {
        build,
        family,
        certificate,
    })
}

pub type Cell = (i64, i64);

/// Occupied cells of side `eps` inside the square `[origin, origin + extent·eps)^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSet {
    pub eps: f64,
    pub origin: [f64; 2],
    pub extent: i64,
    /// Generation of the first orbit point seen in each cell.
    cells: BTreeMap<Cell, u32>,
    /// Orbit points kept per cell; not serialized.
    reps: HashMap<Cell, Vec<Complex64>>,
    pub truncated: bool,
}

impl CellSet {
    /// Empty grid whose bounding square contains `D(0, radius)`.
    pub fn covering(eps: f64, radius: f64) -> Self {
        let o = -radius - GRID_SHIFT * eps;
        Self {
            eps,
            origin: [o, o],
            extent: ((2.0 * radius) / eps).ceil() as i64 + 2,
            cells: BTreeMap::new(),
            reps: HashMap::new(),
            truncated: false,
        }
    }

    pub fn cell_of(&self, z: Complex64) -> Cell {
        (
            ((z.re - self.origin[0]) / self.eps).floor() as i64,
            ((z.im - self.origin[1]) / self.eps).floor() as i64,
        )
    }

    pub fn center(&self, c: Cell) -> Complex64 {
        Complex64::new(
            self.origin[0] + (c.0 as f64 + 0.5) * self.eps,
            self.origin[1] + (c.1 as f64 + 0.5) * self.eps,
        )
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.cells.contains_key(&c)
    }

    pub fn contains_point(&self, z: Complex64) -> bool {
        self.contains(self.cell_of(z))
    }

    pub fn generation(&self, c: Cell) -> Option<u32> {
        self.cells.get(&c).copied()
    }

    /// Occupied cells in lexicographic order.
    pub fn cells(&self) -> impl Iterator<Item = (Cell, u32)> + '_ {
        self.cells.iter().map(|(&c, &g)| (c, g))
    }

    pub fn representatives(&self, c: Cell) -> &[Complex64] {
        self.reps.get(&c).map_or(&[], Vec::as_slice)
    }

    /// Whether an existing point lies within `radius` of `z`, searching the
    /// cell of `z` and its eight neighbours.
    pub(crate) fn has_point_near(&self, z: Complex64, radius: f64) -> bool {
        let (cx, cy) = self.cell_of(z);
        (-1..=1).any(|dx| {
            (-1..=1).any(|dy| {
                self.representatives((cx + dx, cy + dy))
                    .iter()
                    .any(|p| (p - z).norm() < radius)
            })
        })
    }

    /// Records `z` at `generation`; returns true when its cell was empty.
    pub(crate) fn insert(&mut self, z: Complex64, generation: u32) -> bool {
        let c = self.cell_of(z);
        self.reps.entry(c).or_default().push(z);
        let mut fresh = false;
        self.cells
            .entry(c)
            .and_modify(|g| *g = (*g).min(generation))
            .or_insert_with(|| {
                fresh = true;
                generation
            });
        fresh
    }

    /// Number of cells in exactly one of the two sets.
    pub fn symmetric_difference(&self, other: &CellSet) -> usize {
        let only_self = self.cells.keys().filter(|c| !other.cells.contains_key(c)).count();
        let only_other = other.cells.keys().filter(|c| !self.cells.contains_key(c)).count();
        only_self + only_other
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        const PALETTE: [[u8; 3]; 8] = [
            [255, 255, 255],
            [230, 25, 75],
            [60, 180, 75],
            [255, 225, 25],
            [0, 130, 200],
            [245, 130, 48],
            [145, 30, 180],
            [70, 240, 240],
        ];
        let (x0, x1, y0, y1) = match self.bounds() {
            Some(b) => b,
            None => return b"P6\n1 1\n255\n\0\0\0".to_vec(),
        };
        let (w, h) = ((x1 - x0 + 3) as usize, (y1 - y0 + 3) as usize);
        let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
        let header = out.len();
        out.resize(header + 3 * w * h, 0);
        for (&(ix, iy), &g) in &self.cells {
            let col = (ix - x0 + 1) as usize;
            // image rows run top to bottom, imaginary axis bottom to top
            let row = (y1 - iy + 1) as usize;
            let at = header + 3 * (row * w + col);
            out[at..at + 3].copy_from_slice(&PALETTE[(g as usize).min(7)]);
        }
        out
    }

    fn bounds(&self) -> Option<(i64, i64, i64, i64)> {
        let mut it = self.cells.keys();
        let &(x, y) = it.next()?;
        Some(it.fold((x, x, y, y), |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y))))
    }
}

#[derive(Serialize, Deserialize)]
struct CellSetJson {
    eps: f64,
    origin: [f64; 2],
    extent: i64,
    truncated: bool,
    cells: Vec<[i64; 3]>,
}

impl Serialize for CellSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CellSetJson {
            eps: self.eps,
            origin: self.origin,
            extent: self.extent,
            truncated: self.truncated,
            cells: self.cells.iter().map(|(&(x, y), &g)| [x, y, i64::from(g)]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CellSet {
    /// Restores cells and generations; per-cell orbit points are not stored,
    /// so each cell gets its center as representative.
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = CellSetJson::deserialize(d)?;
        let mut set = CellSet {
            eps: raw.eps,
            origin: raw.origin,
            extent: raw.extent,
            cells: BTreeMap::new(),
            reps: HashMap::new(),
            truncated: raw.truncated,
        };
        for [x, y, g] in raw.cells {
            let g = u32::try_from(g).map_err(serde::de::Error::custom)?;
            set.cells.insert((x, y), g);
            set.reps.insert((x, y), vec![set.center((x, y))]);
        }
        Ok(set)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Containment {
    pub pass: bool,
    /// Largest distance from an occupied cell center to the nearest center.
    pub margin: f64,
}

pub fn neighborhood_containment(set: &CellSet, centers: &[Complex64], eps_n: f64) -> Containment {
    let margin = set
        .cells
        .keys()
        .map(|&c| {
            let z = set.center(c);
            centers.iter().map(|u| (z - u).norm()).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Containment {
        pass: margin <= eps_n,
        margin,
    }
}
