//! Simultaneous root finding (Aberth-Ehrlich) with post-hoc multiplicity
//! clustering.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64;
use num_traits::Zero;

use super::unipoly::{Degree, UniPoly};
use crate::error::{Error, Result};

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-7;
pub const MAX_ITERATIONS: usize = 200;
const STEP_TOL: f64 = 1e-14;
// accepted backward error for roots that stall (multiple roots converge linearly)
const STALL_BACKWARD_TOL: f64 = 1e-12;
const START_ANGLE: f64 = 0.7;

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub value: SpherePoint,
    pub multiplicity: usize,
}

/// Roots counted with multiplicity. Finite roots come first in
/// lexicographic `(re, im)` order; a root at infinity, if any, comes last.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RootMultiset {
    pub roots: Vec<Root>,
    /// max |p(root)| over finite roots
    pub residual: f64,
}

impl RootMultiset {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn infinite_multiplicity(&self) -> usize {
        self.roots
            .iter()
            .filter(|r| r.value.is_infinite())
            .map(|r| r.multiplicity)
            .sum()
    }

    /// Finite roots with their multiplicities.
    pub fn finite(&self) -> impl Iterator<Item = (Complex64, usize)> + '_ {
        self.roots
            .iter()
            .filter_map(|r| r.value.finite().map(|z| (z, r.multiplicity)))
    }

    /// Finite roots repeated according to multiplicity.
    pub fn finite_expanded(&self) -> Vec<Complex64> {
        self.finite()
            .flat_map(|(z, m)| std::iter::repeat_n(z, m))
            .collect()
    }

    /// The finite root closest to `target`.
    pub fn nearest(&self, target: Complex64) -> Option<Complex64> {
        self.finite()
            .map(|(z, _)| z)
            .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
    }

    pub(crate) fn push_infinity(&mut self, multiplicity: usize) {
        if multiplicity > 0 {
            self.roots.push(Root {
                value: SpherePoint::Infinity,
                multiplicity,
            });
        }
    }
}

pub fn lex_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// All roots of `p` counted with multiplicity. Roots closer than
/// `cluster_tol` are merged into one root whose multiplicity is the cluster
/// size.
pub fn poly_roots(p: &UniPoly, cluster_tol: f64) -> Result<RootMultiset> {
    let degree = match p.degree() {
        Degree::Finite(d) if d >= 1 => d,
        _ => {
            return Err(Error::InvalidInput(format!(
                "root finding needs degree >= 1, got {}",
                p.degree()
            )))
        }
    };
    let raw = raw_roots(p)?;
    debug_assert_eq!(raw.len(), degree);
    let roots = cluster(raw, cluster_tol);
    let residual = roots
        .iter()
        .filter_map(|r| r.value.finite())
        .map(|z| p.eval(z).norm())
        .fold(0.0, f64::max);
    Ok(RootMultiset { roots, residual })
}

/// Roots without clustering, one entry per root.
pub fn raw_roots(p: &UniPoly) -> Result<Vec<Complex64>> {
    let coeffs = p.coeffs();
    let zeros_at_origin = coeffs.iter().take_while(|c| c.is_zero()).count();
    let mut roots = vec![Complex64::zero(); zeros_at_origin];
    let reduced = UniPoly::new(coeffs[zeros_at_origin..].to_vec());
    match reduced.degree() {
        Degree::Finite(0) | Degree::NegInfinity => {}
        Degree::Finite(1) => roots.push(-reduced.coeff(0) / reduced.coeff(1)),
        Degree::Finite(_) => roots.extend(aberth(&reduced)?),
    }
    Ok(roots)
}

fn aberth(p: &UniPoly) -> Result<Vec<Complex64>> {
    let n = p.coeffs().len() - 1;
    let radius = p.cauchy_bound();
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, TAU * k as f64 / n as f64 + START_ANGLE))
        .collect();
    let mut done = vec![false; n];

    for _ in 0..MAX_ITERATIONS {
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (v, dv) = p.eval_with_derivative(z[k]);
            if v.is_zero() {
                done[k] = true;
                continue;
            }
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let denom = dv / v - repulsion;
            if !denom.is_finite() || denom.is_zero() {
                // coincident iterates; nudge apart deterministically
                let bump = Complex64::new(1e-8, 1e-8) * (1.0 + z[k].norm());
                z[k] += bump;
                continue;
            }
            let step = denom.inv();
            z[k] -= step;
            if step.norm() < STEP_TOL * (1.0 + z[k].norm()) {
                done[k] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }

    let stalled_ok = z
        .iter()
        .all(|&r| p.eval(r).norm() <= STALL_BACKWARD_TOL * p.abs_eval(r).max(f64::MIN_POSITIVE));
    if stalled_ok {
        Ok(z)
    } else {
        Err(Error::NonConvergence {
            iterations: MAX_ITERATIONS,
        })
    }
}

/// Single-linkage clustering of roots within `tol`; each cluster is
/// replaced by its centroid with multiplicity equal to its size.
fn cluster(mut raw: Vec<Complex64>, tol: f64) -> Vec<Root> {
    raw.sort_by(lex_cmp);
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if raw[j].re - raw[i].re > tol {
                break;
            }
            if (raw[j] - raw[i]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[b.max(a)] = a.min(b);
            }
        }
    }
    let mut sums: Vec<(Complex64, usize)> = vec![(Complex64::zero(), 0); n];
    for (i, &z) in raw.iter().enumerate() {
        let r = find(&mut parent, i);
        sums[r].0 += z;
        sums[r].1 += 1;
    }
    let mut roots: Vec<Root> = sums
        .into_iter()
        .filter(|(_, m)| *m > 0)
        .map(|(s, m)| Root {
            value: SpherePoint::Finite(s / m as f64),
            multiplicity: m,
        })
        .collect();
    roots.sort_by(|a, b| match (a.value, b.value) {
        (SpherePoint::Finite(x), SpherePoint::Finite(y)) => lex_cmp(&x, &y),
        _ => Ordering::Equal,
    });
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn two_simple_roots() {
        let roots = poly_roots(&UniPoly::from_real(&[-1.0, 0.0, 1.0]), DEFAULT_CLUSTER_TOL).unwrap();
        let found: Vec<_> = roots.finite().collect();
        assert_eq!(found.len(), 2);
        assert!((found[0].0 - re(-1.0)).norm() < 1e-14);
        assert!((found[1].0 - re(1.0)).norm() < 1e-14);
        assert!(found.iter().all(|&(_, m)| m == 1));
    }

    #[test]
    fn double_root_at_origin() {
        let roots = poly_roots(&UniPoly::from_real(&[0.0, 0.0, 1.0]), DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(roots.roots.len(), 1);
        assert_eq!(roots.roots[0].multiplicity, 2);
        assert_eq!(roots.roots[0].value, SpherePoint::Finite(re(0.0)));
    }

    /// Synthetic division by the integer candidates -1, 1, 2 leaves no remainder,
    /// so these are the roots of w^3 - 2w^2 - w + 2.
    #[test]
    fn cubic_with_integer_roots() {
        let p = UniPoly::from_real(&[2.0, -1.0, -2.0, 1.0]);
        for cand in [-1.0, 1.0, 2.0] {
            let rem = p.coeffs().iter().rev().fold(re(0.0), |acc, &c| acc * cand + c);
            assert_eq!(rem, re(0.0));
        }
        let roots = poly_roots(&p, DEFAULT_CLUSTER_TOL).unwrap();
        let found: Vec<_> = roots.finite().map(|(z, _)| z).collect();
        for (got, want) in found.iter().zip([-1.0, 1.0, 2.0]) {
            assert!((got - re(want)).norm() < 1e-12);
        }
        assert!(roots.residual < 1e-12);
    }

    #[test]
    fn nonzero_double_root_is_clustered() {
        let p = UniPoly::from_roots(&[re(1.0), re(1.0), re(-2.0)]);
        let roots = poly_roots(&p, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(roots.total_multiplicity(), 3);
        let one = roots.roots.iter().find(|r| r.multiplicity == 2).unwrap();
        assert!((one.value.finite().unwrap() - re(1.0)).norm() < 1e-7);
    }

    #[test]
    fn constant_is_rejected() {
        assert!(poly_roots(&UniPoly::from_real(&[3.0]), DEFAULT_CLUSTER_TOL).is_err());
    }

    #[test]
    fn output_is_sorted() {
        let rs = [re(3.0), Complex64::new(-1.0, 2.0), Complex64::new(-1.0, -2.0), re(0.5)];
        let roots = poly_roots(&UniPoly::from_roots(&rs), DEFAULT_CLUSTER_TOL).unwrap();
        let found: Vec<_> = roots.finite().map(|(z, _)| z).collect();
        assert!(found.windows(2).all(|w| lex_cmp(&w[0], &w[1]) != Ordering::Greater));
    }
}
