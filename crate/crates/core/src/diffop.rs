//! Linear differential operators `T = Σ Q_j(w) D^j` and the degree-`n`
//! correspondences `T_n` they induce.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    falling_ratio, parse_unipoly, parse_with_vars, BiPoly, Degree, ShiftedForm, UniPoly,
};
use crate::correspondence::{certify, Correspondence, FamilySpec};
use crate::error::{Error, Result};

pub const DEFAULT_N_MAX: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct DiffOperator {
    q: Vec<UniPoly>,
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    k: usize,
    #[serde(rename = "Q")]
    q: Vec<String>,
}

impl DiffOperator {
    /// `q[j]` is the coefficient of `D^j`; trailing zero coefficients are dropped.
    pub fn new(mut q: Vec<UniPoly>) -> Result<Self> {
        while q.last().is_some_and(UniPoly::is_zero) {
            q.pop();
        }
        if q.len() < 2 {
            return Err(Error::InvalidInput(
                "operator must have order k >= 1 with Q_k nonzero".into(),
            ));
        }
        Ok(Self { q })
    }

    /// Parses `(w^2-1)*D^2 + D`; `D^j` stands for the `j`-th derivative in `w`
    /// and every coefficient multiplies from the left.
    pub fn parse(src: &str) -> Result<Self> {
        let p = parse_with_vars(src, ['D', 'w'])?;
        Self::new((0..=p.deg_z()).map(|j| p.row(j)).collect())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: OperatorJson = serde_json::from_str(text)?;
        if raw.q.len() != raw.k + 1 {
            return Err(Error::InvalidInput(format!(
                "Q must list k + 1 = {} coefficients, got {}",
                raw.k + 1,
                raw.q.len()
            )));
        }
        let q = raw.q.iter().map(|s| parse_unipoly(s)).collect::<Result<Vec<_>>>()?;
        if q[raw.k].is_zero() {
            return Err(Error::InvalidInput("Q_k must be nonzero".into()));
        }
        Self::new(q)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&OperatorJson {
            k: self.order(),
            q: self.q.iter().map(|p| p.to_string()).collect(),
        })
        .expect("operator serializes")
    }

    pub fn order(&self) -> usize {
        self.q.len() - 1
    }

    pub fn coeffs(&self) -> &[UniPoly] {
        &self.q
    }

    pub fn leading(&self) -> &UniPoly {
        &self.q[self.order()]
    }

    /// `deg Q_j - j`, or `None` for `Q_j = 0`.
    fn excess(&self, j: usize) -> Option<i64> {
        self.q[j].degree().shifted(j)
    }

    fn max_excess(&self) -> i64 {
        (0..=self.order()).filter_map(|j| self.excess(j)).max().expect("Q_k is nonzero")
    }

    /// `max_j (deg Q_j - j)` is attained at `j = k`.
    pub fn is_nondegenerate(&self) -> bool {
        self.excess(self.order()) == Some(self.max_excess())
    }

    pub fn is_exactly_solvable(&self) -> bool {
        self.max_excess() == 0
    }

    /// `T[(w - z)^n] = Σ_j (n)_j Q_j(w) (w - z)^(n - j)`, expanded in floating point.
    pub fn apply_to_shift_power(&self, n: u64) -> Result<BiPoly> {
        let k = self.order();
        if n < k as u64 {
            return Err(Error::OrderTooLarge { n, k });
        }
        let mut out = BiPoly::zero();
        let mut falling = 1.0;
        for (j, qj) in self.q.iter().enumerate() {
            if !qj.is_zero() {
                let term = &BiPoly::from_w(qj) * &BiPoly::shift_power(n as usize - j);
                out = &out + &term.scale(Complex64::new(falling, 0.0));
            }
            falling *= (n - j as u64) as f64;
        }
        Ok(out)
    }

    pub fn build_tn(&self, n: u64) -> Result<TnBuild> {
        let k = self.order();
        if n < k as u64 {
            return Err(Error::OrderTooLarge { n, k });
        }
        let nondegenerate = self.is_nondegenerate();
        if !nondegenerate {
            log::warn!("operator is degenerate; T_n is built without the guarantees");
        }
        let ratios: Vec<f64> = (0..k)
            .map(|j| falling_ratio(n, j as u64, k as u64))
            .collect::<Result<_>>()?;
        let mut normalized = BiPoly::from_w(self.leading());
        for (j, &r) in ratios.iter().enumerate() {
            if !self.q[j].is_zero() {
                let term = &BiPoly::from_w(&self.q[j]) * &BiPoly::shift_power(k - j);
                normalized = &normalized + &term.scale(Complex64::new(r, 0.0));
            }
        }
        let correspondence = Correspondence::new(normalized.clone())?;
        let family = if nondegenerate { self.family(&ratios).ok() } else { None };
        Ok(TnBuild {
            n,
            correspondence,
            normalized,
            family,
            nondegenerate,
        })
    }

    /// `R0 = Q_k`, slot `d - k + j` carries `Q_j` with weight `(n)_j / (n)_k`.
    fn family(&self, ratios: &[f64]) -> Result<FamilySpec> {
        let k = self.order();
        let d = match self.leading().degree() {
            Degree::Finite(d) if d >= 1 => d,
            _ => return Err(Error::InvalidInput("Q_k must be non-constant".into())),
        };
        let mut parts = vec![UniPoly::zero(); d + 1];
        let mut beta = vec![Complex64::default(); d + 1];
        for (j, &r) in ratios.iter().enumerate() {
            if self.q[j].is_zero() {
                continue;
            }
            // non-degeneracy forces d - k + j >= deg Q_j >= 0
            let slot = d + j - k;
            parts[slot] = self.q[j].clone();
            beta[slot] = Complex64::new(r, 0.0);
        }
        FamilySpec::new(self.leading().clone(), ShiftedForm::new(d, parts)?, beta)
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, qj) in self.q.iter().enumerate() {
            if qj.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "({qj})")?,
                1 => write!(f, "({qj})*D")?,
                _ => write!(f, "({qj})*D^{j}")?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TnBuild {
    pub n: u64,
    pub correspondence: Correspondence,
    /// `T[(w - z)^n] / ((n)_k (w - z)^(n - k))`.
    pub normalized: BiPoly,
    /// `None` when `T` is degenerate or `Q_k` is constant or has repeated zeros.
    pub family: Option<FamilySpec>,
    pub nondegenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdResult {
    /// Smallest certified degree found, if any.
    pub n: Option<u64>,
    /// Every degree tried, with its outcome, in increasing order.
    pub checked: Vec<(u64, bool)>,
}

fn certified_at(op: &DiffOperator, n: u64, samples_per_disk: usize) -> Result<bool> {
    let tn = op.build_tn(n)?;
    let Some(family) = tn.family else {
        return Ok(false);
    };
    if !tn.correspondence.has_constant_lead() {
        return Ok(false);
    }
    Ok(certify(&family, samples_per_disk)?.pass)
}

/// Smallest `n <= n_max` whose `T_n` family passes the certificate, found by
/// doubling from `k` and then bisecting. Passing is assumed monotone in `n`;
/// the answer is re-checked at `N - 1` and walked down while that passes.
pub fn hutchinson_threshold(op: &DiffOperator, n_max: u64, samples_per_disk: usize) -> Result<ThresholdResult> {
    if !op.is_nondegenerate() {
        return Err(Error::HypothesisViolation("operator is degenerate".into()));
    }
    let k = op.order() as u64;
    if n_max < k {
        return Err(Error::OrderTooLarge { n: n_max, k: k as usize });
    }
    // fails early with SimpleZeroViolation or a degree error
    FamilySpec::constant(op.leading().clone()).map_err(|e| match e {
        Error::SimpleZeroViolation { separation } => Error::HypothesisViolation(format!(
            "Q_k has clustered zeros (separation {separation:e})"
        )),
        other => other,
    })?;

    let mut candidates = Vec::new();
    let mut n = k;
    while n < n_max {
        candidates.push(n);
        n = n.saturating_mul(2);
    }
    candidates.push(n_max);
    let outcomes: Vec<bool> = candidates
        .par_iter()
        .map(|&n| certified_at(op, n, samples_per_disk))
        .collect::<Result<_>>()?;
    let mut checked: Vec<(u64, bool)> = candidates.iter().copied().zip(outcomes.iter().copied()).collect();
    let Some(first) = outcomes.iter().position(|&ok| ok) else {
        return Ok(ThresholdResult { n: None, checked });
    };
    let (mut lo, mut hi) = (if first == 0 { k - 1 } else { candidates[first - 1] }, candidates[first]);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let ok = certified_at(op, mid, samples_per_disk)?;
        checked.push((mid, ok));
        if ok {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    while hi > k {
        let ok = certified_at(op, hi - 1, samples_per_disk)?;
        checked.push((hi - 1, ok));
        if !ok {
            break;
        }
        hi -= 1;
    }
    checked.sort_unstable();
    checked.dedup();
    Ok(ThresholdResult { n: Some(hi), checked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_bipoly;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn close(a: &BiPoly, b: &BiPoly, tol: f64) -> bool {
        (a - b).max_abs_coeff() <= tol * a.max_abs_coeff().max(1.0)
    }

    #[test]
    fn classification_examples() {
        let euler = DiffOperator::parse("w*D").unwrap();
        assert!(euler.is_nondegenerate() && euler.is_exactly_solvable());
        let t = DiffOperator::parse("(w^2-1)*D^2 + D").unwrap();
        assert!(t.is_nondegenerate() && t.is_exactly_solvable());
        let bad = DiffOperator::parse("D^2 + w^3").unwrap();
        assert!(!bad.is_nondegenerate());
        assert!(!DiffOperator::parse("w*D^2").unwrap().is_exactly_solvable());
    }

    #[test]
    fn parse_and_json() {
        let t = DiffOperator::parse("(w^2-1)*D^2 + D").unwrap();
        assert_eq!(t.order(), 2);
        assert_eq!(t.coeffs()[1], UniPoly::constant(c(1.0)));
        assert!(t.coeffs()[0].is_zero());
        let back = DiffOperator::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
        assert_eq!(DiffOperator::parse(&t.to_string()).unwrap(), t);
        assert!(DiffOperator::parse("w^2 - 1").is_err());
        assert!(DiffOperator::from_json(r#"{"k": 2, "Q": ["1", "w"]}"#).is_err());
    }

    #[test]
    fn euler_operator_collapses_to_zero() {
        let tn = DiffOperator::parse("w*D").unwrap().build_tn(7).unwrap();
        assert_eq!(tn.normalized, parse_bipoly("w").unwrap());
        let fiber = tn.correspondence.fiber(Complex64::new(3.0, 1.0)).unwrap();
        assert_eq!(fiber.finite_expanded(), vec![c(0.0)]);
    }

    #[test]
    fn single_term_is_constant_correspondence() {
        let tn = DiffOperator::parse("(w^2-1)*D^2").unwrap().build_tn(10).unwrap();
        assert_eq!(tn.normalized, parse_bipoly("w^2 - 1").unwrap());
        assert!(tn.correspondence.is_constant());
    }

    #[test]
    fn test_operator_at_hundred() {
        let tn = DiffOperator::parse("(w^2-1)*D^2 + D").unwrap().build_tn(100).unwrap();
        let expect = parse_bipoly("w^2 - 1 + (w - z)/99").unwrap();
        assert!(close(&tn.normalized, &expect, 1e-15));
        let family = tn.family.unwrap();
        assert_eq!(family.beta[1], c(1.0 / 99.0));
        assert_eq!(family.beta[2], c(0.0));
        assert!(close(&family.curve(), &tn.normalized, 1e-15));
    }

    #[test]
    fn normalization_matches_expansion() {
        let t = DiffOperator::parse("(w^3 + 2)*D^3 + (w^2 - i*w)*D^2 + 3*w*D + 0.5").unwrap();
        for n in [3u64, 5, 12] {
            let full = t.apply_to_shift_power(n).unwrap();
            let tn = t.build_tn(n).unwrap();
            let scale = (0..3).fold(1.0, |acc, i| acc * (n - i) as f64);
            let rebuilt = &(&tn.normalized * &BiPoly::shift_power(n as usize - 3)).scale(c(scale));
            assert!(close(&full, rebuilt, 1e-12), "n = {n}");
        }
    }

    #[test]
    fn order_too_large() {
        let t = DiffOperator::parse("(w^2-1)*D^2 + D").unwrap();
        assert!(matches!(t.build_tn(1), Err(Error::OrderTooLarge { n: 1, k: 2 })));
    }

    #[test]
    fn degenerate_operator_has_no_family() {
        let tn = DiffOperator::parse("D^2 + w^3").unwrap().build_tn(5).unwrap();
        assert!(!tn.nondegenerate);
        assert!(tn.family.is_none());
        assert!(matches!(
            hutchinson_threshold(&DiffOperator::parse("D^2 + w^3").unwrap(), 64, 16),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn threshold_of_single_term_is_order() {
        let t = DiffOperator::parse("(w^2-1)*D^2").unwrap();
        assert_eq!(hutchinson_threshold(&t, 64, 16).unwrap().n, Some(2));
    }

    #[test]
    fn clustered_leading_zeros_are_reported() {
        let t = DiffOperator::parse("(w-1)^2*D^2 + D").unwrap();
        assert!(matches!(hutchinson_threshold(&t, 64, 16), Err(Error::HypothesisViolation(_))));
    }
}
