use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use super::{invariance_residual, push_once, PointMeasure, TestFunction};
use crate::correspondence::Correspondence;
use crate::error::Result;
use crate::io::fmt_float;

// Grid origin offset in cells, chosen irrational-looking so simple lattice
// points (like ±1) do not land on cell boundaries.
const GRID_SHIFT: f64 = 0.381_966_011_250_105;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Distance {
    /// Total variation between the grid histograms, overflow cell included.
    pub tv: f64,
    /// `|∫ z dμ1 - ∫ z dμ2|` over the finite atoms.
    pub moment: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Bin {
    Cell(i64, i64),
    Overflow,
}

fn histogram(mu: &PointMeasure, eps: f64, window: f64) -> BTreeMap<Bin, f64> {
    let origin = -window - GRID_SHIFT * eps;
    let mut h = BTreeMap::new();
    for a in mu.atoms() {
        let bin = if a.point.norm() > window {
            Bin::Overflow
        } else {
            Bin::Cell(
                ((a.point.re - origin) / eps).floor() as i64,
                ((a.point.im - origin) / eps).floor() as i64,
            )
        };
        *h.entry(bin).or_insert(0.0) += a.weight;
    }
    if mu.at_infinity() > 0.0 {
        *h.entry(Bin::Overflow).or_insert(0.0) += mu.at_infinity();
    }
    h
}

/// Grid total variation at pitch `grid_eps` over the window `D(0, window)`.
pub fn measure_distance(mu1: &PointMeasure, mu2: &PointMeasure, grid_eps: f64, window: f64) -> Distance {
    let h1 = histogram(mu1, grid_eps, window);
    let mut h2 = histogram(mu2, grid_eps, window);
    let mut tv = 0.0;
    for (bin, w1) in h1 {
        tv += (w1 - h2.remove(&bin).unwrap_or(0.0)).abs();
    }
    tv += h2.values().map(|w| w.abs()).sum::<f64>();
    Distance {
        tv: 0.5 * tv,
        moment: (mu1.mean() - mu2.mean()).norm(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub m: usize,
    pub tv: f64,
    pub moment: f64,
    pub invariance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub seed_point: Complex64,
    pub estimator: String,
    pub rng_seed: Option<u64>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,tv,moment,invariance\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.m,
                fmt_float(r.tv),
                fmt_float(r.moment),
                fmt_float(r.invariance)
            );
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct ReportOptions {
    pub m_max: usize,
    pub grid_eps: f64,
    pub window: f64,
    pub dictionary: Vec<TestFunction>,
    pub prune_tol: f64,
    pub budget: usize,
}

/// Depth-`m` estimates for `m = 1..=m_max`, each compared with the deepest one.
/// Returns the report and the deepest estimate.
pub fn convergence_report(
    corr: &Correspondence,
    a: Complex64,
    opts: &ReportOptions,
) -> Result<(ConvergenceReport, PointMeasure)> {
    let mut estimates = Vec::with_capacity(opts.m_max);
    let mut mu = PointMeasure::dirac(a);
    let inv_d = 1.0 / corr.degree() as f64;
    for m in 1..=opts.m_max {
        mu = push_level(corr, &mu, inv_d, opts, m)?;
        estimates.push(mu.clone());
    }
    let reference = estimates.last().cloned().unwrap_or_else(|| PointMeasure::dirac(a));
    let rows = estimates
        .iter()
        .enumerate()
        .map(|(i, est)| {
            let dist = measure_distance(est, &reference, opts.grid_eps, opts.window);
            Ok(ConvergenceRow {
                m: i + 1,
                tv: dist.tv,
                moment: dist.moment,
                invariance: invariance_residual(corr, est, &opts.dictionary)?.max,
            })
        })
        .collect::<Result<_>>()?;
    Ok((
        ConvergenceReport {
            seed_point: a,
            estimator: "exact".into(),
            rng_seed: None,
            rows,
        },
        reference,
    ))
}

fn push_level(
    corr: &Correspondence,
    mu: &PointMeasure,
    inv_d: f64,
    opts: &ReportOptions,
    m: usize,
) -> Result<PointMeasure> {
    let next = push_once(corr, mu)?.scaled(inv_d).coalesced(opts.prune_tol);
    if next.len() > opts.budget {
        return Err(crate::error::Error::BudgetExceeded {
            budget: opts.budget,
            completed_level: m - 1,
            measure: Box::new(mu.clone()),
        });
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::exact_pushforward;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn distance_examples() {
        let one = PointMeasure::dirac(c(1.0));
        let minus = PointMeasure::dirac(c(-1.0));
        let both = PointMeasure::uniform(&[c(1.0), c(-1.0)]);
        assert_eq!(measure_distance(&one, &one, 0.5, 4.0).tv, 0.0);
        assert_eq!(measure_distance(&one, &minus, 0.5, 4.0).tv, 1.0);
        assert_eq!(measure_distance(&both, &one, 0.5, 4.0).tv, 0.5);
        assert_eq!(measure_distance(&one, &minus, 0.5, 4.0).moment, 2.0);
    }

    #[test]
    fn overflow_cell_collects_far_atoms() {
        let far = PointMeasure::dirac(c(10.0));
        let farther = PointMeasure::dirac(c(-20.0));
        assert_eq!(measure_distance(&far, &farther, 0.5, 4.0).tv, 0.0);
    }

    #[test]
    fn report_rows_and_csv() {
        let corr = Correspondence::parse("w^2 - 1 + 0.0101*(w - z)").unwrap();
        let opts = ReportOptions {
            m_max: 5,
            grid_eps: 0.1,
            window: 8.0,
            dictionary: TestFunction::moment_dictionary(2, 8.0),
            prune_tol: 1e-9,
            budget: 10_000,
        };
        let (report, deepest) = convergence_report(&corr, c(0.3), &opts).unwrap();
        assert_eq!(report.rows.len(), 5);
        assert_eq!(report.rows[4].tv, 0.0);
        assert!(report.to_csv().starts_with("m,tv,moment,invariance\n1,"));
        let direct = exact_pushforward(&corr, c(0.3), 5, 1e-9, 10_000).unwrap();
        assert_eq!(deepest, direct);
    }
}
