//! Acceptance criteria. Each test writes one `criterion NN [PASS|FAIL]` line
//! to stderr (uncaptured) and then asserts the verdict.

use std::io::Write;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde_json::json;

use corrdyn::algebra::{from_shifted_basis, poly_roots, to_shifted_basis, BiPoly, UniPoly};
use corrdyn::correspondence::{
    branch_continue, branch_derivative, build_family, certify, BranchPoint, Certificate, FamilySpec,
};
use corrdyn::diffop::DiffOperator;
use corrdyn::invset::{
    cantor_diagnostics, certified_tn, find_periodic_points, min_invariant_set, min_invariant_set_from,
    neighborhood_containment, DEFAULT_MAX_ATOMS,
};
use corrdyn::io::to_canonical_json;
use corrdyn::measure::{
    exact_pushforward, invariance_residual, measure_distance, sample_orbit_measure, PointMeasure, TestFunction,
};

const OPERATOR: &str = "(w^2-1)*D^2 + D";
const SAMPLES_PER_DISK: usize = 64;
const PRUNE_TOL: f64 = 1e-9;
const BUDGET: usize = 2_000_000;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn operator() -> DiffOperator {
    DiffOperator::parse(OPERATOR).unwrap()
}

fn verdict(id: u32, title: &str, pass: bool, elapsed: Duration, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {id:02} [{tag}] {title} ({:.2} s): {detail}\n", elapsed.as_secs_f64());
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
}

fn sci(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed <= Duration::from_secs(secs)
}

fn random_complex(rng: &mut Xoshiro256PlusPlus) -> Complex64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

#[test]
fn criterion_01_basis_round_trip() {
    let start = Instant::now();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let d = rng.gen_range(1..=10usize);
        let grid: Vec<Vec<Complex64>> = (0..=d)
            .map(|i| (0..=d - i).map(|_| random_complex(&mut rng)).collect())
            .collect();
        let p = BiPoly::from_grid(grid);
        let back = from_shifted_basis(&to_shifted_basis(&p, d).unwrap());
        let scale = p.max_abs_coeff();
        for i in 0..=d {
            for j in 0..=d {
                worst = worst.max((back.coeff(i, j) - p.coeff(i, j)).norm() / scale);
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        "basis round trip",
        worst <= 1e-12 && within(elapsed, 5),
        elapsed,
        &format!("200 polynomials, max relative error {worst:.3e}"),
    );
}

/// Exact integer polynomial in `(z, w)`, `grid[i][j]` the coefficient of `z^i w^j`.
type IntGrid = Vec<Vec<BigInt>>;

fn int_zero(rows: usize, cols: usize) -> IntGrid {
    vec![vec![BigInt::zero(); cols]; rows]
}

/// Multiplies by `(w - z)`.
fn times_shift(p: &IntGrid) -> IntGrid {
    let (rows, cols) = (p.len(), p[0].len());
    let mut out = int_zero(rows + 1, cols + 1);
    for i in 0..rows {
        for j in 0..cols {
            out[i][j + 1] += &p[i][j];
            out[i + 1][j] -= &p[i][j];
        }
    }
    out
}

/// Divides by `(w - z)`, asserting a zero remainder.
fn divide_shift(p: &IntGrid) -> IntGrid {
    // p = (w - z) h: p[i][j] = h[i][j-1] - h[i-1][j]; solve downward in j
    let (rows, cols) = (p.len(), p[0].len());
    let mut h = int_zero(rows, cols - 1);
    for j in (1..cols).rev() {
        for i in 0..rows {
            let below = if i > 0 && j < cols - 1 { h[i - 1][j].clone() } else { BigInt::zero() };
            h[i][j - 1] = &p[i][j] + below;
        }
    }
    let rebuilt = times_shift(&h);
    for i in 0..rows {
        for j in 0..cols {
            assert_eq!(rebuilt[i][j], p[i][j], "nonzero remainder at z^{i} w^{j}");
        }
    }
    h
}

/// `Σ_j (n)_j Q_j(w) (w - z)^(n - j)` with integer `Q_j`.
fn exact_image(q: &[Vec<i64>], n: usize) -> IntGrid {
    let width = n + q.iter().map(Vec::len).max().unwrap() + 1;
    let mut total = int_zero(n + 1, width);
    let mut falling = BigInt::from(1);
    for (j, qj) in q.iter().enumerate() {
        let mut term = int_zero(1, qj.len());
        for (e, &v) in qj.iter().enumerate() {
            term[0][e] = BigInt::from(v) * &falling;
        }
        for _ in 0..n - j {
            term = times_shift(&term);
        }
        for (i, row) in term.iter().enumerate() {
            for (e, v) in row.iter().enumerate() {
                total[i][e] += v;
            }
        }
        falling *= n - j;
    }
    total
}

#[test]
fn criterion_02_tn_normalization() {
    let start = Instant::now();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let k = rng.gen_range(1..=4usize);
        let n = rng.gen_range(k..=30usize);
        let mut q: Vec<Vec<i64>> = (0..=k)
            .map(|j| (0..=rng.gen_range(0..=j + 1)).map(|_| rng.gen_range(-5..=5)).collect())
            .collect();
        if q[k].iter().all(|&v| v == 0) {
            q[k][0] = 1;
        }
        let op = DiffOperator::new(
            q.iter().map(|qj| UniPoly::from_real(&qj.iter().map(|&v| v as f64).collect::<Vec<_>>())).collect(),
        )
        .unwrap();
        let mut quotient = exact_image(&q, n);
        for _ in 0..n - k {
            quotient = divide_shift(&quotient);
        }
        let falling_k: f64 = (0..k).map(|i| (n - i) as f64).product();
        let normalized = op.build_tn(n as u64).unwrap().normalized;
        let scale = quotient.iter().flatten().map(|v| v.to_f64().unwrap().abs()).fold(0.0, f64::max);
        for (i, row) in quotient.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let got = normalized.coeff(i, j) * falling_k;
                worst = worst.max((got - c(v.to_f64().unwrap(), 0.0)).norm() / scale);
            }
        }
        assert!(normalized.deg_z() < quotient.len() && normalized.deg_w() < quotient[0].len());
    }
    let elapsed = start.elapsed();
    verdict(
        2,
        "T_n normalization",
        worst <= 1e-10 && within(elapsed, 10),
        elapsed,
        &format!("50 operators, max relative coefficient error {worst:.3e}"),
    );
}

#[test]
fn criterion_03_constant_family() {
    let start = Instant::now();
    let zeros = [c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 1.0)];
    let spec = FamilySpec::constant(UniPoly::from_roots(&zeros)).unwrap();
    let corr = build_family(&spec).unwrap();
    let computed: Vec<Complex64> = poly_roots(&spec.r0, corr.cluster_tol()).unwrap().finite_expanded();
    let expected = PointMeasure::uniform(&computed);
    let mut exact = true;
    let mut closed_form_err = 0.0f64;
    let mut residual = 0.0f64;
    for a in [c(0.0, 0.0), c(3.0, -1.0), c(-0.5, 2.0)] {
        let mu = exact_pushforward(&corr, a, 1, PRUNE_TOL, BUDGET).unwrap();
        exact &= mu == expected;
        for atom in mu.atoms() {
            closed_form_err = closed_form_err.max(zeros.iter().map(|u| (atom.point - u).norm()).fold(f64::INFINITY, f64::min));
        }
        let dict = TestFunction::moment_dictionary(4, 8.0);
        residual = residual.max(invariance_residual(&corr, &mu, &dict).unwrap().max);
    }
    let elapsed = start.elapsed();
    verdict(
        3,
        "constant family",
        exact && closed_form_err <= 1e-12 && residual <= 1e-12 && within(elapsed, 1),
        elapsed,
        &format!("pushforward equals uniform on zeros: {exact}; zero error {closed_form_err:.1e}; invariance residual {residual:.1e}"),
    );
}

struct MovingCase {
    cert: Certificate,
    distances: Vec<(usize, f64)>,
    residuals: Vec<f64>,
    deepest: Vec<PointMeasure>,
}

fn moving_case() -> MovingCase {
    let tn = certified_tn(&operator(), 100).unwrap();
    let corr = &tn.build.correspondence;
    let cert = tn.certificate;
    let grid_eps = cert.eta0 / 4.0;
    let window = 2.0 * cert.m;
    let seeds = [c(0.3, 0.0), c(-0.7, 0.2)];
    let mut distances = Vec::new();
    let mut deepest = Vec::new();
    for m in 2..=10 {
        let mus: Vec<PointMeasure> = seeds
            .iter()
            .map(|&a| exact_pushforward(corr, a, m, PRUNE_TOL, BUDGET).unwrap())
            .collect();
        distances.push((m, measure_distance(&mus[0], &mus[1], grid_eps, window).tv));
        deepest = mus;
    }
    let dict = TestFunction::moment_dictionary(4, window);
    let residuals = deepest
        .iter()
        .map(|mu| invariance_residual(corr, mu, &dict).unwrap().max)
        .collect();
    MovingCase { cert, distances, residuals, deepest }
}

#[test]
fn criterion_04_moving_family() {
    let start = Instant::now();
    let case = moving_case();
    let elapsed = start.elapsed();
    let tvs: Vec<f64> = case.distances.iter().map(|&(_, tv)| tv).collect();
    let monotone = tvs.windows(2).all(|w| w[1] <= w[0]);
    let last = *tvs.last().unwrap();
    let residual = case.residuals.iter().copied().fold(0.0, f64::max);
    verdict(
        4,
        "start-point independence",
        case.cert.pass && monotone && last < 0.05 && residual < 1e-2 && within(elapsed, 60),
        elapsed,
        &format!("grid-TV m=2..10 {}; invariance residual at m=10 {residual:.3e}", sci(&tvs)),
    );
}

#[test]
fn criterion_05_contraction_certificate() {
    let start = Instant::now();
    let tn = operator().build_tn(100).unwrap();
    let cert = certify(tn.family.as_ref().unwrap(), SAMPLES_PER_DISK).unwrap();
    let corr = &tn.correspondence;
    let one = c(1.0, 0.0);
    let implicit = branch_derivative(corr, one, one).unwrap();
    let h = 1e-5;
    let base = BranchPoint::new(corr, one, one).unwrap();
    let plus = branch_continue(corr, base, one + h, 1e-12).unwrap().w;
    let minus = branch_continue(corr, base, one - h, 1e-12).unwrap().w;
    let fd = (plus - minus) / (2.0 * h);
    let exact = c(1.0 / 199.0, 0.0);
    let (e_imp, e_fd) = ((implicit - exact).norm(), (fd - exact).norm());
    let elapsed = start.elapsed();
    verdict(
        5,
        "contraction certificate",
        cert.pass && e_imp <= 1e-9 && e_fd <= 1e-6 && within(elapsed, 5),
        elapsed,
        &format!(
            "pass {}, sup_deriv {:.4e}, implicit error {e_imp:.1e}, finite-difference error {e_fd:.1e}",
            cert.pass, cert.sup_deriv
        ),
    );
}

/// Families checked by the escape criterion; only certified ones count.
fn corpus() -> Vec<(String, FamilySpec)> {
    let mut out = Vec::new();
    let ops = [
        (OPERATOR, vec![50, 100, 200]),
        ("(w^2+1)*D^2 + w*D + 1", vec![100]),
        ("(w^3-w)*D^3 + w*D^2 + D", vec![100]),
        ("(w^3-1)*D^2 + w^2*D + w", vec![200]),
        ("(w^2-w)*D", vec![60]),
    ];
    for (src, ns) in ops {
        let op = DiffOperator::parse(src).unwrap();
        for n in ns {
            if let Some(family) = op.build_tn(n).unwrap().family {
                out.push((format!("{src} at n = {n}"), family));
            }
        }
    }
    for src in ["w^2 - 1", "w^3 - 2*w + 1"] {
        let r0 = corrdyn::algebra::parse_unipoly(src).unwrap();
        out.push((format!("constant {src}"), FamilySpec::constant(r0).unwrap()));
    }
    out
}

#[test]
fn criterion_06_escape() {
    let start = Instant::now();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(6);
    let mut certified = Vec::new();
    let mut failures = 0usize;
    for (name, family) in corpus() {
        let cert = certify(&family, SAMPLES_PER_DISK).unwrap();
        if !cert.pass {
            continue;
        }
        let corr = build_family(&family).unwrap();
        for _ in 0..10_000 {
            let r = rng.gen_range(cert.m..=8.0 * cert.m);
            let z = Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU));
            let fiber = corr.fiber(z).unwrap();
            let far = fiber.infinite_multiplicity() > 0
                || fiber.finite_expanded().iter().any(|w| w.norm() >= r / 2.0);
            failures += far as usize;
        }
        certified.push(name);
    }
    let elapsed = start.elapsed();
    verdict(
        6,
        "escape",
        certified.len() >= 3 && failures == 0 && within(elapsed, 30),
        elapsed,
        &format!("{} certified families, {failures} escape failures; {certified:?}", certified.len()),
    );
}

#[test]
fn criterion_07_minimal_set_containment() {
    let start = Instant::now();
    let op = operator();
    let centers = [c(-1.0, 0.0), c(1.0, 0.0)];
    let mut margins = Vec::new();
    let mut contained = true;
    for n in [50, 100, 200] {
        let eta0 = certified_tn(&op, n).unwrap().certificate.eta0;
        let set = min_invariant_set(&op, n, 1e-3, DEFAULT_MAX_ATOMS).unwrap();
        let cont = neighborhood_containment(&set, &centers, eta0);
        contained &= cont.pass && !set.truncated;
        margins.push(cont.margin);
    }
    let monotone = margins.windows(2).all(|w| w[1] <= w[0]);
    let elapsed = start.elapsed();
    verdict(
        7,
        "minimal set containment",
        contained && monotone && within(elapsed, 60),
        elapsed,
        &format!("margins at n = 50, 100, 200: {}", sci(&margins)),
    );
}

#[test]
fn criterion_08_cantor_trend() {
    let start = Instant::now();
    let report = cantor_diagnostics(&operator(), 100, &[0.02, 0.01, 0.005, 0.0025], DEFAULT_MAX_ATOMS).unwrap();
    let elapsed = start.elapsed();
    let finest = report.rows.last().unwrap();
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("eps {} comps {} diam {:.4} isolated {}", r.eps, r.n_components, r.max_component_diameter, r.isolated_cell_count))
        .collect();
    verdict(
        8,
        "Cantor trend",
        report.components_nondecreasing
            && report.totally_disconnected_trend
            && finest.isolated_cell_count == 0
            && within(elapsed, 120),
        elapsed,
        &rows.join("; "),
    );
}

struct PeriodicCase {
    sup_deriv: f64,
    orbits: Vec<corrdyn::invset::PeriodicOrbit>,
    set: corrdyn::invset::CellSet,
}

fn periodic_case() -> PeriodicCase {
    let op = operator();
    let sup_deriv = certified_tn(&op, 100).unwrap().certificate.sup_deriv;
    let orbits = find_periodic_points(&op, 100, 8, usize::MAX, 1e-12).unwrap();
    let set = min_invariant_set(&op, 100, 0.05, DEFAULT_MAX_ATOMS).unwrap();
    PeriodicCase { sup_deriv, orbits, set }
}

#[test]
fn criterion_09_periodic_density() {
    let start = Instant::now();
    let case = periodic_case();
    let elapsed = start.elapsed();
    let eps = case.set.eps;
    let uncovered = case
        .set
        .cells()
        .filter(|&(cell, _)| {
            let center = case.set.center(cell);
            !case.orbits.iter().any(|o| (o.point - center).norm() <= 2.0 * eps)
        })
        .count();
    let bad_multipliers = case
        .orbits
        .iter()
        .filter(|o| o.multiplier.norm() >= case.sup_deriv.powi(o.period as i32) * 1.1)
        .count();
    verdict(
        9,
        "periodic point density",
        uncovered == 0 && bad_multipliers == 0 && !case.orbits.is_empty() && within(elapsed, 120),
        elapsed,
        &format!(
            "{} orbits, {} cells, {uncovered} cells without a periodic point, {bad_multipliers} multipliers over bound",
            case.orbits.len(),
            case.set.len()
        ),
    );
}

#[test]
fn criterion_10_minimality() {
    let start = Instant::now();
    let op = operator();
    let eps = 1e-3;
    let base = min_invariant_set(&op, 100, eps, DEFAULT_MAX_ATOMS).unwrap();
    let cells: Vec<_> = base.cells().map(|(cell, _)| cell).collect();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(10);
    let mut worst = 0usize;
    for _ in 0..5 {
        let cell = cells[rng.gen_range(0..cells.len())];
        let reps = base.representatives(cell);
        let seed = reps[rng.gen_range(0..reps.len())];
        let reseeded = min_invariant_set_from(&op, 100, eps, DEFAULT_MAX_ATOMS, seed).unwrap();
        worst = worst.max(base.symmetric_difference(&reseeded));
    }
    let fraction = worst as f64 / base.len() as f64;
    let elapsed = start.elapsed();
    verdict(
        10,
        "minimality",
        fraction <= 0.02 && within(elapsed, 120),
        elapsed,
        &format!("{} cells, worst symmetric difference {worst} ({:.2}%)", base.len(), 100.0 * fraction),
    );
}

struct Agreement {
    m: usize,
    tv: f64,
    exact: PointMeasure,
    sampled: PointMeasure,
}

/// Deepest exact level within the budget, and 10^5 Monte-Carlo samples.
fn agreement_case() -> Agreement {
    let tn = certified_tn(&operator(), 100).unwrap();
    let corr = &tn.build.correspondence;
    let cert = &tn.certificate;
    let a = c(0.3, 0.0);
    let m = (BUDGET as f64).log2().floor() as usize;
    let exact = exact_pushforward(corr, a, m, PRUNE_TOL, BUDGET).unwrap();
    let sampled = sample_orbit_measure(corr, a, 64, 100_000, 11).unwrap();
    let tv = measure_distance(&exact, &sampled, cert.eta0 / 4.0, 2.0 * cert.m).tv;
    Agreement { m, tv, exact, sampled }
}

#[test]
fn criterion_11_monte_carlo_agreement() {
    let start = Instant::now();
    let case = agreement_case();
    let elapsed = start.elapsed();
    verdict(
        11,
        "Monte-Carlo agreement",
        case.tv <= 0.05 && within(elapsed, 60),
        elapsed,
        &format!("exact depth {} ({} atoms) vs 1e5 samples: grid-TV {:.3e}", case.m, case.exact.len(), case.tv),
    );
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn outputs() -> [String; 3] {
    let c4 = moving_case();
    let c9 = periodic_case();
    let c11 = agreement_case();
    [
        to_canonical_json(&json!({
            "distances": c4.distances,
            "residuals": c4.residuals,
            "measures": c4.deepest,
        }))
        .unwrap(),
        to_canonical_json(&json!({ "orbits": c9.orbits, "cells": c9.set })).unwrap(),
        to_canonical_json(&json!({ "m": c11.m, "tv": c11.tv, "exact": c11.exact, "sampled": c11.sampled })).unwrap(),
    ]
}

#[test]
fn criterion_12_determinism() {
    let start = Instant::now();
    let single = in_pool(1, outputs);
    let eight = in_pool(8, outputs);
    let same: Vec<bool> = single.iter().zip(&eight).map(|(a, b)| a == b).collect();
    let elapsed = start.elapsed();
    verdict(
        12,
        "determinism",
        same.iter().all(|&s| s),
        elapsed,
        &format!("byte-identical outputs for criteria 4, 9, 11 at 1 vs 8 threads: {same:?}"),
    );
}
