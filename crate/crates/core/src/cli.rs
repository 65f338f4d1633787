//! The `corrdyn` command line.
//!
//! Exit status: 0 on success, 1 when a computation fails (including a
//! failing certificate), 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{parse_bipoly, SpherePoint};
use crate::correspondence::{
    certify, default_start_radius, escape_radius_for, Certificate, Correspondence, FamilySpec,
};
use crate::diffop::{hutchinson_threshold, DiffOperator, DEFAULT_N_MAX};
use crate::error::{Error, Result};
use crate::invset::{
    cantor_diagnostics, find_periodic_points, min_invariant_set, DEFAULT_MAX_ATOMS,
};
use crate::io::{to_canonical_json, write_atomic};
use crate::measure::{
    convergence_report, measure_distance, sample_orbit_measure, ReportOptions, TestFunction, DEFAULT_BUDGET,
    DEFAULT_PRUNE_TOL,
};

const DEFAULT_SAMPLES_PER_DISK: usize = 64;
const DEFAULT_M: usize = 10;
const DEFAULT_MC_SAMPLES: usize = 100_000;
const DEFAULT_BURN_IN: usize = 20;
const DEFAULT_EPS: f64 = 1e-3;
const DEFAULT_MAX_LEN: usize = 8;
const DEFAULT_TOL: f64 = 1e-12;

#[derive(Parser, Debug)]
#[command(name = "corrdyn", version, about = "Dynamics of holomorphic correspondences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the fiber F(z) of a point, one root per line
    Fiber(Params),
    /// Emit the contraction certificate of a family as JSON
    Certify(Params),
    /// Equidistribution pipeline: depth-m pushforward and/or Monte-Carlo estimate
    Measure(Params),
    /// Minimal invariant set of T_n on a grid (JSON, or PPM with --format ppm)
    Minvset(Params),
    /// Cantor diagnostics over a list of resolutions (CSV)
    Cantor(Params),
    /// Attracting periodic points of T_n (JSON)
    Periodic(Params),
    /// Smallest certified degree N of an operator
    Threshold(Params),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
    Ppm,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Estimator {
    Exact,
    Mc,
    Both,
}

/// Every flag is optional on the command line; values missing there are
/// taken from `--config`, then from the documented defaults.
#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    /// Curve G(z, w), e.g. "w^2 - z"
    #[arg(long)]
    curve: Option<String>,
    /// Family as JSON text or a path to a JSON file
    #[arg(long)]
    family: Option<String>,
    /// Operator literal such as "(w^2-1)*D^2 + D", JSON text, or a JSON file
    #[arg(long)]
    op: Option<String>,
    /// Degree n of T_n (for `threshold`: the search limit)
    #[arg(long)]
    n: Option<u64>,
    /// Pushforward depth
    #[arg(long)]
    m: Option<usize>,
    /// Grid resolution; for `cantor` a comma-separated list
    #[arg(long)]
    #[serde(default, deserialize_with = "number_or_list")]
    eps: Option<String>,
    /// Random seed
    #[arg(long)]
    seed: Option<u64>,
    /// Atom budget
    #[arg(long)]
    budget: Option<usize>,
    /// Output directory; without it data goes to standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads
    #[arg(long, env = "CORRDYN_THREADS")]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Point, as a complex literal such as "-0.7+0.2i"
    #[arg(long, allow_hyphen_values = true)]
    at: Option<String>,
    /// JSON file with any of these parameters; command-line flags win
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Points per fixed-point circle for `certify`
    #[arg(long)]
    samples_per_disk: Option<usize>,
    /// Monte-Carlo sample count
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long, value_enum)]
    estimator: Option<Estimator>,
    /// Maximum word length for `periodic`
    #[arg(long)]
    max_len: Option<usize>,
    /// Maximum number of periodic orbits
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

/// Accepts `0.01`, `"0.01,0.005"` or `[0.01, 0.005]` in a config file.
fn number_or_list<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    let v = serde_json::Value::deserialize(d)?;
    let text = match v {
        serde_json::Value::Number(x) => x.to_string(),
        serde_json::Value::String(s) => s,
        serde_json::Value::Array(items) => items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
        other => return Err(serde::de::Error::custom(format!("eps: unexpected {other}"))),
    };
    Ok(Some(text))
}

macro_rules! merge_fields {
    ($dst:ident, $src:ident; $($f:ident),*) => { $( if $dst.$f.is_none() { $dst.$f = $src.$f; } )* };
}

impl Params {
    fn merged(mut self) -> Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path)
            .map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))?;
        let file: Params = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))?;
        merge_fields!(self, file; curve, family, op, n, m, eps, seed, budget, out, threads, format, at,
            samples_per_disk, samples, burn_in, estimator, max_len, count, tol);
        Ok(self)
    }

    fn require<T: Clone>(value: &Option<T>, name: &str) -> Result<T> {
        value
            .clone()
            .ok_or_else(|| Error::InvalidInput(format!("--{name} is required")))
    }

    fn operator(&self) -> Result<DiffOperator> {
        let src = Self::require(&self.op, "op")?;
        let text = text_or_file(&src)?;
        if text.trim_start().starts_with('{') {
            DiffOperator::from_json(&text)
        } else {
            DiffOperator::parse(&text)
        }
    }

    fn family_spec(&self) -> Result<Option<FamilySpec>> {
        if let Some(src) = &self.family {
            return FamilySpec::from_json(&text_or_file(src)?).map(Some);
        }
        if self.op.is_some() {
            let n = Self::require(&self.n, "n")?;
            let tn = self.operator()?.build_tn(n)?;
            return tn.family.map(Some).ok_or_else(|| {
                Error::InvalidInput("T_n has no perturbative family (degenerate operator or clustered zeros of Q_k)".into())
            });
        }
        Ok(None)
    }

    fn correspondence(&self) -> Result<Correspondence> {
        if let Some(curve) = &self.curve {
            return Correspondence::parse(curve);
        }
        if self.family.is_some() {
            let spec = self.family_spec()?.expect("family given");
            return crate::correspondence::build_family(&spec);
        }
        if self.op.is_some() {
            let n = Self::require(&self.n, "n")?;
            return Ok(self.operator()?.build_tn(n)?.correspondence);
        }
        Err(Error::InvalidInput("one of --curve, --family or --op is required".into()))
    }

    fn point(&self) -> Result<Complex64> {
        match &self.at {
            Some(s) => parse_point(s),
            None => Ok(Complex64::default()),
        }
    }

    fn eps_list(&self) -> Result<Vec<f64>> {
        let Some(s) = &self.eps else {
            return Ok(vec![DEFAULT_EPS]);
        };
        let list = s
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|e| *e > 0.0 && e.is_finite())
                    .ok_or_else(|| Error::InvalidInput(format!("--eps: `{x}` is not a positive number")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(list)
    }

    fn eps(&self) -> Result<f64> {
        let list = self.eps_list()?;
        if list.len() != 1 {
            return Err(Error::InvalidInput("--eps takes a single value here".into()));
        }
        Ok(list[0])
    }
}

fn text_or_file(src: &str) -> Result<String> {
    let path = Path::new(src);
    if !src.trim_start().starts_with('{') && path.is_file() {
        return Ok(fs::read_to_string(path)?);
    }
    Ok(src.to_string())
}

fn parse_point(s: &str) -> Result<Complex64> {
    let p = parse_bipoly(s)?;
    if p.deg_z() > 0 || p.deg_w() > 0 {
        return Err(Error::InvalidInput(format!("`{s}` is not a constant")));
    }
    Ok(p.coeff(0, 0))
}

/// Result of one command: files to write (or print) and whether the
/// computation counts as a success.
struct Output {
    files: Vec<(String, Vec<u8>)>,
    ok: bool,
}

impl Output {
    fn single(name: &str, bytes: Vec<u8>, ok: bool) -> Self {
        Self {
            files: vec![(name.to_string(), bytes)],
            ok,
        }
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    Ok(to_canonical_json(value)?.into_bytes())
}

fn window_for(corr: &Correspondence) -> f64 {
    let m0 = default_start_radius(corr);
    2.0 * escape_radius_for(corr, m0).map_or(m0, |e| e.radius)
}

fn run_fiber(p: &Params) -> Result<Output> {
    let corr = p.correspondence()?;
    let at = parse_point(&Params::require(&p.at, "at")?)?;
    let fiber = corr.fiber(at)?;
    let mut text = String::new();
    for root in &fiber.roots {
        for _ in 0..root.multiplicity {
            match root.value {
                SpherePoint::Finite(w) => text.push_str(&format_complex(w)),
                SpherePoint::Infinity => text.push_str("inf"),
            }
            text.push('\n');
        }
    }
    Ok(Output::single("fiber.txt", text.into_bytes(), true))
}

fn format_complex(w: Complex64) -> String {
    let clean = |x: f64| if x.abs() < 1e-14 { 0.0 } else { x };
    let (re, im) = (clean(w.re), clean(w.im));
    if im == 0.0 {
        format!("{re}")
    } else if re == 0.0 {
        format!("{im}i")
    } else {
        format!("{re}{im:+}i")
    }
}

fn run_certify(p: &Params) -> Result<Output> {
    let spec = p
        .family_spec()?
        .ok_or_else(|| Error::InvalidInput("certify needs --family, or --op with --n".into()))?;
    let cert = certify(&spec, p.samples_per_disk.unwrap_or(DEFAULT_SAMPLES_PER_DISK))?;
    Ok(Output::single("certificate.json", json(&cert)?, cert.pass))
}

fn run_measure(p: &Params) -> Result<Output> {
    let corr = p.correspondence()?;
    let a = p.point()?;
    let window = window_for(&corr);
    let grid_eps = match &p.eps {
        Some(_) => p.eps()?,
        None => match p.family_spec().ok().flatten().map(|s| certify(&s, 16)) {
            Some(Ok(cert)) => cert.eta0 / 4.0,
            _ => 0.05,
        },
    };
    let budget = p.budget.unwrap_or(DEFAULT_BUDGET);
    let estimator = p.estimator.unwrap_or(Estimator::Exact);
    let mut files = Vec::new();
    let mut exact = None;
    if estimator != Estimator::Mc {
        let opts = ReportOptions {
            m_max: p.m.unwrap_or(DEFAULT_M),
            grid_eps,
            window,
            dictionary: TestFunction::moment_dictionary(4, window),
            prune_tol: DEFAULT_PRUNE_TOL,
            budget,
        };
        let (report, mu) = convergence_report(&corr, a, &opts)?;
        files.push(("measure.json".to_string(), json(&mu)?));
        files.push(("convergence.csv".to_string(), report.to_csv().into_bytes()));
        exact = Some(mu);
    }
    if estimator != Estimator::Exact {
        let seed = p.seed.unwrap_or(0);
        let mc = sample_orbit_measure(
            &corr,
            a,
            p.burn_in.unwrap_or(DEFAULT_BURN_IN),
            p.samples.unwrap_or(DEFAULT_MC_SAMPLES),
            seed,
        )?;
        if let Some(mu) = &exact {
            let d = measure_distance(mu, &mc, grid_eps, window);
            files.push(("agreement.json".to_string(), json(&d)?));
        }
        files.push(("measure_mc.json".to_string(), json(&mc)?));
    }
    Ok(Output { files, ok: true })
}

fn run_minvset(p: &Params) -> Result<Output> {
    let op = p.operator()?;
    let n = Params::require(&p.n, "n")?;
    let set = min_invariant_set(&op, n, p.eps()?, p.budget.unwrap_or(DEFAULT_MAX_ATOMS))?;
    if p.format == Some(Format::Ppm) {
        let mut out = Output::single("minvset.json", json(&set)?, true);
        out.files.push(("minvset.ppm".to_string(), set.to_ppm()));
        return Ok(out);
    }
    log::info!("{} cells, truncated: {}", set.len(), set.truncated);
    Ok(Output::single("minvset.json", json(&set)?, true))
}

fn run_cantor(p: &Params) -> Result<Output> {
    let op = p.operator()?;
    let n = Params::require(&p.n, "n")?;
    let report = cantor_diagnostics(&op, n, &p.eps_list()?, p.budget.unwrap_or(DEFAULT_MAX_ATOMS))?;
    if p.format == Some(Format::Json) {
        return Ok(Output::single("cantor.json", json(&report)?, true));
    }
    Ok(Output::single("cantor.csv", report.to_csv().into_bytes(), true))
}

fn run_periodic(p: &Params) -> Result<Output> {
    let op = p.operator()?;
    let n = Params::require(&p.n, "n")?;
    let orbits = find_periodic_points(
        &op,
        n,
        p.max_len.unwrap_or(DEFAULT_MAX_LEN),
        p.count.unwrap_or(usize::MAX),
        p.tol.unwrap_or(DEFAULT_TOL),
    )?;
    Ok(Output::single("periodic.json", json(&orbits)?, true))
}

fn run_threshold(p: &Params) -> Result<Output> {
    let op = p.operator()?;
    let result = hutchinson_threshold(
        &op,
        p.n.unwrap_or(DEFAULT_N_MAX),
        p.samples_per_disk.unwrap_or(DEFAULT_SAMPLES_PER_DISK),
    )?;
    let ok = result.n.is_some();
    Ok(Output::single("threshold.json", json(&result)?, ok))
}

fn emit(p: &Params, out: &Output) -> Result<()> {
    match &p.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            for (name, bytes) in &out.files {
                write_atomic(&dir.join(name), bytes)?;
            }
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            // auxiliary files (PPM, CSV next to JSON) only go to --out
            if let Some((_, bytes)) = out.files.first() {
                stdout.write_all(bytes)?;
            }
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    if e.is_computational() || matches!(e, Error::Io(_)) {
        1
    } else {
        2
    }
}

fn execute(command: Command) -> i32 {
    let (params, runner): (Params, fn(&Params) -> Result<Output>) = match command {
        Command::Fiber(p) => (p, run_fiber),
        Command::Certify(p) => (p, run_certify),
        Command::Measure(p) => (p, run_measure),
        Command::Minvset(p) => (p, run_minvset),
        Command::Cantor(p) => (p, run_cantor),
        Command::Periodic(p) => (p, run_periodic),
        Command::Threshold(p) => (p, run_threshold),
    };
    let params = match params.merged() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(params.threads.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| runner(&params)) {
        Ok(out) => match emit(&params, &out) {
            Ok(()) if out.ok => 0,
            Ok(()) => {
                eprintln!("computation finished without success; see the output");
                1
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        },
        Err(Error::NotCertified(cert)) => {
            eprintln!("error: T_n is not certified; certificate follows");
            eprint!("{}", to_canonical_json(&*cert as &Certificate).unwrap_or_default());
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    execute(cli.command)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_formatting() {
        assert_eq!(format_complex(Complex64::new(2.0, 0.0)), "2");
        assert_eq!(format_complex(Complex64::new(-0.7, 0.2)), "-0.7+0.2i");
        assert_eq!(format_complex(Complex64::new(0.0, -2.0)), "-2i");
        assert_eq!(format_complex(Complex64::new(3.0, 1e-17)), "3");
    }

    #[test]
    fn points_parse() {
        assert_eq!(parse_point("-0.7+0.2i").unwrap(), Complex64::new(-0.7, 0.2));
        assert!(parse_point("w").is_err());
    }

    #[test]
    fn usage_errors_exit_with_two() {
        assert_eq!(run(["corrdyn", "nonsense"]), 2);
        assert_eq!(run(["corrdyn", "fiber", "--curve", "w^2 - z"]), 2);
        assert_eq!(run(["corrdyn", "fiber", "--curve", "w^^2", "--at", "1"]), 2);
    }
}
