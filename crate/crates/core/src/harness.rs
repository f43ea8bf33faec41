//! Monte Carlo coverage experiments.
//!
//! An experiment draws `reps` samples per sample size from one of the
//! simulation models, builds a band per quantile method and counts how often
//! the band covers the model's true parameter curve. All methods see the same
//! samples and the same multiplier draws (common random numbers). Replicate
//! `i` at sample size `N` uses the stream `(seed, i)` with counter `N`, so
//! results do not depend on the number of threads.
//!
//! Config files are flat `key = value` lines; `#` starts a comment:
//!
//! ```text
//! model = A                # A | B | C
//! statistic = cohens_d     # mean | variance | cohens_d | skewness | kurtosis | skewness_z | kurtosis_z
//! methods = mult, rmult    # any of mult | rmult | tmult | rtmult | gkf | tgkf
//! se_mode = estimated      # estimated | gaussian_exact
//! bias = false
//! sample_sizes = 100, 200
//! grid_size = 100
//! reps = 2000
//! bootstrap = 1000
//! alpha = 0.05
//! seed = 1
//! noise_sigma = 0
//! output = coverage.csv
//! ```
//!
//! Only `model`, `statistic` and `methods` are required.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fdata::{fmt_f64, Curve, Grid};
use crate::quantile::QuantileMethod;
use crate::rng::{tags, StreamKey};
use crate::scb::{band_from_residuals, covers, BandConfig, SeMode};
use crate::simmodels::{add_observation_noise, ModelKind, ModelSpec};
use crate::transforms::{delta_residuals, Transformation, TRANSFORM_NAMES};

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "FDSCB_THREADS";
pub const MIN_REPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub statistic: String,
    pub methods: Vec<QuantileMethod>,
    pub se_mode: SeMode,
    pub bias: bool,
    pub sample_sizes: Vec<usize>,
    pub grid_size: usize,
    pub reps: usize,
    pub bootstrap: usize,
    pub alpha: f64,
    pub seed: u64,
    pub noise_sigma: f64,
    pub output: Option<PathBuf>,
    /// Replace every estimated quantile by 0 (all bands collapse to the estimate).
    pub debug_zero_quantile: bool,
}

impl ExperimentConfig {
    /// Desk-scale defaults: 2000 replicates, B = 1000, T = 100, N = 100.
    pub fn new(model: ModelSpec, statistic: &str, methods: Vec<QuantileMethod>) -> Self {
        Self {
            model,
            statistic: statistic.to_string(),
            methods,
            se_mode: SeMode::Estimated,
            bias: false,
            sample_sizes: vec![100],
            grid_size: 100,
            reps: 2000,
            bootstrap: 1000,
            alpha: 0.05,
            seed: 1,
            noise_sigma: 0.0,
            output: None,
            debug_zero_quantile: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !TRANSFORM_NAMES.contains(&self.statistic.as_str()) {
            return Err(Error::Config(format!("unknown statistic {:?}", self.statistic)));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("at least one quantile method is required".into()));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::Config("at least one sample size is required".into()));
        }
        for &n in &self.sample_sizes {
            Transformation::from_name(&self.statistic, n)?;
            if n < 2 {
                return Err(Error::TooFewCurves(n));
            }
        }
        if self.grid_size < 3 {
            return Err(Error::Config(format!("grid_size must be at least 3, got {}", self.grid_size)));
        }
        if self.reps < MIN_REPS {
            return Err(Error::Config(format!("reps must be at least {MIN_REPS}, got {}", self.reps)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::Config(format!("noise_sigma must be >= 0, got {}", self.noise_sigma)));
        }
        if self.methods.iter().any(|m| m.multiplier().is_some()) && self.bootstrap < crate::quantile::MIN_REPLICATES {
            return Err(Error::Config(format!(
                "bootstrap must be at least {}, got {}",
                crate::quantile::MIN_REPLICATES,
                self.bootstrap
            )));
        }
        if self.se_mode == SeMode::GaussianExact {
            let t = Transformation::from_name(&self.statistic, self.sample_sizes[0])?;
            crate::scb::gaussian_exact_moments(&t, self.sample_sizes[0])?;
        }
        Ok(())
    }

    /// Parses the `key = value` format described in the module docs.
    pub fn parse(text: &str) -> Result<Self> {
        let mut model = None;
        let mut statistic = None;
        let mut methods = None;
        let mut rest: Vec<(usize, String, String)> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: line_no, msg: format!("expected key = value, got {line:?}") })?;
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            if !seen.insert(key.clone()) {
                return Err(Error::Parse { line: line_no, msg: format!("duplicate key {key:?}") });
            }
            match key.as_str() {
                "model" => model = Some(value.parse::<ModelKind>().map_err(|e| at_line(line_no, e))?),
                "statistic" => statistic = Some(value),
                "methods" => {
                    methods = Some(
                        split_list(&value)
                            .map(|m| m.parse::<QuantileMethod>())
                            .collect::<Result<Vec<_>>>()
                            .map_err(|e| at_line(line_no, e))?,
                    )
                }
                _ => rest.push((line_no, key, value)),
            }
        }
        let model = model.ok_or_else(|| Error::Config("missing key: model".into()))?;
        let statistic = statistic.ok_or_else(|| Error::Config("missing key: statistic".into()))?;
        let methods = methods.ok_or_else(|| Error::Config("missing key: methods".into()))?;
        let mut cfg = Self::new(ModelSpec::new(model), &statistic, methods);
        for (line, key, value) in rest {
            let bad = |what: &str| Error::Parse { line, msg: format!("{key}: expected {what}, got {value:?}") };
            match key.as_str() {
                "se_mode" => cfg.se_mode = value.parse().map_err(|e| at_line(line, e))?,
                "bias" => cfg.bias = parse_bool(&value).ok_or_else(|| bad("true or false"))?,
                "sample_sizes" => {
                    cfg.sample_sizes = split_list(&value)
                        .map(|v| v.parse::<usize>().map_err(|_| bad("a list of integers")))
                        .collect::<Result<_>>()?
                }
                "grid_size" => cfg.grid_size = value.parse().map_err(|_| bad("an integer"))?,
                "reps" => cfg.reps = value.parse().map_err(|_| bad("an integer"))?,
                "bootstrap" => cfg.bootstrap = value.parse().map_err(|_| bad("an integer"))?,
                "alpha" => cfg.alpha = value.parse().map_err(|_| bad("a number"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("an unsigned integer"))?,
                "noise_sigma" => cfg.noise_sigma = value.parse().map_err(|_| bad("a number"))?,
                "output" => cfg.output = Some(PathBuf::from(value)),
                "debug_zero_quantile" => {
                    cfg.debug_zero_quantile = parse_bool(&value).ok_or_else(|| bad("true or false"))?
                }
                _ => return Err(Error::Parse { line, msg: format!("unknown key {key:?}") }),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

fn at_line(line: usize, e: Error) -> Error {
    Error::Parse { line, msg: e.to_string() }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|v| !v.is_empty())
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

/// Population value of `statistic` under `model` on `grid`.
pub fn truth_curve(model: &ModelSpec, statistic: &str, grid: &Grid) -> Result<Curve> {
    let f: Box<dyn Fn(f64) -> f64> = match statistic {
        "mean" => Box::new(|s| model.mean_at(s)),
        "variance" => Box::new(|s| model.amplitude_at(s).powi(2)),
        "cohens_d" => Box::new(|s| model.mean_at(s) / model.amplitude_at(s)),
        "skewness" => Box::new(|s| model.shape_at(s).0),
        "kurtosis" => Box::new(|s| model.shape_at(s).1),
        "skewness_z" | "kurtosis_z" if model.is_gaussian() => Box::new(|_| 0.0),
        "skewness_z" | "kurtosis_z" => {
            return Err(Error::NotAvailable(format!("{statistic} under model {}", model.kind)))
        }
        other => return Err(Error::Config(format!("unknown statistic {other:?}"))),
    };
    Curve::from_fn(grid, f)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub model: ModelKind,
    pub statistic: String,
    pub method: QuantileMethod,
    pub se_mode: SeMode,
    pub bias: bool,
    pub n: usize,
    pub t: usize,
    pub reps: usize,
    pub successes: usize,
    pub guard_violations: usize,
    pub covered: usize,
    /// Over successful replicates.
    pub coverage: f64,
    /// `sqrt(p (1 - p) / successes)`.
    pub mc_se: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub rows: Vec<CoverageRow>,
}

impl CoverageReport {
    pub const CSV_HEADER: &'static str =
        "model,statistic,method,se_mode,bias,N,T,reps,successes,guard_violations,coverage,mc_se";

    /// The report as CSV. Wall times are left out so that the output is a
    /// pure function of the config; see [`CoverageReport::timing_csv`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.model,
                r.statistic,
                r.method,
                r.se_mode,
                r.bias,
                r.n,
                r.t,
                r.reps,
                r.successes,
                r.guard_violations,
                fmt_f64(r.coverage),
                fmt_f64(r.mc_se)
            ));
        }
        out
    }

    pub fn timing_csv(&self) -> String {
        let mut out = String::from("model,statistic,method,N,wall_time_s\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{:.3}\n", r.model, r.statistic, r.method, r.n, r.wall_time_s));
        }
        out
    }

    pub fn row(&self, method: QuantileMethod, n: usize) -> Option<&CoverageRow> {
        self.rows.iter().find(|r| r.method == method && r.n == n)
    }
}

/// Thread count from [`THREADS_ENV`], if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

#[derive(Debug, Clone, Copy)]
enum Outcome {
    Covered(bool),
    GuardViolation,
}

/// Runs the experiment using [`THREADS_ENV`] or all available cores, and
/// writes the CSV if `cfg.output` is set.
pub fn run_coverage(cfg: &ExperimentConfig) -> Result<CoverageReport> {
    let report = run_coverage_with_threads(cfg, threads_from_env()?)?;
    if let Some(path) = &cfg.output {
        write_report(&report, path)?;
    }
    Ok(report)
}

/// Writes `path` and a `<path>.timing.csv` sidecar with wall times.
pub fn write_report(report: &CoverageReport, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_csv())?;
    let mut timing = path.as_os_str().to_owned();
    timing.push(".timing.csv");
    std::fs::write(PathBuf::from(timing), report.timing_csv())?;
    Ok(())
}

/// Runs the experiment on a dedicated pool of `threads` workers (`None`: one per core).
pub fn run_coverage_with_threads(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<CoverageReport> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_inner(cfg))
}

fn run_inner(cfg: &ExperimentConfig) -> Result<CoverageReport> {
    let grid = Grid::unit(cfg.grid_size)?;
    let prepared = cfg.model.prepare(&grid)?;
    let truth = truth_curve(&cfg.model, &cfg.statistic, &grid)?;
    let mut rows = Vec::new();
    for &n in &cfg.sample_sizes {
        let transform = Transformation::from_name(&cfg.statistic, n)?;
        let start = Instant::now();
        let outcomes: Vec<Vec<Outcome>> = (0..cfg.reps as u64)
            .into_par_iter()
            .map(|rep| {
                let key = StreamKey::new(cfg.seed, rep).with_counter(n as u64);
                let mut sample = prepared.sample(n, key)?;
                if cfg.noise_sigma > 0.0 {
                    sample = add_observation_noise(&sample, cfg.noise_sigma, key)?;
                }
                let drs = match delta_residuals(&transform, &sample) {
                    Ok(d) => d,
                    Err(Error::DomainGuardViolation { .. }) => {
                        return Ok(vec![Outcome::GuardViolation; cfg.methods.len()])
                    }
                    Err(e) => return Err(e),
                };
                cfg.methods
                    .iter()
                    .map(|&method| {
                        let band_cfg = BandConfig {
                            transform,
                            method,
                            alpha: cfg.alpha,
                            se_mode: cfg.se_mode,
                            bias_correct: cfg.bias,
                            bootstrap: cfg.bootstrap,
                            key: key.derive(tags::BOOTSTRAP),
                            fixed_quantile: cfg.debug_zero_quantile.then_some(0.0),
                        };
                        match band_from_residuals(&sample, &drs, &band_cfg) {
                            Ok(band) => Ok(Outcome::Covered(covers(&band, &truth)?)),
                            Err(Error::DomainGuardViolation { .. }) => Ok(Outcome::GuardViolation),
                            Err(e) => Err(e),
                        }
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let elapsed = start.elapsed().as_secs_f64();
        for (m, &method) in cfg.methods.iter().enumerate() {
            let mut covered = 0;
            let mut successes = 0;
            let mut guard_violations = 0;
            for o in outcomes.iter().map(|o| o[m]) {
                match o {
                    Outcome::Covered(c) => {
                        successes += 1;
                        covered += usize::from(c);
                    }
                    Outcome::GuardViolation => guard_violations += 1,
                }
            }
            let (coverage, mc_se) = if successes > 0 {
                let p = covered as f64 / successes as f64;
                (p, (p * (1.0 - p) / successes as f64).sqrt())
            } else {
                (f64::NAN, f64::NAN)
            };
            rows.push(CoverageRow {
                model: cfg.model.kind,
                statistic: cfg.statistic.clone(),
                method,
                se_mode: cfg.se_mode,
                bias: cfg.bias,
                n,
                t: cfg.grid_size,
                reps: cfg.reps,
                successes,
                guard_violations,
                covered,
                coverage,
                mc_se,
                wall_time_s: elapsed,
            });
        }
    }
    Ok(CoverageReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(model: ModelSpec, statistic: &str, methods: Vec<QuantileMethod>) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(model, statistic, methods);
        cfg.reps = 100;
        cfg.bootstrap = 200;
        cfg.grid_size = 20;
        cfg.sample_sizes = vec![30];
        cfg
    }

    #[test]
    fn parse_full_config() {
        let text = "\
# comment line
model = B
statistic = cohens_d   # trailing comment
methods = mult, gkf
se_mode = estimated
bias = true
sample_sizes = 50,100
grid_size = 40
reps = 200
bootstrap = 300
alpha = 0.1
seed = 9
noise_sigma = 0.05
output = out.csv
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.model.kind, ModelKind::B);
        assert_eq!(cfg.methods, vec![QuantileMethod::Mult, QuantileMethod::Gkf]);
        assert!(cfg.bias);
        assert_eq!(cfg.sample_sizes, vec![50, 100]);
        assert_eq!((cfg.grid_size, cfg.reps, cfg.bootstrap, cfg.seed), (40, 200, 300, 9));
        assert_eq!(cfg.alpha, 0.1);
        assert_eq!(cfg.noise_sigma, 0.05);
        assert_eq!(cfg.output, Some(PathBuf::from("out.csv")));
    }

    #[test]
    fn parse_errors() {
        let base = "model = A\nstatistic = mean\nmethods = mult\n";
        assert!(ExperimentConfig::parse(base).is_ok());
        assert!(matches!(ExperimentConfig::parse("model = A\n"), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::parse(&format!("{base}colour = red\n")), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(ExperimentConfig::parse(&format!("{base}model = B\n")), Err(Error::Parse { .. })));
        assert!(matches!(ExperimentConfig::parse(&format!("{base}reps = many\n")), Err(Error::Parse { .. })));
        assert!(ExperimentConfig::parse(&format!("{base}reps = 10\n")).is_err());
        assert!(ExperimentConfig::parse("model = D\nstatistic = mean\nmethods = mult\n").is_err());
        assert!(ExperimentConfig::parse("model = A\nstatistic = median\nmethods = mult\n").is_err());
        assert!(ExperimentConfig::parse("model = A\nstatistic = mean\nmethods = bogus\n").is_err());
        assert!(ExperimentConfig::parse(&format!("{base}se_mode = gaussian_exact\n")).is_err());
        assert!(ExperimentConfig::parse(&format!("{base}just text\n")).is_err());
    }

    #[test]
    fn truth_curves() {
        let grid = Grid::unit(11).unwrap();
        let a = ModelSpec::a();
        assert!(truth_curve(&a, "skewness", &grid).unwrap().values().iter().all(|v| *v == 0.0));
        assert_eq!(truth_curve(&a, "cohens_d", &grid).unwrap().values()[0], 0.0);
        let d = truth_curve(&a, "cohens_d", &grid).unwrap().values()[3];
        let s: f64 = 0.3;
        let want = (4.0 * std::f64::consts::PI * s).sin() * (-3.0 * s).exp() / (((1.0 - s - 0.4).powi(2) + 1.0) / 6.0);
        assert!((d - want).abs() < 1e-14);
        assert!(truth_curve(&ModelSpec::b(), "kurtosis", &grid).unwrap().values().iter().all(|v| *v == 0.0));
        assert!(matches!(truth_curve(&ModelSpec::c(), "skewness_z", &grid), Err(Error::NotAvailable(_))));
        let c_sk = truth_curve(&ModelSpec::c(), "skewness", &grid).unwrap();
        assert!((c_sk.values()[5] - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_quantile_never_covers() {
        let mut cfg = small(ModelSpec::a(), "mean", vec![QuantileMethod::Mult]);
        cfg.debug_zero_quantile = true;
        let r = run_coverage_with_threads(&cfg, Some(2)).unwrap();
        assert_eq!(r.rows[0].coverage, 0.0);
        assert_eq!(r.rows[0].successes, 100);
    }

    #[test]
    fn report_accounting_and_determinism() {
        let cfg = small(ModelSpec::c(), "cohens_d", vec![QuantileMethod::RMult, QuantileMethod::TGkf]);
        let a = run_coverage_with_threads(&cfg, Some(1)).unwrap();
        let b = run_coverage_with_threads(&cfg, Some(3)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        for r in &a.rows {
            assert_eq!(r.successes + r.guard_violations, r.reps);
            assert!((0.0..=1.0).contains(&r.coverage));
            assert!((r.mc_se - (r.coverage * (1.0 - r.coverage) / r.successes as f64).sqrt()).abs() < 1e-15);
        }
        let csv = a.to_csv();
        assert_eq!(csv.lines().next().unwrap(), CoverageReport::CSV_HEADER);
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn report_writes_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cov.csv");
        let mut cfg = small(ModelSpec::a(), "mean", vec![QuantileMethod::Gkf]);
        cfg.output = Some(path.clone());
        let r = run_coverage(&cfg).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), r.to_csv());
        assert!(dir.path().join("cov.csv.timing.csv").exists());
    }
}
