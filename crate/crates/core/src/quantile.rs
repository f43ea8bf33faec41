//! Estimators of the max-quantile `q_alpha` of a standardized limit process:
//! multiplier bootstrap of delta residuals and the Gaussian kinematic
//! formula (GKF) on an interval.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::fdata::{Curve, Grid};
use crate::rng::StreamKey;
use crate::transforms::DeltaResidualSet;

/// Smallest accepted number of bootstrap replicates.
pub const MIN_REPLICATES: usize = 100;
/// Bootstrap replicates processed per matrix product.
const CHUNK: usize = 512;
const GKF_UPPER: f64 = 50.0;
const GKF_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierKind {
    Gaussian,
    Rademacher,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Studentize {
    /// Normalize by the sample standard error of the statistic.
    Plain,
    /// Normalize each bootstrap process by its own standard deviation.
    T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierConfig {
    pub kind: MultiplierKind,
    pub studentize: Studentize,
    pub replicates: usize,
    pub key: StreamKey,
}

impl MultiplierConfig {
    pub fn new(kind: MultiplierKind, studentize: Studentize, replicates: usize, key: StreamKey) -> Result<Self> {
        let cfg = Self { kind, studentize, replicates, key };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < MIN_REPLICATES {
            return Err(Error::Config(format!(
                "bootstrap needs at least {MIN_REPLICATES} replicates, got {}",
                self.replicates
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldKind {
    Gaussian,
    /// Student-t field with `df` degrees of freedom.
    T { df: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GkfConfig {
    pub field: FieldKind,
    /// Euler characteristic of the domain; 1 for an interval.
    pub l0: f64,
    pub l1: f64,
}

impl GkfConfig {
    pub fn interval(field: FieldKind, l1: f64) -> Self {
        Self { field, l0: 1.0, l1 }
    }
}

/// Quantile estimation method, named as in configs and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantileMethod {
    /// Gaussian multipliers.
    Mult,
    /// Rademacher multipliers.
    RMult,
    /// Gaussian multipliers, t-studentized.
    TMult,
    /// Rademacher multipliers, t-studentized.
    RtMult,
    Gkf,
    /// GKF for a t-field with `N - 1` degrees of freedom.
    TGkf,
}

pub const METHOD_NAMES: [&str; 6] = ["mult", "rmult", "tmult", "rtmult", "gkf", "tgkf"];

impl QuantileMethod {
    pub fn name(self) -> &'static str {
        match self {
            QuantileMethod::Mult => "mult",
            QuantileMethod::RMult => "rmult",
            QuantileMethod::TMult => "tmult",
            QuantileMethod::RtMult => "rtmult",
            QuantileMethod::Gkf => "gkf",
            QuantileMethod::TGkf => "tgkf",
        }
    }

    /// Multiplier settings for the bootstrap methods.
    pub fn multiplier(self) -> Option<(MultiplierKind, Studentize)> {
        match self {
            QuantileMethod::Mult => Some((MultiplierKind::Gaussian, Studentize::Plain)),
            QuantileMethod::RMult => Some((MultiplierKind::Rademacher, Studentize::Plain)),
            QuantileMethod::TMult => Some((MultiplierKind::Gaussian, Studentize::T)),
            QuantileMethod::RtMult => Some((MultiplierKind::Rademacher, Studentize::T)),
            QuantileMethod::Gkf | QuantileMethod::TGkf => None,
        }
    }
}

impl fmt::Display for QuantileMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuantileMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "mult" => QuantileMethod::Mult,
            "rmult" => QuantileMethod::RMult,
            "tmult" => QuantileMethod::TMult,
            "rtmult" => QuantileMethod::RtMult,
            "gkf" => QuantileMethod::Gkf,
            "tgkf" => QuantileMethod::TGkf,
            other => {
                return Err(Error::Config(format!(
                    "unknown quantile method {other:?} (expected one of {})",
                    METHOD_NAMES.join(", ")
                )))
            }
        })
    }
}

/// Configuration the quantile was computed with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Bootstrap(MultiplierConfig),
    Gkf(GkfConfig),
    /// Supplied directly by the caller.
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostics {
    /// Summary of the bootstrap maxima `M_b`.
    Bootstrap { replicates: usize, rank: usize, mean: f64, min: f64, max: f64 },
    /// Bisection trace of the GKF equation.
    Gkf { iterations: usize, residual: f64 },
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileEstimate {
    pub q: f64,
    pub alpha: f64,
    pub method: Option<QuantileMethod>,
    pub provenance: Provenance,
    pub diagnostics: Diagnostics,
}

impl QuantileEstimate {
    /// A quantile given by the caller rather than estimated.
    pub fn fixed(q: f64, alpha: f64) -> Result<Self> {
        if !(q >= 0.0) || !q.is_finite() {
            return Err(Error::Domain(format!("quantile must be finite and >= 0, got {q}")));
        }
        Ok(Self { q, alpha, method: None, provenance: Provenance::Fixed, diagnostics: Diagnostics::None })
    }

    pub fn method_name(&self) -> &'static str {
        self.method.map_or("fixed", QuantileMethod::name)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn fill_multipliers(g: &mut Array2<f64>, kind: MultiplierKind, rng: &mut impl Rng) {
    match kind {
        MultiplierKind::Gaussian => g.iter_mut().for_each(|v| *v = rng.sample(StandardNormal)),
        MultiplierKind::Rademacher => {
            g.iter_mut().for_each(|v| *v = if rng.random::<bool>() { 1.0 } else { -1.0 })
        }
    }
}

/// Empirical `(1 - alpha)` quantile as the order statistic of rank `ceil((1 - alpha) B)`.
pub fn order_statistic_quantile(values: &mut [f64], alpha: f64) -> (f64, usize) {
    values.sort_by(f64::total_cmp);
    let b = values.len();
    // The tolerance keeps e.g. 0.95 * 100 from rounding up to rank 96.
    let rank = (((1.0 - alpha) * b as f64 - 1e-9).ceil() as usize).clamp(1, b);
    (values[rank - 1], rank)
}

/// Bootstrap maxima `M_1, ..., M_B` of the multiplier process.
pub fn bootstrap_maxima(drs: &DeltaResidualSet, cfg: &MultiplierConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let r = &drs.residuals;
    let (n, t) = r.dim();
    if r.iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateResiduals);
    }
    let nf = n as f64;
    let col_ms: Vec<f64> = r.columns().into_iter().map(|c| c.iter().map(|v| v * v).sum::<f64>() / nf).collect();

    // Plain mode works with the variance-normalized residuals.
    let (base, squared) = match cfg.studentize {
        Studentize::Plain => {
            if let Some(j) = drs.se.values().iter().position(|s| !(*s > 0.0)) {
                return Err(Error::ZeroSe { index: j });
            }
            let scale: Vec<f64> = drs.se.values().iter().map(|s| 1.0 / (s * nf.sqrt())).collect();
            let mut e = r.clone();
            for (mut col, sc) in e.columns_mut().into_iter().zip(&scale) {
                col *= *sc;
            }
            (e, None)
        }
        Studentize::T => (r.clone(), Some(r.mapv(|v| v * v))),
    };

    let mut rng = cfg.key.rng();
    let mut maxima = Vec::with_capacity(cfg.replicates);
    let mut done = 0;
    while done < cfg.replicates {
        let rows = CHUNK.min(cfg.replicates - done);
        let mut block = Array2::zeros((rows, n));
        fill_multipliers(&mut block, cfg.kind, &mut rng);
        let sums = block.dot(&base);
        match &squared {
            None => {
                let inv = 1.0 / nf.sqrt();
                for row in sums.axis_iter(Axis(0)) {
                    maxima.push(row.iter().fold(0.0f64, |m, v| m.max((v * inv).abs())));
                }
            }
            Some(r2) => {
                let sq = block.mapv(|v| v * v).dot(r2);
                for (row, row2) in sums.axis_iter(Axis(0)).zip(sq.axis_iter(Axis(0))) {
                    let mut m = 0.0f64;
                    for j in 0..t {
                        if col_ms[j] == 0.0 {
                            continue;
                        }
                        let sum = row[j];
                        let var = (row2[j] - sum * sum / nf) / (nf - 1.0);
                        if var > 0.0 {
                            m = m.max(sum.abs() / nf.sqrt() / var.sqrt());
                        }
                    }
                    maxima.push(m);
                }
            }
        }
        done += rows;
    }
    Ok(maxima)
}

/// Multiplier-bootstrap estimate of the `(1 - alpha)` quantile of `max_s |G(s)|`.
pub fn bootstrap_quantile(drs: &DeltaResidualSet, cfg: &MultiplierConfig, alpha: f64) -> Result<QuantileEstimate> {
    check_alpha(alpha)?;
    let mut maxima = bootstrap_maxima(drs, cfg)?;
    let b = maxima.len();
    let mean = maxima.iter().sum::<f64>() / b as f64;
    let (q, rank) = order_statistic_quantile(&mut maxima, alpha);
    let method = match (cfg.kind, cfg.studentize) {
        (MultiplierKind::Gaussian, Studentize::Plain) => QuantileMethod::Mult,
        (MultiplierKind::Rademacher, Studentize::Plain) => QuantileMethod::RMult,
        (MultiplierKind::Gaussian, Studentize::T) => QuantileMethod::TMult,
        (MultiplierKind::Rademacher, Studentize::T) => QuantileMethod::RtMult,
    };
    Ok(QuantileEstimate {
        q,
        alpha,
        method: Some(method),
        provenance: Provenance::Bootstrap(*cfg),
        diagnostics: Diagnostics::Bootstrap { replicates: b, rank, mean, min: maxima[0], max: maxima[b - 1] },
    })
}

/// Euler characteristic density `rho_d(u)` for `d in {0, 1}`.
pub fn ec_density(field: FieldKind, d: usize, u: f64) -> Result<f64> {
    use std::f64::consts::{PI, SQRT_2};
    match (field, d) {
        (FieldKind::Gaussian, 0) => Ok(0.5 * erfc(u / SQRT_2)),
        (FieldKind::Gaussian, 1) => Ok((-0.5 * u * u).exp() / (2.0 * PI)),
        (FieldKind::T { df }, 0) => {
            let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Domain(format!("t-field: {e}")))?;
            Ok(dist.sf(u))
        }
        (FieldKind::T { df }, 1) => {
            if !(df > 0.0) {
                return Err(Error::Domain(format!("t-field needs df > 0, got {df}")));
            }
            Ok((1.0 + u * u / df).powf(-(df - 1.0) / 2.0) / (2.0 * PI))
        }
        (_, d) => Err(Error::DegreeOutOfRange(d)),
    }
}

/// `L1` of the normalized residual field by summed root mean squared increments.
pub fn estimate_lkc1(residuals: &Array2<f64>, se: &Curve, grid: &Grid) -> Result<f64> {
    let (n, t) = residuals.dim();
    if t != grid.len() || se.len() != t {
        return Err(Error::ShapeMismatch(format!(
            "residuals have {t} columns, grid {} points, se {} points",
            grid.len(),
            se.len()
        )));
    }
    if t < 3 {
        return Err(Error::ShapeMismatch(format!("LKC estimation needs at least 3 grid points, got {t}")));
    }
    if let Some(j) = se.values().iter().position(|s| !(*s > 0.0)) {
        return Err(Error::ZeroSe { index: j });
    }
    let nf = n as f64;
    let scale: Vec<f64> = se.values().iter().map(|s| 1.0 / (nf.sqrt() * s)).collect();
    let mut l1 = 0.0;
    for j in 0..t - 1 {
        let ms = residuals
            .rows()
            .into_iter()
            .map(|row| {
                let d = row[j + 1] * scale[j + 1] - row[j] * scale[j];
                d * d
            })
            .sum::<f64>()
            / nf;
        l1 += ms.sqrt();
    }
    Ok(l1)
}

/// Solves `L0 rho_0(q) + L1 rho_1(q) = alpha / 2` for the two-sided GKF quantile.
pub fn gkf_quantile(cfg: &GkfConfig, alpha: f64) -> Result<QuantileEstimate> {
    if !(alpha > 0.001 && alpha < 0.5) {
        return Err(Error::Domain(format!("GKF quantiles need alpha in (0.001, 0.5), got {alpha}")));
    }
    if !(cfg.l1 >= 0.0) || !cfg.l1.is_finite() {
        return Err(Error::Domain(format!("L1 must be finite and >= 0, got {}", cfg.l1)));
    }
    let f = |u: f64| -> Result<f64> {
        Ok(cfg.l0 * ec_density(cfg.field, 0, u)? + cfg.l1 * ec_density(cfg.field, 1, u)? - alpha / 2.0)
    };
    let (mut lo, mut hi) = (0.0, GKF_UPPER);
    if f(lo)? <= 0.0 || f(hi)? > 0.0 {
        return Err(Error::NoRoot { alpha });
    }
    let mut iterations = 0;
    let mut mid = 0.5 * (lo + hi);
    let mut fm = f(mid)?;
    while iterations < 200 {
        iterations += 1;
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        let next = 0.5 * (lo + hi);
        if next == lo || next == hi || (fm.abs() <= GKF_TOL && hi - lo < 1e-12) {
            break;
        }
        mid = next;
        fm = f(mid)?;
    }
    Ok(QuantileEstimate {
        q: mid,
        alpha,
        method: Some(match cfg.field {
            FieldKind::Gaussian => QuantileMethod::Gkf,
            FieldKind::T { .. } => QuantileMethod::TGkf,
        }),
        provenance: Provenance::Gkf(*cfg),
        diagnostics: Diagnostics::Gkf { iterations, residual: fm },
    })
}

/// Probabilists' Hermite polynomial `He_n(u)`, `n <= 10`.
pub fn hermite(n: usize, u: f64) -> Result<f64> {
    if n > 10 {
        return Err(Error::DegreeOutOfRange(n));
    }
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let next = u * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Quantile of `method` for a set of delta residuals; `replicates` and `key`
/// are used by the bootstrap methods only.
pub fn estimate_quantile(
    drs: &DeltaResidualSet,
    method: QuantileMethod,
    alpha: f64,
    replicates: usize,
    key: StreamKey,
) -> Result<QuantileEstimate> {
    match method.multiplier() {
        Some((kind, studentize)) => {
            let cfg = MultiplierConfig::new(kind, studentize, replicates, key)?;
            bootstrap_quantile(drs, &cfg, alpha)
        }
        None => {
            let l1 = estimate_lkc1(&drs.residuals, &drs.se, &drs.grid)?;
            let field = match method {
                QuantileMethod::TGkf => FieldKind::T { df: drs.n as f64 - 1.0 },
                _ => FieldKind::Gaussian,
            };
            gkf_quantile(&GkfConfig::interval(field, l1), alpha)
        }
    }
}
