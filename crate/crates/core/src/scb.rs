//! Simultaneous confidence bands, coverage checks and Gaussianity tests.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fdata::{Curve, FunctionalSample, Grid};
use crate::quantile::{estimate_quantile, QuantileEstimate, QuantileMethod};
use crate::rng::StreamKey;
use crate::transforms::{
    bias_estimate, delta_residuals, gaussian_bias_g2, gaussian_se_g1, gaussian_se_g2, DeltaResidualSet,
    Transformation,
};

/// Source of the standard error used for band widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeMode {
    /// From the delta residuals.
    Estimated,
    /// Closed-form Gaussian standard deviation of skewness/kurtosis (and
    /// unit variance for their normalizing transforms).
    GaussianExact,
}

impl SeMode {
    pub fn name(self) -> &'static str {
        match self {
            SeMode::Estimated => "estimated",
            SeMode::GaussianExact => "gaussian_exact",
        }
    }
}

impl fmt::Display for SeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "estimated" => Ok(SeMode::Estimated),
            "gaussian_exact" => Ok(SeMode::GaussianExact),
            other => Err(Error::Config(format!("unknown se mode {other:?} (expected estimated or gaussian_exact)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scb {
    pub grid: Grid,
    pub center: Curve,
    pub lower: Curve,
    pub upper: Curve,
    pub q: QuantileEstimate,
    pub bias_corrected: bool,
    pub se_mode: SeMode,
}

/// `center +- q se` with `center = estimate - bias`.
pub fn construct_scb(estimate: &Curve, se: &Curve, q: &QuantileEstimate, bias: Option<&Curve>) -> Result<Scb> {
    estimate.ensure_same_grid(se)?;
    if let Some(b) = bias {
        estimate.ensure_same_grid(b)?;
    }
    if let Some(i) = se.values().iter().position(|v| !(*v >= 0.0)) {
        return Err(Error::Domain(format!("se must be >= 0, got {} at index {i}", se.values()[i])));
    }
    if !(q.q >= 0.0) || !q.q.is_finite() {
        return Err(Error::Domain(format!("quantile must be finite and >= 0, got {}", q.q)));
    }
    let grid = estimate.grid().clone();
    let center: Vec<f64> = match bias {
        Some(b) => estimate.values().iter().zip(b.values()).map(|(e, b)| e - b).collect(),
        None => estimate.values().to_vec(),
    };
    let lower = center.iter().zip(se.values()).map(|(c, s)| c - q.q * s).collect();
    let upper = center.iter().zip(se.values()).map(|(c, s)| c + q.q * s).collect();
    Ok(Scb {
        center: Curve::new(grid.clone(), center)?,
        lower: Curve::new(grid.clone(), lower)?,
        upper: Curve::new(grid.clone(), upper)?,
        grid,
        q: q.clone(),
        bias_corrected: bias.is_some(),
        se_mode: SeMode::Estimated,
    })
}

/// Whether `truth` lies in the closed band at every grid point.
pub fn covers(scb: &Scb, truth: &Curve) -> Result<bool> {
    scb.center.ensure_same_grid(truth)?;
    Ok(truth
        .values()
        .iter()
        .zip(scb.lower.values().iter().zip(scb.upper.values()))
        .all(|(t, (l, u))| l <= t && t <= u))
}

/// How a band is built from a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandConfig {
    pub transform: Transformation,
    pub method: QuantileMethod,
    pub alpha: f64,
    pub se_mode: SeMode,
    /// Subtract the plug-in bias (estimated mode only; the Gaussian-exact
    /// kurtosis band is always centered by its known bias).
    pub bias_correct: bool,
    pub bootstrap: usize,
    pub key: StreamKey,
    /// Use this quantile instead of estimating one.
    pub fixed_quantile: Option<f64>,
}

/// Closed-form Gaussian `(sd, bias)` of a statistic at sample size `n`.
pub fn gaussian_exact_moments(t: &Transformation, n: usize) -> Result<(f64, f64)> {
    match t {
        Transformation::Skewness => Ok((gaussian_se_g1(n)?, 0.0)),
        Transformation::Kurtosis => Ok((gaussian_se_g2(n)?, gaussian_bias_g2(n)?)),
        Transformation::SkewnessZ(_) | Transformation::KurtosisZ(_) => Ok((1.0, 0.0)),
        other => Err(Error::Config(format!(
            "gaussian_exact standard errors are only available for skewness, kurtosis, skewness_z and kurtosis_z, not {other}"
        ))),
    }
}

/// A band for one sample together with its delta residuals.
pub fn band_for_sample(sample: &FunctionalSample, cfg: &BandConfig) -> Result<(Scb, DeltaResidualSet)> {
    let drs = delta_residuals(&cfg.transform, sample)?;
    let scb = band_from_residuals(sample, &drs, cfg)?;
    Ok((scb, drs))
}

pub fn band_from_residuals(sample: &FunctionalSample, drs: &DeltaResidualSet, cfg: &BandConfig) -> Result<Scb> {
    let q = match cfg.fixed_quantile {
        Some(q) => QuantileEstimate::fixed(q, cfg.alpha)?,
        None => estimate_quantile(drs, cfg.method, cfg.alpha, cfg.bootstrap, cfg.key)?,
    };
    let mut scb = match cfg.se_mode {
        SeMode::Estimated => {
            let bias = if cfg.bias_correct { Some(bias_estimate(&cfg.transform, sample)?) } else { None };
            construct_scb(&drs.estimate, &drs.se, &q, bias.as_ref())?
        }
        SeMode::GaussianExact => {
            let (sd, bias) = gaussian_exact_moments(&cfg.transform, drs.n)?;
            let se = Curve::constant(drs.grid.clone(), sd)?;
            let bias_curve = (bias != 0.0).then(|| Curve::constant(drs.grid.clone(), bias)).transpose()?;
            construct_scb(&drs.estimate, &se, &q, bias_curve.as_ref())?
        }
    };
    scb.se_mode = cfg.se_mode;
    Ok(scb)
}

/// Statistics a Gaussianity test can be based on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussStatistic {
    Skewness,
    Kurtosis,
    SkewnessZ,
    KurtosisZ,
}

impl GaussStatistic {
    pub fn name(self) -> &'static str {
        match self {
            GaussStatistic::Skewness => "skewness",
            GaussStatistic::Kurtosis => "kurtosis",
            GaussStatistic::SkewnessZ => "skewness_z",
            GaussStatistic::KurtosisZ => "kurtosis_z",
        }
    }

    pub fn transformation(self, n: usize) -> Result<Transformation> {
        if n < 4 {
            return Err(Error::SampleTooSmall { n, min: 4 });
        }
        Transformation::from_name(self.name(), n)
    }
}

impl FromStr for GaussStatistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "skewness" => Ok(GaussStatistic::Skewness),
            "kurtosis" => Ok(GaussStatistic::Kurtosis),
            "skewness_z" => Ok(GaussStatistic::SkewnessZ),
            "kurtosis_z" => Ok(GaussStatistic::KurtosisZ),
            other => Err(Error::Config(format!(
                "unknown test statistic {other:?} (expected skewness, kurtosis, skewness_z or kurtosis_z)"
            ))),
        }
    }
}

impl fmt::Display for GaussStatistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussTestConfig {
    pub statistic: GaussStatistic,
    pub alpha: f64,
    pub method: QuantileMethod,
    pub se_mode: SeMode,
    /// Plug-in bias correction in estimated mode.
    pub bias_correct: bool,
    pub bootstrap: usize,
    pub key: StreamKey,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussTestResult {
    pub statistic: GaussStatistic,
    /// `max_s |center(s)|` (gaussian_exact) or `max_s |center(s)| / se(s)` (estimated).
    pub max_stat: f64,
    pub threshold: f64,
    pub reject: bool,
    pub alpha: f64,
    pub band: Scb,
}

/// Rejects Gaussianity when the band of the statistic excludes its Gaussian value 0.
pub fn gauss_test(sample: &FunctionalSample, cfg: &GaussTestConfig) -> Result<GaussTestResult> {
    let transform = cfg.statistic.transformation(sample.n())?;
    let band_cfg = BandConfig {
        transform,
        method: cfg.method,
        alpha: cfg.alpha,
        se_mode: cfg.se_mode,
        bias_correct: cfg.bias_correct,
        bootstrap: cfg.bootstrap,
        key: cfg.key,
        fixed_quantile: None,
    };
    let (band, drs) = band_for_sample(sample, &band_cfg)?;
    let q = band.q.q;
    let center = band.center.values();
    let (max_stat, threshold) = match cfg.se_mode {
        SeMode::GaussianExact => {
            let (sd, _) = gaussian_exact_moments(&transform, sample.n())?;
            (center.iter().fold(0.0f64, |m, c| m.max(c.abs())), q * sd)
        }
        SeMode::Estimated => {
            if let Some(j) = drs.se.values().iter().position(|s| !(*s > 0.0)) {
                return Err(Error::ZeroSe { index: j });
            }
            let m = center.iter().zip(drs.se.values()).fold(0.0f64, |m, (c, s)| m.max(c.abs() / s));
            (m, q)
        }
    };
    let reject = max_stat > threshold;
    if cfg.se_mode == SeMode::GaussianExact {
        let zero = Curve::constant(band.grid.clone(), 0.0)?;
        assert_eq!(reject, !covers(&band, &zero)?, "test decision and band disagree");
    }
    Ok(GaussTestResult { statistic: cfg.statistic, max_stat, threshold, reject, alpha: cfg.alpha, band })
}
