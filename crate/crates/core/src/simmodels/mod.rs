//! Simulation models A, B and C on `S = [0, 1]` and additive observation noise.
//!
//! Every model has the form `Y(s) = mean(s) + amplitude(s) * Z(s)` where the
//! error process `Z` has zero mean and unit variance at every `s`:
//!
//! - **A**: `mean = sin(4 pi s) exp(-3 s)`, `amplitude = ((1 - s - 0.4)^2 + 1) / 6`,
//!   `Z = a^T K(s) / |K(s)|` with 21 Gaussian bumps centred at `i / 21`,
//!   `i = 1..=21`, and `a ~ N(0, I)`. Smooth Gaussian paths.
//! - **B**: `mean = (s - 0.3)^2`, `amplitude = (sin(3 pi s) + 1.5) / 6`, `Z` a
//!   Gaussian process with the non-stationary Matérn-type correlation
//!   [`model_b_corr`]. Continuous, non-differentiable paths.
//! - **C**: mean as in A, `amplitude = 1.5 - s`, `Z = W / sd(W)` with
//!   `W(s) = sqrt(2)/6 (eta1 - 1) sin(pi s) + 2/3 (eta2 - 1)(s - 0.5)`,
//!   `eta1 ~ chi2(1)`, `eta2 ~ Exp(1)`. Smooth, non-Gaussian.
//!
//! The bandwidths of the model A bumps are not fixed by the model
//! definition; they default to `1/21` (the bump spacing) and can be changed
//! with [`ModelSpec::with_bandwidths`].

mod bessel;
mod cholesky;

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use statrs::function::gamma::gamma;

pub use bessel::bessel_k;
pub use cholesky::{chol_psd, Cholesky};

use crate::error::{Error, Result};
use crate::fdata::{FunctionalSample, Grid};
use crate::rng::{tags, StreamKey};

pub const MODEL_A_KERNELS: usize = 21;
const MODEL_B_SCALE: f64 = 0.4 * 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    A,
    B,
    C,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::A => "A",
            ModelKind::B => "B",
            ModelKind::C => "C",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(ModelKind::A),
            "B" | "b" => Ok(ModelKind::B),
            "C" | "c" => Ok(ModelKind::C),
            other => Err(Error::Config(format!("unknown model {other:?} (expected A, B or C)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Model A bump bandwidths `h_i`, one per centre.
    pub bandwidths: Vec<f64>,
    /// Initial Cholesky jitter for model B.
    pub jitter: f64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            bandwidths: vec![1.0 / MODEL_A_KERNELS as f64; MODEL_A_KERNELS],
            jitter: 0.0,
        }
    }

    pub fn a() -> Self {
        Self::new(ModelKind::A)
    }

    pub fn b() -> Self {
        Self::new(ModelKind::B)
    }

    pub fn c() -> Self {
        Self::new(ModelKind::C)
    }

    pub fn with_bandwidths(mut self, bandwidths: Vec<f64>) -> Self {
        self.bandwidths = bandwidths;
        self
    }

    pub fn with_jitter(mut self, jitter: f64) -> Self {
        self.jitter = jitter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ModelKind::A => {
                if self.bandwidths.len() != MODEL_A_KERNELS {
                    return Err(Error::Config(format!(
                        "model A needs {MODEL_A_KERNELS} bandwidths, got {}",
                        self.bandwidths.len()
                    )));
                }
                if self.bandwidths.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
                    return Err(Error::Config("model A bandwidths must be positive".into()));
                }
            }
            ModelKind::B => {
                if !(self.jitter >= 0.0) {
                    return Err(Error::Config("model B jitter must be >= 0".into()));
                }
            }
            ModelKind::C => {}
        }
        Ok(())
    }

    pub fn is_gaussian(&self) -> bool {
        !matches!(self.kind, ModelKind::C)
    }

    /// Population mean curve.
    pub fn mean_at(&self, s: f64) -> f64 {
        match self.kind {
            ModelKind::A | ModelKind::C => (4.0 * PI * s).sin() * (-3.0 * s).exp(),
            ModelKind::B => (s - 0.3) * (s - 0.3),
        }
    }

    /// Population standard deviation curve (the error process has unit variance).
    pub fn amplitude_at(&self, s: f64) -> f64 {
        match self.kind {
            ModelKind::A => ((1.0 - s - 0.4).powi(2) + 1.0) / 6.0,
            ModelKind::B => ((3.0 * PI * s).sin() + 1.5) / 6.0,
            ModelKind::C => 1.5 - s,
        }
    }

    /// Pointwise skewness and excess kurtosis of the error process.
    ///
    /// Zero for the Gaussian models. For model C, `W` is a linear combination
    /// of independent centred `chi2(1)` (cumulants 2, 8, 48) and `Exp(1)`
    /// (cumulants 1, 2, 6) variables, so its cumulants are
    /// `k_j = a^j kappa_j(chi2) + b^j kappa_j(Exp)`.
    pub fn shape_at(&self, s: f64) -> (f64, f64) {
        match self.kind {
            ModelKind::A | ModelKind::B => (0.0, 0.0),
            ModelKind::C => {
                let (a, b) = model_c_coefficients(s);
                let k2 = 2.0 * a * a + b * b;
                let k3 = 8.0 * a.powi(3) + 2.0 * b.powi(3);
                let k4 = 48.0 * a.powi(4) + 6.0 * b.powi(4);
                (k3 / k2.powf(1.5), k4 / (k2 * k2))
            }
        }
    }

    /// Noise correlation between two points, where it has a closed form.
    pub fn noise_corr(&self, s: f64, t: f64) -> f64 {
        match self.kind {
            ModelKind::A => {
                let ks = model_a_kernel(s, &self.bandwidths);
                let kt = model_a_kernel(t, &self.bandwidths);
                let dot: f64 = ks.iter().zip(&kt).map(|(a, b)| a * b).sum();
                dot / (norm(&ks) * norm(&kt))
            }
            ModelKind::B => model_b_corr(s, t),
            ModelKind::C => {
                let (a1, b1) = model_c_coefficients(s);
                let (a2, b2) = model_c_coefficients(t);
                let cov = 2.0 * a1 * a2 + b1 * b2;
                cov / ((2.0 * a1 * a1 + b1 * b1) * (2.0 * a2 * a2 + b2 * b2)).sqrt()
            }
        }
    }

    /// Precomputes everything that does not depend on the random draws.
    pub fn prepare(&self, grid: &Grid) -> Result<PreparedModel> {
        self.validate()?;
        let (a, b) = grid.domain();
        if a < 0.0 || b > 1.0 {
            return Err(Error::Domain(format!("model grids must lie in [0, 1], got [{a}, {b}]")));
        }
        let pts = grid.points();
        let mean = pts.iter().map(|&s| self.mean_at(s)).collect();
        let amplitude = pts.iter().map(|&s| self.amplitude_at(s)).collect();
        let noise = match self.kind {
            ModelKind::A => {
                let t = pts.len();
                let mut basis = Array2::zeros((MODEL_A_KERNELS, t));
                for (j, &s) in pts.iter().enumerate() {
                    let k = model_a_kernel(s, &self.bandwidths);
                    let nk = norm(&k);
                    for (i, v) in k.iter().enumerate() {
                        basis[[i, j]] = v / nk;
                    }
                }
                NoiseProcess::Basis(basis)
            }
            ModelKind::B => {
                let corr = correlation_matrix(grid, model_b_corr);
                NoiseProcess::Gaussian(chol_psd(&corr, self.jitter)?)
            }
            ModelKind::C => {
                let (sin_coef, lin_coef) = pts
                    .iter()
                    .map(|&s| {
                        let (a, b) = model_c_coefficients(s);
                        let sd = (2.0 * a * a + b * b).sqrt();
                        (a / sd, b / sd)
                    })
                    .unzip();
                NoiseProcess::MixtureC { sin_coef, lin_coef }
            }
        };
        Ok(PreparedModel { grid: grid.clone(), mean, amplitude, noise })
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn model_a_kernel(s: f64, bandwidths: &[f64]) -> Vec<f64> {
    bandwidths
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let x = (i + 1) as f64 / MODEL_A_KERNELS as f64;
            (-(s - x).powi(2) / (2.0 * h * h)).exp()
        })
        .collect()
}

/// `(a(s), b(s))` with `W(s) = a(s) (eta1 - 1) + b(s) (eta2 - 1)`.
fn model_c_coefficients(s: f64) -> (f64, f64) {
    (SQRT_2 / 6.0 * (PI * s).sin(), 2.0 / 3.0 * (s - 0.5))
}

/// Order field `nu(s, t) = 1 - 3 sqrt(max(s, t)) / 4` of model B.
pub fn model_b_order(s: f64, t: f64) -> f64 {
    1.0 - 3.0 * s.max(t).sqrt() / 4.0
}

/// Matérn-type covariance `c(s, t)` of model B; `c(s, s) = 0.4^2` by continuity.
pub fn model_b_cov(s: f64, t: f64) -> f64 {
    let nu = model_b_order(s, t);
    let d = (t - s).abs();
    if d == 0.0 {
        return MODEL_B_SCALE;
    }
    let x = (2.0 * nu).sqrt() * d;
    let k = bessel_k(nu, x).expect("order in (0.25, 1] and positive argument");
    MODEL_B_SCALE * 2f64.powf(1.0 - nu) / gamma(nu) * x.powf(nu) * k
}

/// Correlation of the model B error process, `c(s,t) / sqrt(c(s,s) c(t,t))`.
pub fn model_b_corr(s: f64, t: f64) -> f64 {
    model_b_cov(s, t) / MODEL_B_SCALE
}

pub fn correlation_matrix(grid: &Grid, corr: impl Fn(f64, f64) -> f64) -> Array2<f64> {
    let pts = grid.points();
    let t = pts.len();
    let mut m = Array2::zeros((t, t));
    for i in 0..t {
        m[[i, i]] = corr(pts[i], pts[i]);
        for j in 0..i {
            let v = corr(pts[i], pts[j]);
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    m
}

#[derive(Debug, Clone)]
enum NoiseProcess {
    /// `Z = a^T B` with `a ~ N(0, I_k)` and `B` a `k x T` basis matrix.
    Basis(Array2<f64>),
    /// `Z = L g` with `g ~ N(0, I_T)`.
    Gaussian(Cholesky),
    /// Model C mixture with standardized coefficients.
    MixtureC { sin_coef: Vec<f64>, lin_coef: Vec<f64> },
}

/// A model bound to a grid, ready to draw samples.
#[derive(Debug, Clone)]
pub struct PreparedModel {
    grid: Grid,
    mean: Vec<f64>,
    amplitude: Vec<f64>,
    noise: NoiseProcess,
}

impl PreparedModel {
    /// A Gaussian process with given mean, pointwise standard deviation and
    /// correlation matrix.
    pub fn gaussian(
        grid: &Grid,
        mean: Vec<f64>,
        amplitude: Vec<f64>,
        corr: &Array2<f64>,
        jitter: f64,
    ) -> Result<Self> {
        let t = grid.len();
        if mean.len() != t || amplitude.len() != t || corr.dim() != (t, t) {
            return Err(Error::ShapeMismatch("mean, amplitude and correlation must match the grid".into()));
        }
        Ok(Self { grid: grid.clone(), mean, amplitude, noise: NoiseProcess::Gaussian(chol_psd(corr, jitter)?) })
    }

    /// Same error process, different mean and amplitude curves.
    pub fn with_profile(mut self, mean: Vec<f64>, amplitude: Vec<f64>) -> Result<Self> {
        if mean.len() != self.grid.len() || amplitude.len() != self.grid.len() {
            return Err(Error::ShapeMismatch("profile length must match the grid".into()));
        }
        self.mean = mean;
        self.amplitude = amplitude;
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn amplitude(&self) -> &[f64] {
        &self.amplitude
    }

    /// Covariance matrix of `Y` where the error process is Gaussian.
    pub fn covariance(&self) -> Option<Array2<f64>> {
        let corr = match &self.noise {
            NoiseProcess::Basis(b) => b.t().dot(b),
            NoiseProcess::Gaussian(c) => c.lower.dot(&c.lower.t()),
            NoiseProcess::MixtureC { .. } => return None,
        };
        let t = self.grid.len();
        Some(Array2::from_shape_fn((t, t), |(i, j)| corr[[i, j]] * self.amplitude[i] * self.amplitude[j]))
    }

    /// Error-process draws, `n x T`, each column with zero mean and unit variance.
    pub fn noise(&self, n: usize, key: StreamKey) -> Array2<f64> {
        let mut rng = key.rng();
        let t = self.grid.len();
        match &self.noise {
            NoiseProcess::Basis(basis) => {
                let k = basis.nrows();
                let a = Array2::from_shape_simple_fn((n, k), || rng.sample::<f64, _>(StandardNormal));
                a.dot(basis)
            }
            NoiseProcess::Gaussian(chol) => {
                let g = Array2::from_shape_simple_fn((n, t), || rng.sample::<f64, _>(StandardNormal));
                g.dot(&chol.lower.t())
            }
            NoiseProcess::MixtureC { sin_coef, lin_coef } => {
                let mut z = Array2::zeros((n, t));
                for mut row in z.rows_mut() {
                    let g: f64 = rng.sample(StandardNormal);
                    let eta1 = g * g;
                    let eta2: f64 = rng.sample(Exp1);
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = sin_coef[j] * (eta1 - 1.0) + lin_coef[j] * (eta2 - 1.0);
                    }
                }
                z
            }
        }
    }

    /// Draws `n` independent curves.
    pub fn sample(&self, n: usize, key: StreamKey) -> Result<FunctionalSample> {
        if n < 2 {
            return Err(Error::TooFewCurves(n));
        }
        let mut y = self.noise(n, key.derive(tags::SAMPLE));
        for mut row in y.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.mean[j] + self.amplitude[j] * *v;
            }
        }
        FunctionalSample::new(self.grid.clone(), y)
    }
}

/// Draws `n` curves of `spec` on `grid`.
pub fn sample_model(spec: &ModelSpec, n: usize, grid: &Grid, key: StreamKey) -> Result<FunctionalSample> {
    spec.prepare(grid)?.sample(n, key)
}

/// Adds i.i.d. `N(0, sigma^2)` noise to every entry; `sigma = 0` is the identity.
pub fn add_observation_noise(sample: &FunctionalSample, sigma: f64, key: StreamKey) -> Result<FunctionalSample> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("noise sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(sample.clone());
    }
    let mut rng = key.derive(tags::NOISE).rng();
    sample.map_values(|v| {
        for x in v.iter_mut() {
            *x += sigma * rng.sample::<f64, _>(StandardNormal);
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::bessel_k_quadrature;

    fn column_var(sample: &FunctionalSample, j: usize) -> f64 {
        let col = sample.values().column(j);
        let n = col.len() as f64;
        let m = col.sum() / n;
        col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn model_b_corr_is_one_at_zero_lag() {
        assert_eq!(model_b_corr(0.4, 0.4), 1.0);
    }

    #[test]
    fn model_b_corr_matches_quadrature_bessel() {
        // s = 0, t = 1: nu = 1/4, x = sqrt(1/2).
        let nu: f64 = 0.25;
        let x = (2.0 * nu).sqrt();
        let want = 2f64.powf(1.0 - nu) / gamma(nu) * x.powf(nu) * bessel_k_quadrature(nu, x);
        assert!((model_b_corr(0.0, 1.0) - want).abs() < 1e-12);
        assert!(want > 0.0 && want < 1.0);
    }

    #[test]
    fn model_b_corr_is_symmetric_and_bounded() {
        let grid = Grid::unit(40).unwrap();
        let m = correlation_matrix(&grid, model_b_corr);
        for i in 0..40 {
            for j in 0..40 {
                let (s, t) = (grid.points()[i], grid.points()[j]);
                assert_eq!(model_b_corr(s, t), model_b_corr(t, s));
                assert!(m[[i, j]].abs() <= 1.0);
            }
        }
    }

    #[test]
    fn model_b_factorizes_with_small_jitter() {
        for t in [50, 175, 256] {
            let grid = Grid::unit(t).unwrap();
            let c = chol_psd(&correlation_matrix(&grid, model_b_corr), 0.0).unwrap();
            assert!(c.jitter <= 1e-8, "T={t} jitter={}", c.jitter);
        }
    }

    #[test]
    fn model_a_pointwise_variance() {
        let grid = Grid::new(vec![0.0, 0.3, 0.6, 1.0]).unwrap();
        let s = sample_model(&ModelSpec::a(), 50_000, &grid, StreamKey::new(11, 0)).unwrap();
        for (j, &x) in grid.points().iter().enumerate() {
            let want = ((1.0 - x - 0.4).powi(2) + 1.0).powi(2) / 36.0;
            let got = column_var(&s, j);
            assert!(((got - want) / want).abs() < 0.03, "s={x}: {got} vs {want}");
        }
    }

    #[test]
    fn model_c_noise_has_unit_variance() {
        let grid = Grid::new(vec![0.0, 0.25, 0.5, 0.9]).unwrap();
        let prepared = ModelSpec::c().prepare(&grid).unwrap();
        let z = prepared.noise(50_000, StreamKey::new(12, 0));
        let sample = FunctionalSample::new(grid.clone(), z).unwrap();
        for j in 0..grid.len() {
            let v = column_var(&sample, j);
            assert!((v - 1.0).abs() < 0.03, "point {j}: {v}");
        }
        // Var W = sin^2(pi s)/9 + 4 (s - 1/2)^2 / 9.
        for &s in grid.points() {
            let (a, b) = model_c_coefficients(s);
            let want = (PI * s).sin().powi(2) / 9.0 + 4.0 * (s - 0.5).powi(2) / 9.0;
            assert!((2.0 * a * a + b * b - want).abs() < 1e-15);
        }
    }

    #[test]
    fn same_key_same_sample() {
        let grid = Grid::unit(20).unwrap();
        for spec in [ModelSpec::a(), ModelSpec::b(), ModelSpec::c()] {
            let a = sample_model(&spec, 5, &grid, StreamKey::new(3, 9)).unwrap();
            let b = sample_model(&spec, 5, &grid, StreamKey::new(3, 9)).unwrap();
            assert_eq!(a, b);
            let c = sample_model(&spec, 5, &grid, StreamKey::new(3, 10)).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn observation_noise() {
        let grid = Grid::unit(3).unwrap();
        let s = sample_model(&ModelSpec::a(), 4, &grid, StreamKey::new(1, 1)).unwrap();
        assert_eq!(add_observation_noise(&s, 0.0, StreamKey::new(2, 0)).unwrap(), s);
        let a = add_observation_noise(&s, 0.1, StreamKey::new(2, 0)).unwrap();
        assert_eq!(a, add_observation_noise(&s, 0.1, StreamKey::new(2, 0)).unwrap());
        assert_ne!(a, s);

        let flat = FunctionalSample::new(grid.clone(), Array2::zeros((100_000, 3))).unwrap();
        let noisy = add_observation_noise(&flat, 0.05, StreamKey::new(5, 0)).unwrap();
        let sd = column_var(&noisy, 1).sqrt();
        assert!((sd - 0.05).abs() / 0.05 < 0.02, "sd {sd}");
    }

    #[test]
    fn model_c_shape_is_finite_and_nonzero() {
        for &s in &[0.0, 0.2, 0.5, 0.8, 1.0] {
            let (skew, kurt) = ModelSpec::c().shape_at(s);
            assert!(skew.is_finite() && skew != 0.0 && kurt > 0.0, "s={s}");
        }
        // At s = 0 only the (negated) exponential term remains.
        assert!((ModelSpec::c().shape_at(0.0).0 + 2.0).abs() < 1e-12);
        // At s = 1/2 only the chi-square term remains: skewness sqrt(8), kurtosis 12.
        let (skew, kurt) = ModelSpec::c().shape_at(0.5);
        assert!((skew - 8f64.sqrt()).abs() < 1e-12);
        assert!((kurt - 12.0).abs() < 1e-12);
    }

    #[test]
    fn prepare_rejects_bad_specs() {
        let grid = Grid::unit(5).unwrap();
        assert!(ModelSpec::a().with_bandwidths(vec![0.1; 3]).prepare(&grid).is_err());
        assert!(ModelSpec::b().with_jitter(-1.0).prepare(&grid).is_err());
        let wide = Grid::uniform(5, 0.0, 2.0).unwrap();
        assert!(ModelSpec::a().prepare(&wide).is_err());
    }
}
