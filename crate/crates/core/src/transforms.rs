//! Moment-based statistics `H(mu^(r))`, their delta residuals, standard
//! errors and plug-in bias.
//!
//! Each built-in statistic is a smooth function of the non-centered moments
//! `(m1, m2, m3, m4)` and carries an analytic gradient and Hessian. The
//! derivatives are assembled from second-order jets, so the closed forms are
//! written once (as polynomials in the moments) and the chain rule does the
//! rest.
//!
//! | name         | orders  | `H`                                          |
//! |--------------|---------|----------------------------------------------|
//! | `mean`       | 1       | `m1`                                         |
//! | `variance`   | 1, 2    | `m2 - m1^2`                                  |
//! | `cohens_d`   | 1, 2    | `m1 / sqrt(m2 - m1^2)`                       |
//! | `skewness`   | 1..=3   | `(m3 - 3 m1 m2 + 2 m1^3) / v^(3/2)`          |
//! | `kurtosis`   | 1..=4   | `(m4 - 4 m1 m3 + 6 m1^2 m2 - 3 m1^4) / v^2 - 3` |
//! | `skewness_z` | 1..=3   | D'Agostino's `Z1,N` applied to `skewness`    |
//! | `kurtosis_z` | 1..=4   | Anscombe–Glynn's `Z2,N` applied to `kurtosis` |

use std::fmt;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::fdata::{Curve, FunctionalSample, Grid};
use crate::moments::{pointwise_moments, pow_int, MomentEstimates, MomentOrders};

/// Relative floor for the pointwise variance `m2 - m1^2` against `m2`.
pub const VARIANCE_GUARD: f64 = 1e-12;
/// Lower bound for the Anscombe–Glynn denominator.
const Z2_DENOM_GUARD: f64 = 1e-12;

const DIM: usize = 4;

/// Value, gradient and Hessian of a scalar function of the four raw moments.
#[derive(Debug, Clone, Copy)]
struct Jet {
    v: f64,
    g: [f64; DIM],
    h: [[f64; DIM]; DIM],
}

impl Jet {
    fn constant(v: f64) -> Self {
        Self { v, g: [0.0; DIM], h: [[0.0; DIM]; DIM] }
    }

    fn coordinate(m: &[f64; DIM], k: usize) -> Self {
        let mut j = Self::constant(m[k]);
        j.g[k] = 1.0;
        j
    }

    fn mul(&self, o: &Jet) -> Jet {
        let mut r = Jet::constant(self.v * o.v);
        for i in 0..DIM {
            r.g[i] = self.g[i] * o.v + self.v * o.g[i];
            for j in 0..DIM {
                r.h[i][j] = self.h[i][j] * o.v + self.g[i] * o.g[j] + o.g[i] * self.g[j] + self.v * o.h[i][j];
            }
        }
        r
    }

    /// `phi(self)` given `phi`, `phi'` and `phi''` at `self.v`.
    fn compose(&self, phi: f64, d1: f64, d2: f64) -> Jet {
        let mut r = Jet::constant(phi);
        for i in 0..DIM {
            r.g[i] = d1 * self.g[i];
            for j in 0..DIM {
                r.h[i][j] = d2 * self.g[i] * self.g[j] + d1 * self.h[i][j];
            }
        }
        r
    }

    fn powf(&self, p: f64) -> Jet {
        let v = self.v;
        self.compose(v.powf(p), p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0))
    }

    fn shift(mut self, c: f64) -> Jet {
        self.v += c;
        self
    }
}

/// `m2 - m1^2`.
fn central2(m: &[f64; DIM]) -> Jet {
    let [x, y, _, _] = *m;
    let mut j = Jet::constant(y - x * x);
    j.g = [-2.0 * x, 1.0, 0.0, 0.0];
    j.h[0][0] = -2.0;
    j
}

/// `m3 - 3 m1 m2 + 2 m1^3`.
fn central3(m: &[f64; DIM]) -> Jet {
    let [x, y, z, _] = *m;
    let mut j = Jet::constant(z - 3.0 * x * y + 2.0 * x * x * x);
    j.g = [-3.0 * y + 6.0 * x * x, -3.0 * x, 1.0, 0.0];
    j.h[0][0] = 12.0 * x;
    j.h[0][1] = -3.0;
    j.h[1][0] = -3.0;
    j
}

/// `m4 - 4 m1 m3 + 6 m1^2 m2 - 3 m1^4`.
fn central4(m: &[f64; DIM]) -> Jet {
    let [x, y, z, w] = *m;
    let x2 = x * x;
    let mut j = Jet::constant(w - 4.0 * x * z + 6.0 * x2 * y - 3.0 * x2 * x2);
    j.g = [-4.0 * z + 12.0 * x * y - 12.0 * x2 * x, 6.0 * x2, -4.0 * x, 1.0];
    j.h[0][0] = 12.0 * y - 36.0 * x2;
    j.h[0][1] = 12.0 * x;
    j.h[1][0] = 12.0 * x;
    j.h[0][2] = -4.0;
    j.h[2][0] = -4.0;
    j
}

// ---------------------------------------------------------------------------
// Normalizing transforms for skewness and kurtosis.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZKind {
    /// D'Agostino's transform of the sample skewness, valid for `N >= 8`.
    Skewness,
    /// Anscombe–Glynn's transform of the sample excess kurtosis, valid for `N >= 20`.
    Kurtosis,
}

impl ZKind {
    pub fn min_n(self) -> usize {
        match self {
            ZKind::Skewness => 8,
            ZKind::Kurtosis => 20,
        }
    }
}

/// Constants of `Z1,N`. `n = None` is the `N -> infinity` limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Z1Params {
    pub n: Option<usize>,
    /// Variance of `g1` under Gaussianity, `6(N-2)/((N+1)(N+3))`.
    pub c1: f64,
    /// Kurtosis of the sampling distribution of `g1`.
    pub c2: f64,
    pub w: f64,
    pub alpha: f64,
    pub delta: f64,
}

/// Constants of `Z2,N`. `n = None` is the `N -> infinity` limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Z2Params {
    pub n: Option<usize>,
    /// `E[g2] + 3 = 3(N-1)/(N+1)` under Gaussianity.
    pub b1: f64,
    /// `Var[g2]` under Gaussianity.
    pub b2: f64,
    /// Squared skewness of the sampling distribution of `g2`.
    pub b3: f64,
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZTransformParams {
    Z1(Z1Params),
    Z2(Z2Params),
}

/// Parameter pack of the normalizing transform `kind` at sample size `n`
/// (`None` for the infinite-sample limit).
pub fn z_params(kind: ZKind, n: Option<usize>) -> Result<ZTransformParams> {
    if let Some(n) = n {
        if n < kind.min_n() {
            return Err(Error::SampleTooSmall { n, min: kind.min_n() });
        }
    }
    Ok(match (kind, n) {
        (ZKind::Skewness, None) => ZTransformParams::Z1(Z1Params {
            n: None,
            c1: 0.0,
            c2: 3.0,
            w: 1.0,
            alpha: f64::INFINITY,
            delta: f64::INFINITY,
        }),
        (ZKind::Skewness, Some(n)) => {
            let nf = n as f64;
            let c1 = 6.0 * (nf - 2.0) / ((nf + 1.0) * (nf + 3.0));
            let c2 = 3.0 * (nf * nf + 27.0 * nf - 70.0) * (nf + 1.0) * (nf + 3.0)
                / ((nf - 2.0) * (nf + 5.0) * (nf + 7.0) * (nf + 9.0));
            let w2 = (2.0 * c2 - 2.0).sqrt() - 1.0;
            let w = w2.sqrt();
            let alpha = (2.0 / (w2 - 1.0)).sqrt();
            let delta = 1.0 / w.ln().sqrt();
            ZTransformParams::Z1(Z1Params { n: Some(n), c1, c2, w, alpha, delta })
        }
        (ZKind::Kurtosis, None) => ZTransformParams::Z2(Z2Params {
            n: None,
            b1: 3.0,
            b2: 0.0,
            b3: 0.0,
            a: f64::INFINITY,
        }),
        (ZKind::Kurtosis, Some(n)) => {
            let nf = n as f64;
            let b1 = 3.0 * (nf - 1.0) / (nf + 1.0);
            let b2 = gaussian_var_g2(n);
            let sqrt_b3 = 6.0 * (nf * nf - 5.0 * nf + 2.0) / ((nf + 7.0) * (nf + 9.0))
                * (6.0 * (nf + 3.0) * (nf + 5.0) / (nf * (nf - 2.0) * (nf - 3.0))).sqrt();
            let b3 = sqrt_b3 * sqrt_b3;
            let a = 6.0 + 8.0 / sqrt_b3 * (2.0 / sqrt_b3 + (1.0 + 4.0 / b3).sqrt());
            ZTransformParams::Z2(Z2Params { n: Some(n), b1, b2, b3, a })
        }
    })
}

impl ZTransformParams {
    pub fn kind(&self) -> ZKind {
        match self {
            ZTransformParams::Z1(_) => ZKind::Skewness,
            ZTransformParams::Z2(_) => ZKind::Kurtosis,
        }
    }

    pub fn n(&self) -> Option<usize> {
        match self {
            ZTransformParams::Z1(p) => p.n,
            ZTransformParams::Z2(p) => p.n,
        }
    }

    /// The transform divided by `sqrt(N)`; this has a finite limit as
    /// `N -> infinity`: `asinh(sqrt(3/2) x) / 3` for skewness and
    /// `sqrt(2/3) (1 - (1 + 3x/4)^(-1/3))` for excess kurtosis.
    pub fn normalized(&self, x: f64) -> f64 {
        match self.n() {
            Some(n) => standardized_derivs(self, x).0 / (n as f64).sqrt(),
            None => match self {
                ZTransformParams::Z1(_) => (1.5f64.sqrt() * x).asinh() / 3.0,
                ZTransformParams::Z2(_) => {
                    (2.0f64 / 3.0).sqrt() * (1.0 - (1.0 / (1.0 + 0.75 * x)).cbrt())
                }
            },
        }
    }
}

/// Value and first two derivatives of the unit-variance transform (finite `N`).
fn standardized_derivs(params: &ZTransformParams, x: f64) -> (f64, f64, f64) {
    match params {
        ZTransformParams::Z1(p) => {
            let scale = 1.0 / (p.alpha * p.c1.sqrt());
            let u = x * scale;
            let r = (1.0 + u * u).sqrt();
            (p.delta * u.asinh(), p.delta * scale / r, -p.delta * scale * scale * u / (r * r * r))
        }
        ZTransformParams::Z2(p) => {
            let pnum = 1.0 - 2.0 / p.a;
            let m = (2.0 / (p.a - 4.0)).sqrt() / p.b2.sqrt();
            let d = 1.0 + (x + 3.0 - p.b1) * m;
            let s = (2.0 / (9.0 * p.a)).sqrt();
            let pc = pnum.cbrt();
            let dc = d.cbrt();
            let value = (1.0 - 2.0 / (9.0 * p.a) - pc / dc) / s;
            let d1 = pc * m / (3.0 * s * dc * d);
            let d2 = -4.0 * pc * m * m / (9.0 * s * dc * d * d);
            (value, d1, d2)
        }
    }
}

/// Unit-variance normalizing transform at a finite sample size.
///
/// Under Gaussianity `Z1,N(g1)` and `Z2,N(g2)` are approximately standard
/// normal, so bands and tests on this scale compare against the quantile
/// alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZTransform {
    params: ZTransformParams,
    n: usize,
}

impl ZTransform {
    pub fn new(kind: ZKind, n: usize) -> Result<Self> {
        Ok(Self { params: z_params(kind, Some(n))?, n })
    }

    pub fn kind(&self) -> ZKind {
        self.params.kind()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> &ZTransformParams {
        &self.params
    }

    pub fn apply(&self, x: f64) -> f64 {
        standardized_derivs(&self.params, x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        standardized_derivs(&self.params, x).1
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        standardized_derivs(&self.params, x).2
    }

    /// Whether `x` lies in the domain where the transform is smooth and increasing.
    pub fn in_domain(&self, x: f64) -> bool {
        match &self.params {
            ZTransformParams::Z1(_) => x.is_finite(),
            ZTransformParams::Z2(p) => {
                let m = (2.0 / (p.a - 4.0)).sqrt() / p.b2.sqrt();
                1.0 + (x + 3.0 - p.b1) * m > Z2_DENOM_GUARD
            }
        }
    }

    fn jet(&self, inner: &Jet) -> Jet {
        let (v, d1, d2) = standardized_derivs(&self.params, inner.v);
        inner.compose(v, d1, d2)
    }
}

// ---------------------------------------------------------------------------
// Registry.

/// A built-in moment-based statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transformation {
    Mean,
    Variance,
    CohensD,
    Skewness,
    Kurtosis,
    SkewnessZ(ZTransform),
    KurtosisZ(ZTransform),
}

pub const TRANSFORM_NAMES: [&str; 7] =
    ["mean", "variance", "cohens_d", "skewness", "kurtosis", "skewness_z", "kurtosis_z"];

impl Transformation {
    /// Looks a statistic up by name. `n` is the sample size, needed by the
    /// sample-size dependent transforms.
    pub fn from_name(name: &str, n: usize) -> Result<Self> {
        Ok(match name {
            "mean" => Transformation::Mean,
            "variance" => Transformation::Variance,
            "cohens_d" => Transformation::CohensD,
            "skewness" => Transformation::Skewness,
            "kurtosis" => Transformation::Kurtosis,
            "skewness_z" => Transformation::SkewnessZ(ZTransform::new(ZKind::Skewness, n)?),
            "kurtosis_z" => Transformation::KurtosisZ(ZTransform::new(ZKind::Kurtosis, n)?),
            other => {
                return Err(Error::Config(format!(
                    "unknown statistic {other:?} (expected one of {})",
                    TRANSFORM_NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Transformation::Mean => "mean",
            Transformation::Variance => "variance",
            Transformation::CohensD => "cohens_d",
            Transformation::Skewness => "skewness",
            Transformation::Kurtosis => "kurtosis",
            Transformation::SkewnessZ(_) => "skewness_z",
            Transformation::KurtosisZ(_) => "kurtosis_z",
        }
    }

    /// Number of moments consumed, `K`; the orders are always `1..=K`.
    pub fn k(&self) -> usize {
        match self {
            Transformation::Mean => 1,
            Transformation::Variance | Transformation::CohensD => 2,
            Transformation::Skewness | Transformation::SkewnessZ(_) => 3,
            Transformation::Kurtosis | Transformation::KurtosisZ(_) => 4,
        }
    }

    pub fn orders(&self) -> MomentOrders {
        MomentOrders::first(self.k() as u32).expect("K <= 4")
    }

    /// The sample size a sample-size dependent transform was built for.
    pub fn n_dependent(&self) -> Option<usize> {
        match self {
            Transformation::SkewnessZ(z) | Transformation::KurtosisZ(z) => Some(z.n()),
            _ => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Transformation::Mean)
    }

    fn pad(&self, m: &[f64]) -> [f64; DIM] {
        assert_eq!(m.len(), self.k(), "{} expects {} moments", self.name(), self.k());
        let mut out = [0.0; DIM];
        out[..m.len()].copy_from_slice(m);
        out
    }

    /// Whether `H` is well defined and smooth at the moment vector `m`.
    pub fn domain_guard(&self, m: &[f64]) -> bool {
        let mm = self.pad(m);
        if m.iter().any(|v| !v.is_finite()) {
            return false;
        }
        if self.is_linear() {
            return true;
        }
        let v = mm[1] - mm[0] * mm[0];
        if !(v > 0.0 && v > VARIANCE_GUARD * mm[1]) {
            return false;
        }
        match self {
            Transformation::KurtosisZ(z) => z.in_domain(self.jet(&mm).v),
            _ => true,
        }
    }

    fn raw_jet(m: &[f64; DIM], which: &Transformation) -> Jet {
        match which {
            Transformation::Mean => Jet::coordinate(m, 0),
            Transformation::Variance => central2(m),
            Transformation::CohensD => Jet::coordinate(m, 0).mul(&central2(m).powf(-0.5)),
            Transformation::Skewness | Transformation::SkewnessZ(_) => central3(m).mul(&central2(m).powf(-1.5)),
            Transformation::Kurtosis | Transformation::KurtosisZ(_) => {
                central4(m).mul(&central2(m).powf(-2.0)).shift(-3.0)
            }
        }
    }

    fn jet(&self, m: &[f64; DIM]) -> Jet {
        let inner = Self::raw_jet(m, self);
        let mut j = match self {
            Transformation::SkewnessZ(z) | Transformation::KurtosisZ(z) => z.jet(&inner),
            _ => inner,
        };
        // Products are accumulated in different orders above and below the
        // diagonal; make the Hessian exactly symmetric.
        for a in 0..DIM {
            for b in 0..a {
                let v = 0.5 * (j.h[a][b] + j.h[b][a]);
                j.h[a][b] = v;
                j.h[b][a] = v;
            }
        }
        j
    }

    pub fn value(&self, m: &[f64]) -> f64 {
        self.jet(&self.pad(m)).v
    }

    pub fn gradient(&self, m: &[f64]) -> Vec<f64> {
        let k = self.k();
        self.jet(&self.pad(m)).g[..k].to_vec()
    }

    /// `K x K` Hessian.
    pub fn hessian(&self, m: &[f64]) -> Array2<f64> {
        let k = self.k();
        let j = self.jet(&self.pad(m));
        Array2::from_shape_fn((k, k), |(a, b)| j.h[a][b])
    }
}

impl fmt::Display for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn moment_vector(moments: &MomentEstimates, t: &Transformation, idx: usize) -> Result<Vec<f64>> {
    t.orders()
        .as_slice()
        .iter()
        .map(|&r| {
            moments
                .order(r)
                .map(|row| row[idx])
                .ok_or_else(|| Error::Config(format!("{} needs moment order {r}", t.name())))
        })
        .collect()
}

fn guard_error(t: &Transformation, grid: &Grid, index: usize) -> Error {
    Error::DomainGuardViolation { transform: t.name().to_string(), index, s: grid.points()[index] }
}

/// `H` applied pointwise to estimated moments.
pub fn evaluate(t: &Transformation, moments: &MomentEstimates) -> Result<Curve> {
    let grid = &moments.grid;
    let mut values = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let m = moment_vector(moments, t, idx)?;
        if !t.domain_guard(&m) {
            return Err(guard_error(t, grid, idx));
        }
        values.push(t.value(&m));
    }
    Curve::new(grid.clone(), values)
}

/// Functional delta residuals of a statistic together with its estimate
/// and estimated standard error.
#[derive(Debug, Clone)]
pub struct DeltaResidualSet {
    pub grid: Grid,
    /// `N x T`; row `n` is `dH(mu_hat) . R_n`.
    pub residuals: Array2<f64>,
    pub estimate: Curve,
    pub se: Curve,
    pub transform: Transformation,
    pub n: usize,
}

/// Builds the delta residuals `R~_n(s) = grad H(mu_hat(s)) . (X_n(s)^r - mu_hat^(r)(s))`.
pub fn delta_residuals(t: &Transformation, sample: &FunctionalSample) -> Result<DeltaResidualSet> {
    let orders = t.orders();
    let moments = pointwise_moments(sample, &orders);
    let grid = sample.grid();
    let x = sample.values();
    let (n, tt) = x.dim();
    let k = t.k();
    let mut residuals = Array2::zeros((n, tt));
    let mut estimate = Vec::with_capacity(tt);
    for j in 0..tt {
        let m = moments.at(j);
        if !t.domain_guard(&m) {
            return Err(guard_error(t, grid, j));
        }
        let jet = t.jet(&t.pad(&m));
        estimate.push(jet.v);
        let grad = &jet.g[..k];
        for i in 0..n {
            let xi = x[[i, j]];
            let mut acc = 0.0;
            let mut p = 1.0;
            for (r, g) in grad.iter().enumerate() {
                p *= xi;
                acc += g * (p - m[r]);
            }
            residuals[[i, j]] = acc;
        }
    }
    let se = se_from_residuals(grid, &residuals)?;
    Ok(DeltaResidualSet {
        grid: grid.clone(),
        residuals,
        estimate: Curve::new(grid.clone(), estimate)?,
        se,
        transform: *t,
        n,
    })
}

/// `se(s) = sqrt(N^-1 sum_n R~_n(s)^2) / sqrt(N)`.
pub fn se_from_residuals(grid: &Grid, residuals: &Array2<f64>) -> Result<Curve> {
    let n = residuals.nrows() as f64;
    let values = residuals
        .columns()
        .into_iter()
        .map(|c| (c.iter().map(|v| v * v).sum::<f64>() / n).sqrt() / n.sqrt())
        .collect();
    Curve::new(grid.clone(), values)
}

/// Estimated standard error of `H(mu_hat)` from the delta residuals.
pub fn se_estimate(drs: &DeltaResidualSet) -> Curve {
    se_from_residuals(&drs.grid, &drs.residuals).expect("residuals are finite")
}

/// Plug-in estimate of the `O(1/N)` bias of `H(mu_hat)`:
/// `(2N)^-1 sum_{k,k'} d2H/dm_k dm_k'(mu_hat) (mu_hat^(r_k + r_k') - mu_hat^(r_k) mu_hat^(r_k'))`.
pub fn bias_estimate(t: &Transformation, sample: &FunctionalSample) -> Result<Curve> {
    let k = t.k();
    let all = MomentOrders::first(2 * k as u32)?;
    let moments = pointwise_moments(sample, &all);
    let grid = sample.grid();
    let n = sample.n() as f64;
    let mut values = Vec::with_capacity(grid.len());
    for j in 0..grid.len() {
        // mu[r] is the order-r moment; mu[0] = 1.
        let mut mu = vec![1.0];
        mu.extend(moments.values.column(j).iter().copied());
        let m = &mu[1..=k];
        if !t.domain_guard(m) {
            return Err(guard_error(t, grid, j));
        }
        let h = t.hessian(m);
        let mut acc = 0.0;
        for a in 0..k {
            for b in 0..k {
                let (ra, rb) = (a + 1, b + 1);
                acc += h[[a, b]] * (mu[ra + rb] - mu[ra] * mu[rb]);
            }
        }
        values.push(acc / (2.0 * n));
    }
    Curve::new(grid.clone(), values)
}

/// Limiting covariance of `sqrt(N)(d_hat - d)` for a Gaussian process:
/// `c11 / (sigma sigma') + c11^2 mu mu' / (2 sigma^3 sigma'^3)`.
pub fn gaussian_cohens_d_cov(mu: &Curve, sigma: &Curve, c11: &Array2<f64>) -> Result<Array2<f64>> {
    mu.ensure_same_grid(sigma)?;
    let t = mu.len();
    if c11.dim() != (t, t) {
        return Err(Error::ShapeMismatch(format!("c11 is {:?}, expected ({t}, {t})", c11.dim())));
    }
    if let Some(i) = sigma.values().iter().position(|s| !(*s > 0.0)) {
        return Err(Error::Domain(format!("sigma must be positive, got {} at index {i}", sigma.values()[i])));
    }
    let (m, s) = (mu.values(), sigma.values());
    Ok(Array2::from_shape_fn((t, t), |(i, j)| {
        let c = c11[[i, j]];
        c / (s[i] * s[j]) + c * c * m[i] * m[j] / (2.0 * pow_int(s[i], 3) * pow_int(s[j], 3))
    }))
}

fn check_n(n: usize, min: usize) -> Result<f64> {
    if n < min {
        return Err(Error::SampleTooSmall { n, min });
    }
    Ok(n as f64)
}

fn gaussian_var_g2(n: usize) -> f64 {
    let n = n as f64;
    24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0).powi(2) * (n + 3.0) * (n + 5.0))
}

/// Exact standard deviation of `g1` for Gaussian samples of size `n`.
pub fn gaussian_se_g1(n: usize) -> Result<f64> {
    let n = check_n(n, 4)?;
    Ok((6.0 * (n - 2.0) / ((n + 1.0) * (n + 3.0))).sqrt())
}

/// Exact standard deviation of `g2` for Gaussian samples of size `n`.
pub fn gaussian_se_g2(n: usize) -> Result<f64> {
    check_n(n, 4)?;
    Ok(gaussian_var_g2(n).sqrt())
}

/// `E[g2] = -6/(n+1)` for Gaussian samples.
pub fn gaussian_bias_g2(n: usize) -> Result<f64> {
    let n = check_n(n, 4)?;
    Ok(-6.0 / (n + 1.0))
}
