//! Independent reference computations used to check the library: finite
//! differences, a quadrature Bessel function, brute-force Monte Carlo
//! covariances and Isserlis-expansion moment covariances.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fdata::{fmt_f64, Curve, Grid};
use crate::moments::pointwise_moments;
use crate::rng::StreamKey;
use crate::simmodels::{bessel_k, correlation_matrix, PreparedModel};
use crate::transforms::{delta_residuals, evaluate, gaussian_cohens_d_cov, Transformation};

/// Comparison of computed values against a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: String,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    pub samples: usize,
    pub tolerance: f64,
    /// Whether the tolerance applies to the relative error.
    pub relative: bool,
    pub pass: bool,
}

impl OracleReport {
    /// Compares `(computed, reference)` pairs against an absolute tolerance.
    pub fn absolute(name: &str, pairs: impl IntoIterator<Item = (f64, f64)>, tolerance: f64) -> Self {
        Self::build(name, pairs, tolerance, false)
    }

    /// Compares `(computed, reference)` pairs against a relative tolerance.
    pub fn relative(name: &str, pairs: impl IntoIterator<Item = (f64, f64)>, tolerance: f64) -> Self {
        Self::build(name, pairs, tolerance, true)
    }

    fn build(name: &str, pairs: impl IntoIterator<Item = (f64, f64)>, tolerance: f64, relative: bool) -> Self {
        let (mut abs, mut rel, mut samples) = (0.0f64, 0.0f64, 0);
        let mut finite = true;
        for (got, want) in pairs {
            let e = (got - want).abs();
            finite &= e.is_finite();
            abs = abs.max(e);
            rel = rel.max(if want == 0.0 { e } else { e / want.abs() });
            samples += 1;
        }
        let err = if relative { rel } else { abs };
        Self {
            name: name.to_string(),
            max_abs_err: abs,
            max_rel_err: rel,
            samples,
            tolerance,
            relative,
            pass: finite && err <= tolerance,
        }
    }

    pub const CSV_HEADER: &'static str = "name,max_abs_err,max_rel_err,samples,tolerance,relative,pass";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.name,
            fmt_f64(self.max_abs_err),
            fmt_f64(self.max_rel_err),
            self.samples,
            fmt_f64(self.tolerance),
            self.relative,
            self.pass
        )
    }
}

fn fd_error(k: usize, x: f64) -> Error {
    Error::DomainGuardViolation { transform: "finite difference".into(), index: k, s: x }
}

/// Central differences `(f(x + h e_k) - f(x - h e_k)) / 2h`; `f` returns
/// `None` outside its domain.
pub fn finite_diff_grad(f: impl Fn(&[f64]) -> Option<f64>, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|k| {
            p[k] = x[k] + h;
            let up = f(&p).ok_or_else(|| fd_error(k, p[k]))?;
            p[k] = x[k] - h;
            let down = f(&p).ok_or_else(|| fd_error(k, p[k]))?;
            p[k] = x[k];
            Ok((up - down) / (2.0 * h))
        })
        .collect()
}

/// Central-difference Jacobian; entry `[a][b]` is `d f_a / d x_b`.
pub fn finite_diff_jacobian(f: impl Fn(&[f64]) -> Option<Vec<f64>>, x: &[f64], h: f64) -> Result<Vec<Vec<f64>>> {
    let mut p = x.to_vec();
    let mut columns = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        p[k] = x[k] + h;
        let up = f(&p).ok_or_else(|| fd_error(k, p[k]))?;
        p[k] = x[k] - h;
        let down = f(&p).ok_or_else(|| fd_error(k, p[k]))?;
        p[k] = x[k];
        columns.push(up.iter().zip(&down).map(|(u, d)| (u - d) / (2.0 * h)).collect::<Vec<_>>());
    }
    let m = columns.first().map_or(0, Vec::len);
    Ok((0..m).map(|a| columns.iter().map(|c| c[a]).collect()).collect())
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let pair = f(c - h * XGK[j]) + f(c + h * XGK[j]);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod quadrature of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let mut parts = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..5000 {
        let total: f64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if err <= rel_tol * total.abs() {
            break;
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .expect("non-empty");
        let (lo, hi, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(&f, lo, mid)));
        parts.push((mid, hi, gk15(&f, mid, hi)));
    }
    parts.iter().map(|p| p.2 .0).sum()
}

/// `K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt` by adaptive quadrature.
pub fn bessel_k_quadrature(nu: f64, x: f64) -> f64 {
    let log_integrand = move |t: f64| -x * t.cosh() + nu * t;
    // The integrand peaks where sinh t = nu / x and is negligible once it has
    // fallen 60 e-folds below the peak.
    let peak = (nu / x).asinh();
    let top = log_integrand(peak);
    let mut end = peak + 1.0;
    while log_integrand(end) > top - 60.0 {
        end += 1.0;
    }
    let f = move |t: f64| 0.5 * ((-x * t.cosh() + nu * t - top).exp() + (-x * t.cosh() - nu * t - top).exp());
    let mut knots = vec![0.0];
    if peak > 0.0 {
        knots.push(peak);
    }
    knots.push(end);
    let scaled: f64 = knots.windows(2).map(|w| integrate(f, w[0], w[1], 1e-14)).sum();
    scaled * top.exp()
}

/// `n` times the Monte Carlo covariance of `H(mu_hat)` over `reps` samples of size `n`.
pub fn mc_transformed_cov(
    model: &PreparedModel,
    t: &Transformation,
    n: usize,
    reps: usize,
    key: StreamKey,
) -> Result<Array2<f64>> {
    if reps < 2 {
        return Err(Error::Config(format!("need at least 2 Monte Carlo replicates, got {reps}")));
    }
    let orders = t.orders();
    let estimates: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let sample = model.sample(n, StreamKey::new(key.seed, rep).with_counter(key.counter))?;
            let m = pointwise_moments(&sample, &orders);
            Ok(evaluate(t, &m)?.values().to_vec())
        })
        .collect::<Result<_>>()?;
    let tt = model.grid().len();
    let r = reps as f64;
    let mean: Vec<f64> = (0..tt).map(|j| estimates.iter().map(|e| e[j]).sum::<f64>() / r).collect();
    let mut cov = Array2::zeros((tt, tt));
    for e in &estimates {
        for i in 0..tt {
            let di = e[i] - mean[i];
            for j in 0..tt {
                cov[[i, j]] += di * (e[j] - mean[j]);
            }
        }
    }
    Ok(cov * (n as f64 / r))
}

/// Covariance block `Cov(X(s)^r1, X(s')^r2)` of a Gaussian process with the
/// given mean and covariance, `r1, r2 in {1, 2}`.
pub fn isserlis_moment_cov(mean: &Curve, cov: &Array2<f64>, r1: u32, r2: u32) -> Result<Array2<f64>> {
    for r in [r1, r2] {
        if !(1..=2).contains(&r) {
            return Err(Error::UnsupportedOrder(r));
        }
    }
    let t = mean.len();
    if cov.dim() != (t, t) {
        return Err(Error::ShapeMismatch(format!("covariance is {:?}, expected ({t}, {t})", cov.dim())));
    }
    let mu = mean.values();
    Ok(Array2::from_shape_fn((t, t), |(i, j)| {
        let c = cov[[i, j]];
        match (r1, r2) {
            (1, 1) => c,
            (1, 2) => 2.0 * mu[j] * c,
            (2, 1) => 2.0 * mu[i] * c,
            _ => 2.0 * c * c + 4.0 * mu[i] * mu[j] * c,
        }
    }))
}

/// Oracle suites runnable from the command line.
pub const ORACLE_NAMES: [&str; 6] = ["bessel", "derivatives", "isserlis", "cohens_d_cov", "lkc", "all"];

/// A two-point Gaussian design with correlation `rho`.
fn two_point_gaussian(mean: [f64; 2], sd: [f64; 2], rho: f64) -> Result<PreparedModel> {
    let grid = Grid::new(vec![0.0, 1.0])?;
    let corr = ndarray::array![[1.0, rho], [rho, 1.0]];
    PreparedModel::gaussian(&grid, mean.to_vec(), sd.to_vec(), &corr, 0.0)
}

fn bessel_suite() -> Vec<OracleReport> {
    use std::f64::consts::PI;
    let xs: Vec<f64> = (0..=40).map(|i| 1e-4 * (3e5f64).powf(i as f64 / 40.0)).collect();
    let half = xs.iter().map(|&x| (bessel_k(0.5, x).unwrap(), (PI / (2.0 * x)).sqrt() * (-x).exp()));
    let three = xs
        .iter()
        .map(|&x| (bessel_k(1.5, x).unwrap(), (PI / (2.0 * x)).sqrt() * (-x).exp() * (1.0 + 1.0 / x)));
    let mut quad = Vec::new();
    for &nu in &[0.25, 0.3, 0.5, 0.7, 0.9, 1.0, 2.4, 7.5] {
        for &x in &xs {
            quad.push((bessel_k(nu, x).unwrap(), bessel_k_quadrature(nu, x)));
        }
    }
    vec![
        OracleReport::relative("bessel_k_half", half, 1e-10),
        OracleReport::relative("bessel_k_three_halves", three, 1e-10),
        OracleReport::relative("bessel_k_quadrature", quad, 1e-10),
    ]
}

fn derivative_suite(seed: u64) -> Vec<OracleReport> {
    use rand::Rng;
    let mut rng = StreamKey::new(seed, 0).rng();
    let mut out = Vec::new();
    for name in crate::transforms::TRANSFORM_NAMES {
        let t = Transformation::from_name(name, 60).expect("built-in");
        let (mut grads, mut hess) = (Vec::new(), Vec::new());
        let mut points = 0;
        while points < 100 {
            let mean: f64 = rng.random_range(-1.0..1.0);
            let sd: f64 = rng.random_range(0.5..2.0);
            let skew: f64 = rng.random_range(-0.5..0.5);
            let exk: f64 = rng.random_range(-0.5..1.0);
            let (c2, c3) = (sd * sd, skew * sd.powi(3));
            let c4 = (exk + 3.0) * c2 * c2;
            let m1 = mean;
            let full = [
                m1,
                c2 + m1 * m1,
                c3 + 3.0 * m1 * c2 + m1.powi(3),
                c4 + 4.0 * m1 * c3 + 6.0 * m1 * m1 * c2 + m1.powi(4),
            ];
            let m = &full[..t.k()];
            // Guard-interior: |mean| <= sd, i.e. the variance is at least half of m2.
            if mean.abs() > sd || !t.domain_guard(m) {
                continue;
            }
            let Ok(fd) = finite_diff_grad(|x| t.domain_guard(x).then(|| t.value(x)), m, 1e-4) else { continue };
            let Ok(fdh) = finite_diff_jacobian(|x| t.domain_guard(x).then(|| t.gradient(x)), m, 1e-4) else {
                continue;
            };
            points += 1;
            let g = t.gradient(m);
            // Identically zero derivatives (e.g. the mean's Hessian) are compared unscaled.
            let unit = |s: f64| if s > 0.0 { s } else { 1.0 };
            let gs = unit(g.iter().fold(0.0f64, |a, v| a.max(v.abs())));
            grads.extend(g.iter().zip(&fd).map(|(a, b)| (a / gs, b / gs)));
            let h = t.hessian(m);
            let hs = unit(h.iter().fold(0.0f64, |a, v| a.max(v.abs())));
            for a in 0..t.k() {
                for b in 0..t.k() {
                    hess.push((h[[a, b]] / hs, fdh[a][b] / hs));
                }
            }
        }
        out.push(OracleReport::absolute(&format!("gradient_{name}"), grads, 1e-6));
        out.push(OracleReport::absolute(&format!("hessian_{name}"), hess, 1e-4));
    }
    out
}

fn isserlis_suite(seed: u64) -> Result<Vec<OracleReport>> {
    let model = two_point_gaussian([0.0, 0.0], [1.0, 1.5], 0.6)?;
    let cov = model.covariance().expect("gaussian");
    let mean = Curve::new(model.grid().clone(), model.mean().to_vec())?;
    let c22 = isserlis_moment_cov(&mean, &cov, 2, 2)?;
    let c12 = isserlis_moment_cov(&mean, &cov, 1, 2)?;
    let mc = mc_transformed_cov(&model, &Transformation::Variance, 200, 20_000, StreamKey::new(seed, 0))?;
    // Variance of the variance estimator is dominated by c22 for a centered process.
    let scale = c22.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(vec![
        OracleReport::absolute("isserlis_c12_centered", c12.iter().map(|v| (*v, 0.0)), 0.0),
        OracleReport::absolute(
            "isserlis_c22_vs_mc_variance",
            mc.iter().zip(c22.iter()).map(|(a, b)| (a / scale, b / scale)),
            0.05,
        ),
    ])
}

fn cohens_d_suite(seed: u64) -> Result<Vec<OracleReport>> {
    let model = two_point_gaussian([0.5, -0.3], [1.0, 0.8], 0.5)?;
    let cov = model.covariance().expect("gaussian");
    let grid = model.grid().clone();
    let mu = Curve::new(grid.clone(), model.mean().to_vec())?;
    let sigma = Curve::new(grid, model.amplitude().to_vec())?;
    let want = gaussian_cohens_d_cov(&mu, &sigma, &cov)?;
    let mc = mc_transformed_cov(&model, &Transformation::CohensD, 1000, 100_000, StreamKey::new(seed, 0))?;
    let sample = model.sample(5000, StreamKey::new(seed, 1))?;
    let drs = delta_residuals(&Transformation::CohensD, &sample)?;
    let emp = crate::moments::empirical_cross_cov(drs.residuals.view(), drs.residuals.view())?;
    Ok(vec![
        OracleReport::absolute("cohens_d_cov_mc", mc.iter().copied().zip(want.iter().copied()), 0.05),
        OracleReport::absolute("cohens_d_cov_delta_residuals", emp.iter().copied().zip(want.iter().copied()), 0.05),
    ])
}

fn lkc_suite(seed: u64) -> Result<Vec<OracleReport>> {
    let grid = Grid::unit(175)?;
    let h: f64 = 0.1;
    let corr = correlation_matrix(&grid, |s, t| (-(s - t).powi(2) / (2.0 * h * h)).exp());
    let model = PreparedModel::gaussian(&grid, vec![0.0; 175], vec![1.0; 175], &corr, 0.0)?;
    let sample = model.sample(1000, StreamKey::new(seed, 0))?;
    let drs = delta_residuals(&Transformation::Mean, &sample)?;
    let l1 = crate::quantile::estimate_lkc1(&drs.residuals, &drs.se, &drs.grid)?;
    Ok(vec![OracleReport::relative("lkc1_squared_exponential", [(l1, 1.0 / h)], 0.05)])
}

/// Runs one of [`ORACLE_NAMES`].
pub fn run_oracle(name: &str, seed: u64) -> Result<Vec<OracleReport>> {
    Ok(match name {
        "bessel" => bessel_suite(),
        "derivatives" => derivative_suite(seed),
        "isserlis" => isserlis_suite(seed)?,
        "cohens_d_cov" => cohens_d_suite(seed)?,
        "lkc" => lkc_suite(seed)?,
        "all" => {
            let mut all = bessel_suite();
            all.extend(derivative_suite(seed));
            all.extend(isserlis_suite(seed)?);
            all.extend(cohens_d_suite(seed)?);
            all.extend(lkc_suite(seed)?);
            all
        }
        other => {
            return Err(Error::Config(format!(
                "unknown oracle {other:?} (expected one of {})",
                ORACLE_NAMES.join(", ")
            )))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_gradient_of_variance() {
        let g = finite_diff_grad(|x| Some(x[1] - x[0] * x[0]), &[2.0, 14.0 / 3.0], 1e-4).unwrap();
        assert!((g[0] + 4.0).abs() < 1e-8 && (g[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fd_gradient_of_linear_function_is_exact() {
        let g = finite_diff_grad(|x| Some(3.0 * x[0] - 0.5 * x[1] + 2.0), &[0.25, -1.0], 0.5).unwrap();
        assert!((g[0] - 3.0).abs() < 1e-12 && (g[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn fd_gradient_of_cohens_d() {
        let x = [2.0, 14.0 / 3.0];
        let t = Transformation::CohensD;
        let fd = finite_diff_grad(|m| t.domain_guard(m).then(|| t.value(m)), &x, 1e-4).unwrap();
        for (a, b) in t.gradient(&x).iter().zip(&fd) {
            assert!(((a - b) / a).abs() <= 1e-6);
        }
    }

    #[test]
    fn fd_reports_guard_boundary() {
        let t = Transformation::Variance;
        let r = finite_diff_grad(|m| t.domain_guard(m).then(|| t.value(m)), &[1.0, 1.0 + 1e-6], 1e-4);
        assert!(matches!(r, Err(Error::DomainGuardViolation { .. })));
    }

    #[test]
    fn quadrature_integrates_polynomials_and_gaussian() {
        let v = integrate(|x| x * x * x - x, 0.0, 2.0, 1e-14);
        assert!((v - 2.0).abs() < 1e-13);
        let v = integrate(|x| (-x * x).exp(), -8.0, 8.0, 1e-14);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn quadrature_bessel_closed_form() {
        let x: f64 = 1.3;
        let want = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp();
        assert!((bessel_k_quadrature(0.5, x) / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isserlis_blocks() {
        let grid = Grid::unit(3).unwrap();
        let cov = ndarray::array![[1.0, 0.5, 0.2], [0.5, 4.0, 0.1], [0.2, 0.1, 2.25]];
        let zero = Curve::constant(grid.clone(), 0.0).unwrap();
        let c22 = isserlis_moment_cov(&zero, &cov, 2, 2).unwrap();
        for i in 0..3 {
            assert_eq!(c22[[i, i]], 2.0 * cov[[i, i]] * cov[[i, i]]);
        }
        assert!(isserlis_moment_cov(&zero, &cov, 1, 2).unwrap().iter().all(|v| *v == 0.0));
        let mu = Curve::new(grid, vec![1.0, -2.0, 0.5]).unwrap();
        let c12 = isserlis_moment_cov(&mu, &cov, 1, 2).unwrap();
        let c21 = isserlis_moment_cov(&mu, &cov, 2, 1).unwrap();
        assert_eq!(c12.t(), c21);
        assert!(matches!(isserlis_moment_cov(&mu, &cov, 3, 1), Err(Error::UnsupportedOrder(3))));
    }

    #[test]
    fn mc_covariance_of_mean_is_model_covariance() {
        let model = two_point_gaussian([1.0, 2.0], [1.0, 2.0], -0.4).unwrap();
        let mc = mc_transformed_cov(&model, &Transformation::Mean, 20, 10_000, StreamKey::new(3, 0)).unwrap();
        let cov = model.covariance().unwrap();
        for (a, b) in mc.iter().zip(cov.iter()) {
            assert!((a - b).abs() < 0.1, "{mc:?} vs {cov:?}");
        }
    }

    #[test]
    fn mc_skewness_variance_approaches_six() {
        let model = two_point_gaussian([0.0, 1.0], [1.0, 1.0], 0.3).unwrap();
        let mc = mc_transformed_cov(&model, &Transformation::Skewness, 2000, 10_000, StreamKey::new(4, 0)).unwrap();
        assert!((mc[[0, 0]] / 6.0 - 1.0).abs() < 0.1, "{}", mc[[0, 0]]);
        assert!((mc[[1, 1]] / 6.0 - 1.0).abs() < 0.1, "{}", mc[[1, 1]]);
    }

    #[test]
    fn reports_flag_failures() {
        let r = OracleReport::absolute("x", [(1.0, 1.1), (2.0, 2.0)], 0.05);
        assert!(!r.pass && r.samples == 2);
        let r = OracleReport::relative("x", [(1.0, 1.0 + 1e-12)], 1e-10);
        assert!(r.pass);
        assert!(!OracleReport::absolute("x", [(f64::NAN, 0.0)], 1.0).pass);
        assert!(run_oracle("nope", 1).is_err());
    }

    #[test]
    fn every_oracle_passes() {
        let reports = run_oracle("all", 11).unwrap();
        assert!(reports.len() >= 20);
        for r in &reports {
            assert!(r.pass, "{}", r.csv_row());
        }
    }
}
