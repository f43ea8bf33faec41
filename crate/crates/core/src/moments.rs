//! Pointwise non-centered sample moments and moment residuals.
//!
//! All averages use the divisor `N`, not `N - 1`:
//! `mu_hat^(r)(s) = N^-1 sum_n X_n(s)^r`, and the residuals
//! `R^(r)_n(s) = X_n(s)^r - mu_hat^(r)(s)` sum to zero at every `s`.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::fdata::{FunctionalSample, Grid};

/// Largest supported moment order (kurtosis bias needs `4 + 4`).
pub const MAX_ORDER: u32 = 8;

/// Strictly increasing positive moment orders `r_1 < ... < r_K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentOrders(Vec<u32>);

impl MomentOrders {
    pub fn new(orders: Vec<u32>) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::Config("at least one moment order is required".into()));
        }
        if orders[0] < 1 {
            return Err(Error::UnsupportedOrder(orders[0]));
        }
        if let Some(&r) = orders.iter().find(|&&r| r > MAX_ORDER) {
            return Err(Error::UnsupportedOrder(r));
        }
        if orders.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!("moment orders must be strictly increasing: {orders:?}")));
        }
        Ok(Self(orders))
    }

    /// `1, 2, ..., k`.
    pub fn first(k: u32) -> Result<Self> {
        Self::new((1..=k).collect())
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> u32 {
        *self.0.last().expect("non-empty")
    }
}

/// `x^r` by repeated multiplication, `r <= 8`.
#[inline]
pub fn pow_int(x: f64, r: u32) -> f64 {
    match r {
        0 => 1.0,
        1 => x,
        2 => x * x,
        3 => x * x * x,
        4 => {
            let x2 = x * x;
            x2 * x2
        }
        _ => {
            let mut acc = x;
            for _ in 1..r {
                acc *= x;
            }
            acc
        }
    }
}

/// `K x T` matrix of pointwise moments; row `k` is `mu_hat^(r_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimates {
    pub grid: Grid,
    pub values: Array2<f64>,
    pub orders: MomentOrders,
    pub n: usize,
}

impl MomentEstimates {
    /// Moment vector `(mu_hat^(r_1)(s_t), ..., mu_hat^(r_K)(s_t))` at grid index `t`.
    pub fn at(&self, t: usize) -> Vec<f64> {
        self.values.column(t).to_vec()
    }

    /// The row for order `r`, if present.
    pub fn order(&self, r: u32) -> Option<ndarray::ArrayView1<'_, f64>> {
        self.orders.as_slice().iter().position(|&o| o == r).map(|k| self.values.row(k))
    }
}

pub fn pointwise_moments(sample: &FunctionalSample, orders: &MomentOrders) -> MomentEstimates {
    let x = sample.values();
    let n = sample.n();
    let t = sample.t();
    let mut values = Array2::zeros((orders.len(), t));
    for (k, &r) in orders.as_slice().iter().enumerate() {
        for j in 0..t {
            let s: f64 = x.column(j).iter().map(|&v| pow_int(v, r)).sum();
            values[[k, j]] = s / n as f64;
        }
    }
    MomentEstimates { grid: sample.grid().clone(), values, orders: orders.clone(), n }
}

/// Moment residuals, one `N x T` block per order.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualMatrix {
    pub grid: Grid,
    pub values: Vec<Array2<f64>>,
    pub orders: MomentOrders,
}

impl ResidualMatrix {
    pub fn order(&self, r: u32) -> Option<&Array2<f64>> {
        self.orders.as_slice().iter().position(|&o| o == r).map(|k| &self.values[k])
    }
}

pub fn moment_residuals(sample: &FunctionalSample, orders: &MomentOrders) -> ResidualMatrix {
    let moments = pointwise_moments(sample, orders);
    let x = sample.values();
    let values = orders
        .as_slice()
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let mu = moments.values.row(k);
            Array2::from_shape_fn(x.dim(), |(i, j)| pow_int(x[[i, j]], r) - mu[j])
        })
        .collect();
    ResidualMatrix { grid: sample.grid().clone(), values, orders: orders.clone() }
}

/// `T x T` matrix with entries `N^-1 sum_n a_n(s_t) b_n(s_t')`.
pub fn empirical_cross_cov(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(format!(
            "residual slices have shapes {:?} and {:?}",
            a.dim(),
            b.dim()
        )));
    }
    let n = a.len_of(Axis(0));
    if n == 0 {
        return Err(Error::ShapeMismatch("empty residual slice".into()));
    }
    Ok(a.t().dot(&b) / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn column(values: &[f64]) -> FunctionalSample {
        let n = values.len();
        let grid = Grid::new(vec![0.0, 1.0]).unwrap();
        let v = Array2::from_shape_fn((n, 2), |(i, _)| values[i]);
        FunctionalSample::new(grid, v).unwrap()
    }

    #[test]
    fn orders_validation() {
        assert!(MomentOrders::new(vec![]).is_err());
        assert!(MomentOrders::new(vec![0, 1]).is_err());
        assert!(MomentOrders::new(vec![2, 1]).is_err());
        assert!(MomentOrders::new(vec![1, 1]).is_err());
        assert!(matches!(MomentOrders::new(vec![1, 9]), Err(Error::UnsupportedOrder(9))));
        assert_eq!(MomentOrders::first(4).unwrap().as_slice(), &[1, 2, 3, 4]);
    }

    #[test]
    fn pow_matches_repeated_product() {
        for r in 0..=MAX_ORDER {
            let want: f64 = (0..r).fold(1.0, |acc, _| acc * 1.7);
            assert!((pow_int(1.7, r) - want).abs() <= 1e-15 * want);
        }
    }

    #[test]
    fn mean_and_second_moment() {
        let s = column(&[1.0, 2.0, 3.0]);
        let m = pointwise_moments(&s, &MomentOrders::first(2).unwrap());
        assert_eq!(m.values[[0, 0]], 2.0);
        assert!((m.values[[1, 0]] - 14.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn constant_sample_moments() {
        let s = column(&[1.5, 1.5, 1.5, 1.5]);
        let m = pointwise_moments(&s, &MomentOrders::first(4).unwrap());
        for (k, r) in (1..=4).enumerate() {
            assert_eq!(m.values[[k, 1]], 1.5f64.powi(r));
        }
    }

    #[test]
    fn residuals_by_hand() {
        let s = column(&[1.0, 2.0, 3.0]);
        let r = moment_residuals(&s, &MomentOrders::first(2).unwrap());
        assert_eq!(r.values[0].column(0).to_vec(), vec![-1.0, 0.0, 1.0]);
        let want = [1.0 - 14.0 / 3.0, 4.0 - 14.0 / 3.0, 9.0 - 14.0 / 3.0];
        for (g, w) in r.values[1].column(0).iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
        assert!(r.values[1].column(0).sum().abs() < 1e-14);
    }

    #[test]
    fn cross_cov_by_hand() {
        let a = array![[-1.0], [0.0], [1.0]];
        let c = empirical_cross_cov(a.view(), a.view()).unwrap();
        assert!((c[[0, 0]] - 2.0 / 3.0).abs() < 1e-15);
        let b = array![[1.0], [-2.0], [1.0]];
        assert_eq!(empirical_cross_cov(a.view(), b.view()).unwrap()[[0, 0]], 0.0);
        let wrong = array![[1.0, 2.0], [0.0, 1.0], [1.0, 1.0]];
        assert!(matches!(empirical_cross_cov(a.view(), wrong.view()), Err(Error::ShapeMismatch(_))));
    }

    proptest! {
        #[test]
        fn residuals_sum_to_zero(
            n in 2usize..30,
            data in proptest::collection::vec(-5.0f64..5.0, 30 * 4),
        ) {
            let grid = Grid::unit(4).unwrap();
            let v = Array2::from_shape_fn((n, 4), |(i, j)| data[i * 4 + j]);
            let s = FunctionalSample::new(grid, v).unwrap();
            let r = moment_residuals(&s, &MomentOrders::first(4).unwrap());
            for (k, block) in r.values.iter().enumerate() {
                for j in 0..4 {
                    let col = block.column(j);
                    let scale = col.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
                    prop_assert!(col.sum().abs() <= 1e-10 * n as f64 * scale, "order {} point {}", k + 1, j);
                }
            }
        }

        #[test]
        fn auto_cross_cov_is_symmetric_psd(
            n in 3usize..20,
            data in proptest::collection::vec(-3.0f64..3.0, 20 * 3),
        ) {
            let a = Array2::from_shape_fn((n, 3), |(i, j)| data[i * 3 + j]);
            let c = empirical_cross_cov(a.view(), a.view()).unwrap();
            for i in 0..3 {
                prop_assert!(c[[i, i]] >= 0.0);
                for j in 0..3 {
                    prop_assert!((c[[i, j]] - c[[j, i]]).abs() <= 1e-10);
                }
            }
            // 2x2 and full principal minors are nonnegative.
            let m2 = c[[0, 0]] * c[[1, 1]] - c[[0, 1]] * c[[1, 0]];
            prop_assert!(m2 >= -1e-10);
            let det = c[[0, 0]] * (c[[1, 1]] * c[[2, 2]] - c[[1, 2]] * c[[2, 1]])
                - c[[0, 1]] * (c[[1, 0]] * c[[2, 2]] - c[[1, 2]] * c[[2, 0]])
                + c[[0, 2]] * (c[[1, 0]] * c[[2, 1]] - c[[1, 1]] * c[[2, 0]]);
            prop_assert!(det >= -1e-10);
        }
    }
}
