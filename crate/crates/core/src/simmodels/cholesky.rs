//! Jittered Cholesky factorization for sampling Gaussian processes.

use ndarray::Array2;

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-6;

/// Lower-triangular factor `L` with `L L^T = A + jitter * I`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    pub lower: Array2<f64>,
    pub jitter: f64,
}

fn try_factor(a: &Array2<f64>, jitter: f64) -> Option<Array2<f64>> {
    let t = a.nrows();
    let mut l = Array2::<f64>::zeros((t, t));
    for j in 0..t {
        let mut d = a[[j, j]] + jitter;
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in (j + 1)..t {
            let mut v = a[[i, j]];
            for k in 0..j {
                v -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = v / d;
        }
    }
    Some(l)
}

/// Cholesky factor of a symmetric positive semi-definite matrix.
///
/// The factorization is first attempted with `jitter` on the diagonal. On
/// failure the jitter is escalated by factors of ten from `1e-10` up to
/// `1e-6`; the jitter that succeeded is returned with the factor.
pub fn chol_psd(matrix: &Array2<f64>, jitter: f64) -> Result<Cholesky> {
    let t = matrix.nrows();
    if matrix.ncols() != t {
        return Err(Error::ShapeMismatch(format!(
            "Cholesky needs a square matrix, got {}x{}",
            t,
            matrix.ncols()
        )));
    }
    if !(jitter >= 0.0) {
        return Err(Error::Domain(format!("jitter must be >= 0, got {jitter}")));
    }
    let mut asym = 0.0f64;
    for i in 0..t {
        for j in 0..i {
            asym = asym.max((matrix[[i, j]] - matrix[[j, i]]).abs());
        }
    }
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }

    let mut current = jitter;
    loop {
        if let Some(lower) = try_factor(matrix, current) {
            return Ok(Cholesky { lower, jitter: current });
        }
        let next = if current < JITTER_START { JITTER_START } else { current * 10.0 };
        if next > JITTER_MAX * (1.0 + 1e-9) {
            return Err(Error::NotPositiveDefinite { jitter: current });
        }
        current = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn reconstruction_error(a: &Array2<f64>, c: &Cholesky) -> f64 {
        let llt = c.lower.dot(&c.lower.t());
        let mut target = a.clone();
        for i in 0..a.nrows() {
            target[[i, i]] += c.jitter;
        }
        (&llt - &target).iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn identity_factors_to_identity() {
        let a = Array2::<f64>::eye(4);
        let c = chol_psd(&a, 0.0).unwrap();
        assert_eq!(c.lower, a);
        assert_eq!(c.jitter, 0.0);
    }

    #[test]
    fn two_by_two_hand_factorization() {
        let c = chol_psd(&array![[1.0, 0.5], [0.5, 1.0]], 0.0).unwrap();
        assert_eq!(c.lower[[0, 0]], 1.0);
        assert_eq!(c.lower[[1, 0]], 0.5);
        assert_eq!(c.lower[[0, 1]], 0.0);
        assert!((c.lower[[1, 1]] - 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rank_deficient_needs_jitter() {
        let a = Array2::from_elem((3, 3), 1.0);
        let c = chol_psd(&a, 0.0).unwrap();
        assert!(c.jitter > 0.0 && c.jitter <= 1e-6);
        assert!(reconstruction_error(&a, &c) <= 1e-8);
    }

    #[test]
    fn indefinite_matrix_fails() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(matches!(chol_psd(&a, 0.0), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let a = array![[1.0, 0.5], [0.4, 1.0]];
        assert!(matches!(chol_psd(&a, 0.0), Err(Error::NotSymmetric(_))));
    }
}
