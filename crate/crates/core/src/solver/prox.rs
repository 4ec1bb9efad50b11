use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};

/// `sign(v) * max(|v| - tau, 0)`.
#[inline]
pub fn soft_threshold_scalar(v: f64, tau: f64) -> f64 {
    if v > tau {
        v - tau
    } else if v < -tau {
        v + tau
    } else {
        0.0
    }
}

/// Elementwise soft thresholding, the proximal map of `tau * ||.||_1`.
pub fn soft_threshold(v: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    debug_assert!(tau >= 0.0);
    v.map(|x| soft_threshold_scalar(x, tau))
}

/// Soft-thresholds the singular values: the proximal map of
/// `tau * ||.||_*`.
pub fn singular_value_threshold(w: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    debug_assert!(tau >= 0.0);
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric {
            iteration: 0,
            message: "singular value thresholding of a non-finite matrix".into(),
        });
    }
    if w.is_empty() {
        return Ok(w.clone());
    }
    let svd = SVD::try_new(w.clone(), true, true, f64::EPSILON, 0).ok_or_else(|| Error::Numeric {
        iteration: 0,
        message: "SVD did not converge".into(),
    })?;
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut out = DMatrix::zeros(w.nrows(), w.ncols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let shrunk = s - tau;
        if shrunk > 0.0 {
            out += u.column(k) * v_t.row(k) * shrunk;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use proptest::prelude::*;

    #[test]
    fn scalar_cases() {
        assert!((soft_threshold_scalar(1.2, 0.5) - 0.7).abs() < 1e-15);
        assert_eq!(soft_threshold_scalar(-0.3, 0.5), 0.0);
        assert_eq!(soft_threshold_scalar(-1.5, 0.5), -1.0);
        assert_eq!(soft_threshold_scalar(0.5, 0.5), 0.0);
        let v = dmatrix![1.0, -2.0; 0.25, 3.5];
        assert_eq!(soft_threshold(&v, 0.0), v);
    }

    #[test]
    fn svt_diagonal() {
        let out = singular_value_threshold(&dmatrix![3.0, 0.0; 0.0, 1.0], 2.0).unwrap();
        assert!((out - dmatrix![1.0, 0.0; 0.0, 0.0]).amax() < 1e-12);
    }

    #[test]
    fn svt_identity_and_full_shrink() {
        let w = dmatrix![1.0, 2.0, -1.0; 0.5, -3.0, 2.0; 4.0, 0.0, 1.0; -2.0, 1.0, 0.0];
        assert!((singular_value_threshold(&w, 0.0).unwrap() - &w).amax() < 1e-10);
        let smax = w.singular_values().max();
        assert_eq!(singular_value_threshold(&w, smax).unwrap(), DMatrix::zeros(4, 3));
    }

    #[test]
    fn svt_rejects_nan() {
        let w = dmatrix![1.0, f64::NAN];
        assert!(matches!(singular_value_threshold(&w, 1.0), Err(Error::Numeric { .. })));
    }

    proptest! {
        #[test]
        fn soft_threshold_nonexpansive(a in -10.0f64..10.0, b in -10.0f64..10.0, tau in 0.0f64..5.0) {
            let d = (soft_threshold_scalar(a, tau) - soft_threshold_scalar(b, tau)).abs();
            prop_assert!(d <= (a - b).abs() + 4.0 * f64::EPSILON * (a.abs() + b.abs() + tau));
        }

        #[test]
        fn svt_shrinks_nuclear_norm(
            entries in prop::collection::vec(-3.0f64..3.0, 12),
            tau in 0.0f64..4.0,
        ) {
            let w = DMatrix::from_vec(4, 3, entries);
            let out = singular_value_threshold(&w, tau).unwrap();
            let sv_in = w.singular_values();
            let sv_out = out.singular_values();
            prop_assert!(sv_out.sum() <= sv_in.sum() + 1e-9);
            let rank = |s: &nalgebra::DVector<f64>| s.iter().filter(|v| **v > 1e-9).count();
            prop_assert!(rank(&sv_out) <= rank(&sv_in));
        }
    }
}
