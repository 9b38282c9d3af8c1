//! Keenan's one-degree-of-freedom test for nonlinearity against an AR(m)
//! null.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::special::f_sf;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeenanResult {
    pub statistic: f64,
    pub ar_order: usize,
    pub df1: usize,
    pub df2: usize,
    pub p_value: f64,
}

/// Default AR order: `n^(1/4)` rounded, at least 1.
pub fn default_ar_order(n: usize) -> usize {
    ((n as f64).powf(0.25).round() as usize).max(1)
}

/// Least-squares residuals of `target` on the columns of `design`.
fn ols_residuals(design: &DMatrix<f64>, target: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = design.clone().svd(true, true);
    let sv = &svd.singular_values;
    let max = sv.max();
    if !(max > 0.0) || sv.min() <= max * 1e-12 {
        return Err(Error::SingularRegression);
    }
    let coef = svd
        .solve(target, 0.0)
        .map_err(|_| Error::SingularRegression)?;
    Ok(target - design * coef)
}

pub fn keenan_test(values: &[f64], m: usize) -> Result<KeenanResult> {
    let n = values.len();
    if m == 0 || n <= 2 * m + 2 {
        return Err(Error::TooShort {
            needed: 2 * m + 2,
            got: n,
        });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if values.iter().all(|v| (v - mean).abs() == 0.0) {
        return Err(Error::ZeroVariance);
    }

    let rows = n - m;
    let design = DMatrix::from_fn(
        rows,
        m + 1,
        |r, c| {
            if c == 0 {
                1.0
            } else {
                values[m + r - c]
            }
        },
    );
    let y = DVector::from_fn(rows, |r, _| values[m + r]);

    let resid = ols_residuals(&design, &y)?;
    let fitted = &y - &resid;
    let fitted_sq = fitted.map(|v| v * v);
    let xi = ols_residuals(&design, &fitted_sq)?;

    let sxx = xi.dot(&xi);
    let see = resid.dot(&resid);
    if !(sxx > 0.0) || !(see > 0.0) {
        return Err(Error::SingularRegression);
    }
    let eta_sq = resid.dot(&xi).powi(2) / sxx;
    let df2 = n - 2 * m - 2;
    let denom = see - eta_sq;
    if !(denom > 0.0) {
        return Err(Error::SingularRegression);
    }
    let statistic = (eta_sq * df2 as f64 / denom).max(0.0);
    Ok(KeenanResult {
        statistic,
        ar_order: m,
        df1: 1,
        df2,
        p_value: f_sf(statistic, 1, df2),
    })
}
