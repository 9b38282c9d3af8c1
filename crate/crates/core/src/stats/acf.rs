use serde::{Deserialize, Serialize};

use super::special::chi_square_sf;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LjungBoxResult {
    pub statistic: f64,
    pub lags: usize,
    pub df: usize,
    pub p_value: f64,
}

fn centered(values: &[f64]) -> Result<(Vec<f64>, f64)> {
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let dev: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    if denom <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((dev, denom))
}

fn acf_from(dev: &[f64], denom: f64, k: usize) -> f64 {
    dev[k..].iter().zip(dev).map(|(a, b)| a * b).sum::<f64>() / denom
}

/// Sample autocorrelation at lag `k` with the full-sample denominator.
pub fn autocorrelation(values: &[f64], k: usize) -> Result<f64> {
    if k >= values.len() {
        return Err(Error::LagOutOfRange {
            lag: k,
            len: values.len(),
        });
    }
    let (dev, denom) = centered(values)?;
    Ok(acf_from(&dev, denom, k))
}

/// Autocorrelations for lags `1..=max_lag`.
pub fn acf(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag >= values.len() {
        return Err(Error::LagOutOfRange {
            lag: max_lag,
            len: values.len(),
        });
    }
    let (dev, denom) = centered(values)?;
    Ok((1..=max_lag).map(|k| acf_from(&dev, denom, k)).collect())
}

/// `Q = n(n+2) Σ_{k=1..h} ρ̂_k² / (n−k)`, referred to χ²(h).
pub fn ljung_box(values: &[f64], h: usize) -> Result<LjungBoxResult> {
    if h == 0 {
        return Err(Error::LagOutOfRange {
            lag: 0,
            len: values.len(),
        });
    }
    let rho = acf(values, h)?;
    Ok(ljung_box_from_acf(&rho, values.len()))
}

/// Ljung-Box from precomputed autocorrelations `ρ̂_1..ρ̂_h`.
pub fn ljung_box_from_acf(rho: &[f64], n: usize) -> LjungBoxResult {
    let nf = n as f64;
    let q = nf
        * (nf + 2.0)
        * rho
            .iter()
            .enumerate()
            .map(|(i, r)| r * r / (nf - (i + 1) as f64))
            .sum::<f64>();
    LjungBoxResult {
        statistic: q,
        lags: rho.len(),
        df: rho.len(),
        p_value: chi_square_sf(q, rho.len()),
    }
}

/// `order`-th differences.
pub fn difference(values: &[f64], order: usize) -> Vec<f64> {
    let mut out = values.to_vec();
    for _ in 0..order {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    out
}
