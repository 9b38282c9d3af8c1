use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Train/test boundary attached to an evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub train_end_index: i64,
    pub test_start_index: i64,
    pub test_end_index: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub mse: f64,
    pub r_squared: f64,
    /// Fraction, not percent.
    pub mape: Option<f64>,
    pub n: usize,
    pub split: Option<SplitInfo>,
}

fn check(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch(actual.len(), predicted.len()));
    }
    if actual.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

fn sse(actual: &[f64], predicted: &[f64]) -> f64 {
    actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).powi(2))
        .sum()
}

pub fn mse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    Ok(sse(actual, predicted) / actual.len() as f64)
}

/// `1 − SS_res / SS_tot`; not clamped, so a bad model can go negative.
pub fn r_squared(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    if actual.len() < 2 {
        return Err(Error::EmptyInput);
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let ss_tot: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    if ss_tot <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(1.0 - sse(actual, predicted) / ss_tot)
}

/// Mean absolute percentage error as a fraction.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    if let Some(i) = actual.iter().position(|&a| a == 0.0) {
        return Err(Error::ZeroActual(i));
    }
    let total: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| ((a - p) / a).abs())
        .sum();
    Ok(total / actual.len() as f64)
}

impl EvaluationReport {
    /// MSE and R² over the whole of `actual`/`predicted`.
    pub fn in_sample(actual: &[f64], predicted: &[f64]) -> Result<Self> {
        Ok(EvaluationReport {
            mse: mse(actual, predicted)?,
            r_squared: r_squared(actual, predicted)?,
            mape: None,
            n: actual.len(),
            split: None,
        })
    }

    /// All three metrics; MAPE is left out when an actual value is zero.
    pub fn evaluate(actual: &[f64], predicted: &[f64], split: Option<SplitInfo>) -> Result<Self> {
        let mape = match mape(actual, predicted) {
            Ok(m) => Some(m),
            Err(Error::ZeroActual(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(EvaluationReport {
            mape,
            split,
            ..Self::in_sample(actual, predicted)?
        })
    }

    pub fn mape_percent(&self) -> Option<f64> {
        self.mape.map(|m| m * 100.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_worked() {
        assert_eq!(mse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!((mse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert!((mape(&[100.0], &[99.0]).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(mape(&[5.0, 7.0], &[5.0, 7.0]).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            mse(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch(1, 2))
        ));
        assert!(matches!(mse(&[], &[]), Err(Error::EmptyInput)));
        assert!(matches!(
            r_squared(&[4.0, 4.0], &[1.0, 2.0]),
            Err(Error::ZeroVariance)
        ));
        assert!(matches!(
            mape(&[1.0, 0.0], &[1.0, 1.0]),
            Err(Error::ZeroActual(1))
        ));
        assert!(matches!(
            mape(&[1.0], &[1.0, 1.0]),
            Err(Error::LengthMismatch(..))
        ));
    }

    #[test]
    fn negative_r_squared_is_kept() {
        assert!(r_squared(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() < 0.0);
    }

    fn pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..40).prop_flat_map(|n| {
            (
                prop::collection::vec(1.0f64..1e5, n),
                prop::collection::vec(1.0f64..1e5, n),
            )
        })
    }

    proptest! {
        #[test]
        fn mse_symmetry_and_scale((a, p) in pairs(), c in 0.01f64..100.0) {
            let m = mse(&a, &p).unwrap();
            prop_assert_eq!(m, mse(&p, &a).unwrap());
            let ca: Vec<f64> = a.iter().map(|x| c * x).collect();
            let cp: Vec<f64> = p.iter().map(|x| c * x).collect();
            prop_assert!((mse(&ca, &cp).unwrap() - c * c * m).abs() <= 1e-10 * c * c * m.max(1e-300));
        }

        #[test]
        fn r_squared_affine_invariance((a, p) in pairs(), alpha in prop_oneof![-50.0f64..-0.1, 0.1f64..50.0], beta in -1e4f64..1e4) {
            prop_assume!(a.iter().any(|x| (x - a[0]).abs() > 1e-3));
            let r = r_squared(&a, &p).unwrap();
            let ta: Vec<f64> = a.iter().map(|x| alpha * x + beta).collect();
            let tp: Vec<f64> = p.iter().map(|x| alpha * x + beta).collect();
            let rt = r_squared(&ta, &tp).unwrap();
            prop_assert!((rt - r).abs() <= 1e-8 * (1.0 + r.abs()));
        }

        #[test]
        fn mape_scale_invariance((a, p) in pairs(), c in 0.01f64..100.0) {
            let m = mape(&a, &p).unwrap();
            let ca: Vec<f64> = a.iter().map(|x| c * x).collect();
            let cp: Vec<f64> = p.iter().map(|x| c * x).collect();
            prop_assert!((mape(&ca, &cp).unwrap() - m).abs() <= 1e-12 * (1.0 + m));
            prop_assert!(m >= 0.0);
        }

        #[test]
        fn r_squared_mse_identity((a, p) in pairs()) {
            prop_assume!(a.iter().any(|x| (x - a[0]).abs() > 1e-3));
            let n = a.len() as f64;
            let mean = a.iter().sum::<f64>() / n;
            let ss_tot: f64 = a.iter().map(|x| (x - mean).powi(2)).sum();
            let lhs = r_squared(&a, &p).unwrap();
            let rhs = 1.0 - mse(&a, &p).unwrap() * n / ss_tot;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }
}
