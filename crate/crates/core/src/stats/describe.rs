use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub sd: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// `sd / √n`
    pub se: f64,
}

pub fn describe(values: &[f64]) -> Result<DescriptiveStats> {
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    let n = values.len();
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let sd = if n > 1 { (ss / (nf - 1.0)).sqrt() } else { 0.0 };

    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    Ok(DescriptiveStats {
        n,
        mean,
        sd,
        median,
        min: sorted[0],
        max: sorted[n - 1],
        se: sd / nf.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_worked() {
        let d = describe(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            (d.n, d.mean, d.sd, d.median, d.min, d.max),
            (3, 2.0, 1.0, 2.0, 1.0, 3.0)
        );
        assert_eq!(d.se, 1.0 / 3f64.sqrt());
        assert_eq!(describe(&[4.0, 1.0, 3.0, 2.0]).unwrap().median, 2.5);
        assert!(matches!(describe(&[]), Err(Error::EmptySeries)));
        assert_eq!(describe(&[7.0]).unwrap().sd, 0.0);
    }

    proptest! {
        #[test]
        fn shift_and_permutation(mut v in prop::collection::vec(-1e4f64..1e4, 1..60), c in -1e4f64..1e4) {
            let d = describe(&v).unwrap();
            prop_assert!(d.min <= d.median && d.median <= d.max && d.sd >= 0.0);
            prop_assert_eq!(d.se, d.sd / (d.n as f64).sqrt());
            prop_assert!((d.se * (d.n as f64).sqrt() - d.sd).abs() <= 4.0 * f64::EPSILON * d.sd);

            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let s = describe(&shifted).unwrap();
            let tol = 1e-9 * (1.0 + c.abs() + d.mean.abs());
            prop_assert!((s.mean - (d.mean + c)).abs() <= tol);
            prop_assert!((s.median - (d.median + c)).abs() <= tol);
            prop_assert!((s.min - (d.min + c)).abs() <= tol);
            prop_assert!((s.max - (d.max + c)).abs() <= tol);
            prop_assert!((s.sd - d.sd).abs() <= 1e-7 * (1.0 + d.sd));
            prop_assert!((s.se - d.se).abs() <= 1e-7 * (1.0 + d.se));

            v.reverse();
            let r = describe(&v).unwrap();
            prop_assert!((r.mean - d.mean).abs() <= tol);
            prop_assert_eq!((r.median, r.min, r.max), (d.median, d.min, d.max));
        }
    }
}
