mod acf;
mod describe;
mod keenan;
pub mod special;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use acf::{acf, autocorrelation, difference, ljung_box, ljung_box_from_acf, LjungBoxResult};
pub use describe::{describe, DescriptiveStats};
pub use keenan::{default_ar_order, keenan_test, KeenanResult};
pub use special::{chi_square_sf, f_sf};

use crate::error::{Error, Result};

pub const DEFAULT_LAGS: usize = 10;
pub const DEFAULT_AR_ORDER: usize = 4;

/// Transformations applied to a series before a randomness test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Level,
    FirstDifference,
    SecondDifference,
    /// Residuals of a fitted growth curve; built by the caller.
    FitResiduals,
}

impl Construction {
    pub const DIRECT: [Construction; 3] = [
        Construction::Level,
        Construction::FirstDifference,
        Construction::SecondDifference,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Construction::Level => "level",
            Construction::FirstDifference => "first_difference",
            Construction::SecondDifference => "second_difference",
            Construction::FitResiduals => "fit_residuals",
        }
    }

    /// Applies the construction; `None` for `FitResiduals`.
    pub fn apply(self, values: &[f64]) -> Option<Vec<f64>> {
        match self {
            Construction::Level => Some(values.to_vec()),
            Construction::FirstDifference => Some(difference(values, 1)),
            Construction::SecondDifference => Some(difference(values, 2)),
            Construction::FitResiduals => None,
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Common shape of a diagnostic test result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub test: String,
    pub statistic: f64,
    pub df: Vec<usize>,
    pub p_value: f64,
    pub n: usize,
}

impl TestOutcome {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

pub trait DiagnosticTest: Send + Sync {
    fn name(&self) -> &'static str;
    fn null_hypothesis(&self) -> &'static str;
    fn run(&self, values: &[f64]) -> Result<TestOutcome>;
    fn conclusion(&self, outcome: &TestOutcome, alpha: f64) -> String;
}

pub struct LjungBox {
    pub lags: usize,
}

impl DiagnosticTest for LjungBox {
    fn name(&self) -> &'static str {
        "ljung-box"
    }

    fn null_hypothesis(&self) -> &'static str {
        "the observations are independently distributed"
    }

    fn run(&self, values: &[f64]) -> Result<TestOutcome> {
        let r = ljung_box(values, self.lags)?;
        Ok(TestOutcome {
            test: self.name().to_string(),
            statistic: r.statistic,
            df: vec![r.df],
            p_value: r.p_value,
            n: values.len(),
        })
    }

    fn conclusion(&self, outcome: &TestOutcome, alpha: f64) -> String {
        if outcome.rejects(alpha) {
            format!(
                "reject randomness at the {}% level: the series shows autocorrelation",
                alpha * 100.0
            )
        } else {
            format!(
                "fail to reject at the {}% level: cannot reject the null hypothesis that the responses are random",
                alpha * 100.0
            )
        }
    }
}

pub struct Keenan {
    pub ar_order: usize,
}

impl DiagnosticTest for Keenan {
    fn name(&self) -> &'static str {
        "keenan"
    }

    fn null_hypothesis(&self) -> &'static str {
        "the series follows a linear autoregression"
    }

    fn run(&self, values: &[f64]) -> Result<TestOutcome> {
        let r = keenan_test(values, self.ar_order)?;
        Ok(TestOutcome {
            test: self.name().to_string(),
            statistic: r.statistic,
            df: vec![r.df1, r.df2],
            p_value: r.p_value,
            n: values.len(),
        })
    }

    fn conclusion(&self, outcome: &TestOutcome, alpha: f64) -> String {
        if outcome.rejects(alpha) {
            format!(
                "reject linearity at the {}% level: the series is nonlinear",
                alpha * 100.0
            )
        } else {
            format!("fail to reject linearity at the {}% level", alpha * 100.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestOptions {
    pub lags: usize,
    pub ar_order: usize,
}

impl Default for TestOptions {
    fn default() -> Self {
        TestOptions {
            lags: DEFAULT_LAGS,
            ar_order: DEFAULT_AR_ORDER,
        }
    }
}

/// Diagnostic tests by name.
pub struct TestRegistry {
    tests: BTreeMap<&'static str, Box<dyn DiagnosticTest>>,
}

impl TestRegistry {
    pub fn empty() -> Self {
        TestRegistry {
            tests: BTreeMap::new(),
        }
    }

    pub fn builtin(options: TestOptions) -> Self {
        let mut r = Self::empty();
        r.register(Box::new(LjungBox { lags: options.lags }));
        r.register(Box::new(Keenan {
            ar_order: options.ar_order,
        }));
        r
    }

    pub fn register(&mut self, test: Box<dyn DiagnosticTest>) {
        self.tests.insert(test.name(), test);
    }

    pub fn get(&self, name: &str) -> Result<&dyn DiagnosticTest> {
        self.tests
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "test",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.tests.keys().copied().collect()
    }
}

impl FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Construction::Level,
            Construction::FirstDifference,
            Construction::SecondDifference,
            Construction::FitResiduals,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
        .ok_or_else(|| Error::UnknownStrategy {
            kind: "construction",
            name: s.to_string(),
            available: "level, first_difference, second_difference, fit_residuals".to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lookup() {
        let reg = TestRegistry::builtin(TestOptions::default());
        assert_eq!(reg.names(), vec!["keenan", "ljung-box"]);
        assert!(matches!(
            reg.get("tsay"),
            Err(Error::UnknownStrategy { .. })
        ));
        let v: Vec<f64> = (0..60).map(|i| ((i * 7919) % 61) as f64).collect();
        let out = reg.get("ljung-box").unwrap().run(&v).unwrap();
        assert_eq!(out.df, vec![10]);
        assert_eq!(out.statistic, ljung_box(&v, 10).unwrap().statistic);
    }

    #[test]
    fn conclusions() {
        let lb = LjungBox { lags: 10 };
        let mut o = TestOutcome {
            test: "ljung-box".into(),
            statistic: 17.0,
            df: vec![10],
            p_value: 0.07,
            n: 395,
        };
        assert!(lb.conclusion(&o, 0.05).starts_with("fail to reject"));
        o.p_value = 0.01;
        assert!(lb.conclusion(&o, 0.05).starts_with("reject"));
        assert!(Keenan { ar_order: 4 }
            .conclusion(&o, 0.05)
            .starts_with("reject linearity"));
    }

    #[test]
    fn constructions() {
        let v = [1.0, 4.0, 9.0, 16.0];
        assert_eq!(
            Construction::FirstDifference.apply(&v).unwrap(),
            vec![3.0, 5.0, 7.0]
        );
        assert!(Construction::FitResiduals.apply(&v).is_none());
        assert_eq!(
            "second_difference".parse::<Construction>().unwrap(),
            Construction::SecondDifference
        );
    }
}
