#![allow(dead_code)]

use std::path::PathBuf;

use chrono::NaiveDate;
use logigrow_core::model::{
    GrowthModel, Logistic, LogisticParams, OffsetLogistic, OffsetLogisticParams,
};
use logigrow_core::timeseries::{extract_series, parse_owid_csv, Dataset, TimeSeries, Variable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn date(s: &str) -> NaiveDate {
    s.parse().expect("valid ISO date")
}

/// `$LOGIGROW_FIXTURE` if set, otherwise the bundled CSV.
pub fn fixture_path() -> PathBuf {
    std::env::var_os("LOGIGROW_FIXTURE")
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/senegal_2022_2023.csv")
        })
}

pub fn fixture() -> Dataset {
    let raw = std::fs::read(fixture_path()).expect("fixture readable");
    parse_owid_csv(&raw[..], "Senegal", date("2022-04-01"), date("2023-04-30"))
        .expect("fixture parses")
}

pub fn fixture_series(variable: Variable) -> TimeSeries {
    extract_series(&fixture(), variable, variable.default_missing_policy())
        .expect("variable present")
}

/// Random valid offset-logistic parameters spanning saturating and
/// early-growth regimes over 400 days.
pub fn random_offset(rng: &mut ChaCha8Rng) -> OffsetLogisticParams {
    let rate = 10f64.powf(rng.random_range(-2.3..-0.7));
    let capacity = 10f64.powf(rng.random_range(2.0..6.0));
    let baseline = rng.random_range(0.0..1e5);
    let initial = baseline + capacity * 10f64.powf(rng.random_range(-3.0..-0.05));
    OffsetLogisticParams::new(rate, capacity, baseline, initial).unwrap()
}

fn fd_step(params: &[f64], i: usize) -> f64 {
    // Baseline and initial value move together with Q0 = P0 − b, which can be
    // far smaller than either.
    if params.len() == 4 && i >= 2 {
        1e-4 * (params[3] - params[2])
    } else {
        1e-4 * params[i].abs()
    }
}

/// Richardson-extrapolated central difference.
fn numeric_partial(model: &dyn GrowthModel, t: f64, params: &[f64], i: usize) -> f64 {
    let central = |h: f64| {
        let mut hi = params.to_vec();
        let mut lo = params.to_vec();
        hi[i] += h;
        lo[i] -= h;
        (model.evaluate(t, &hi) - model.evaluate(t, &lo)) / (2.0 * h)
    };
    let h = fd_step(params, i);
    (4.0 * central(h / 2.0) - central(h)) / 3.0
}

/// Worst relative error of the analytic gradient over 100 random points.
/// The denominator is floored at 1e6 times the finite-difference roundoff
/// `ε·|P|/h`, below which a difference quotient cannot resolve 1e-5.
pub fn jacobian_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let o = random_offset(&mut rng);
        let t = rng.random_range(0.0..400.0);
        let (model, params): (&dyn GrowthModel, Vec<f64>) = if k % 2 == 0 {
            (&OffsetLogistic, o.to_vec())
        } else {
            let p: LogisticParams = o.shifted();
            (&Logistic, p.to_vec())
        };
        let mut g = vec![0.0; params.len()];
        model.gradient(t, &params, &mut g);
        let value = model.evaluate(t, &params);
        for (i, gi) in g.iter().enumerate() {
            let fd = numeric_partial(model, t, &params, i);
            let noise = f64::EPSILON * value.abs() / fd_step(&params, i);
            let err = (gi - fd).abs() / gi.abs().max(fd.abs()).max(1e6 * noise);
            worst = worst.max(err);
        }
    }
    worst
}
