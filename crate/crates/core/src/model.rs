//! Verhulst logistic growth and its baseline-shifted variant.
//!
//! Both families are exposed two ways: typed parameter structs with the
//! closed-form solutions and ODE right-hand sides, and the [`GrowthModel`]
//! trait object interface the fitter and the CLI select by name through
//! [`ModelRegistry`].

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

/// Growth rate `a` (1/day), carrying capacity `E` and initial value `P(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub rate: f64,
    pub capacity: f64,
    pub initial: f64,
}

impl LogisticParams {
    pub fn new(rate: f64, capacity: f64, initial: f64) -> Result<Self> {
        if !rate.is_finite() {
            return Err(Error::InvalidParams(format!(
                "rate must be finite, got {rate}"
            )));
        }
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(Error::InvalidParams(format!(
                "capacity must be > 0, got {capacity}"
            )));
        }
        if !(initial.is_finite() && initial > 0.0) {
            return Err(Error::InvalidParams(format!(
                "initial value must be > 0, got {initial}"
            )));
        }
        Ok(LogisticParams {
            rate,
            capacity,
            initial,
        })
    }

    pub fn with_initial(self, initial: f64) -> Result<Self> {
        LogisticParams::new(self.rate, self.capacity, initial)
    }

    pub fn to_vec(self) -> Vec<f64> {
        vec![self.rate, self.capacity, self.initial]
    }
}

/// Logistic growth shifted by a baseline `b`: `Q = P - b` follows the plain
/// logistic with capacity `E` above the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetLogisticParams {
    pub rate: f64,
    pub capacity: f64,
    pub baseline: f64,
    pub initial: f64,
}

impl OffsetLogisticParams {
    pub fn new(rate: f64, capacity: f64, baseline: f64, initial: f64) -> Result<Self> {
        if !rate.is_finite() {
            return Err(Error::InvalidParams(format!(
                "rate must be finite, got {rate}"
            )));
        }
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(Error::InvalidParams(format!(
                "capacity must be > 0, got {capacity}"
            )));
        }
        if !(baseline.is_finite() && baseline >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "baseline must be >= 0, got {baseline}"
            )));
        }
        if !(initial.is_finite() && initial > baseline) {
            return Err(Error::InvalidParams(format!(
                "initial value {initial} must exceed baseline {baseline}"
            )));
        }
        Ok(OffsetLogisticParams {
            rate,
            capacity,
            baseline,
            initial,
        })
    }

    /// The plain logistic followed by `P - b`.
    pub fn shifted(self) -> LogisticParams {
        LogisticParams {
            rate: self.rate,
            capacity: self.capacity,
            initial: self.initial - self.baseline,
        }
    }

    pub fn to_vec(self) -> Vec<f64> {
        vec![self.rate, self.capacity, self.baseline, self.initial]
    }
}

pub fn logistic_rhs(p: f64, params: &LogisticParams) -> f64 {
    params.rate * p * (1.0 - p / params.capacity)
}

pub fn offset_rhs(p: f64, params: &OffsetLogisticParams) -> f64 {
    let q = p - params.baseline;
    params.rate * q * (1.0 - q / params.capacity)
}

/// Pieces of the closed form `E / D` with `D = 1 + c e^{-at}`,
/// `c = (E - P0) / P0`, evaluated without overflowing `e^{±at}`.
struct ClosedForm {
    /// `1 / D`
    inv_d: f64,
    /// `e^{-at} / D^2`
    g: f64,
    c: f64,
}

impl ClosedForm {
    fn eval(t: f64, rate: f64, capacity: f64, initial: f64) -> Self {
        let c = (capacity - initial) / initial;
        let at = rate * t;
        if c == 0.0 {
            // Equilibrium trajectory; avoids 0/0 once e^{at} underflows.
            return ClosedForm {
                inv_d: 1.0,
                g: (-at).exp(),
                c,
            };
        }
        if at >= 0.0 {
            let u = (-at).exp();
            let d = 1.0 + c * u;
            ClosedForm {
                inv_d: 1.0 / d,
                g: u / (d * d),
                c,
            }
        } else {
            // Multiply through by v = e^{at} <= 1.
            let v = at.exp();
            let d = v + c;
            ClosedForm {
                inv_d: v / d,
                g: v / (d * d),
                c,
            }
        }
    }
}

/// `P(t) = E P0 / (e^{-at}(E - P0) + P0)`.
pub fn logistic_solution(t: f64, params: &LogisticParams) -> f64 {
    params.capacity * ClosedForm::eval(t, params.rate, params.capacity, params.initial).inv_d
}

/// `b + Q(t)` where `Q` is the logistic solution started from `P0 - b`.
pub fn offset_solution(t: f64, params: &OffsetLogisticParams) -> f64 {
    params.baseline + logistic_solution(t, &params.shifted())
}

/// Early-phase approximation `P0 e^{at}`, valid while `P << E`.
pub fn exponential_approx(t: f64, initial: f64, rate: f64) -> f64 {
    initial * (rate * t).exp()
}

/// `[dP/da, dP/dE, dP/dP0]`.
pub fn logistic_gradient(t: f64, params: &LogisticParams) -> [f64; 3] {
    let (e, p0) = (params.capacity, params.initial);
    let cf = ClosedForm::eval(t, params.rate, e, p0);
    let d_rate = if cf.c == 0.0 {
        0.0
    } else {
        e * cf.c * t * cf.g
    };
    let d_capacity = cf.inv_d - e * cf.g / p0;
    let d_initial = e * e * cf.g / (p0 * p0);
    [d_rate, d_capacity, d_initial]
}

/// `[dP/da, dP/dE, dP/db, dP/dP0]`.
pub fn offset_gradient(t: f64, params: &OffsetLogisticParams) -> [f64; 4] {
    let [d_rate, d_capacity, d_q0] = logistic_gradient(t, &params.shifted());
    [d_rate, d_capacity, 1.0 - d_q0, d_q0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logistic,
    OffsetLogistic,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Logistic => "logistic",
            ModelKind::OffsetLogistic => "offset_logistic",
        })
    }
}

/// Per-parameter box constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn unbounded(n: usize) -> Self {
        Bounds {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn clamp(&self, params: &mut [f64]) {
        for ((p, &lo), &hi) in params.iter_mut().zip(&self.lower).zip(&self.upper) {
            *p = p.clamp(lo, hi);
        }
    }

    pub fn contains(&self, params: &[f64]) -> bool {
        params
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&p, (&lo, &hi))| p >= lo && p <= hi)
    }

    /// Parameters pinned by an equality bound.
    pub fn is_fixed(&self, i: usize) -> bool {
        self.lower[i] == self.upper[i]
    }

    pub fn fix(&mut self, i: usize, value: f64) {
        self.lower[i] = value;
        self.upper[i] = value;
    }
}

/// A growth curve family the fitter can work with.
///
/// Parameter vectors are plain slices in the order given by
/// [`GrowthModel::param_names`].
pub trait GrowthModel: Send + Sync {
    /// Registry key, also the `--model` value on the command line.
    fn name(&self) -> &'static str;

    fn kind(&self) -> ModelKind;

    fn param_names(&self) -> &'static [&'static str];

    fn n_params(&self) -> usize {
        self.param_names().len()
    }

    fn validate(&self, params: &[f64]) -> Result<()>;

    fn evaluate(&self, t: f64, params: &[f64]) -> f64;

    /// Writes `dP/dθ` into `out` (length `n_params`).
    fn gradient(&self, t: f64, params: &[f64], out: &mut [f64]);

    /// Right-hand side of the generating ODE.
    fn rhs(&self, p: f64, params: &[f64]) -> f64;

    fn default_bounds(&self, series: &TimeSeries) -> Bounds;

    fn initial_guess(&self, series: &TimeSeries) -> Result<Vec<f64>>;

    /// Restores constraints that couple parameters after a box projection.
    fn enforce_constraints(&self, _params: &mut [f64]) {}
}

fn check_len(params: &[f64], n: usize) -> Result<()> {
    if params.len() != n {
        return Err(Error::InvalidParams(format!(
            "expected {n} parameters, got {}",
            params.len()
        )));
    }
    Ok(())
}

fn series_range(series: &TimeSeries) -> (f64, f64) {
    series
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Heuristic start shared by both families; `baseline` is `None` for the
/// plain logistic.
fn heuristic_start(series: &TimeSeries, with_baseline: bool) -> Result<(f64, f64, f64, f64)> {
    if series.len() < 4 {
        return Err(Error::DegenerateSeries(format!(
            "need at least 4 points, got {}",
            series.len()
        )));
    }
    let (min_y, max_y) = series_range(series);
    if max_y <= min_y {
        return Err(Error::DegenerateSeries("series is constant".into()));
    }
    let baseline = if with_baseline {
        (min_y - 1.0).max(0.0)
    } else {
        if min_y <= 0.0 {
            return Err(Error::DegenerateSeries(
                "plain logistic needs strictly positive values".into(),
            ));
        }
        0.0
    };
    let capacity = 1.05 * (max_y - baseline);
    let initial = series.values()[0];

    // OLS slope of logit(Q / E0) against t.
    let (lo, hi) = (0.001 * capacity, 0.999 * capacity);
    let pts: Vec<(f64, f64)> = series
        .points()
        .map(|(t, y)| {
            let q = (y - baseline).clamp(lo, hi);
            (t as f64, (q / (capacity - q)).ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_z = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|&(t, z)| (t - mean_t) * (z - mean_z)).sum();
    let sxx: f64 = pts.iter().map(|&(t, _)| (t - mean_t).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let rate = if slope.is_finite() {
        slope.clamp(1e-6, 5.0)
    } else {
        1e-6
    };
    Ok((rate, capacity, baseline, initial))
}

pub struct Logistic;

impl GrowthModel for Logistic {
    fn name(&self) -> &'static str {
        "logistic"
    }

    fn kind(&self) -> ModelKind {
        ModelKind::Logistic
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["rate", "capacity", "initial"]
    }

    fn validate(&self, params: &[f64]) -> Result<()> {
        check_len(params, 3)?;
        LogisticParams::new(params[0], params[1], params[2]).map(|_| ())
    }

    fn evaluate(&self, t: f64, params: &[f64]) -> f64 {
        logistic_solution(t, &unpack_logistic(params))
    }

    fn gradient(&self, t: f64, params: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&logistic_gradient(t, &unpack_logistic(params)));
    }

    fn rhs(&self, p: f64, params: &[f64]) -> f64 {
        logistic_rhs(p, &unpack_logistic(params))
    }

    fn default_bounds(&self, series: &TimeSeries) -> Bounds {
        let (min_y, max_y) = series_range(series);
        let tiny = f64::MIN_POSITIVE.sqrt();
        Bounds {
            lower: vec![1e-8, (0.5 * (max_y - min_y)).max(tiny), tiny],
            upper: vec![10.0, 100.0 * max_y, max_y],
        }
    }

    fn initial_guess(&self, series: &TimeSeries) -> Result<Vec<f64>> {
        let (rate, capacity, _, initial) = heuristic_start(series, false)?;
        Ok(vec![rate, capacity, initial])
    }
}

pub struct OffsetLogistic;

impl GrowthModel for OffsetLogistic {
    fn name(&self) -> &'static str {
        "logistic-offset"
    }

    fn kind(&self) -> ModelKind {
        ModelKind::OffsetLogistic
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["rate", "capacity", "baseline", "initial"]
    }

    fn validate(&self, params: &[f64]) -> Result<()> {
        check_len(params, 4)?;
        OffsetLogisticParams::new(params[0], params[1], params[2], params[3]).map(|_| ())
    }

    fn evaluate(&self, t: f64, params: &[f64]) -> f64 {
        offset_solution(t, &unpack_offset(params))
    }

    fn gradient(&self, t: f64, params: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&offset_gradient(t, &unpack_offset(params)));
    }

    fn rhs(&self, p: f64, params: &[f64]) -> f64 {
        offset_rhs(p, &unpack_offset(params))
    }

    fn default_bounds(&self, series: &TimeSeries) -> Bounds {
        let (min_y, max_y) = series_range(series);
        let tiny = f64::MIN_POSITIVE.sqrt();
        Bounds {
            lower: vec![1e-8, (0.5 * (max_y - min_y)).max(tiny), 0.0, tiny],
            upper: vec![10.0, 100.0 * max_y, min_y.max(0.0), max_y],
        }
    }

    fn initial_guess(&self, series: &TimeSeries) -> Result<Vec<f64>> {
        let (rate, capacity, baseline, initial) = heuristic_start(series, true)?;
        Ok(vec![rate, capacity, baseline, initial])
    }

    fn enforce_constraints(&self, params: &mut [f64]) {
        let floor = params[2] + 1e-9 * params[2].abs().max(1.0);
        if params[3] < floor {
            params[3] = floor;
        }
    }
}

fn unpack_logistic(p: &[f64]) -> LogisticParams {
    LogisticParams {
        rate: p[0],
        capacity: p[1],
        initial: p[2],
    }
}

fn unpack_offset(p: &[f64]) -> OffsetLogisticParams {
    OffsetLogisticParams {
        rate: p[0],
        capacity: p[1],
        baseline: p[2],
        initial: p[3],
    }
}

/// Growth models available by name.
pub struct ModelRegistry {
    models: BTreeMap<&'static str, Box<dyn GrowthModel>>,
}

impl ModelRegistry {
    pub fn empty() -> Self {
        ModelRegistry {
            models: BTreeMap::new(),
        }
    }

    /// `logistic` and `logistic-offset`.
    pub fn builtin() -> Self {
        let mut reg = ModelRegistry::empty();
        reg.register(Box::new(Logistic));
        reg.register(Box::new(OffsetLogistic));
        reg
    }

    pub fn register(&mut self, model: Box<dyn GrowthModel>) {
        self.models.insert(model.name(), model);
    }

    pub fn get(&self, name: &str) -> Result<&dyn GrowthModel> {
        self.models
            .get(name)
            .map(|m| m.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "model",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.models.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn GrowthModel> {
        self.models.values().map(|m| m.as_ref())
    }
}

impl Default for ModelRegistry {
    fn default() -> Self {
        ModelRegistry::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn lp(a: f64, e: f64, p0: f64) -> LogisticParams {
        LogisticParams::new(a, e, p0).unwrap()
    }

    #[test]
    fn rhs_fixed_points_and_arithmetic() {
        let p = lp(0.2, 1000.0, 10.0);
        assert_eq!(logistic_rhs(1000.0, &p), 0.0);
        assert_eq!(logistic_rhs(0.0, &p), 0.0);
        assert_relative_eq!(logistic_rhs(100.0, &p), 18.0, max_relative = 1e-15);

        let o = OffsetLogisticParams::new(0.2, 1000.0, 50.0, 60.0).unwrap();
        assert_eq!(offset_rhs(50.0, &o), 0.0);
        assert_eq!(offset_rhs(1050.0, &o), 0.0);
        let o0 = OffsetLogisticParams::new(0.2, 1000.0, 0.0, 60.0).unwrap();
        for k in 0..50 {
            let x = k as f64 * 37.0;
            assert_eq!(offset_rhs(x, &o0), logistic_rhs(x, &p));
        }
    }

    #[test]
    fn constructors_reject_invalid_values() {
        assert!(LogisticParams::new(0.1, 0.0, 1.0).is_err());
        assert!(LogisticParams::new(0.1, 10.0, -1.0).is_err());
        assert!(LogisticParams::new(f64::NAN, 10.0, 1.0).is_err());
        assert!(OffsetLogisticParams::new(0.1, 10.0, 5.0, 5.0).is_err());
        assert!(OffsetLogisticParams::new(0.1, 10.0, -1.0, 5.0).is_err());
        assert!(LogisticParams::new(-0.3, 10.0, 1.0).is_ok());
    }

    #[test]
    fn initial_conditions_and_equilibrium() {
        for &(a, e, p0) in &[(0.1, 1000.0, 10.0), (-0.2, 50.0, 49.0), (3.0, 1.0, 2.0)] {
            assert_relative_eq!(
                logistic_solution(0.0, &lp(a, e, p0)),
                p0,
                max_relative = 1e-15
            );
        }
        let eq = lp(0.7, 500.0, 500.0);
        for t in [-1e4, -10.0, 0.0, 3.0, 1e6] {
            assert_eq!(logistic_solution(t, &eq), 500.0);
        }
        let o = OffsetLogisticParams::new(0.05, 3000.0, 85895.0, 85900.0).unwrap();
        assert_relative_eq!(offset_solution(0.0, &o), 85900.0, max_relative = 1e-15);
    }

    #[test]
    fn offset_with_zero_baseline_matches_plain() {
        let p = lp(0.08, 5000.0, 50.0);
        let o = OffsetLogisticParams::new(0.08, 5000.0, 0.0, 50.0).unwrap();
        for k in 0..100 {
            let t = k as f64 * 3.3 - 20.0;
            let (a, b) = (logistic_solution(t, &p), offset_solution(t, &o));
            assert!((a - b).abs() <= 1e-15 * a.abs(), "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn large_exponents_saturate_without_overflow() {
        let p = lp(1.0, 1000.0, 10.0);
        assert_eq!(logistic_solution(1e5, &p), 1000.0);
        assert_eq!(logistic_solution(-1e5, &p), 0.0);
        let g = logistic_gradient(-1e5, &p);
        assert!(g.iter().all(|v| v.is_finite()));
        let g = logistic_gradient(1e5, &p);
        assert!(g.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn exponential_approx_tracks_early_logistic() {
        assert_eq!(exponential_approx(0.0, 3.0, 0.4), 3.0);
        assert_eq!(exponential_approx(17.0, 3.0, 0.0), 3.0);
        let (e, p0, a) = (1e9, 1e3, 0.2);
        let p = lp(a, e, p0);
        let mut t = 0.0;
        while logistic_solution(t, &p) < 1e-3 * e {
            let exact = logistic_solution(t, &p);
            let approx = exponential_approx(t, p0, a);
            assert!((approx - exact).abs() / exact < 1e-3, "t={t}");
            t += 0.25;
        }
        assert!(t > 10.0);
    }

    #[test]
    fn gradient_at_equilibrium_has_no_rate_sensitivity() {
        let p = lp(0.3, 700.0, 700.0);
        for t in [0.0, 1.0, 50.0, -4.0] {
            assert_eq!(logistic_gradient(t, &p)[0], 0.0);
        }
    }

    fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize) -> f64 {
        let h = 1e-6 * x[i].abs().max(1e-3);
        let mut hi = x.to_vec();
        let mut lo = x.to_vec();
        hi[i] += h;
        lo[i] -= h;
        (f(&hi) - f(&lo)) / (2.0 * h)
    }

    #[test]
    fn offset_baseline_derivative_at_origin() {
        // At t = 0, P = P0 regardless of b.
        let o = OffsetLogisticParams::new(0.05, 3000.0, 85000.0, 85100.0).unwrap();
        let g = offset_gradient(0.0, &o);
        let fd = central_diff(|x| OffsetLogistic.evaluate(0.0, x), &o.to_vec(), 2);
        assert!(g[2].abs() < 1e-9 && fd.abs() < 1e-6, "{} {}", g[2], fd);
        assert_relative_eq!(g[3], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn registry_lookup() {
        let reg = ModelRegistry::builtin();
        assert_eq!(reg.names(), vec!["logistic", "logistic-offset"]);
        assert_eq!(reg.get("logistic-offset").unwrap().n_params(), 4);
        assert!(matches!(
            reg.get("gompertz"),
            Err(Error::UnknownStrategy { .. })
        ));
    }

    proptest! {
        #[test]
        fn semigroup(a in 0.01f64..1.0, e in 10.0f64..1e6, frac in 1e-4f64..0.99,
                     t1 in 0.0f64..60.0, t2 in 0.0f64..60.0) {
            let p = lp(a, e, frac * e);
            let direct = logistic_solution(t1 + t2, &p);
            let mid = logistic_solution(t1, &p);
            let restarted = logistic_solution(t2, &p.with_initial(mid).unwrap());
            prop_assert!((direct - restarted).abs() <= 1e-10 * direct.abs());
        }

        #[test]
        fn increasing_and_bounded(a in 0.01f64..1.0, e in 10.0f64..1e6, frac in 1e-4f64..0.99) {
            let p = lp(a, e, frac * e);
            let mut prev = logistic_solution(0.0, &p);
            for k in 1..200 {
                let cur = logistic_solution(k as f64 * 0.5, &p);
                prop_assert!(cur >= prev && cur <= e);
                prev = cur;
            }
            let far = logistic_solution(1e4 / a, &p);
            prop_assert!((far - e).abs() <= 1e-8 * e);
        }

        #[test]
        fn closed_form_satisfies_ode(a in 0.01f64..0.5, e in 100.0f64..1e5,
                                     frac in 1e-3f64..0.9, t in 0.0f64..100.0) {
            let p = lp(a, e, frac * e);
            let h = 1e-4;
            let deriv = (logistic_solution(t + h, &p) - logistic_solution(t - h, &p)) / (2.0 * h);
            let rhs = logistic_rhs(logistic_solution(t, &p), &p);
            // Floor covers central-difference roundoff near saturation.
            prop_assert!((deriv - rhs).abs() <= 1e-6 * rhs.abs() + 1e-9 * e);
        }
    }
}
