//! Bounded Levenberg–Marquardt fitting of growth curves.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bounds, GrowthModel, Logistic, ModelKind, OffsetLogistic};
use crate::timeseries::TimeSeries;

const MAX_SOLVE_RETRIES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiStart {
    pub starts: usize,
    pub seed: u64,
}

impl Default for MultiStart {
    fn default() -> Self {
        MultiStart { starts: 8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub max_iterations: usize,
    /// Relative RSS change on an accepted step.
    pub cost_tolerance: f64,
    /// Largest relative parameter change in a step.
    pub param_tolerance: f64,
    pub initial_damping: f64,
    pub damping_up: f64,
    pub damping_down: f64,
    /// Overrides the model's default bounds.
    pub bounds: Option<Bounds>,
    /// Pin `P0` to the first observation (two-parameter logistic).
    pub fix_initial: bool,
    pub multistart: Option<MultiStart>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iterations: 200,
            cost_tolerance: 1e-10,
            param_tolerance: 1e-10,
            initial_damping: 1e-3,
            damping_up: 10.0,
            damping_down: 0.1,
            bounds: None,
            fix_initial: false,
            multistart: None,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(format!("fit config: {m}")));
        if self.max_iterations < 1 {
            return bad("max_iterations must be >= 1");
        }
        if !(self.cost_tolerance > 0.0 && self.param_tolerance > 0.0 && self.initial_damping > 0.0)
        {
            return bad("tolerances and damping must be > 0");
        }
        if !(self.damping_up > 1.0) || !(self.damping_down > 0.0 && self.damping_down < 1.0) {
            return bad("damping_up must be > 1 and damping_down in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub rss: f64,
    pub lambda: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model_kind: ModelKind,
    pub model: String,
    pub param_names: Vec<String>,
    pub params: Vec<f64>,
    pub rss: f64,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.param_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.params[i])
    }

    /// RSS values after each accepted step, starting from the initial RSS.
    pub fn accepted_rss(&self) -> Vec<f64> {
        self.trace
            .iter()
            .enumerate()
            .filter(|(i, e)| *i == 0 || e.accepted)
            .map(|(_, e)| e.rss)
            .collect()
    }
}

struct Problem<'a> {
    model: &'a dyn GrowthModel,
    t: Vec<f64>,
    y: &'a [f64],
}

impl Problem<'_> {
    fn residuals(&self, params: &[f64]) -> Vec<f64> {
        self.t
            .iter()
            .zip(self.y)
            .map(|(&t, &y)| y - self.model.evaluate(t, params))
            .collect()
    }

    fn jacobian(&self, params: &[f64]) -> DMatrix<f64> {
        let k = self.model.n_params();
        let mut jac = DMatrix::zeros(self.t.len(), k);
        let mut row = vec![0.0; k];
        for (i, &t) in self.t.iter().enumerate() {
            self.model.gradient(t, params, &mut row);
            for (j, &g) in row.iter().enumerate() {
                jac[(i, j)] = g;
            }
        }
        jac
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Heuristic start for `model` on `series`.
pub fn initial_guess(series: &TimeSeries, model: &dyn GrowthModel) -> Result<Vec<f64>> {
    model.initial_guess(series)
}

fn effective_bounds(series: &TimeSeries, model: &dyn GrowthModel, config: &FitConfig) -> Bounds {
    let mut bounds = config
        .bounds
        .clone()
        .unwrap_or_else(|| model.default_bounds(series));
    if config.fix_initial {
        let idx = model.n_params() - 1;
        bounds.fix(idx, series.values()[0]);
    }
    bounds
}

/// Runs bounded LM from `init`. Hitting `max_iterations` is not an error:
/// the result comes back with `converged == false`.
pub fn levenberg_marquardt(
    series: &TimeSeries,
    model: &dyn GrowthModel,
    init: &[f64],
    config: &FitConfig,
) -> Result<FitResult> {
    config.validate()?;
    let k = model.n_params();
    if init.len() != k {
        return Err(Error::InvalidParams(format!(
            "expected {k} initial parameters, got {}",
            init.len()
        )));
    }
    if series.len() < k {
        return Err(Error::DegenerateSeries(format!(
            "{} points cannot determine {k} parameters",
            series.len()
        )));
    }
    let bounds = effective_bounds(series, model, config);
    let mut x = init.to_vec();
    bounds.clamp(&mut x);
    model.enforce_constraints(&mut x);
    model.validate(&x)?;
    let free: Vec<usize> = (0..k).filter(|&i| !bounds.is_fixed(i)).collect();

    let problem = Problem {
        model,
        t: series.times_f64(),
        y: series.values(),
    };
    let mut residuals = problem.residuals(&x);
    let mut rss = sum_sq(&residuals);
    let mut lambda = config.initial_damping;
    let mut trace = vec![TraceEntry {
        rss,
        lambda,
        accepted: true,
    }];
    let mut converged = rss == 0.0;
    let mut iterations = 0;

    while !converged && iterations < config.max_iterations {
        iterations += 1;
        let jac_full = problem.jacobian(&x);
        let jac = jac_full.select_columns(&free);
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * DVector::from_column_slice(&residuals);
        // Solve the column-equilibrated system (S A S + λ I) z = S g, δ = S z
        // with S = diag(JᵀJ)^(-1/2); same step as (JᵀJ + λ diag JᵀJ) δ = Jᵀr.
        let scale: Vec<f64> = jtj
            .diagonal()
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 1.0 })
            .collect();
        let scaled = DMatrix::from_fn(free.len(), free.len(), |i, j| {
            jtj[(i, j)] * scale[i] * scale[j]
        });
        let rhs = DVector::from_fn(free.len(), |i, _| jtr[i] * scale[i]);

        let mut solved = None;
        for _ in 0..=MAX_SOLVE_RETRIES {
            let mut a = scaled.clone();
            for i in 0..free.len() {
                a[(i, i)] += lambda;
            }
            if let Some(ch) = a.cholesky() {
                let z = ch.solve(&rhs);
                let delta = DVector::from_fn(free.len(), |i, _| z[i] * scale[i]);
                if delta.iter().all(|d| d.is_finite()) {
                    solved = Some(delta);
                    break;
                }
            }
            lambda *= config.damping_up;
        }
        let Some(delta) = solved else {
            return Err(Error::SingularNormalEquations);
        };

        let mut candidate = x.clone();
        for (&i, &d) in free.iter().zip(delta.iter()) {
            candidate[i] += d;
        }
        bounds.clamp(&mut candidate);
        model.enforce_constraints(&mut candidate);

        let step_rel = candidate
            .iter()
            .zip(&x)
            .map(|(&c, &o)| (c - o).abs() / o.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);

        let cand_res = problem.residuals(&candidate);
        let cand_rss = sum_sq(&cand_res);
        if cand_rss.is_finite() && cand_rss < rss {
            let rel_change = (rss - cand_rss) / rss;
            x = candidate;
            residuals = cand_res;
            rss = cand_rss;
            lambda *= config.damping_down;
            trace.push(TraceEntry {
                rss,
                lambda,
                accepted: true,
            });
            if rel_change < config.cost_tolerance || step_rel < config.param_tolerance || rss == 0.0
            {
                converged = true;
            }
        } else {
            lambda *= config.damping_up;
            trace.push(TraceEntry {
                rss: cand_rss,
                lambda,
                accepted: false,
            });
            if step_rel < config.param_tolerance {
                converged = true;
            }
        }
    }

    if !converged {
        log::warn!(
            "{} fit stopped after {iterations} iterations without converging (rss {rss:.6e})",
            model.name()
        );
    } else {
        log::info!(
            "{} fit converged in {iterations} iterations (rss {rss:.6e})",
            model.name()
        );
    }
    Ok(FitResult {
        model_kind: model.kind(),
        model: model.name().to_string(),
        param_names: model.param_names().iter().map(|s| s.to_string()).collect(),
        params: x,
        rss,
        residuals,
        iterations,
        converged,
        trace,
    })
}

/// Heuristic start followed by LM, with optional seeded restarts.
pub fn fit_model(
    series: &TimeSeries,
    model: &dyn GrowthModel,
    config: &FitConfig,
) -> Result<FitResult> {
    let mut init = model.initial_guess(series)?;
    if config.fix_initial {
        let last = init.len() - 1;
        init[last] = series.values()[0];
    }
    let mut best = levenberg_marquardt(series, model, &init, config)?;
    if let Some(ms) = &config.multistart {
        let bounds = effective_bounds(series, model, config);
        let mut rng = ChaCha8Rng::seed_from_u64(ms.seed);
        for _ in 1..ms.starts.max(1) {
            let mut start = init.clone();
            // Log-uniform jitter of rate and capacity within a factor of 3.
            for v in start.iter_mut().take(2) {
                *v *= 3f64.powf(rng.random_range(-1.0..1.0));
            }
            bounds.clamp(&mut start);
            model.enforce_constraints(&mut start);
            if let Ok(fit) = levenberg_marquardt(series, model, &start, config) {
                if fit.rss < best.rss {
                    best = fit;
                }
            }
        }
    }
    Ok(best)
}

/// Three-parameter logistic `(a, E, P0)`.
pub fn fit_logistic(series: &TimeSeries, config: &FitConfig) -> Result<FitResult> {
    fit_model(series, &Logistic, config)
}

/// Four-parameter offset logistic `(a, E, b, P0)`.
pub fn fit_offset_logistic(series: &TimeSeries, config: &FitConfig) -> Result<FitResult> {
    fit_model(series, &OffsetLogistic, config)
}

/// Model predictions at each day offset of `series`.
pub fn predict(model: &dyn GrowthModel, params: &[f64], series: &TimeSeries) -> Vec<f64> {
    series
        .times()
        .iter()
        .map(|&t| model.evaluate(t as f64, params))
        .collect()
}
