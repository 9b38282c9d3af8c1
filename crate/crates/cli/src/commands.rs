use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use logigrow_core::chart::{render_chart, ChartSpec, Polyline};
use logigrow_core::fit::{fit_model, predict, FitConfig, FitResult};
use logigrow_core::metrics::{EvaluationReport, SplitInfo};
use logigrow_core::model::{GrowthModel, ModelRegistry};
use logigrow_core::report::{
    sha256_hex, Command, EvaluationRecord, FitRecord, Metadata, Metrics, RunReport, Scope,
    TestRecord, VariableStats,
};
use logigrow_core::stats::{describe, Construction, TestOptions, TestRegistry};
use logigrow_core::timeseries::{
    extract_series, parse_owid_csv, train_test_split, Dataset, TimeSeries, Variable,
};
use logigrow_core::Error;

use crate::{Common, FitArgs, TestArgs, TestChoice};

const BUNDLED_FIXTURE: &[u8] = include_bytes!("../../core/tests/fixtures/senegal_2022_2023.csv");

pub enum Outcome {
    Done,
    NotConverged,
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &std::path::Path) -> std::io::Result<Vec<u8>> {
    fs::read(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

struct Input {
    dataset: Dataset,
    sha256: String,
}

fn load(common: &Common) -> Result<Input> {
    if !(common.alpha > 0.0 && common.alpha < 1.0) {
        return Err(CliError::Usage(format!(
            "--alpha must be in (0, 1), got {}",
            common.alpha
        )));
    }
    let bytes = match (&common.csv, std::env::var_os("LOGIGROW_FIXTURE")) {
        (Some(path), _) => read(path.as_ref())?,
        (None, Some(path)) => read(path.as_ref())?,
        (None, None) => BUNDLED_FIXTURE.to_vec(),
    };
    let dataset = parse_owid_csv(&bytes[..], &common.location, common.from, common.to)?;
    if let Some(path) = &common.export_csv {
        dataset.write_csv(fs::File::create(path)?)?;
    }
    Ok(Input {
        sha256: sha256_hex(&bytes),
        dataset,
    })
}

fn metadata(input: &Input) -> Metadata {
    let ds = &input.dataset;
    Metadata {
        location: ds.location.clone(),
        from: ds.first_date().expect("parsed datasets are non-empty"),
        to: ds.last_date().expect("parsed datasets are non-empty"),
        n: ds.len(),
        fixture_sha256: input.sha256.clone(),
    }
}

fn series(ds: &Dataset, variable: Variable) -> Result<TimeSeries> {
    Ok(extract_series(
        ds,
        variable,
        variable.default_missing_policy(),
    )?)
}

/// Writes the report (if requested) plus a sidecar log with the run time.
fn emit(common: &Common, report: &RunReport, started: Instant) -> Result<()> {
    let json = report.to_json()?;
    if let Some(path) = &common.json {
        fs::write(path, json)?;
        let mut log_path = path.as_os_str().to_owned();
        log_path.push(".log");
        fs::write(
            log_path,
            format!(
                "command={:?} elapsed_ms={}\n",
                report.command,
                started.elapsed().as_millis()
            ),
        )?;
    }
    Ok(())
}

fn descriptive(ds: &Dataset) -> Result<Vec<VariableStats>> {
    let mut out = Vec::new();
    for variable in Variable::ALL {
        match series(ds, variable) {
            Ok(s) => out.push(VariableStats {
                variable,
                stats: describe(s.values())?,
            }),
            Err(CliError::Core(Error::AllMissing(_))) => {
                log::warn!("{variable} has no values; skipped")
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn print_descriptive(rows: &[VariableStats]) {
    println!(
        "{:<14} {:>12} {:>10} {:>12} {:>12} {:>12} {:>8}",
        "Variable", "Mean", "SD", "Median", "Min", "Max", "SE"
    );
    for r in rows {
        let s = &r.stats;
        println!(
            "{:<14} {:>12.2} {:>10.2} {:>12.2} {:>12.2} {:>12.2} {:>8.2}",
            label(r.variable),
            s.mean,
            s.sd,
            s.median,
            s.min,
            s.max,
            s.se
        );
    }
}

fn label(v: Variable) -> &'static str {
    match v {
        Variable::TotalCases => "Total cases",
        Variable::NewCases => "New cases",
        Variable::TotalDeaths => "Total deaths",
        Variable::NewDeaths => "New deaths",
    }
}

pub fn stats(common: &Common) -> Result<Outcome> {
    let started = Instant::now();
    let input = load(common)?;
    let mut report = RunReport::new(Command::Stats, metadata(&input));
    report.descriptive = descriptive(&input.dataset)?;
    print_descriptive(&report.descriptive);
    emit(common, &report, started)?;
    Ok(Outcome::Done)
}

fn fit_config(max_iterations: usize) -> FitConfig {
    FitConfig {
        max_iterations,
        ..FitConfig::default()
    }
}

/// Values a test runs on, after the requested construction.
fn constructed(ds: &Dataset, variable: Variable, construction: Construction) -> Result<Vec<f64>> {
    let s = series(ds, variable)?;
    match construction.apply(s.values()) {
        Some(v) => Ok(v),
        None => {
            let registry = ModelRegistry::builtin();
            let fit = fit_model(&s, registry.get("logistic-offset")?, &FitConfig::default())?;
            Ok(fit.residuals)
        }
    }
}

fn run_test(
    tests: &TestRegistry,
    name: &str,
    ds: &Dataset,
    variable: Variable,
    construction: Construction,
    alpha: f64,
) -> Result<TestRecord> {
    let test = tests.get(name)?;
    let values = constructed(ds, variable, construction)?;
    let outcome = test.run(&values)?;
    let conclusion = test.conclusion(&outcome, alpha);
    Ok(TestRecord {
        variable,
        construction,
        outcome,
        alpha,
        conclusion,
    })
}

fn print_test(r: &TestRecord) {
    let df: Vec<String> = r.outcome.df.iter().map(|d| d.to_string()).collect();
    println!(
        "{} on {} ({}): statistic {:.6}, df {}, p-value {:.6}\n  {}",
        r.outcome.test,
        r.variable,
        r.construction,
        r.outcome.statistic,
        df.join(","),
        r.outcome.p_value,
        r.conclusion
    );
}

fn parse_variable(s: &Option<String>) -> Result<Option<Variable>> {
    s.as_deref()
        .map(|v| v.parse::<Variable>().map_err(CliError::from))
        .transpose()
}

pub fn test(common: &Common, args: &TestArgs) -> Result<Outcome> {
    let started = Instant::now();
    let input = load(common)?;
    let tests = TestRegistry::builtin(TestOptions {
        lags: args.lags,
        ar_order: args.ar_order,
    });
    let variable = parse_variable(&args.variable)?;
    let construction = args
        .construction
        .as_deref()
        .map(str::parse::<Construction>)
        .transpose()?;

    let mut jobs = Vec::new();
    if matches!(args.which, TestChoice::LjungBox | TestChoice::All) {
        let vars = variable.map_or(vec![Variable::TotalCases, Variable::TotalDeaths], |v| {
            vec![v]
        });
        for v in vars {
            jobs.push((
                "ljung-box",
                v,
                construction.unwrap_or(Construction::FirstDifference),
            ));
        }
    }
    if matches!(args.which, TestChoice::Keenan | TestChoice::All) {
        let vars = variable.map_or(vec![Variable::NewCases, Variable::NewDeaths], |v| vec![v]);
        for v in vars {
            jobs.push(("keenan", v, construction.unwrap_or(Construction::Level)));
        }
    }

    let mut report = RunReport::new(Command::Test, metadata(&input));
    for (name, v, c) in jobs {
        let record = run_test(&tests, name, &input.dataset, v, c, common.alpha)?;
        print_test(&record);
        report.tests.push(record);
    }
    emit(common, &report, started)?;
    Ok(Outcome::Done)
}

struct FitRun {
    records: Vec<FitRecord>,
    evaluations: Vec<EvaluationRecord>,
    notes: Vec<String>,
    chart: Option<ChartSpec>,
    converged: bool,
}

fn fit_record(series: &TimeSeries, fit: &FitResult) -> FitRecord {
    let t = series.times();
    FitRecord {
        model: fit.model.clone(),
        train_from: series.date_of(t[0]),
        train_to: series.date_of(t[t.len() - 1]),
        n: series.len(),
        params: fit
            .param_names
            .iter()
            .cloned()
            .zip(fit.params.iter().copied())
            .collect::<BTreeMap<_, _>>(),
        rss: fit.rss,
        iterations: fit.iterations,
        converged: fit.converged,
    }
}

fn evaluation(
    model: &dyn GrowthModel,
    fit: &FitResult,
    part: &TimeSeries,
    scope: Scope,
    split: Option<SplitInfo>,
) -> Result<EvaluationRecord> {
    let predicted = predict(model, &fit.params, part);
    let report = EvaluationReport::evaluate(part.values(), &predicted, split)?;
    let t = part.times();
    Ok(EvaluationRecord {
        model: fit.model.clone(),
        scope,
        from: part.date_of(t[0]),
        to: part.date_of(t[t.len() - 1]),
        metrics: Metrics::from(&report),
    })
}

/// Fits the primary model on the training window, evaluates it in and out
/// of sample, and fits the alternative model for comparison.
fn run_fits(ds: &Dataset, args: &FitArgs) -> Result<FitRun> {
    let registry = ModelRegistry::builtin();
    let model = registry.get(&args.model)?;
    let full = series(ds, Variable::TotalCases)?;
    let last_t = full.max_t().unwrap_or(0);
    let config = fit_config(args.max_iterations);

    let train_end = args.train_end.unwrap_or_else(|| full.date_of(last_t));
    let split_index = full.day_index(train_end) + 1;
    let predict_through = args.predict_through.unwrap_or_else(|| full.date_of(last_t));
    let predict_index = full.day_index(predict_through);

    let (train, holdout) = if split_index > last_t {
        if split_index <= 0 {
            return Err(Error::SplitOutOfRange {
                index: split_index,
                max_t: last_t,
            }
            .into());
        }
        (full.clone(), None)
    } else {
        let (train, test) = train_test_split(&full, split_index)?;
        let test = test.window(split_index, predict_index);
        (train, (!test.is_empty()).then_some(test))
    };
    if predict_index < split_index - 1 {
        return Err(CliError::Usage(format!(
            "--predict-through {predict_through} is before --train-end {train_end}"
        )));
    }

    let mut run = FitRun {
        records: Vec::new(),
        evaluations: Vec::new(),
        notes: Vec::new(),
        chart: None,
        converged: true,
    };

    let fit = fit_model(&train, model, &config)?;
    run.converged = fit.converged;
    run.records.push(fit_record(&train, &fit));
    run.evaluations
        .push(evaluation(model, &fit, &train, Scope::Training, None)?);
    if let Some(test) = &holdout {
        let split = SplitInfo {
            train_end_index: split_index - 1,
            test_start_index: split_index,
            test_end_index: test.max_t().unwrap_or(split_index),
        };
        match evaluation(model, &fit, test, Scope::Holdout, Some(split)) {
            Ok(e) => run.evaluations.push(e),
            Err(e) => run.notes.push(format!("holdout evaluation skipped: {e}")),
        }
        let whole = fit_model(&full, model, &config)?;
        run.records.push(fit_record(&full, &whole));
        run.evaluations
            .push(evaluation(model, &whole, &full, Scope::FullWindow, None)?);
    }

    // Alternative model on the same training window.
    for other in registry.iter().filter(|m| m.name() != model.name()) {
        let alt = fit_model(&train, other, &config)?;
        let alt_eval = evaluation(other, &alt, &train, Scope::Training, None)?;
        let primary_r2 = run.evaluations[0].metrics.r_squared;
        let alt_r2 = alt_eval.metrics.r_squared;
        let (better, worse, hi, lo) = if primary_r2 >= alt_r2 {
            (model.name(), other.name(), primary_r2, alt_r2)
        } else {
            (other.name(), model.name(), alt_r2, primary_r2)
        };
        run.notes.push(format!(
            "{worse} R² {lo:.6} is below {better} R² {hi:.6} on the training window"
        ));
        run.records.push(fit_record(&train, &alt));
        run.evaluations.push(alt_eval);
    }
    run.notes
        .push("MAPE is stored as a fraction; mape_percent gives the same value ×100".to_string());

    let end_t = predict_index.max(last_t);
    let fitted: Vec<(f64, f64)> = (0..=end_t)
        .map(|t| (t as f64, model.evaluate(t as f64, &fit.params)))
        .collect();
    let data: Vec<(f64, f64)> = full.points().map(|(t, y)| (t as f64, y)).collect();
    let chart = ChartSpec {
        title: format!("{} total cases: {} fit", ds.location, model.name()),
        x_label: "date".to_string(),
        y_label: "cases".to_string(),
        start_date: full.start_date,
        data: Polyline {
            label: "observed".to_string(),
            points: data,
        },
        fitted: Polyline {
            label: format!("{} fit", model.name()),
            points: fitted,
        },
        split: holdout.as_ref().map(|_| (split_index - 1) as f64),
    };
    chart.validate()?;
    run.chart = Some(chart);
    Ok(run)
}

fn print_fits(run: &FitRun) {
    for r in &run.records {
        let params: Vec<String> = r
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v:.6}"))
            .collect();
        println!(
            "{} fit on {}..{} (n={}): {} rss={:.4} iterations={} converged={}",
            r.model,
            r.train_from,
            r.train_to,
            r.n,
            params.join(" "),
            r.rss,
            r.iterations,
            r.converged
        );
    }
    for e in &run.evaluations {
        let m = &e.metrics;
        let mape = match (m.mape, m.mape_percent) {
            (Some(f), Some(p)) => format!("MAPE={f:.6} ({p:.4}%)"),
            _ => "MAPE=n/a".to_string(),
        };
        println!(
            "{} {:?} {}..{}: MSE={:.4} R²={:.6} {mape}",
            e.model, e.scope, e.from, e.to, m.mse, m.r_squared
        );
    }
    for n in &run.notes {
        println!("note: {n}");
    }
}

fn write_chart(path: &Path, chart: &ChartSpec) -> Result<String> {
    fs::write(path, render_chart(chart))?;
    Ok(path.display().to_string())
}

fn finish_fit(
    common: &Common,
    args: &FitArgs,
    run: FitRun,
    mut report: RunReport,
    started: Instant,
) -> Result<Outcome> {
    if let (Some(path), Some(chart)) = (&args.svg, &run.chart) {
        report.charts.push(write_chart(path, chart)?);
    }
    report.fits.extend(run.records);
    report.evaluations.extend(run.evaluations);
    report.notes.extend(run.notes);
    emit(common, &report, started)?;
    Ok(if run.converged {
        Outcome::Done
    } else {
        Outcome::NotConverged
    })
}

pub fn fit(common: &Common, args: &FitArgs) -> Result<Outcome> {
    let started = Instant::now();
    let input = load(common)?;
    let run = run_fits(&input.dataset, args)?;
    print_fits(&run);
    let report = RunReport::new(Command::Fit, metadata(&input));
    finish_fit(common, args, run, report, started)
}

pub fn report(common: &Common, args: &FitArgs, lags: usize, ar_order: usize) -> Result<Outcome> {
    let started = Instant::now();
    let input = load(common)?;
    let ds = &input.dataset;
    let mut report = RunReport::new(Command::Report, metadata(&input));
    report.descriptive = descriptive(ds)?;
    print_descriptive(&report.descriptive);

    let tests = TestRegistry::builtin(TestOptions { lags, ar_order });
    for v in [Variable::TotalCases, Variable::TotalDeaths] {
        for c in Construction::DIRECT
            .into_iter()
            .chain([Construction::FitResiduals])
        {
            match run_test(&tests, "ljung-box", ds, v, c, common.alpha) {
                Ok(r) => {
                    print_test(&r);
                    report.tests.push(r);
                }
                Err(e) => report
                    .notes
                    .push(format!("ljung-box on {v} ({c}) skipped: {e}")),
            }
        }
    }
    for v in [Variable::NewCases, Variable::NewDeaths] {
        match run_test(&tests, "keenan", ds, v, Construction::Level, common.alpha) {
            Ok(r) => {
                print_test(&r);
                report.tests.push(r);
            }
            Err(e) => report.notes.push(format!("keenan on {v} skipped: {e}")),
        }
    }

    let run = run_fits(ds, args)?;
    print_fits(&run);
    finish_fit(common, args, run, report, started)
}
