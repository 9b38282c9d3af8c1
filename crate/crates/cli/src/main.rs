mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{CliError, Outcome};

#[derive(Parser)]
#[command(
    name = "logigrow",
    version,
    about = "Logistic growth fitting and diagnostics for cumulative case counts"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
pub struct Common {
    /// OWID-style CSV; defaults to $LOGIGROW_FIXTURE, then the bundled fixture.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    #[arg(long, global = true, default_value = "Senegal")]
    pub location: String,
    #[arg(long, global = true, default_value = "2022-04-01")]
    pub from: NaiveDate,
    #[arg(long, global = true, default_value = "2023-04-30")]
    pub to: NaiveDate,
    /// Write the JSON report here.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Re-export the selected rows as a six-column CSV.
    #[arg(long, global = true, value_name = "PATH")]
    pub export_csv: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum TestChoice {
    LjungBox,
    Keenan,
    All,
}

#[derive(Args, Clone)]
pub struct TestArgs {
    #[arg(value_enum, default_value = "all")]
    pub which: TestChoice,
    /// total_cases, new_cases, total_deaths or new_deaths.
    #[arg(long)]
    pub variable: Option<String>,
    /// level, first_difference, second_difference or fit_residuals.
    #[arg(long)]
    pub construction: Option<String>,
    #[arg(long, default_value_t = logigrow_core::stats::DEFAULT_LAGS)]
    pub lags: usize,
    #[arg(long, default_value_t = logigrow_core::stats::DEFAULT_AR_ORDER)]
    pub ar_order: usize,
}

#[derive(Args, Clone)]
pub struct FitArgs {
    #[arg(long, default_value = "logistic-offset")]
    pub model: String,
    /// Last training day; later days are held out.
    #[arg(long)]
    pub train_end: Option<NaiveDate>,
    /// Last day of the forecast; defaults to --to.
    #[arg(long)]
    pub predict_through: Option<NaiveDate>,
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
    /// Levenberg-Marquardt iteration cap; hitting it exits with code 4.
    #[arg(long, default_value_t = 200)]
    pub max_iterations: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Descriptive statistics for the four count variables.
    Stats,
    /// Ljung-Box and Keenan diagnostics.
    Test(TestArgs),
    /// Fit a growth curve, optionally holding out the tail.
    Fit(FitArgs),
    /// Statistics, diagnostics, both fits and evaluations in one report.
    Report {
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, default_value_t = logigrow_core::stats::DEFAULT_LAGS)]
        lags: usize,
        #[arg(long, default_value_t = logigrow_core::stats::DEFAULT_AR_ORDER)]
        ar_order: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Stats => commands::stats(&cli.common),
        Cmd::Test(args) => commands::test(&cli.common, args),
        Cmd::Fit(args) => commands::fit(&cli.common, args),
        Cmd::Report {
            fit,
            lags,
            ar_order,
        } => commands::report(&cli.common, fit, *lags, *ar_order),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => {
            eprintln!("error: fit did not converge; report written");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Core(_) | CliError::Usage(_) => 3,
        }
    }
}
