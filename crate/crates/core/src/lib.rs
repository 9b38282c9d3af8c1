//! Logistic and offset-logistic growth curves for cumulative case counts:
//! ingestion, fitting, diagnostics, evaluation and reporting.

// `!(x > 0.0)` style guards deliberately treat NaN as invalid.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chart;
pub mod error;
pub mod fit;
pub mod metrics;
pub mod model;
pub mod report;
pub mod solver;
pub mod stats;
pub mod timeseries;

pub use error::{Error, Result};
pub use fit::{fit_model, FitConfig, FitResult};
pub use model::{GrowthModel, ModelKind, ModelRegistry};
pub use report::RunReport;
pub use timeseries::{Dataset, TimeSeries, Variable};
