//! OWID-style CSV ingestion and day-indexed series.
//!
//! A [`Dataset`] holds the raw per-day observations for one location; an
//! individual variable is pulled out as a [`TimeSeries`] whose time axis is
//! the number of whole days since the first retained observation.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DATE_FORMAT: &str = "%Y-%m-%d";

/// Canonical export columns, in order.
pub const CANONICAL_COLUMNS: [&str; 6] = [
    "location",
    "date",
    "total_cases",
    "new_cases",
    "total_deaths",
    "new_deaths",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    TotalCases,
    NewCases,
    TotalDeaths,
    NewDeaths,
}

impl Variable {
    pub const ALL: [Variable; 4] = [
        Variable::TotalCases,
        Variable::NewCases,
        Variable::TotalDeaths,
        Variable::NewDeaths,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variable::TotalCases => "total_cases",
            Variable::NewCases => "new_cases",
            Variable::TotalDeaths => "total_deaths",
            Variable::NewDeaths => "new_deaths",
        }
    }

    pub fn is_cumulative(self) -> bool {
        matches!(self, Variable::TotalCases | Variable::TotalDeaths)
    }

    /// Carry-forward for cumulative counts, drop for daily counts.
    pub fn default_missing_policy(self) -> MissingPolicy {
        if self.is_cumulative() {
            MissingPolicy::ForwardFill
        } else {
            MissingPolicy::Drop
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variable::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "variable",
                name: s.to_string(),
                available: Variable::ALL.map(Variable::as_str).join(", "),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    Error,
    ForwardFill,
    Drop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub date: NaiveDate,
    pub total_cases: Option<f64>,
    pub new_cases: Option<f64>,
    pub total_deaths: Option<f64>,
    pub new_deaths: Option<f64>,
}

impl Observation {
    pub fn get(&self, variable: Variable) -> Option<f64> {
        match variable {
            Variable::TotalCases => self.total_cases,
            Variable::NewCases => self.new_cases,
            Variable::TotalDeaths => self.total_deaths,
            Variable::NewDeaths => self.new_deaths,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub location: String,
    observations: Vec<Observation>,
}

impl Dataset {
    /// Builds a dataset, rejecting unsorted or duplicate dates.
    pub fn new(location: impl Into<String>, observations: Vec<Observation>) -> Result<Self> {
        for (i, pair) in observations.windows(2).enumerate() {
            if pair[1].date <= pair[0].date {
                return Err(Error::MalformedRow {
                    row: i + 2,
                    reason: format!("date {} does not follow {}", pair[1].date, pair[0].date),
                });
            }
        }
        Ok(Dataset {
            location: location.into(),
            observations,
        })
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.observations.first().map(|o| o.date)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.observations.last().map(|o| o.date)
    }

    /// Dates on which a cumulative variable drops below its previous value.
    pub fn downward_revisions(&self, variable: Variable) -> Vec<NaiveDate> {
        let mut last: Option<f64> = None;
        let mut out = Vec::new();
        for obs in &self.observations {
            if let Some(v) = obs.get(variable) {
                if matches!(last, Some(prev) if v < prev) {
                    out.push(obs.date);
                }
                last = Some(v);
            }
        }
        out
    }

    /// Writes the six canonical columns; reparsing yields an identical dataset.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CANONICAL_COLUMNS)?;
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for obs in &self.observations {
            w.write_record([
                self.location.clone(),
                obs.date.format(DATE_FORMAT).to_string(),
                cell(obs.total_cases),
                cell(obs.new_cases),
                cell(obs.total_deaths),
                cell(obs.new_deaths),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Parses an OWID `owid-covid-data` style CSV, keeping rows for `location`
/// whose date lies in `[date_from, date_to]`.
pub fn parse_owid_csv<R: Read>(
    raw: R,
    location: &str,
    date_from: NaiveDate,
    date_to: NaiveDate,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(raw);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let loc_idx = column("location")?;
    let date_idx = column("date")?;
    let count_idx = [
        column("total_cases")?,
        column("new_cases")?,
        column("total_deaths")?,
        column("new_deaths")?,
    ];

    let mut observations = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if record.get(loc_idx).map(str::trim) != Some(location) {
            continue;
        }
        let raw_date = record.get(date_idx).unwrap_or("").trim();
        let date =
            NaiveDate::parse_from_str(raw_date, DATE_FORMAT).map_err(|e| Error::MalformedRow {
                row,
                reason: format!("bad date `{raw_date}`: {e}"),
            })?;
        if date < date_from || date > date_to {
            continue;
        }
        let mut counts = [None; 4];
        for (slot, (&idx, name)) in counts
            .iter_mut()
            .zip(count_idx.iter().zip(&CANONICAL_COLUMNS[2..]))
        {
            *slot = parse_count(record.get(idx).unwrap_or(""), row, name)?;
        }
        observations.push(Observation {
            date,
            total_cases: counts[0],
            new_cases: counts[1],
            total_deaths: counts[2],
            new_deaths: counts[3],
        });
    }

    if observations.is_empty() {
        return Err(Error::LocationNotFound {
            location: location.to_string(),
            from: date_from,
            to: date_to,
        });
    }
    observations.sort_by_key(|o| o.date);
    if let Some(pair) = observations.windows(2).find(|p| p[0].date == p[1].date) {
        return Err(Error::MalformedRow {
            row: 0,
            reason: format!("duplicate date {}", pair[0].date),
        });
    }
    let dataset = Dataset::new(location, observations)?;
    for variable in [Variable::TotalCases, Variable::TotalDeaths] {
        let revisions = dataset.downward_revisions(variable);
        if !revisions.is_empty() {
            log::warn!(
                "{variable} decreases on {} day(s), first on {}",
                revisions.len(),
                revisions[0]
            );
        }
    }
    Ok(dataset)
}

fn parse_count(cell: &str, row: usize, column: &str) -> Result<Option<f64>> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    let value: f64 = cell.parse().map_err(|_| Error::MalformedRow {
        row,
        reason: format!("non-numeric {column} `{cell}`"),
    })?;
    if !value.is_finite() || value < 0.0 {
        return Err(Error::MalformedRow {
            row,
            reason: format!("{column} must be a finite non-negative count, got `{cell}`"),
        });
    }
    Ok(Some(value))
}

/// A single variable indexed by whole days since `start_date`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub label: String,
    pub start_date: NaiveDate,
    t: Vec<i64>,
    y: Vec<f64>,
}

impl TimeSeries {
    /// Day offsets must be non-negative and strictly increasing and every
    /// value finite.
    pub fn new(
        label: impl Into<String>,
        start_date: NaiveDate,
        t: Vec<i64>,
        y: Vec<f64>,
    ) -> Result<Self> {
        if t.len() != y.len() {
            return Err(Error::LengthMismatch(t.len(), y.len()));
        }
        if t.first().is_some_and(|&t0| t0 < 0) || t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DegenerateSeries(
                "day offsets must be non-negative and strictly increasing".into(),
            ));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateSeries(format!(
                "non-finite value at index {i}"
            )));
        }
        Ok(TimeSeries {
            label: label.into(),
            start_date,
            t,
            y,
        })
    }

    /// Consecutive days 0..n.
    pub fn from_values(
        label: impl Into<String>,
        start_date: NaiveDate,
        y: Vec<f64>,
    ) -> Result<Self> {
        let t = (0..y.len() as i64).collect();
        TimeSeries::new(label, start_date, t, y)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn times(&self) -> &[i64] {
        &self.t
    }

    pub fn times_f64(&self) -> Vec<f64> {
        self.t.iter().map(|&t| t as f64).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn points(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.t.iter().copied().zip(self.y.iter().copied())
    }

    pub fn max_t(&self) -> Option<i64> {
        self.t.last().copied()
    }

    pub fn day_index(&self, date: NaiveDate) -> i64 {
        (date - self.start_date).num_days()
    }

    pub fn date_of(&self, t: i64) -> NaiveDate {
        self.start_date + chrono::Days::new(t.max(0) as u64)
    }

    /// Points with `lo <= t <= hi`, keeping the original day offsets.
    pub fn window(&self, lo: i64, hi: i64) -> TimeSeries {
        let (t, y) = self.points().filter(|&(t, _)| t >= lo && t <= hi).unzip();
        TimeSeries {
            label: self.label.clone(),
            start_date: self.start_date,
            t,
            y,
        }
    }
}

/// Pulls one variable out of a dataset, handling gaps per `policy`.
pub fn extract_series(
    dataset: &Dataset,
    variable: Variable,
    policy: MissingPolicy,
) -> Result<TimeSeries> {
    if dataset.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut dated: Vec<(NaiveDate, f64)> = Vec::with_capacity(dataset.len());
    let mut carried: Option<f64> = None;
    for obs in dataset.observations() {
        match (obs.get(variable), policy) {
            (Some(v), _) => {
                carried = Some(v);
                dated.push((obs.date, v));
            }
            (None, MissingPolicy::Error) => {
                return Err(Error::MissingValue {
                    variable: variable.to_string(),
                    date: obs.date,
                })
            }
            // Leading gaps have nothing to carry and are skipped.
            (None, MissingPolicy::ForwardFill) => {
                if let Some(v) = carried {
                    dated.push((obs.date, v));
                }
            }
            (None, MissingPolicy::Drop) => {}
        }
    }
    let Some(&(start, _)) = dated.first() else {
        return Err(Error::AllMissing(variable.to_string()));
    };
    let (t, y) = dated
        .into_iter()
        .map(|(d, v)| ((d - start).num_days(), v))
        .unzip();
    TimeSeries::new(variable.as_str(), start, t, y)
}

/// Splits at day `split_index`: train has `t < split_index`, test has the
/// rest with its original day offsets.
pub fn train_test_split(series: &TimeSeries, split_index: i64) -> Result<(TimeSeries, TimeSeries)> {
    let max_t = series.max_t().unwrap_or(0);
    let min_t = series.times().first().copied().unwrap_or(0);
    if split_index <= min_t || split_index > max_t {
        return Err(Error::SplitOutOfRange {
            index: split_index,
            max_t,
        });
    }
    let train = series.window(i64::MIN, split_index - 1);
    let test = series.window(split_index, i64::MAX);
    Ok((train, test))
}
