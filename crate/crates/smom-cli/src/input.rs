//! Reading observation series from delimited text.
//!
//! A data line holds either a single value or a `date,value` pair. Fields
//! may be separated by commas, semicolons or whitespace. Blank lines and
//! lines starting with `#` are skipped, and the first data line may be a
//! header. Dates use the `YYYY-MM-DD` format.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use clap::ValueEnum;
use serde::Serialize;
use thiserror::Error;

/// Failure to turn text into a series.
#[derive(Debug, Error, PartialEq)]
pub enum InputError {
    /// A data line could not be parsed.
    #[error("line {line}: {message}")]
    Line {
        /// One-based line number.
        line: usize,
        /// Description of the problem.
        message: String,
    },
    /// Aggregation was requested for a series without dates.
    #[error("aggregation `{0}` needs a date column")]
    MissingDates(Aggregate),
    /// The input held no observations.
    #[error("input contains no observations")]
    Empty,
}

/// One parsed observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    /// Calendar date when the input has a date column.
    pub date: Option<NaiveDate>,
    /// Observed value.
    pub value: f64,
}

/// Temporal aggregation applied before estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    /// Use the observations as they are.
    #[default]
    None,
    /// Sum within ISO weeks.
    Weekly,
    /// Sum within calendar months.
    Monthly,
}

impl std::fmt::Display for Aggregate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Aggregate::None => "none",
            Aggregate::Weekly => "weekly",
            Aggregate::Monthly => "monthly",
        })
    }
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .collect()
}

fn parse_value(field: &str, line: usize) -> Result<f64, InputError> {
    let value: f64 = field.parse().map_err(|_| InputError::Line {
        line,
        message: format!("`{field}` is not a number"),
    })?;
    if !value.is_finite() {
        return Err(InputError::Line {
            line,
            message: format!("`{field}` is not finite"),
        });
    }
    Ok(value)
}

fn parse_date(field: &str, line: usize) -> Result<NaiveDate, InputError> {
    NaiveDate::parse_from_str(field, "%Y-%m-%d").map_err(|e| InputError::Line {
        line,
        message: format!("`{field}` is not a YYYY-MM-DD date ({e})"),
    })
}

/// Parses a single-column or `date,value` series.
pub fn parse_series(text: &str) -> Result<Vec<Observation>, InputError> {
    let mut out = Vec::new();
    let mut width = None;
    let mut seen_data = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields = split_fields(trimmed);
        let first_line = !seen_data;
        seen_data = true;
        if first_line && fields.last().is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        match (fields.len(), width) {
            (w @ (1 | 2), None) => width = Some(w),
            (w, Some(expected)) if w == expected => {}
            (w, Some(expected)) => {
                return Err(InputError::Line {
                    line,
                    message: format!("expected {expected} field(s), found {w}"),
                })
            }
            (w, None) => {
                return Err(InputError::Line {
                    line,
                    message: format!("expected `value` or `date,value`, found {w} fields"),
                })
            }
        }
        let obs = if fields.len() == 1 {
            Observation {
                date: None,
                value: parse_value(fields[0], line)?,
            }
        } else {
            Observation {
                date: Some(parse_date(fields[0], line)?),
                value: parse_value(fields[1], line)?,
            }
        };
        out.push(obs);
    }
    if out.is_empty() {
        return Err(InputError::Empty);
    }
    Ok(out)
}

/// Applies the aggregation and returns the values to estimate from.
///
/// Weekly and monthly totals are sums over the observations falling in
/// each period, ordered chronologically. Periods without observations do
/// not produce a value.
pub fn aggregate(obs: &[Observation], how: Aggregate) -> Result<Vec<f64>, InputError> {
    if how == Aggregate::None {
        return Ok(obs.iter().map(|o| o.value).collect());
    }
    let mut totals: BTreeMap<(i32, u32), f64> = BTreeMap::new();
    for o in obs {
        let date = o.date.ok_or(InputError::MissingDates(how))?;
        let key = match how {
            Aggregate::Weekly => {
                let w = date.iso_week();
                (w.year(), w.week())
            }
            Aggregate::Monthly => (date.year(), date.month()),
            Aggregate::None => unreachable!("handled above"),
        };
        *totals.entry(key).or_insert(0.0) += o.value;
    }
    Ok(totals.into_values().collect())
}

/// Parses a comma separated list of numbers such as `1,2.5`.
pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .map_err(|_| format!("`{s}` is not a number"))
        })
        .collect()
}

/// Parses a grid given as a list or as `start:stop:step` with `stop`
/// included when it lies on the grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [_] => parse_list(text),
        [a, b, c] => {
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("`{s}` is not a number"))
            };
            let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
            if !(step > 0.0) || !(stop >= start) {
                return Err(format!(
                    "grid `{text}` needs start <= stop and a positive step"
                ));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(format!("grid `{text}` must be a list or start:stop:step")),
    }
}
