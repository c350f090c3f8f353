//! Tick-data CSV ingestion and emission.
//!
//! Input: a header row plus `time,price` or `time,logprice` columns, UTF-8,
//! `.` decimal separator. Time is either numeric seconds or ISO-8601;
//! spacing must be regular up to a configurable tolerance. Seconds convert
//! to years through the 6.5-hour/252-day trading calendar.

use std::fs;
use std::path::Path;

use chrono::NaiveDateTime;

use crate::error::{Error, Result};
use crate::grid::{IncrementSeries, SamplingGrid};
use crate::numeric::median;

/// Trading seconds per year: 252 days × 6.5 hours.
pub const SECONDS_PER_YEAR: f64 = 252.0 * 6.5 * 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceKind {
    Price,
    LogPrice,
}

#[derive(Debug, Clone)]
pub struct IngestSpec {
    pub time_column: String,
    /// Explicit value column; by default `logprice` is preferred over
    /// `price` when both exist.
    pub value_column: Option<String>,
    /// Override the kind inferred from the column name.
    pub price_kind: Option<PriceKind>,
    /// Largest tolerated spacing deviation, as a fraction of the median step.
    pub tolerance: f64,
    pub seconds_per_year: f64,
}

impl Default for IngestSpec {
    fn default() -> Self {
        IngestSpec {
            time_column: "time".into(),
            value_column: None,
            price_kind: None,
            tolerance: 0.05,
            seconds_per_year: SECONDS_PER_YEAR,
        }
    }
}

fn parse_time(field: &str, row: usize) -> Result<f64> {
    if let Ok(secs) = field.parse::<f64>() {
        if !secs.is_finite() {
            return Err(Error::data_at(row, format!("non-finite time {field:?}")));
        }
        return Ok(secs);
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(field.trim_end_matches('Z'), fmt) {
            return Ok(dt.and_utc().timestamp() as f64
                + dt.and_utc().timestamp_subsec_nanos() as f64 * 1e-9);
        }
    }
    Err(Error::data_at(row, format!("unparseable time {field:?} (seconds or ISO-8601)")))
}

/// Read a tick CSV into an increment series on an inferred regular grid.
pub fn ingest_csv(path: &Path, spec: &IngestSpec) -> Result<IncrementSeries<f64>> {
    let text = fs::read_to_string(path)?;
    ingest_csv_str(&text, spec)
}

pub fn ingest_csv_str(text: &str, spec: &IngestSpec) -> Result<IncrementSeries<f64>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::data("empty file"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();

    let time_idx = cols
        .iter()
        .position(|c| c.eq_ignore_ascii_case(&spec.time_column))
        .ok_or_else(|| Error::data(format!("missing time column {:?}", spec.time_column)))?;

    let (value_idx, inferred_kind) = match &spec.value_column {
        Some(name) => {
            let idx = cols
                .iter()
                .position(|c| c.eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::data(format!("missing value column {name:?}")))?;
            let kind = if cols[idx].eq_ignore_ascii_case("logprice") {
                PriceKind::LogPrice
            } else {
                PriceKind::Price
            };
            (idx, kind)
        }
        None => {
            if let Some(idx) = cols.iter().position(|c| c.eq_ignore_ascii_case("logprice")) {
                (idx, PriceKind::LogPrice)
            } else if let Some(idx) = cols.iter().position(|c| c.eq_ignore_ascii_case("price")) {
                (idx, PriceKind::Price)
            } else {
                return Err(Error::data("no price or logprice column in header"));
            }
        }
    };
    let kind = spec.price_kind.unwrap_or(inferred_kind);

    let mut times = Vec::new();
    let mut levels = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = lineno + 1; // 1-based file line
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() <= time_idx.max(value_idx) {
            return Err(Error::data_at(row, format!("expected {} fields", cols.len())));
        }
        let t = parse_time(fields[time_idx], row)?;
        if let Some(&prev) = times.last() {
            if t == prev {
                return Err(Error::data_at(row, "duplicate timestamp"));
            }
            if t < prev {
                return Err(Error::data_at(row, "time not increasing"));
            }
        }
        let raw: f64 = fields[value_idx]
            .parse()
            .map_err(|_| Error::data_at(row, format!("bad value {:?}", fields[value_idx])))?;
        let level = match kind {
            PriceKind::LogPrice => raw,
            PriceKind::Price => {
                if !(raw > 0.0) {
                    return Err(Error::data_at(row, format!("non-positive price {raw}")));
                }
                raw.ln()
            }
        };
        if !level.is_finite() {
            return Err(Error::data_at(row, "non-finite level"));
        }
        times.push(t);
        levels.push(level);
    }

    if levels.len() < 2 {
        return Err(Error::data("need at least two rows of data"));
    }
    let diffs: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let h_secs = median(&diffs);
    let mut offenders = Vec::new();
    for (i, d) in diffs.iter().enumerate() {
        if (d - h_secs).abs() > spec.tolerance * h_secs {
            offenders.push(i + 2); // 1-based data row of the gap's right edge
        }
    }
    if !offenders.is_empty() {
        let shown: Vec<String> = offenders.iter().take(8).map(|r| r.to_string()).collect();
        return Err(Error::data(format!(
            "irregular spacing beyond tolerance at {} row(s): {}{}",
            offenders.len(),
            shown.join(", "),
            if offenders.len() > 8 { ", …" } else { "" }
        )));
    }

    let n = levels.len() - 1;
    let h_years = h_secs / spec.seconds_per_year;
    let grid = SamplingGrid::with_min_one(n, n as f64 * h_years)?;
    let values = levels.windows(2).map(|w| w[1] - w[0]).collect();
    IncrementSeries::new(grid, values)
}

/// Emit levels as `time,logprice` rows (17 significant digits) that
/// round-trip through [`ingest_csv`] exactly at the 1e-10 level.
pub fn render_levels_csv(levels: &[f64], step_seconds: f64) -> String {
    let mut out = String::from("time,logprice\n");
    for (i, level) in levels.iter().enumerate() {
        out.push_str(&format!("{:.6},{:.16e}\n", i as f64 * step_seconds, level));
    }
    out
}
