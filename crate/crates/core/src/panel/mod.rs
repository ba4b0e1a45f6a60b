//! Price ingestion, calendar alignment, returns and volatility.

mod align;
mod io;
mod returns;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use align::{align, AlignReport, RemovedDate, DEFAULT_CLOSED_FRACTION_MAX};
pub use io::{
    load_raw, read_long, read_wide, write_panel, write_raw_long, write_raw_wide, LoadWarning,
    Loaded, PanelFormat,
};
pub(crate) use returns::{is_degenerate as is_degenerate_sigma, moments as returns_moments};
pub use returns::{mean_volatility, to_returns, volatility, ReturnPanel, VolatilitySeries};

/// Half-open calendar range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start >= end {
            return Err(Error::InvalidParameter(format!(
                "empty date range {start}..{end}"
            )));
        }
        Ok(DateRange { start, end })
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start <= d && d < self.end
    }

    pub fn overlaps(&self, other: &DateRange) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Index range of `dates` (sorted ascending) that falls inside the range.
    pub fn select(&self, dates: &[NaiveDate]) -> std::ops::Range<usize> {
        let lo = dates.partition_point(|d| *d < self.start);
        let hi = dates.partition_point(|d| *d < self.end);
        lo..hi.max(lo)
    }
}

/// Closing prices of one index as observed, before alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub label: String,
    /// Strictly increasing dates with positive closes.
    pub observations: Vec<(NaiveDate, f64)>,
}

impl RawSeries {
    pub fn new(label: impl Into<String>, mut observations: Vec<(NaiveDate, f64)>) -> Result<Self> {
        let label = label.into();
        observations.sort_by_key(|(d, _)| *d);
        if let Some(w) = observations.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateObservation {
                label,
                date: w[0].0,
            });
        }
        if let Some((d, c)) = observations
            .iter()
            .find(|(_, c)| !(c.is_finite() && *c > 0.0))
        {
            return Err(Error::InvalidParameter(format!(
                "`{label}` has non-positive close {c} on {d}"
            )));
        }
        Ok(RawSeries {
            label,
            observations,
        })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// Aligned closing prices: `N` indices over a common calendar of `L+1` days.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    labels: Vec<String>,
    dates: Vec<NaiveDate>,
    prices: Vec<Vec<f64>>,
    fill_mask: Vec<Vec<bool>>,
}

impl PricePanel {
    pub fn new(
        labels: Vec<String>,
        dates: Vec<NaiveDate>,
        prices: Vec<Vec<f64>>,
        fill_mask: Vec<Vec<bool>>,
    ) -> Result<Self> {
        if prices.len() != labels.len() || fill_mask.len() != labels.len() {
            return Err(Error::InvalidParameter(
                "one price row and one mask row per label required".into(),
            ));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "panel dates must be strictly increasing".into(),
            ));
        }
        for (i, (row, mask)) in prices.iter().zip(&fill_mask).enumerate() {
            if row.len() != dates.len() || mask.len() != dates.len() {
                return Err(Error::InvalidParameter(format!(
                    "row `{}` does not match the calendar length",
                    labels[i]
                )));
            }
            if row.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
                return Err(Error::InvalidParameter(format!(
                    "row `{}` has a missing or non-positive price",
                    labels[i]
                )));
            }
        }
        Ok(PricePanel {
            labels,
            dates,
            prices,
            fill_mask,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[Vec<f64>] {
        &self.prices
    }

    pub fn fill_mask(&self) -> &[Vec<bool>] {
        &self.fill_mask
    }

    pub fn n_indices(&self) -> usize {
        self.labels.len()
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn label_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Number of imputed cells per date.
    pub fn filled_per_date(&self) -> Vec<usize> {
        (0..self.dates.len())
            .map(|t| self.fill_mask.iter().filter(|m| m[t]).count())
            .collect()
    }

    /// Observed (non-imputed) cells as raw series.
    pub fn to_raw_series(&self) -> Vec<RawSeries> {
        self.labels
            .iter()
            .zip(self.prices.iter().zip(&self.fill_mask))
            .map(|(label, (row, mask))| RawSeries {
                label: label.clone(),
                observations: self
                    .dates
                    .iter()
                    .zip(row.iter().zip(mask))
                    .filter(|(_, (_, &filled))| !filled)
                    .map(|(d, (p, _))| (*d, *p))
                    .collect(),
            })
            .collect()
    }

    /// Sub-panel over the dates inside `range`.
    pub fn slice(&self, range: &DateRange) -> Result<PricePanel> {
        let cols = range.select(&self.dates);
        if cols.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "no panel dates inside {}..{}",
                range.start, range.end
            )));
        }
        Ok(PricePanel {
            labels: self.labels.clone(),
            dates: self.dates[cols.clone()].to_vec(),
            prices: self
                .prices
                .iter()
                .map(|r| r[cols.clone()].to_vec())
                .collect(),
            fill_mask: self
                .fill_mask
                .iter()
                .map(|r| r[cols.clone()].to_vec())
                .collect(),
        })
    }

    /// Sub-panel restricted to `labels`, in the given order.
    pub fn select_labels(&self, labels: &[String]) -> Result<PricePanel> {
        let idx = labels
            .iter()
            .map(|l| self.label_index(l))
            .collect::<Result<Vec<_>>>()?;
        Ok(PricePanel {
            labels: labels.to_vec(),
            dates: self.dates.clone(),
            prices: idx.iter().map(|&i| self.prices[i].clone()).collect(),
            fill_mask: idx.iter().map(|&i| self.fill_mask[i].clone()).collect(),
        })
    }
}
