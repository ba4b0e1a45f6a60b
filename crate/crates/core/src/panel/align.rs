use std::collections::BTreeSet;

use chrono::NaiveDate;

use super::{PricePanel, RawSeries};
use crate::error::{Error, Result};

/// Dates on which more than this fraction of markets are closed are dropped.
pub const DEFAULT_CLOSED_FRACTION_MAX: f64 = 0.30;

#[derive(Debug, Clone, PartialEq)]
pub struct RemovedDate {
    pub date: NaiveDate,
    pub closed: usize,
}

/// What `align` did to the union calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignReport {
    /// Dates with at least one observation across all markets.
    pub union_dates: usize,
    pub removed: Vec<RemovedDate>,
    /// Imputed cell count per label, in panel order.
    pub filled: Vec<(String, usize)>,
}

impl AlignReport {
    pub fn total_filled(&self) -> usize {
        self.filled.iter().map(|(_, n)| n).sum()
    }
}

/// Aligns raw series onto a shared trading calendar.
///
/// The calendar is the union of observed dates. A date is removed when the
/// fraction of markets without an observation on it is strictly greater than
/// `closed_fraction_max`; a market whose history has not started yet counts
/// as closed. On retained dates, a missing close is imputed with the market's
/// close on the previous retained date and flagged in the fill mask.
pub fn align(series: &[RawSeries], closed_fraction_max: f64) -> Result<(PricePanel, AlignReport)> {
    if series.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "alignment needs at least 2 series, got {}",
            series.len()
        )));
    }
    if !(0.0..=1.0).contains(&closed_fraction_max) {
        return Err(Error::InvalidParameter(format!(
            "closed fraction {closed_fraction_max} outside [0, 1]"
        )));
    }
    let mut seen_labels = BTreeSet::new();
    for s in series {
        if !seen_labels.insert(s.label.as_str()) {
            return Err(Error::InvalidParameter(format!(
                "label `{}` appears twice",
                s.label
            )));
        }
    }

    let union: Vec<NaiveDate> = series
        .iter()
        .flat_map(|s| s.observations.iter().map(|(d, _)| *d))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if union.is_empty() {
        return Err(Error::NoSeries);
    }

    let n = series.len();
    // observed[i][t]: close of series i on union date t, if any.
    let observed: Vec<Vec<Option<f64>>> = series
        .iter()
        .map(|s| {
            let mut row = vec![None; union.len()];
            let mut t = 0;
            for (d, v) in &s.observations {
                while union[t] < *d {
                    t += 1;
                }
                row[t] = Some(*v);
            }
            row
        })
        .collect();

    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for (t, &date) in union.iter().enumerate() {
        let closed = observed.iter().filter(|row| row[t].is_none()).count();
        if closed as f64 / n as f64 > closed_fraction_max {
            removed.push(RemovedDate { date, closed });
        } else {
            kept.push(t);
        }
    }

    let dates: Vec<NaiveDate> = kept.iter().map(|&t| union[t]).collect();
    let mut prices = Vec::with_capacity(n);
    let mut mask = Vec::with_capacity(n);
    let mut filled = Vec::with_capacity(n);
    for (s, row) in series.iter().zip(&observed) {
        let mut p = Vec::with_capacity(kept.len());
        let mut m = Vec::with_capacity(kept.len());
        let mut last: Option<f64> = None;
        let mut first_missing: Option<NaiveDate> = None;
        for &t in &kept {
            match row[t] {
                Some(v) => {
                    p.push(v);
                    m.push(false);
                    last = Some(v);
                }
                None => {
                    match last {
                        Some(v) => p.push(v),
                        None => {
                            first_missing.get_or_insert(union[t]);
                            p.push(f64::NAN);
                        }
                    }
                    m.push(true);
                }
            }
        }
        if m.iter().all(|&f| f) {
            return Err(Error::EmptyAfterAlignment {
                label: s.label.clone(),
            });
        }
        if let Some(date) = first_missing {
            return Err(Error::NoPriorClose {
                label: s.label.clone(),
                date,
            });
        }
        filled.push((s.label.clone(), m.iter().filter(|&&f| f).count()));
        prices.push(p);
        mask.push(m);
    }

    let labels = series.iter().map(|s| s.label.clone()).collect();
    let panel = PricePanel::new(labels, dates, prices, mask)?;
    Ok((
        panel,
        AlignReport {
            union_dates: union.len(),
            removed,
            filled,
        },
    ))
}
