use chrono::NaiveDate;

use super::PricePanel;
use crate::error::{Error, Result};

/// Relative threshold below which a standard deviation is treated as zero.
const SIGMA_EPS: f64 = 1e-12;

/// Log-returns of a price panel with per-index moments.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    labels: Vec<String>,
    /// Date of the closing price that ends each return.
    dates: Vec<NaiveDate>,
    returns: Vec<Vec<f64>>,
    mean: Vec<f64>,
    sigma: Vec<f64>,
    normalized: Vec<Vec<f64>>,
    scaled: Vec<Vec<f64>>,
}

/// Population mean and standard deviation, `σ = sqrt(<x²> - <x>²)` computed
/// in the two-pass form.
pub(crate) fn moments(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub(crate) fn is_degenerate(mean: f64, sigma: f64) -> bool {
    !(sigma > SIGMA_EPS * (1.0 + mean.abs()))
}

impl ReturnPanel {
    /// Builds a return panel from log-returns, computing the moments.
    pub fn from_returns(
        labels: Vec<String>,
        dates: Vec<NaiveDate>,
        returns: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if returns.len() != labels.len() {
            return Err(Error::InvalidParameter(
                "one return row per label required".into(),
            ));
        }
        if dates.len() < 2 {
            return Err(Error::TooShort {
                what: "return panel",
                needed: 2,
                got: dates.len(),
            });
        }
        let mut mean = Vec::with_capacity(labels.len());
        let mut sigma = Vec::with_capacity(labels.len());
        let mut normalized = Vec::with_capacity(labels.len());
        let mut scaled = Vec::with_capacity(labels.len());
        for (label, row) in labels.iter().zip(&returns) {
            if row.len() != dates.len() {
                return Err(Error::InvalidParameter(format!(
                    "return row `{label}` does not match the calendar length"
                )));
            }
            if row.iter().any(|r| !r.is_finite()) {
                return Err(Error::NonFinite(format!("returns of `{label}`")));
            }
            let (m, s) = moments(row);
            if is_degenerate(m, s) {
                return Err(Error::Degenerate {
                    label: label.clone(),
                });
            }
            normalized.push(row.iter().map(|r| (r - m) / s).collect());
            scaled.push(row.iter().map(|r| r / s).collect());
            mean.push(m);
            sigma.push(s);
        }
        Ok(ReturnPanel {
            labels,
            dates,
            returns,
            mean,
            sigma,
            normalized,
            scaled,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn n_indices(&self) -> usize {
        self.labels.len()
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Log-returns `R`, one row per index.
    pub fn returns(&self) -> &[Vec<f64>] {
        &self.returns
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// `(R - <R>) / σ`, zero mean and unit variance per row.
    pub fn normalized(&self) -> &[Vec<f64>] {
        &self.normalized
    }

    /// `R / σ`, the input series for MF-DFA.
    pub fn scaled(&self) -> &[Vec<f64>] {
        &self.scaled
    }

    pub fn label_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Columns `range` as a new panel with moments recomputed on the slice.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<ReturnPanel> {
        if range.end > self.len() || range.start >= range.end {
            return Err(Error::InvalidParameter(format!(
                "column range {range:?} outside 0..{}",
                self.len()
            )));
        }
        ReturnPanel::from_returns(
            self.labels.clone(),
            self.dates[range.clone()].to_vec(),
            self.returns
                .iter()
                .map(|r| r[range.clone()].to_vec())
                .collect(),
        )
    }
}

/// `R[i][t] = ln S[i][t+1] - ln S[i][t]`, normalized with population σ.
pub fn to_returns(panel: &PricePanel) -> Result<ReturnPanel> {
    if panel.n_dates() < 3 {
        return Err(Error::TooShort {
            what: "return computation",
            needed: 3,
            got: panel.n_dates(),
        });
    }
    let returns = panel
        .prices()
        .iter()
        .map(|row| row.windows(2).map(|w| w[1].ln() - w[0].ln()).collect())
        .collect();
    ReturnPanel::from_returns(
        panel.labels().to_vec(),
        panel.dates()[1..].to_vec(),
        returns,
    )
}

/// Local average of absolute returns over windows of `window` days.
#[derive(Debug, Clone, PartialEq)]
pub struct VolatilitySeries {
    pub label: String,
    pub window: usize,
    pub step: usize,
    /// `(last date in window, v)`.
    pub values: Vec<(NaiveDate, f64)>,
}

impl VolatilitySeries {
    pub fn mean(&self) -> f64 {
        self.values.iter().map(|(_, v)| v).sum::<f64>() / self.values.len() as f64
    }
}

fn window_starts(len: usize, window: usize, step: usize) -> Result<Vec<usize>> {
    if window < 2 {
        return Err(Error::InvalidParameter(format!(
            "volatility window must be at least 2, got {window}"
        )));
    }
    if step == 0 {
        return Err(Error::InvalidParameter(
            "window step must be positive".into(),
        ));
    }
    if window > len {
        return Err(Error::TooShort {
            what: "volatility window",
            needed: window,
            got: len,
        });
    }
    Ok((0..=len - window).step_by(step).collect())
}

/// `v = Σ|R(t)| / (T - 1)` over windows of `window` returns advancing by `step`.
pub fn volatility(
    returns: &ReturnPanel,
    label: &str,
    window: usize,
    step: usize,
) -> Result<VolatilitySeries> {
    let i = returns.label_index(label)?;
    let row = &returns.returns()[i];
    let values = window_starts(row.len(), window, step)?
        .into_iter()
        .map(|s| {
            let sum: f64 = row[s..s + window].iter().map(|r| r.abs()).sum();
            (returns.dates()[s + window - 1], sum / (window - 1) as f64)
        })
        .collect();
    Ok(VolatilitySeries {
        label: label.to_string(),
        window,
        step,
        values,
    })
}

/// Per-window volatility averaged over all indices.
pub fn mean_volatility(
    returns: &ReturnPanel,
    window: usize,
    step: usize,
) -> Result<VolatilitySeries> {
    let per_index = returns
        .labels()
        .iter()
        .map(|l| volatility(returns, l, window, step))
        .collect::<Result<Vec<_>>>()?;
    let n = per_index.len() as f64;
    let values = (0..per_index[0].values.len())
        .map(|k| {
            let date = per_index[0].values[k].0;
            (
                date,
                per_index.iter().map(|s| s.values[k].1).sum::<f64>() / n,
            )
        })
        .collect();
    Ok(VolatilitySeries {
        label: "mean".into(),
        window,
        step,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn day(k: i64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 3, 1).unwrap() + chrono::Duration::days(k)
    }

    fn panel(rows: Vec<Vec<f64>>) -> PricePanel {
        let n = rows[0].len();
        let labels = (0..rows.len()).map(|i| format!("I{i}")).collect();
        let mask = rows.iter().map(|r| vec![false; r.len()]).collect();
        PricePanel::new(labels, (0..n as i64).map(day).collect(), rows, mask).unwrap()
    }

    #[test]
    fn constant_returns_are_degenerate() {
        let p = panel(vec![vec![1.0, E, E * E]]);
        assert!(matches!(to_returns(&p), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn symmetric_returns() {
        let p = panel(vec![vec![1.0, E, 1.0]]);
        let r = to_returns(&p).unwrap();
        assert!((r.returns()[0][0] - 1.0).abs() < 1e-15);
        assert!((r.returns()[0][1] + 1.0).abs() < 1e-15);
        assert!(r.mean()[0].abs() < 1e-15);
        assert!((r.sigma()[0] - 1.0).abs() < 1e-15);
        assert!((r.normalized()[0][0] - 1.0).abs() < 1e-15);
        assert!((r.normalized()[0][1] + 1.0).abs() < 1e-15);
        assert_eq!(r.dates(), &[day(1), day(2)]);
    }

    #[test]
    fn too_few_dates() {
        let p = panel(vec![vec![1.0, 2.0]]);
        assert!(matches!(to_returns(&p), Err(Error::TooShort { .. })));
    }

    fn returns_of(rows: Vec<Vec<f64>>) -> ReturnPanel {
        let len = rows[0].len();
        let labels = (0..rows.len()).map(|i| format!("I{i}")).collect();
        ReturnPanel::from_returns(labels, (0..len as i64).map(day).collect(), rows).unwrap()
    }

    #[test]
    fn constant_magnitude_window() {
        let c = 0.02;
        let row: Vec<f64> = (0..10).map(|t| if t % 2 == 0 { c } else { -c }).collect();
        let r = returns_of(vec![row]);
        let v = volatility(&r, "I0", 5, 5).unwrap();
        assert_eq!(v.values.len(), 2);
        for (_, x) in &v.values {
            assert!((x - c * 5.0 / 4.0).abs() < 1e-15);
        }
        assert_eq!(v.values[0].0, day(4));
    }

    #[test]
    fn window_count_for_disjoint_blocks() {
        assert_eq!(window_starts(3088, 25, 25).unwrap().len(), 123);
        assert_eq!(window_starts(10, 3, 1).unwrap().len(), 8);
        assert!(window_starts(4, 5, 5).is_err());
        assert!(window_starts(4, 1, 1).is_err());
    }

    #[test]
    fn mean_of_two_series() {
        let a: Vec<f64> = (0..8)
            .map(|t| if t % 2 == 0 { 0.01 } else { -0.01 })
            .collect();
        let b: Vec<f64> = (0..8)
            .map(|t| if t % 2 == 0 { 0.03 } else { -0.03 })
            .collect();
        let r = returns_of(vec![a, b]);
        let va = volatility(&r, "I0", 4, 4).unwrap();
        let vb = volatility(&r, "I1", 4, 4).unwrap();
        let m = mean_volatility(&r, 4, 4).unwrap();
        for k in 0..2 {
            assert!((m.values[k].1 - (va.values[k].1 + vb.values[k].1) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn unknown_label() {
        let r = returns_of(vec![vec![0.1, -0.1, 0.2]]);
        assert!(matches!(
            volatility(&r, "nope", 2, 2),
            Err(Error::UnknownLabel(_))
        ));
    }
}
