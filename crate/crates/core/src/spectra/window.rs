use chrono::NaiveDate;

use super::{correlation_columns, eigendecompose};
use crate::error::{Error, Result};
use crate::panel::ReturnPanel;

/// Spectral summary of one correlation window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowTrace {
    pub window_index: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    /// Up to three largest eigenvalues, descending.
    pub largest: Vec<f64>,
    pub smallest: f64,
    /// IPR of the eigenvector of the largest eigenvalue.
    pub ipr_last: f64,
    /// Correlation index `Σ_m X_m`.
    pub ci: f64,
    /// Eigenvector of the largest eigenvalue.
    pub top_vector: Vec<f64>,
    /// `S_m = <|C|>_m`.
    pub mean_abs_corr: Vec<f64>,
    /// `X_m = (u_m)² S_m`.
    pub weighted: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedWindow {
    pub window_index: usize,
    pub start_date: NaiveDate,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlidingSpectra {
    pub window: usize,
    pub step: usize,
    pub traces: Vec<WindowTrace>,
    pub skipped: Vec<SkippedWindow>,
}

/// `CI = Σ_m u_m² S_m` together with the per-index terms.
pub fn correlation_index(top_vector: &[f64], mean_abs_corr: &[f64]) -> (f64, Vec<f64>) {
    let weighted: Vec<f64> = top_vector
        .iter()
        .zip(mean_abs_corr)
        .map(|(u, s)| u * u * s)
        .collect();
    (weighted.iter().sum(), weighted)
}

/// Eigen-dynamics over windows of `window` returns that advance by `step`.
///
/// Windows where some index has zero variance are skipped and reported;
/// every other failure aborts.
pub fn sliding_spectra(
    returns: &ReturnPanel,
    window: usize,
    step: usize,
) -> Result<SlidingSpectra> {
    if window < 2 {
        return Err(Error::InvalidParameter(format!(
            "spectral window must be at least 2, got {window}"
        )));
    }
    if step == 0 {
        return Err(Error::InvalidParameter(
            "window step must be positive".into(),
        ));
    }
    if returns.n_indices() < 2 {
        return Err(Error::InvalidParameter(
            "sliding spectra need at least 2 indices".into(),
        ));
    }
    let len = returns.len();
    if len < window {
        return Err(Error::TooShort {
            what: "sliding spectra",
            needed: window,
            got: len,
        });
    }

    let mut traces = Vec::new();
    let mut skipped = Vec::new();
    for (window_index, start) in (0..=len - window).step_by(step).enumerate() {
        let c = match correlation_columns(returns, start..start + window) {
            Ok(c) => c,
            Err(e @ Error::Degenerate { .. }) => {
                skipped.push(SkippedWindow {
                    window_index,
                    start_date: returns.dates()[start],
                    reason: e.to_string(),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let spectrum = eigendecompose(&c)?;
        let n = spectrum.dim();
        let top_vector = spectrum.eigenvector(n - 1);
        let mean_abs_corr = c.mean_abs_correlation();
        let (ci, weighted) = correlation_index(&top_vector, &mean_abs_corr);
        traces.push(WindowTrace {
            window_index,
            start_date: returns.dates()[start],
            end_date: returns.dates()[start + window - 1],
            largest: spectrum.top(3),
            smallest: spectrum.smallest(),
            ipr_last: spectrum.ipr[n - 1],
            ci,
            top_vector,
            mean_abs_corr,
            weighted,
        });
    }
    Ok(SlidingSpectra {
        window,
        step,
        traces,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_vector_and_constant_strength() {
        let n = 20;
        let u = vec![1.0 / (n as f64).sqrt(); n];
        let (ci, x) = correlation_index(&u, &vec![0.37; n]);
        assert!((ci - 0.37).abs() < 1e-14);
        assert!(x.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn identity_correlation_has_zero_index() {
        let (ci, _) = correlation_index(&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]);
        assert_eq!(ci, 0.0);
    }
}
