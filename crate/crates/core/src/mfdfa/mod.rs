//! Multifractal detrended fluctuation analysis, surrogate baselines and the
//! binomial multifractal model.

mod bmfm;
mod fluct;
mod report;
mod surrogate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bmfm::{
    analytic_delta_h, analytic_hq, bmfm_fit, bmfm_fit_with, bmfm_generate, default_a_grid,
    popcount, BmfmFit, BmfmLibrary, BmfmParams, FitMetric, DEFAULT_A_STEP,
};
pub use fluct::{
    fit_hq, fluctuation, profile, segment_variances, FluctuationTable, HqCurve, MAX_ORDER,
    UNRELIABLE_FRACTION,
};
pub use report::{mf_report, MfReport, MIN_REPORT_LENGTH};
pub use surrogate::{
    iaaft, shuffle, surrogate, IaaftOutput, SurrogateKind, SurrogateSpec, DEFAULT_IAAFT_MAX_ITER,
    RNG_IDENTITY,
};

/// `q ∈ {−10, −9.5, …, 9.5, 10} \ {0}`.
pub fn default_q_grid() -> Vec<f64> {
    (-20..=20)
        .filter(|&k| k != 0)
        .map(|k| k as f64 * 0.5)
        .collect()
}

/// Smallest scale used by the automatic scale set, whatever the order.
pub const MIN_AUTO_SCALE: usize = 16;
pub const DEFAULT_SCALE_COUNT: usize = 20;

/// About `count` log-spaced integer scales in `[max(order + 2, 16), n / 4]`.
pub fn log_scales(n: usize, order: usize, count: usize) -> Result<Vec<usize>> {
    let lo = (order + 2).max(MIN_AUTO_SCALE);
    let hi = n / 4;
    if hi < lo {
        return Err(Error::TooShort {
            what: "MF-DFA series",
            needed: 4 * lo,
            got: n,
        });
    }
    if count < 2 || lo == hi {
        return Ok(vec![lo]);
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut scales: Vec<usize> = (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp().round() as usize)
        .map(|s| s.clamp(lo, hi))
        .collect();
    scales.dedup();
    Ok(scales)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfdfaConfig {
    pub q_values: Vec<f64>,
    /// Detrending polynomial degree.
    pub order: usize,
    /// Explicit scales; the automatic log-spaced set when `None`.
    pub scales: Option<Vec<usize>>,
    pub scale_count: usize,
    /// Inclusive scale range for the slope fit.
    pub fit_range: Option<(usize, usize)>,
}

impl Default for MfdfaConfig {
    fn default() -> Self {
        MfdfaConfig {
            q_values: default_q_grid(),
            order: 1,
            scales: None,
            scale_count: DEFAULT_SCALE_COUNT,
            fit_range: None,
        }
    }
}

impl MfdfaConfig {
    pub fn scales_for(&self, n: usize) -> Result<Vec<usize>> {
        match &self.scales {
            Some(s) if s.is_empty() => Err(Error::InvalidParameter("empty scale list".into())),
            Some(s) => {
                let mut s = s.clone();
                s.sort_unstable();
                s.dedup();
                Ok(s)
            }
            None => log_scales(n, self.order, self.scale_count),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfdfaResult {
    pub table: FluctuationTable,
    pub curve: HqCurve,
}

/// Full MF-DFA of one series.
pub fn mfdfa(g: &[f64], config: &MfdfaConfig) -> Result<MfdfaResult> {
    let y = profile(g)?;
    let scales = config.scales_for(g.len())?;
    let variances = scales
        .iter()
        .map(|&s| segment_variances(&y, s, config.order))
        .collect::<Result<Vec<_>>>()?;
    let table = fluctuation(&scales, &variances, &config.q_values)?;
    if !table.is_monotone_in_q(1e-10) {
        log::warn!("F_q(s) is not monotone in q; check the input for degenerate segments");
    }
    let curve = fit_hq(&table, config.fit_range)?;
    Ok(MfdfaResult { table, curve })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let q = default_q_grid();
        assert_eq!(q.len(), 40);
        assert_eq!((q[0], q[39]), (-10.0, 10.0));
        assert!(!q.contains(&0.0));
        assert!(q.contains(&2.0));
    }

    #[test]
    fn scale_set_bounds() {
        let s = log_scales(4096, 1, 20).unwrap();
        assert_eq!((s[0], *s.last().unwrap()), (16, 1024));
        assert!(s.len() >= 18 && s.windows(2).all(|w| w[0] < w[1]));
        assert!(log_scales(60, 1, 20).is_err());
        assert_eq!(log_scales(64, 1, 20).unwrap(), vec![16]);
    }

    #[test]
    fn config_round_trips_through_serde() {
        let c = MfdfaConfig::default();
        assert_eq!(
            c.scales_for(4096).unwrap(),
            log_scales(4096, 1, 20).unwrap()
        );
        let explicit = MfdfaConfig {
            scales: Some(vec![64, 16, 32, 16]),
            ..MfdfaConfig::default()
        };
        assert_eq!(explicit.scales_for(4096).unwrap(), vec![16, 32, 64]);
    }
}
