//! Synthetic 20-index panel with a planted regional block structure.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use indexscope_core::mfdfa::{bmfm_generate, BmfmParams};
use indexscope_core::RawSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::DemoConfig;
use crate::error::Result;

/// `(region, number of indices)`.
pub const REGIONS: [(&str, usize); 4] = [("AM", 4), ("EU", 5), ("AP", 8), ("ME", 3)];

/// Loading on the factor shared by every market.
const GLOBAL_LOADING: f64 = 0.35;
/// Loading on the factor of the market's own region.
const REGION_LOADING: f64 = 0.6;
const DAILY_SIGMA: f64 = 0.012;
const BMFM_LEVELS: u32 = 12;

/// Indices whose volatility follows a binomial cascade, with its `a`.
const MODULATED: [(&str, f64); 4] = [("AP07", 0.6), ("AP08", 0.7), ("ME02", 0.65), ("ME03", 0.6)];

#[derive(Debug, Clone)]
pub struct DemoIndex {
    pub label: String,
    pub region: &'static str,
    /// Cascade parameter when the volatility is modulated.
    pub bmfm_a: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DemoPanel {
    pub indices: Vec<DemoIndex>,
    pub series: Vec<RawSeries>,
}

impl DemoPanel {
    pub fn labels(&self) -> Vec<String> {
        self.indices.iter().map(|i| i.label.clone()).collect()
    }

    pub fn region_of(&self, label: &str) -> Option<&'static str> {
        self.indices
            .iter()
            .find(|i| i.label == label)
            .map(|i| i.region)
    }
}

pub fn demo_indices() -> Vec<DemoIndex> {
    REGIONS
        .iter()
        .flat_map(|&(region, count)| {
            (1..=count).map(move |k| {
                let label = format!("{region}{k:02}");
                let bmfm_a = MODULATED.iter().find(|(l, _)| *l == label).map(|&(_, a)| a);
                DemoIndex {
                    label,
                    region,
                    bmfm_a,
                }
            })
        })
        .collect()
}

/// Monday to Friday trading days from `start`.
pub fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

/// Volatility multiplier `sqrt(x_t / mean x)` from a cascade of `2^12`
/// cells, rotated by `shift` and cycled to `days` values.
fn cascade_scale(a: f64, shift: usize, days: usize) -> Result<Vec<f64>> {
    let x = bmfm_generate(&BmfmParams::new(a, BMFM_LEVELS)?)?;
    let cells: Vec<f64> = (0..days).map(|t| x[(t + shift) % x.len()]).collect();
    let mean = cells.iter().sum::<f64>() / days as f64;
    Ok(cells.iter().map(|c| (c / mean).sqrt()).collect())
}

/// Daily log-return `σ_i(t) (β_g G + β_r F_region + β_e ε_i)`; a market is
/// closed on a day with probability `closure_rate`, except on the first day.
pub fn generate(config: &DemoConfig, seed: u64) -> Result<DemoPanel> {
    let indices = demo_indices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dates = business_days(config.start, config.days);
    let idio = (1.0 - GLOBAL_LOADING.powi(2) - REGION_LOADING.powi(2)).sqrt();

    let mut scales = Vec::with_capacity(indices.len());
    for idx in &indices {
        scales.push(match idx.bmfm_a {
            Some(a) => Some(cascade_scale(
                a,
                rng.random_range(0..1usize << BMFM_LEVELS),
                config.days,
            )?),
            None => None,
        });
    }
    let base: Vec<f64> = indices
        .iter()
        .map(|_| DAILY_SIGMA * rng.random_range(0.7..1.3))
        .collect();
    let mut log_price: Vec<f64> = indices
        .iter()
        .map(|_| (rng.random_range(500.0..15000.0f64)).ln())
        .collect();
    let mut obs: Vec<Vec<(NaiveDate, f64)>> = vec![Vec::with_capacity(config.days); indices.len()];

    for (t, &date) in dates.iter().enumerate() {
        let global: f64 = rng.sample(StandardNormal);
        let regional: Vec<f64> = REGIONS.iter().map(|_| rng.sample(StandardNormal)).collect();
        for (i, idx) in indices.iter().enumerate() {
            let r = REGIONS
                .iter()
                .position(|(name, _)| *name == idx.region)
                .expect("known region");
            let eps: f64 = rng.sample(StandardNormal);
            let closed = rng.random_bool(config.closure_rate);
            if t > 0 {
                let sigma = base[i] * scales[i].as_ref().map_or(1.0, |s| s[t]);
                log_price[i] +=
                    sigma * (GLOBAL_LOADING * global + REGION_LOADING * regional[r] + idio * eps);
            }
            if t == 0 || !closed {
                obs[i].push((date, log_price[i].exp()));
            }
        }
    }

    let series = indices
        .iter()
        .zip(obs)
        .map(|(idx, o)| RawSeries::new(idx.label.clone(), o))
        .collect::<indexscope_core::Result<Vec<_>>>()?;
    Ok(DemoPanel { indices, series })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_indices_in_four_regions() {
        let idx = demo_indices();
        assert_eq!(idx.len(), 20);
        assert_eq!(
            idx.iter().filter(|i| i.bmfm_a.is_some()).count(),
            MODULATED.len()
        );
        assert_eq!(idx[0].label, "AM01");
        assert_eq!(idx[19].label, "ME03");
    }

    #[test]
    fn business_days_skip_weekends() {
        let d = business_days(NaiveDate::from_ymd_opt(1997, 7, 2).unwrap(), 5);
        let days: Vec<u32> = d.iter().map(|d| d.day()).collect();
        assert_eq!(days, [2, 3, 4, 7, 8]);
    }

    #[test]
    fn generation_is_seeded() {
        let cfg = DemoConfig {
            days: 200,
            ..DemoConfig::default()
        };
        let a = generate(&cfg, 3).unwrap();
        let b = generate(&cfg, 3).unwrap();
        let c = generate(&cfg, 4).unwrap();
        assert_eq!(a.series, b.series);
        assert_ne!(a.series, c.series);
        assert!(a.series.iter().all(|s| s.observations[0].0 == cfg.start));
        let total: usize = a.series.iter().map(|s| s.len()).sum();
        let closed = 20 * 200 - total;
        assert!(closed > 0 && closed < 20 * 200 / 10);
    }
}
