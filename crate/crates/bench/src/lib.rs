//! Seeded fixtures shared by the benchmarks.

use chrono::{Days, NaiveDate};
use indexscope_core::mfdfa::{bmfm_generate, BmfmParams};
use indexscope_core::panel::ReturnPanel;
use indexscope_core::spectra::correlation;
use indexscope_core::CorrMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn gaussian(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// `n` series of length `l` loading on one common factor.
pub fn factor_panel(n: usize, l: usize, seed: u64) -> ReturnPanel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let common: Vec<f64> = (0..l).map(|_| rng.sample(StandardNormal)).collect();
    let rows = (0..n)
        .map(|_| {
            let load: f64 = rng.random_range(0.2..0.9);
            common
                .iter()
                .map(|c| load * c + rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let d0 = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
    ReturnPanel::from_returns(
        (0..n).map(|i| format!("I{i}")).collect(),
        (0..l as u64).map(|k| d0 + Days::new(k)).collect(),
        rows,
    )
    .expect("well-formed panel")
}

pub fn factor_correlation(n: usize, l: usize, seed: u64) -> CorrMatrix {
    correlation(&factor_panel(n, l, seed), None).expect("non-degenerate panel")
}

pub fn bmfm(a: f64, n_max: u32) -> Vec<f64> {
    bmfm_generate(&BmfmParams::new(a, n_max).expect("valid parameters")).expect("generated")
}
