use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::{mfdfa, HqCurve, MfdfaConfig};
use crate::error::{Error, Result};

/// Grid spacing of [`default_a_grid`].
pub const DEFAULT_A_STEP: f64 = 0.0125;

/// Binomial multifractal model. `a` and `1 − a` produce time-reversed copies
/// of the same series; any `a ∈ (0, 1)` is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BmfmParams {
    pub a: f64,
    pub n_max: u32,
}

impl BmfmParams {
    pub fn new(a: f64, n_max: u32) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "BMFM a = {a} not in (0, 1)"
            )));
        }
        if !(4..=30).contains(&n_max) {
            return Err(Error::InvalidParameter(format!(
                "BMFM n_max = {n_max} not in 4..=30"
            )));
        }
        Ok(BmfmParams { a, n_max })
    }

    pub fn len(&self) -> usize {
        1 << self.n_max
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Number of ones in the binary expansion of `k`.
pub fn popcount(k: u64) -> u32 {
    k.count_ones()
}

/// `x_k = a^{n(k−1)} (1 − a)^{n_max − n(k−1)}` for `k = 1..2^{n_max}`.
pub fn bmfm_generate(params: &BmfmParams) -> Result<Vec<f64>> {
    let p = BmfmParams::new(params.a, params.n_max)?;
    let n = p.n_max as i32;
    let weights: Vec<f64> = (0..=n)
        .map(|ones| p.a.powi(ones) * (1.0 - p.a).powi(n - ones))
        .collect();
    Ok((0..p.len() as u64)
        .map(|k| weights[popcount(k) as usize])
        .collect())
}

/// `h(q) = 1/q − ln(a^q + (1 − a)^q) / (q ln 2)`, continued to its limit
/// at `q = 0`.
pub fn analytic_hq(a: f64, q: f64) -> f64 {
    if q == 0.0 {
        return -(a.ln() + (1.0 - a).ln()) / (2.0 * LN_2);
    }
    1.0 / q - (a.powf(q) + (1.0 - a).powf(q)).ln() / (q * LN_2)
}

pub fn analytic_delta_h(a: f64, q_min: f64, q_max: f64) -> f64 {
    analytic_hq(a, q_min) - analytic_hq(a, q_max)
}

/// `{k · step} ∩ (0, 1)` without `0.5`.
pub fn default_a_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "a grid step {step} not in (0, 0.5)"
        )));
    }
    Ok((1..)
        .map(|k| k as f64 * step)
        .take_while(|&a| a < 1.0 - 1e-12)
        .filter(|a| (a - 0.5).abs() > 1e-12)
        .collect())
}

/// MF-DFA curves of generated BMFM series, one per grid value of `a`.
#[derive(Debug, Clone)]
pub struct BmfmLibrary {
    pub n_max: u32,
    pub config: MfdfaConfig,
    pub curves: Vec<(f64, HqCurve)>,
}

impl BmfmLibrary {
    pub fn build(a_grid: &[f64], n_max: u32, config: &MfdfaConfig) -> Result<Self> {
        if a_grid.is_empty() {
            return Err(Error::InvalidParameter("empty a grid".into()));
        }
        let curves = a_grid
            .iter()
            .map(|&a| Ok((a, curve_for(a, n_max, config)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(BmfmLibrary {
            n_max,
            config: config.clone(),
            curves,
        })
    }
}

fn curve_for(a: f64, n_max: u32, config: &MfdfaConfig) -> Result<HqCurve> {
    let x = bmfm_generate(&BmfmParams::new(a, n_max)?)?;
    Ok(mfdfa(&x, config)?.curve)
}

fn rms_distance(target: &HqCurve, other: &HqCurve, metric: FitMetric) -> Result<f64> {
    if target.q_values != other.q_values {
        return Err(Error::InvalidParameter(
            "target and model h(q) use different q grids".into(),
        ));
    }
    let offset = match metric {
        FitMetric::Level => 0.0,
        FitMetric::Shape => target.hurst - other.hurst,
    };
    let sum: f64 = target
        .h
        .iter()
        .zip(&other.h)
        .map(|(a, b)| (a - b - offset).powi(2))
        .sum();
    Ok((sum / target.h.len() as f64).sqrt())
}

/// What the BMFM fit compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitMetric {
    /// RMS gap between the two h(q) curves.
    #[default]
    Level,
    /// RMS gap between `h(q) − h(2)` curves, so only the spread in q counts.
    Shape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BmfmFit {
    pub a_best: f64,
    pub distance: f64,
    /// `1 − a_best` and its distance to the target. The mirror series is the
    /// time reverse, which MF-DFA scores close to but not exactly like the
    /// original.
    pub mirror_a: f64,
    pub mirror_distance: f64,
    /// The mirror distance ties the best one within the tie tolerance.
    pub mirror_tied: bool,
    /// Every grid value within the tie tolerance of the best distance.
    pub ties: Vec<(f64, f64)>,
    pub refined: bool,
}

/// Distances closer than this (plus a relative part) count as ties.
const TIE_ABS: f64 = 1e-9;
const TIE_REL: f64 = 1e-6;
const GOLDEN_ITERATIONS: usize = 24;

/// Grid value of `a` whose BMFM curve is closest in RMS to `target`, with
/// optional golden-section refinement between the neighbouring grid values.
///
/// The distance of the mirror `1 − a_best` is always reported; among tied
/// grid values the fit prefers `a > 0.5`.
pub fn bmfm_fit(target: &HqCurve, library: &BmfmLibrary, refine: bool) -> Result<BmfmFit> {
    bmfm_fit_with(target, library, refine, FitMetric::Level)
}

/// [`bmfm_fit`] under a chosen distance.
pub fn bmfm_fit_with(
    target: &HqCurve,
    library: &BmfmLibrary,
    refine: bool,
    metric: FitMetric,
) -> Result<BmfmFit> {
    if library.curves.is_empty() {
        return Err(Error::InvalidParameter("empty BMFM library".into()));
    }
    let scored = library
        .curves
        .iter()
        .map(|(a, c)| Ok((*a, rms_distance(target, c, metric)?)))
        .collect::<Result<Vec<_>>>()?;
    let best = scored.iter().map(|&(_, d)| d).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::NonFinite("BMFM fit distance".into()));
    }
    let tol = TIE_ABS + TIE_REL * best;
    let ties: Vec<(f64, f64)> = scored
        .iter()
        .copied()
        .filter(|&(_, d)| d <= best + tol)
        .collect();
    let pick = |cands: &[(f64, f64)]| {
        cands
            .iter()
            .copied()
            .filter(|&(a, _)| a > 0.5)
            .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.total_cmp(&y.0)))
            .or_else(|| cands.iter().copied().min_by(|x, y| x.1.total_cmp(&y.1)))
            .expect("ties contain the best grid value")
    };
    let (mut a_best, mut distance) = pick(&ties);

    let mut refined = false;
    if refine && library.curves.len() > 1 {
        let mut grid: Vec<f64> = library.curves.iter().map(|(a, _)| *a).collect();
        grid.sort_by(f64::total_cmp);
        let pos = grid.iter().position(|&a| a == a_best).unwrap_or(0);
        let lo = if pos > 0 { grid[pos - 1] } else { a_best };
        let hi = if pos + 1 < grid.len() {
            grid[pos + 1]
        } else {
            a_best
        };
        // Keep the bracket on one side of 0.5, where the model degenerates.
        let (lo, hi) = if a_best > 0.5 {
            (lo.max(0.5 + 1e-6), hi)
        } else {
            (lo, hi.min(0.5 - 1e-6))
        };
        if hi > lo {
            let eval = |a: f64| -> Result<f64> {
                rms_distance(
                    target,
                    &curve_for(a, library.n_max, &library.config)?,
                    metric,
                )
            };
            let (a, d) = golden_section(lo, hi, eval)?;
            if d < distance {
                a_best = a;
                distance = d;
                refined = true;
            }
        }
    }
    let mirror_a = 1.0 - a_best;
    let mirror_distance = match library
        .curves
        .iter()
        .find(|(a, _)| (a - mirror_a).abs() < 1e-9)
    {
        Some((_, c)) => rms_distance(target, c, metric)?,
        None => rms_distance(
            target,
            &curve_for(mirror_a, library.n_max, &library.config)?,
            metric,
        )?,
    };
    Ok(BmfmFit {
        a_best,
        distance,
        mirror_a,
        mirror_distance,
        mirror_tied: mirror_distance <= distance + TIE_ABS + TIE_REL * distance,
        ties,
        refined,
    })
}

fn golden_section(
    mut lo: f64,
    mut hi: f64,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn popcount_of_nineteen() {
        assert_eq!(popcount(19), 3);
        assert_eq!(popcount(0), 0);
    }

    #[test]
    fn half_gives_uniform_series() {
        let x = bmfm_generate(&BmfmParams::new(0.5, 8).unwrap()).unwrap();
        assert_eq!(x.len(), 256);
        assert!(x.iter().all(|&v| v == 2f64.powi(-8)));
    }

    #[test]
    fn mirror_parameter_reverses_series() {
        let a = bmfm_generate(&BmfmParams::new(0.7, 10).unwrap()).unwrap();
        let mut b = bmfm_generate(&BmfmParams::new(0.3, 10).unwrap()).unwrap();
        b.reverse();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-13 * x);
        }
    }

    #[test]
    fn analytic_exponents() {
        assert!((analytic_hq(0.75, 2.0) - 0.8390).abs() < 1e-3);
        assert_eq!(
            analytic_hq(0.5, 3.0),
            1.0 / 3.0 - (2.0 * 0.125f64).ln() / (3.0 * LN_2)
        );
        assert!((analytic_hq(0.5, 4.0) - 1.0).abs() < 1e-12);
        let near = analytic_hq(0.7, 1e-6);
        assert!((near - analytic_hq(0.7, 0.0)).abs() < 1e-5);
        assert!((analytic_hq(0.6, 1.0) - 1.0).abs() < 1e-12);
        assert!(analytic_delta_h(0.75, -10.0, 10.0) > 1.3);
    }

    #[test]
    fn grid_excludes_half_and_endpoints() {
        let g = default_a_grid(DEFAULT_A_STEP).unwrap();
        assert_eq!(g.len(), 78);
        assert!(g
            .iter()
            .all(|&a| a > 0.0 && a < 1.0 && (a - 0.5).abs() > 1e-9));
        assert!(default_a_grid(0.0).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(BmfmParams::new(0.0, 8).is_err());
        assert!(BmfmParams::new(1.0, 8).is_err());
        assert!(BmfmParams::new(0.7, 3).is_err());
        assert!(BmfmParams::new(0.7, 31).is_err());
    }
}
