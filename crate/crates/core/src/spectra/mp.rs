use std::f64::consts::PI;

use super::Spectrum;
use crate::error::{Error, Result};

/// Marchenko–Pastur law for `N` uncorrelated series of length `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpLaw {
    /// `Q = L / N`, at least 1.
    pub q: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl MpLaw {
    pub fn from_ratio(q: f64) -> Result<Self> {
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "aspect ratio Q = {q} must be finite and at least 1"
            )));
        }
        let r = 1.0 / q.sqrt();
        Ok(MpLaw {
            q,
            lambda_min: (1.0 - r) * (1.0 - r),
            lambda_max: (1.0 + r) * (1.0 + r),
        })
    }

    pub fn contains(&self, lambda: f64) -> bool {
        self.lambda_min <= lambda && lambda <= self.lambda_max
    }

    /// Density at a single point; zero outside the open support.
    pub fn density(&self, lambda: f64) -> f64 {
        if !(lambda > self.lambda_min && lambda < self.lambda_max) {
            return 0.0;
        }
        self.q / (2.0 * PI) * ((self.lambda_max - lambda) * (lambda - self.lambda_min)).sqrt()
            / lambda
    }
}

/// Eigenvalue bounds of a random correlation matrix of `n` series of length `l`.
pub fn mp_bounds(n: usize, l: usize) -> Result<MpLaw> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 series, got {n}"
        )));
    }
    if l < n {
        return Err(Error::InvalidParameter(format!(
            "L = {l} < N = {n} gives Q < 1"
        )));
    }
    MpLaw::from_ratio(l as f64 / n as f64)
}

pub fn mp_density(law: &MpLaw, grid: &[f64]) -> Vec<f64> {
    grid.iter().map(|&x| law.density(x)).collect()
}

/// Empirical eigenvalue histogram set against the Marchenko–Pastur curve.
#[derive(Debug, Clone)]
pub struct MpComparison {
    pub law: MpLaw,
    /// `bins + 1` equal-width edges spanning the pooled eigenvalues.
    pub bin_edges: Vec<f64>,
    /// Histogram density; integrates to one over the edges.
    pub density: Vec<f64>,
    /// `(λ, P(λ))` samples of the theoretical curve.
    pub theory: Vec<(f64, f64)>,
    pub below: usize,
    pub inside: usize,
    pub above: usize,
}

/// Points in the sampled theoretical curve.
const THEORY_POINTS: usize = 512;

impl MpComparison {
    pub fn bin_centers(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    pub fn total(&self) -> usize {
        self.below + self.inside + self.above
    }

    pub fn inside_fraction(&self) -> f64 {
        self.inside as f64 / self.total() as f64
    }

    /// `∫ density`, which is 1 up to rounding.
    pub fn integral(&self) -> f64 {
        self.bin_edges
            .windows(2)
            .zip(&self.density)
            .map(|(w, d)| (w[1] - w[0]) * d)
            .sum()
    }

    /// Largest gap between the histogram and the theoretical density at the
    /// bin centres.
    pub fn sup_deviation(&self) -> f64 {
        self.bin_centers()
            .iter()
            .zip(&self.density)
            .map(|(&x, d)| (d - self.law.density(x)).abs())
            .fold(0.0, f64::max)
    }
}

/// Pools the eigenvalues of `spectra` and compares them with `law`.
pub fn mp_compare(spectra: &[Spectrum], law: &MpLaw, bins: usize) -> Result<MpComparison> {
    if spectra.is_empty() {
        return Err(Error::InvalidParameter("no spectra to compare".into()));
    }
    let values: Vec<f64> = spectra
        .iter()
        .flat_map(|s| s.eigenvalues.iter().copied())
        .collect();
    compare_values(&values, law, bins)
}

pub(crate) fn compare_values(values: &[f64], law: &MpLaw, bins: usize) -> Result<MpComparison> {
    if bins < 1 {
        return Err(Error::InvalidParameter(
            "histogram needs at least one bin".into(),
        ));
    }
    if values.is_empty() {
        return Err(Error::InvalidParameter("no eigenvalues to compare".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("eigenvalues".into()));
    }
    let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        // All eigenvalues coincide: give the single spike a unit-wide bin.
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins).map(|k| lo + k as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = values.len() as f64;
    let density = counts.iter().map(|&c| c as f64 / (total * width)).collect();

    let below = values.iter().filter(|&&v| v < law.lambda_min).count();
    let above = values.iter().filter(|&&v| v > law.lambda_max).count();
    let inside = values.len() - below - above;

    let g_lo = lo.min(law.lambda_min);
    let g_hi = hi.max(law.lambda_max);
    let step = (g_hi - g_lo) / (THEORY_POINTS - 1) as f64;
    let theory = (0..THEORY_POINTS)
        .map(|k| {
            let x = g_lo + k as f64 * step;
            (x, law.density(x))
        })
        .collect();

    Ok(MpComparison {
        law: *law,
        bin_edges,
        density,
        theory,
        below,
        inside,
        above,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_for_twenty_indices_387_days() {
        let law = mp_bounds(20, 387).unwrap();
        assert!((law.q - 19.35).abs() < 1e-12);
        assert_eq!((law.lambda_min * 1000.0).round() / 1000.0, 0.597);
        assert_eq!((law.lambda_max * 1000.0).round() / 1000.0, 1.506);
    }

    #[test]
    fn closed_form_bounds() {
        let one = MpLaw::from_ratio(1.0).unwrap();
        assert_eq!((one.lambda_min, one.lambda_max), (0.0, 4.0));
        let four = MpLaw::from_ratio(4.0).unwrap();
        assert_eq!((four.lambda_min, four.lambda_max), (0.25, 2.25));
        assert!(mp_bounds(20, 19).is_err());
        assert!(mp_bounds(1, 10).is_err());
        assert!(MpLaw::from_ratio(f64::NAN).is_err());
    }

    #[test]
    fn density_vanishes_at_and_beyond_edges() {
        let law = MpLaw::from_ratio(4.0).unwrap();
        let d = mp_density(&law, &[0.0, 0.25, 2.25, 3.0, -1.0, f64::NAN]);
        assert!(d.iter().all(|&x| x == 0.0));
        assert!(law.density(1.0) > 0.0);
        // Q = 1 has λ_min = 0: λ = 0 sits on the edge, no division by zero.
        let one = MpLaw::from_ratio(1.0).unwrap();
        assert_eq!(one.density(0.0), 0.0);
    }

    #[test]
    fn histogram_of_a_single_spike() {
        let law = MpLaw::from_ratio(1000.0).unwrap();
        let cmp = compare_values(&[1.0; 20], &law, 10).unwrap();
        assert_eq!((cmp.below, cmp.inside, cmp.above), (0, 20, 0));
        assert!((cmp.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn counts_split_by_support() {
        let law = MpLaw::from_ratio(4.0).unwrap();
        let cmp = compare_values(&[0.1, 0.25, 1.0, 2.25, 5.0], &law, 3).unwrap();
        assert_eq!((cmp.below, cmp.inside, cmp.above), (1, 3, 1));
        assert!((cmp.integral() - 1.0).abs() < 1e-12);
        assert_eq!(cmp.bin_edges.len(), 4);
        assert!(cmp.theory.iter().all(|&(x, p)| law.contains(x) || p == 0.0));
    }

    #[test]
    fn rejects_zero_bins_and_empty_input() {
        let law = MpLaw::from_ratio(4.0).unwrap();
        assert!(compare_values(&[1.0], &law, 0).is_err());
        assert!(compare_values(&[], &law, 5).is_err());
        assert!(mp_compare(&[], &law, 5).is_err());
    }
}
