use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generator behind every seeded operation, recorded in run metadata.
pub const RNG_IDENTITY: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

pub const DEFAULT_IAAFT_MAX_ITER: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurrogateKind {
    Shuffle,
    Iaaft,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSpec {
    pub kind: SurrogateKind,
    pub seed: u64,
    pub iaaft_max_iter: usize,
    /// Stop early once the relative spectral mismatch improves by less than
    /// this between iterations; 0 disables the check.
    pub iaaft_tol: f64,
}

impl SurrogateSpec {
    pub fn shuffle(seed: u64) -> Self {
        SurrogateSpec {
            kind: SurrogateKind::Shuffle,
            seed,
            iaaft_max_iter: DEFAULT_IAAFT_MAX_ITER,
            iaaft_tol: 0.0,
        }
    }

    pub fn iaaft(seed: u64) -> Self {
        SurrogateSpec {
            kind: SurrogateKind::Iaaft,
            ..SurrogateSpec::shuffle(seed)
        }
    }
}

/// Seeded Fisher–Yates permutation.
pub fn shuffle(g: &[f64], seed: u64) -> Vec<f64> {
    let mut out = g.to_vec();
    out.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct IaaftOutput {
    pub series: Vec<f64>,
    pub iterations: usize,
    /// The rank order reached a fixed point (or the tolerance was met).
    pub converged: bool,
    /// Relative RMS gap between the output and target amplitude spectra.
    pub spectral_error: f64,
}

/// Indices that sort `x` ascending, ties kept in position order.
fn rank_order(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    idx
}

struct Spectra {
    forward: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inverse: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl Spectra {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Spectra {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn transform(&self, x: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }
}

fn spectral_error(spectra: &Spectra, x: &[f64], target: &[f64]) -> f64 {
    let amp = spectra.transform(x);
    let num: f64 = amp
        .iter()
        .zip(target)
        .map(|(c, t)| (c.norm() - t).powi(2))
        .sum();
    let den: f64 = target.iter().map(|t| t * t).sum();
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// Iterated amplitude-adjusted Fourier transform surrogate.
///
/// Starts from a seeded shuffle, then alternates amplitude-spectrum
/// replacement with rank remapping onto the original values until the rank
/// order stops changing. The output is always a permutation of `g`. Without
/// convergence the iterate with the smallest spectral mismatch is returned.
pub fn iaaft(g: &[f64], spec: &SurrogateSpec) -> Result<IaaftOutput> {
    let n = g.len();
    if n < 32 {
        return Err(Error::TooShort {
            what: "IAAFT surrogate",
            needed: 32,
            got: n,
        });
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("series".into()));
    }
    if spec.iaaft_max_iter == 0 {
        return Err(Error::InvalidParameter(
            "IAAFT needs at least one iteration".into(),
        ));
    }
    if g.iter().all(|&v| v == g[0]) {
        return Ok(IaaftOutput {
            series: g.to_vec(),
            iterations: 0,
            converged: true,
            spectral_error: 0.0,
        });
    }

    let mut sorted = g.to_vec();
    sorted.sort_by(f64::total_cmp);
    let spectra = Spectra::new(n);
    let target: Vec<f64> = spectra.transform(g).iter().map(|c| c.norm()).collect();

    let mut current = shuffle(g, spec.seed);
    let mut ranks = rank_order(&current);
    let mut best = (f64::INFINITY, current.clone());
    let mut prev_err = f64::INFINITY;
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for iter in 1..=spec.iaaft_max_iter {
        for (b, &v) in buf.iter_mut().zip(&current) {
            *b = Complex::new(v, 0.0);
        }
        spectra.forward.process(&mut buf);
        for (c, &a) in buf.iter_mut().zip(&target) {
            let norm = c.norm();
            *c = if norm > 0.0 {
                *c * (a / norm)
            } else {
                Complex::new(a, 0.0)
            };
        }
        spectra.inverse.process(&mut buf);
        let shaped: Vec<f64> = buf.iter().map(|c| c.re / n as f64).collect();

        let next_ranks = rank_order(&shaped);
        for (r, &i) in next_ranks.iter().enumerate() {
            current[i] = sorted[r];
        }
        let err = spectral_error(&spectra, &current, &target);
        if err < best.0 {
            best = (err, current.clone());
        }
        let fixed = next_ranks == ranks;
        let stalled = spec.iaaft_tol > 0.0 && (prev_err - err).abs() <= spec.iaaft_tol * err;
        if fixed || stalled {
            return Ok(IaaftOutput {
                series: current,
                iterations: iter,
                converged: true,
                spectral_error: err,
            });
        }
        ranks = next_ranks;
        prev_err = err;
    }
    log::warn!(
        "IAAFT rank order did not settle within {} iterations",
        spec.iaaft_max_iter
    );
    Ok(IaaftOutput {
        series: best.1,
        iterations: spec.iaaft_max_iter,
        converged: false,
        spectral_error: best.0,
    })
}

/// Surrogate series of the kind named in `spec`.
pub fn surrogate(g: &[f64], spec: &SurrogateSpec) -> Result<Vec<f64>> {
    match spec.kind {
        SurrogateKind::Shuffle => Ok(shuffle(g, spec.seed)),
        SurrogateKind::Iaaft => iaaft(g, spec).map(|o| o.series),
    }
}
