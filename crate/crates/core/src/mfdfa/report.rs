use super::{iaaft, mfdfa, shuffle, HqCurve, MfdfaConfig, SurrogateSpec};
use crate::error::{Error, Result};

pub const MIN_REPORT_LENGTH: usize = 256;

/// MF-DFA of a series next to its shuffled and IAAFT baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct MfReport {
    pub original: HqCurve,
    pub shuffled: HqCurve,
    pub surrogate: HqCurve,
    pub iaaft_iterations: usize,
    pub iaaft_converged: bool,
}

/// Runs MF-DFA three times on one q grid and scale set. `spec.seed` drives
/// the shuffle; the IAAFT start uses the next seed.
pub fn mf_report(g: &[f64], config: &MfdfaConfig, spec: &SurrogateSpec) -> Result<MfReport> {
    if g.len() < MIN_REPORT_LENGTH {
        return Err(Error::TooShort {
            what: "multifractal report",
            needed: MIN_REPORT_LENGTH,
            got: g.len(),
        });
    }
    let config = MfdfaConfig {
        scales: Some(config.scales_for(g.len())?),
        ..config.clone()
    };
    let original = mfdfa(g, &config)?.curve;
    let shuffled = mfdfa(&shuffle(g, spec.seed), &config)?.curve;
    let sur = iaaft(
        g,
        &SurrogateSpec {
            seed: spec.seed.wrapping_add(1),
            ..*spec
        },
    )?;
    let surrogate = mfdfa(&sur.series, &config)?.curve;
    Ok(MfReport {
        original,
        shuffled,
        surrogate,
        iaaft_iterations: sur.iterations,
        iaaft_converged: sur.converged,
    })
}
