use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use indexscope_core::mfdfa::{default_q_grid, DEFAULT_A_STEP, DEFAULT_IAAFT_MAX_ITER};
use indexscope_core::panel::{DateRange, PanelFormat, DEFAULT_CLOSED_FRACTION_MAX};
use indexscope_core::MfdfaConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output: PathBuf,
    /// Allow named periods to overlap.
    pub allow_period_overlap: bool,
    pub input: Option<InputConfig>,
    /// Named half-open date ranges `[start, end)`.
    pub periods: BTreeMap<String, PeriodConfig>,
    pub spectra: SpectraConfig,
    pub network: NetworkConfig,
    pub mfdfa: MfdfaSection,
    pub demo: DemoConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub path: PathBuf,
    #[serde(default = "default_format")]
    pub format: PanelFormat,
    #[serde(default = "default_closed_fraction")]
    pub closed_fraction_max: f64,
    /// Restrict the analysis to these labels, in this order.
    #[serde(default)]
    pub labels: Vec<String>,
}

fn default_format() -> PanelFormat {
    PanelFormat::Wide
}

fn default_closed_fraction() -> f64 {
    DEFAULT_CLOSED_FRACTION_MAX
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodConfig {
    pub start: NaiveDate,
    /// Exclusive.
    pub end: NaiveDate,
}

impl PeriodConfig {
    pub fn range(&self) -> Result<DateRange> {
        Ok(DateRange::new(self.start, self.end)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectraConfig {
    pub window: usize,
    pub step: usize,
    pub bins: usize,
}

impl Default for SpectraConfig {
    fn default() -> Self {
        SpectraConfig {
            window: 25,
            step: 25,
            bins: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub thetas: Vec<f64>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            thetas: (0..10).map(|k| k as f64 / 10.0).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfdfaSection {
    pub q_values: Vec<f64>,
    pub order: usize,
    pub scales: Option<Vec<usize>>,
    pub scale_count: usize,
    pub fit_range: Option<(usize, usize)>,
    pub iaaft_max_iter: usize,
    pub iaaft_tol: f64,
    pub bmfm_n_max: u32,
    pub bmfm_a_step: f64,
    pub bmfm_refine: bool,
}

impl Default for MfdfaSection {
    fn default() -> Self {
        let base = MfdfaConfig::default();
        MfdfaSection {
            q_values: default_q_grid(),
            order: base.order,
            scales: None,
            scale_count: base.scale_count,
            fit_range: None,
            iaaft_max_iter: DEFAULT_IAAFT_MAX_ITER,
            iaaft_tol: 0.0,
            bmfm_n_max: 12,
            bmfm_a_step: DEFAULT_A_STEP,
            bmfm_refine: false,
        }
    }
}

impl MfdfaSection {
    pub fn core_config(&self) -> MfdfaConfig {
        MfdfaConfig {
            q_values: self.q_values.clone(),
            order: self.order,
            scales: self.scales.clone(),
            scale_count: self.scale_count,
            fit_range: self.fit_range,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    pub start: NaiveDate,
    /// Trading days in the generated panel.
    pub days: usize,
    /// Chance that a market is closed on a given day.
    pub closure_rate: f64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            start: NaiveDate::from_ymd_opt(1997, 7, 2).expect("valid date"),
            days: 3089,
            closure_rate: 0.02,
        }
    }
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}

pub fn default_periods() -> BTreeMap<String, PeriodConfig> {
    BTreeMap::from([
        (
            "before".to_string(),
            PeriodConfig {
                start: date(2006, 6, 7),
                end: date(2007, 12, 1),
            },
        ),
        (
            "during".to_string(),
            PeriodConfig {
                start: date(2007, 12, 1),
                end: date(2009, 7, 1),
            },
        ),
    ])
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            output: PathBuf::from("indexscope-out"),
            allow_period_overlap: false,
            input: None,
            periods: default_periods(),
            spectra: SpectraConfig::default(),
            network: NetworkConfig::default(),
            mfdfa: MfdfaSection::default(),
            demo: DemoConfig::default(),
        }
    }
}

/// Name reserved for the whole aligned sample.
pub const FULL_PERIOD: &str = "full";

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; a relative input path is taken relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = RunConfig::from_toml(&text)?;
        if let (Some(input), Some(dir)) = (cfg.input.as_mut(), path.parent()) {
            if input.path.is_relative() {
                input.path = dir.join(&input.path);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.periods.contains_key(FULL_PERIOD) {
            return bad(format!("period name `{FULL_PERIOD}` is reserved"));
        }
        let ranges = self
            .periods
            .iter()
            .map(|(name, p)| {
                p.range()
                    .map(|r| (name, r))
                    .map_err(|e| CliError::Config(format!("period `{name}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if !self.allow_period_overlap {
            for (k, (a, ra)) in ranges.iter().enumerate() {
                for (b, rb) in &ranges[k + 1..] {
                    if ra.overlaps(rb) {
                        return bad(format!(
                            "periods `{a}` and `{b}` overlap (set allow_period_overlap = true)"
                        ));
                    }
                }
            }
        }
        if let Some(input) = &self.input {
            if !(0.0..=1.0).contains(&input.closed_fraction_max) {
                return bad("input.closed_fraction_max must lie in [0, 1]".into());
            }
        }
        if self.spectra.window < 2 || self.spectra.step == 0 || self.spectra.bins == 0 {
            return bad("spectra needs window >= 2, step >= 1 and bins >= 1".into());
        }
        if self.network.thetas.iter().any(|t| !t.is_finite()) {
            return bad("network.thetas must be finite".into());
        }
        let m = &self.mfdfa;
        if !m.q_values.contains(&2.0) {
            return bad("mfdfa.q_values must contain 2".into());
        }
        if !(1..=indexscope_core::mfdfa::MAX_ORDER).contains(&m.order) {
            return bad("mfdfa.order must be 1, 2 or 3".into());
        }
        if m.iaaft_max_iter == 0 || !(m.iaaft_tol >= 0.0) {
            return bad("mfdfa.iaaft_max_iter must be >= 1 and iaaft_tol >= 0".into());
        }
        if !(m.bmfm_a_step > 0.0 && m.bmfm_a_step < 0.5) {
            return bad("mfdfa.bmfm_a_step must lie in (0, 0.5)".into());
        }
        if !(0.0..0.3).contains(&self.demo.closure_rate) || self.demo.days < 3 {
            return bad("demo needs closure_rate in [0, 0.3) and at least 3 days".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical form of the config, ignoring the output
    /// directory.
    pub fn hash(&self) -> Result<String> {
        let mut canonical = self.clone();
        canonical.output = PathBuf::new();
        let json = serde_json::to_vec(&canonical)?;
        Ok(hex::encode(Sha256::digest(&json)))
    }

    /// Period names to run: every configured period plus the full sample,
    /// or just the one selected.
    pub fn selected_periods(&self, only: Option<&str>) -> Result<Vec<(String, Option<DateRange>)>> {
        let mut all = vec![(FULL_PERIOD.to_string(), None)];
        for (name, p) in &self.periods {
            all.push((name.clone(), Some(p.range()?)));
        }
        match only {
            None => Ok(all),
            Some(name) => all
                .into_iter()
                .find(|(n, _)| n == name)
                .map(|p| vec![p])
                .ok_or_else(|| CliError::Config(format!("unknown period `{name}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg = RunConfig::from_toml(
            "seed = 7\n[input]\npath = \"p.csv\"\nformat = \"long\"\n[spectra]\nwindow = 30\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.spectra.window, 30);
        assert_eq!(cfg.spectra.step, 25);
        let input = cfg.input.unwrap();
        assert_eq!(input.format, PanelFormat::Long);
        assert_eq!(input.closed_fraction_max, 0.30);
        assert_eq!(cfg.periods, default_periods());
    }

    #[test]
    fn overlapping_periods_need_opt_in() {
        let text = "[periods.a]\nstart = \"2001-01-01\"\nend = \"2002-01-01\"\n\
                    [periods.b]\nstart = \"2001-06-01\"\nend = \"2003-01-01\"\n";
        assert!(RunConfig::from_toml(text).is_err());
        let allowed = format!("allow_period_overlap = true\n{text}");
        assert!(RunConfig::from_toml(&allowed).is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::from_toml("[mfdfa]\nq_values = [1.0, 3.0]\n").is_err());
        assert!(RunConfig::from_toml("[mfdfa]\norder = 4\n").is_err());
        assert!(RunConfig::from_toml("unknown_key = 1\n").is_err());
        assert!(RunConfig::from_toml(
            "[periods.full]\nstart = \"2001-01-01\"\nend = \"2002-01-01\"\n"
        )
        .is_err());
        assert!(RunConfig::from_toml(
            "[periods.x]\nstart = \"2002-01-01\"\nend = \"2001-01-01\"\n"
        )
        .is_err());
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = RunConfig::default();
        let b = RunConfig {
            output: PathBuf::from("/elsewhere"),
            ..RunConfig::default()
        };
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        let c = RunConfig {
            seed: 1,
            ..RunConfig::default()
        };
        assert_ne!(a.hash().unwrap(), c.hash().unwrap());
    }

    #[test]
    fn period_selection() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.selected_periods(None).unwrap().len(), 3);
        assert_eq!(cfg.selected_periods(Some("during")).unwrap().len(), 1);
        assert!(cfg.selected_periods(Some("nope")).is_err());
    }
}
