use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::StudyOptions;
use crate::forecast::{ForecastSpec, MaternKernel, SiteForecast};
use crate::grid::{GridCase, DEFAULT_SEGMENTS};
use crate::sed::DispatchOptions;
use crate::wind::{PowerCurve, SyntheticWind, HOURS};

pub const SCHEMA: &str = r#"# sedkit experiment configuration (TOML). Paths are relative to this file.

seed = 1                      # u64; --seed overrides
out = "out"                   # output directory; --out overrides

[case]
path = "cases/three_bus.case" # dispatch case file
segments = 3                  # cost linearisation segments per unit

[wind]                        # input of `sedkit kl`
truncation = 6                # modes reported as kept
sites = [ { label = "wy_a", path = "wind/wy_a.csv" } ]   # measured CSVs

[wind.synthetic]              # instead of measured files; also used by synth-wind
days = 365
start = "2004-01-01"
intraday_noise = 0.05         # relative 10-minute fluctuation
[[wind.synthetic.sites]]
label = "wy_a"
level = 8.0                   # mean speed, m/s
amplitude = 0.2               # relative diurnal swing
length_scale = 11.15          # Matern l_t, hours
smoothness = 0.57             # Matern nu
sigma = 0.35                  # log-wind standard deviation
nameplate = 100.0             # MW

[forecast]
sigma_p = 0.35                # relative hourly power uncertainty
shared = [ [["wy_a", 1], ["wy_b", 1]] ]   # (site, 1-based mode) groups sharing one germ
[[forecast.sites]]
label = "wy_a"                # must match a RENEWABLE label in the case
mean_wind = [8.0, ...]        # 24 speeds, or:
diurnal = { level = 8.0, amplitude = 0.2 }
length_scale = 11.15
smoothness = 0.57
modes = 6
sigma_w = 0.2                 # optional: skip the sigma_p conversion
curve = "default"             # optional: "default" or a curve CSV (speed_mps,power_fraction)

[study]
levels = [1, 2, 3]            # sparse-grid levels
order = 2                     # chaos order (capped at level - 1)
mc_sizes = [10, 100, 1000, 10000]
realizations = 10
cv_samples = 0                # cross-validation test germs; 0 disables
"#;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub case: Option<CaseConfig>,
    pub wind: Option<WindConfig>,
    pub forecast: Option<ForecastConfig>,
    pub study: Option<StudyConfig>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_seed() -> u64 {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub path: PathBuf,
    #[serde(default = "default_segments")]
    pub segments: usize,
}

fn default_segments() -> usize {
    DEFAULT_SEGMENTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindConfig {
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default)]
    pub sites: Vec<WindFile>,
    pub synthetic: Option<SyntheticConfig>,
}

fn default_truncation() -> usize {
    6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindFile {
    pub label: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub days: usize,
    #[serde(default = "default_start")]
    pub start: NaiveDate,
    #[serde(default = "default_noise")]
    pub intraday_noise: f64,
    pub sites: Vec<SyntheticSite>,
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2004, 1, 1).expect("valid date")
}

fn default_noise() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSite {
    pub label: String,
    pub level: f64,
    #[serde(default)]
    pub amplitude: f64,
    pub length_scale: f64,
    pub smoothness: f64,
    pub sigma: f64,
    #[serde(default = "default_nameplate")]
    pub nameplate: f64,
}

fn default_nameplate() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastConfig {
    pub sigma_p: f64,
    #[serde(default)]
    pub shared: Vec<Vec<(String, usize)>>,
    pub sites: Vec<ForecastSiteConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diurnal {
    pub level: f64,
    #[serde(default)]
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastSiteConfig {
    pub label: String,
    pub mean_wind: Option<Vec<f64>>,
    pub diurnal: Option<Diurnal>,
    pub length_scale: f64,
    pub smoothness: f64,
    pub modes: usize,
    pub sigma_w: Option<f64>,
    pub curve: Option<String>,
    /// Needed only without a case; otherwise taken from the case.
    pub nameplate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub levels: Vec<usize>,
    #[serde(default = "default_order")]
    pub order: usize,
    pub mc_sizes: Vec<usize>,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default)]
    pub cv_samples: usize,
}

fn default_order() -> usize {
    1
}

fn default_realizations() -> usize {
    10
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base).map_err(|e| match e {
            Error::Config(m) => Error::config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Fails with a config error when a referenced path does not exist.
    pub fn existing(&self, p: &Path, what: &str) -> Result<PathBuf> {
        let full = self.resolve(p);
        if !full.exists() {
            return Err(Error::config(format!("{what} {} does not exist", full.display())));
        }
        Ok(full)
    }

    pub fn dispatch_options(&self) -> DispatchOptions {
        DispatchOptions {
            segments: self.case.as_ref().map_or(DEFAULT_SEGMENTS, |c| c.segments),
            ..DispatchOptions::default()
        }
    }

    pub fn load_case(&self) -> Result<GridCase> {
        let c = self
            .case
            .as_ref()
            .ok_or_else(|| Error::config("missing [case] section"))?;
        if c.segments == 0 {
            return Err(Error::config("case.segments must be at least 1"));
        }
        crate::grid::read_case(self.existing(&c.path, "case file")?)
    }

    pub fn load_curve(&self, name: &str) -> Result<PowerCurve> {
        if name == "default" {
            Ok(PowerCurve::default_turbine())
        } else {
            PowerCurve::read_csv(self.existing(Path::new(name), "power curve")?)
        }
    }

    /// Forecast spec with nameplates and curves filled from `case` when given.
    pub fn forecast_spec(&self, case: Option<&GridCase>) -> Result<ForecastSpec> {
        let f = self
            .forecast
            .as_ref()
            .ok_or_else(|| Error::config("missing [forecast] section"))?;
        let mut sites = Vec::with_capacity(f.sites.len());
        for s in &f.sites {
            let mean_wind = match (&s.mean_wind, &s.diurnal) {
                (Some(w), None) => w.clone(),
                (None, Some(d)) => SyntheticWind::diurnal(d.level, d.amplitude),
                _ => {
                    return Err(Error::config(format!(
                        "forecast site {}: give exactly one of mean_wind or diurnal",
                        s.label
                    )))
                }
            };
            if mean_wind.len() != HOURS {
                return Err(Error::config(format!(
                    "forecast site {}: mean_wind needs {HOURS} values",
                    s.label
                )));
            }
            let renewable = case.and_then(|c| c.renewables.iter().find(|r| r.label == s.label));
            if case.is_some() && renewable.is_none() {
                return Err(Error::config(format!(
                    "forecast site {} is not a renewable in the case",
                    s.label
                )));
            }
            let nameplate = match (renewable, s.nameplate) {
                (Some(r), _) => r.nameplate,
                (None, Some(n)) => n,
                (None, None) => return Err(Error::config(format!("forecast site {}: nameplate needed", s.label))),
            };
            let curve_name = s
                .curve
                .clone()
                .or_else(|| renewable.map(|r| r.curve.clone()))
                .unwrap_or_else(|| "default".into());
            sites.push(SiteForecast {
                label: s.label.clone(),
                mean_wind,
                kernel: MaternKernel::normalized(s.length_scale, s.smoothness)
                    .map_err(|e| Error::config(format!("forecast site {}: {e}", s.label)))?,
                modes: s.modes,
                nameplate,
                curve: self.load_curve(&curve_name)?,
                sigma_w: s.sigma_w,
            });
        }
        let mut shared = Vec::with_capacity(f.shared.len());
        for group in &f.shared {
            let mut g = Vec::with_capacity(group.len());
            for (label, mode) in group {
                let site = f
                    .sites
                    .iter()
                    .position(|s| &s.label == label)
                    .ok_or_else(|| Error::config(format!("shared group names unknown site {label}")))?;
                if *mode == 0 {
                    return Err(Error::config("shared modes are 1-based"));
                }
                g.push((site, mode - 1));
            }
            shared.push(g);
        }
        let spec = ForecastSpec {
            sites,
            sigma_p: f.sigma_p,
            shared,
        };
        spec.validate().map_err(|e| Error::config(e.to_string()))?;
        Ok(spec)
    }

    pub fn study_options(&self) -> Result<(StudyOptions, usize)> {
        let s = self
            .study
            .as_ref()
            .ok_or_else(|| Error::config("missing [study] section"))?;
        Ok((
            StudyOptions {
                levels: s.levels.clone(),
                order: s.order,
                mc_sizes: s.mc_sizes.clone(),
                realizations: s.realizations,
                seed: self.seed,
            },
            s.cv_samples,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_config_errors() {
        let e = ExperimentConfig::parse("seed = 1\nbogus = 2\n", ".").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn forecast_without_case() {
        let cfg = ExperimentConfig::parse(
            r#"
            [forecast]
            sigma_p = 0.35
            shared = [[["a", 1], ["b", 1]]]
            [[forecast.sites]]
            label = "a"
            diurnal = { level = 8.0, amplitude = 0.1 }
            length_scale = 11.0
            smoothness = 0.6
            modes = 3
            nameplate = 50.0
            [[forecast.sites]]
            label = "b"
            diurnal = { level = 7.0 }
            length_scale = 10.0
            smoothness = 0.5
            modes = 3
            nameplate = 50.0
            "#,
            ".",
        )
        .unwrap();
        let spec = cfg.forecast_spec(None).unwrap();
        assert_eq!(spec.shared, vec![vec![(0, 0), (1, 0)]]);
        assert_eq!(spec.sites[1].mean_wind, vec![7.0; 24]);
    }
}
