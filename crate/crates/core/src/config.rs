//! Run configuration: system parameters, scenario, outputs and the optional
//! per-experiment sections. Stored as TOML with a `schema_version` field.
//! Every omitted field takes its default from the reference system
//! (10 GHz carrier, 10 MHz sampling, N = 2048, N_zc = 1931, 64 elements,
//! 41 beams at −60°..60° in 3° steps, α = 32).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::scene::{NoiseSpec, Scenario, Target};
use crate::tx::{standard_beam_angles, ArrayGeometry, Beam, BeamPlan};
use crate::zc::is_prime;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

const PRESETS: &[(&str, &str)] = &[
    ("figure1", include_str!("../presets/figure1.toml")),
    ("figure2", include_str!("../presets/figure2.toml")),
    ("figure3", include_str!("../presets/figure3.toml")),
    ("figure5", include_str!("../presets/figure5.toml")),
    ("figure8", include_str!("../presets/figure8.toml")),
    ("figure10", include_str!("../presets/figure10.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

/// Source text of a shipped preset.
pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn preset(name: &str) -> Result<RunConfig> {
    let src = preset_source(name).ok_or_else(|| {
        Error::Config(format!(
            "unknown preset '{name}' (known: {})",
            preset_names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    RunConfig::from_toml(src)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One code per beam.
    Multi,
    /// Every beam on code 0.
    Single,
    /// Disjoint sub-bands per beam.
    Subcarrier,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Multi => "multi",
            Mode::Single => "single",
            Mode::Subcarrier => "subcarrier",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub theta_deg: f64,
    pub alpha: f64,
}

fn default_beams() -> Vec<BeamConfig> {
    standard_beam_angles()
        .into_iter()
        .map(|theta_deg| BeamConfig {
            theta_deg,
            alpha: 32.0,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub fc_hz: f64,
    pub fs_hz: f64,
    pub n: usize,
    pub n_zc: u64,
    pub m_elements: usize,
    pub k_window: usize,
    pub beams: Vec<BeamConfig>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            fc_hz: 10e9,
            fs_hz: 10e6,
            n: 2048,
            n_zc: 1931,
            m_elements: 64,
            k_window: 2,
            beams: default_beams(),
        }
    }
}

impl SystemConfig {
    pub fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::new(self.m_elements, self.fc_hz)
    }

    pub fn plan(&self) -> Result<BeamPlan> {
        BeamPlan::new(
            self.beams
                .iter()
                .enumerate()
                .map(|(code_index, b)| Beam {
                    theta_deg: b.theta_deg,
                    alpha: b.alpha,
                    code_index,
                })
                .collect(),
        )
    }

    /// Occupied bandwidth `f_s N_zc / N`.
    pub fn bandwidth_hz(&self) -> f64 {
        self.fs_hz * self.n_zc as f64 / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || !self.n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(self.n));
        }
        if !is_prime(self.n_zc) {
            return Err(Error::NotPrime(self.n_zc));
        }
        if self.n_zc as usize >= self.n {
            return Err(Error::SpectrumTooSmall {
                n: self.n,
                n_zc: self.n_zc as usize,
            });
        }
        if !(self.fs_hz.is_finite() && self.fs_hz > 0.0) {
            return Err(Error::InvalidParams(format!(
                "sampling rate must be positive, got {}",
                self.fs_hz
            )));
        }
        if self.k_window == 0 {
            return Err(Error::InvalidParams("k_window must be at least 1".into()));
        }
        self.geometry()?;
        self.plan()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub range_m: f64,
    pub theta_deg: f64,
    #[serde(default)]
    pub rcs_dbsm: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub targets: Vec<TargetConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    pub noise_seed: u64,
}

impl ScenarioConfig {
    pub fn scenario(&self, k_window: usize) -> Result<Scenario> {
        let targets = self
            .targets
            .iter()
            .map(|t| Target::new(t.range_m, t.theta_deg, t.rcs_dbsm))
            .collect::<Result<Vec<_>>>()?;
        let scenario = Scenario::new(targets, k_window);
        Ok(match self.snr_db {
            Some(snr_db) => scenario.with_noise(NoiseSpec {
                snr_db,
                seed: self.noise_seed,
            }),
            None => scenario,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Svg],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    /// Periodic and aperiodic autocorrelation of one sequence.
    Acf,
    /// Peak periodic cross-correlation of one seed against all seeds.
    Crosscorr,
    /// Side-peak ratio of the synthesized sequence for all seeds.
    Ranking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceConfig {
    pub q: Option<u64>,
    pub n_zc: u64,
    /// Spectrum length for synthesized sequences.
    pub n: Option<usize>,
    /// Extra length for the cross-correlation comparison.
    pub compare_n_zc: Option<u64>,
    /// Seeds whose synthesized autocorrelation is exported alongside the ranking.
    #[serde(default)]
    pub highlight_seeds: Vec<u64>,
    pub analyses: Vec<Analysis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EirpConfig {
    /// Any of "a", "b", "c" (captioned allocations) or "custom" (the system beams).
    pub configurations: Vec<String>,
    pub grid_step_deg: f64,
    pub budget_w: f64,
}

impl Default for EirpConfig {
    fn default() -> Self {
        Self {
            configurations: vec!["custom".into()],
            grid_step_deg: 0.1,
            budget_w: 42.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionConfig {
    pub threshold_rel: f64,
    pub min_separation_bins: usize,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            threshold_rel: 0.3,
            min_separation_bins: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub modes: Vec<Mode>,
    /// Beams whose range profiles are exported; empty means the beams
    /// nearest to each target.
    pub report_beams: Vec<f64>,
    pub detection: DetectionConfig,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            modes: vec![Mode::Multi],
            report_beams: Vec::new(),
            detection: DetectionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Experiment identifier used for the output subdirectory and report.
    #[serde(default = "default_id")]
    pub id: String,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eirp: Option<EirpConfig>,
    #[serde(default)]
    pub simulation: SimulationConfig,
}

fn default_id() -> String {
    "custom".into()
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            id: default_id(),
            system: SystemConfig::default(),
            scenario: ScenarioConfig::default(),
            outputs: OutputConfig::default(),
            sequence: None,
            eirp: None,
            simulation: SimulationConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)?;
        Self::from_toml(&src).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Hex SHA-256 of the canonical serialization, ignoring where outputs go.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let inputs = RunConfig {
            outputs: OutputConfig::default(),
            ..self.clone()
        };
        hex::encode(Sha256::digest(inputs.to_toml().as_bytes()))
    }
}
