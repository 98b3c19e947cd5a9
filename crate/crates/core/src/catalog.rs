//! Model/platform profiles, platform specs and the sensing configuration.
//!
//! Catalogs are read from TOML:
//!
//! ```toml
//! [sensing]
//! frame_rate_hz = 10.0
//! control_delay_s = 0.0
//! deadline_s = 0.1          # optional, defaults to 1 / frame_rate_hz
//!
//! [network.lax_wifi]
//! kind = "percentile_table"
//! p10 = 0.015
//! p50 = 0.022
//! p90 = 0.060
//!
//! [[platform]]
//! id = "a5000"
//! kind = "cloud"
//! network = "lax_wifi"
//!
//! [[profile]]
//! model = "YOLO11x"
//! platform = "a5000"
//! inference_latency_s = 0.029
//! energy_j = 1.66
//! accuracy_map = 54.7
//! ```
//!
//! All durations are seconds. Loaded catalogs are immutable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{self, LatencySampler, PercentileMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelProfile {
    pub model_id: String,
    pub platform_id: String,
    /// Mean inference latency, seconds.
    pub inference_latency: f64,
    /// Joules per inference.
    pub energy_per_inference: f64,
    /// Accuracy points in [0, 100]; only ever compared, never computed.
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlatformKind {
    Device,
    Cloud,
}

impl fmt::Display for PlatformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlatformKind::Device => "device",
            PlatformKind::Cloud => "cloud",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformSpec {
    pub platform_id: String,
    pub kind: PlatformKind,
    pub energy_budget: Option<f64>,
    /// Name of a network sampler; present exactly for cloud platforms.
    pub network_ref: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingConfig {
    pub frame_rate: f64,
    pub control_delay: f64,
    pub deadline: f64,
}

impl SensingConfig {
    /// Sensing config whose deadline is one frame interval.
    pub fn new(frame_rate: f64, control_delay: f64) -> Result<Self> {
        Self::with_deadline(frame_rate, control_delay, 1.0 / frame_rate)
    }

    pub fn with_deadline(frame_rate: f64, control_delay: f64, deadline: f64) -> Result<Self> {
        let s = SensingConfig {
            frame_rate,
            control_delay,
            deadline,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn frame_interval(&self) -> f64 {
        1.0 / self.frame_rate
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return Err(Error::Validation(format!(
                "frame rate must be positive, got {}",
                self.frame_rate
            )));
        }
        if !(self.control_delay.is_finite() && self.control_delay >= 0.0) {
            return Err(Error::Validation(format!(
                "control delay must be non-negative, got {}",
                self.control_delay
            )));
        }
        if !(self.deadline.is_finite() && self.deadline > 0.0) {
            return Err(Error::Validation(format!(
                "deadline must be positive, got {}",
                self.deadline
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Catalog {
    pub sensing: SensingConfig,
    pub platforms: Vec<PlatformSpec>,
    pub profiles: Vec<ModelProfile>,
    pub networks: BTreeMap<String, LatencySampler>,
}

impl Catalog {
    /// Builds and validates a catalog from parts.
    pub fn new(
        sensing: SensingConfig,
        platforms: Vec<PlatformSpec>,
        profiles: Vec<ModelProfile>,
        networks: BTreeMap<String, LatencySampler>,
    ) -> Result<Self> {
        let c = Catalog {
            sensing,
            platforms,
            profiles,
            networks,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn platform(&self, id: &str) -> Option<&PlatformSpec> {
        self.platforms.iter().find(|p| p.platform_id == id)
    }

    pub fn profile(&self, model: &str, platform: &str) -> Option<&ModelProfile> {
        self.profiles
            .iter()
            .find(|p| p.model_id == model && p.platform_id == platform)
    }

    /// Network sampler backing a platform; `None` for device platforms.
    pub fn network_for(&self, platform: &PlatformSpec) -> Option<&LatencySampler> {
        platform
            .network_ref
            .as_deref()
            .and_then(|name| self.networks.get(name))
    }

    pub fn validate(&self) -> Result<()> {
        self.sensing.validate()?;
        for (name, sampler) in &self.networks {
            sampler
                .validate()
                .map_err(|e| Error::Validation(format!("network `{name}`: {e}")))?;
        }

        let mut ids = BTreeSet::new();
        for p in &self.platforms {
            if !ids.insert(p.platform_id.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate platform id `{}`",
                    p.platform_id
                )));
            }
            if let Some(b) = p.energy_budget {
                if !(b.is_finite() && b >= 0.0) {
                    return Err(Error::Validation(format!(
                        "platform `{}`: energy budget must be non-negative, got {b}",
                        p.platform_id
                    )));
                }
            }
            match (p.kind, &p.network_ref) {
                (PlatformKind::Cloud, None) => {
                    return Err(Error::Validation(format!(
                        "cloud platform `{}` needs a network reference",
                        p.platform_id
                    )))
                }
                (PlatformKind::Device, Some(n)) => {
                    return Err(Error::Validation(format!(
                        "device platform `{}` must not reference a network (got `{n}`)",
                        p.platform_id
                    )))
                }
                (PlatformKind::Cloud, Some(n)) if !self.networks.contains_key(n) => {
                    return Err(Error::Validation(format!(
                        "platform `{}` references unknown network `{n}`",
                        p.platform_id
                    )))
                }
                _ => {}
            }
        }

        let mut keys = BTreeSet::new();
        for m in &self.profiles {
            let key = (m.model_id.as_str(), m.platform_id.as_str());
            if !keys.insert(key) {
                return Err(Error::Validation(format!(
                    "duplicate profile ({}, {})",
                    m.model_id, m.platform_id
                )));
            }
            if !ids.contains(m.platform_id.as_str()) {
                return Err(Error::Validation(format!(
                    "profile ({}, {}) references unknown platform",
                    m.model_id, m.platform_id
                )));
            }
            if !(m.inference_latency.is_finite() && m.inference_latency > 0.0) {
                return Err(Error::Validation(format!(
                    "profile ({}, {}): inference latency must be > 0, got {}",
                    m.model_id, m.platform_id, m.inference_latency
                )));
            }
            if !(m.energy_per_inference.is_finite() && m.energy_per_inference >= 0.0) {
                return Err(Error::Validation(format!(
                    "profile ({}, {}): energy must be >= 0, got {}",
                    m.model_id, m.platform_id, m.energy_per_inference
                )));
            }
            if !(0.0..=100.0).contains(&m.accuracy) {
                return Err(Error::Validation(format!(
                    "profile ({}, {}): accuracy must lie in [0, 100], got {}",
                    m.model_id, m.platform_id, m.accuracy
                )));
            }
        }
        Ok(())
    }

    /// Parses catalog TOML. Relative sample-file paths resolve against `base_dir`.
    pub fn from_toml_str(text: &str, origin: &Path, base_dir: &Path) -> Result<Self> {
        let file: CatalogFile = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        file.into_catalog(base_dir)
    }

    /// Serializes to the same TOML schema `load_catalog` reads.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(&CatalogFile::from(self)).expect("catalog serializes to TOML")
    }
}

/// Reads and validates a catalog file.
pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    Catalog::from_toml_str(&text, path, base)
}

// ---- on-disk schema ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    sensing: SensingSection,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    network: BTreeMap<String, NetworkEntry>,
    #[serde(default)]
    platform: Vec<PlatformEntry>,
    #[serde(default)]
    profile: Vec<ProfileEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SensingSection {
    frame_rate_hz: f64,
    #[serde(default)]
    control_delay_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    deadline_s: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlatformEntry {
    id: String,
    kind: PlatformKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    energy_budget_j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    network: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileEntry {
    model: String,
    platform: String,
    inference_latency_s: f64,
    energy_j: f64,
    accuracy_map: f64,
}

/// `[network.<name>]` table. Empirical samplers take either inline
/// `samples` or a `file` of one value per line.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub(crate) enum NetworkEntry {
    Fixed {
        value: f64,
    },
    PercentileTable {
        p10: f64,
        p50: f64,
        p90: f64,
        #[serde(default = "default_mode")]
        mode: PercentileMode,
    },
    Empirical {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<String>,
    },
    ShiftedLognormal {
        location: f64,
        log_mean: f64,
        log_sigma: f64,
    },
}

fn default_mode() -> PercentileMode {
    PercentileMode::P50
}

impl NetworkEntry {
    pub(crate) fn into_sampler(self, name: &str, base_dir: &Path) -> Result<LatencySampler> {
        let sampler = match self {
            NetworkEntry::Fixed { value } => LatencySampler::Fixed { value },
            NetworkEntry::PercentileTable {
                p10,
                p50,
                p90,
                mode,
            } => LatencySampler::PercentileTable {
                p10,
                p50,
                p90,
                mode,
            },
            NetworkEntry::Empirical { samples, file } => match (samples, file) {
                (Some(samples), None) => LatencySampler::Empirical { samples },
                (None, Some(file)) => netmodel::load_samples(base_dir.join(file))?,
                _ => {
                    return Err(Error::Validation(format!(
                        "network `{name}`: empirical sampler needs exactly one of `samples` or `file`"
                    )))
                }
            },
            NetworkEntry::ShiftedLognormal {
                location,
                log_mean,
                log_sigma,
            } => LatencySampler::ShiftedLognormal {
                location,
                log_mean,
                log_sigma,
            },
        };
        sampler
            .validate()
            .map_err(|e| Error::Validation(format!("network `{name}`: {e}")))?;
        Ok(sampler)
    }
}

impl From<&LatencySampler> for NetworkEntry {
    fn from(s: &LatencySampler) -> Self {
        match s.clone() {
            LatencySampler::Fixed { value } => NetworkEntry::Fixed { value },
            LatencySampler::PercentileTable {
                p10,
                p50,
                p90,
                mode,
            } => NetworkEntry::PercentileTable {
                p10,
                p50,
                p90,
                mode,
            },
            LatencySampler::Empirical { samples } => NetworkEntry::Empirical {
                samples: Some(samples),
                file: None,
            },
            LatencySampler::ShiftedLognormal {
                location,
                log_mean,
                log_sigma,
            } => NetworkEntry::ShiftedLognormal {
                location,
                log_mean,
                log_sigma,
            },
        }
    }
}

impl CatalogFile {
    fn into_catalog(self, base_dir: &Path) -> Result<Catalog> {
        let deadline = self
            .sensing
            .deadline_s
            .unwrap_or(1.0 / self.sensing.frame_rate_hz);
        let sensing = SensingConfig {
            frame_rate: self.sensing.frame_rate_hz,
            control_delay: self.sensing.control_delay_s,
            deadline,
        };
        let networks = self
            .network
            .into_iter()
            .map(|(name, entry)| {
                let sampler = entry.into_sampler(&name, base_dir)?;
                Ok((name, sampler))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        let platforms = self
            .platform
            .into_iter()
            .map(|p| PlatformSpec {
                platform_id: p.id,
                kind: p.kind,
                energy_budget: p.energy_budget_j,
                network_ref: p.network,
            })
            .collect();
        let profiles = self
            .profile
            .into_iter()
            .map(|p| ModelProfile {
                model_id: p.model,
                platform_id: p.platform,
                inference_latency: p.inference_latency_s,
                energy_per_inference: p.energy_j,
                accuracy: p.accuracy_map,
            })
            .collect();
        Catalog::new(sensing, platforms, profiles, networks)
    }
}

impl From<&Catalog> for CatalogFile {
    fn from(c: &Catalog) -> Self {
        CatalogFile {
            sensing: SensingSection {
                frame_rate_hz: c.sensing.frame_rate,
                control_delay_s: c.sensing.control_delay,
                deadline_s: Some(c.sensing.deadline),
            },
            network: c
                .networks
                .iter()
                .map(|(k, v)| (k.clone(), NetworkEntry::from(v)))
                .collect(),
            platform: c
                .platforms
                .iter()
                .map(|p| PlatformEntry {
                    id: p.platform_id.clone(),
                    kind: p.kind,
                    energy_budget_j: p.energy_budget,
                    network: p.network_ref.clone(),
                })
                .collect(),
            profile: c
                .profiles
                .iter()
                .map(|p| ProfileEntry {
                    model: p.model_id.clone(),
                    platform: p.platform_id.clone(),
                    inference_latency_s: p.inference_latency,
                    energy_j: p.energy_per_inference,
                    accuracy_map: p.accuracy,
                })
                .collect(),
        }
    }
}
