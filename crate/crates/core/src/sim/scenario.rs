//! Scenario and sweep files.
//!
//! ```toml
//! catalog = "table1.toml"      # relative to this file
//!
//! [scenario]
//! gap_m = 300.0
//! speed_mph = 40.0             # or speed_mps
//! vehicle = "car"              # or deceleration_mps2
//!
//! [detection]
//! detection_range_m = 120.0
//! visibility_range_m = 140.0
//!
//! [sim]
//! model = "YOLO11x"
//! platform = "a5000"
//! rtt = 0.022                  # seconds, or "sampler" | "p10" | "p50" | "p90"
//! seed = 7
//! ```
//!
//! A sweep file is a scenario file with an extra `[grid]` table.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::{self, Catalog, PlatformKind, SensingConfig};
use crate::error::{Error, Result};
use crate::kinematics::{mph_to_mps, VehicleClass};
use crate::netmodel::{LatencySampler, PercentileMode};

use super::{DetectionModel, FrameArrivals, RoadScenario, ServiceDistribution, SimConfig};

/// How the round-trip delay of each frame is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RttMode {
    /// Draw from the platform's sampler every frame.
    Sampler,
    /// Pin every frame at a percentile of the sampler.
    Percentile(PercentileMode),
    Fixed(f64),
}

impl fmt::Display for RttMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RttMode::Sampler => f.write_str("sampler"),
            RttMode::Percentile(p) => write!(f, "{p}"),
            RttMode::Fixed(v) => write!(f, "fixed:{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum RttValue {
    Seconds(f64),
    Name(String),
}

impl RttValue {
    pub(crate) fn to_mode(&self) -> Result<RttMode> {
        match self {
            RttValue::Seconds(v) => {
                if v.is_finite() && *v >= 0.0 {
                    Ok(RttMode::Fixed(*v))
                } else {
                    Err(Error::Validation(format!("fixed RTT must be >= 0, got {v}")))
                }
            }
            RttValue::Name(s) if s.eq_ignore_ascii_case("sampler") => Ok(RttMode::Sampler),
            RttValue::Name(s) => Ok(RttMode::Percentile(s.parse()?)),
        }
    }
}

/// Service-time inflation as a function of concurrent clients, linearly
/// interpolated between points and clamped outside them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ContentionTable {
    pub points: Vec<(f64, f64)>,
}

impl ContentionTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.iter().any(|(c, m)| !(c.is_finite() && *c >= 0.0 && m.is_finite() && *m > 0.0)) {
            return Err(Error::Validation(
                "contention table needs clients >= 0 and multipliers > 0".into(),
            ));
        }
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Validation("contention table has duplicate client counts".into()));
        }
        Ok(ContentionTable { points })
    }

    pub fn multiplier(&self, clients: f64) -> f64 {
        let pts = &self.points;
        match pts.len() {
            0 => 1.0,
            _ if clients <= pts[0].0 => pts[0].1,
            n if clients >= pts[n - 1].0 => pts[n - 1].1,
            _ => {
                let i = pts.iter().position(|p| p.0 > clients).expect("bracketed");
                let (c0, m0) = pts[i - 1];
                let (c1, m1) = pts[i];
                m0 + (clients - c0) / (c1 - c0) * (m1 - m0)
            }
        }
    }
}

/// A scenario with names still unresolved against the catalog.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSpec {
    pub gap: f64,
    pub initial_speed: f64,
    pub vehicle: Option<String>,
    pub deceleration: f64,
    pub detection: DetectionModel,
    pub model: String,
    pub platform: String,
    pub rtt: RttMode,
    /// Network sampler name overriding the platform's own.
    pub network: Option<String>,
    pub confirm_frames: u32,
    pub service: ServiceDistribution,
    pub background_rate: f64,
    pub frame_arrivals: FrameArrivals,
    pub concurrent_clients: f64,
    pub contention: ContentionTable,
    pub frame_rate: Option<f64>,
    pub control_delay: Option<f64>,
    pub seed: u64,
}

impl ScenarioSpec {
    /// Binds the spec to catalog entries and validates the result.
    pub fn resolve(&self, catalog: &Catalog) -> Result<SimConfig> {
        let profile = catalog
            .profile(&self.model, &self.platform)
            .ok_or_else(|| {
                Error::Config(format!(
                    "catalog has no profile for ({}, {})",
                    self.model, self.platform
                ))
            })?
            .clone();
        let platform = catalog
            .platform(&self.platform)
            .ok_or_else(|| Error::Config(format!("unknown platform `{}`", self.platform)))?
            .clone();

        let network = match platform.kind {
            PlatformKind::Device => None,
            PlatformKind::Cloud => {
                let name = self
                    .network
                    .as_deref()
                    .or(platform.network_ref.as_deref())
                    .ok_or_else(|| {
                        Error::Config(format!("platform `{}` has no network", platform.platform_id))
                    })?;
                let base = catalog
                    .networks
                    .get(name)
                    .ok_or_else(|| Error::Config(format!("unknown network `{name}`")))?;
                Some(match self.rtt {
                    RttMode::Sampler => base.clone(),
                    RttMode::Percentile(p) => base.pinned(p.fraction())?,
                    RttMode::Fixed(v) => LatencySampler::fixed(v)?,
                })
            }
        };

        let frame_rate = self.frame_rate.unwrap_or(catalog.sensing.frame_rate);
        let sensing = SensingConfig::with_deadline(
            frame_rate,
            self.control_delay.unwrap_or(catalog.sensing.control_delay),
            if self.frame_rate.is_some() {
                1.0 / frame_rate
            } else {
                catalog.sensing.deadline
            },
        )?;

        let config = SimConfig {
            scenario: RoadScenario {
                gap: self.gap,
                initial_speed: self.initial_speed,
                deceleration: self.deceleration,
            },
            profile,
            platform,
            sensing,
            network,
            detection: self.detection,
            confirm_frames: self.confirm_frames,
            service_distribution: self.service,
            background_arrival_rate: self.background_rate,
            service_scale: self.contention.multiplier(self.concurrent_clients),
            frame_arrivals: self.frame_arrivals,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

// ---- file schema ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ScenarioFile {
    pub catalog: String,
    pub scenario: ScenarioSection,
    pub detection: DetectionSection,
    pub sim: SimSection,
    #[serde(default)]
    pub sensing: Option<SensingOverride>,
    #[serde(default)]
    pub vehicle: Vec<VehicleEntry>,
    #[serde(default)]
    pub contention: Vec<ContentionEntry>,
    #[serde(default)]
    pub grid: Option<GridSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ScenarioSection {
    #[serde(default = "default_gap")]
    pub gap_m: f64,
    pub speed_mps: Option<f64>,
    pub speed_mph: Option<f64>,
    pub vehicle: Option<String>,
    pub deceleration_mps2: Option<f64>,
}

fn default_gap() -> f64 {
    300.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct DetectionSection {
    pub detection_range_m: f64,
    pub visibility_range_m: Option<f64>,
    #[serde(default = "one")]
    pub per_frame_probability: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct SimSection {
    pub model: String,
    pub platform: String,
    #[serde(default)]
    pub rtt: Option<RttValue>,
    #[serde(default)]
    pub network: Option<String>,
    #[serde(default = "default_confirm")]
    pub confirm_frames: u32,
    #[serde(default = "default_service")]
    pub service: ServiceDistribution,
    #[serde(default)]
    pub background_rate_hz: f64,
    #[serde(default)]
    pub frame_arrivals: FrameArrivals,
    #[serde(default)]
    pub concurrent_clients: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_confirm() -> u32 {
    1
}

fn default_service() -> ServiceDistribution {
    ServiceDistribution::Deterministic
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct SensingOverride {
    pub frame_rate_hz: Option<f64>,
    pub control_delay_s: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct VehicleEntry {
    pub name: String,
    pub deceleration_mps2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ContentionEntry {
    pub clients: f64,
    pub multiplier: f64,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub(crate) struct GridSection {
    #[serde(default)]
    pub speeds_mph: Vec<f64>,
    #[serde(default)]
    pub speeds_mps: Vec<f64>,
    #[serde(default)]
    pub vehicles: Vec<String>,
    #[serde(default)]
    pub deployments: Vec<DeploymentEntry>,
    #[serde(default)]
    pub rtt: Vec<RttValue>,
    #[serde(default)]
    pub detection_ranges_m: Vec<f64>,
    #[serde(default)]
    pub background_rates_hz: Vec<f64>,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DeploymentEntry {
    pub model: String,
    pub platform: String,
    /// Replaces the base detection range for this deployment.
    #[serde(default)]
    pub detection_range_m: Option<f64>,
    /// Added to whichever detection range applies.
    #[serde(default)]
    pub detection_bonus_m: f64,
}

/// A scenario file after parsing: the catalog it names, the base spec, and
/// the vehicle classes in scope.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub path: PathBuf,
    pub catalog: Catalog,
    pub spec: ScenarioSpec,
    pub vehicles: Vec<VehicleClass>,
}

pub(crate) fn read_file(path: &Path) -> Result<(ScenarioFile, Catalog)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ScenarioFile = toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let catalog = catalog::load_catalog(base.join(&file.catalog))?;
    Ok((file, catalog))
}

pub(crate) fn vehicle_classes(file: &ScenarioFile) -> Result<Vec<VehicleClass>> {
    let mut classes: BTreeMap<String, VehicleClass> = VehicleClass::defaults()
        .into_iter()
        .map(|v| (v.name.clone(), v))
        .collect();
    for v in &file.vehicle {
        let class = VehicleClass::new(v.name.clone(), v.deceleration_mps2, Vec::new())?;
        classes.insert(v.name.clone(), class);
    }
    Ok(classes.into_values().collect())
}

pub fn find_vehicle<'v>(classes: &'v [VehicleClass], name: &str) -> Result<&'v VehicleClass> {
    classes
        .iter()
        .find(|v| v.name == name)
        .ok_or_else(|| Error::Config(format!("unknown vehicle class `{name}`")))
}

pub(crate) fn base_spec(file: &ScenarioFile, vehicles: &[VehicleClass]) -> Result<ScenarioSpec> {
    let s = &file.scenario;
    let initial_speed = match (s.speed_mps, s.speed_mph) {
        (Some(v), None) => v,
        (None, Some(mph)) => mph_to_mps(mph),
        _ => {
            return Err(Error::Config(
                "[scenario] needs exactly one of speed_mps or speed_mph".into(),
            ))
        }
    };
    let deceleration = match (s.deceleration_mps2, &s.vehicle) {
        (Some(a), _) => a,
        (None, Some(name)) => find_vehicle(vehicles, name)?.deceleration,
        (None, None) => {
            return Err(Error::Config(
                "[scenario] needs deceleration_mps2 or a vehicle class".into(),
            ))
        }
    };
    let d = &file.detection;
    let contention = ContentionTable::new(
        file.contention
            .iter()
            .map(|c| (c.clients, c.multiplier))
            .collect(),
    )?;
    let sensing = file.sensing.as_ref();
    Ok(ScenarioSpec {
        gap: s.gap_m,
        initial_speed,
        vehicle: s.vehicle.clone(),
        deceleration,
        detection: DetectionModel {
            detection_range: d.detection_range_m,
            per_frame_probability: d.per_frame_probability,
            visibility_range: d.visibility_range_m.unwrap_or(d.detection_range_m),
        },
        model: file.sim.model.clone(),
        platform: file.sim.platform.clone(),
        rtt: file
            .sim
            .rtt
            .as_ref()
            .map(RttValue::to_mode)
            .transpose()?
            .unwrap_or(RttMode::Sampler),
        network: file.sim.network.clone(),
        confirm_frames: file.sim.confirm_frames,
        service: file.sim.service,
        background_rate: file.sim.background_rate_hz,
        frame_arrivals: file.sim.frame_arrivals,
        concurrent_clients: file.sim.concurrent_clients,
        contention,
        frame_rate: sensing.and_then(|s| s.frame_rate_hz),
        control_delay: sensing.and_then(|s| s.control_delay_s),
        seed: file.sim.seed,
    })
}

/// Loads a scenario file and the catalog it references.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<LoadedScenario> {
    let path = path.as_ref();
    let (file, catalog) = read_file(path)?;
    let vehicles = vehicle_classes(&file)?;
    let spec = base_spec(&file, &vehicles)?;
    Ok(LoadedScenario {
        path: path.to_path_buf(),
        catalog,
        spec,
        vehicles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contention_interpolates() {
        let t = ContentionTable::new(vec![(8.0, 2.0), (0.0, 1.0), (4.0, 1.2)]).unwrap();
        assert_eq!(t.multiplier(0.0), 1.0);
        assert!((t.multiplier(2.0) - 1.1).abs() < 1e-12);
        assert!((t.multiplier(6.0) - 1.6).abs() < 1e-12);
        assert_eq!(t.multiplier(20.0), 2.0);
        assert_eq!(ContentionTable::default().multiplier(5.0), 1.0);
        assert!(ContentionTable::new(vec![(1.0, 0.0)]).is_err());
    }

    #[test]
    fn rtt_values_parse() {
        assert_eq!(RttValue::Seconds(0.06).to_mode().unwrap(), RttMode::Fixed(0.06));
        assert_eq!(
            RttValue::Name("P90".into()).to_mode().unwrap(),
            RttMode::Percentile(PercentileMode::P90)
        );
        assert_eq!(RttValue::Name("sampler".into()).to_mode().unwrap(), RttMode::Sampler);
        assert!(RttValue::Name("p99".into()).to_mode().is_err());
        assert!(RttValue::Seconds(-1.0).to_mode().is_err());
        assert_eq!(RttMode::Fixed(0.022).to_string(), "fixed:0.022");
    }
}
