#![allow(dead_code)]

use std::path::PathBuf;

use placesim::catalog::{ModelProfile, PlatformKind, PlatformSpec, SensingConfig};
use placesim::netmodel::LatencySampler;
use placesim::sim::{DetectionModel, RoadScenario, SimConfig};

pub fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn config_path(name: &str) -> PathBuf {
    configs_dir().join(name)
}

pub fn device(latency: f64, energy: f64) -> (ModelProfile, PlatformSpec) {
    (
        ModelProfile {
            model_id: "YOLO11m".into(),
            platform_id: "jetson_orin".into(),
            inference_latency: latency,
            energy_per_inference: energy,
            accuracy: 51.5,
        },
        PlatformSpec {
            platform_id: "jetson_orin".into(),
            kind: PlatformKind::Device,
            energy_budget: None,
            network_ref: None,
        },
    )
}

pub fn cloud(latency: f64, energy: f64) -> (ModelProfile, PlatformSpec) {
    (
        ModelProfile {
            model_id: "YOLO11x".into(),
            platform_id: "a5000".into(),
            inference_latency: latency,
            energy_per_inference: energy,
            accuracy: 54.7,
        },
        PlatformSpec {
            platform_id: "a5000".into(),
            kind: PlatformKind::Cloud,
            energy_budget: None,
            network_ref: Some("lax_wifi".into()),
        },
    )
}

pub struct Road {
    pub gap: f64,
    pub speed: f64,
    pub decel: f64,
    pub range: f64,
    pub visibility: f64,
}

impl Road {
    pub fn baseline() -> Road {
        Road {
            gap: 300.0,
            speed: 17.8816,
            decel: 6.0,
            range: 120.0,
            visibility: 140.0,
        }
    }
}

fn build(road: &Road, pair: (ModelProfile, PlatformSpec), network: Option<LatencySampler>) -> SimConfig {
    SimConfig::new(
        RoadScenario {
            gap: road.gap,
            initial_speed: road.speed,
            deceleration: road.decel,
        },
        pair.0,
        pair.1,
        SensingConfig::new(10.0, 0.0).unwrap(),
        network,
        DetectionModel {
            detection_range: road.range,
            per_frame_probability: 1.0,
            visibility_range: road.visibility,
        },
    )
}

/// Cloud pipeline with a fixed round trip.
pub fn cloud_config(road: &Road, latency: f64, rtt: f64) -> SimConfig {
    build(road, cloud(latency, 1.66), Some(LatencySampler::fixed(rtt).unwrap()))
}

pub fn device_config(road: &Road, latency: f64) -> SimConfig {
    build(road, device(latency, 0.58), None)
}

/// Independent closed-form trace for the deterministic single-frame
/// pipeline: the first frame whose capture distance is within range
/// triggers, braking starts `response` seconds later.
pub struct ClosedForm {
    pub frame: u64,
    pub t_det: f64,
    pub d_capture: f64,
    pub d_brake: f64,
    pub d_stop: f64,
}

pub fn closed_form(road: &Road, frame_rate: f64, response: f64) -> ClosedForm {
    let mut n = 0u64;
    while road.gap - road.speed * (n as f64 / frame_rate) > road.range {
        n += 1;
    }
    let t_det = n as f64 / frame_rate;
    let d_capture = road.gap - road.speed * t_det;
    let d_brake = d_capture - road.speed * response;
    let d_stop = d_brake - road.speed * road.speed / (2.0 * road.decel);
    ClosedForm {
        frame: n,
        t_det,
        d_capture,
        d_brake,
        d_stop,
    }
}
