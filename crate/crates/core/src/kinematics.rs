//! Constant-deceleration braking and the perception-delay safety predicates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact conversion factor, metres per second per mile per hour.
pub const MPS_PER_MPH: f64 = 0.44704;

pub fn mph_to_mps(mph: f64) -> f64 {
    mph * MPS_PER_MPH
}

/// A braking situation: speed, deceleration magnitude and the gap to the
/// obstacle at the reference instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrakingScenario {
    pub initial_speed: f64,
    pub deceleration: f64,
    pub available_distance: f64,
}

impl BrakingScenario {
    pub fn new(initial_speed: f64, deceleration: f64, available_distance: f64) -> Result<Self> {
        for (name, v) in [
            ("initial speed", initial_speed),
            ("deceleration", deceleration),
            ("available distance", available_distance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(BrakingScenario {
            initial_speed,
            deceleration,
            available_distance,
        })
    }

    pub fn reaction_budget(&self) -> f64 {
        reaction_budget(self)
    }
}

/// A named vehicle type. Decelerations are configuration; the shipped
/// defaults are illustrative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleClass {
    pub name: String,
    pub deceleration: f64,
    pub speed_presets: Vec<f64>,
}

impl VehicleClass {
    pub fn new(name: impl Into<String>, deceleration: f64, speed_presets: Vec<f64>) -> Result<Self> {
        if !(deceleration.is_finite() && deceleration > 0.0) {
            return Err(Error::Domain(format!(
                "deceleration must be > 0, got {deceleration}"
            )));
        }
        Ok(VehicleClass {
            name: name.into(),
            deceleration,
            speed_presets,
        })
    }

    /// car 6.0, truck 4.0, motorbike 7.0 m/s^2 at 20/40/60 mph.
    pub fn defaults() -> Vec<VehicleClass> {
        let speeds: Vec<f64> = [20.0, 40.0, 60.0].into_iter().map(mph_to_mps).collect();
        [("car", 6.0), ("truck", 4.0), ("motorbike", 7.0)]
            .into_iter()
            .map(|(n, a)| VehicleClass {
                name: n.to_string(),
                deceleration: a,
                speed_presets: speeds.clone(),
            })
            .collect()
    }
}

pub fn braking_distance(initial_speed: f64, deceleration: f64) -> Result<f64> {
    if !(deceleration.is_finite() && deceleration > 0.0) {
        return Err(Error::Domain(format!(
            "deceleration must be > 0, got {deceleration}"
        )));
    }
    if !(initial_speed.is_finite() && initial_speed >= 0.0) {
        return Err(Error::Domain(format!(
            "initial speed must be >= 0, got {initial_speed}"
        )));
    }
    Ok(initial_speed * initial_speed / (2.0 * deceleration))
}

/// Distance covered during `perception_delay` at full speed plus the
/// braking distance.
pub fn stopping_distance(initial_speed: f64, deceleration: f64, perception_delay: f64) -> Result<f64> {
    if !(perception_delay.is_finite() && perception_delay >= 0.0) {
        return Err(Error::Domain(format!(
            "perception delay must be >= 0, got {perception_delay}"
        )));
    }
    Ok(initial_speed * perception_delay + braking_distance(initial_speed, deceleration)?)
}

/// `s_avail / v0 - v0 / (2a)`. Negative when even an instant reaction
/// cannot avoid the obstacle; never clamped.
pub fn reaction_budget(scenario: &BrakingScenario) -> f64 {
    let v = scenario.initial_speed;
    scenario.available_distance / v - v / (2.0 * scenario.deceleration)
}

/// `network + inference < budget`, strictly.
pub fn is_safe_static(network_delay: f64, inference_delay: f64, scenario: &BrakingScenario) -> bool {
    network_delay + inference_delay < reaction_budget(scenario)
}

/// Like [`is_safe_static`] but charges the detection delay too. The
/// scenario's available distance is measured when the obstacle first
/// becomes visible.
pub fn is_safe_with_detection(
    detection_delay: f64,
    network_delay: f64,
    inference_delay: f64,
    scenario: &BrakingScenario,
) -> bool {
    detection_delay + network_delay + inference_delay < reaction_budget(scenario)
}
