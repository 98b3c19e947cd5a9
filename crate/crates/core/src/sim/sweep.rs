//! Cartesian-product parameter sweeps over a base scenario.
//!
//! Axis order (outermost first): speed, vehicle, deployment, RTT mode,
//! detection range, background rate, seed. Empty axes keep the base value.
//! Points run in parallel but results are always returned in grid order.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::kinematics::{mph_to_mps, VehicleClass};

use super::scenario::{self, find_vehicle, DeploymentEntry, RttMode, ScenarioSpec};
use super::{run, SimResult};

/// Axis values; `None`/empty means "base value".
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepGrid {
    pub speeds: Vec<f64>,
    pub vehicles: Vec<String>,
    pub deployments: Vec<DeploymentEntry>,
    pub rtt: Vec<RttMode>,
    pub detection_ranges: Vec<f64>,
    pub background_rates: Vec<f64>,
    pub seeds: Vec<u64>,
}

/// Coordinates of one grid point, carried alongside its result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub index: usize,
    pub speed: f64,
    pub vehicle: Option<String>,
    pub model: String,
    pub platform: String,
    pub rtt: RttMode,
    pub detection_range: Option<f64>,
    pub detection_bonus: f64,
    pub background_rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub point: SweepPoint,
    /// Deceleration actually used, when the vehicle resolved.
    pub deceleration: Option<f64>,
    pub result: std::result::Result<SimResult, String>,
}

fn axis<T: Clone>(values: &[T], base: T) -> Vec<T> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

/// Enumerates grid points in deterministic order.
pub fn expand(base: &ScenarioSpec, grid: &SweepGrid) -> Vec<SweepPoint> {
    let speeds = axis(&grid.speeds, base.initial_speed);
    let vehicles: Vec<Option<String>> = if grid.vehicles.is_empty() {
        vec![base.vehicle.clone()]
    } else {
        grid.vehicles.iter().cloned().map(Some).collect()
    };
    let deployments = axis(
        &grid.deployments,
        DeploymentEntry {
            model: base.model.clone(),
            platform: base.platform.clone(),
            detection_range_m: None,
            detection_bonus_m: 0.0,
        },
    );
    let rtts = axis(&grid.rtt, base.rtt);
    let ranges: Vec<Option<f64>> = if grid.detection_ranges.is_empty() {
        vec![None]
    } else {
        grid.detection_ranges.iter().copied().map(Some).collect()
    };
    let rates = axis(&grid.background_rates, base.background_rate);
    let seeds = axis(&grid.seeds, base.seed);

    let mut points = Vec::new();
    for &speed in &speeds {
        for vehicle in &vehicles {
            for dep in &deployments {
                for &rtt in &rtts {
                    for &range in &ranges {
                        for &rate in &rates {
                            for &seed in &seeds {
                                points.push(SweepPoint {
                                    index: points.len(),
                                    speed,
                                    vehicle: vehicle.clone(),
                                    model: dep.model.clone(),
                                    platform: dep.platform.clone(),
                                    rtt,
                                    detection_range: range.or(dep.detection_range_m),
                                    detection_bonus: dep.detection_bonus_m,
                                    background_rate: rate,
                                    seed,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    points
}

/// The base spec with one point's overrides applied.
pub fn point_spec(
    base: &ScenarioSpec,
    point: &SweepPoint,
    vehicles: &[VehicleClass],
) -> Result<ScenarioSpec> {
    let mut spec = base.clone();
    spec.initial_speed = point.speed;
    if let Some(name) = &point.vehicle {
        if Some(name) != base.vehicle.as_ref() {
            spec.deceleration = find_vehicle(vehicles, name)?.deceleration;
        }
        spec.vehicle = Some(name.clone());
    }
    spec.model = point.model.clone();
    spec.platform = point.platform.clone();
    spec.rtt = point.rtt;
    let range = point.detection_range.unwrap_or(base.detection.detection_range);
    spec.detection.detection_range = range + point.detection_bonus;
    // A longer detection range implies the obstacle is visible at least that far out.
    spec.detection.visibility_range = spec
        .detection
        .visibility_range
        .max(spec.detection.detection_range);
    spec.background_rate = point.background_rate;
    spec.seed = point.seed;
    Ok(spec)
}

/// Runs every point on `jobs` worker threads (0 = rayon default).
pub fn sweep(
    catalog: &Catalog,
    base: &ScenarioSpec,
    grid: &SweepGrid,
    vehicles: &[VehicleClass],
    jobs: usize,
) -> Result<Vec<SweepRow>> {
    let points = expand(base, grid);
    let run_point = |point: SweepPoint| -> SweepRow {
        let spec = point_spec(base, &point, vehicles);
        let deceleration = spec.as_ref().ok().map(|s| s.deceleration);
        let result = spec
            .and_then(|s| s.resolve(catalog))
            .and_then(|cfg| run(&cfg))
            .map_err(|e| e.to_string());
        SweepRow {
            point,
            deceleration,
            result,
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(|| points.into_par_iter().map(run_point).collect()))
}

/// A parsed sweep file.
#[derive(Debug, Clone)]
pub struct LoadedSweep {
    pub catalog: Catalog,
    pub base: ScenarioSpec,
    pub grid: SweepGrid,
    pub vehicles: Vec<VehicleClass>,
}

pub fn load_sweep(path: impl AsRef<Path>) -> Result<LoadedSweep> {
    let path = path.as_ref();
    let (file, catalog) = scenario::read_file(path)?;
    let vehicles = scenario::vehicle_classes(&file)?;
    let base = scenario::base_spec(&file, &vehicles)?;
    let g = file.grid.unwrap_or_default();
    if !g.speeds_mph.is_empty() && !g.speeds_mps.is_empty() {
        return Err(Error::Config(
            "[grid] takes speeds_mph or speeds_mps, not both".into(),
        ));
    }
    let speeds = if g.speeds_mph.is_empty() {
        g.speeds_mps
    } else {
        g.speeds_mph.into_iter().map(mph_to_mps).collect()
    };
    let grid = SweepGrid {
        speeds,
        vehicles: g.vehicles,
        deployments: g.deployments,
        rtt: g
            .rtt
            .iter()
            .map(|r| r.to_mode())
            .collect::<Result<Vec<_>>>()?,
        detection_ranges: g.detection_ranges_m,
        background_rates: g.background_rates_hz,
        seeds: g.seeds,
    };
    Ok(LoadedSweep {
        catalog,
        base,
        grid,
        vehicles,
    })
}
