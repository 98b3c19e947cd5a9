//! Deployment-time feasibility and accuracy-optimal selection.
//!
//! A pair is feasible when its total response latency fits the deadline
//! (`<=`) and its per-inference energy fits the platform budget, if one is
//! declared. Selection maximizes accuracy over feasible pairs with a
//! deterministic tie-break: lower latency, then lower energy, then model id.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::catalog::{Catalog, PlatformKind, SensingConfig};
use crate::error::{Error, Result};
use crate::latency::{self, QueueModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RejectReason {
    Deadline,
    Energy,
    Unstable,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::Deadline => "deadline",
            RejectReason::Energy => "energy",
            RejectReason::Unstable => "unstable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairEvaluation {
    pub model_id: String,
    pub platform_id: String,
    pub kind: PlatformKind,
    pub network_delay: f64,
    /// Inference term used in the total; amortized when requested.
    pub inference_latency: f64,
    /// Infinite when the queue is unstable.
    pub total_latency: f64,
    pub energy: f64,
    pub accuracy: f64,
    pub feasible: bool,
    pub reject_reason: Option<RejectReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub model_id: String,
    pub platform_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct FeasibilityReport {
    pub evaluated: Vec<PairEvaluation>,
    pub selected: Option<Selection>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FeasibilityOptions {
    /// Replace raw inference latency with the queue-amortized value at the
    /// frame rate and reject unstable pairs.
    pub amortized: bool,
}

/// Representative round-trip delay per cloud platform.
pub type NetworkPoint = BTreeMap<String, f64>;

/// The `q` quantile of each cloud platform's sampler.
pub fn network_point_at(catalog: &Catalog, q: f64) -> Result<NetworkPoint> {
    catalog
        .platforms
        .iter()
        .filter(|p| p.kind == PlatformKind::Cloud)
        .map(|p| {
            let sampler = catalog.network_for(p).ok_or_else(|| {
                Error::Config(format!("platform `{}` has no network sampler", p.platform_id))
            })?;
            Ok((p.platform_id.clone(), sampler.percentile(q)?))
        })
        .collect()
}

/// The same delay for every cloud platform.
pub fn uniform_network_point(catalog: &Catalog, rtt: f64) -> NetworkPoint {
    catalog
        .platforms
        .iter()
        .filter(|p| p.kind == PlatformKind::Cloud)
        .map(|p| (p.platform_id.clone(), rtt))
        .collect()
}

/// Evaluates every catalog pair; the selection is left empty.
pub fn feasibility_set(
    catalog: &Catalog,
    sensing: &SensingConfig,
    network_point: &NetworkPoint,
    options: FeasibilityOptions,
) -> Result<FeasibilityReport> {
    sensing.validate()?;
    for (id, rtt) in network_point {
        let platform = catalog
            .platform(id)
            .ok_or_else(|| Error::Config(format!("network point names unknown platform `{id}`")))?;
        if platform.kind == PlatformKind::Device && *rtt != 0.0 {
            return Err(Error::Config(format!(
                "device platform `{id}` cannot carry a network delay ({rtt})"
            )));
        }
        if !(rtt.is_finite() && *rtt >= 0.0) {
            return Err(Error::Config(format!(
                "network delay for `{id}` must be finite and >= 0, got {rtt}"
            )));
        }
    }

    let mut evaluated = Vec::with_capacity(catalog.profiles.len());
    for profile in &catalog.profiles {
        let platform = catalog.platform(&profile.platform_id).ok_or_else(|| {
            Error::Config(format!("profile references unknown platform `{}`", profile.platform_id))
        })?;
        let network_delay = match platform.kind {
            PlatformKind::Device => 0.0,
            PlatformKind::Cloud => *network_point.get(&platform.platform_id).ok_or_else(|| {
                Error::Config(format!(
                    "no network delay given for cloud platform `{}`",
                    platform.platform_id
                ))
            })?,
        };

        let inference = if options.amortized {
            QueueModel::new(profile.inference_latency, sensing.frame_rate)?
                .amortized_latency()
                .ok()
        } else {
            Some(profile.inference_latency)
        };

        let (inference_latency, total_latency, reject_reason) = match inference {
            None => (f64::INFINITY, f64::INFINITY, Some(RejectReason::Unstable)),
            Some(inf) => {
                let total =
                    latency::total_response_latency(network_delay, inf, sensing.control_delay)?;
                let reason = if total > sensing.deadline {
                    Some(RejectReason::Deadline)
                } else if platform
                    .energy_budget
                    .is_some_and(|budget| profile.energy_per_inference > budget)
                {
                    Some(RejectReason::Energy)
                } else {
                    None
                };
                (inf, total, reason)
            }
        };

        evaluated.push(PairEvaluation {
            model_id: profile.model_id.clone(),
            platform_id: profile.platform_id.clone(),
            kind: platform.kind,
            network_delay,
            inference_latency,
            total_latency,
            energy: profile.energy_per_inference,
            accuracy: profile.accuracy,
            feasible: reject_reason.is_none(),
            reject_reason,
        });
    }

    Ok(FeasibilityReport {
        evaluated,
        selected: None,
    })
}

/// Ordering where the preferred pair compares as `Less`.
fn preference(a: &PairEvaluation, b: &PairEvaluation) -> Ordering {
    b.accuracy
        .total_cmp(&a.accuracy)
        .then(a.total_latency.total_cmp(&b.total_latency))
        .then(a.energy.total_cmp(&b.energy))
        .then_with(|| a.model_id.cmp(&b.model_id))
        .then_with(|| a.platform_id.cmp(&b.platform_id))
}

/// Fills `selected` with the accuracy-optimal feasible pair.
pub fn select_optimal(mut report: FeasibilityReport) -> FeasibilityReport {
    report.selected = report
        .evaluated
        .iter()
        .filter(|e| e.feasible)
        .min_by(|a, b| preference(a, b))
        .map(|e| Selection {
            model_id: e.model_id.clone(),
            platform_id: e.platform_id.clone(),
        });
    report
}

impl FeasibilityReport {
    pub fn feasible(&self) -> impl Iterator<Item = &PairEvaluation> {
        self.evaluated.iter().filter(|e| e.feasible)
    }

    pub fn get(&self, model: &str, platform: &str) -> Option<&PairEvaluation> {
        self.evaluated
            .iter()
            .find(|e| e.model_id == model && e.platform_id == platform)
    }

    /// Sub-report over one platform kind, selection cleared.
    pub fn restrict_to_kind(&self, kind: PlatformKind) -> FeasibilityReport {
        FeasibilityReport {
            evaluated: self
                .evaluated
                .iter()
                .filter(|e| e.kind == kind)
                .cloned()
                .collect(),
            selected: None,
        }
    }

    /// Optimal selection within each platform kind present in the report.
    pub fn select_per_kind(&self) -> BTreeMap<PlatformKind, Option<Selection>> {
        let mut kinds: Vec<PlatformKind> = self.evaluated.iter().map(|e| e.kind).collect();
        kinds.sort();
        kinds.dedup();
        kinds
            .into_iter()
            .map(|k| (k, select_optimal(self.restrict_to_kind(k)).selected))
            .collect()
    }
}
