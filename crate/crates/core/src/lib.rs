//! Inference placement analysis for real-time perception-to-action loops.
//!
//! The crate answers one question from several angles: should a perception
//! model run on the vehicle or in the cloud? It provides
//!
//! - [`catalog`]: model/platform profiles and the sensing configuration,
//! - [`latency`]: response latency, queue-amortized latency and the
//!   cloud break-even network delay,
//! - [`feasibility`]: deadline/energy feasibility and accuracy-optimal selection,
//! - [`kinematics`]: constant-deceleration stopping physics and safety predicates,
//! - [`netmodel`]: round-trip delay sources,
//! - [`queue_mc`]: an event-driven M/M/1 Monte Carlo simulator,
//! - [`sim`]: a discrete-event simulator of the full braking pipeline and sweeps,
//! - [`cli`]: the `placesim` command-line front end.

pub mod catalog;
pub mod cli;
mod error;
pub mod feasibility;
pub mod kinematics;
pub mod latency;
pub mod manifest;
pub mod netmodel;
pub mod queue_mc;
pub mod sim;

pub use catalog::{Catalog, ModelProfile, PlatformKind, PlatformSpec, SensingConfig};
pub use error::{Error, Result};
pub use feasibility::{FeasibilityReport, PairEvaluation, RejectReason};
pub use kinematics::BrakingScenario;
pub use netmodel::{LatencySampler, PercentileMode};
pub use queue_mc::Mm1Stats;
pub use sim::{SimConfig, SimResult};
