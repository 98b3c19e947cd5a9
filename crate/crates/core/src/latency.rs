//! Response latency, queue-amortized latency and the cloud break-even delay.
//!
//! Each platform is treated as an M/M/1 server with service rate
//! `1 / service_time` fed at the frame rate. The expected time in system is
//! `service_time / (1 - rate * service_time)`, which is the same quantity as
//! `1 / (mu - lambda)`. Cloud beats device for a model when the round-trip
//! network delay is strictly below the difference of the two amortized
//! latencies.

use serde::Serialize;

use crate::error::{Error, Result};

fn require_non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be >= 0, got {v}")))
    }
}

/// Network + inference + control delay.
///
/// No queueing is applied here; pass an amortized inference latency to get
/// queue-aware totals.
pub fn total_response_latency(
    network_delay: f64,
    inference_latency: f64,
    control_delay: f64,
) -> Result<f64> {
    require_non_negative("network delay", network_delay)?;
    require_non_negative("inference latency", inference_latency)?;
    require_non_negative("control delay", control_delay)?;
    Ok(network_delay + inference_latency + control_delay)
}

/// A single-server queue fed by frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueueModel {
    pub service_time: f64,
    pub arrival_rate: f64,
}

impl QueueModel {
    pub fn new(service_time: f64, arrival_rate: f64) -> Result<Self> {
        if !(service_time.is_finite() && service_time > 0.0) {
            return Err(Error::Domain(format!(
                "service time must be > 0, got {service_time}"
            )));
        }
        require_non_negative("arrival rate", arrival_rate)?;
        Ok(QueueModel {
            service_time,
            arrival_rate,
        })
    }

    pub fn utilization(&self) -> f64 {
        self.arrival_rate * self.service_time
    }

    pub fn is_stable(&self) -> bool {
        self.utilization() < 1.0
    }

    /// Mean sojourn time `tau / (1 - F tau)`.
    pub fn amortized_latency(&self) -> Result<f64> {
        let rho = self.utilization();
        if rho >= 1.0 {
            return Err(Error::UnstableQueue { utilization: rho });
        }
        Ok(self.service_time / (1.0 - rho))
    }
}

pub fn amortized_latency(service_time: f64, arrival_rate: f64) -> Result<f64> {
    QueueModel::new(service_time, arrival_rate)?.amortized_latency()
}

/// Largest round-trip delay (exclusive) for which the cloud wins:
/// `amortized(device) - amortized(cloud)`. May be negative when the cloud
/// is the slower server.
pub fn cloud_break_even(device_service: f64, cloud_service: f64, arrival_rate: f64) -> Result<f64> {
    let device = amortized_latency(device_service, arrival_rate)?;
    let cloud = amortized_latency(cloud_service, arrival_rate)?;
    Ok(device - cloud)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PreferenceWarning {
    /// The cloud queue is unstable at this arrival rate; device wins by default.
    UnstableCloudQueue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Preference {
    pub prefer_cloud: bool,
    /// Break-even delay, absent when the cloud queue is unstable.
    pub break_even: Option<f64>,
    pub warning: Option<PreferenceWarning>,
}

/// Whether offloading beats on-device inference at this round-trip delay.
///
/// The comparison is strict: at exactly the break-even delay the device is
/// preferred.
pub fn prefer_cloud(
    network_rtt: f64,
    device_service: f64,
    cloud_service: f64,
    arrival_rate: f64,
) -> Result<Preference> {
    require_non_negative("network RTT", network_rtt)?;
    let device = amortized_latency(device_service, arrival_rate)?;
    let cloud = match amortized_latency(cloud_service, arrival_rate) {
        Ok(v) => v,
        Err(Error::UnstableQueue { .. }) => {
            return Ok(Preference {
                prefer_cloud: false,
                break_even: None,
                warning: Some(PreferenceWarning::UnstableCloudQueue),
            })
        }
        Err(e) => return Err(e),
    };
    let break_even = device - cloud;
    Ok(Preference {
        prefer_cloud: network_rtt < break_even,
        break_even: Some(break_even),
        warning: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn response_latency_examples() {
        assert!((total_response_latency(0.022, 0.029, 0.0).unwrap() - 0.051).abs() < 1e-15);
        assert_eq!(total_response_latency(0.0, 0.0, 0.0).unwrap(), 0.0);
        assert!((total_response_latency(0.0, 0.095, 0.005).unwrap() - 0.100).abs() < 1e-15);
        assert!(matches!(
            total_response_latency(-0.001, 0.1, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn amortized_examples() {
        assert_eq!(amortized_latency(0.095, 0.0).unwrap(), 0.095);
        assert!((amortized_latency(0.021, 10.0).unwrap() - 0.021 / 0.79).abs() < 1e-15);
        assert!((amortized_latency(0.021, 10.0).unwrap() - 0.0265823).abs() < 1e-7);
        match amortized_latency(0.126, 10.0) {
            Err(Error::UnstableQueue { utilization }) => {
                assert!((utilization - 1.26).abs() < 1e-12)
            }
            other => panic!("expected unstable queue, got {other:?}"),
        }
        assert!(amortized_latency(0.0, 1.0).is_err());
    }

    #[test]
    fn break_even_examples() {
        let be = cloud_break_even(0.095, 0.021, 10.0).unwrap();
        assert!((be - 1.873418).abs() < 1e-6, "{be}");
        assert_eq!(cloud_break_even(0.05, 0.05, 7.0).unwrap(), 0.0);
        assert!((cloud_break_even(0.095, 0.021, 0.0).unwrap() - 0.074).abs() < 1e-15);
        assert!(cloud_break_even(0.126, 0.029, 10.0).is_err());
    }

    #[test]
    fn prefer_cloud_examples() {
        assert!(prefer_cloud(0.022, 0.095, 0.021, 10.0).unwrap().prefer_cloud);
        assert!(!prefer_cloud(1.873418, 0.095, 0.021, 10.0).unwrap().prefer_cloud);
        assert!(!prefer_cloud(0.0, 0.095, 0.095, 10.0).unwrap().prefer_cloud);
        assert!(prefer_cloud(-0.1, 0.095, 0.021, 10.0).is_err());
    }

    #[test]
    fn unstable_cloud_yields_device_with_warning() {
        let p = prefer_cloud(0.0, 0.05, 0.2, 10.0).unwrap();
        assert!(!p.prefer_cloud);
        assert_eq!(p.warning, Some(PreferenceWarning::UnstableCloudQueue));
        // an unstable device queue is still an error
        assert!(prefer_cloud(0.0, 0.2, 0.05, 10.0).is_err());
    }

    #[test]
    fn blows_up_near_saturation() {
        let tau = 0.05;
        let rate = (1.0 - 1e-9) / tau;
        assert!(amortized_latency(tau, rate).unwrap() > 1e6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn zero_rate_is_identity(tau in 1e-4f64..10.0) {
            prop_assert_eq!(amortized_latency(tau, 0.0).unwrap(), tau);
        }

        #[test]
        fn matches_sojourn_form(tau in 1e-3f64..1.0, rho in 0.0f64..0.999) {
            let rate = rho / tau;
            let a = amortized_latency(tau, rate).unwrap();
            let b = 1.0 / (1.0 / tau - rate);
            prop_assert!(((a - b) / b).abs() < 1e-12);
        }

        #[test]
        fn increasing_in_both_arguments(
            tau in 1e-3f64..0.5, rho in 0.0f64..0.95, bump in 1e-3f64..0.05,
        ) {
            let rate = rho / tau;
            let base = amortized_latency(tau, rate).unwrap();
            let more_rate = rate * (1.0 + bump) + bump;
            if more_rate * tau < 1.0 {
                prop_assert!(amortized_latency(tau, more_rate).unwrap() > base);
            }
            let more_tau = tau * (1.0 + bump);
            if rate * more_tau < 1.0 {
                prop_assert!(amortized_latency(more_tau, rate).unwrap() > base);
            }
        }

        #[test]
        fn prefer_cloud_is_break_even_comparison(
            rtt in 0.0f64..0.5, d in 1e-3f64..0.2, c in 1e-3f64..0.2, rate in 0.0f64..4.0,
        ) {
            let p = prefer_cloud(rtt, d, c, rate).unwrap();
            let be = cloud_break_even(d, c, rate).unwrap();
            prop_assert_eq!(p.prefer_cloud, rtt < be);
        }

        #[test]
        fn break_even_grows_with_rate(
            c in 1e-3f64..0.1, ratio in 1.01f64..10.0, r1 in 0.0f64..1.0, r2 in 0.0f64..1.0,
        ) {
            let d = c * ratio;
            let cap = 0.999 / d;
            let (lo, hi) = if r1 <= r2 { (r1 * cap, r2 * cap) } else { (r2 * cap, r1 * cap) };
            let a = cloud_break_even(d, c, lo).unwrap();
            let b = cloud_break_even(d, c, hi).unwrap();
            prop_assert!(b >= a - 1e-15 * b.abs().max(1.0));
        }
    }
}
