//! Event-driven M/M/1 Monte Carlo simulator.
//!
//! Poisson arrivals, exponential service, one FIFO server. The first 10% of
//! customers (by arrival order) are discarded as warm-up; the remaining
//! customers' sojourn and waiting times are averaged. Time-averaged number in
//! system and server utilization are measured over the window that starts at
//! the first measured arrival and ends at the last departure.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::error::{Error, Result};

pub const WARMUP_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mm1Stats {
    pub customers_served: u64,
    /// Customers that entered the averages (served minus warm-up).
    pub customers_measured: u64,
    pub mean_sojourn: f64,
    pub mean_wait: f64,
    /// Time-averaged number in system over the measurement window.
    pub mean_in_system: f64,
    pub utilization_observed: f64,
    pub seed: u64,
    /// Offered load was >= 1; averages do not converge.
    pub diverged: bool,
}

pub fn simulate_mm1(arrival_rate: f64, mean_service: f64, customers: u64, seed: u64) -> Result<Mm1Stats> {
    if !(arrival_rate.is_finite() && arrival_rate > 0.0) {
        return Err(Error::Domain(format!("arrival rate must be > 0, got {arrival_rate}")));
    }
    if !(mean_service.is_finite() && mean_service > 0.0) {
        return Err(Error::Domain(format!("mean service must be > 0, got {mean_service}")));
    }
    if customers == 0 {
        return Err(Error::Domain("need at least one customer".into()));
    }

    let mut arrivals_rng = ChaCha8Rng::seed_from_u64(seed);
    arrivals_rng.set_stream(1);
    let mut service_rng = ChaCha8Rng::seed_from_u64(seed);
    service_rng.set_stream(2);
    let inter_arrival = Exp::new(arrival_rate).expect("positive rate");
    let service = Exp::new(1.0 / mean_service).expect("positive rate");

    let warmup = (customers as f64 * WARMUP_FRACTION).floor() as u64;

    // (arrival index, arrival time) waiting for the server
    let mut waiting: VecDeque<(u64, f64)> = VecDeque::new();
    // (arrival index, arrival time, service start)
    let mut in_service: Option<(u64, f64, f64)> = None;
    let mut next_departure = f64::INFINITY;
    let mut next_arrival = inter_arrival.sample(&mut arrivals_rng);
    let mut arrived: u64 = 0;
    let mut served: u64 = 0;

    let mut now = 0.0f64;
    let mut in_system: u64 = 0;
    let mut window_start: Option<f64> = None;
    let mut area = 0.0f64;
    let mut busy = 0.0f64;

    let mut sojourn_sum = 0.0f64;
    let mut wait_sum = 0.0f64;

    while served < customers {
        let t = next_arrival.min(next_departure);
        if window_start.is_some() {
            let dt = t - now;
            area += in_system as f64 * dt;
            if in_service.is_some() {
                busy += dt;
            }
        }
        now = t;

        if next_arrival <= next_departure {
            let index = arrived;
            arrived += 1;
            if index == warmup {
                window_start = Some(now);
            }
            in_system += 1;
            if in_service.is_none() {
                in_service = Some((index, now, now));
                next_departure = now + service.sample(&mut service_rng);
            } else {
                waiting.push_back((index, now));
            }
            next_arrival = now + inter_arrival.sample(&mut arrivals_rng);
        } else {
            let (index, arrived_at, started_at) = in_service.take().expect("departure without customer");
            served += 1;
            in_system -= 1;
            if index >= warmup {
                sojourn_sum += now - arrived_at;
                wait_sum += started_at - arrived_at;
            }
            match waiting.pop_front() {
                Some((next_index, next_arrived)) => {
                    in_service = Some((next_index, next_arrived, now));
                    next_departure = now + service.sample(&mut service_rng);
                }
                None => next_departure = f64::INFINITY,
            }
        }
    }

    let measured = customers - warmup;
    let window = now - window_start.unwrap_or(now);
    let (mean_in_system, utilization_observed) = if window > 0.0 {
        (area / window, busy / window)
    } else {
        (0.0, 0.0)
    };

    Ok(Mm1Stats {
        customers_served: served,
        customers_measured: measured,
        mean_sojourn: sojourn_sum / measured as f64,
        mean_wait: wait_sum / measured as f64,
        mean_in_system,
        utilization_observed,
        seed,
        diverged: arrival_rate * mean_service >= 1.0,
    })
}
