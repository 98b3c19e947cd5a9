//! Discrete-event simulation of the perception-to-action braking loop.
//!
//! The ego vehicle drives toward a static obstacle at constant speed.
//! Frames are captured at `n / F`. Each frame travels half the sampled
//! round-trip delay to the inference platform and waits in a FIFO
//! single-server queue, which it may share with Poisson background jobs.
//! After service it travels the other half back. Results are consumed in
//! frame order. Once `confirm_frames` consecutive detecting frames have been
//! received, a brake command is issued. Braking force follows after the
//! control delay and the vehicle then decelerates uniformly until it stops
//! or reaches the obstacle.
//!
//! Runs are bit-reproducible per seed. Independent random streams are used
//! for network delays, service times, detection draws, background arrivals
//! and frame jitter, so enabling one source of randomness never perturbs
//! another.

pub mod output;
pub mod scenario;
pub mod sweep;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::catalog::{ModelProfile, PlatformKind, PlatformSpec, SensingConfig};
use crate::error::{Error, Result};
use crate::kinematics::BrakingScenario;
use crate::netmodel::LatencySampler;

/// Slack added to the nominal time-to-impact before a run is aborted.
pub const HORIZON_SLACK_S: f64 = 60.0;

/// Fraction of frames discarded before averaging in open-loop runs.
pub const OPEN_LOOP_WARMUP: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadScenario {
    /// Obstacle position relative to the vehicle at t = 0, metres.
    pub gap: f64,
    pub initial_speed: f64,
    pub deceleration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionModel {
    /// Obstacle distance at or below which the deployed model can fire.
    pub detection_range: f64,
    pub per_frame_probability: f64,
    /// Distance at which the obstacle becomes visible at all (`t_obs`).
    pub visibility_range: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ServiceDistribution {
    Deterministic,
    Exponential,
}

/// How capture instants are spaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FrameArrivals {
    /// Captures at exactly `n / F`.
    #[default]
    Periodic,
    /// Exponential inter-capture gaps with rate `F`.
    Poisson,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub scenario: RoadScenario,
    pub profile: ModelProfile,
    pub platform: PlatformSpec,
    pub sensing: SensingConfig,
    /// Round-trip delay source; required for cloud platforms, ignored on device.
    pub network: Option<LatencySampler>,
    pub detection: DetectionModel,
    pub confirm_frames: u32,
    pub service_distribution: ServiceDistribution,
    pub background_arrival_rate: f64,
    /// Multiplier on the profiled inference latency (contention inflation).
    pub service_scale: f64,
    pub frame_arrivals: FrameArrivals,
    pub seed: u64,
}

impl SimConfig {
    /// A deterministic single-frame-confirmation config.
    pub fn new(
        scenario: RoadScenario,
        profile: ModelProfile,
        platform: PlatformSpec,
        sensing: SensingConfig,
        network: Option<LatencySampler>,
        detection: DetectionModel,
    ) -> Self {
        SimConfig {
            scenario,
            profile,
            platform,
            sensing,
            network,
            detection,
            confirm_frames: 1,
            service_distribution: ServiceDistribution::Deterministic,
            background_arrival_rate: 0.0,
            service_scale: 1.0,
            frame_arrivals: FrameArrivals::Periodic,
            seed: 0,
        }
    }

    fn validate_pipeline(&self) -> Result<()> {
        self.sensing.validate()?;
        let invalid = |msg: String| Err(Error::Validation(msg));
        if self.profile.platform_id != self.platform.platform_id {
            return invalid(format!(
                "profile platform `{}` does not match platform `{}`",
                self.profile.platform_id, self.platform.platform_id
            ));
        }
        if !(self.profile.inference_latency.is_finite() && self.profile.inference_latency > 0.0) {
            return invalid(format!(
                "inference latency must be > 0, got {}",
                self.profile.inference_latency
            ));
        }
        if self.platform.kind == PlatformKind::Cloud {
            match &self.network {
                Some(n) => n.validate()?,
                None => return invalid("cloud platform needs a network sampler".into()),
            }
        }
        if self.confirm_frames == 0 {
            return invalid("confirm_frames must be >= 1".into());
        }
        if !(self.background_arrival_rate.is_finite() && self.background_arrival_rate >= 0.0) {
            return invalid(format!(
                "background arrival rate must be >= 0, got {}",
                self.background_arrival_rate
            ));
        }
        if !(self.service_scale.is_finite() && self.service_scale > 0.0) {
            return invalid(format!("service scale must be > 0, got {}", self.service_scale));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_pipeline()?;
        let invalid = |msg: String| Err(Error::Validation(msg));
        let s = &self.scenario;
        for (name, v) in [
            ("initial speed", s.initial_speed),
            ("deceleration", s.deceleration),
            ("gap", s.gap),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("{name} must be > 0, got {v}"));
            }
        }
        let d = &self.detection;
        if !(d.detection_range > 0.0 && d.detection_range <= d.visibility_range) {
            return invalid(format!(
                "need 0 < detection range ({}) <= visibility range ({})",
                d.detection_range, d.visibility_range
            ));
        }
        if !(d.per_frame_probability > 0.0 && d.per_frame_probability <= 1.0) {
            return invalid(format!(
                "per-frame detection probability must lie in (0, 1], got {}",
                d.per_frame_probability
            ));
        }
        if s.gap.is_nan() || s.gap <= d.visibility_range {
            return invalid(format!(
                "obstacle gap ({}) must exceed the visibility range ({})",
                s.gap, d.visibility_range
            ));
        }
        Ok(())
    }

    /// Time at which the obstacle becomes visible.
    pub fn t_obs(&self) -> f64 {
        (self.scenario.gap - self.detection.visibility_range) / self.scenario.initial_speed
    }

    /// Earliest instant the obstacle is inside the detection range.
    pub fn earliest_detectable(&self) -> f64 {
        (self.scenario.gap - self.detection.detection_range) / self.scenario.initial_speed
    }

    /// The braking scenario seen from the moment the obstacle becomes visible.
    pub fn scenario_at_obs(&self) -> Result<BrakingScenario> {
        BrakingScenario::new(
            self.scenario.initial_speed,
            self.scenario.deceleration,
            self.detection.visibility_range,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    FrameCaptured,
    FrameArrivedAtPlatform,
    InferenceStarted,
    InferenceCompleted,
    ResultReceived,
    BrakeIssued,
    /// Braking force engaged, `control_delay` after `BrakeIssued`.
    BrakeApplied,
    VehicleStopped,
    Collision,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimEvent {
    pub time: f64,
    pub kind: EventKind,
    pub frame_index: Option<u64>,
    pub vehicle_position: f64,
    pub obstacle_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Safe,
    Collision,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Safe => "safe",
            Outcome::Collision => "collision",
        })
    }
}

/// Timing of the frame whose result completed the confirming streak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriggerTiming {
    pub frame_index: u64,
    pub captured: f64,
    pub rtt: f64,
    pub received: f64,
}

impl TriggerTiming {
    /// Capture-to-receive time minus the network round trip.
    pub fn response_minus_network(&self) -> f64 {
        self.received - self.captured - self.rtt
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub events: Vec<SimEvent>,
    pub t_obs: f64,
    pub t_det: Option<f64>,
    pub t_brake_issued: Option<f64>,
    pub t_brake: Option<f64>,
    pub t_stop: Option<f64>,
    /// Obstacle distance when the first frame of the confirming streak was captured.
    pub d_capture: Option<f64>,
    pub d_brake: Option<f64>,
    /// Obstacle distance at standstill. After a collision this is the
    /// (non-positive) distance the uninterrupted braking curve would have
    /// ended at.
    pub d_stop: Option<f64>,
    pub detection_delay: Option<f64>,
    pub outcome: Outcome,
    /// `d_stop` when braking started; otherwise minus the full braking distance.
    pub margin: f64,
    pub total_inference_energy: f64,
    pub dispatched_frames: u64,
    pub trigger: Option<TriggerTiming>,
}

/// Latency statistics of an open-loop run (braking disabled).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseStats {
    pub frames: u64,
    pub frames_measured: u64,
    /// Mean capture-to-receive time.
    pub mean_response: f64,
    pub mean_rtt: f64,
    /// Mean of (response - rtt): queueing plus service.
    pub mean_platform_time: f64,
    pub background_jobs: u64,
}

/// Runs one braking episode.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let horizon = config.scenario.gap / config.scenario.initial_speed + HORIZON_SLACK_S;
    Engine::new(config, Mode::ClosedLoop, horizon).run_closed()
}

/// Runs `frames` frames through the pipeline with braking disabled and
/// reports mean latencies over the frames after warm-up.
pub fn run_open_loop(config: &SimConfig, frames: u64) -> Result<ResponseStats> {
    config.validate_pipeline()?;
    if frames == 0 {
        return Err(Error::Validation("open-loop run needs at least one frame".into()));
    }
    let horizon = 2.0 * frames as f64 / config.sensing.frame_rate + HORIZON_SLACK_S;
    Engine::new(config, Mode::OpenLoop { frames }, horizon).run_open()
}

// ---- engine ----

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    ClosedLoop,
    OpenLoop { frames: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Job {
    Frame(u64),
    Background,
}

#[derive(Debug, Clone, Copy)]
enum Ev {
    Capture(u64),
    Arrive(Job),
    Complete,
    Receive(u64),
    Background,
    BrakeApply,
    Stop(u32),
    Impact(u32),
}

struct Scheduled {
    time: f64,
    seq: u64,
    ev: Ev,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    // reversed: BinaryHeap pops the earliest (time, seq) first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.seq.cmp(&self.seq))
    }
}

struct FrameState {
    captured: f64,
    rtt: f64,
    detecting: bool,
    received: Option<f64>,
}

struct Streams {
    network: ChaCha8Rng,
    service: ChaCha8Rng,
    detection: ChaCha8Rng,
    background: ChaCha8Rng,
    frames: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        Streams {
            network: stream(1),
            service: stream(2),
            detection: stream(3),
            background: stream(4),
            frames: stream(5),
        }
    }
}

enum Terminal {
    Stopped,
    Collided,
}

struct Engine<'a> {
    cfg: &'a SimConfig,
    mode: Mode,
    horizon: f64,
    heap: BinaryHeap<Scheduled>,
    seq: u64,
    rng: Streams,
    record: bool,
    events: Vec<SimEvent>,

    queue: VecDeque<Job>,
    busy: Option<Job>,
    background_jobs: u64,

    frames: Vec<FrameState>,
    next_in_order: usize,
    received_count: u64,
    streak: u32,
    streak_start: usize,

    trigger: Option<TriggerTiming>,
    t_det: Option<f64>,
    t_brake_issued: Option<f64>,
    brake: Option<(f64, f64)>,
    epoch: u32,
    capturing: bool,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a SimConfig, mode: Mode, horizon: f64) -> Self {
        Engine {
            cfg,
            mode,
            horizon,
            heap: BinaryHeap::new(),
            seq: 0,
            rng: Streams::new(cfg.seed),
            record: mode == Mode::ClosedLoop,
            events: Vec::new(),
            queue: VecDeque::new(),
            busy: None,
            background_jobs: 0,
            frames: Vec::new(),
            next_in_order: 0,
            received_count: 0,
            streak: 0,
            streak_start: 0,
            trigger: None,
            t_det: None,
            t_brake_issued: None,
            brake: None,
            epoch: 0,
            capturing: true,
        }
    }

    fn schedule(&mut self, time: f64, ev: Ev) {
        self.heap.push(Scheduled {
            time,
            seq: self.seq,
            ev,
        });
        self.seq += 1;
    }

    fn position(&self, t: f64) -> f64 {
        let v0 = self.cfg.scenario.initial_speed;
        match self.brake {
            None => v0 * t,
            Some((tb, xb)) => {
                let a = self.cfg.scenario.deceleration;
                let dt = (t - tb).clamp(0.0, v0 / a);
                xb + v0 * dt - 0.5 * a * dt * dt
            }
        }
    }

    fn emit(&mut self, time: f64, kind: EventKind, frame: Option<u64>) {
        if !self.record {
            return;
        }
        let x = self.position(time);
        self.events.push(SimEvent {
            time,
            kind,
            frame_index: frame,
            vehicle_position: x,
            obstacle_distance: self.cfg.scenario.gap - x,
        });
    }

    fn service_time(&mut self) -> f64 {
        let mean = self.cfg.profile.inference_latency * self.cfg.service_scale;
        match self.cfg.service_distribution {
            ServiceDistribution::Deterministic => mean,
            ServiceDistribution::Exponential => {
                Exp::new(1.0 / mean).expect("positive rate").sample(&mut self.rng.service)
            }
        }
    }

    fn start_service(&mut self, now: f64, job: Job) {
        if let Job::Frame(n) = job {
            self.emit(now, EventKind::InferenceStarted, Some(n));
        }
        let s = self.service_time();
        self.busy = Some(job);
        self.schedule(now + s, Ev::Complete);
    }

    fn enqueue(&mut self, now: f64, job: Job) {
        if self.busy.is_none() {
            self.start_service(now, job);
        } else {
            self.queue.push_back(job);
        }
    }

    fn next_capture_time(&mut self, n: u64, now: f64) -> f64 {
        let f = self.cfg.sensing.frame_rate;
        match self.cfg.frame_arrivals {
            FrameArrivals::Periodic => (n + 1) as f64 / f,
            FrameArrivals::Poisson => {
                now + Exp::new(f).expect("positive rate").sample(&mut self.rng.frames)
            }
        }
    }

    fn on_capture(&mut self, now: f64, n: u64) {
        if !self.capturing || self.brake.is_some() {
            self.capturing = false;
            return;
        }
        if let Mode::OpenLoop { frames } = self.mode {
            if n >= frames {
                self.capturing = false;
                return;
            }
        }
        let detecting = match self.mode {
            Mode::OpenLoop { .. } => false,
            Mode::ClosedLoop => {
                let distance = self.cfg.scenario.gap - self.position(now);
                let p = self.cfg.detection.per_frame_probability;
                distance <= self.cfg.detection.detection_range
                    && (p >= 1.0 || self.rng.detection.random::<f64>() < p)
            }
        };
        let rtt = match (self.cfg.platform.kind, &self.cfg.network) {
            (PlatformKind::Cloud, Some(sampler)) => sampler.sample(&mut self.rng.network),
            _ => 0.0,
        };
        self.emit(now, EventKind::FrameCaptured, Some(n));
        self.frames.push(FrameState {
            captured: now,
            rtt,
            detecting,
            received: None,
        });
        self.schedule(now + rtt / 2.0, Ev::Arrive(Job::Frame(n)));
        let next = self.next_capture_time(n, now);
        self.schedule(next, Ev::Capture(n + 1));
    }

    fn on_arrive(&mut self, now: f64, job: Job) {
        if let Job::Frame(n) = job {
            self.emit(now, EventKind::FrameArrivedAtPlatform, Some(n));
        }
        self.enqueue(now, job);
    }

    fn on_complete(&mut self, now: f64) {
        let job = self.busy.take().expect("completion with idle server");
        if let Job::Frame(n) = job {
            self.emit(now, EventKind::InferenceCompleted, Some(n));
            let rtt = self.frames[n as usize].rtt;
            self.schedule(now + rtt / 2.0, Ev::Receive(n));
        }
        if let Some(next) = self.queue.pop_front() {
            self.start_service(now, next);
        }
    }

    fn on_background(&mut self, now: f64) {
        self.background_jobs += 1;
        self.enqueue(now, Job::Background);
        let rate = self.cfg.background_arrival_rate;
        let gap = Exp::new(rate).expect("positive rate").sample(&mut self.rng.background);
        self.schedule(now + gap, Ev::Background);
    }

    fn on_receive(&mut self, now: f64, n: u64) {
        self.emit(now, EventKind::ResultReceived, Some(n));
        self.frames[n as usize].received = Some(now);
        self.received_count += 1;
        if self.mode != Mode::ClosedLoop {
            return;
        }
        while self.next_in_order < self.frames.len() {
            let idx = self.next_in_order;
            if self.frames[idx].received.is_none() {
                break;
            }
            self.next_in_order += 1;
            if self.t_brake_issued.is_some() {
                continue;
            }
            if self.frames[idx].detecting {
                if self.streak == 0 {
                    self.streak_start = idx;
                }
                self.streak += 1;
                if self.streak >= self.cfg.confirm_frames {
                    self.issue_brake(now, idx);
                }
            } else {
                self.streak = 0;
            }
        }
    }

    fn issue_brake(&mut self, now: f64, last: usize) {
        let f = &self.frames[last];
        self.trigger = Some(TriggerTiming {
            frame_index: last as u64,
            captured: f.captured,
            rtt: f.rtt,
            received: f.received.expect("trigger frame received"),
        });
        self.t_det = Some(self.frames[self.streak_start].captured);
        self.t_brake_issued = Some(now);
        self.emit(now, EventKind::BrakeIssued, None);
        self.schedule(now + self.cfg.sensing.control_delay, Ev::BrakeApply);
    }

    fn on_brake_apply(&mut self, now: f64) {
        let x = self.position(now);
        self.brake = Some((now, x));
        self.capturing = false;
        self.epoch += 1;
        self.emit(now, EventKind::BrakeApplied, None);

        let v0 = self.cfg.scenario.initial_speed;
        let a = self.cfg.scenario.deceleration;
        let remaining = self.cfg.scenario.gap - x;
        let braking = v0 * v0 / (2.0 * a);
        if braking < remaining {
            self.schedule(now + v0 / a, Ev::Stop(self.epoch));
        } else {
            // first root of v0 t - a t^2 / 2 = remaining
            let disc = (v0 * v0 - 2.0 * a * remaining).max(0.0);
            let t = (v0 - disc.sqrt()) / a;
            self.schedule(now + t, Ev::Impact(self.epoch));
        }
    }

    fn pop(&mut self) -> Result<Option<(f64, Ev)>> {
        match self.heap.pop() {
            None => Ok(None),
            Some(s) if s.time > self.horizon => Err(Error::Horizon {
                time: s.time,
                limit: self.horizon,
            }),
            Some(s) => Ok(Some((s.time, s.ev))),
        }
    }

    fn dispatch(&mut self, now: f64, ev: Ev) -> Option<Terminal> {
        match ev {
            Ev::Capture(n) => self.on_capture(now, n),
            Ev::Arrive(job) => self.on_arrive(now, job),
            Ev::Complete => self.on_complete(now),
            Ev::Receive(n) => self.on_receive(now, n),
            Ev::Background => self.on_background(now),
            Ev::BrakeApply => self.on_brake_apply(now),
            Ev::Stop(epoch) if epoch == self.epoch => {
                self.emit(now, EventKind::VehicleStopped, None);
                return Some(Terminal::Stopped);
            }
            Ev::Impact(epoch) if epoch == self.epoch => {
                self.emit(now, EventKind::Collision, None);
                return Some(Terminal::Collided);
            }
            Ev::Stop(_) | Ev::Impact(_) => {}
        }
        None
    }

    fn seed_events(&mut self) {
        self.schedule(0.0, Ev::Capture(0));
        let rate = self.cfg.background_arrival_rate;
        if rate > 0.0 {
            let first = Exp::new(rate).expect("positive rate").sample(&mut self.rng.background);
            self.schedule(first, Ev::Background);
        }
    }

    fn run_closed(mut self) -> Result<SimResult> {
        self.seed_events();
        let impact = self.cfg.scenario.gap / self.cfg.scenario.initial_speed;
        self.schedule(impact, Ev::Impact(0));

        let (end, terminal) = loop {
            let Some((now, ev)) = self.pop()? else {
                unreachable!("impact event is always pending");
            };
            if let Some(t) = self.dispatch(now, ev) {
                break (now, t);
            }
        };

        let cfg = self.cfg;
        let gap = cfg.scenario.gap;
        let v0 = cfg.scenario.initial_speed;
        let braking = v0 * v0 / (2.0 * cfg.scenario.deceleration);
        let t_obs = cfg.t_obs();
        let d_capture = self.t_det.map(|t| gap - v0 * t);
        let d_brake = self.brake.map(|(_, x)| gap - x);
        let d_stop = self.brake.map(|(_, x)| gap - (x + braking));
        let (outcome, t_stop) = match terminal {
            Terminal::Stopped => (Outcome::Safe, Some(end)),
            Terminal::Collided => (Outcome::Collision, None),
        };
        let dispatched = self.frames.len() as u64;
        Ok(SimResult {
            events: self.events,
            t_obs,
            t_det: self.t_det,
            t_brake_issued: self.t_brake_issued,
            t_brake: self.brake.map(|(t, _)| t),
            t_stop,
            d_capture,
            d_brake,
            d_stop,
            detection_delay: self.t_det.map(|t| t - t_obs),
            outcome,
            margin: d_stop.unwrap_or(-braking),
            total_inference_energy: dispatched as f64 * cfg.profile.energy_per_inference,
            dispatched_frames: dispatched,
            trigger: self.trigger,
        })
    }

    fn run_open(mut self) -> Result<ResponseStats> {
        let Mode::OpenLoop { frames } = self.mode else {
            unreachable!()
        };
        self.seed_events();
        while self.received_count < frames {
            let Some((now, ev)) = self.pop()? else {
                break;
            };
            self.dispatch(now, ev);
        }
        let warmup = (frames as f64 * OPEN_LOOP_WARMUP).floor() as usize;
        let measured = &self.frames[warmup..];
        let n = measured.len() as f64;
        let (mut resp, mut rtt) = (0.0, 0.0);
        for f in measured {
            let r = f.received.expect("all frames received") - f.captured;
            resp += r;
            rtt += f.rtt;
        }
        Ok(ResponseStats {
            frames,
            frames_measured: measured.len() as u64,
            mean_response: resp / n,
            mean_rtt: rtt / n,
            mean_platform_time: (resp - rtt) / n,
            background_jobs: self.background_jobs,
        })
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    pub fn device_profile(latency: f64) -> (ModelProfile, PlatformSpec) {
        (
            ModelProfile {
                model_id: "YOLO11m".into(),
                platform_id: "jetson".into(),
                inference_latency: latency,
                energy_per_inference: 0.58,
                accuracy: 51.5,
            },
            PlatformSpec {
                platform_id: "jetson".into(),
                kind: PlatformKind::Device,
                energy_budget: None,
                network_ref: None,
            },
        )
    }

    pub fn cloud_profile(latency: f64) -> (ModelProfile, PlatformSpec) {
        (
            ModelProfile {
                model_id: "YOLO11x".into(),
                platform_id: "a5000".into(),
                inference_latency: latency,
                energy_per_inference: 1.66,
                accuracy: 54.7,
            },
            PlatformSpec {
                platform_id: "a5000".into(),
                kind: PlatformKind::Cloud,
                energy_budget: None,
                network_ref: Some("net".into()),
            },
        )
    }

    /// 300 m gap, 40 mph, a = 6, 10 fps, detection 120 m, visibility 140 m,
    /// cloud with a fixed RTT.
    pub fn baseline(rtt: f64, latency: f64) -> SimConfig {
        let (profile, platform) = cloud_profile(latency);
        SimConfig::new(
            RoadScenario {
                gap: 300.0,
                initial_speed: 17.8816,
                deceleration: 6.0,
            },
            profile,
            platform,
            SensingConfig::new(10.0, 0.0).unwrap(),
            Some(LatencySampler::fixed(rtt).unwrap()),
            DetectionModel {
                detection_range: 120.0,
                per_frame_probability: 1.0,
                visibility_range: 140.0,
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    #[test]
    fn deterministic_baseline_trace() {
        let r = run(&baseline(0.022, 0.029)).unwrap();
        assert_eq!(r.outcome, Outcome::Safe);
        assert!((r.t_det.unwrap() - 10.1).abs() < 1e-12);
        assert!((r.d_capture.unwrap() - 119.39584).abs() < 1e-9);
        assert!((r.t_brake.unwrap() - 10.151).abs() < 1e-12);
        let v0: f64 = 17.8816;
        let closed_form = 119.39584 - (v0 * 0.051 + v0 * v0 / 12.0);
        assert!((r.d_stop.unwrap() - closed_form).abs() < 1e-6, "{:?}", r.d_stop);
        assert!((r.d_stop.unwrap() - 91.836).abs() < 5e-3);
        assert_eq!(r.trigger.unwrap().frame_index, 101);
    }

    #[test]
    fn events_are_time_ordered_and_lifecycles_ordered() {
        let mut cfg = baseline(0.022, 0.029);
        cfg.background_arrival_rate = 5.0;
        cfg.service_distribution = ServiceDistribution::Exponential;
        cfg.seed = 11;
        let r = run(&cfg).unwrap();
        assert!(r.events.windows(2).all(|w| w[0].time <= w[1].time));
        let order = [
            EventKind::FrameCaptured,
            EventKind::FrameArrivedAtPlatform,
            EventKind::InferenceStarted,
            EventKind::InferenceCompleted,
            EventKind::ResultReceived,
        ];
        let mut stage = std::collections::HashMap::<u64, usize>::new();
        for e in &r.events {
            if let Some(n) = e.frame_index {
                let pos = order.iter().position(|k| *k == e.kind).unwrap();
                let prev = stage.insert(n, pos);
                assert_eq!(prev.map_or(0, |p| p + 1), pos, "frame {n} out of order");
            }
        }
    }

    #[test]
    fn empty_queue_means_immediate_start() {
        let r = run(&baseline(0.022, 0.029)).unwrap();
        let arrivals: Vec<_> = r
            .events
            .iter()
            .filter(|e| e.kind == EventKind::FrameArrivedAtPlatform)
            .collect();
        let starts: Vec<_> = r
            .events
            .iter()
            .filter(|e| e.kind == EventKind::InferenceStarted)
            .collect();
        assert_eq!(arrivals.len(), starts.len());
        for (a, s) in arrivals.iter().zip(&starts) {
            assert_eq!(a.frame_index, s.frame_index);
            assert_eq!(a.time, s.time);
        }
    }

    #[test]
    fn energy_counts_dispatched_frames() {
        let r = run(&baseline(0.022, 0.029)).unwrap();
        let captured = r
            .events
            .iter()
            .filter(|e| e.kind == EventKind::FrameCaptured)
            .count() as u64;
        assert_eq!(captured, r.dispatched_frames);
        assert_eq!(r.total_inference_energy, r.dispatched_frames as f64 * 1.66);
    }

    #[test]
    fn huge_rtt_collides() {
        let r = run(&baseline(6.0, 0.029)).unwrap();
        assert_eq!(r.outcome, Outcome::Collision);
        assert!(r.t_stop.is_none());
        assert!(r.d_stop.unwrap() <= 0.0);
        assert_eq!(r.events.last().unwrap().kind, EventKind::Collision);
    }

    #[test]
    fn never_braking_hits_at_gap_over_speed() {
        let r = run(&baseline(40.0, 0.029)).unwrap();
        assert_eq!(r.outcome, Outcome::Collision);
        assert!(r.t_brake.is_none());
        let last = r.events.last().unwrap();
        assert!((last.time - 300.0 / 17.8816).abs() < 1e-12);
        assert!(r.margin < 0.0);
    }

    #[test]
    fn invariants_rejected() {
        let mut c = baseline(0.022, 0.029);
        c.scenario.initial_speed = 0.0;
        assert!(matches!(run(&c), Err(Error::Validation(_))));

        let mut c = baseline(0.022, 0.029);
        c.scenario.gap = 140.0;
        assert!(matches!(run(&c), Err(Error::Validation(_))));

        let mut c = baseline(0.022, 0.029);
        c.detection.detection_range = 150.0;
        assert!(matches!(run(&c), Err(Error::Validation(_))));

        let mut c = baseline(0.022, 0.029);
        c.network = None;
        assert!(matches!(run(&c), Err(Error::Validation(_))));

        let mut c = baseline(0.022, 0.029);
        c.confirm_frames = 0;
        assert!(matches!(run(&c), Err(Error::Validation(_))));
    }

    #[test]
    fn confirmation_streak_delays_braking() {
        let one = run(&baseline(0.022, 0.029)).unwrap();
        let mut cfg = baseline(0.022, 0.029);
        cfg.confirm_frames = 3;
        let three = run(&cfg).unwrap();
        // t_det is the first frame of the streak; braking waits two more frames
        assert_eq!(one.t_det, three.t_det);
        assert!((three.t_brake.unwrap() - one.t_brake.unwrap() - 0.2).abs() < 1e-9);
    }

    #[test]
    fn control_delay_shifts_brake() {
        let mut cfg = baseline(0.022, 0.029);
        cfg.sensing.control_delay = 0.05;
        let r = run(&cfg).unwrap();
        assert!((r.t_brake_issued.unwrap() - 10.151).abs() < 1e-12);
        assert!((r.t_brake.unwrap() - 10.201).abs() < 1e-12);
    }

    #[test]
    fn device_queue_builds_when_overloaded() {
        let (profile, platform) = device_profile(0.126);
        let mut cfg = baseline(0.0, 0.126);
        cfg.profile = profile;
        cfg.platform = platform;
        cfg.network = None;
        let r = run(&cfg).unwrap();
        // rho = 1.26: waits accumulate, so the trigger frame's response exceeds service
        let t = r.trigger.unwrap();
        assert!(t.response_minus_network() > 0.126 + 1.0);
    }

    #[test]
    fn probabilistic_detection_is_seed_reproducible() {
        let mut cfg = baseline(0.022, 0.029);
        cfg.detection.per_frame_probability = 0.3;
        cfg.seed = 99;
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.t_det.unwrap() >= 10.1 - 1e-12);
    }

    #[test]
    fn open_loop_deterministic_response() {
        let cfg = baseline(0.022, 0.029);
        let s = run_open_loop(&cfg, 1000).unwrap();
        assert!((s.mean_response - 0.051).abs() < 1e-12);
        assert!((s.mean_platform_time - 0.029).abs() < 1e-12);
    }

    #[test]
    fn horizon_guard_fires() {
        let cfg = baseline(0.022, 0.029);
        let engine = Engine::new(&cfg, Mode::ClosedLoop, 1.0);
        assert!(matches!(engine.run_closed(), Err(Error::Horizon { .. })));
    }
}
