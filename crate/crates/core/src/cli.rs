//! `placesim` command-line front end.
//!
//! Exit codes: 0 success, 1 configuration error, 2 empty feasible set,
//! 3 collision, 4 horizon guard abort, 5 partial sweep, 6 queue validation
//! outside tolerance.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::catalog::{load_catalog, Catalog, PlatformKind};
use crate::error::Error;
use crate::feasibility::{self, FeasibilityOptions, NetworkPoint};
use crate::kinematics::{self, mph_to_mps, BrakingScenario, VehicleClass};
use crate::latency::{self, QueueModel};
use crate::manifest::RunManifest;
use crate::netmodel::PercentileMode;
use crate::queue_mc;
use crate::sim::output::{self, RunKey, SUMMARY_HEADER, TRACE_HEADER};
use crate::sim::scenario::load_scenario;
use crate::sim::sweep::{self, load_sweep};
use crate::sim::{self, Outcome};

pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const EMPTY_FEASIBLE_SET: i32 = 2;
    pub const COLLISION: i32 = 3;
    pub const HORIZON: i32 = 4;
    pub const PARTIAL_SWEEP: i32 = 5;
    pub const TOLERANCE: i32 = 6;
}

/// Relative error accepted by `validate-queue`.
pub const QUEUE_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Jsonl,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "placesim", version, about = "Device-vs-cloud inference placement for emergency braking")]
pub struct Cli {
    /// Catalog (place/analyze), scenario (simulate) or sweep file, when not given positionally.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, env = "PLACESIM_SEED")]
    pub seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Feasibility table and accuracy-optimal pair per platform kind.
    Place {
        catalog: Option<PathBuf>,
        /// Network point: p10, p50, p90 or a fraction in [0, 1].
        #[arg(long, default_value = "p50")]
        percentile: String,
        /// Use this round-trip delay (seconds) for every cloud platform.
        #[arg(long)]
        rtt: Option<f64>,
        /// Use queue-amortized inference latency at the frame rate.
        #[arg(long)]
        amortized: bool,
    },
    /// Amortized latencies, break-even delays and braking budgets.
    Analyze {
        catalog: Option<PathBuf>,
        /// Scenario file supplying speed, deceleration and available distance.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        kinematics: bool,
        #[arg(long = "break-even")]
        break_even: bool,
        /// Available distance for the kinematics grid, metres.
        #[arg(long, default_value_t = 100.0)]
        available_m: f64,
        #[arg(long, default_value = "p50")]
        percentile: String,
    },
    /// Run one braking scenario.
    Simulate {
        scenario: Option<PathBuf>,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long)]
        summary_out: Option<PathBuf>,
    },
    /// Run a parameter grid.
    Sweep {
        sweep: Option<PathBuf>,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the M/M/1 closed form against Monte Carlo.
    ValidateQueue {
        #[arg(long)]
        rho: f64,
        /// Mean service time, seconds.
        #[arg(long, default_value_t = 0.05)]
        service: f64,
        #[arg(long, default_value_t = 1_000_000)]
        customers: u64,
        /// Treat rho >= 1 as a configuration error.
        #[arg(long)]
        strict: bool,
    },
}

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    format: Format,
    quiet: bool,
    seed: Option<u64>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let mut ctx = Ctx {
        out,
        err,
        format: cli.format,
        quiet: cli.quiet,
        seed: cli.seed,
    };
    let config = cli.config;
    let pick = |positional: Option<PathBuf>, what: &str| -> Result<PathBuf, Error> {
        positional
            .or_else(|| config.clone())
            .ok_or_else(|| Error::Config(format!("missing {what} path")))
    };

    let result = match cli.command {
        Command::Place {
            catalog,
            percentile,
            rtt,
            amortized,
        } => pick(catalog, "catalog")
            .and_then(|p| cmd_place(&mut ctx, &p, &percentile, rtt, amortized)),
        Command::Analyze {
            catalog,
            scenario,
            kinematics,
            break_even,
            available_m,
            percentile,
        } => pick(catalog, "catalog").and_then(|p| {
            cmd_analyze(
                &mut ctx,
                &p,
                scenario.as_deref(),
                kinematics,
                break_even,
                available_m,
                &percentile,
            )
        }),
        Command::Simulate {
            scenario,
            trace_out,
            summary_out,
        } => pick(scenario, "scenario").and_then(|p| {
            cmd_simulate(&mut ctx, &p, trace_out.as_deref(), summary_out.as_deref())
        }),
        Command::Sweep { sweep, jobs, out } => {
            pick(sweep, "sweep").and_then(|p| cmd_sweep(&mut ctx, &p, jobs, out.as_deref()))
        }
        Command::ValidateQueue {
            rho,
            service,
            customers,
            strict,
        } => cmd_validate_queue(&mut ctx, rho, service, customers, strict),
    };

    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(ctx.err, "error: {e}");
            match e {
                Error::Horizon { .. } => exit::HORIZON,
                _ => exit::CONFIG,
            }
        }
    }
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn stdout_err(e: io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn parse_fraction(s: &str) -> Result<f64, Error> {
    if let Ok(mode) = s.parse::<PercentileMode>() {
        return Ok(mode.fraction());
    }
    let q: f64 = s
        .parse()
        .map_err(|_| Error::Config(format!("bad percentile `{s}`; use p10/p50/p90 or a fraction")))?;
    if (0.0..=1.0).contains(&q) {
        Ok(q)
    } else {
        Err(Error::Config(format!("percentile fraction {q} outside [0, 1]")))
    }
}

fn network_point(catalog: &Catalog, percentile: &str, rtt: Option<f64>) -> Result<NetworkPoint, Error> {
    match rtt {
        Some(v) => Ok(feasibility::uniform_network_point(catalog, v)),
        None => feasibility::network_point_at(catalog, parse_fraction(percentile)?),
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(output::fmt_g6).unwrap_or_else(|| "-".into())
}

fn cmd_place(
    ctx: &mut Ctx<'_>,
    path: &Path,
    percentile: &str,
    rtt: Option<f64>,
    amortized: bool,
) -> Result<i32, Error> {
    let catalog = load_catalog(path)?;
    let point = network_point(&catalog, percentile, rtt)?;
    let report = feasibility::feasibility_set(
        &catalog,
        &catalog.sensing,
        &point,
        FeasibilityOptions { amortized },
    )?;
    let per_kind = report.select_per_kind();
    let overall = feasibility::select_optimal(report.clone()).selected;
    let out = &mut *ctx.out;

    match ctx.format {
        Format::Jsonl => {
            for e in &report.evaluated {
                let mut v = serde_json::to_value(e).expect("serializable");
                v["type"] = json!("pair");
                if !e.total_latency.is_finite() {
                    v["total_latency"] = json!(null);
                    v["inference_latency"] = json!(null);
                }
                writeln!(out, "{v}").map_err(stdout_err)?;
            }
            for (kind, sel) in &per_kind {
                writeln!(out, "{}", json!({"type": "selection", "kind": kind, "selected": sel}))
                    .map_err(stdout_err)?;
            }
            writeln!(out, "{}", json!({"type": "selection", "kind": "overall", "selected": overall}))
                .map_err(stdout_err)?;
        }
        Format::Csv => {
            writeln!(out, "model,platform,kind,network_s,inference_s,total_s,energy_j,accuracy,feasible,reject_reason")
                .map_err(stdout_err)?;
            for e in &report.evaluated {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    e.model_id,
                    e.platform_id,
                    e.kind,
                    output::fmt_g6(e.network_delay),
                    output::fmt_g6(e.inference_latency),
                    output::fmt_g6(e.total_latency),
                    output::fmt_g6(e.energy),
                    output::fmt_g6(e.accuracy),
                    e.feasible,
                    e.reject_reason.map(|r| r.to_string()).unwrap_or_default()
                )
                .map_err(stdout_err)?;
            }
        }
        Format::Text => {
            if !ctx.quiet {
                writeln!(
                    out,
                    "frame rate {} Hz, deadline {} s, control delay {} s{}",
                    output::fmt_g6(catalog.sensing.frame_rate),
                    output::fmt_g6(catalog.sensing.deadline),
                    output::fmt_g6(catalog.sensing.control_delay),
                    if amortized { ", queue-amortized" } else { "" }
                )
                .map_err(stdout_err)?;
                writeln!(
                    out,
                    "{:<10} {:<14} {:<6} {:>9} {:>9} {:>9} {:>8} {:>6}  verdict",
                    "model", "platform", "kind", "net_s", "inf_s", "total_s", "energy_j", "acc"
                )
                .map_err(stdout_err)?;
                for e in &report.evaluated {
                    let verdict = match e.reject_reason {
                        None => "feasible".to_string(),
                        Some(r) => format!("rejected ({r})"),
                    };
                    writeln!(
                        out,
                        "{:<10} {:<14} {:<6} {:>9} {:>9} {:>9} {:>8} {:>6}  {}",
                        e.model_id,
                        e.platform_id,
                        e.kind.to_string(),
                        output::fmt_g6(e.network_delay),
                        output::fmt_g6(e.inference_latency),
                        output::fmt_g6(e.total_latency),
                        output::fmt_g6(e.energy),
                        output::fmt_g6(e.accuracy),
                        verdict
                    )
                    .map_err(stdout_err)?;
                }
            }
            for (kind, sel) in &per_kind {
                match sel {
                    Some(s) => writeln!(out, "{kind}: {} @ {}", s.model_id, s.platform_id),
                    None => writeln!(out, "{kind}: no feasible pair"),
                }
                .map_err(stdout_err)?;
            }
            if let Some(s) = &overall {
                writeln!(out, "overall: {} @ {}", s.model_id, s.platform_id).map_err(stdout_err)?;
            }
        }
    }

    let empty = per_kind.is_empty() || per_kind.values().any(Option::is_none);
    if empty {
        writeln!(ctx.err, "feasible set is empty for at least one platform kind").map_err(stdout_err)?;
        Ok(exit::EMPTY_FEASIBLE_SET)
    } else {
        Ok(exit::OK)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_analyze(
    ctx: &mut Ctx<'_>,
    path: &Path,
    scenario: Option<&Path>,
    kinematics: bool,
    break_even: bool,
    available_m: f64,
    percentile: &str,
) -> Result<i32, Error> {
    let catalog = load_catalog(path)?;
    let point = network_point(&catalog, percentile, None)?;
    let (show_queue, show_kin) = match (kinematics, break_even) {
        (false, false) => (true, true),
        flags => (flags.1, flags.0),
    };
    let rate = catalog.sensing.frame_rate;
    let jsonl = ctx.format == Format::Jsonl;
    let out = &mut *ctx.out;

    if show_queue {
        if !jsonl {
            writeln!(out, "# queue-amortized latency at F = {} Hz", output::fmt_g6(rate))
                .map_err(stdout_err)?;
            writeln!(out, "{:<10} {:<14} {:>8} {:>8} {:>10}", "model", "platform", "tau_s", "rho", "amortized_s")
                .map_err(stdout_err)?;
        }
        for p in &catalog.profiles {
            let q = QueueModel::new(p.inference_latency, rate)?;
            let amortized = q.amortized_latency().ok();
            if jsonl {
                writeln!(
                    out,
                    "{}",
                    json!({"type": "amortized", "model": p.model_id, "platform": p.platform_id,
                           "service_s": p.inference_latency, "utilization": q.utilization(),
                           "stable": q.is_stable(), "amortized_s": amortized})
                )
            } else {
                writeln!(
                    out,
                    "{:<10} {:<14} {:>8} {:>8} {:>10}",
                    p.model_id,
                    p.platform_id,
                    output::fmt_g6(p.inference_latency),
                    output::fmt_g6(q.utilization()),
                    amortized.map(output::fmt_g6).unwrap_or_else(|| "unstable".into())
                )
            }
            .map_err(stdout_err)?;
        }

        if !jsonl {
            writeln!(out, "# cloud break-even round-trip delay per model").map_err(stdout_err)?;
            writeln!(
                out,
                "{:<10} {:<14} {:<14} {:>12} {:>9}  verdict",
                "model", "device", "cloud", "break_even_s", "rtt_s"
            )
            .map_err(stdout_err)?;
        }
        for dev in catalog.profiles.iter().filter(|p| {
            catalog.platform(&p.platform_id).map(|x| x.kind) == Some(PlatformKind::Device)
        }) {
            for cloud in catalog.profiles.iter().filter(|p| {
                p.model_id == dev.model_id
                    && catalog.platform(&p.platform_id).map(|x| x.kind) == Some(PlatformKind::Cloud)
            }) {
                let rtt = point.get(&cloud.platform_id).copied().unwrap_or(0.0);
                let (be, verdict) =
                    match latency::prefer_cloud(rtt, dev.inference_latency, cloud.inference_latency, rate) {
                        Ok(p) if p.warning.is_some() => (None, "device (cloud queue unstable)".to_string()),
                        Ok(p) => (
                            p.break_even,
                            if p.prefer_cloud { "cloud" } else { "device" }.to_string(),
                        ),
                        Err(Error::UnstableQueue { .. }) => {
                            (None, "cloud (device queue unstable)".to_string())
                        }
                        Err(e) => return Err(e),
                    };
                if jsonl {
                    writeln!(
                        out,
                        "{}",
                        json!({"type": "break_even", "model": dev.model_id, "device": dev.platform_id,
                               "cloud": cloud.platform_id, "break_even_s": be, "rtt_s": rtt,
                               "verdict": verdict})
                    )
                } else {
                    writeln!(
                        out,
                        "{:<10} {:<14} {:<14} {:>12} {:>9}  {}",
                        dev.model_id,
                        dev.platform_id,
                        cloud.platform_id,
                        fmt_opt(be),
                        output::fmt_g6(rtt),
                        verdict
                    )
                }
                .map_err(stdout_err)?;
            }
        }
    }

    if show_kin {
        let scenarios: Vec<(String, BrakingScenario)> = match scenario {
            Some(sp) => {
                let loaded = load_scenario(sp)?;
                let avail = if available_m != 100.0 {
                    available_m
                } else {
                    loaded.spec.detection.detection_range
                };
                vec![(
                    loaded.spec.vehicle.clone().unwrap_or_else(|| "scenario".into()),
                    BrakingScenario::new(loaded.spec.initial_speed, loaded.spec.deceleration, avail)?,
                )]
            }
            None => VehicleClass::defaults()
                .into_iter()
                .flat_map(|v| {
                    [20.0, 40.0, 60.0].into_iter().map(move |mph| {
                        BrakingScenario::new(mph_to_mps(mph), v.deceleration, available_m)
                            .map(|s| (v.name.clone(), s))
                    })
                })
                .collect::<Result<_, _>>()?,
        };
        if !jsonl {
            writeln!(out, "# reaction-time budget and stopping distance").map_err(stdout_err)?;
            writeln!(
                out,
                "{:<10} {:>9} {:>7} {:>8} {:>10}  {:<10} {:<14} {:>8} {:>9}  verdict",
                "vehicle", "speed_mps", "decel", "avail_m", "react_s", "model", "platform", "delay_s", "s_stop_m"
            )
            .map_err(stdout_err)?;
        }
        for (name, sc) in &scenarios {
            let budget = kinematics::reaction_budget(sc);
            for p in &catalog.profiles {
                let net = point.get(&p.platform_id).copied().unwrap_or(0.0);
                let delay = net + p.inference_latency;
                let s_stop = kinematics::stopping_distance(sc.initial_speed, sc.deceleration, delay)?;
                let verdict = if budget < 0.0 {
                    "infeasible at zero delay"
                } else if kinematics::is_safe_static(net, p.inference_latency, sc) {
                    "safe"
                } else {
                    "unsafe"
                };
                if jsonl {
                    writeln!(
                        out,
                        "{}",
                        json!({"type": "kinematics", "vehicle": name, "speed_mps": sc.initial_speed,
                               "deceleration_mps2": sc.deceleration, "available_m": sc.available_distance,
                               "reaction_budget_s": budget, "model": p.model_id, "platform": p.platform_id,
                               "delay_s": delay, "stopping_distance_m": s_stop, "verdict": verdict})
                    )
                } else {
                    writeln!(
                        out,
                        "{:<10} {:>9} {:>7} {:>8} {:>10}  {:<10} {:<14} {:>8} {:>9}  {}",
                        name,
                        output::fmt_g6(sc.initial_speed),
                        output::fmt_g6(sc.deceleration),
                        output::fmt_g6(sc.available_distance),
                        output::fmt_g6(budget),
                        p.model_id,
                        p.platform_id,
                        output::fmt_g6(delay),
                        output::fmt_g6(s_stop),
                        verdict
                    )
                }
                .map_err(stdout_err)?;
            }
        }
    }
    Ok(exit::OK)
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn cmd_simulate(
    ctx: &mut Ctx<'_>,
    path: &Path,
    trace_out: Option<&Path>,
    summary_out: Option<&Path>,
) -> Result<i32, Error> {
    let mut loaded = load_scenario(path)?;
    if let Some(seed) = ctx.seed {
        loaded.spec.seed = seed;
    }
    let config = loaded.spec.resolve(&loaded.catalog)?;
    let result = sim::run(&config)?;
    let manifest = RunManifest::new("simulate", &config, config.seed);

    if let Some(p) = trace_out {
        let mut w = create(p)?;
        writeln!(w, "{TRACE_HEADER}").map_err(io_err(p))?;
        output::write_trace(&mut w, 0, &result).map_err(io_err(p))?;
        w.flush().map_err(io_err(p))?;
    }
    if let Some(p) = summary_out {
        let mut w = create(p)?;
        writeln!(w, "{}", manifest.comment_line()).map_err(io_err(p))?;
        writeln!(w, "{SUMMARY_HEADER}").map_err(io_err(p))?;
        let key = RunKey::from_config(&config, loaded.spec.rtt);
        output::write_summary_row(&mut w, 0, &key, &result).map_err(io_err(p))?;
        w.flush().map_err(io_err(p))?;
    }

    match ctx.format {
        Format::Jsonl => {
            let v = json!({
                "outcome": result.outcome, "t_obs_s": result.t_obs, "t_det_s": result.t_det,
                "t_brake_s": result.t_brake, "t_stop_s": result.t_stop, "d_capture_m": result.d_capture,
                "d_brake_m": result.d_brake, "d_stop_m": result.d_stop,
                "detection_delay_s": result.detection_delay, "energy_j": result.total_inference_energy,
                "manifest": {"tool_version": manifest.tool_version, "config_digest": manifest.config_digest,
                             "seed": manifest.seed, "timestamp": manifest.timestamp_rfc3339(),
                             "subcommand": manifest.subcommand},
            });
            writeln!(ctx.out, "{v}").map_err(stdout_err)?;
        }
        _ if ctx.quiet => {}
        _ => {
            writeln!(
                ctx.out,
                "{}: d_stop={} m d_brake={} m d_capture={} m t_det={} s t_brake={} s",
                result.outcome,
                fmt_opt(result.d_stop),
                fmt_opt(result.d_brake),
                fmt_opt(result.d_capture),
                fmt_opt(result.t_det),
                fmt_opt(result.t_brake)
            )
            .map_err(stdout_err)?;
        }
    }
    Ok(match result.outcome {
        Outcome::Safe => exit::OK,
        Outcome::Collision => exit::COLLISION,
    })
}

fn cmd_sweep(ctx: &mut Ctx<'_>, path: &Path, jobs: usize, out_path: Option<&Path>) -> Result<i32, Error> {
    let mut loaded = load_sweep(path)?;
    if let Some(seed) = ctx.seed {
        loaded.base.seed = seed;
    }
    let rows = sweep::sweep(&loaded.catalog, &loaded.base, &loaded.grid, &loaded.vehicles, jobs)?;
    let manifest = RunManifest::new(
        "sweep",
        &(&loaded.catalog, &loaded.base, &loaded.grid),
        loaded.base.seed,
    );

    let mut buf = Vec::new();
    writeln!(buf, "{}", manifest.comment_line()).map_err(stdout_err)?;
    writeln!(buf, "{SUMMARY_HEADER},error").map_err(stdout_err)?;
    let mut failures = 0;
    for row in &rows {
        let key = RunKey {
            model: row.point.model.clone(),
            platform: row.point.platform.clone(),
            speed: row.point.speed,
            deceleration: row.deceleration,
            rtt: row.point.rtt,
            background_rate: row.point.background_rate,
            seed: row.point.seed,
        };
        if let Err(msg) = &row.result {
            failures += 1;
            if !ctx.quiet {
                writeln!(ctx.err, "point {}: {msg}", row.point.index).map_err(stdout_err)?;
            }
        }
        output::write_sweep_row(&mut buf, row.point.index, &key, &row.result).map_err(stdout_err)?;
    }
    match out_path {
        Some(p) => std::fs::write(p, &buf).map_err(io_err(p))?,
        None => ctx.out.write_all(&buf).map_err(stdout_err)?,
    }
    if !ctx.quiet && out_path.is_some() {
        writeln!(ctx.out, "{} points, {} failed", rows.len(), failures).map_err(stdout_err)?;
    }
    Ok(if failures > 0 { exit::PARTIAL_SWEEP } else { exit::OK })
}

fn cmd_validate_queue(
    ctx: &mut Ctx<'_>,
    rho: f64,
    service: f64,
    customers: u64,
    strict: bool,
) -> Result<i32, Error> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::Config(format!("rho must be > 0, got {rho}")));
    }
    if strict && rho >= 1.0 {
        return Err(Error::UnstableQueue { utilization: rho });
    }
    let seed = ctx.seed.unwrap_or(0);
    let rate = rho / service;
    let stats = queue_mc::simulate_mm1(rate, service, customers, seed)?;
    let closed = latency::amortized_latency(service, rate).unwrap_or(f64::INFINITY);
    let rel = ((stats.mean_sojourn - closed) / closed).abs();
    let pass = closed.is_finite() && rel < QUEUE_TOLERANCE;
    match ctx.format {
        Format::Jsonl => writeln!(
            ctx.out,
            "{}",
            json!({"rho": rho, "service_s": service, "customers": customers, "seed": seed,
                   "closed_form_s": closed.is_finite().then_some(closed), "simulated_s": stats.mean_sojourn,
                   "relative_error": closed.is_finite().then_some(rel),
                   "mean_in_system": stats.mean_in_system, "diverged": stats.diverged, "pass": pass})
        ),
        _ => writeln!(
            ctx.out,
            "rho={} service={} s customers={} seed={}\nclosed form  {} s\nsimulated    {} s\nrel. error   {}\nlittle's law L={} vs F*W={}\n{}",
            output::fmt_g6(rho),
            output::fmt_g6(service),
            customers,
            seed,
            output::fmt_g6(closed),
            output::fmt_g6(stats.mean_sojourn),
            if closed.is_finite() { output::fmt_g6(rel) } else { "-".into() },
            output::fmt_g6(stats.mean_in_system),
            output::fmt_g6(rate * stats.mean_sojourn),
            if pass { "PASS" } else { "FAIL" }
        ),
    }
    .map_err(stdout_err)?;
    Ok(if pass { exit::OK } else { exit::TOLERANCE })
}
