//! CSV writers for event traces and run summaries.
//!
//! Floats are printed with 6 significant digits (C `%g` style); absent
//! values are empty fields.

use std::io::{self, Write};

use super::scenario::RttMode;
use super::{SimConfig, SimResult};

pub const TRACE_HEADER: &str = "run_id,time_s,event,frame,position_m,obstacle_distance_m";

pub const SUMMARY_HEADER: &str = "run_id,model,platform,speed_mps,decel_mps2,rtt_mode,bg_rate_hz,seed,\
t_obs_s,t_det_s,t_brake_s,t_stop_s,d_capture_m,d_brake_m,d_stop_m,detection_delay_s,energy_j,outcome";

/// Formats like C's `%.6g`.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_g6).unwrap_or_default()
}

pub fn write_trace<W: Write>(out: &mut W, run_id: usize, result: &SimResult) -> io::Result<()> {
    for e in &result.events {
        writeln!(
            out,
            "{run_id},{},{},{},{},{}",
            fmt_g6(e.time),
            e.kind,
            e.frame_index.map(|n| n.to_string()).unwrap_or_default(),
            fmt_g6(e.vehicle_position),
            fmt_g6(e.obstacle_distance)
        )?;
    }
    Ok(())
}

/// Identifying columns of a summary row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunKey {
    pub model: String,
    pub platform: String,
    pub speed: f64,
    pub deceleration: Option<f64>,
    pub rtt: RttMode,
    pub background_rate: f64,
    pub seed: u64,
}

impl RunKey {
    pub fn from_config(cfg: &SimConfig, rtt: RttMode) -> Self {
        RunKey {
            model: cfg.profile.model_id.clone(),
            platform: cfg.platform.platform_id.clone(),
            speed: cfg.scenario.initial_speed,
            deceleration: Some(cfg.scenario.deceleration),
            rtt,
            background_rate: cfg.background_arrival_rate,
            seed: cfg.seed,
        }
    }
}

fn key_columns(run_id: usize, key: &RunKey) -> String {
    format!(
        "{run_id},{},{},{},{},{},{},{}",
        key.model,
        key.platform,
        fmt_g6(key.speed),
        opt(key.deceleration),
        key.rtt,
        fmt_g6(key.background_rate),
        key.seed
    )
}

fn result_columns(r: &SimResult) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        fmt_g6(r.t_obs),
        opt(r.t_det),
        opt(r.t_brake),
        opt(r.t_stop),
        opt(r.d_capture),
        opt(r.d_brake),
        opt(r.d_stop),
        opt(r.detection_delay),
        fmt_g6(r.total_inference_energy),
        r.outcome
    )
}

pub fn write_summary_row<W: Write>(
    out: &mut W,
    run_id: usize,
    key: &RunKey,
    result: &SimResult,
) -> io::Result<()> {
    writeln!(out, "{},{}", key_columns(run_id, key), result_columns(result))
}

/// Sweep rows carry a trailing `error` column; failed points leave the
/// result columns empty.
pub fn write_sweep_row<W: Write>(
    out: &mut W,
    run_id: usize,
    key: &RunKey,
    result: &Result<SimResult, String>,
) -> io::Result<()> {
    match result {
        Ok(r) => writeln!(out, "{},{},", key_columns(run_id, key), result_columns(r)),
        Err(msg) => writeln!(
            out,
            "{},{}{}",
            key_columns(run_id, key),
            ",".repeat(10),
            csv_escape(msg)
        ),
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g6_formatting() {
        assert_eq!(fmt_g6(91.83604), "91.836");
        assert_eq!(fmt_g6(119.39584), "119.396");
        assert_eq!(fmt_g6(10.151), "10.151");
        assert_eq!(fmt_g6(17.8816), "17.8816");
        assert_eq!(fmt_g6(0.0), "0");
        assert_eq!(fmt_g6(1.0), "1");
        assert_eq!(fmt_g6(-2.5), "-2.5");
        assert_eq!(fmt_g6(1234567.0), "1.23457e+06");
        assert_eq!(fmt_g6(0.000012345), "1.2345e-05");
        assert_eq!(fmt_g6(0.0001), "0.0001");
        assert_eq!(fmt_g6(999999.5), "1e+06");
        assert_eq!(fmt_g6(0.1 + 0.2), "0.3");
    }

    #[test]
    fn error_rows_keep_column_count() {
        let key = RunKey {
            model: "m".into(),
            platform: "p".into(),
            speed: 1.0,
            deceleration: None,
            rtt: RttMode::Fixed(0.02),
            background_rate: 0.0,
            seed: 1,
        };
        let mut buf = Vec::new();
        write_sweep_row(&mut buf, 0, &key, &Err("bad, very bad".into())).unwrap();
        let line = String::from_utf8(buf).unwrap();
        let header_cols = SUMMARY_HEADER.split(',').count() + 1;
        // the quoted message contains one comma
        assert_eq!(line.trim_end().split(',').count(), header_cols + 1);
        assert!(line.trim_end().ends_with("\"bad, very bad\""));
    }
}
