//! Round-trip network delay sources.
//!
//! A [`LatencySampler`] is immutable; randomness comes from a caller-owned
//! generator so concurrent runs never share draw state. All values are
//! seconds and never negative.

use std::fmt;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Which row of a percentile table a sampler returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PercentileMode {
    P10,
    P50,
    P90,
}

impl PercentileMode {
    pub fn fraction(self) -> f64 {
        match self {
            PercentileMode::P10 => 0.10,
            PercentileMode::P50 => 0.50,
            PercentileMode::P90 => 0.90,
        }
    }
}

impl fmt::Display for PercentileMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PercentileMode::P10 => "p10",
            PercentileMode::P50 => "p50",
            PercentileMode::P90 => "p90",
        })
    }
}

impl std::str::FromStr for PercentileMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p10" => Ok(PercentileMode::P10),
            "p50" => Ok(PercentileMode::P50),
            "p90" => Ok(PercentileMode::P90),
            other => Err(Error::Config(format!("unknown percentile mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatencySampler {
    Fixed {
        value: f64,
    },
    PercentileTable {
        p10: f64,
        p50: f64,
        p90: f64,
        mode: PercentileMode,
    },
    Empirical {
        samples: Vec<f64>,
    },
    /// `location + exp(Normal(log_mean, log_sigma))`.
    ShiftedLognormal {
        location: f64,
        log_mean: f64,
        log_sigma: f64,
    },
}

fn non_negative(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "{what} must be a finite non-negative delay, got {v}"
        )))
    }
}

impl LatencySampler {
    pub fn fixed(value: f64) -> Result<Self> {
        let s = LatencySampler::Fixed { value };
        s.validate()?;
        Ok(s)
    }

    pub fn percentile_table(p10: f64, p50: f64, p90: f64, mode: PercentileMode) -> Result<Self> {
        let s = LatencySampler::PercentileTable {
            p10,
            p50,
            p90,
            mode,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn empirical(samples: Vec<f64>) -> Result<Self> {
        let s = LatencySampler::Empirical { samples };
        s.validate()?;
        Ok(s)
    }

    pub fn shifted_lognormal(location: f64, log_mean: f64, log_sigma: f64) -> Result<Self> {
        let s = LatencySampler::ShiftedLognormal {
            location,
            log_mean,
            log_sigma,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LatencySampler::Fixed { value } => non_negative("fixed delay", *value),
            LatencySampler::PercentileTable { p10, p50, p90, .. } => {
                non_negative("p10", *p10)?;
                non_negative("p50", *p50)?;
                non_negative("p90", *p90)?;
                if p10 <= p50 && p50 <= p90 {
                    Ok(())
                } else {
                    Err(Error::Validation(format!(
                        "percentile table must satisfy p10 <= p50 <= p90, got {p10}, {p50}, {p90}"
                    )))
                }
            }
            LatencySampler::Empirical { samples } => {
                if samples.is_empty() {
                    return Err(Error::Validation(
                        "empirical sampler needs at least one sample".into(),
                    ));
                }
                samples
                    .iter()
                    .enumerate()
                    .try_for_each(|(i, v)| non_negative(&format!("sample #{}", i + 1), *v))
            }
            LatencySampler::ShiftedLognormal {
                location,
                log_mean,
                log_sigma,
            } => {
                non_negative("lognormal location", *location)?;
                if !log_mean.is_finite() || !log_sigma.is_finite() || *log_sigma < 0.0 {
                    return Err(Error::Validation(format!(
                        "lognormal needs finite log_mean and log_sigma >= 0, got {log_mean}, {log_sigma}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Draws one round-trip delay.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            LatencySampler::Fixed { value } => *value,
            LatencySampler::PercentileTable {
                p10,
                p50,
                p90,
                mode,
            } => match mode {
                PercentileMode::P10 => *p10,
                PercentileMode::P50 => *p50,
                PercentileMode::P90 => *p90,
            },
            LatencySampler::Empirical { samples } => samples[rng.random_range(0..samples.len())],
            LatencySampler::ShiftedLognormal {
                location,
                log_mean,
                log_sigma,
            } => {
                // validate() guarantees the parameters are accepted
                let ln = LogNormal::new(*log_mean, *log_sigma).expect("validated lognormal");
                location + ln.sample(rng)
            }
        }
    }

    /// Quantile of the delay distribution at fraction `q`.
    ///
    /// Percentile tables interpolate linearly between the 0.1/0.5/0.9 anchors
    /// and clamp outside them. Empirical samplers use the nearest-rank
    /// definition (`ceil(q * n)`-th smallest sample, at least the first).
    pub fn percentile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("percentile fraction {q} outside [0, 1]")));
        }
        Ok(match self {
            LatencySampler::Fixed { value } => *value,
            LatencySampler::PercentileTable { p10, p50, p90, .. } => {
                if q <= 0.1 {
                    *p10
                } else if q <= 0.5 {
                    p10 + (q - 0.1) / 0.4 * (p50 - p10)
                } else if q <= 0.9 {
                    p50 + (q - 0.5) / 0.4 * (p90 - p50)
                } else {
                    *p90
                }
            }
            LatencySampler::Empirical { samples } => {
                let mut sorted = samples.clone();
                sorted.sort_by(f64::total_cmp);
                let rank = ((q * sorted.len() as f64).ceil() as usize).max(1);
                sorted[rank.min(sorted.len()) - 1]
            }
            LatencySampler::ShiftedLognormal {
                location,
                log_mean,
                log_sigma,
            } => {
                if *log_sigma == 0.0 {
                    location + log_mean.exp()
                } else if q == 0.0 {
                    *location
                } else if q == 1.0 {
                    f64::INFINITY
                } else {
                    let z = Normal::standard().inverse_cdf(q);
                    location + (log_mean + log_sigma * z).exp()
                }
            }
        })
    }

    /// A fixed sampler pinned at this sampler's `q` quantile.
    pub fn pinned(&self, q: f64) -> Result<LatencySampler> {
        LatencySampler::fixed(self.percentile(q)?)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            LatencySampler::Fixed { .. } => "fixed",
            LatencySampler::PercentileTable { .. } => "percentile_table",
            LatencySampler::Empirical { .. } => "empirical",
            LatencySampler::ShiftedLognormal { .. } => "shifted_lognormal",
        }
    }
}

/// Parses a sample file body: one seconds value per line, blank lines and
/// `#` comments ignored.
pub fn parse_samples(text: &str, origin: &Path) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let value: f64 = line.parse().map_err(|_| Error::Parse {
            path: origin.to_path_buf(),
            message: format!("line {}: cannot parse `{line}` as seconds", idx + 1),
        })?;
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Validation(format!(
                "{} line {}: delay must be non-negative, got {value}",
                origin.display(),
                idx + 1
            )));
        }
        out.push(value);
    }
    if out.is_empty() {
        return Err(Error::Validation(format!(
            "{}: sample file contains no values",
            origin.display()
        )));
    }
    Ok(out)
}

/// Loads an RTT trace file into an empirical sampler, preserving file order.
pub fn load_samples(path: impl AsRef<Path>) -> Result<LatencySampler> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    LatencySampler::empirical(parse_samples(&text, path)?)
}
