use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::graph::KernelId;
use crate::error::{Error, ScheduleError};

/// One of the two execution lanes; A stands in for the CPU, B for the GPU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lane {
    A,
    B,
}

impl Lane {
    pub fn as_char(self) -> char {
        match self {
            Lane::A => 'A',
            Lane::B => 'B',
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Lane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for Lane {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" | "lane_a" => Ok(Lane::A),
            "B" | "b" | "lane_b" => Ok(Lane::B),
            other => Err(format!("unknown lane `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingStat {
    pub mean_ms: f64,
    pub stddev_ms: f64,
    pub samples: usize,
}

impl TimingStat {
    /// Mean and sample standard deviation; `None` for an empty slice.
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(Self {
            mean_ms: mean,
            stddev_ms: var.sqrt(),
            samples: samples.len(),
        })
    }
}

/// Per-kernel, per-lane statistics for one scenario and order pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LaneTimings {
    entries: BTreeMap<(KernelId, Lane), TimingStat>,
}

impl LaneTimings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, kernel: KernelId, lane: Lane, stat: TimingStat) {
        self.entries.insert((kernel, lane), stat);
    }

    pub fn get(&self, kernel: KernelId, lane: Lane) -> Result<TimingStat, ScheduleError> {
        self.entries
            .get(&(kernel, lane))
            .copied()
            .ok_or_else(|| ScheduleError::MissingTiming {
                kernel: kernel.name().to_string(),
                lane: lane.as_char(),
            })
    }

    pub fn mean(&self, kernel: KernelId, lane: Lane) -> Result<f64, ScheduleError> {
        self.get(kernel, lane).map(|s| s.mean_ms)
    }

    pub fn iter(&self) -> impl Iterator<Item = (KernelId, Lane, TimingStat)> + '_ {
        self.entries.iter().map(|(&(k, l), &s)| (k, l, s))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Merges another table, overwriting duplicate entries.
    pub fn extend(&mut self, other: &LaneTimings) {
        self.entries.extend(other.entries.iter().map(|(k, v)| (*k, *v)));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub kernel: KernelId,
    pub p_pair: String,
    pub distribution: String,
    pub lane: Lane,
    pub stat: TimingStat,
}

/// Contents of a timing CSV:
/// `kernel,p_pair,distribution,lane,mean_ms,stddev_ms,samples`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimingTable {
    pub rows: Vec<TimingRow>,
}

pub const TIMING_HEADER: &str = "kernel,p_pair,distribution,lane,mean_ms,stddev_ms,samples";

impl TimingTable {
    pub fn parse(text: &str) -> Result<Self, ScheduleError> {
        let mut rows = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') || l == TIMING_HEADER {
                continue;
            }
            let err = |msg: String| ScheduleError::Parse { line, msg };
            let f: Vec<&str> = l.split(',').map(str::trim).collect();
            if f.len() != 7 {
                return Err(err(format!("expected 7 fields, found {}", f.len())));
            }
            let kernel = f[0].parse::<KernelId>()?;
            let lane = f[3].parse::<Lane>().map_err(err)?;
            let num = |s: &str, what: &str| -> Result<f64, ScheduleError> {
                let v: f64 = s.parse().map_err(|_| err(format!("{what} `{s}` is not a number")))?;
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(err(format!("{what} must be a finite non-negative number, got {s}")));
                }
                Ok(v)
            };
            let mean_ms = num(f[4], "mean_ms")?;
            let stddev_ms = num(f[5], "stddev_ms")?;
            let samples: usize = f[6]
                .parse()
                .map_err(|_| err(format!("samples `{}` is not an integer", f[6])))?;
            if samples == 0 {
                return Err(err("samples must be at least 1".into()));
            }
            rows.push(TimingRow {
                kernel,
                p_pair: f[1].to_string(),
                distribution: f[2].to_string(),
                lane,
                stat: TimingStat {
                    mean_ms,
                    stddev_ms,
                    samples,
                },
            });
        }
        Ok(Self { rows })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TIMING_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.6},{:.6},{}\n",
                r.kernel, r.p_pair, r.distribution, r.lane, r.stat.mean_ms, r.stat.stddev_ms, r.stat.samples
            ));
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), Error> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn push(&mut self, timings: &LaneTimings, p_pair: &str, distribution: &str) {
        for (kernel, lane, stat) in timings.iter() {
            self.rows.push(TimingRow {
                kernel,
                p_pair: p_pair.to_string(),
                distribution: distribution.to_string(),
                lane,
                stat,
            });
        }
    }

    /// Distinct order pairs in file order.
    pub fn p_pairs(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.p_pair) {
                out.push(r.p_pair.clone());
            }
        }
        out
    }

    pub fn select(&self, p_pair: &str, distribution: &str) -> LaneTimings {
        let mut t = LaneTimings::new();
        for r in self.rows.iter().filter(|r| r.p_pair == p_pair && r.distribution == distribution) {
            t.insert(r.kernel, r.lane, r.stat);
        }
        t
    }
}
