use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::graph::{KernelGraph, KernelId, Layer};
use super::timing::{Lane, LaneTimings};
use crate::error::{Error, ScheduleError};

/// Freedom the optimizer has when placing parallel-phase kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Granularity {
    /// Flux kernels of the same layer (base, correction) share a lane, so
    /// each lane runs a complete part of the separated computation.
    #[default]
    Layer,
    /// Every kernel is placed independently.
    Kernel,
}

impl FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "layer" => Ok(Granularity::Layer),
            "kernel" => Ok(Granularity::Kernel),
            other => Err(format!("unknown granularity `{other}` (expected layer or kernel)")),
        }
    }
}

/// Kernel-to-lane assignment with its predicted makespan.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub assignment: Vec<(KernelId, Lane)>,
    pub predicted_ms: f64,
}

impl Schedule {
    /// Every kernel of `graph` on `lane`; no prediction.
    pub fn single_lane(graph: &KernelGraph, lane: Lane) -> Self {
        Self {
            assignment: graph.kernels().into_iter().map(|k| (k, lane)).collect(),
            predicted_ms: f64::NAN,
        }
    }

    pub fn lane_of(&self, kernel: KernelId) -> Option<Lane> {
        self.assignment.iter().find(|(k, _)| *k == kernel).map(|&(_, l)| l)
    }

    pub fn on_lane(&self, lane: Lane) -> Vec<KernelId> {
        self.assignment.iter().filter(|(_, l)| *l == lane).map(|&(k, _)| k).collect()
    }

    pub fn uses_both_lanes(&self) -> bool {
        !self.on_lane(Lane::A).is_empty() && !self.on_lane(Lane::B).is_empty()
    }

    /// Checks that every kernel of `graph`, and nothing else, is assigned.
    pub fn validate(&self, graph: &KernelGraph) -> Result<(), ScheduleError> {
        for k in graph.kernels() {
            if self.lane_of(k).is_none() {
                return Err(ScheduleError::Mismatch(format!("kernel `{k}` has no lane")));
            }
        }
        for (k, _) in &self.assignment {
            if !graph.contains(*k) {
                return Err(ScheduleError::Mismatch(format!("kernel `{k}` is not part of the graph")));
            }
        }
        Ok(())
    }

    /// `kernel,lane` rows followed by the makespan rows.
    pub fn to_csv(&self, measured_ms: Option<f64>) -> String {
        let mut out = String::from("kernel,lane\n");
        for (k, l) in &self.assignment {
            let _ = writeln!(out, "{k},{l}");
        }
        let _ = writeln!(out, "# predicted_makespan_ms,{:.4}", self.predicted_ms);
        if let Some(m) = measured_ms {
            let _ = writeln!(out, "# measured_makespan_ms,{m:.4}");
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self, ScheduleError> {
        let mut assignment = Vec::new();
        let mut predicted_ms = f64::NAN;
        for (n, raw) in text.lines().enumerate() {
            let l = raw.trim();
            if l.is_empty() || l == "kernel,lane" {
                continue;
            }
            let err = |msg: String| ScheduleError::Parse { line: n + 1, msg };
            if let Some(rest) = l.strip_prefix("# predicted_makespan_ms,") {
                predicted_ms = rest.trim().parse().map_err(|_| err(format!("bad makespan `{rest}`")))?;
                continue;
            }
            if l.starts_with('#') {
                continue;
            }
            let (k, lane) = l.split_once(',').ok_or_else(|| err("expected `kernel,lane`".into()))?;
            let kernel: KernelId = k.trim().parse()?;
            let lane: Lane = lane.parse().map_err(err)?;
            if assignment.iter().any(|(x, _)| *x == kernel) {
                return Err(err(format!("kernel `{kernel}` assigned twice")));
            }
            assignment.push((kernel, lane));
        }
        Ok(Self {
            assignment,
            predicted_ms,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse_csv(&text)?)
    }

    pub fn write(&self, path: impl AsRef<Path>, measured_ms: Option<f64>) -> Result<(), Error> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv(measured_ms)).map_err(|e| Error::io(path, e))
    }

    /// Human-readable summary.
    pub fn report(&self) -> String {
        let names = |lane| {
            self.on_lane(lane)
                .iter()
                .map(|k| k.name())
                .collect::<Vec<_>>()
                .join(", ")
        };
        format!(
            "lane A: {}\nlane B: {}\npredicted makespan: {:.2} ms\n",
            names(Lane::A),
            names(Lane::B),
            self.predicted_ms
        )
    }
}

/// Phase-barrier makespan: the parallel phase costs the larger of the two
/// lane sums, each sequential kernel costs its assigned lane's time.
pub fn makespan(graph: &KernelGraph, timings: &LaneTimings, lane_of: impl Fn(KernelId) -> Lane) -> Result<f64, ScheduleError> {
    let mut sums = [0.0; 2];
    for k in graph.parallel_phase() {
        let lane = lane_of(k);
        sums[lane.index()] += timings.mean(k, lane)?;
    }
    let mut total = sums[0].max(sums[1]);
    for k in graph.sequential_chain() {
        total += timings.mean(k, lane_of(k))?;
    }
    Ok(total)
}

/// Exhaustive minimisation of [`makespan`] over all `2^n` assignments, with
/// the layer constraint of [`Granularity::Layer`] applied by default.
pub fn optimize_assignment(graph: &KernelGraph, timings: &LaneTimings) -> Result<Schedule, ScheduleError> {
    optimize_assignment_with(graph, timings, Granularity::Layer)
}

/// Ties (within 1e-9 relative) go to the assignment with fewer kernels on
/// lane A, then to the lexicographically smallest A-set.
pub fn optimize_assignment_with(
    graph: &KernelGraph,
    timings: &LaneTimings,
    granularity: Granularity,
) -> Result<Schedule, ScheduleError> {
    let kernels = graph.kernels();
    let n = kernels.len();
    assert!(n <= 16, "exhaustive search is limited to small graphs");
    let mut cost = Vec::with_capacity(n);
    for &k in &kernels {
        cost.push([timings.mean(k, Lane::A)?, timings.mean(k, Lane::B)?]);
    }
    let layers: Vec<Option<Layer>> = kernels.iter().map(|k| k.layer()).collect();
    let parallel: Vec<bool> = kernels.iter().map(|k| k.is_flux()).collect();

    let consistent = |mask: u32| -> bool {
        if granularity == Granularity::Kernel {
            return true;
        }
        for i in 0..n {
            for j in i + 1..n {
                if let (Some(a), Some(b)) = (layers[i], layers[j]) {
                    if a == b && ((mask >> i) & 1) != ((mask >> j) & 1) {
                        return false;
                    }
                }
            }
        }
        true
    };

    let mut best: Option<(f64, u32, u32)> = None;
    for mask in 0u32..(1u32 << n) {
        if !consistent(mask) {
            continue;
        }
        let mut sums = [0.0; 2];
        let mut seq = 0.0;
        for i in 0..n {
            let lane = if (mask >> i) & 1 == 1 { 0 } else { 1 };
            if parallel[i] {
                sums[lane] += cost[i][lane];
            } else {
                seq += cost[i][lane];
            }
        }
        let total = sums[0].max(sums[1]) + seq;
        let on_a = mask.count_ones();
        let better = match best {
            None => true,
            Some((b, b_on_a, _)) => {
                let tol = 1e-9 * b.abs().max(1.0);
                total < b - tol || ((total - b).abs() <= tol && on_a < b_on_a)
            }
        };
        if better {
            best = Some((total, on_a, mask));
        }
    }
    let (predicted_ms, _, mask) = best.expect("at least one assignment");
    Ok(Schedule {
        assignment: kernels
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, if (mask >> i) & 1 == 1 { Lane::A } else { Lane::B }))
            .collect(),
        predicted_ms,
    })
}
