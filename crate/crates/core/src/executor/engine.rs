use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use super::graph::KernelId;
use super::optimize::Schedule;
use super::timing::{Lane, LaneTimings, TimingStat};
use super::workspace::Workspace;
use crate::error::{Error, ScheduleError};
use crate::time_integration::Stage;

type Reply = (KernelId, Lane, Result<f64, Error>);

struct Lanes {
    senders: Vec<Sender<KernelId>>,
    replies: Receiver<Reply>,
    handles: Vec<JoinHandle<()>>,
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic".to_string()
    }
}

/// Runs a kernel and times it; a panic becomes a lane failure naming the kernel.
fn timed(ws: &Workspace, kernel: KernelId, lane: Lane) -> Result<f64, Error> {
    let start = Instant::now();
    match catch_unwind(AssertUnwindSafe(|| ws.run_kernel(kernel))) {
        Ok(r) => r.map(|()| start.elapsed().as_secs_f64() * 1e3),
        Err(p) => Err(ScheduleError::LaneFailure {
            kernel: kernel.name().to_string(),
            lane: lane.as_char(),
            msg: panic_message(p),
        }
        .into()),
    }
}

impl Lanes {
    fn spawn(ws: &Arc<Workspace>) -> Self {
        let (reply_tx, replies) = channel::<Reply>();
        let mut senders = Vec::new();
        let mut handles = Vec::new();
        for lane in [Lane::A, Lane::B] {
            let (tx, rx) = channel::<KernelId>();
            let ws = Arc::clone(ws);
            let reply = reply_tx.clone();
            let handle = std::thread::Builder::new()
                .name(format!("lane-{lane}"))
                .spawn(move || {
                    for kernel in rx {
                        let r = timed(&ws, kernel, lane);
                        if reply.send((kernel, lane, r)).is_err() {
                            break;
                        }
                    }
                })
                .expect("failed to spawn lane thread");
            senders.push(tx);
            handles.push(handle);
        }
        Self {
            senders,
            replies,
            handles,
        }
    }
}

/// Per-kernel samples and substep wall times.
#[derive(Debug, Clone, Default)]
pub struct TimingReport {
    pub samples: BTreeMap<KernelId, Vec<f64>>,
    pub lanes: BTreeMap<KernelId, Lane>,
    pub substep_ms: Vec<f64>,
    pub warnings: Vec<String>,
}

impl TimingReport {
    pub fn lane_timings(&self) -> LaneTimings {
        let mut t = LaneTimings::new();
        for (k, s) in &self.samples {
            if let (Some(stat), Some(&lane)) = (TimingStat::from_samples(s), self.lanes.get(k)) {
                t.insert(*k, lane, stat);
            }
        }
        t
    }

    pub fn mean_substep_ms(&self) -> f64 {
        if self.substep_ms.is_empty() {
            return f64::NAN;
        }
        self.substep_ms.iter().sum::<f64>() / self.substep_ms.len() as f64
    }

    pub fn median_substep_ms(&self) -> f64 {
        if self.substep_ms.is_empty() {
            return f64::NAN;
        }
        let mut v = self.substep_ms.clone();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
}

/// Drives a [`Workspace`] through substeps, either inline on the calling
/// thread or on two persistent lane threads.
pub struct Engine {
    ws: Arc<Workspace>,
    lanes: Option<Lanes>,
    pub report: TimingReport,
    pub recording: bool,
}

impl Engine {
    /// Kernels run on the calling thread; lanes are only labels.
    pub fn inline(ws: Workspace) -> Self {
        Self {
            ws: Arc::new(ws),
            lanes: None,
            report: TimingReport::default(),
            recording: true,
        }
    }

    /// Two worker threads, one per lane.
    pub fn threaded(ws: Workspace) -> Self {
        let ws = Arc::new(ws);
        let lanes = Some(Lanes::spawn(&ws));
        Self {
            ws,
            lanes,
            report: TimingReport::default(),
            recording: true,
        }
    }

    pub fn workspace(&self) -> &Workspace {
        &self.ws
    }

    fn record(&mut self, kernel: KernelId, lane: Lane, ms: f64) {
        if self.recording {
            self.report.samples.entry(kernel).or_default().push(ms);
            self.report.lanes.insert(kernel, lane);
        }
    }

    /// Dispatches `batch` and waits for all of it (a barrier). Kernels on the
    /// same lane run in the order given; different lanes overlap.
    fn run_batch(&mut self, batch: &[(KernelId, Lane)]) -> Result<(), Error> {
        let mut results = Vec::with_capacity(batch.len());
        match &self.lanes {
            None => {
                for &(k, lane) in batch {
                    results.push((k, lane, timed(&self.ws, k, lane)));
                    if results.last().is_some_and(|r| r.2.is_err()) {
                        break;
                    }
                }
            }
            Some(lanes) => {
                for &(k, lane) in batch {
                    lanes.senders[lane.index()].send(k).map_err(|_| ScheduleError::LaneFailure {
                        kernel: k.name().to_string(),
                        lane: lane.as_char(),
                        msg: "lane thread is gone".into(),
                    })?;
                }
                for _ in batch {
                    let r = lanes.replies.recv().map_err(|_| ScheduleError::LaneFailure {
                        kernel: "?".into(),
                        lane: '?',
                        msg: "lane thread is gone".into(),
                    })?;
                    results.push(r);
                }
            }
        }
        let mut first_err = None;
        for (k, lane, r) in results {
            match r {
                Ok(ms) => self.record(k, lane, ms),
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        first_err.map_or(Ok(()), Err)
    }

    /// One substep following `schedule`. With `sync_each` every kernel is
    /// followed by a barrier (measurement mode); otherwise the parallel phase
    /// is dispatched at once. Returns the substep wall time in ms.
    pub fn substep(&mut self, schedule: &Schedule, sync_each: bool) -> Result<f64, Error> {
        let graph = self.ws.graph.clone();
        let lane_of = |k: KernelId| -> Result<Lane, Error> {
            schedule
                .lane_of(k)
                .ok_or_else(|| ScheduleError::Mismatch(format!("kernel `{k}` has no lane")).into())
        };
        let stage = self.ws.stage();
        let start = Instant::now();
        let parallel: Vec<(KernelId, Lane)> = graph
            .parallel_phase()
            .into_iter()
            .map(|k| lane_of(k).map(|l| (k, l)))
            .collect::<Result<_, _>>()?;
        if sync_each {
            for &p in &parallel {
                self.run_batch(&[p])?;
            }
        } else {
            self.run_batch(&parallel)?;
        }
        for k in graph.sequential_chain() {
            if k == KernelId::Indicator && stage == Stage::First {
                continue;
            }
            self.run_batch(&[(k, lane_of(k)?)])?;
        }
        self.ws.finish_substep();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        if self.recording {
            self.report.substep_ms.push(ms);
        }
        Ok(ms)
    }

    /// Two substeps.
    pub fn advance_step(&mut self, schedule: &Schedule, sync_each: bool) -> Result<(), Error> {
        for _ in 0..2 {
            self.substep(schedule, sync_each)?;
        }
        Ok(())
    }

    pub fn into_workspace(self) -> Arc<Workspace> {
        Arc::clone(&self.ws)
    }
}

impl Drop for Engine {
    fn drop(&mut self) {
        if let Some(lanes) = self.lanes.take() {
            drop(lanes.senders);
            for h in lanes.handles {
                let _ = h.join();
            }
        }
    }
}

/// Smallest observable step of the monotonic clock.
pub fn timer_resolution() -> Duration {
    let mut best = Duration::from_secs(1);
    for _ in 0..64 {
        let a = Instant::now();
        let mut b = Instant::now();
        while b == a {
            b = Instant::now();
        }
        best = best.min(b - a);
    }
    best
}

/// Kernel statistics of a single-lane run with a barrier after every kernel;
/// the first `warmup` substeps are not recorded.
pub fn measure_kernels(ws: Workspace, lane: Lane, warmup: usize, measured: usize) -> Result<TimingReport, Error> {
    let schedule = Schedule::single_lane(&ws.graph, lane);
    let mut engine = Engine::threaded(ws);
    engine.recording = false;
    for _ in 0..warmup {
        engine.substep(&schedule, true)?;
    }
    engine.recording = true;
    for _ in 0..measured {
        engine.substep(&schedule, true)?;
    }
    let mut report = std::mem::take(&mut engine.report);
    let res_ms = timer_resolution().as_secs_f64() * 1e3;
    let smallest = report
        .samples
        .values()
        .filter_map(|s| TimingStat::from_samples(s))
        .map(|s| s.mean_ms)
        .fold(f64::INFINITY, f64::min);
    if smallest.is_finite() && res_ms > 0.01 * smallest {
        report.warnings.push(format!(
            "timer resolution {res_ms:.6} ms exceeds 1% of the smallest kernel mean {smallest:.6} ms"
        ));
    }
    Ok(report)
}

/// Runs `steps` steps of `schedule`; heterogeneous schedules use the lane
/// threads, the kernels of the parallel phase overlapping across lanes.
pub fn execute_schedule(ws: Workspace, schedule: &Schedule, steps: usize, threaded: bool) -> Result<(Arc<Workspace>, TimingReport), Error> {
    schedule.validate(&ws.graph)?;
    let mut engine = if threaded {
        Engine::threaded(ws)
    } else {
        Engine::inline(ws)
    };
    for _ in 0..steps {
        engine.advance_step(schedule, false)?;
    }
    let report = std::mem::take(&mut engine.report);
    Ok((engine.into_workspace(), report))
}
