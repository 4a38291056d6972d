//! Kernel pipeline as a dependency graph, two-lane execution, per-kernel
//! timing and makespan-optimal lane assignment.

mod engine;
mod graph;
mod optimize;
mod timing;
mod workspace;

pub use engine::{execute_schedule, measure_kernels, timer_resolution, Engine, TimingReport};
pub use graph::{build_kernel_graph, KernelGraph, KernelId, Layer, Node};
pub use optimize::{makespan, optimize_assignment, optimize_assignment_with, Granularity, Schedule};
pub use timing::{Lane, LaneTimings, TimingRow, TimingStat, TimingTable, TIMING_HEADER};
pub use workspace::{ActiveSet, RunStats, Workspace};
