//! Scenario setup (mesh, bathymetry, initial state, order field) and the
//! top-level run driver.

use std::sync::Arc;

use crate::adaptivity::{apply_order_change, indicator_kernel, Decision, OrderField};
use crate::basis::BasisTables;
use crate::config::{ExecMode, RunConfig, Scenario};
use crate::dg::{total_mass, Discretization, State, XI};
use crate::error::Error;
use crate::executor::{
    build_kernel_graph, execute_schedule, measure_kernels, optimize_assignment_with, KernelGraph, Lane,
    LaneTimings, RunStats, Schedule, TimingReport, TimingTable, Workspace, TIMING_HEADER,
};
use crate::mesh::{generate_perturbed_uniform_mesh, Point, Rect};
use crate::snapshot::write_snapshot;

/// Side length of the square domain.
pub const DOMAIN_SIZE: f64 = 5.0;
/// Constant bathymetry below the datum.
pub const BATHYMETRY: f64 = 0.5;
/// Subdivision levels used when projecting discontinuous initial data.
const PROJECTION_LEVELS: u32 = 3;

/// Radial dam-break elevation: a Gaussian hump on a raised disc of radius
/// 0.5 at the domain centre, 1 elsewhere.
pub fn dam_break_elevation(p: Point) -> f64 {
    let c = 0.5 * DOMAIN_SIZE;
    let r2 = (p[0] - c).powi(2) + (p[1] - c).powi(2);
    if r2 < 0.25 {
        2.0 + 0.5 * (-15.0 * r2).exp()
    } else {
        1.0
    }
}

/// Elevation of the still-water scenario.
pub const STILL_WATER_LEVEL: f64 = 1.0;

/// Exact integral of [`dam_break_elevation`] over the domain:
/// background 25, unit step on the disc and the truncated Gaussian.
pub fn dam_break_mass() -> f64 {
    let pi = std::f64::consts::PI;
    DOMAIN_SIZE * DOMAIN_SIZE + pi * 0.25 + pi / 30.0 * (1.0 - (-3.75f64).exp())
}

/// Everything needed to start a run.
#[derive(Debug, Clone)]
pub struct Setup {
    pub disc: Arc<Discretization>,
    pub orders: OrderField,
    pub state: State,
    pub graph: KernelGraph,
    pub config: RunConfig,
}

impl Setup {
    pub fn new(config: &RunConfig) -> Result<Self, Error> {
        let order = config.order;
        let mut mesh = generate_perturbed_uniform_mesh(
            config.nx,
            Rect::square(0.0, DOMAIN_SIZE),
            config.perturbation,
            config.seed,
        )?;
        let tables = BasisTables::build(order, &mesh)?;
        mesh.set_bathymetry(tables.k(), tables.constant_field(&mesh, BATHYMETRY));
        let disc = Discretization::new(mesh, order, config.params)?;
        let base = order - 1;
        let n = disc.num_elements();
        let dynamic = config.scenario.is_dynamic();

        let elevation: fn(Point) -> f64 = match config.scenario {
            Scenario::StillWater => |_| STILL_WATER_LEVEL,
            _ => dam_break_elevation,
        };
        let full = disc.tables.project(&disc.mesh, order, PROJECTION_LEVELS, elevation);
        let mut state = disc.new_state();
        let k = disc.k();
        for e in 0..n {
            state.c_elem_mut(e)[XI * k..XI * k + k].copy_from_slice(&full[e * k..(e + 1) * k]);
        }

        let mut orders = if dynamic || config.fraction == 0 {
            OrderField::new(base, n)?
        } else {
            OrderField::every_kth(base, n, config.fraction)?
        };
        // higher modes of base-order elements are dropped; by hierarchy this
        // equals projecting those elements at the base order
        let mut lower = vec![Decision::Keep; n];
        for (e, d) in lower.iter_mut().enumerate() {
            if !orders.is_high(e) {
                orders.set_high(e, true);
                *d = Decision::Lower;
            }
        }
        apply_order_change(&mut state, &mut orders, &lower);

        if dynamic {
            let thresholds = config.thresholds().expect("dynamic config has thresholds");
            let raise: Vec<Decision> = indicator_kernel(&disc, &state, thresholds)
                .into_iter()
                .map(|d| if d == Decision::Raise { Decision::Raise } else { Decision::Keep })
                .collect();
            apply_order_change(&mut state, &mut orders, &raise);
            for &e in &orders.raised {
                state.c_elem_mut(e)[XI * k..XI * k + k].copy_from_slice(&full[e * k..(e + 1) * k]);
            }
        }
        orders.raised.clear();
        orders.lowered.clear();

        Ok(Self {
            disc: Arc::new(disc),
            orders,
            state,
            graph: build_kernel_graph(config.separated, dynamic),
            config: config.clone(),
        })
    }

    /// Fresh workspace at the initial state.
    pub fn workspace(&self) -> Result<Workspace, Error> {
        Workspace::new(
            Arc::clone(&self.disc),
            self.graph.clone(),
            self.orders.clone(),
            self.state.clone(),
            self.config.dt,
            self.config.thresholds(),
        )
    }

    pub fn initial_mass(&self) -> f64 {
        total_mass(&self.disc, &self.state)
    }

    /// Kernel statistics of both lanes, merged into one table.
    pub fn measure_both_lanes(&self) -> Result<(LaneTimings, Vec<String>), Error> {
        let mut timings = LaneTimings::new();
        let mut warnings = Vec::new();
        for lane in [Lane::A, Lane::B] {
            let r = measure_kernels(
                self.workspace()?,
                lane,
                self.config.warmup,
                self.config.measure_substeps,
            )?;
            timings.extend(&r.lane_timings());
            warnings.extend(r.warnings);
        }
        Ok((timings, warnings))
    }

    /// Label of the order pair, e.g. `0-1`.
    pub fn p_pair(&self) -> String {
        format!("{}-{}", self.orders.base(), self.orders.full())
    }
}

/// Result of [`run_scenario`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub schedule: Schedule,
    pub report: TimingReport,
    pub stats: RunStats,
    pub final_state: State,
    pub final_orders: OrderField,
    pub initial_mass: f64,
    pub final_mass: f64,
    pub measured: Option<LaneTimings>,
    pub warnings: Vec<String>,
}

/// Per-step adaptivity statistics as `#`-prefixed rows, which timing-table
/// readers skip.
pub fn adaptivity_csv(stats: &RunStats) -> String {
    let mut out = String::from("# step,high_order_elements,high_order_fraction\n");
    for (i, (n, f)) in stats.high_count.iter().zip(&stats.high_fraction).enumerate() {
        out.push_str(&format!("# {},{n},{f:.6}\n", i + 1));
    }
    out
}

/// Builds the scenario, runs it in the configured mode and writes the
/// requested outputs.
pub fn run_scenario(config: &RunConfig) -> Result<RunOutcome, Error> {
    let setup = Setup::new(config)?;
    let mut measured = None;
    let mut warnings = Vec::new();
    let schedule = match config.mode {
        ExecMode::LaneA => Schedule::single_lane(&setup.graph, Lane::A),
        ExecMode::LaneB => Schedule::single_lane(&setup.graph, Lane::B),
        ExecMode::Heterogeneous => {
            let path = config.schedule.as_ref().expect("validated config");
            Schedule::read(path)?
        }
        ExecMode::MeasureThenOptimize => {
            let (timings, w) = setup.measure_both_lanes()?;
            warnings.extend(w);
            if let Some(path) = &config.timings {
                let mut table = TimingTable::default();
                table.push(&timings, &setup.p_pair(), "homogeneous");
                table.write(path)?;
            }
            let s = optimize_assignment_with(&setup.graph, &timings, config.granularity)?;
            measured = Some(timings);
            s
        }
    };
    let (ws, report) = execute_schedule(setup.workspace()?, &schedule, config.steps, true)?;
    let stats = ws.stats();
    if let (Some(path), true) = (&config.timings, config.scenario.is_dynamic()) {
        let mut text = match &measured {
            Some(_) => std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?,
            None => format!("{TIMING_HEADER}\n"),
        };
        text.push_str(&adaptivity_csv(&stats));
        std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    if let Some(path) = &config.schedule_out {
        schedule.write(path, Some(report.mean_substep_ms()))?;
    }
    let final_state = ws.state();
    let final_orders = ws.orders();
    if let Some(path) = &config.snapshot {
        write_snapshot(&ws.disc, &final_state, &final_orders, path)?;
    }
    Ok(RunOutcome {
        final_mass: total_mass(&ws.disc, &final_state),
        initial_mass: setup.initial_mass(),
        stats,
        schedule,
        report,
        final_state,
        final_orders,
        measured,
        warnings,
    })
}

/// One row of the bench comparison.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub label: String,
    pub mean_substep_ms: f64,
    pub median_substep_ms: f64,
    pub predicted_ms: f64,
    /// Largest coefficient difference to the lane-A run.
    pub max_diff: f64,
}

/// Measures both lanes, optimizes the assignment and runs lane A, lane B
/// and the optimized schedule for `config.steps` steps each.
pub fn run_bench(config: &RunConfig) -> Result<(Schedule, Vec<BenchRow>, Vec<String>), Error> {
    let setup = Setup::new(config)?;
    let (timings, warnings) = setup.measure_both_lanes()?;
    let schedule = optimize_assignment_with(&setup.graph, &timings, config.granularity)?;
    let single = |lane| -> Result<f64, Error> {
        crate::executor::makespan(&setup.graph, &timings, |_| lane).map_err(Error::from)
    };
    let runs = [
        ("lane_a".to_string(), Schedule::single_lane(&setup.graph, Lane::A), single(Lane::A)?),
        ("lane_b".to_string(), Schedule::single_lane(&setup.graph, Lane::B), single(Lane::B)?),
        ("heterogeneous".to_string(), schedule.clone(), schedule.predicted_ms),
    ];
    let mut rows = Vec::new();
    let mut reference: Option<State> = None;
    for (label, s, predicted_ms) in runs {
        let (ws, report) = execute_schedule(setup.workspace()?, &s, config.steps, true)?;
        let state = ws.state();
        let max_diff = reference.as_ref().map_or(0.0, |r| r.max_abs_diff(&state));
        reference.get_or_insert(state);
        rows.push(BenchRow {
            label,
            mean_substep_ms: report.mean_substep_ms(),
            median_substep_ms: report.median_substep_ms(),
            predicted_ms,
            max_diff,
        });
    }
    Ok((schedule, rows, warnings))
}
