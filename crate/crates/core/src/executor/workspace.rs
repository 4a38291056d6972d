use std::sync::Arc;

use parking_lot::{Mutex, RwLock};

use super::graph::{KernelGraph, KernelId, Layer};
use crate::adaptivity::{apply_order_change, base_ranges, correction_ranges, indicator_kernel, OrderField, Thresholds};
use crate::basis::num_modes;
use crate::dg::{
    edge_flux_kernel, element_flux_kernel, min_depth_kernel, rhs_kernel, solve_auxiliary, Discretization, Ghosts,
    IndexRange, KernelRanges, Residual, State,
};
use crate::error::{Error, SolverError};
use crate::time_integration::{merge_residuals, rk_substep_update, Stage};

/// Order field plus the element and edge lists the correction kernels visit.
#[derive(Debug, Clone)]
pub struct ActiveSet {
    pub orders: OrderField,
    pub high: Vec<usize>,
    /// Edges with a higher-order element on at least one side.
    pub correction_edges: Vec<usize>,
}

impl ActiveSet {
    pub fn new(orders: OrderField, d: &Discretization) -> Self {
        let mut s = Self {
            orders,
            high: Vec::new(),
            correction_edges: Vec::new(),
        };
        s.refresh(d);
        s
    }

    pub fn refresh(&mut self, d: &Discretization) {
        self.high = self.orders.high_elements();
        self.correction_edges = (0..d.mesh.num_edges())
            .filter(|&i| d.mesh.edge(i).sides.iter().flatten().any(|&(e, _)| self.orders.is_high(e)))
            .collect();
    }
}

/// Counters collected while stepping.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub clamps: usize,
    /// Higher-order element fraction at the end of every completed step.
    pub high_fraction: Vec<f64>,
    /// Higher-order element count at the end of every completed step.
    pub high_count: Vec<usize>,
    pub raised: usize,
    pub lowered: usize,
}

#[derive(Debug, Clone, Copy)]
struct Clock {
    step: usize,
    stage: Stage,
    t_n: f64,
}

/// Everything a kernel touches, shared between lanes.
///
/// Flux kernels only read the state and write their own residual buffer, so
/// they can run concurrently; the sequential kernels take write locks.
pub struct Workspace {
    pub disc: Arc<Discretization>,
    pub graph: KernelGraph,
    pub dt: f64,
    pub thresholds: Option<Thresholds>,
    state: RwLock<State>,
    stage_start: Mutex<Vec<f64>>,
    ghosts: RwLock<Ghosts>,
    active: RwLock<ActiveSet>,
    buffers: [Mutex<Residual>; 4],
    merged: Mutex<Residual>,
    clock: Mutex<Clock>,
    stats: Mutex<RunStats>,
}

impl Workspace {
    /// Computes velocities and ghosts for `state` at its current time.
    pub fn new(
        disc: Arc<Discretization>,
        graph: KernelGraph,
        orders: OrderField,
        mut state: State,
        dt: f64,
        thresholds: Option<Thresholds>,
    ) -> Result<Self, Error> {
        if graph.dynamic && thresholds.is_none() {
            return Err(SolverError::Config("dynamic pipeline needs indicator thresholds".into()).into());
        }
        if orders.len() != disc.num_elements() || orders.full() > disc.tables.order() {
            return Err(SolverError::Config("order field does not match the discretization".into()).into());
        }
        for e in 0..disc.num_elements() {
            solve_auxiliary(&disc, &mut state, e, orders.order(e))?;
        }
        let mut ghosts = Ghosts::new(&disc);
        ghosts.update(&disc, &state, state.time)?;
        let (n, k) = (disc.num_elements(), disc.k());
        let active = ActiveSet::new(orders, &disc);
        let t_n = state.time;
        Ok(Self {
            graph,
            dt,
            thresholds,
            stage_start: Mutex::new(state.c.clone()),
            state: RwLock::new(state),
            ghosts: RwLock::new(ghosts),
            active: RwLock::new(active),
            buffers: std::array::from_fn(|_| Mutex::new(Residual::zeros(n, k))),
            merged: Mutex::new(Residual::zeros(n, k)),
            clock: Mutex::new(Clock {
                step: 0,
                stage: Stage::First,
                t_n,
            }),
            stats: Mutex::new(RunStats::default()),
            disc,
        })
    }

    pub fn state(&self) -> State {
        self.state.read().clone()
    }

    pub fn with_state<R>(&self, f: impl FnOnce(&State) -> R) -> R {
        f(&self.state.read())
    }

    pub fn orders(&self) -> OrderField {
        self.active.read().orders.clone()
    }

    pub fn stats(&self) -> RunStats {
        self.stats.lock().clone()
    }

    pub fn stage(&self) -> Stage {
        self.clock.lock().stage
    }

    pub fn steps_done(&self) -> usize {
        self.clock.lock().step
    }

    /// Residual buffer of a flux kernel, as last written.
    pub fn residual(&self, kernel: KernelId) -> Option<Residual> {
        kernel.buffer_slot().map(|s| self.buffers[s].lock().clone())
    }

    /// Runs one kernel of the pipeline.
    pub fn run_kernel(&self, kernel: KernelId) -> Result<(), Error> {
        match kernel {
            KernelId::EdgeBase => self.edge_sweep(kernel, Layer::Base),
            KernelId::EdgeCorrection => self.edge_sweep(kernel, Layer::Correction),
            KernelId::Edge => self.edge_sweep(kernel, Layer::Full),
            KernelId::ElemRhsBase => self.element_sweep(kernel, Layer::Base),
            KernelId::ElemRhsCorrection => self.element_sweep(kernel, Layer::Correction),
            KernelId::ElemRhs => self.element_sweep(kernel, Layer::Full),
            KernelId::RkSubstepAdditions => self.rk_additions(),
            KernelId::MinDepth => {
                self.min_depth();
                Ok(())
            }
            KernelId::SolveUH => self.solve_velocity(),
            KernelId::BcComputation => self.boundary_conditions(),
            KernelId::Indicator => self.indicator(),
        }
    }

    fn edge_sweep(&self, kernel: KernelId, layer: Layer) -> Result<(), Error> {
        let d = &*self.disc;
        let state = self.state.read();
        let ghosts = self.ghosts.read();
        let act = self.active.read();
        let mut buf = self.buffers[kernel.buffer_slot().expect("flux kernel")].lock();
        buf.clear();
        let base = act.orders.base();
        match layer {
            Layer::Base => {
                let r = [base_ranges(base)];
                for edge in 0..d.mesh.num_edges() {
                    edge_flux_kernel(d, &state, &ghosts, edge, [&r, &r], &mut buf)?;
                }
            }
            Layer::Correction => {
                let corr = correction_ranges(base, base + 1);
                for &edge in &act.correction_edges {
                    let sides = d.mesh.edge(edge).sides;
                    let pick = |side: usize| -> &[KernelRanges] {
                        match sides[side] {
                            Some((e, _)) if act.orders.is_high(e) => &corr[..],
                            Some(_) => &corr[..1],
                            None => &[],
                        }
                    };
                    edge_flux_kernel(d, &state, &ghosts, edge, [pick(0), pick(1)], &mut buf)?;
                }
            }
            Layer::Full => {
                for edge in 0..d.mesh.num_edges() {
                    let sides = d.mesh.edge(edge).sides;
                    let own = |side: usize| sides[side].map(|(e, _)| act.orders.order(e));
                    let mut r = [[KernelRanges::full(1)]; 2];
                    let mut n = [0usize; 2];
                    for side in 0..2 {
                        if let Some(p) = own(side) {
                            let q = own(1 - side).unwrap_or(p).max(p);
                            r[side][0] = KernelRanges {
                                test: IndexRange::upto(num_modes(p)),
                                trial: IndexRange::upto(num_modes(q)),
                            };
                            n[side] = 1;
                        }
                    }
                    edge_flux_kernel(d, &state, &ghosts, edge, [&r[0][..n[0]], &r[1][..n[1]]], &mut buf)?;
                }
            }
        }
        Ok(())
    }

    fn element_sweep(&self, kernel: KernelId, layer: Layer) -> Result<(), Error> {
        let d = &*self.disc;
        let state = self.state.read();
        let act = self.active.read();
        let mut buf = self.buffers[kernel.buffer_slot().expect("flux kernel")].lock();
        buf.clear();
        let base = act.orders.base();
        let mut run = |e: usize, r: KernelRanges| {
            let out = buf.elem_mut(e);
            element_flux_kernel(d, &state, e, r, out);
            rhs_kernel(d, &state, e, r, out);
        };
        match layer {
            Layer::Base => {
                let r = base_ranges(base);
                for e in 0..d.num_elements() {
                    run(e, r);
                }
            }
            Layer::Correction => {
                let corr = correction_ranges(base, base + 1);
                for &e in &act.high {
                    for r in corr {
                        run(e, r);
                    }
                }
            }
            Layer::Full => {
                for e in 0..d.num_elements() {
                    run(e, KernelRanges::full(num_modes(act.orders.order(e))));
                }
            }
        }
        Ok(())
    }

    fn rk_additions(&self) -> Result<(), Error> {
        let stage = self.clock.lock().stage;
        let mut state = self.state.write();
        let mut start = self.stage_start.lock();
        let mut merged = self.merged.lock();
        let mut slots: Vec<usize> = self.graph.parallel_phase().iter().filter_map(|k| k.buffer_slot()).collect();
        slots.sort_unstable();
        let guards: Vec<_> = slots.iter().map(|&s| self.buffers[s].lock()).collect();
        let parts: Vec<&[f64]> = guards.iter().map(|g| &g.data[..]).collect();
        merge_residuals(&parts, &mut merged.data);
        if stage == Stage::First {
            start.copy_from_slice(&state.c);
        }
        let stride = 3 * state.k();
        rk_substep_update(stage, &start, &mut state.c, &merged.data, self.dt, stride)?;
        Ok(())
    }

    fn min_depth(&self) {
        let d = &*self.disc;
        let mut state = self.state.write();
        let clamps = (0..d.num_elements()).filter(|&e| min_depth_kernel(d, &mut state, e)).count();
        self.stats.lock().clamps += clamps;
    }

    fn solve_velocity(&self) -> Result<(), Error> {
        let d = &*self.disc;
        let mut state = self.state.write();
        let act = self.active.read();
        for e in 0..d.num_elements() {
            solve_auxiliary(d, &mut state, e, act.orders.order(e))?;
        }
        Ok(())
    }

    fn boundary_time(&self) -> f64 {
        // both stages approximate the solution at the end of the step
        let c = self.clock.lock();
        c.t_n + self.dt
    }

    fn boundary_conditions(&self) -> Result<(), Error> {
        let t = self.boundary_time();
        let state = self.state.read();
        self.ghosts.write().update(&self.disc, &state, t)?;
        Ok(())
    }

    fn indicator(&self) -> Result<(), Error> {
        let d = &*self.disc;
        let thresholds = self
            .thresholds
            .ok_or_else(|| SolverError::Config("indicator kernel without thresholds".into()))?;
        let t = self.boundary_time();
        let mut state = self.state.write();
        let mut act = self.active.write();
        let decisions = indicator_kernel(d, &state, thresholds);
        let changed = apply_order_change(&mut state, &mut act.orders, &decisions);
        if !changed.is_empty() {
            act.refresh(d);
            for &e in &changed {
                solve_auxiliary(d, &mut state, e, act.orders.order(e))?;
            }
            self.ghosts.write().update(d, &state, t)?;
        }
        let mut stats = self.stats.lock();
        stats.raised += act.orders.raised.len();
        stats.lowered += act.orders.lowered.len();
        Ok(())
    }

    /// Advances the substep counter; called once every kernel of the substep ran.
    pub fn finish_substep(&self) {
        let mut c = self.clock.lock();
        match c.stage {
            Stage::First => c.stage = Stage::Second,
            Stage::Second => {
                c.stage = Stage::First;
                c.step += 1;
                c.t_n += self.dt;
                self.state.write().time = c.t_n;
                let act = self.active.read();
                let mut stats = self.stats.lock();
                stats.high_fraction.push(act.orders.high_fraction());
                stats.high_count.push(act.orders.num_high());
            }
        }
    }
}
