use super::element::padded_bathymetry;
use super::{for_pairs, Discretization, Ghosts, KernelRanges, Residual, State, MOM_X, MOM_Y, XI};
use crate::basis::MAX_MODES;
use crate::error::SolverError;

/// Trace data of one side of an edge.
struct Trace<'a> {
    xi: &'a [f64],
    mx: &'a [f64],
    my: &'a [f64],
    uu: &'a [f64],
    vv: &'a [f64],
    hb: [f64; MAX_MODES],
    /// Value of this side's constant mode.
    phi0: f64,
    element: usize,
}

impl Trace<'_> {
    fn constant_velocity(&self) -> [f64; 2] {
        [self.uu[0] * self.phi0, self.vv[0] * self.phi0]
    }

    fn constant_depth(&self) -> f64 {
        (self.xi[0] + self.hb[0]) * self.phi0
    }
}

fn interior_trace<'a>(d: &Discretization, state: &'a State, e: usize) -> Trace<'a> {
    let k = d.k();
    let c = state.c_elem(e);
    let u = state.u_elem(e);
    Trace {
        xi: &c[..k],
        mx: &c[k..2 * k],
        my: &c[2 * k..],
        uu: &u[..k],
        vv: &u[k..],
        hb: padded_bathymetry(d, e),
        phi0: d.tables.elements[e].constant_value,
        element: e,
    }
}

fn ghost_trace<'a>(d: &Discretization, ghosts: &'a Ghosts, edge: usize) -> Trace<'a> {
    let k = d.k();
    let (e, _) = d.mesh.edge(edge).owner();
    let g = ghosts.get(edge);
    Trace {
        xi: &g[..k],
        mx: &g[k..2 * k],
        my: &g[2 * k..3 * k],
        uu: &g[3 * k..4 * k],
        vv: &g[4 * k..],
        hb: padded_bathymetry(d, e),
        phi0: d.tables.elements[e].constant_value,
        element: e,
    }
}

fn other_trace<'a>(d: &Discretization, state: &'a State, ghosts: &'a Ghosts, edge: usize, side: usize) -> Trace<'a> {
    match d.mesh.edge(edge).sides[1 - side] {
        Some((e, _)) => interior_trace(d, state, e),
        None => ghost_trace(d, ghosts, edge),
    }
}

/// Penalty coefficient of the Lax-Friedrichs flux on `edge`:
/// `max |u . n| + max sqrt(g H)` over both sides (ghost on the boundary),
/// evaluated from the constant modes only.
pub fn compute_lambda(d: &Discretization, state: &State, ghosts: &Ghosts, edge: usize) -> Result<f64, SolverError> {
    let ed = d.mesh.edge(edge);
    let (e0, _) = ed.owner();
    let a = interior_trace(d, state, e0);
    let b = other_trace(d, state, ghosts, edge, 0);
    let n = ed.normal;
    let g = d.params.gravity;
    let mut speed: f64 = 0.0;
    let mut wave: f64 = 0.0;
    for t in [&a, &b] {
        let h = t.constant_depth();
        if !(h > 0.0) {
            return Err(SolverError::NonPositiveDepth {
                element: t.element,
                depth: h,
            });
        }
        let u = t.constant_velocity();
        speed = speed.max((u[0] * n[0] + u[1] * n[1]).abs());
        wave = wave.max((g * h).sqrt());
    }
    Ok(speed + wave)
}

/// Adds `-<A_hat, phi_q>` for the element on `side` of `edge`, where
/// `A_hat = (A(c, u) + A(c+, u+)) . n / 2 + lambda (c - c+) / 2`.
///
/// Own-side products use the same-side edge tensors, neighbour products the
/// cross tensors pairing this side's test function with the neighbour's
/// reversed trace. On boundary edges the neighbour is the ghost trace, which
/// lives in the own element's basis.
#[allow(clippy::too_many_arguments)]
pub fn edge_side_flux(
    d: &Discretization,
    state: &State,
    ghosts: &Ghosts,
    edge: usize,
    side: usize,
    ranges: KernelRanges,
    lambda: f64,
    out: &mut [f64],
) {
    let t = &d.tables;
    let k = t.k();
    let ed = d.mesh.edge(edge);
    let (e, l) = ed.sides[side].expect("edge side without element");
    let n = ed.normal_from(side);
    let len = ed.length;
    let g = d.params.gravity;
    let own = interior_trace(d, state, e);
    let s = t.elements[e].scale;
    let (nb, pair_nb, trip_nb, s_nb) = match ed.sides[1 - side] {
        Some((en, ln)) => (
            interior_trace(d, state, en),
            &t.edge_pair_cross[3 * l + ln],
            &t.edge_triple_cross[3 * l + ln],
            t.elements[en].scale,
        ),
        None => (ghost_trace(d, ghosts, edge), &t.edge_pair[l], &t.edge_triple[l], s),
    };
    let pair_own = &t.edge_pair[l];
    let trip_own = &t.edge_triple[l];
    let w_pair_own = len * s * s;
    let w_trip_own = len * s * s * s;
    let w_pair_nb = len * s * s_nb;
    let w_trip_nb = len * s * s_nb * s_nb;
    let trial = ranges.trial.span();

    for q in ranges.test.span() {
        let (mut fxi, mut fu, mut fv) = (0.0, 0.0, 0.0);
        for i in trial.clone() {
            let a = pair_own[q * k + i] * w_pair_own;
            let b = pair_nb[q * k + i] * w_pair_nb;
            fxi += (own.mx[i] * n[0] + own.my[i] * n[1] + lambda * own.xi[i]) * a
                + (nb.mx[i] * n[0] + nb.my[i] * n[1] - lambda * nb.xi[i]) * b;
            fu += lambda * (own.mx[i] * a - nb.mx[i] * b);
            fv += lambda * (own.my[i] * a - nb.my[i] * b);
        }
        let base = q * k * k;
        for_pairs(trial.clone(), |i, j| {
            let idx = base + i * k + j;
            let a = trip_own[idx] * w_trip_own;
            let b = trip_nb[idx] * w_trip_nb;
            let grav = g * own.xi[i] * (0.5 * own.xi[j] + own.hb[j]);
            let grav_nb = g * nb.xi[i] * (0.5 * nb.xi[j] + nb.hb[j]);
            fu += ((own.mx[i] * own.uu[j] + grav) * n[0] + own.mx[i] * own.vv[j] * n[1]) * a
                + ((nb.mx[i] * nb.uu[j] + grav_nb) * n[0] + nb.mx[i] * nb.vv[j] * n[1]) * b;
            fv += (own.my[i] * own.uu[j] * n[0] + (own.my[i] * own.vv[j] + grav) * n[1]) * a
                + (nb.my[i] * nb.uu[j] * n[0] + (nb.my[i] * nb.vv[j] + grav_nb) * n[1]) * b;
        });
        out[XI * k + q] -= 0.5 * fxi;
        out[MOM_X * k + q] -= 0.5 * fu;
        out[MOM_Y * k + q] -= 0.5 * fv;
    }
}

/// Edge flux for both sides of `edge`, one kernel call per range set listed
/// for a side. Sides without ranges (or without an element) are skipped.
pub fn edge_flux_kernel(
    d: &Discretization,
    state: &State,
    ghosts: &Ghosts,
    edge: usize,
    ranges: [&[KernelRanges]; 2],
    residual: &mut Residual,
) -> Result<(), SolverError> {
    if ranges.iter().all(|r| r.is_empty()) {
        return Ok(());
    }
    let lambda = compute_lambda(d, state, ghosts, edge)?;
    let ed = d.mesh.edge(edge);
    for side in 0..2 {
        if let Some((e, _)) = ed.sides[side] {
            for &r in ranges[side] {
                edge_side_flux(d, state, ghosts, edge, side, r, lambda, residual.elem_mut(e));
            }
        }
    }
    Ok(())
}
