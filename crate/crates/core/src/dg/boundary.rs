use super::{Discretization, State};
use crate::error::SolverError;
use crate::mesh::BcTag;

/// Ghost traces for every boundary edge, expressed in the basis of the
/// interior element: `[xi | U | V | u | v]`, each `k` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Ghosts {
    k: usize,
    slot: Vec<usize>,
    data: Vec<f64>,
}

impl Ghosts {
    pub fn new(d: &Discretization) -> Self {
        let k = d.k();
        let mut slot = vec![usize::MAX; d.mesh.num_edges()];
        let mut n = 0;
        for (id, edge) in d.mesh.edges().iter().enumerate() {
            if edge.is_boundary() {
                slot[id] = n;
                n += 1;
            }
        }
        Self {
            k,
            slot,
            data: vec![0.0; 5 * k * n],
        }
    }

    /// Ghost coefficients of boundary edge `edge`.
    #[inline]
    pub fn get(&self, edge: usize) -> &[f64] {
        let s = self.slot[edge];
        &self.data[5 * self.k * s..5 * self.k * (s + 1)]
    }

    #[inline]
    pub fn get_mut(&mut self, edge: usize) -> &mut [f64] {
        let s = self.slot[edge];
        &mut self.data[5 * self.k * s..5 * self.k * (s + 1)]
    }

    /// Recomputes every ghost from the interior state at time `t`.
    pub fn update(&mut self, d: &Discretization, state: &State, t: f64) -> Result<(), SolverError> {
        for id in 0..d.mesh.num_edges() {
            if self.slot[id] != usize::MAX {
                let ghost = self.get_mut(id);
                boundary_ghost(d, state, id, t, ghost)?;
            }
        }
        Ok(())
    }
}

/// Ghost trace of boundary edge `edge` at time `t`, written as `[xi|U|V|u|v]`.
///
/// Land: elevation copied, momentum and velocity reflected about the edge so
/// that the central part of the flux carries no normal mass flux.
/// Open sea: elevation set to the prescribed value, momentum and velocity copied.
pub fn boundary_ghost(d: &Discretization, state: &State, edge: usize, t: f64, out: &mut [f64]) -> Result<(), SolverError> {
    let k = d.k();
    let ed = d.mesh.edge(edge);
    let (e, _) = ed.owner();
    let tag = ed
        .tag
        .ok_or_else(|| SolverError::Config(format!("boundary edge {edge} has no boundary tag")))?;
    let c = state.c_elem(e);
    let u = state.u_elem(e);
    out[..3 * k].copy_from_slice(c);
    out[3 * k..5 * k].copy_from_slice(u);
    match tag {
        BcTag::Land => {
            let n = ed.normal;
            for (ox, oy) in [(k, 2 * k), (3 * k, 4 * k)] {
                for i in 0..k {
                    let a = out[ox + i];
                    let b = out[oy + i];
                    let dot = a * n[0] + b * n[1];
                    out[ox + i] = a - 2.0 * dot * n[0];
                    out[oy + i] = b - 2.0 * dot * n[1];
                }
            }
        }
        BcTag::OpenSea => {
            let elevation = d.open_sea.as_ref().ok_or_else(|| {
                SolverError::Config(format!("open-sea edge {edge} but no prescribed elevation"))
            })?;
            out[..k].iter_mut().for_each(|v| *v = 0.0);
            out[0] = elevation.at(t) / d.tables.elements[e].constant_value;
        }
    }
    Ok(())
}
