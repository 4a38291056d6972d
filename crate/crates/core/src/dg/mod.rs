//! Kernels of the semi-discrete scheme.
//!
//! Every kernel adds its contribution to a residual slice, with the sign
//! convention `dc/dt = L(c)`: element flux `+(A, grad phi)`, edge flux
//! `-<A_hat, phi>` and right-hand side `+(r, phi)`. The basis is orthonormal,
//! so no mass matrix appears.

mod auxiliary;
mod boundary;
mod depth;
mod edge;
mod element;
mod params;
mod ranges;
mod state;

use std::fmt;
use std::sync::Arc;

pub use auxiliary::{aux_truncation, solve_auxiliary};
pub use boundary::{boundary_ghost, Ghosts};
pub use depth::{mean_depth, min_depth_kernel, total_mass};
pub use edge::{compute_lambda, edge_flux_kernel, edge_side_flux};
pub use element::{element_flux_kernel, rhs_kernel};
pub use params::{FrictionLaw, PhysParams};
pub use ranges::{IndexRange, KernelRanges};
pub(crate) use ranges::for_pairs;
pub use state::{Residual, State, MOM_X, MOM_Y, XI};

use crate::basis::BasisTables;
use crate::error::SolverError;
use crate::mesh::Mesh;

/// Prescribed open-sea elevation as a function of time.
#[derive(Clone)]
pub struct Elevation(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl Elevation {
    pub fn constant(value: f64) -> Self {
        Self(Arc::new(move |_| value))
    }

    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn at(&self, t: f64) -> f64 {
        (self.0)(t)
    }
}

impl fmt::Debug for Elevation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Elevation(..)")
    }
}

/// Immutable data shared by all kernels.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub tables: BasisTables,
    pub params: PhysParams,
    pub open_sea: Option<Elevation>,
    flat_bathymetry: Vec<bool>,
}

impl Discretization {
    /// Bathymetry must already be stored on the mesh with at most `K(order)` modes.
    pub fn new(mesh: Mesh, order: usize, params: PhysParams) -> Result<Self, crate::Error> {
        params.validate()?;
        let tables = BasisTables::build(order, &mesh)?;
        if mesh.bathymetry_modes() > tables.k() {
            return Err(SolverError::Config(format!(
                "bathymetry has {} modes but the basis only {}",
                mesh.bathymetry_modes(),
                tables.k()
            ))
            .into());
        }
        let flat_bathymetry = (0..mesh.num_elements())
            .map(|e| mesh.bathymetry(e).iter().skip(1).all(|&b| b == 0.0))
            .collect();
        Ok(Self {
            mesh,
            tables,
            params,
            open_sea: None,
            flat_bathymetry,
        })
    }

    pub fn with_open_sea(mut self, elevation: Elevation) -> Self {
        self.open_sea = Some(elevation);
        self
    }

    pub fn k(&self) -> usize {
        self.tables.k()
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_elements()
    }

    pub fn new_state(&self) -> State {
        State::zeros(self.num_elements(), self.k())
    }

    #[inline]
    pub fn bathymetry_is_flat(&self, e: usize) -> bool {
        self.flat_bathymetry[e]
    }

    /// Bathymetry coefficient `j` on element `e` (zero past the stored modes).
    #[inline]
    pub(crate) fn hb(&self, e: usize, j: usize) -> f64 {
        self.mesh.bathymetry(e).get(j).copied().unwrap_or(0.0)
    }
}
