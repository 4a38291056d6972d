//! Per-element field snapshots as CSV.

use std::fmt::Write as _;
use std::path::Path;

use crate::adaptivity::OrderField;
use crate::dg::{Discretization, State, MOM_X, MOM_Y, XI};
use crate::error::Error;

pub const SNAPSHOT_HEADER: &str = "element_id,cx,cy,xi_mean,U_mean,V_mean,order";

/// One row per element in mesh order: centroid, element means and order.
pub fn snapshot_csv(d: &Discretization, state: &State, orders: &OrderField) -> String {
    let mut out = String::with_capacity(64 * (d.num_elements() + 1));
    out.push_str(SNAPSHOT_HEADER);
    out.push('\n');
    for e in 0..d.num_elements() {
        let c = d.mesh.geometry(e).centroid;
        let phi0 = d.tables.elements[e].constant_value;
        let mean = |var| state.var(e, var)[0] * phi0;
        let _ = writeln!(
            out,
            "{e},{:.12e},{:.12e},{:.15e},{:.15e},{:.15e},{}",
            c[0],
            c[1],
            mean(XI),
            mean(MOM_X),
            mean(MOM_Y),
            orders.order(e)
        );
    }
    out
}

pub fn write_snapshot(d: &Discretization, state: &State, orders: &OrderField, path: impl AsRef<Path>) -> Result<(), Error> {
    let path = path.as_ref();
    std::fs::write(path, snapshot_csv(d, state, orders)).map_err(|e| Error::io(path, e))
}
