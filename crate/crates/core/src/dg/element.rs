use super::{for_pairs, Discretization, FrictionLaw, KernelRanges, State, MOM_X, MOM_Y, XI};
use crate::basis::MAX_MODES;

/// Bathymetry coefficients padded to `MAX_MODES`.
#[inline]
pub(super) fn padded_bathymetry(d: &Discretization, e: usize) -> [f64; MAX_MODES] {
    let mut hb = [0.0; MAX_MODES];
    for (dst, src) in hb.iter_mut().zip(d.mesh.bathymetry(e)) {
        *dst = *src;
    }
    hb
}

/// Adds `(A(c, u), grad phi_q)` over element `e` for the test modes in
/// `ranges.test`, using only trial terms selected by `ranges.trial`.
///
/// The mass row is bilinear; the momentum rows contract the products
/// `U u`, `U v`, `V u`, `V v` and `g (xi^2 / 2 + xi h_b)` with the triple
/// gradient tensors.
pub fn element_flux_kernel(d: &Discretization, state: &State, e: usize, ranges: KernelRanges, out: &mut [f64]) {
    let t = &d.tables;
    let k = t.k();
    let f = t.elements[e];
    let g = d.params.gravity;
    let xi = state.var(e, XI);
    let mx = state.var(e, MOM_X);
    let my = state.var(e, MOM_Y);
    let uv = state.u_elem(e);
    let (uu, vv) = uv.split_at(k);
    let hb = padded_bathymetry(d, e);
    let trial = ranges.trial.span();

    for q in ranges.test.span() {
        let mut acc = 0.0;
        for i in trial.clone() {
            let gx = t.grad_x[q * k + i];
            let gy = t.grad_y[q * k + i];
            let dx = f.ddx[0] * gx + f.ddx[1] * gy;
            let dy = f.ddy[0] * gx + f.ddy[1] * gy;
            acc += mx[i] * dx + my[i] * dy;
        }
        out[XI * k + q] += acc;

        let (mut au, mut av) = (0.0, 0.0);
        let base = q * k * k;
        for_pairs(trial.clone(), |i, j| {
            let idx = base + i * k + j;
            let sx = t.grad_x_triple[idx];
            let sy = t.grad_y_triple[idx];
            let dx = f.ddx[0] * sx + f.ddx[1] * sy;
            let dy = f.ddy[0] * sx + f.ddy[1] * sy;
            let grav = g * xi[i] * (0.5 * xi[j] + hb[j]);
            au += (mx[i] * uu[j] + grav) * dx + mx[i] * vv[j] * dy;
            av += my[i] * uu[j] * dx + (my[i] * vv[j] + grav) * dy;
        });
        out[MOM_X * k + q] += f.scale * au;
        out[MOM_Y * k + q] += f.scale * av;
    }
}

/// Adds `(r, phi_q)`: bottom friction with the piecewise-constant velocity,
/// Coriolis, the bathymetry slope source and a constant body force.
pub fn rhs_kernel(d: &Discretization, state: &State, e: usize, ranges: KernelRanges, out: &mut [f64]) {
    let t = &d.tables;
    let k = t.k();
    let f = t.elements[e];
    let p = &d.params;
    let xi = state.var(e, XI);
    let mx = state.var(e, MOM_X);
    let my = state.var(e, MOM_Y);
    let uv = state.u_elem(e);
    let (uu, vv) = uv.split_at(k);
    let hb = padded_bathymetry(d, e);
    let trial = ranges.trial.span();
    let u0 = [uu[0] * f.constant_value, vv[0] * f.constant_value];

    for q in ranges.test.span() {
        let mut ru = 0.0;
        let mut rv = 0.0;
        if ranges.trial.contains0(q) {
            match p.friction {
                FrictionLaw::Linear { coeff } => {
                    let depth = xi[q] + hb[q];
                    ru -= coeff * depth * u0[0];
                    rv -= coeff * depth * u0[1];
                }
                FrictionLaw::Quadratic { coeff } => {
                    let speed = u0[0].hypot(u0[1]);
                    ru -= coeff * speed * uu[q];
                    rv -= coeff * speed * vv[q];
                }
            }
            ru += p.coriolis * my[q];
            rv -= p.coriolis * mx[q];
        }
        if q == 0 && ranges.trial.contains0(0) {
            // int phi_0 = 1 / phi_0
            ru += p.body_force[0] / f.constant_value;
            rv += p.body_force[1] / f.constant_value;
        }
        if !d.bathymetry_is_flat(e) {
            // g xi d(h_b)/dx: derivative falls on the bathymetry mode j
            let (mut sx_acc, mut sy_acc) = (0.0, 0.0);
            for_pairs(trial.clone(), |i, j| {
                let idx = (j * k + i) * k + q;
                let sx = t.grad_x_triple[idx];
                let sy = t.grad_y_triple[idx];
                let w = xi[i] * hb[j];
                sx_acc += w * sx;
                sy_acc += w * sy;
            });
            let gs = p.gravity * f.scale;
            ru += gs * (f.ddx[0] * sx_acc + f.ddx[1] * sy_acc);
            rv += gs * (f.ddy[0] * sx_acc + f.ddy[1] * sy_acc);
        }
        out[MOM_X * k + q] += ru;
        out[MOM_Y * k + q] += rv;
    }
}
