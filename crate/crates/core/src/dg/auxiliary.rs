use super::{Discretization, State, MOM_X, MOM_Y, XI};
use crate::basis::{mode_degree, num_modes, MAX_MODES};
use crate::error::SolverError;

/// Number of elevation modes entering the depth matrix entry `(i, j)`.
///
/// The mean mode pairs with the mean elevation only; every other entry uses
/// the elevation modes up to the larger degree of the two functions
/// (at least degree one).
#[inline]
pub fn aux_truncation(i: usize, j: usize) -> usize {
    if i == 0 && j == 0 {
        1
    } else {
        num_modes(mode_degree(i).max(mode_degree(j)).max(1))
    }
}

/// Solves `(H u, phi_i) = (U, phi_i)` and `(H v, phi_i) = (V, phi_i)` on
/// element `e` for the first `K(order)` velocity modes; the remaining modes
/// are cleared.
///
/// `H` is assembled from the truncated elevation and the full bathymetry.
/// The system is factorised without pivoting: a non-positive or non-finite
/// pivot means the depth is not positive on the element.
pub fn solve_auxiliary(d: &Discretization, state: &mut State, e: usize, order: usize) -> Result<(), SolverError> {
    let t = &d.tables;
    let k = t.k();
    let n = num_modes(order).min(k);
    let s = t.elements[e].scale;
    let xi = state.var(e, XI);
    let hb_modes = d.mesh.bathymetry(e);

    let mut h = [[0.0; MAX_MODES]; MAX_MODES];
    for i in 0..n {
        for j in i..n {
            let kt = aux_truncation(i, j).min(k);
            let mut v = 0.0;
            for (m, x) in xi.iter().enumerate().take(kt) {
                v += x * t.triple[t.idx3(m, i, j)];
            }
            for (m, b) in hb_modes.iter().enumerate() {
                v += b * t.triple[t.idx3(m, i, j)];
            }
            h[i][j] = s * v;
            h[j][i] = s * v;
        }
    }

    // LU without pivoting; the matrix is symmetric positive definite when H > 0
    for c in 0..n {
        let p = h[c][c];
        if !(p > 0.0) || !p.is_finite() {
            return Err(SolverError::DepthDegeneracy {
                element: e,
                row: c,
                pivot: p,
            });
        }
        for r in c + 1..n {
            let f = h[r][c] / p;
            h[r][c] = f;
            for cc in c + 1..n {
                h[r][cc] -= f * h[c][cc];
            }
        }
    }

    let mut sol = [[0.0; MAX_MODES]; 2];
    for (var, x) in [MOM_X, MOM_Y].into_iter().zip(sol.iter_mut()) {
        let b = state.var(e, var);
        x[..n].copy_from_slice(&b[..n]);
        for r in 1..n {
            for c in 0..r {
                x[r] -= h[r][c] * x[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                x[r] -= h[r][c] * x[c];
            }
            x[r] /= h[r][r];
        }
    }

    if let Some(m) = sol.iter().flat_map(|x| &x[..n]).position(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite {
            element: e,
            context: format!("auxiliary velocity mode {}", m % n),
        });
    }
    let u = state.u_elem_mut(e);
    u.iter_mut().for_each(|v| *v = 0.0);
    u[..n].copy_from_slice(&sol[0][..n]);
    u[k..k + n].copy_from_slice(&sol[1][..n]);
    Ok(())
}
