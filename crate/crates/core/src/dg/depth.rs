use super::{Discretization, State, XI};

/// Mean total depth `H = xi + h_b` over element `e`.
#[inline]
pub fn mean_depth(d: &Discretization, state: &State, e: usize) -> f64 {
    (state.var(e, XI)[0] + d.hb(e, 0)) * d.tables.elements[e].constant_value
}

/// Enforces `mean H >= params.min_depth` on element `e`.
///
/// A violating element is reset to a flat state at the minimum depth: the
/// elevation mean is raised and every higher elevation and momentum mode is
/// cleared. Returns whether the element was modified.
pub fn min_depth_kernel(d: &Discretization, state: &mut State, e: usize) -> bool {
    let h_min = d.params.min_depth;
    if mean_depth(d, state, e) >= h_min {
        return false;
    }
    let k = state.k();
    let phi0 = d.tables.elements[e].constant_value;
    let hb0 = d.hb(e, 0);
    let c = state.c_elem_mut(e);
    c.iter_mut().for_each(|v| *v = 0.0);
    c[XI * k] = h_min / phi0 - hb0;
    true
}

/// Integral of the elevation over the domain.
pub fn total_mass(d: &Discretization, state: &State) -> f64 {
    (0..d.num_elements())
        .map(|e| state.var(e, XI)[0] / d.tables.elements[e].constant_value)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::PhysParams;
    use crate::mesh::{connect_edges, BcTag};

    fn disc() -> Discretization {
        let mut mesh = connect_edges(
            vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
            |_| BcTag::Land,
        )
        .unwrap();
        let hb = (0..2).flat_map(|e| {
            let a = mesh.geometry(e).area;
            [0.5 / (1.0 / a.sqrt()), 0.0, 0.0]
        });
        let hb: Vec<f64> = hb.collect();
        mesh.set_bathymetry(3, hb);
        Discretization::new(mesh, 1, PhysParams::dam_break()).unwrap()
    }

    #[test]
    fn clamp_restores_minimum_depth() {
        let d = disc();
        let mut s = d.new_state();
        let phi0 = d.tables.elements[0].constant_value;
        s.c_elem_mut(0)[0] = -0.6 / phi0;
        s.c_elem_mut(0)[1] = 0.2;
        s.c_elem_mut(0)[4] = 0.3;
        assert!(min_depth_kernel(&d, &mut s, 0));
        assert!((mean_depth(&d, &s, 0) - 1e-3).abs() < 1e-14);
        assert!(s.c_elem(0)[1..].iter().all(|&v| v == 0.0));
        // a deep element is untouched
        s.c_elem_mut(1)[0] = 1.0 / phi0;
        let before = s.c_elem(1).to_vec();
        assert!(!min_depth_kernel(&d, &mut s, 1));
        assert_eq!(s.c_elem(1), &before[..]);
    }

    #[test]
    fn mass_of_constant_elevation() {
        let d = disc();
        let mut s = d.new_state();
        for e in 0..2 {
            s.c_elem_mut(e)[0] = 1.5 / d.tables.elements[e].constant_value;
        }
        assert!((total_mass(&d, &s) - 3.0).abs() < 1e-14);
    }
}
