//! Deviation measures shared by the oracle tests and the acceptance run.

use padg::adaptivity::{base_ranges, correction_ranges};
use padg::basis::{num_modes, BasisTables};
use padg::dg::{
    edge_flux_kernel, element_flux_kernel, rhs_kernel, Discretization, Ghosts, IndexRange, KernelRanges, Residual,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

// forward and reversed trace values with the weight, per edge point
type EdgeSample = (Vec<f64>, Vec<f64>, f64);

pub fn edge_point(l: usize, t: f64) -> P2 {
    let v = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let (a, b) = (v[l], v[(l + 1) % 3]);
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Checks every tensor entry for `p <= 2`; for `p = 3` a random sample of
/// `samples` entries per tensor.
pub fn check_tensors(p: usize, samples: Option<usize>) -> f64 {
    let t = BasisTables::reference(p).unwrap();
    let ob = OracleBasis::new(p);
    let k = t.k();
    let tri = duffy(8);
    let line = gauss_legendre(8);
    let vals: Vec<(Vec<f64>, Vec<P2>, f64)> =
        tri.iter().map(|&(r, w)| (ob.values(r), ob.gradients(r), w)).collect();
    let edge_vals: Vec<Vec<EdgeSample>> = (0..3)
        .map(|l| {
            line.iter()
                .map(|&(s, w)| (ob.values(edge_point(l, s)), ob.values(edge_point(l, 1.0 - s)), w))
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(11 + p as u64);
    let triples: Vec<(usize, usize, usize)> = match samples {
        None => (0..k).flat_map(|q| (0..k).flat_map(move |i| (0..k).map(move |j| (q, i, j)))).collect(),
        Some(n) => (0..n).map(|_| (rng.gen_range(0..k), rng.gen_range(0..k), rng.gen_range(0..k))).collect(),
    };
    let mut worst: f64 = 0.0;
    let mut check = |lib: f64, ora: f64| worst = worst.max((lib - ora).abs());

    for &(q, i, j) in &triples {
        let (mut gx, mut gy, mut m, mut gxt, mut gyt, mut tr) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for (phi, grad, w) in &vals {
            gx += w * grad[q][0] * phi[i];
            gy += w * grad[q][1] * phi[i];
            m += w * phi[q] * phi[i];
            gxt += w * grad[q][0] * phi[i] * phi[j];
            gyt += w * grad[q][1] * phi[i] * phi[j];
            tr += w * phi[q] * phi[i] * phi[j];
        }
        check(t.grad_x[q * k + i], gx);
        check(t.grad_y[q * k + i], gy);
        check(t.mass[q * k + i], m);
        check(t.mass[q * k + i], if q == i { 1.0 } else { 0.0 });
        let idx = (q * k + i) * k + j;
        check(t.grad_x_triple[idx], gxt);
        check(t.grad_y_triple[idx], gyt);
        check(t.triple[idx], tr);
        for l in 0..3 {
            let (mut single, mut pair, mut trip) = (0.0, 0.0, 0.0);
            for (fwd, _, w) in &edge_vals[l] {
                single += w * fwd[i];
                pair += w * fwd[q] * fwd[i];
                trip += w * fwd[q] * fwd[i] * fwd[j];
            }
            check(t.edge_single[l][i], single);
            check(t.edge_pair[l][q * k + i], pair);
            check(t.edge_triple[l][idx], trip);
            for ln in 0..3 {
                let (mut cp, mut ct) = (0.0, 0.0);
                for ((fwd, _, w), (_, rev, _)) in edge_vals[l].iter().zip(&edge_vals[ln]) {
                    cp += w * fwd[q] * rev[i];
                    ct += w * fwd[q] * rev[i] * rev[j];
                }
                check(t.edge_pair_cross[3 * l + ln][q * k + i], cp);
                check(t.edge_triple_cross[3 * l + ln][idx], ct);
            }
        }
    }
    for l in 0..3 {
        for (g, &(s, _)) in t.edge_nodes.iter().enumerate() {
            let v = ob.values(edge_point(l, s));
            for i in 0..k {
                check(t.edge_values[l][g * k + i], v[i]);
            }
        }
    }
    worst
}

/// Largest tensor deviation over `p <= 2` (exhaustive) and `p = 3` (sampled).
pub fn tensor_deviation() -> f64 {
    let mut worst: f64 = 0.0;
    for p in 0..=2 {
        worst = worst.max(check_tensors(p, None));
    }
    worst.max(check_tensors(3, Some(300)))
}

/// Library residual through the kernels with unseparated ranges.
pub fn library_residual(d: &padg::dg::Discretization, s: &padg::dg::State, orders: &[usize]) -> Vec<f64> {
    let mut ghosts = Ghosts::new(d);
    ghosts.update(d, s, 0.0).unwrap();
    let mut res = Residual::zeros(d.num_elements(), d.k());
    for e in 0..d.num_elements() {
        let r = KernelRanges::full(num_modes(orders[e]));
        element_flux_kernel(d, s, e, r, res.elem_mut(e));
        rhs_kernel(d, s, e, r, res.elem_mut(e));
    }
    for edge in 0..d.mesh.num_edges() {
        let sides = d.mesh.edge(edge).sides;
        let mut r = [[KernelRanges::full(1)]; 2];
        let mut n = [0usize; 2];
        for side in 0..2 {
            if let Some((e, _)) = sides[side] {
                let q = sides[1 - side].map_or(orders[e], |(o, _)| orders[o].max(orders[e]));
                r[side][0] = KernelRanges {
                    test: IndexRange::upto(num_modes(orders[e])),
                    trial: IndexRange::upto(num_modes(q)),
                };
                n[side] = 1;
            }
        }
        edge_flux_kernel(d, s, &ghosts, edge, [&r[0][..n[0]], &r[1][..n[1]]], &mut res).unwrap();
    }
    res.data
}

/// Worst relative kernel/oracle deviation over `states` random states on a
/// 4x4 mesh, alternating the friction law and the order pair.
pub fn kernel_deviation(states: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..states {
        let quadratic = seed % 2 == 1;
        let base = (seed / 2 % 2) as usize;
        let p = base + 1;
        let d = random_disc(4, p, busy_params(quadratic), seed);
        let oracle = Oracle::new(p);
        let orders = random_orders(d.num_elements(), base, seed);
        let s = random_state(&d, &orders, seed);
        let lib = library_residual(&d, &s, &orders);
        let ora = oracle.residual(&d, &s, &orders);
        worst = worst.max(rel_diff(&lib, &ora));
    }
    worst
}


/// Element and edge contributions at the full order, the way the unseparated
/// kernels sweep them: each side tests at its own order against the larger
/// order of the two sides.
fn full_ranges(d: &Discretization, edge: usize, orders: &[usize]) -> ([KernelRanges; 2], [usize; 2]) {
    let sides = d.mesh.edge(edge).sides;
    let mut r = [KernelRanges::full(1); 2];
    let mut n = [0usize; 2];
    for side in 0..2 {
        if let Some((e, _)) = sides[side] {
            let q = sides[1 - side].map_or(orders[e], |(o, _)| orders[o].max(orders[e]));
            r[side] = KernelRanges {
                test: IndexRange::upto(num_modes(orders[e])),
                trial: IndexRange::upto(num_modes(q)),
            };
            n[side] = 1;
        }
    }
    (r, n)
}

fn block_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// Worst relative gap between base + correction and the full-order
/// contribution, over every element (element and source kernels) and every
/// edge (edge kernel, both sides), for one random state on `d`.
pub fn separation_gap(d: &Discretization, base: usize, seed: u64) -> f64 {
    let orders = random_orders(d.num_elements(), base, seed);
    let s = random_state(d, &orders, seed);
    let mut ghosts = Ghosts::new(d);
    ghosts.update(d, &s, 0.0).unwrap();
    let k = d.k();
    let b = base_ranges(base);
    let corr = correction_ranges(base, base + 1);
    let mut worst: f64 = 0.0;

    for e in 0..d.num_elements() {
        let mut split = vec![0.0; 3 * k];
        let mut full = vec![0.0; 3 * k];
        let mut parts = vec![b];
        if orders[e] > base {
            parts.extend(corr);
        }
        for r in parts {
            element_flux_kernel(d, &s, e, r, &mut split);
            rhs_kernel(d, &s, e, r, &mut split);
        }
        let r = KernelRanges::full(num_modes(orders[e]));
        element_flux_kernel(d, &s, e, r, &mut full);
        rhs_kernel(d, &s, e, r, &mut full);
        worst = worst.max(block_rel(&split, &full));
    }

    let mut split = Residual::zeros(d.num_elements(), k);
    let mut full = Residual::zeros(d.num_elements(), k);
    for edge in 0..d.mesh.num_edges() {
        let sides = d.mesh.edge(edge).sides;
        split.clear();
        full.clear();
        edge_flux_kernel(d, &s, &ghosts, edge, [&[b], &[b]], &mut split).unwrap();
        let pick = |side: usize| -> &[KernelRanges] {
            match sides[side] {
                Some((e, _)) if orders[e] > base => &corr[..],
                Some(_) => &corr[..1],
                None => &[],
            }
        };
        if sides.iter().flatten().any(|&(e, _)| orders[e] > base) {
            edge_flux_kernel(d, &s, &ghosts, edge, [pick(0), pick(1)], &mut split).unwrap();
        }
        let (r, n) = full_ranges(d, edge, &orders);
        edge_flux_kernel(d, &s, &ghosts, edge, [&r[..n[0]], &r[1..1 + n[1]]], &mut full).unwrap();
        for &(e, _) in sides.iter().flatten() {
            worst = worst.max(block_rel(split.elem(e), full.elem(e)));
        }
    }
    worst
}

/// [`separation_gap`] over `states` random states on an 8x8 mesh
/// (128 elements) for the order pair `base`-`base + 1`.
pub fn separation_deviation(base: usize, states: u64) -> f64 {
    let d = random_disc(8, base + 1, busy_params(base == 1), 40 + base as u64);
    (0..states).map(|seed| separation_gap(&d, base, seed)).fold(0.0, f64::max)
}
