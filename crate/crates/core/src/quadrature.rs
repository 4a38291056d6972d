//! Quadrature rules.
//!
//! The flux kernels never evaluate integrals at run time; these rules serve
//! setup-time projections and the sampled edge traces of the indicator.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [0, 1], via Newton iteration on P_n.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    assert!(n > 0);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

/// Collapsed (Duffy) tensor rule on the reference triangle, exact for
/// polynomials of total degree `2n - 2`. Weights sum to 1/2.
pub fn triangle_rule(n: usize) -> Vec<([f64; 2], f64)> {
    let gl = gauss_legendre_unit(n);
    let mut out = Vec::with_capacity(n * n);
    for &(s, ws) in &gl {
        for &(t, wt) in &gl {
            out.push(([s * (1.0 - t), t], ws * wt * (1.0 - t)));
        }
    }
    out
}

/// `triangle_rule(n)` applied on each of the `4^levels` congruent
/// subtriangles of the reference triangle.
pub fn subdivided_triangle_rule(n: usize, levels: u32) -> Vec<([f64; 2], f64)> {
    let base = triangle_rule(n);
    let mut tris = vec![[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(tris.len() * 4);
        for t in tris {
            let mid = |a: [f64; 2], b: [f64; 2]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            let m01 = mid(t[0], t[1]);
            let m12 = mid(t[1], t[2]);
            let m20 = mid(t[2], t[0]);
            next.push([t[0], m01, m20]);
            next.push([m01, t[1], m12]);
            next.push([m20, m12, t[2]]);
            next.push([m12, m20, m01]);
        }
        tris = next;
    }
    let mut out = Vec::with_capacity(base.len() * tris.len());
    for t in &tris {
        let j = [
            [t[1][0] - t[0][0], t[2][0] - t[0][0]],
            [t[1][1] - t[0][1], t[2][1] - t[0][1]],
        ];
        let det = (j[0][0] * j[1][1] - j[0][1] * j[1][0]).abs();
        for &(p, w) in &base {
            let x = [
                t[0][0] + j[0][0] * p[0] + j[0][1] * p[1],
                t[0][1] + j[1][0] * p[0] + j[1][1] * p[1],
            ];
            out.push((x, w * det));
        }
    }
    out
}
