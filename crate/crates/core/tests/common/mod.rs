//! Independent quadrature oracle.
//!
//! Nothing here uses the library's polynomial algebra or precomputed tensors:
//! the basis is rebuilt by orthonormalising products of Legendre polynomials,
//! integrals are plain Gauss sums and every residual term is evaluated
//! pointwise from its integrand.
#![allow(dead_code, clippy::needless_range_loop)]

pub mod checks;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use padg::dg::{Discretization, FrictionLaw, State, MOM_X, MOM_Y, XI};
use padg::mesh::{BcTag, Mesh};

pub type P2 = [f64; 2];

/// Gauss-Legendre rule on [0, 1] from the eigen-decomposition of the Jacobi
/// matrix (Golub-Welsch).
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            (0.5 * (x + 1.0), v0 * v0)
        })
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// Collapsed rule on the reference triangle (0,0), (1,0), (0,1).
pub fn duffy(n: usize) -> Vec<(P2, f64)> {
    let g = gauss_legendre(n);
    let mut out = Vec::with_capacity(n * n);
    for &(a, wa) in &g {
        for &(b, wb) in &g {
            out.push(([a * (1.0 - b), b], wa * wb * (1.0 - b)));
        }
    }
    out
}

pub fn k_of(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// Orthonormal basis on the reference triangle: `phi = L^{-1} m` with
/// `G = L L^T` the Gram matrix of `m_(a,b) = P_a(x) P_b(y)` in graded order
/// (`a = d - b`), `P_n` the Legendre polynomials shifted to [0, 1]. Each
/// `m_(a,b)` is a positive multiple of `x^a y^b` plus lower-degree terms, so
/// this is Gram-Schmidt on the graded monomials, just better conditioned.
pub struct OracleBasis {
    pub order: usize,
    exps: Vec<(i32, i32)>,
    /// Row `i` holds the monomial coefficients of `phi_i`.
    coef: DMatrix<f64>,
}

impl OracleBasis {
    pub fn new(order: usize) -> Self {
        let mut exps = Vec::new();
        for d in 0..=order as i32 {
            for b in 0..=d {
                exps.push((d - b, b));
            }
        }
        let n = exps.len();
        let rule = duffy(order + 4);
        let m: Vec<Vec<f64>> = rule.iter().map(|&(r, _)| exps.iter().map(|&e| mono(r, e).0).collect()).collect();
        // two Cholesky passes: the second repairs what conditioning cost the first
        let mut coef = DMatrix::<f64>::identity(n, n);
        for _ in 0..2 {
            let vals: Vec<DVector<f64>> = m.iter().map(|row| &coef * DVector::from_column_slice(row)).collect();
            let mut g = DMatrix::<f64>::zeros(n, n);
            for (v, &(_, w)) in vals.iter().zip(&rule) {
                g += w * v * v.transpose();
            }
            let l = g.cholesky().expect("Gram matrix is SPD").l();
            coef = l.try_inverse().expect("triangular factor is invertible") * coef;
        }
        Self { order, exps, coef }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn values(&self, r: P2) -> Vec<f64> {
        let m: Vec<f64> = self.exps.iter().map(|&e| mono(r, e).0).collect();
        (0..self.len())
            .map(|i| (0..=i).map(|a| self.coef[(i, a)] * m[a]).sum())
            .collect()
    }

    pub fn gradients(&self, r: P2) -> Vec<P2> {
        let dm: Vec<P2> = self.exps.iter().map(|&e| mono(r, e).1).collect();
        (0..self.len())
            .map(|i| {
                let mut g = [0.0; 2];
                for a in 0..=i {
                    g[0] += self.coef[(i, a)] * dm[a][0];
                    g[1] += self.coef[(i, a)] * dm[a][1];
                }
                g
            })
            .collect()
    }
}

/// Shifted Legendre polynomial `P_n(2t - 1)` and its derivative in `t`.
fn legendre(n: i32, t: f64) -> (f64, f64) {
    let x = 2.0 * t - 1.0;
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    if n == 0 {
        return (1.0, 0.0);
    }
    for m in 2..=n {
        let m = m as f64;
        let p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        let d2 = d0 + (2.0 * m - 1.0) * p1;
        (p0, p1, d0, d1) = (p1, p2, d1, d2);
    }
    (p1, 2.0 * d1)
}

/// Value and gradient of `P_a(x) P_b(y)`.
fn mono(r: P2, (a, b): (i32, i32)) -> (f64, P2) {
    let (pa, da) = legendre(a, r[0]);
    let (pb, db) = legendre(b, r[1]);
    (pa * pb, [da * pb, pa * db])
}

/// Affine map of one element rebuilt from its vertices.
pub struct Affine {
    pub v0: P2,
    pub j: [[f64; 2]; 2],
    pub inv: [[f64; 2]; 2],
    pub det: f64,
}

impl Affine {
    pub fn new(v: [P2; 3]) -> Self {
        let j = [[v[1][0] - v[0][0], v[2][0] - v[0][0]], [v[1][1] - v[0][1], v[2][1] - v[0][1]]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
        Self { v0: v[0], j, inv, det }
    }

    pub fn to_phys(&self, r: P2) -> P2 {
        [
            self.v0[0] + self.j[0][0] * r[0] + self.j[0][1] * r[1],
            self.v0[1] + self.j[1][0] * r[0] + self.j[1][1] * r[1],
        ]
    }

    pub fn to_ref(&self, x: P2) -> P2 {
        let d = [x[0] - self.v0[0], x[1] - self.v0[1]];
        [
            self.inv[0][0] * d[0] + self.inv[0][1] * d[1],
            self.inv[1][0] * d[0] + self.inv[1][1] * d[1],
        ]
    }
}

/// Physical basis values and gradients of one element at a physical point.
pub struct PhysEval {
    pub phi: Vec<f64>,
    pub grad: Vec<P2>,
}

/// Fields of one side at one point.
#[derive(Clone, Copy, Debug, Default)]
pub struct Fields {
    pub xi: f64,
    pub mx: f64,
    pub my: f64,
    pub u: f64,
    pub v: f64,
    pub hb: f64,
}

pub struct Oracle {
    pub basis: OracleBasis,
    tri: Vec<(P2, f64)>,
    line: Vec<(f64, f64)>,
}

impl Oracle {
    pub fn new(order: usize) -> Self {
        Self {
            basis: OracleBasis::new(order),
            tri: duffy(8),
            line: gauss_legendre(8),
        }
    }

    pub fn affine(&self, mesh: &Mesh, e: usize) -> Affine {
        Affine::new(mesh.element_vertices(e))
    }

    pub fn eval(&self, a: &Affine, x: P2) -> PhysEval {
        let r = a.to_ref(x);
        let s = 1.0 / a.det.abs().sqrt();
        let phi = self.basis.values(r).into_iter().map(|v| v * s).collect();
        let grad = self
            .basis
            .gradients(r)
            .into_iter()
            .map(|g| {
                [
                    s * (a.inv[0][0] * g[0] + a.inv[1][0] * g[1]),
                    s * (a.inv[0][1] * g[0] + a.inv[1][1] * g[1]),
                ]
            })
            .collect();
        PhysEval { phi, grad }
    }

    /// Fields of element `e` at a point; elevation and momentum truncated to
    /// `n` modes, bathymetry to `n_hb` modes.
    pub fn fields(&self, d: &Discretization, s: &State, e: usize, ev: &PhysEval, n: usize, n_hb: usize) -> Fields {
        let k = d.k();
        let c = s.c_elem(e);
        let u = s.u_elem(e);
        let hb = d.mesh.bathymetry(e);
        let dot = |v: &[f64], m: usize| (0..m.min(v.len())).map(|i| v[i] * ev.phi[i]).sum::<f64>();
        Fields {
            xi: dot(&c[XI * k..XI * k + k], n),
            mx: dot(&c[MOM_X * k..MOM_X * k + k], n),
            my: dot(&c[MOM_Y * k..MOM_Y * k + k], n),
            u: dot(&u[..k], n),
            v: dot(&u[k..], n),
            hb: dot(hb, n_hb),
        }
    }

    /// Integral mean of a field over element `e`.
    pub fn mean(&self, d: &Discretization, s: &State, e: usize, f: impl Fn(&Fields) -> f64) -> f64 {
        let a = self.affine(&d.mesh, e);
        let k = d.k();
        let mut acc = 0.0;
        for &(r, w) in &self.tri {
            let ev = self.eval(&a, a.to_phys(r));
            acc += w * f(&self.fields(d, s, e, &ev, k, k));
        }
        acc / 0.5
    }

    /// Element integrals `(A, grad phi_q) + (r, phi_q)` of element `e` at
    /// order `p`, as `[xi | U | V]` rows of `K(p)` entries padded to `k`.
    pub fn element_residual(&self, d: &Discretization, s: &State, e: usize, p: usize) -> Vec<f64> {
        let k = d.k();
        let n = k_of(p);
        let par = &d.params;
        let g = par.gravity;
        let a = self.affine(&d.mesh, e);
        let jac = a.det.abs();
        let u0 = [
            self.mean(d, s, e, |f| f.u),
            self.mean(d, s, e, |f| f.v),
        ];
        // the constant velocity is the mean of the stored (truncated) velocity
        let mut out = vec![0.0; 3 * k];
        for &(r, w) in &self.tri {
            let x = a.to_phys(r);
            let ev = self.eval(&a, x);
            let f = self.fields(d, s, e, &ev, n, n);
            let hbg = {
                let hb = d.mesh.bathymetry(e);
                let mut gr = [0.0; 2];
                for i in 0..n.min(hb.len()) {
                    gr[0] += hb[i] * ev.grad[i][0];
                    gr[1] += hb[i] * ev.grad[i][1];
                }
                gr
            };
            let press = g * (0.5 * f.xi * f.xi + f.xi * f.hb);
            let ax = [f.mx, f.mx * f.u + press, f.my * f.u];
            let ay = [f.my, f.mx * f.v, f.my * f.v + press];
            let mut rhs = [0.0, 0.0, 0.0];
            match par.friction {
                FrictionLaw::Linear { coeff } => {
                    rhs[1] -= coeff * (f.xi + f.hb) * u0[0];
                    rhs[2] -= coeff * (f.xi + f.hb) * u0[1];
                }
                FrictionLaw::Quadratic { coeff } => {
                    let speed = u0[0].hypot(u0[1]);
                    rhs[1] -= coeff * speed * f.u;
                    rhs[2] -= coeff * speed * f.v;
                }
            }
            rhs[1] += par.coriolis * f.my + par.body_force[0] + g * f.xi * hbg[0];
            rhs[2] += -par.coriolis * f.mx + par.body_force[1] + g * f.xi * hbg[1];
            for q in 0..n {
                for row in 0..3 {
                    out[row * k + q] +=
                        w * jac * (ax[row] * ev.grad[q][0] + ay[row] * ev.grad[q][1] + rhs[row] * ev.phi[q]);
                }
            }
        }
        out
    }

    /// Lax-Friedrichs edge term of element `e` across its local edge `l`,
    /// `-1/2 <(A + A+) . n + lambda (c - c+), phi_q>`. `orders` gives every
    /// element's active order.
    pub fn edge_residual(&self, d: &Discretization, s: &State, e: usize, l: usize, orders: &[usize]) -> Vec<f64> {
        let k = d.k();
        let mesh = &d.mesh;
        let g = d.params.gravity;
        let vs = mesh.element_vertices(e);
        let (va, vb) = (vs[l], vs[(l + 1) % 3]);
        let len = (vb[0] - va[0]).hypot(vb[1] - va[1]);
        let n = [(vb[1] - va[1]) / len, -(vb[0] - va[0]) / len];
        let nb = mesh.neighbor(e, l);
        let p = orders[e];
        let q_ord = nb.map_or(p, |o| orders[o].max(p));
        let m = k_of(q_ord);
        let a_own = self.affine(mesh, e);
        let a_nb = nb.map(|o| self.affine(mesh, o));

        let mean_fields = |el: usize| -> (f64, P2) {
            let h = self.mean(d, s, el, |f| f.xi + f.hb);
            let u = [self.mean(d, s, el, |f| f.u), self.mean(d, s, el, |f| f.v)];
            (h, u)
        };
        let (h0, u0) = mean_fields(e);
        let (h1, u1) = match nb {
            Some(o) => mean_fields(o),
            None => {
                if mesh.edge(mesh.element_edges(e)[l].0).tag != Some(BcTag::Land) {
                    panic!("oracle handles land boundaries only");
                }
                let dn = u0[0] * n[0] + u0[1] * n[1];
                (h0, [u0[0] - 2.0 * dn * n[0], u0[1] - 2.0 * dn * n[1]])
            }
        };
        let speed = (u0[0] * n[0] + u0[1] * n[1]).abs().max((u1[0] * n[0] + u1[1] * n[1]).abs());
        let lambda = speed + (g * h0).sqrt().max((g * h1).sqrt());

        let flux = |f: &Fields| -> [f64; 3] {
            let press = g * (0.5 * f.xi * f.xi + f.xi * f.hb);
            [
                f.mx * n[0] + f.my * n[1],
                (f.mx * f.u + press) * n[0] + f.mx * f.v * n[1],
                f.my * f.u * n[0] + (f.my * f.v + press) * n[1],
            ]
        };
        let np = k_of(p);
        let mut out = vec![0.0; 3 * k];
        for &(t, w) in &self.line {
            let x = [va[0] + t * (vb[0] - va[0]), va[1] + t * (vb[1] - va[1])];
            let ev = self.eval(&a_own, x);
            let fo = self.fields(d, s, e, &ev, m, m);
            let fn_ = match (nb, &a_nb) {
                (Some(o), Some(an)) => {
                    let evn = self.eval(an, x);
                    self.fields(d, s, o, &evn, m, m)
                }
                _ => {
                    let dm = fo.mx * n[0] + fo.my * n[1];
                    let du = fo.u * n[0] + fo.v * n[1];
                    Fields {
                        mx: fo.mx - 2.0 * dm * n[0],
                        my: fo.my - 2.0 * dm * n[1],
                        u: fo.u - 2.0 * du * n[0],
                        v: fo.v - 2.0 * du * n[1],
                        ..fo
                    }
                }
            };
            let (fa, fb) = (flux(&fo), flux(&fn_));
            let jump = [fo.xi - fn_.xi, fo.mx - fn_.mx, fo.my - fn_.my];
            for q in 0..np {
                for row in 0..3 {
                    out[row * k + q] -= 0.5 * w * len * (fa[row] + fb[row] + lambda * jump[row]) * ev.phi[q];
                }
            }
        }
        out
    }

    /// Full semi-discrete residual of every element.
    pub fn residual(&self, d: &Discretization, s: &State, orders: &[usize]) -> Vec<f64> {
        let k = d.k();
        let mut out = vec![0.0; 3 * k * d.num_elements()];
        for e in 0..d.num_elements() {
            let mut r = self.element_residual(d, s, e, orders[e]);
            for l in 0..3 {
                let er = self.edge_residual(d, s, e, l, orders);
                r.iter_mut().zip(&er).for_each(|(a, b)| *a += b);
            }
            out[3 * k * e..3 * k * (e + 1)].copy_from_slice(&r);
        }
        out
    }
}

/// Random bounded state: depth in [0.5, 1.5] plus small higher modes,
/// moderate momentum, modes above each element's order zeroed.
pub fn random_state(d: &Discretization, orders: &[usize], seed: u64) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = d.k();
    let mut s = d.new_state();
    for e in 0..d.num_elements() {
        let n = k_of(orders[e]);
        let phi0 = d.tables.elements[e].constant_value;
        let hb0 = d.mesh.bathymetry(e)[0];
        let scale = 1.0 / phi0;
        let c = s.c_elem_mut(e);
        c[XI * k] = rng.gen_range(0.5..1.5) * scale - hb0;
        c[MOM_X * k] = rng.gen_range(-0.5..0.5) * scale;
        c[MOM_Y * k] = rng.gen_range(-0.5..0.5) * scale;
        for var in 0..3 {
            for i in 1..n {
                c[var * k + i] = rng.gen_range(-0.05..0.05) * scale;
            }
        }
        let u = s.u_elem_mut(e);
        for var in 0..2 {
            u[var * k] = rng.gen_range(-0.5..0.5) * scale;
            for i in 1..n {
                u[var * k + i] = rng.gen_range(-0.05..0.05) * scale;
            }
        }
    }
    s
}

/// Largest entry-wise difference relative to the largest magnitude of `b`.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// `nx x nx` perturbed mesh on [0, 5]^2 with random piecewise-polynomial
/// bathymetry (mean near 0.5, small higher modes).
pub fn random_disc(nx: usize, order: usize, params: padg::dg::PhysParams, seed: u64) -> Discretization {
    let mut mesh = padg::mesh::generate_perturbed_uniform_mesh(nx, padg::mesh::Rect::square(0.0, 5.0), 0.2, seed)
        .expect("valid mesh");
    let k = k_of(order);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut hb = vec![0.0; k * mesh.num_elements()];
    for e in 0..mesh.num_elements() {
        let phi0 = 1.0 / mesh.geometry(e).area.sqrt();
        hb[e * k] = rng.gen_range(0.4..0.6) / phi0;
        for i in 1..k {
            hb[e * k + i] = rng.gen_range(-0.02..0.02) / phi0;
        }
    }
    mesh.set_bathymetry(k, hb);
    Discretization::new(mesh, order, params).expect("valid discretization")
}

/// Parameters with every source term switched on.
pub fn busy_params(quadratic: bool) -> padg::dg::PhysParams {
    padg::dg::PhysParams {
        gravity: 9.81,
        coriolis: 0.3,
        friction: if quadratic {
            FrictionLaw::Quadratic { coeff: 0.009 }
        } else {
            FrictionLaw::Linear { coeff: 0.02 }
        },
        body_force: [0.1, -0.2],
        min_depth: 1e-3,
    }
}

/// Random order field with every element at `base` or `base + 1`.
pub fn random_orders(n: usize, base: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| base + rng.gen_range(0..2)).collect()
}
