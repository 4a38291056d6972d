//! Hierarchical L2-orthonormal modal basis on triangles and the
//! quadrature-free integral tensors.
//!
//! The reference triangle has vertices (0,0), (1,0), (0,1). Basis functions
//! are obtained by Gram-Schmidt on monomials in total-degree order, with inner
//! products evaluated exactly, so the first `K(b)` functions of any order-p
//! basis are exactly the order-b basis. On a physical element with affine map
//! `x = v0 + J x_ref`, the basis is `phi_i(x) = phi_ref_i(x_ref) / sqrt(|det J|)`,
//! which is orthonormal on the element.
//!
//! All tensors are stored for the reference element with 0-based indices and
//! row-major layout `[q][i][j]` over `k = K(order)` modes.

use crate::error::BasisError;
use crate::mesh::{Mesh, Point};
use crate::poly::{Line, Poly};
use crate::quadrature;

pub const MAX_ORDER: usize = 3;
pub const MAX_MODES: usize = 10;
/// Gauss points per edge for sampled traces.
const EDGE_NODES: usize = 6;

/// Number of modes `K(p)` of the order-p space on a triangle.
pub const fn num_modes(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// Polynomial degree of the mode with 0-based index `i`.
pub const fn mode_degree(i: usize) -> usize {
    match i {
        0 => 0,
        1 | 2 => 1,
        3..=5 => 2,
        _ => 3,
    }
}

pub const REFERENCE_VERTICES: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
pub const REFERENCE_AREA: f64 = 0.5;

/// Start and end point of local edge `l` on the reference triangle.
pub fn reference_edge(l: usize) -> (Point, Point) {
    (REFERENCE_VERTICES[l], REFERENCE_VERTICES[(l + 1) % 3])
}

/// Orthonormal polynomials on the reference triangle.
#[derive(Debug, Clone)]
pub struct ReferenceBasis {
    order: usize,
    funcs: Vec<Poly>,
    grads: Vec<[Poly; 2]>,
}

impl ReferenceBasis {
    pub fn new(order: usize) -> Result<Self, BasisError> {
        if order > MAX_ORDER {
            return Err(BasisError::UnsupportedOrder(order));
        }
        let inner = |a: &Poly, b: &Poly| a.mul(b).integrate_reference();
        let mut funcs: Vec<Poly> = Vec::with_capacity(num_modes(order));
        for d in 0..=order {
            for b in 0..=d {
                let mut f = Poly::monomial(d - b, b);
                // two Gram-Schmidt passes keep orthogonality at round-off level
                for _ in 0..2 {
                    for g in &funcs {
                        let c = inner(&f, g);
                        f.add_scaled(g, -c);
                    }
                }
                let norm = inner(&f, &f).sqrt();
                funcs.push(f.scaled(1.0 / norm));
            }
        }
        let grads = funcs.iter().map(|f| [f.dx(), f.dy()]).collect();
        Ok(Self {
            order,
            funcs,
            grads,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_modes(&self) -> usize {
        self.funcs.len()
    }

    pub fn function(&self, i: usize) -> &Poly {
        &self.funcs[i]
    }

    pub fn gradient(&self, i: usize) -> &[Poly; 2] {
        &self.grads[i]
    }

    /// Value of the constant mode, `1 / sqrt(reference area)`.
    pub fn constant_value(&self) -> f64 {
        self.funcs[0].coeff(0, 0)
    }

    fn check_point(r: Point) -> Result<(), BasisError> {
        const TOL: f64 = 1e-12;
        if r[0] < -TOL || r[1] < -TOL || r[0] + r[1] > 1.0 + TOL {
            return Err(BasisError::OutsideReference(r[0], r[1]));
        }
        Ok(())
    }

    /// Values of the first `K(order)` functions at a reference point.
    pub fn eval(&self, order: usize, r: Point) -> Result<Vec<f64>, BasisError> {
        if order > self.order {
            return Err(BasisError::UnsupportedOrder(order));
        }
        Self::check_point(r)?;
        Ok(self.funcs[..num_modes(order)]
            .iter()
            .map(|f| f.eval(r[0], r[1]))
            .collect())
    }

    /// Reference gradients of the first `K(order)` functions.
    pub fn eval_gradients(&self, order: usize, r: Point) -> Result<Vec<[f64; 2]>, BasisError> {
        if order > self.order {
            return Err(BasisError::UnsupportedOrder(order));
        }
        Self::check_point(r)?;
        Ok(self.grads[..num_modes(order)]
            .iter()
            .map(|g| [g[0].eval(r[0], r[1]), g[1].eval(r[0], r[1])])
            .collect())
    }
}

/// Per-element factors mapping reference tensors to the physical element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementFactors {
    /// `1 / sqrt(|det J|)`, the basis normalisation.
    pub scale: f64,
    /// Coefficients of d/dx in terms of reference derivatives: `(J^-1)_{0,0}, (J^-1)_{1,0}`.
    pub ddx: [f64; 2],
    /// Same for d/dy: `(J^-1)_{0,1}, (J^-1)_{1,1}`.
    pub ddy: [f64; 2],
    /// Value of the constant mode on this element, `1 / sqrt(area)`.
    pub constant_value: f64,
}

/// Reference tensors plus per-element geometric factors.
#[derive(Debug, Clone)]
pub struct BasisTables {
    pub basis: ReferenceBasis,
    k: usize,
    /// `int dphi_q/dx_ref phi_i`, `[q][i]`.
    pub grad_x: Vec<f64>,
    pub grad_y: Vec<f64>,
    /// `int phi_q phi_i`, the reference Gram matrix (identity).
    pub mass: Vec<f64>,
    /// `int dphi_q/dx_ref phi_i phi_j`, `[q][i][j]`.
    pub grad_x_triple: Vec<f64>,
    pub grad_y_triple: Vec<f64>,
    /// `int phi_q phi_i phi_j`.
    pub triple: Vec<f64>,
    /// Per local edge: `int_0^1 phi_i(gamma_l(t)) dt`.
    pub edge_single: [Vec<f64>; 3],
    /// Per local edge, both traces from the same side: `[q][i]`.
    pub edge_pair: [Vec<f64>; 3],
    /// Per local edge, same side: `[q][i][j]`.
    pub edge_triple: [Vec<f64>; 3],
    /// Indexed `3 * l + l_nb`: `phi_q` on local edge `l`, `phi_i` of the
    /// neighbour on its local edge `l_nb` traversed in reverse.
    pub edge_pair_cross: Vec<Vec<f64>>,
    /// Same pairing with two neighbour functions: `[q][i][j]`, `i, j` neighbour.
    pub edge_triple_cross: Vec<Vec<f64>>,
    /// Gauss points `(t, w)` on [0, 1], symmetric under `t -> 1 - t`.
    pub edge_nodes: Vec<(f64, f64)>,
    /// Per local edge: `phi_i(gamma_l(t_g))`, `[g][i]`.
    pub edge_values: [Vec<f64>; 3],
    pub elements: Vec<ElementFactors>,
}

impl BasisTables {
    /// Reference tensors only (no mesh factors).
    pub fn reference(order: usize) -> Result<Self, BasisError> {
        let basis = ReferenceBasis::new(order)?;
        let k = basis.num_modes();
        let f = |i: usize| basis.function(i);
        let g = |i: usize, d: usize| &basis.gradient(i)[d];

        let mut grad_x = vec![0.0; k * k];
        let mut grad_y = vec![0.0; k * k];
        let mut mass = vec![0.0; k * k];
        for q in 0..k {
            for i in 0..k {
                grad_x[q * k + i] = g(q, 0).mul(f(i)).integrate_reference();
                grad_y[q * k + i] = g(q, 1).mul(f(i)).integrate_reference();
                mass[q * k + i] = f(q).mul(f(i)).integrate_reference();
            }
        }

        let mut grad_x_triple = vec![0.0; k * k * k];
        let mut grad_y_triple = vec![0.0; k * k * k];
        let mut triple = vec![0.0; k * k * k];
        for i in 0..k {
            for j in i..k {
                let fij = f(i).mul(f(j));
                for q in 0..k {
                    let vx = g(q, 0).mul(&fij).integrate_reference();
                    let vy = g(q, 1).mul(&fij).integrate_reference();
                    let vm = f(q).mul(&fij).integrate_reference();
                    for (a, b) in [(i, j), (j, i)] {
                        let idx = (q * k + a) * k + b;
                        grad_x_triple[idx] = vx;
                        grad_y_triple[idx] = vy;
                        triple[idx] = vm;
                    }
                }
            }
        }

        // traces along each local edge; the reversed trace is used by the neighbour
        let fwd: Vec<Vec<Line>> = (0..3)
            .map(|l| {
                let (a, b) = reference_edge(l);
                (0..k).map(|i| f(i).restrict(a, b)).collect()
            })
            .collect();
        let rev: Vec<Vec<Line>> = (0..3)
            .map(|l| {
                let (a, b) = reference_edge(l);
                (0..k).map(|i| f(i).restrict(b, a)).collect()
            })
            .collect();

        let mut edge_single: [Vec<f64>; 3] = Default::default();
        let mut edge_pair: [Vec<f64>; 3] = Default::default();
        let mut edge_triple: [Vec<f64>; 3] = Default::default();
        for l in 0..3 {
            let tr = &fwd[l];
            edge_single[l] = tr.iter().map(Line::integrate_unit).collect();
            let mut pair = vec![0.0; k * k];
            let mut trip = vec![0.0; k * k * k];
            for q in 0..k {
                for i in 0..k {
                    let qi = tr[q].mul(&tr[i]);
                    pair[q * k + i] = qi.integrate_unit();
                    for j in 0..k {
                        trip[(q * k + i) * k + j] = qi.mul(&tr[j]).integrate_unit();
                    }
                }
            }
            edge_pair[l] = pair;
            edge_triple[l] = trip;
        }

        let mut edge_pair_cross = Vec::with_capacity(9);
        let mut edge_triple_cross = Vec::with_capacity(9);
        for l in 0..3 {
            for ln in 0..3 {
                let mine = &fwd[l];
                let theirs = &rev[ln];
                let mut pair = vec![0.0; k * k];
                let mut trip = vec![0.0; k * k * k];
                for i in 0..k {
                    for j in i..k {
                        let ij = theirs[i].mul(&theirs[j]);
                        for q in 0..k {
                            let v = mine[q].mul(&ij).integrate_unit();
                            trip[(q * k + i) * k + j] = v;
                            trip[(q * k + j) * k + i] = v;
                        }
                    }
                    for q in 0..k {
                        pair[q * k + i] = mine[q].mul(&theirs[i]).integrate_unit();
                    }
                }
                edge_pair_cross.push(pair);
                edge_triple_cross.push(trip);
            }
        }

        let edge_nodes = quadrature::gauss_legendre_unit(EDGE_NODES);
        let edge_values: [Vec<f64>; 3] = std::array::from_fn(|l| {
            edge_nodes
                .iter()
                .flat_map(|&(t, _)| fwd[l].iter().map(move |tr| tr.eval(t)))
                .collect()
        });

        Ok(Self {
            basis,
            k,
            edge_nodes,
            edge_values,
            grad_x,
            grad_y,
            mass,
            grad_x_triple,
            grad_y_triple,
            triple,
            edge_single,
            edge_pair,
            edge_triple,
            edge_pair_cross,
            edge_triple_cross,
            elements: Vec::new(),
        })
    }

    /// Reference tensors together with the geometric factors of every element.
    pub fn build(order: usize, mesh: &Mesh) -> Result<Self, BasisError> {
        let mut t = Self::reference(order)?;
        t.elements = (0..mesh.num_elements())
            .map(|e| {
                let g = mesh.geometry(e);
                ElementFactors {
                    scale: 1.0 / g.det.abs().sqrt(),
                    ddx: [g.inverse[0][0], g.inverse[1][0]],
                    ddy: [g.inverse[0][1], g.inverse[1][1]],
                    constant_value: 1.0 / g.area.sqrt(),
                }
            })
            .collect();
        Ok(t)
    }

    pub fn order(&self) -> usize {
        self.basis.order()
    }

    /// Number of modes `K(order)` the tensors are sized for.
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn idx2(&self, q: usize, i: usize) -> usize {
        q * self.k + i
    }

    #[inline]
    pub fn idx3(&self, q: usize, i: usize, j: usize) -> usize {
        (q * self.k + i) * self.k + j
    }

    /// Physical basis values on element `e` at physical point `x`.
    pub fn eval_physical(&self, mesh: &Mesh, e: usize, order: usize, x: Point) -> Result<Vec<f64>, BasisError> {
        let r = mesh.geometry(e).to_reference(x);
        let s = self.elements[e].scale;
        Ok(self.basis.eval(order, r)?.into_iter().map(|v| v * s).collect())
    }

    /// L2 projection of `f` onto the first `K(order)` modes of every element,
    /// returned with stride `self.k()`. `levels` subdivides each element for
    /// discontinuous data.
    pub fn project<F: Fn(Point) -> f64>(&self, mesh: &Mesh, order: usize, levels: u32, f: F) -> Vec<f64> {
        let k = self.k;
        let n = num_modes(order.min(self.order()));
        let rule = quadrature::subdivided_triangle_rule(self.order() + 3, levels);
        let values: Vec<Vec<f64>> = rule
            .iter()
            .map(|(r, _)| (0..n).map(|i| self.basis.function(i).eval(r[0], r[1])).collect())
            .collect();
        let mut out = vec![0.0; k * mesh.num_elements()];
        for e in 0..mesh.num_elements() {
            let g = mesh.geometry(e);
            let s = self.elements[e].scale;
            let jac = g.det.abs();
            let coeffs = &mut out[e * k..e * k + n];
            for ((r, w), phi) in rule.iter().zip(&values) {
                let fx = f(g.to_physical(*r));
                for (c, p) in coeffs.iter_mut().zip(phi) {
                    *c += w * jac * fx * p * s;
                }
            }
        }
        out
    }

    /// Coefficients of a constant field: only the first mode is non-zero.
    pub fn constant_field(&self, mesh: &Mesh, value: f64) -> Vec<f64> {
        let k = self.k;
        let mut out = vec![0.0; k * mesh.num_elements()];
        for e in 0..mesh.num_elements() {
            out[e * k] = value / self.elements[e].constant_value;
        }
        out
    }
}
