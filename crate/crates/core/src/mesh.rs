//! Triangulations with edge connectivity and affine element geometry.
//!
//! Local edge `l` of an element runs from its vertex `l` to vertex `(l + 1) % 3`.
//! Elements are counterclockwise, so the two elements sharing an interior edge
//! traverse it in opposite directions.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, MeshError};

pub type Point = [f64; 2];

/// Boundary condition attached to a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BcTag {
    Land,
    OpenSea,
}

impl BcTag {
    pub fn as_str(self) -> &'static str {
        match self {
            BcTag::Land => "land",
            BcTag::OpenSea => "open_sea",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "land" => Some(BcTag::Land),
            "open_sea" => Some(BcTag::OpenSea),
            _ => None,
        }
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn square(lo: f64, hi: f64) -> Self {
        Self {
            x0: lo,
            x1: hi,
            y0: lo,
            y1: hi,
        }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

/// Affine map `x = v0 + J x_ref` of one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    /// Columns are `v1 - v0` and `v2 - v0`.
    pub jacobian: [[f64; 2]; 2],
    pub inverse: [[f64; 2]; 2],
    pub det: f64,
    pub area: f64,
    pub centroid: Point,
    pub origin: Point,
}

impl ElementGeometry {
    fn new(v: [Point; 3]) -> Self {
        let j = [
            [v[1][0] - v[0][0], v[2][0] - v[0][0]],
            [v[1][1] - v[0][1], v[2][1] - v[0][1]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let inverse = [
            [j[1][1] / det, -j[0][1] / det],
            [-j[1][0] / det, j[0][0] / det],
        ];
        Self {
            jacobian: j,
            inverse,
            det,
            area: 0.5 * det.abs(),
            centroid: [
                (v[0][0] + v[1][0] + v[2][0]) / 3.0,
                (v[0][1] + v[1][1] + v[2][1]) / 3.0,
            ],
            origin: v[0],
        }
    }

    pub fn to_physical(&self, r: Point) -> Point {
        [
            self.origin[0] + self.jacobian[0][0] * r[0] + self.jacobian[0][1] * r[1],
            self.origin[1] + self.jacobian[1][0] * r[0] + self.jacobian[1][1] * r[1],
        ]
    }

    pub fn to_reference(&self, x: Point) -> Point {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [
            self.inverse[0][0] * d[0] + self.inverse[0][1] * d[1],
            self.inverse[1][0] * d[0] + self.inverse[1][1] * d[1],
        ]
    }
}

/// One mesh edge. Side 0 is the first element that referenced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Vertices in the direction traversed by side 0.
    pub vertices: [usize; 2],
    /// `(element, local edge)` on each side; side 1 is `None` on the boundary.
    pub sides: [Option<(usize, usize)>; 2],
    /// Unit normal pointing out of the side-0 element.
    pub normal: Point,
    pub length: f64,
    pub midpoint: Point,
    pub tag: Option<BcTag>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.sides[1].is_none()
    }

    pub fn owner(&self) -> (usize, usize) {
        self.sides[0].expect("edge without owner")
    }

    /// Outward normal as seen from `side`.
    pub fn normal_from(&self, side: usize) -> Point {
        if side == 0 {
            self.normal
        } else {
            [-self.normal[0], -self.normal[1]]
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    elements: Vec<[usize; 3]>,
    geometry: Vec<ElementGeometry>,
    edges: Vec<Edge>,
    /// For each element and local edge: `(edge id, side)`.
    element_edges: Vec<[(usize, usize); 3]>,
    bathymetry_stride: usize,
    bathymetry: Vec<f64>,
}

/// Uniform `nx x nx` grid of squares, each split along the same diagonal,
/// with interior vertices randomly displaced by at most
/// `perturbation * cell_size` per coordinate. Uses ChaCha8 seeded with `seed`.
pub fn generate_perturbed_uniform_mesh(
    nx: usize,
    domain: Rect,
    perturbation: f64,
    seed: u64,
) -> Result<Mesh, MeshError> {
    if nx == 0 {
        return Err(MeshError::InvalidParameter("nx must be at least 1".into()));
    }
    if !(0.0..0.5).contains(&perturbation) {
        return Err(MeshError::InvalidParameter(format!(
            "perturbation {perturbation} must lie in [0, 0.5)"
        )));
    }
    if !(domain.x1 > domain.x0 && domain.y1 > domain.y0) {
        return Err(MeshError::InvalidParameter("empty domain".into()));
    }
    let hx = (domain.x1 - domain.x0) / nx as f64;
    let hy = (domain.y1 - domain.y0) / nx as f64;
    let n = nx + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let mut p = [domain.x0 + i as f64 * hx, domain.y0 + j as f64 * hy];
            // boundary rows and columns use the exact endpoints
            if i == nx {
                p[0] = domain.x1;
            }
            if j == nx {
                p[1] = domain.y1;
            }
            let interior = i > 0 && i < nx && j > 0 && j < nx;
            if interior && perturbation > 0.0 {
                p[0] += rng.gen_range(-perturbation..=perturbation) * hx;
                p[1] += rng.gen_range(-perturbation..=perturbation) * hy;
            }
            vertices.push(p);
        }
    }
    let idx = |i: usize, j: usize| j * n + i;
    let mut triangles = Vec::with_capacity(2 * nx * nx);
    for j in 0..nx {
        for i in 0..nx {
            let a = idx(i, j);
            let b = idx(i + 1, j);
            let c = idx(i + 1, j + 1);
            let d = idx(i, j + 1);
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    connect_edges(vertices, triangles, |_| BcTag::Land)
}

/// Builds the edge table and element geometry for a counterclockwise
/// triangle list. `tag_rule` maps a boundary edge midpoint to its condition.
pub fn connect_edges(
    vertices: Vec<Point>,
    elements: Vec<[usize; 3]>,
    tag_rule: impl Fn(Point) -> BcTag,
) -> Result<Mesh, MeshError> {
    let mut geometry = Vec::with_capacity(elements.len());
    for (e, tri) in elements.iter().enumerate() {
        for &v in tri {
            if v >= vertices.len() {
                return Err(MeshError::MissingVertex { element: e, vertex: v });
            }
        }
        let g = ElementGeometry::new([vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]]);
        if !(g.det > 0.0) {
            return Err(MeshError::InvertedElement {
                element: e,
                area: 0.5 * g.det,
            });
        }
        geometry.push(g);
    }

    let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(elements.len() * 2);
    let mut edges: Vec<Edge> = Vec::with_capacity(elements.len() * 3 / 2 + 1);
    let mut element_edges = vec![[(usize::MAX, 0); 3]; elements.len()];
    for (e, tri) in elements.iter().enumerate() {
        for l in 0..3 {
            let a = tri[l];
            let b = tri[(l + 1) % 3];
            let key = (a.min(b), a.max(b));
            match lookup.get(&key) {
                None => {
                    let pa = vertices[a];
                    let pb = vertices[b];
                    let d = [pb[0] - pa[0], pb[1] - pa[1]];
                    let length = d[0].hypot(d[1]);
                    edges.push(Edge {
                        vertices: [a, b],
                        sides: [Some((e, l)), None],
                        normal: [d[1] / length, -d[0] / length],
                        length,
                        midpoint: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
                        tag: None,
                    });
                    lookup.insert(key, edges.len() - 1);
                    element_edges[e][l] = (edges.len() - 1, 0);
                }
                Some(&id) => {
                    let edge = &mut edges[id];
                    if edge.sides[1].is_some() {
                        return Err(MeshError::NonManifoldEdge(key.0, key.1));
                    }
                    if edge.vertices != [b, a] {
                        return Err(MeshError::InconsistentOrientation(key.0, key.1));
                    }
                    edge.sides[1] = Some((e, l));
                    element_edges[e][l] = (id, 1);
                }
            }
        }
    }
    for edge in edges.iter_mut() {
        if edge.is_boundary() {
            edge.tag = Some(tag_rule(edge.midpoint));
        }
    }
    let n_elem = elements.len();
    Ok(Mesh {
        vertices,
        elements,
        geometry,
        edges,
        element_edges,
        bathymetry_stride: 1,
        bathymetry: vec![0.0; n_elem],
    })
}

impl Mesh {
    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_interior_edges(&self) -> usize {
        self.edges.iter().filter(|e| !e.is_boundary()).count()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn element_vertices(&self, e: usize) -> [Point; 3] {
        let t = self.elements[e];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn geometry(&self, e: usize) -> &ElementGeometry {
        &self.geometry[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// `(edge id, side)` for each local edge of element `e`.
    pub fn element_edges(&self, e: usize) -> [(usize, usize); 3] {
        self.element_edges[e]
    }

    /// Element across local edge `l` of `e`, if any.
    pub fn neighbor(&self, e: usize, l: usize) -> Option<usize> {
        let (id, side) = self.element_edges[e][l];
        self.edges[id].sides[1 - side].map(|(n, _)| n)
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    /// Modal coefficients of the bathymetry on element `e`.
    pub fn bathymetry(&self, e: usize) -> &[f64] {
        let s = self.bathymetry_stride;
        &self.bathymetry[e * s..(e + 1) * s]
    }

    pub fn bathymetry_modes(&self) -> usize {
        self.bathymetry_stride
    }

    /// Replaces the bathymetry with `modes` coefficients per element.
    pub fn set_bathymetry(&mut self, modes: usize, coeffs: Vec<f64>) {
        assert_eq!(coeffs.len(), modes * self.num_elements());
        self.bathymetry_stride = modes;
        self.bathymetry = coeffs;
    }

    pub fn set_boundary_tags(&mut self, rule: impl Fn(Point) -> BcTag) {
        for edge in self.edges.iter_mut().filter(|e| e.is_boundary()) {
            edge.tag = Some(rule(edge.midpoint));
        }
    }

    /// Plain-text dump: header `n_vertices n_elements n_boundary_edges`, then
    /// `x y` lines, `v0 v1 v2` lines and `edge_id tag` lines.
    pub fn to_text(&self) -> String {
        let boundary: Vec<(usize, &Edge)> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_boundary())
            .collect();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {}",
            self.vertices.len(),
            self.elements.len(),
            boundary.len()
        );
        for v in &self.vertices {
            let _ = writeln!(out, "{:?} {:?}", v[0], v[1]);
        }
        for t in &self.elements {
            let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
        }
        for (id, e) in boundary {
            let _ = writeln!(out, "{} {}", id, e.tag.unwrap_or(BcTag::Land).as_str());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Mesh, MeshError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let perr = |line: usize, msg: &str| MeshError::Parse {
            line,
            msg: msg.to_string(),
        };
        let (hl, header) = lines.next().ok_or_else(|| perr(1, "missing header"))?;
        let counts: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| perr(hl, "bad count")))
            .collect::<Result<_, _>>()?;
        if counts.len() != 3 {
            return Err(perr(hl, "header needs three counts"));
        }
        let mut vertices = Vec::with_capacity(counts[0]);
        for _ in 0..counts[0] {
            let (ln, l) = lines.next().ok_or_else(|| perr(hl, "missing vertex line"))?;
            let v: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| perr(ln, "bad coordinate")))
                .collect::<Result<_, _>>()?;
            if v.len() != 2 {
                return Err(perr(ln, "vertex line needs two coordinates"));
            }
            vertices.push([v[0], v[1]]);
        }
        let mut elements = Vec::with_capacity(counts[1]);
        for _ in 0..counts[1] {
            let (ln, l) = lines.next().ok_or_else(|| perr(hl, "missing element line"))?;
            let v: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| perr(ln, "bad vertex index")))
                .collect::<Result<_, _>>()?;
            if v.len() != 3 {
                return Err(perr(ln, "element line needs three indices"));
            }
            elements.push([v[0], v[1], v[2]]);
        }
        let mut mesh = connect_edges(vertices, elements, |_| BcTag::Land)?;
        for _ in 0..counts[2] {
            let (ln, l) = lines.next().ok_or_else(|| perr(hl, "missing tag line"))?;
            let mut it = l.split_whitespace();
            let id: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| perr(ln, "bad edge id"))?;
            let tag = it
                .next()
                .and_then(BcTag::parse)
                .ok_or_else(|| perr(ln, "bad boundary tag"))?;
            match mesh.edges.get_mut(id) {
                Some(e) if e.is_boundary() => e.tag = Some(tag),
                _ => return Err(perr(ln, "edge id is not a boundary edge")),
            }
        }
        Ok(mesh)
    }

    pub fn write(&self, path: &Path) -> Result<(), Error> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Mesh, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Mesh::from_text(&text)?)
    }
}
