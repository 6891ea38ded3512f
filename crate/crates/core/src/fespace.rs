//! Taylor-Hood spaces: continuous P2 velocity with zero trace and continuous
//! P1 pressure on a tetrahedral mesh.
//!
//! Velocity nodes are the mesh vertices followed by the edge midpoints (edges
//! numbered as sorted vertex pairs in lexicographic order). Velocity dofs are
//! interleaved, `3 * node + component`. Local element node order is the four
//! vertices followed by the edges (01, 02, 03, 12, 13, 23).

use crate::expr::FieldExpression;
use crate::mesh::{self, TetMesh};
use crate::quadrature::{make_quadrature, QuadratureRule};
use crate::{Error, Point, Result};

pub const LOCAL_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    P1,
    P2,
}

impl SpaceKind {
    pub fn local_dofs(self) -> usize {
        match self {
            SpaceKind::P1 => 4,
            SpaceKind::P2 => 10,
        }
    }

    /// Reference coordinates of the local nodes.
    pub fn nodes(self) -> Vec<Point> {
        let v = REF_VERTICES;
        let mut out = v.to_vec();
        if self == SpaceKind::P2 {
            out.extend(LOCAL_EDGES.iter().map(|&(a, b)| {
                [0.5 * (v[a][0] + v[b][0]), 0.5 * (v[a][1] + v[b][1]), 0.5 * (v[a][2] + v[b][2])]
            }));
        }
        out
    }
}

const REF_VERTICES: [Point; 4] = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
const GRAD_LAMBDA: [[f64; 3]; 4] = [[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn barycentric(p: Point) -> [f64; 4] {
    [1.0 - p[0] - p[1] - p[2], p[0], p[1], p[2]]
}

pub(crate) fn p1_basis(p: Point) -> [f64; 4] {
    barycentric(p)
}

pub(crate) fn p1_grads() -> [[f64; 3]; 4] {
    GRAD_LAMBDA
}

pub(crate) fn p2_basis(p: Point) -> ([f64; 10], [[f64; 3]; 10]) {
    let l = barycentric(p);
    let g = GRAD_LAMBDA;
    let mut vals = [0.0; 10];
    let mut grads = [[0.0; 3]; 10];
    for i in 0..4 {
        vals[i] = l[i] * (2.0 * l[i] - 1.0);
        for d in 0..3 {
            grads[i][d] = (4.0 * l[i] - 1.0) * g[i][d];
        }
    }
    for (k, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
        vals[4 + k] = 4.0 * l[i] * l[j];
        for d in 0..3 {
            grads[4 + k][d] = 4.0 * (l[j] * g[i][d] + l[i] * g[j][d]);
        }
    }
    (vals, grads)
}

/// Basis values and reference gradients at a point of the reference tetrahedron.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 3]>,
}

pub fn eval_basis(kind: SpaceKind, ref_point: Point) -> Result<BasisEval> {
    const TOL: f64 = 1e-12;
    if barycentric(ref_point).iter().any(|&l| !(-TOL..=1.0 + TOL).contains(&l)) {
        return Err(Error::OutsideReference(ref_point));
    }
    Ok(match kind {
        SpaceKind::P1 => BasisEval {
            values: p1_basis(ref_point).to_vec(),
            grads: p1_grads().to_vec(),
        },
        SpaceKind::P2 => {
            let (v, g) = p2_basis(ref_point);
            BasisEval {
                values: v.to_vec(),
                grads: g.to_vec(),
            }
        }
    })
}

/// Affine map from the reference tetrahedron to one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementMap {
    pub origin: Point,
    /// Columns are the edge vectors v1 - v0, v2 - v0, v3 - v0.
    pub jac: [[f64; 3]; 3],
    pub det: f64,
    /// Inverse transpose of `jac`.
    pub inv_t: [[f64; 3]; 3],
}

impl ElementMap {
    pub fn new(p: [Point; 4]) -> Self {
        let e = [mesh::sub(p[1], p[0]), mesh::sub(p[2], p[0]), mesh::sub(p[3], p[0])];
        let mut jac = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                jac[r][c] = e[c][r];
            }
        }
        // Rows of J^{-1} are the cross products of the columns / det.
        let det = mesh::dot(e[0], mesh::cross(e[1], e[2]));
        let rows = [mesh::cross(e[1], e[2]), mesh::cross(e[2], e[0]), mesh::cross(e[0], e[1])];
        let mut inv_t = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                inv_t[r][c] = rows[c][r] / det;
            }
        }
        ElementMap {
            origin: p[0],
            jac,
            det,
            inv_t,
        }
    }

    pub fn map(&self, xi: Point) -> Point {
        let mut x = self.origin;
        for r in 0..3 {
            for c in 0..3 {
                x[r] += self.jac[r][c] * xi[c];
            }
        }
        x
    }

    /// Physical gradient from a reference gradient.
    #[inline]
    pub fn grad(&self, g: [f64; 3]) -> [f64; 3] {
        let m = &self.inv_t;
        [
            m[0][0] * g[0] + m[0][1] * g[1] + m[0][2] * g[2],
            m[1][0] * g[0] + m[1][1] * g[1] + m[1][2] * g[2],
            m[2][0] * g[0] + m[2][1] * g[1] + m[2][2] * g[2],
        ]
    }

    pub fn volume(&self) -> f64 {
        self.det / 6.0
    }
}

/// Basis values and reference gradients tabulated at the points of a rule.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub rule: QuadratureRule,
    pub p2: Vec<[f64; 10]>,
    pub p2_grad: Vec<[[f64; 3]; 10]>,
    pub p1: Vec<[f64; 4]>,
}

impl Tabulation {
    pub fn new(degree: usize) -> Result<Self> {
        let rule = make_quadrature(degree)?;
        let (p2, p2_grad) = rule.points.iter().map(|&p| p2_basis(p)).unzip();
        let p1 = rule.points.iter().map(|&p| p1_basis(p)).collect();
        Ok(Tabulation { rule, p2, p2_grad, p1 })
    }
}

/// The velocity space `X_h = (S^2_h, zero trace)^3` and pressure space `V_h = S^1_h`.
#[derive(Debug, Clone)]
pub struct SpacePair {
    pub num_vertices: usize,
    pub edges: Vec<[usize; 2]>,
    /// Coordinates of the P2 nodes (vertices, then edge midpoints).
    pub nodes: Vec<Point>,
    pub cell_nodes: Vec<[usize; 10]>,
    pub cell_vertices: Vec<[usize; 4]>,
    pub boundary_node: Vec<bool>,
    /// Sorted velocity dofs whose node lies on the boundary.
    pub boundary_velocity_dofs: Vec<usize>,
    /// Velocity dof -> index among interior dofs.
    pub interior_index: Vec<Option<usize>>,
    /// Interior index -> velocity dof.
    pub interior_dofs: Vec<usize>,
    pub maps: Vec<ElementMap>,
}

impl SpacePair {
    pub fn velocity_dofs(&self) -> usize {
        3 * self.nodes.len()
    }

    pub fn pressure_dofs(&self) -> usize {
        self.num_vertices
    }

    pub fn num_interior(&self) -> usize {
        self.interior_dofs.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cell_nodes.len()
    }

    #[inline]
    pub fn dof(node: usize, comp: usize) -> usize {
        3 * node + comp
    }

    /// Pressure vertices, `pressure_dof_nodes` of the pair.
    pub fn pressure_nodes(&self) -> &[Point] {
        &self.nodes[..self.num_vertices]
    }

    /// Scatters interior values into a full velocity vector (boundary dofs zero).
    pub fn expand(&self, interior: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.velocity_dofs()];
        for (k, &d) in self.interior_dofs.iter().enumerate() {
            full[d] = interior[k];
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.interior_dofs.iter().map(|&d| full[d]).collect()
    }

    /// Velocity value and gradient (`grad[c][i] = d_i u_c`) of a P2 field at
    /// quadrature point `q` of element `cell`.
    #[inline]
    pub fn velocity_at(&self, u: &[f64], cell: usize, tab: &Tabulation, q: usize) -> ([f64; 3], [[f64; 3]; 3]) {
        let nodes = &self.cell_nodes[cell];
        let map = &self.maps[cell];
        let mut val = [0.0; 3];
        let mut grad = [[0.0; 3]; 3];
        for a in 0..10 {
            let g = map.grad(tab.p2_grad[q][a]);
            let phi = tab.p2[q][a];
            for c in 0..3 {
                let coef = u[Self::dof(nodes[a], c)];
                val[c] += coef * phi;
                for i in 0..3 {
                    grad[c][i] += coef * g[i];
                }
            }
        }
        (val, grad)
    }

    #[inline]
    pub fn pressure_at(&self, p: &[f64], cell: usize, tab: &Tabulation, q: usize) -> f64 {
        let verts = &self.cell_vertices[cell];
        (0..4).map(|a| p[verts[a]] * tab.p1[q][a]).sum()
    }

    /// `int psi_i dx` for every pressure basis function.
    pub fn pressure_mass_row(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.pressure_dofs()];
        for (cell, verts) in self.cell_vertices.iter().enumerate() {
            let vol = self.maps[cell].volume();
            for &v in verts {
                m[v] += 0.25 * vol;
            }
        }
        m
    }

    /// Domain volume from the element maps.
    pub fn volume(&self) -> f64 {
        self.maps.iter().map(|m| m.volume()).sum()
    }
}

pub fn build_spaces(mesh: &TetMesh) -> SpacePair {
    let nv = mesh.num_vertices();
    let edges = mesh.edges();
    let edge_id = |u: usize, v: usize| {
        let key = [u.min(v), u.max(v)];
        nv + edges.binary_search(&key).expect("edge present in mesh")
    };
    let mut nodes: Vec<Point> = mesh.vertices.clone();
    nodes.extend(edges.iter().map(|&[a, b]| {
        let (p, q) = (mesh.vertices[a], mesh.vertices[b]);
        [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.5 * (p[2] + q[2])]
    }));
    let cell_nodes: Vec<[usize; 10]> = mesh
        .tets
        .iter()
        .map(|t| {
            let mut n = [0usize; 10];
            n[..4].copy_from_slice(t);
            for (k, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
                n[4 + k] = edge_id(t[a], t[b]);
            }
            n
        })
        .collect();
    let mut boundary_node = vec![false; nodes.len()];
    for f in &mesh.boundary_faces {
        for &v in f {
            boundary_node[v] = true;
        }
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            boundary_node[edge_id(f[a], f[b])] = true;
        }
    }
    let mut boundary_velocity_dofs = Vec::new();
    let mut interior_index = vec![None; 3 * nodes.len()];
    let mut interior_dofs = Vec::new();
    for (n, &b) in boundary_node.iter().enumerate() {
        for c in 0..3 {
            let d = SpacePair::dof(n, c);
            if b {
                boundary_velocity_dofs.push(d);
            } else {
                interior_index[d] = Some(interior_dofs.len());
                interior_dofs.push(d);
            }
        }
    }
    let maps = (0..mesh.num_tets()).map(|t| ElementMap::new(mesh.tet_points(t))).collect();
    SpacePair {
        num_vertices: nv,
        edges,
        nodes,
        cell_nodes,
        cell_vertices: mesh.tets.clone(),
        boundary_node,
        boundary_velocity_dofs,
        interior_index,
        interior_dofs,
        maps,
    }
}

/// Coefficients of one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    pub time: f64,
}

impl DiscreteField {
    pub fn zeros(space: &SpacePair, time: f64) -> Self {
        DiscreteField {
            velocity: vec![0.0; space.velocity_dofs()],
            pressure: vec![0.0; space.pressure_dofs()],
            time,
        }
    }

    pub fn with_velocity(space: &SpacePair, velocity: Vec<f64>, time: f64) -> Self {
        assert_eq!(velocity.len(), space.velocity_dofs());
        DiscreteField {
            velocity,
            pressure: vec![0.0; space.pressure_dofs()],
            time,
        }
    }

    /// Sets every boundary velocity dof to zero.
    pub fn zero_boundary(&mut self, space: &SpacePair) {
        for &d in &space.boundary_velocity_dofs {
            self.velocity[d] = 0.0;
        }
    }
}

/// Lagrange interpolation at time `t`: vector fields fill the velocity,
/// scalar fields fill the pressure. Boundary dofs take the field's values.
pub fn interpolate_at(expr: &FieldExpression, space: &SpacePair, t: f64) -> Result<DiscreteField> {
    let mut field = DiscreteField::zeros(space, t);
    match expr.arity() {
        3 => {
            for (n, &p) in space.nodes.iter().enumerate() {
                let v = expr.eval(p, t)?;
                field.velocity[3 * n..3 * n + 3].copy_from_slice(&v);
            }
        }
        _ => {
            for (n, &p) in space.pressure_nodes().iter().enumerate() {
                field.pressure[n] = expr.eval(p, t)?[0];
            }
        }
    }
    Ok(field)
}

pub fn interpolate(expr: &FieldExpression, space: &SpacePair, _mesh: &TetMesh) -> Result<DiscreteField> {
    interpolate_at(expr, space, 0.0)
}
