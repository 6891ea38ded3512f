//! Conforming tetrahedral meshes of axis-aligned boxes.
//!
//! Boxes are split into hexahedral cells and every cell is cut into the six
//! Kuhn tetrahedra that share its main diagonal. Uniform (red) refinement
//! replaces each tetrahedron by eight children. For Kuhn meshes the interior
//! octahedron is cut along the diagonal that reproduces the Kuhn split of the
//! twice-finer grid, so refinement preserves both `h / 2` and the element shapes.

use std::collections::HashMap;

use crate::{Error, Point, Result};

/// Corner pair of an axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxExtents {
    pub lo: Point,
    pub hi: Point,
}

impl BoxExtents {
    pub fn new(lo: Point, hi: Point) -> Self {
        Self { lo, hi }
    }

    pub fn unit_cube() -> Self {
        Self::new([0.0; 3], [1.0; 3])
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|d| self.hi[d] - self.lo[d]).product()
    }

    fn validate(&self) -> Result<()> {
        for d in 0..3 {
            let (lo, hi) = (self.lo[d], self.hi[d]);
            if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
                return Err(Error::InvalidDomain(format!(
                    "axis {d}: extent [{lo}, {hi}] is empty or not finite"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TetMesh {
    pub vertices: Vec<Point>,
    /// Positively oriented vertex quadruples.
    pub tets: Vec<[usize; 4]>,
    /// Sorted vertex triples of faces owned by exactly one tetrahedron.
    pub boundary_faces: Vec<[usize; 3]>,
    /// Largest element diameter.
    pub h: f64,
}

/// Element size statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub max_diam: f64,
    pub min_diam: f64,
    /// `max_diam / min_diam`; 1 for meshes of congruent cells.
    pub diam_ratio: f64,
    /// Largest `diam(K) / inradius(K)` over all elements.
    pub shape_regularity: f64,
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn dist(a: Point, b: Point) -> f64 {
    dot(sub(a, b), sub(a, b)).sqrt()
}

fn signed_volume(p: [Point; 4]) -> f64 {
    dot(sub(p[1], p[0]), cross(sub(p[2], p[0]), sub(p[3], p[0]))) / 6.0
}

const TET_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

fn sorted3(mut f: [usize; 3]) -> [usize; 3] {
    f.sort_unstable();
    f
}

impl TetMesh {
    /// Assembles a mesh from raw parts: orients every element positively and
    /// derives the boundary faces and `h`.
    pub fn from_parts(vertices: Vec<Point>, tets: Vec<[usize; 4]>) -> Result<Self> {
        let mut tets = tets;
        for t in tets.iter_mut() {
            if t.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidDomain(format!("element {t:?} references a missing vertex")));
            }
            let vol = signed_volume(t.map(|v| vertices[v]));
            if vol == 0.0 || !vol.is_finite() {
                return Err(Error::InvalidDomain(format!("degenerate element {t:?}")));
            }
            if vol < 0.0 {
                t.swap(2, 3);
            }
        }
        let mut mesh = TetMesh {
            vertices,
            tets,
            boundary_faces: Vec::new(),
            h: 0.0,
        };
        let counts = mesh.face_incidence();
        let mut boundary: Vec<[usize; 3]> = counts
            .into_iter()
            .filter(|&(_, c)| c == 1)
            .map(|(f, _)| f)
            .collect();
        boundary.sort_unstable();
        mesh.boundary_faces = boundary;
        mesh.h = mesh_size(&mesh);
        Ok(mesh)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn tet_points(&self, t: usize) -> [Point; 4] {
        self.tets[t].map(|v| self.vertices[v])
    }

    pub fn tet_volume(&self, t: usize) -> f64 {
        signed_volume(self.tet_points(t))
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.num_tets()).map(|t| self.tet_volume(t)).sum()
    }

    pub fn tet_diameter(&self, t: usize) -> f64 {
        let p = self.tet_points(t);
        TET_EDGES
            .iter()
            .map(|&(a, b)| dist(p[a], p[b]))
            .fold(0.0, f64::max)
    }

    /// All edges as sorted vertex pairs, in lexicographic order.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut edges: Vec<[usize; 2]> = self
            .tets
            .iter()
            .flat_map(|t| {
                TET_EDGES.iter().map(move |&(a, b)| {
                    let (u, v) = (t[a], t[b]);
                    [u.min(v), u.max(v)]
                })
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// Number of elements sharing each (sorted) face.
    pub fn face_incidence(&self) -> HashMap<[usize; 3], usize> {
        let mut counts = HashMap::with_capacity(self.tets.len() * 2);
        for t in &self.tets {
            for f in TET_FACES {
                *counts.entry(sorted3(f.map(|i| t[i]))).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Checks the structural invariants: positive volumes, face incidences in
    /// {1, 2}, boundary table consistent with incidence, and `h`.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.num_tets() {
            if self.tet_volume(t) <= 0.0 {
                return Err(Error::InvalidDomain(format!("element {t} is not positively oriented")));
            }
        }
        let counts = self.face_incidence();
        let mut n_boundary = 0;
        for (f, c) in &counts {
            match c {
                1 => n_boundary += 1,
                2 => {}
                _ => {
                    return Err(Error::InvalidDomain(format!("face {f:?} shared by {c} elements")));
                }
            }
        }
        if n_boundary != self.boundary_faces.len()
            || self.boundary_faces.iter().any(|f| counts.get(f) != Some(&1))
        {
            return Err(Error::InvalidDomain("boundary face table is inconsistent".into()));
        }
        if mesh_size(self) != self.h {
            return Err(Error::InvalidDomain("stored h differs from the longest edge".into()));
        }
        Ok(())
    }
}

/// Splits the box into `nx * ny * nz` cells and each cell into six Kuhn
/// tetrahedra. Vertices are numbered lexicographically by (z, y, x) grid index.
pub fn build_box_mesh(nx: usize, ny: usize, nz: usize, extents: BoxExtents) -> Result<TetMesh> {
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(Error::InvalidDomain(format!(
            "cell counts must be positive, got ({nx}, {ny}, {nz})"
        )));
    }
    extents.validate()?;
    let n = [nx, ny, nz];
    let coord = |d: usize, i: usize| {
        if i == n[d] {
            extents.hi[d]
        } else {
            extents.lo[d] + (extents.hi[d] - extents.lo[d]) * i as f64 / n[d] as f64
        }
    };
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([coord(0, i), coord(1, j), coord(2, k)]);
            }
        }
    }
    let index = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut tets = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for perm in PERMS {
                    let mut c = [i, j, k];
                    let mut tet = [index(c[0], c[1], c[2]); 4];
                    for (step, &axis) in perm.iter().enumerate() {
                        c[axis] += 1;
                        tet[step + 1] = index(c[0], c[1], c[2]);
                    }
                    tets.push(tet);
                }
            }
        }
    }
    TetMesh::from_parts(vertices, tets)
}

/// Red refinement: eight children per element via edge midpoints.
///
/// The vertices of the refined mesh are renumbered lexicographically by
/// (z, y, x) coordinate. The octahedron diagonal is the shortest of the three
/// candidates; ties go to the diagonal whose smaller endpoint index is lowest.
pub fn refine_uniform(mesh: &TetMesh) -> TetMesh {
    let edges = mesh.edges();
    let nv = mesh.num_vertices();
    let mut points: Vec<Point> = mesh.vertices.clone();
    points.extend(edges.iter().map(|&[a, b]| {
        let (p, q) = (mesh.vertices[a], mesh.vertices[b]);
        [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.5 * (p[2] + q[2])]
    }));

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (points[a], points[b]);
        p[2].total_cmp(&q[2])
            .then(p[1].total_cmp(&q[1]))
            .then(p[0].total_cmp(&q[0]))
    });
    let mut renumber = vec![0usize; points.len()];
    for (new, &old) in order.iter().enumerate() {
        renumber[old] = new;
    }
    let vertices: Vec<Point> = order.iter().map(|&old| points[old]).collect();

    let edge_index: HashMap<[usize; 2], usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mid = |u: usize, v: usize| renumber[nv + edge_index[&[u.min(v), u.max(v)]]];

    let mut tets = Vec::with_capacity(8 * mesh.num_tets());
    for t in &mesh.tets {
        let v = t.map(|i| renumber[i]);
        let m = |a: usize, b: usize| mid(t[a], t[b]);
        let (m01, m02, m03, m12, m13, m23) = (m(0, 1), m(0, 2), m(0, 3), m(1, 2), m(1, 3), m(2, 3));
        tets.push([v[0], m01, m02, m03]);
        tets.push([m01, v[1], m12, m13]);
        tets.push([m02, m12, v[2], m23]);
        tets.push([m03, m13, m23, v[3]]);

        // Opposite vertex pairs of the octahedron.
        let pairs = [(m01, m23), (m02, m13), (m03, m12)];
        let len = |(a, b): (usize, usize)| dist(vertices[a], vertices[b]);
        let mut best = 0;
        for c in 1..3 {
            let (lc, lb) = (len(pairs[c]), len(pairs[best]));
            let tol = 1e-12 * lb.max(lc);
            let lower = |(a, b): (usize, usize)| a.min(b);
            if lc < lb - tol || ((lc - lb).abs() <= tol && lower(pairs[c]) < lower(pairs[best])) {
                best = c;
            }
        }
        let (a, b) = pairs[best];
        let (p, p2) = pairs[(best + 1) % 3];
        let (q, q2) = pairs[(best + 2) % 3];
        for [e, f] in [[p, q], [q, p2], [p2, q2], [q2, p]] {
            tets.push([a, b, e, f]);
        }
    }
    TetMesh::from_parts(vertices, tets).expect("children of a valid mesh are nondegenerate")
}

/// Maximum element diameter (longest edge).
pub fn mesh_size(mesh: &TetMesh) -> f64 {
    (0..mesh.num_tets())
        .map(|t| mesh.tet_diameter(t))
        .fold(0.0, f64::max)
}

fn inradius(p: [Point; 4]) -> f64 {
    let area: f64 = TET_FACES
        .iter()
        .map(|f| {
            let n = cross(sub(p[f[1]], p[f[0]]), sub(p[f[2]], p[f[0]]));
            0.5 * dot(n, n).sqrt()
        })
        .sum();
    3.0 * signed_volume(p).abs() / area
}

pub fn quality_report(mesh: &TetMesh) -> QualityReport {
    let mut max_diam = 0.0f64;
    let mut min_diam = f64::INFINITY;
    let mut shape = 0.0f64;
    for t in 0..mesh.num_tets() {
        let d = mesh.tet_diameter(t);
        max_diam = max_diam.max(d);
        min_diam = min_diam.min(d);
        shape = shape.max(d / inradius(mesh.tet_points(t)));
    }
    QualityReport {
        max_diam,
        min_diam,
        diam_ratio: max_diam / min_diam,
        shape_regularity: shape,
    }
}
