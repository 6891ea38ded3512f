//! Global operators of the scheme over the full (unconstrained) velocity dofs.
//!
//! All element integrals use the degree-5 rule, which is exact for the
//! products of P2 values, P2 gradients and P2 coefficients that appear here on
//! affine elements. Contributions are pushed in element order, so repeated
//! assembly is bit-identical.

use crate::expr::FieldExpression;
use crate::fespace::{DiscreteField, SpacePair, Tabulation};
use crate::mesh::TetMesh;
use crate::sparse::{CsrMatrix, TripletList};
use crate::Result;

pub const ASSEMBLY_DEGREE: usize = 5;

fn tabulation() -> Tabulation {
    Tabulation::new(ASSEMBLY_DEGREE).expect("supported degree")
}

/// Expands scalar P2 element matrices into the interleaved vector layout.
fn assemble_vector_block(space: &SpacePair, mut element: impl FnMut(usize, &mut [[f64; 10]; 10])) -> CsrMatrix {
    let n = space.velocity_dofs();
    let mut t = TripletList::with_capacity(n, n, space.num_cells() * 300);
    for (cell, nodes) in space.cell_nodes.iter().enumerate() {
        let mut local = [[0.0; 10]; 10];
        element(cell, &mut local);
        for a in 0..10 {
            for b in 0..10 {
                for c in 0..3 {
                    t.push(SpacePair::dof(nodes[a], c), SpacePair::dof(nodes[b], c), local[a][b]);
                }
            }
        }
    }
    t.into_csr()
}

/// `(u, v)` for vector P2 fields.
pub fn assemble_mass(space: &SpacePair, _mesh: &TetMesh) -> CsrMatrix {
    let tab = tabulation();
    assemble_vector_block(space, |cell, local| {
        let det = space.maps[cell].det;
        for (q, (_, w)) in tab.rule.iter().enumerate() {
            let phi = &tab.p2[q];
            for a in 0..10 {
                for b in 0..10 {
                    local[a][b] += w * det * (phi[a] * phi[b]);
                }
            }
        }
    })
}

/// `(grad u, grad v)` for vector P2 fields.
pub fn assemble_stiffness(space: &SpacePair, _mesh: &TetMesh) -> CsrMatrix {
    let tab = tabulation();
    assemble_vector_block(space, |cell, local| {
        let map = &space.maps[cell];
        for (q, (_, w)) in tab.rule.iter().enumerate() {
            let g: Vec<[f64; 3]> = tab.p2_grad[q].iter().map(|&r| map.grad(r)).collect();
            for a in 0..10 {
                for b in 0..10 {
                    local[a][b] += w * map.det * (g[a][0] * g[b][0] + g[a][1] * g[b][1] + g[a][2] * g[b][2]);
                }
            }
        }
    })
}

/// Skew-symmetrized convection `1/2 (w . grad u, v) - 1/2 (u, w . grad v)`.
///
/// Both terms are integrated as one table `X[a][b] = (w . grad N_b, N_a)` and
/// combined as `(X[a][b] - X[b][a]) / 2`, so the element matrices, and hence
/// the global matrix, are exactly antisymmetric in floating point.
pub fn assemble_convection(w: &DiscreteField, space: &SpacePair, _mesh: &TetMesh) -> CsrMatrix {
    let tab = tabulation();
    assemble_vector_block(space, |cell, local| {
        let map = &space.maps[cell];
        let mut x = [[0.0; 10]; 10];
        for (q, (_, wq)) in tab.rule.iter().enumerate() {
            let (wv, _) = space.velocity_at(&w.velocity, cell, &tab, q);
            let phi = &tab.p2[q];
            let mut adv = [0.0; 10];
            for (b, r) in tab.p2_grad[q].iter().enumerate() {
                let g = map.grad(*r);
                adv[b] = wv[0] * g[0] + wv[1] * g[1] + wv[2] * g[2];
            }
            for a in 0..10 {
                for b in 0..10 {
                    x[a][b] += wq * map.det * adv[b] * phi[a];
                }
            }
        }
        for a in 0..10 {
            for b in 0..10 {
                local[a][b] = 0.5 * (x[a][b] - x[b][a]);
            }
        }
    })
}

/// `B[q][v] = (psi_q, div phi_v)`: pressure rows, velocity columns.
pub fn assemble_divergence(space: &SpacePair, _mesh: &TetMesh) -> CsrMatrix {
    let tab = tabulation();
    let (np, nu) = (space.pressure_dofs(), space.velocity_dofs());
    let mut t = TripletList::with_capacity(np, nu, space.num_cells() * 120);
    for (cell, nodes) in space.cell_nodes.iter().enumerate() {
        let map = &space.maps[cell];
        let mut local = [[[0.0; 3]; 10]; 4];
        for (q, (_, w)) in tab.rule.iter().enumerate() {
            for b in 0..10 {
                let g = map.grad(tab.p2_grad[q][b]);
                for (i, psi) in tab.p1[q].iter().enumerate() {
                    for c in 0..3 {
                        local[i][b][c] += w * map.det * psi * g[c];
                    }
                }
            }
        }
        let verts = &space.cell_vertices[cell];
        for i in 0..4 {
            for b in 0..10 {
                for c in 0..3 {
                    t.push(verts[i], SpacePair::dof(nodes[b], c), local[i][b][c]);
                }
            }
        }
    }
    t.into_csr()
}

/// Load vector `(f(t), phi_i)` over all velocity dofs.
pub fn assemble_forcing(f: &FieldExpression, t: f64, space: &SpacePair, _mesh: &TetMesh) -> Result<Vec<f64>> {
    let tab = tabulation();
    let mut rhs = vec![0.0; space.velocity_dofs()];
    for (cell, nodes) in space.cell_nodes.iter().enumerate() {
        let map = &space.maps[cell];
        for (q, (xi, w)) in tab.rule.iter().enumerate() {
            let fv = f.eval(map.map(*xi), t)?;
            for a in 0..10 {
                let s = w * map.det * tab.p2[q][a];
                for c in 0..3 {
                    rhs[SpacePair::dof(nodes[a], c)] += s * fv[c];
                }
            }
        }
    }
    Ok(rhs)
}

/// Operators that do not change between time steps.
#[derive(Debug, Clone)]
pub struct StaticOperators {
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    pub divergence: CsrMatrix,
    /// `int psi_i dx`, the zero-mean pressure functional.
    pub pressure_mean: Vec<f64>,
}

impl StaticOperators {
    pub fn new(space: &SpacePair, mesh: &TetMesh) -> Self {
        StaticOperators {
            mass: assemble_mass(space, mesh),
            stiffness: assemble_stiffness(space, mesh),
            divergence: assemble_divergence(space, mesh),
            pressure_mean: space.pressure_mass_row(),
        }
    }
}
