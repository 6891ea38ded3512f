//! Discrete Stokes Ritz projection `(R_h, P_h)` of a velocity-pressure pair:
//!
//! ```text
//! (grad(w - R_h), grad v) - (p - P_h, div v) = 0   for all v in X_h
//! (div R_h, q) = 0                                for all q in V_h
//! int (p - P_h) dx = 0
//! ```

use std::fmt::Write as _;

use crate::assembly::{assemble_divergence, assemble_stiffness};
use crate::convergence::observed_order;
use crate::expr::FieldExpression;
use crate::fespace::{build_spaces, DiscreteField, SpacePair};
use crate::mesh::{build_box_mesh, BoxExtents, TetMesh};
use crate::norms::{field_errors, norm_tabulation};
use crate::solver::SaddleSolver;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Largest `|w|` tolerated on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct RitzProjection {
    /// Velocity `R_h` and pressure `P_h`.
    pub field: DiscreteField,
    pub residual: f64,
    /// `|B R_h|_inf`
    pub divergence: f64,
}

struct StokesOperators {
    stiff_i: CsrMatrix,
    div_i: CsrMatrix,
    mean: Vec<f64>,
}

impl StokesOperators {
    fn new(space: &SpacePair, mesh: &TetMesh) -> Self {
        let ni = space.num_interior();
        let np = space.pressure_dofs();
        let rows: Vec<Option<usize>> = (0..np).map(Some).collect();
        StokesOperators {
            stiff_i: assemble_stiffness(space, mesh).restrict(&space.interior_index, ni, &space.interior_index, ni),
            div_i: assemble_divergence(space, mesh).restrict(&rows, np, &space.interior_index, ni),
            mean: space.pressure_mass_row(),
        }
    }

    fn solve(&self, space: &SpacePair, rhs: &[f64], pressure_mean: f64) -> Result<RitzProjection> {
        let sol = SaddleSolver::new().solve(&self.stiff_i, &self.div_i, &self.mean, rhs)?;
        let divergence = self.div_i.matvec(&sol.velocity).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let shift = pressure_mean / space.volume();
        let field = DiscreteField {
            velocity: space.expand(&sol.velocity),
            pressure: sol.pressure.iter().map(|p| p + shift).collect(),
            time: 0.0,
        };
        Ok(RitzProjection { field, residual: sol.residual, divergence })
    }
}

fn check_boundary(w: &FieldExpression, space: &SpacePair, mesh: &TetMesh) -> Result<()> {
    let face_centroids = mesh.boundary_faces.iter().map(|f| {
        let mut c = [0.0; 3];
        for &v in f {
            for d in 0..3 {
                c[d] += mesh.vertices[v][d] / 3.0;
            }
        }
        c
    });
    let nodes = space
        .nodes
        .iter()
        .zip(&space.boundary_node)
        .filter(|(_, &b)| b)
        .map(|(p, _)| *p);
    for p in nodes.chain(face_centroids) {
        let v = w.eval(p, 0.0)?;
        let mag = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(mag <= BOUNDARY_TOL) {
            return Err(Error::BoundaryIncompatible { point: p, value: mag });
        }
    }
    Ok(())
}

/// Projects closed-form `(w, p)`; `w` must vanish on the boundary.
pub fn stokes_ritz_project(
    w: &FieldExpression,
    p: &FieldExpression,
    space: &SpacePair,
    mesh: &TetMesh,
) -> Result<RitzProjection> {
    if w.arity() != 3 || p.arity() != 1 {
        return Err(Error::InvalidArgument(format!(
            "expected a vector velocity and scalar pressure, got arities {} and {}",
            w.arity(),
            p.arity()
        )));
    }
    check_boundary(w, space, mesh)?;
    let tab = norm_tabulation();
    let mut rhs = vec![0.0; space.velocity_dofs()];
    let mut p_int = 0.0;
    for (cell, nodes) in space.cell_nodes.iter().enumerate() {
        let map = &space.maps[cell];
        for (q, (xi, wq)) in tab.rule.iter().enumerate() {
            let x = map.map(*xi);
            let jet = w.jet(x, 0.0)?;
            let pv = p.eval(x, 0.0)?[0];
            let wd = wq * map.det;
            p_int += wd * pv;
            for a in 0..10 {
                let g = map.grad(tab.p2_grad[q][a]);
                for c in 0..3 {
                    let gw = jet.grad[c][0] * g[0] + jet.grad[c][1] * g[1] + jet.grad[c][2] * g[2];
                    rhs[SpacePair::dof(nodes[a], c)] += wd * (gw - pv * g[c]);
                }
            }
        }
    }
    StokesOperators::new(space, mesh).solve(space, &space.restrict(&rhs), p_int)
}

/// Projects a discrete pair; members of the discretely divergence-free space
/// are reproduced.
pub fn project_discrete(field: &DiscreteField, space: &SpacePair, mesh: &TetMesh) -> Result<RitzProjection> {
    let ops = StokesOperators::new(space, mesh);
    let k = assemble_stiffness(space, mesh);
    let b = assemble_divergence(space, mesh);
    let kw = k.matvec(&field.velocity);
    let btp = b.matvec_t(&field.pressure);
    let rhs: Vec<f64> = kw.iter().zip(&btp).map(|(a, b)| a - b).collect();
    let p_int: f64 = ops.mean.iter().zip(&field.pressure).map(|(m, p)| m * p).sum();
    ops.solve(space, &space.restrict(&rhs), p_int)
}

/// Errors of the projection on a sequence of meshes with least-squares orders.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionStudy {
    pub cells: Vec<usize>,
    pub h: Vec<f64>,
    pub velocity_l2: Vec<f64>,
    pub velocity_h1: Vec<f64>,
    pub pressure_l2: Vec<f64>,
    /// Observed orders for velocity L2, velocity H1, pressure L2.
    pub orders: [f64; 3],
}

impl ProjectionStudy {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,h,velocity_l2,velocity_h1,pressure_l2\n");
        for i in 0..self.h.len() {
            let _ = writeln!(
                s,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.cells[i], self.h[i], self.velocity_l2[i], self.velocity_h1[i], self.pressure_l2[i]
            );
        }
        let _ = writeln!(
            s,
            "order,,{:.6},{:.6},{:.6}",
            self.orders[0], self.orders[1], self.orders[2]
        );
        s
    }
}

/// Runs the projection on unit-cube meshes with `n` cells per side for each
/// entry of `cells` (at least three).
pub fn projection_convergence_study(
    w: &FieldExpression,
    p: &FieldExpression,
    cells: &[usize],
    extents: BoxExtents,
) -> Result<ProjectionStudy> {
    if cells.len() < 3 {
        return Err(Error::InvalidArgument("a convergence study needs at least 3 meshes".into()));
    }
    let mut st = ProjectionStudy {
        cells: cells.to_vec(),
        h: vec![],
        velocity_l2: vec![],
        velocity_h1: vec![],
        pressure_l2: vec![],
        orders: [0.0; 3],
    };
    for &n in cells {
        let mesh = build_box_mesh(n, n, n, extents)?;
        let space = build_spaces(&mesh);
        let proj = stokes_ritz_project(w, p, &space, &mesh)?;
        let e = field_errors(&proj.field, &space, w, Some(p), 0.0)?;
        st.h.push(mesh.h);
        st.velocity_l2.push(e.velocity_l2);
        st.velocity_h1.push(e.velocity_h1());
        st.pressure_l2.push(e.pressure_l2);
    }
    st.orders = [
        observed_order(&st.h, &st.velocity_l2),
        observed_order(&st.h, &st.velocity_h1),
        observed_order(&st.h, &st.pressure_l2),
    ];
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n: usize) -> (TetMesh, SpacePair) {
        let m = build_box_mesh(n, n, n, BoxExtents::unit_cube()).unwrap();
        let s = build_spaces(&m);
        (m, s)
    }

    #[test]
    fn zero_pair_projects_to_zero() {
        let (m, s) = setup(2);
        let r = stokes_ritz_project(&FieldExpression::catalog("zero"), &FieldExpression::catalog("zero_scalar"), &s, &m)
            .unwrap();
        assert!(r.field.velocity.iter().all(|&v| v == 0.0));
        assert!(r.field.pressure.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_nonzero_boundary_values() {
        let (m, s) = setup(2);
        let err = stokes_ritz_project(&FieldExpression::catalog("rotation"), &FieldExpression::catalog("zero_scalar"), &s, &m);
        assert!(matches!(err, Err(Error::BoundaryIncompatible { .. })));
    }

    #[test]
    fn projection_properties_and_idempotence() {
        let (m, s) = setup(2);
        let w = FieldExpression::catalog("vortex");
        let p = FieldExpression::catalog("vortex_pressure");
        let r = stokes_ritz_project(&w, &p, &s, &m).unwrap();
        assert!(r.residual <= 1e-10);
        assert!(r.divergence <= 1e-9);
        let tab = norm_tabulation();
        let mut p_int = 0.0;
        for map in &s.maps {
            for (xi, wq) in tab.rule.iter() {
                p_int += wq * map.det * p.eval(map.map(*xi), 0.0).unwrap()[0];
            }
        }
        let mean: f64 = s.pressure_mass_row().iter().zip(&r.field.pressure).map(|(a, b)| a * b).sum();
        assert!((mean - p_int).abs() <= 1e-12, "{mean} {p_int}");
        let again = project_discrete(&r.field, &s, &m).unwrap();
        let dv = again.field.velocity.iter().zip(&r.field.velocity).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let dp = again.field.pressure.iter().zip(&r.field.pressure).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dv <= 1e-10 && dp <= 1e-10, "{dv} {dp}");
    }

    #[test]
    fn study_needs_three_levels() {
        let w = FieldExpression::catalog("vortex");
        let p = FieldExpression::catalog("vortex_pressure");
        assert!(projection_convergence_study(&w, &p, &[2, 4], BoxExtents::unit_cube()).is_err());
    }
}
