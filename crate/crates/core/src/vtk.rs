//! Legacy ASCII VTK unstructured-grid output (linear tetrahedra, vertex data).

use std::fmt::Write as _;
use std::path::Path;

use crate::fespace::{DiscreteField, SpacePair};
use crate::mesh::TetMesh;
use crate::Result;

const VTK_TETRA: u32 = 10;

fn write_grid(s: &mut String, title: &str, mesh: &TetMesh) {
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{}", title.replace('\n', " "));
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.num_vertices());
    for p in &mesh.vertices {
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]);
    }
    let nt = mesh.num_tets();
    let _ = writeln!(s, "CELLS {} {}", nt, 5 * nt);
    for t in &mesh.tets {
        let _ = writeln!(s, "4 {} {} {} {}", t[0], t[1], t[2], t[3]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        let _ = writeln!(s, "{VTK_TETRA}");
    }
}

/// Mesh only, with the cell volume as cell data.
pub fn mesh_to_vtk(mesh: &TetMesh) -> String {
    let mut s = String::new();
    write_grid(&mut s, "nscert mesh", mesh);
    let _ = writeln!(s, "CELL_DATA {}", mesh.num_tets());
    let _ = writeln!(s, "SCALARS volume double 1");
    let _ = writeln!(s, "LOOKUP_TABLE default");
    for t in 0..mesh.num_tets() {
        let _ = writeln!(s, "{:.16e}", mesh.tet_volume(t));
    }
    s
}

/// Velocity and pressure sampled at the mesh vertices.
pub fn field_to_vtk(field: &DiscreteField, space: &SpacePair, mesh: &TetMesh) -> String {
    let mut s = String::new();
    write_grid(&mut s, &format!("nscert field t={:e}", field.time), mesh);
    let nv = space.num_vertices;
    let _ = writeln!(s, "POINT_DATA {nv}");
    let _ = writeln!(s, "VECTORS velocity double");
    for v in 0..nv {
        let u = &field.velocity[SpacePair::dof(v, 0)..SpacePair::dof(v, 0) + 3];
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", u[0], u[1], u[2]);
    }
    let _ = writeln!(s, "SCALARS pressure double 1");
    let _ = writeln!(s, "LOOKUP_TABLE default");
    for p in &field.pressure {
        let _ = writeln!(s, "{p:.16e}");
    }
    s
}

pub fn write_field_vtk(path: &Path, field: &DiscreteField, space: &SpacePair, mesh: &TetMesh) -> Result<()> {
    std::fs::write(path, field_to_vtk(field, space, mesh))?;
    Ok(())
}

pub fn write_mesh_vtk(path: &Path, mesh: &TetMesh) -> Result<()> {
    std::fs::write(path, mesh_to_vtk(mesh))?;
    Ok(())
}
