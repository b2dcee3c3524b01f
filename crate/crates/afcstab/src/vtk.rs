//! Legacy-ASCII VTK writer for P1 fields on triangulations.

use std::fmt::Write as _;

use crate::mesh::Mesh;

/// Serializes the mesh with one or more nodal scalar fields as a legacy VTK
/// unstructured grid.
pub fn to_vtk(mesh: &Mesh, fields: &[(&str, &[f64])]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "afcstab field output");
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.n_nodes());
    for p in &mesh.coords {
        let _ = writeln!(s, "{:.16e} {:.16e} 0", p[0], p[1]);
    }
    let ntri = mesh.n_triangles();
    let _ = writeln!(s, "CELLS {} {}", ntri, 4 * ntri);
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {ntri}");
    for _ in 0..ntri {
        let _ = writeln!(s, "5");
    }
    if !fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {}", mesh.n_nodes());
        for (name, values) in fields {
            assert_eq!(values.len(), mesh.n_nodes());
            let _ = writeln!(s, "SCALARS {name} double 1");
            let _ = writeln!(s, "LOOKUP_TABLE default");
            for v in *values {
                let _ = writeln!(s, "{v:.16e}");
            }
        }
    }
    s
}
