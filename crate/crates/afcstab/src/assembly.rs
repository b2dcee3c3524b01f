//! Galerkin assembly of the P1 system: stiffness + convection + reaction
//! matrix, load vector and Dirichlet values.
//!
//! Boundary rows and columns are assembled and stored in full; the limiters
//! read a_ij and a_ji also for boundary-coupled pairs. The elimination of
//! Dirichlet rows happens only inside the linear solver.

use thiserror::Error;

use crate::mesh::{Adjacency, Mesh};
use crate::problems::ProblemData;
use crate::quadrature::{bary_to_xy, degree4, QPoint};
use crate::sparse::SparseMatrix;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("triangle {0} is degenerate (area {1:.3e})")]
    DegenerateTriangle(usize, f64),
    #[error("data evaluated to a non-finite value at ({0}, {1})")]
    NonFiniteData(f64, f64),
}

/// The assembled algebraic problem: full N x N matrix, interior load vector
/// and boundary values.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub a: SparseMatrix,
    /// (g, phi_i) for the interior nodes i < M.
    pub rhs: Vec<f64>,
    /// u_b(x_i) for the boundary nodes, indexed by i - M.
    pub dirichlet: Vec<f64>,
}

impl GalerkinSystem {
    /// Full-length vector with boundary entries set to the Dirichlet values
    /// and interior entries zero.
    pub fn boundary_padded(&self, n_interior: usize) -> Vec<f64> {
        let n = self.a.order();
        let mut u = vec![0.0; n];
        u[n_interior..].copy_from_slice(&self.dirichlet);
        u
    }
}

/// Assembles with the default rules: the diffusion term is integrated
/// exactly (P0 gradients), everything else with a degree-4 rule.
pub fn assemble(
    mesh: &Mesh,
    adj: &Adjacency,
    data: &ProblemData,
) -> Result<GalerkinSystem, AssemblyError> {
    assemble_with_rule(mesh, adj, data, &degree4())
}

pub fn assemble_with_rule(
    mesh: &Mesh,
    adj: &Adjacency,
    data: &ProblemData,
    rule: &[QPoint],
) -> Result<GalerkinSystem, AssemblyError> {
    let m = mesh.n_interior;
    let mut a = SparseMatrix::from_adjacency(adj);
    let mut rhs = vec![0.0; m];

    for t in 0..mesh.n_triangles() {
        let verts = mesh.triangles[t];
        let area = mesh.area(t);
        if area < 1e-14 {
            return Err(AssemblyError::DegenerateTriangle(t, area));
        }
        let grads = mesh.p1_gradients(t);
        let pts = verts.map(|v| mesh.point(v));

        let mut local = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                local[i][j] = data.epsilon
                    * area
                    * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
            }
        }
        let mut local_rhs = [0.0f64; 3];
        for q in rule {
            let xy = bary_to_xy(q.bary, pts[0], pts[1], pts[2]);
            let conv = (data.convection)(xy[0], xy[1]);
            let react = (data.reaction)(xy[0], xy[1]);
            let src = (data.source)(xy[0], xy[1]);
            if !(conv[0].is_finite() && conv[1].is_finite() && react.is_finite() && src.is_finite())
            {
                return Err(AssemblyError::NonFiniteData(xy[0], xy[1]));
            }
            let w = q.weight * area;
            // P1 basis values at the quadrature point are its barycentric
            // coordinates
            for i in 0..3 {
                let phi_i = q.bary[i];
                for j in 0..3 {
                    let b_dot_grad = conv[0] * grads[j][0] + conv[1] * grads[j][1];
                    local[i][j] += w * (b_dot_grad + react * q.bary[j]) * phi_i;
                }
                local_rhs[i] += w * src * phi_i;
            }
        }

        for i in 0..3 {
            for j in 0..3 {
                a.add(verts[i], verts[j], local[i][j]);
            }
            if verts[i] < m {
                rhs[verts[i]] += local_rhs[i];
            }
        }
    }

    let dirichlet = (m..mesh.n_nodes())
        .map(|i| {
            let p = mesh.point(i);
            (data.dirichlet)(p[0], p[1])
        })
        .collect();

    Ok(GalerkinSystem { a, rhs, dirichlet })
}

/// Lagrange interpolant: nodal values of f.
pub fn interpolate(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    mesh.coords.iter().map(|p| f(p[0], p[1])).collect()
}
