//! Analytical zero-stabilization fixtures on Grid 4 with the linear-solution
//! benchmark data (b = (1,0), c = 0, g = 1).
//!
//! A two-level perturbation of u = x with amplitude sum
//! delta = (h/2) h / (h - 3 eps) satisfies the Galerkin equations up to
//! +/- 2 delta eps and makes every limiter ratio of the Kuzmin scheme equal
//! to one, so the stabilization cannot remove the oscillation. A three-level
//! variant does the same for the limiter modified by a multiplier
//! mu = (2h - 3 eps)/(h - 4 eps) on the odd horizontal grid lines.

use crate::analysis::{build_oscillatory_field, deep_interior_nodes, AnalysisError, OscPattern, OscillatoryField};
use crate::assembly::{assemble, AssemblyError};
use crate::mesh::{adjacency, build_grid, GridSpec, MeshError};
use crate::problems::catalog;
use crate::stabilizers::{artificial_diffusion, kuzmin_limiter, KuzminOptions};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("fixture requires eps < h/9 (eps = {0}, h = {1})")]
    EpsTooLarge(f64, f64),
}

/// Amplitude sum that annihilates the limiter on the two-level field.
pub fn matching_delta(h: f64, eps: f64) -> f64 {
    0.5 * h * h / (h - 3.0 * eps)
}

/// Multiplier restoring linearity preservation at the odd-line nodes.
pub fn restoring_mu(h: f64, eps: f64) -> f64 {
    (2.0 * h - 3.0 * eps) / (h - 4.0 * eps)
}

#[derive(Debug, Clone)]
pub struct FixtureReport {
    pub pass: bool,
    /// Largest deviation from the asserted identity.
    pub max_deviation: f64,
    pub checked_nodes: usize,
}

fn fixture_context(
    ne: usize,
    eps: f64,
) -> Result<
    (
        crate::mesh::Mesh,
        crate::mesh::Adjacency,
        crate::assembly::GalerkinSystem,
        f64,
    ),
    FixtureError,
> {
    let h = 1.0 / ne as f64;
    if eps >= h / 9.0 {
        return Err(FixtureError::EpsTooLarge(eps, h));
    }
    let mesh = build_grid(&GridSpec::grid4(ne)?)?;
    let adj = adjacency(&mesh);
    let data = catalog(2, eps).expect("example 2 exists");
    let sys = assemble(&mesh, &adj, &data)?;
    Ok((mesh, adj, sys, h))
}

fn line_parity(y: f64, h: f64) -> i64 {
    (y / h).round() as i64 % 2
}

/// The two-level field with matching delta satisfies the Galerkin equations
/// up to -2 delta eps on even-line rows and +2 delta eps on odd-line rows.
pub fn residual_identity_fixture(ne: usize, eps: f64) -> Result<FixtureReport, FixtureError> {
    let (mesh, adj, sys, h) = fixture_context(ne, eps)?;
    let delta = matching_delta(h, eps);
    let field = OscillatoryField {
        pattern: OscPattern::TwoLevel {
            alpha: 0.5 * delta,
            beta: 0.5 * delta,
        },
        ne,
    };
    let u = build_oscillatory_field(&mesh, &field)?;
    let mut max_dev = 0.0f64;
    let deep = deep_interior_nodes(&mesh, &adj);
    for &i in &deep {
        let (cols, vals) = sys.a.row(i);
        let lhs: f64 = cols.iter().zip(vals).map(|(&j, &v)| v * u[j]).sum();
        let expected = if line_parity(mesh.point(i)[1], h) == 0 {
            sys.rhs[i] - 2.0 * delta * eps
        } else {
            sys.rhs[i] + 2.0 * delta * eps
        };
        max_dev = max_dev.max((lhs - expected).abs());
    }
    Ok(FixtureReport {
        pass: max_dev <= 1e-14,
        max_deviation: max_dev,
        checked_nodes: deep.len(),
    })
}

/// On the same field, all Kuzmin limiter ratios at deep-interior nodes equal
/// one, so the stabilization rows vanish there.
pub fn delta_zero_fixture(ne: usize, eps: f64) -> Result<FixtureReport, FixtureError> {
    let (mesh, adj, sys, h) = fixture_context(ne, eps)?;
    let delta = matching_delta(h, eps);
    let field = OscillatoryField {
        pattern: OscPattern::TwoLevel {
            alpha: 0.5 * delta,
            beta: 0.5 * delta,
        },
        ne,
    };
    let u = build_oscillatory_field(&mesh, &field)?;
    let d = artificial_diffusion(&sys.a);
    let out = kuzmin_limiter(
        &sys.a,
        &d,
        &u,
        mesh.n_interior,
        &KuzminOptions::default(),
        true,
    );
    let diag = out.diagnostics.as_ref().unwrap();
    let mut max_dev = 0.0f64;
    let deep = deep_interior_nodes(&mesh, &adj);
    let scale = d.max_offdiag_abs();
    for &i in &deep {
        max_dev = max_dev.max((diag.r_plus[i] - 1.0).abs());
        max_dev = max_dev.max((diag.r_minus[i] - 1.0).abs());
        // the stabilization row itself vanishes
        let (cols, vals) = out.b.row(i);
        let row: f64 = cols.iter().zip(vals).map(|(&j, &v)| v * u[j]).sum();
        max_dev = max_dev.max(row.abs() / scale);
    }
    Ok(FixtureReport {
        pass: max_dev <= 1e-12,
        max_deviation: max_dev,
        checked_nodes: deep.len(),
    })
}

/// Three-level field with the mu-modified limiter on odd lines: all
/// deep-interior limiter ratios equal one.
pub fn three_level_fixture(ne: usize, eps: f64) -> Result<FixtureReport, FixtureError> {
    let (mesh, adj, sys, h) = fixture_context(ne, eps)?;
    let field = OscillatoryField {
        pattern: OscPattern::three_level(h / 8.0, h / 16.0),
        ne,
    };
    let u = build_oscillatory_field(&mesh, &field)?;
    let d = artificial_diffusion(&sys.a);
    let mu: Vec<f64> = (0..mesh.n_interior)
        .map(|i| {
            if line_parity(mesh.point(i)[1], h) != 0 {
                restoring_mu(h, eps)
            } else {
                1.0
            }
        })
        .collect();
    let out = kuzmin_limiter(
        &sys.a,
        &d,
        &u,
        mesh.n_interior,
        &KuzminOptions {
            pvariant: Default::default(),
            mu: Some(&mu),
        },
        true,
    );
    let diag = out.diagnostics.as_ref().unwrap();
    let mut max_dev = 0.0f64;
    let deep = deep_interior_nodes(&mesh, &adj);
    for &i in &deep {
        max_dev = max_dev.max((diag.r_plus[i] - 1.0).abs());
        max_dev = max_dev.max((diag.r_minus[i] - 1.0).abs());
    }
    Ok(FixtureReport {
        pass: max_dev <= 1e-12,
        max_deviation: max_dev,
        checked_nodes: deep.len(),
    })
}
