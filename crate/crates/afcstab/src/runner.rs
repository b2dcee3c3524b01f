//! One-configuration pipeline shared by the command line front-end and the
//! Python bindings: mesh, assemble, solve, measure.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{convergence_table, error_norms, AnalysisError, ConvergenceTable, ErrorReport};
use crate::assembly::{assemble, interpolate, AssemblyError, GalerkinSystem};
use crate::mesh::{adjacency, build_grid, Adjacency, GridKind, GridSpec, Mesh, MeshError};
use crate::problems::{catalog, ProblemData, ProblemError};
use crate::solver::{solve, SolveReport, SolverConfig, SolverError};
use crate::stabilizers::{build_stabilization, MuMode, PVariant, StabilizerKind, WeightMode};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Config(String),
}

/// Everything needed to run one configuration.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub example: u32,
    pub epsilon: f64,
    pub grid: GridSpec,
    pub method: StabilizerKind,
    pub solver: SolverConfig,
}

pub struct RunOutput {
    pub mesh: Mesh,
    pub adj: Adjacency,
    pub system: GalerkinSystem,
    pub problem: ProblemData,
    pub u: Vec<f64>,
    pub report: SolveReport,
    pub errors: Option<ErrorReport>,
    /// u_h - i_h u when the exact solution is known.
    pub interpolant_gap: Option<Vec<f64>>,
    pub max_nodal_error: Option<f64>,
}

pub fn run_solve(spec: &RunSpec) -> Result<RunOutput, RunError> {
    let mesh = build_grid(&spec.grid)?;
    let adj = adjacency(&mesh);
    let problem = catalog(spec.example, spec.epsilon)?;
    let system = assemble(&mesh, &adj, &problem)?;
    let (u, report) = solve(&mesh, &adj, &system, spec.method, &spec.solver)?;

    let mut errors = None;
    let mut interpolant_gap = None;
    let mut max_nodal_error = None;
    if let Some(exact) = &problem.exact {
        let b = build_stabilization(spec.method, &mesh, &adj, &system.a, &u)
            .map_err(SolverError::from)?
            .b;
        errors = Some(error_norms(&mesh, &u, &problem, &b)?);
        let ih_u = interpolate(&mesh, |x, y| (exact.u)(x, y));
        let gap: Vec<f64> = u.iter().zip(&ih_u).map(|(a, b)| a - b).collect();
        max_nodal_error = Some(gap.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        interpolant_gap = Some(gap);
    }

    Ok(RunOutput {
        mesh,
        adj,
        system,
        problem,
        u,
        report,
        errors,
        interpolant_gap,
        max_nodal_error,
    })
}

/// Runs a doubling sequence of ne values and builds the order table. With
/// `with_coarser` an additional run at ne_min / 2 fills the first order row.
pub fn run_convergence(
    base: &RunSpec,
    ne_list: &[usize],
    with_coarser: bool,
) -> Result<(ConvergenceTable, Vec<SolveReport>), RunError> {
    if ne_list.len() < 2 {
        return Err(AnalysisError::TooFewRows.into());
    }
    for w in ne_list.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(AnalysisError::NonDoubling(w[1], w[0]).into());
        }
    }
    let mut all_ne: Vec<usize> = Vec::new();
    if with_coarser {
        if ne_list[0] % 2 != 0 {
            return Err(RunError::Config(format!(
                "cannot run the coarser level of ne = {}",
                ne_list[0]
            )));
        }
        all_ne.push(ne_list[0] / 2);
    }
    all_ne.extend_from_slice(ne_list);

    let results: Result<Vec<(ErrorReport, SolveReport)>, RunError> = all_ne
        .par_iter()
        .map(|&ne| {
            let mut spec = base.clone();
            spec.grid = GridSpec::new(base.grid.kind, ne, base.grid.shift)?;
            let out = run_solve(&spec)?;
            let errors = out.errors.ok_or(AnalysisError::MissingExact)?;
            Ok((errors, out.report))
        })
        .collect();
    let results = results?;

    let (coarser, rows_start) = if with_coarser {
        (Some(results[0].0), 1)
    } else {
        (None, 0)
    };
    let rows: Vec<(usize, ErrorReport)> = ne_list
        .iter()
        .zip(results[rows_start..].iter())
        .map(|(&ne, (e, _))| (ne, *e))
        .collect();
    let table = convergence_table(&rows, coarser.as_ref())?;
    let reports = results.into_iter().map(|(_, r)| r).collect();
    Ok((table, reports))
}

/// JSON-serializable run summary.
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub example: u32,
    pub epsilon: f64,
    pub grid: String,
    pub ne: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    pub method: String,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normh: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_nodal_error: Option<f64>,
}

impl RunSummary {
    pub fn from_output(spec: &RunSpec, out: &RunOutput) -> Self {
        RunSummary {
            example: spec.example,
            epsilon: spec.epsilon,
            grid: format!("{:?}", spec.grid.kind),
            ne: spec.grid.ne,
            shift: (spec.grid.kind == GridKind::Grid5).then_some(spec.grid.shift),
            method: method_name(spec.method),
            converged: out.report.converged,
            iterations: out.report.iterations,
            residual: out.report.residual,
            l2: out.errors.map(|e| e.l2),
            h1: out.errors.map(|e| e.h1semi),
            normh: out.errors.map(|e| e.norm_h),
            max_nodal_error: out.max_nodal_error,
        }
    }
}

pub fn method_name(kind: StabilizerKind) -> String {
    match kind {
        StabilizerKind::None => "none".into(),
        StabilizerKind::Kuzmin { pvariant: PVariant::Standard } => "kuzmin".into(),
        StabilizerKind::Kuzmin { pvariant: PVariant::BjkP } => "kuzmin(bjk-p)".into(),
        StabilizerKind::Bjk { mu: MuMode::FromPatch } => "bjk(mu=patch)".into(),
        StabilizerKind::Bjk { mu: MuMode::Constant(c) } => format!("bjk(mu={c})"),
        StabilizerKind::Muas => "muas".into(),
        StabilizerKind::Smuas { weights: WeightMode::Matrix } => "smuas(matrix)".into(),
        StabilizerKind::Smuas { weights: WeightMode::Unit } => "smuas(unit)".into(),
    }
}

/// Builds a stabilizer kind from the flag values `--method`, `--weights`,
/// `--mu`, `--pvariant`.
pub fn parse_method(
    method: &str,
    weights: &str,
    mu: &str,
    pvariant: &str,
) -> Result<StabilizerKind, RunError> {
    let pv = match pvariant {
        "standard" => PVariant::Standard,
        "bjk-p" => PVariant::BjkP,
        other => {
            return Err(RunError::Config(format!(
                "unknown pvariant '{other}' (expected standard|bjk-p)"
            )))
        }
    };
    let w = match weights {
        "matrix" => WeightMode::Matrix,
        "unit" => WeightMode::Unit,
        other => {
            return Err(RunError::Config(format!(
                "unknown weights '{other}' (expected matrix|unit)"
            )))
        }
    };
    let mu_mode = if mu == "patch" {
        MuMode::FromPatch
    } else {
        let v: f64 = mu
            .parse()
            .map_err(|_| RunError::Config(format!("bad --mu value '{mu}'")))?;
        MuMode::Constant(v)
    };
    Ok(match method {
        "none" => StabilizerKind::None,
        "kuzmin" => StabilizerKind::Kuzmin { pvariant: pv },
        "bjk" => StabilizerKind::Bjk { mu: mu_mode },
        "muas" => StabilizerKind::Muas,
        "smuas" => StabilizerKind::Smuas { weights: w },
        other => {
            return Err(RunError::Config(format!(
                "unknown method '{other}' (expected none|kuzmin|bjk|muas|smuas)"
            )))
        }
    })
}
