//! Batch front-end: mesh generation, single solves, convergence studies and
//! property-check suites.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use afcstab::analysis::{
    check_a2, check_dmp, contract_report, dmp_region, A2Outcome, SourceSign,
};
use afcstab::assembly::assemble;
use afcstab::fixtures::{delta_zero_fixture, residual_identity_fixture, three_level_fixture};
use afcstab::mesh::{adjacency, build_grid, GridKind, GridSpec};
use afcstab::problems::catalog;
use afcstab::quadrature::{bary_to_xy, degree4};
use afcstab::runner::{parse_method, run_convergence, run_solve, RunSpec, RunSummary};
use afcstab::solver::SolverConfig;
use afcstab::stabilizers::build_stabilization;
use afcstab::vtk::to_vtk;

#[derive(Parser)]
#[command(name = "afcstab", about = "Algebraically stabilized P1 finite element runs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a structured mesh and write the ASCII mesh format.
    Mesh(MeshArgs),
    /// Solve one configuration; writes VTK fields and a JSON summary.
    Solve(CommonArgs),
    /// Run a doubling-ne convergence study and emit the order table as CSV.
    Convergence(CommonArgs),
    /// Run a property-check suite.
    Check(CheckArgs),
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long)]
    grid: Option<u8>,
    #[arg(long)]
    ne: Option<usize>,
    #[arg(long)]
    shift: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Optional `key = value` file supplying defaults for the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    example: Option<u32>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    grid: Option<u8>,
    /// One value for `solve`, a comma-separated doubling list for
    /// `convergence`.
    #[arg(long, value_delimiter = ',')]
    ne: Option<Vec<usize>>,
    #[arg(long)]
    shift: Option<f64>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    pvariant: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// VTK output path (solve).
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV output path (convergence; stdout when omitted).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Fill the first order row from an extra run at ne/2.
    #[arg(long, default_value_t = false)]
    with_coarser: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// One of: matrix-props, a2, dmp, linearity, fixtures.
    suite: String,
    #[command(flatten)]
    common: CommonArgs,
    /// Fixture name for `check fixtures`: residual, delta-zero, three-level.
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
}

/// Plain `key = value` configuration file mirroring the flags 1:1.
struct FileConfig(HashMap<String, String>);

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self, String> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| format!("config line {}: expected key = value", lineno + 1))?;
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(FileConfig(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| format!("config key '{key}': cannot parse '{raw}'")),
        }
    }
}

fn pick<T>(cli: Option<T>, file: Option<T>, default: T) -> T {
    cli.or(file).unwrap_or(default)
}

fn grid_spec(grid: u8, ne: usize, shift: f64) -> Result<GridSpec, String> {
    let kind = match grid {
        1 => GridKind::Grid1,
        4 => GridKind::Grid4,
        5 => GridKind::Grid5,
        other => return Err(format!("unknown grid {other} (expected 1|4|5)")),
    };
    GridSpec::new(kind, ne, if kind == GridKind::Grid5 { shift } else { 0.0 })
        .map_err(|e| e.to_string())
}

struct Resolved {
    spec: RunSpec,
    ne_list: Vec<usize>,
    seed: u64,
    trials: usize,
}

fn resolve(common: &CommonArgs, seed: Option<u64>, trials: Option<usize>) -> Result<Resolved, String> {
    let file = FileConfig::load(common.config.as_deref())?;
    let example = pick(common.example, file.get("example")?, 1);
    let eps = pick(common.eps, file.get("eps")?, 1e-8);
    let grid = pick(common.grid, file.get("grid")?, 1);
    let ne_file: Option<Vec<usize>> = match file.0.get("ne") {
        None => None,
        Some(raw) => Some(
            raw.split(',')
                .map(|tok| tok.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| format!("config key 'ne': cannot parse '{raw}'"))?,
        ),
    };
    let ne_list = pick(common.ne.clone(), ne_file, vec![16]);
    let shift = pick(common.shift, file.get("shift")?, 0.1);
    let method = pick(common.method.clone(), file.get("method")?, "kuzmin".into());
    let weights = pick(common.weights.clone(), file.get("weights")?, "matrix".into());
    let mu = pick(common.mu.clone(), file.get("mu")?, "patch".into());
    let pvariant = pick(common.pvariant.clone(), file.get("pvariant")?, "standard".into());
    let mut solver = SolverConfig::default();
    solver.tol_rel = pick(common.tol, file.get("tol")?, solver.tol_rel);
    solver.max_iter = pick(common.max_iter, file.get("max-iter")?, solver.max_iter);

    if ne_list.is_empty() {
        return Err("--ne needs at least one value".into());
    }
    let kind = parse_method(&method, &weights, &mu, &pvariant).map_err(|e| e.to_string())?;
    let spec = RunSpec {
        example,
        epsilon: eps,
        grid: grid_spec(grid, ne_list[0], shift)?,
        method: kind,
        solver,
    };
    Ok(Resolved {
        spec,
        ne_list,
        seed: pick(seed, file.get("seed")?, 42),
        trials: pick(trials, file.get("trials")?, 100),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Mesh(args) => {
            let file = FileConfig::load(args.config.as_deref())?;
            let grid = pick(args.grid, file.get("grid")?, 1);
            let ne = pick(args.ne, file.get("ne")?, 16);
            let shift = pick(args.shift, file.get("shift")?, 0.1);
            let spec = grid_spec(grid, ne, shift)?;
            let mesh = build_grid(&spec).map_err(|e| e.to_string())?;
            mesh.write_file(&args.out).map_err(|e| e.to_string())?;
            eprintln!(
                "wrote {} ({} nodes, {} interior, {} triangles)",
                args.out.display(),
                mesh.n_nodes(),
                mesh.n_interior,
                mesh.n_triangles()
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Solve(args) => {
            let r = resolve(&args, None, None)?;
            let out = run_solve(&r.spec).map_err(|e| e.to_string())?;
            if let Some(path) = &args.out {
                let mut fields: Vec<(&str, &[f64])> = vec![("u", &out.u)];
                if let Some(gap) = &out.interpolant_gap {
                    fields.push(("u_minus_interpolant", gap));
                }
                std::fs::write(path, to_vtk(&out.mesh, &fields)).map_err(|e| e.to_string())?;
            }
            let summary = RunSummary::from_output(&r.spec, &out);
            println!(
                "{}",
                serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?
            );
            Ok(if out.report.converged {
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "not converged after {} iterations (residual {:.3e})",
                    out.report.iterations, out.report.residual
                );
                ExitCode::FAILURE
            })
        }
        Cmd::Convergence(args) => {
            let r = resolve(&args, None, None)?;
            let (table, reports) =
                run_convergence(&r.spec, &r.ne_list, args.with_coarser).map_err(|e| e.to_string())?;
            let csv = table.to_csv();
            match &args.csv {
                Some(path) => std::fs::write(path, &csv).map_err(|e| e.to_string())?,
                None => print!("{csv}"),
            }
            let not_converged: Vec<usize> = reports
                .iter()
                .enumerate()
                .filter(|(_, r)| !r.converged)
                .map(|(k, _)| k)
                .collect();
            if !not_converged.is_empty() {
                eprintln!("warning: {} run(s) did not reach the residual tolerance", not_converged.len());
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Check(args) => check_suite(args),
    }
}

fn check_suite(args: CheckArgs) -> Result<ExitCode, String> {
    let r = resolve(&args.common, args.seed, args.trials)?;
    let spec = &r.spec;
    let mut csv_rows: Vec<String> = vec!["suite,item,value,pass".into()];
    let pass;

    match args.suite.as_str() {
        "matrix-props" => {
            let mesh = build_grid(&spec.grid).map_err(|e| e.to_string())?;
            let adj = adjacency(&mesh);
            let data = catalog(spec.example, spec.epsilon).map_err(|e| e.to_string())?;
            let sys = assemble(&mesh, &adj, &data).map_err(|e| e.to_string())?;
            let scale = sys.a.max_offdiag_abs();
            let mut rng = StdRng::seed_from_u64(r.seed);
            let mut worst = afcstab::analysis::ContractReport {
                max_asymmetry: 0.0,
                max_positive_offdiag: 0.0,
                max_row_sum: 0.0,
                min_rayleigh: f64::INFINITY,
            };
            for _ in 0..r.trials {
                let u: Vec<f64> = (0..mesh.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let b = build_stabilization(spec.method, &mesh, &adj, &sys.a, &u)
                    .map_err(|e| e.to_string())?
                    .b;
                let rep = contract_report(&b, std::slice::from_ref(&u));
                worst.max_asymmetry = worst.max_asymmetry.max(rep.max_asymmetry);
                worst.max_positive_offdiag = worst.max_positive_offdiag.max(rep.max_positive_offdiag);
                worst.max_row_sum = worst.max_row_sum.max(rep.max_row_sum);
                worst.min_rayleigh = worst.min_rayleigh.min(rep.min_rayleigh);
            }
            pass = worst.max_asymmetry == 0.0
                && worst.max_positive_offdiag == 0.0
                && worst.max_row_sum <= 1e-12 * scale
                && worst.min_rayleigh >= -1e-12;
            println!(
                "matrix-props: asymmetry {:.3e}, positive offdiag {:.3e}, row sum {:.3e} (scale {:.3e}), min rayleigh {:.3e} -> {}",
                worst.max_asymmetry,
                worst.max_positive_offdiag,
                worst.max_row_sum,
                scale,
                worst.min_rayleigh,
                verdict(pass)
            );
            csv_rows.push(format!("matrix-props,max_row_sum,{:.6e},{}", worst.max_row_sum, pass));
            csv_rows.push(format!("matrix-props,min_rayleigh,{:.6e},{}", worst.min_rayleigh, pass));
        }
        "a2" => {
            let mesh = build_grid(&spec.grid).map_err(|e| e.to_string())?;
            let adj = adjacency(&mesh);
            let data = catalog(spec.example, spec.epsilon).map_err(|e| e.to_string())?;
            let sys = assemble(&mesh, &adj, &data).map_err(|e| e.to_string())?;
            let outcome = check_a2(&mesh, &adj, &sys.a, spec.method, r.trials, r.seed)
                .map_err(|e| e.to_string())?;
            match outcome {
                A2Outcome::Pass => {
                    pass = true;
                    println!("a2: {} trials -> pass", r.trials);
                    csv_rows.push(format!("a2,trials,{},true", r.trials));
                }
                A2Outcome::NotApplicable => {
                    pass = true;
                    println!("a2: not applicable (sign condition min{{a_ij, a_ji}} <= 0 violated)");
                    csv_rows.push("a2,outcome,not-applicable,true".into());
                }
                A2Outcome::Violations(v) => {
                    pass = false;
                    println!("a2: {} violating pairs, first: {:?}", v.len(), v.first());
                    csv_rows.push(format!("a2,violations,{},false", v.len()));
                }
            }
        }
        "dmp" => {
            let out = run_solve(spec).map_err(|e| e.to_string())?;
            let rule = degree4();
            let mut g_min = f64::INFINITY;
            let mut g_max = f64::NEG_INFINITY;
            let mut c_max_abs = 0.0f64;
            for t in 0..out.mesh.n_triangles() {
                let pts = out.mesh.triangles[t].map(|v| out.mesh.point(v));
                for q in &rule {
                    let xy = bary_to_xy(q.bary, pts[0], pts[1], pts[2]);
                    let g = (out.problem.source)(xy[0], xy[1]);
                    g_min = g_min.min(g);
                    g_max = g_max.max(g);
                    c_max_abs = c_max_abs.max((out.problem.reaction)(xy[0], xy[1]).abs());
                }
            }
            let sign = if g_min >= -1e-14 {
                SourceSign::Nonnegative
            } else if g_max <= 1e-14 {
                SourceSign::Nonpositive
            } else {
                return Err("source changes sign on the mesh; pick a sub-region".into());
            };
            let all: Vec<usize> = (0..out.mesh.n_triangles()).collect();
            let region = dmp_region(&out.mesh, &out.problem, all, sign).map_err(|e| e.to_string())?;
            let verdict_dmp = check_dmp(&out.mesh, &out.u, &region, c_max_abs <= 1e-14);
            pass = verdict_dmp.pass && out.report.converged;
            let min_u = out.u.iter().cloned().fold(f64::INFINITY, f64::min);
            let max_u = out.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            println!(
                "dmp: u in [{:.6e}, {:.6e}], {} violations -> {}",
                min_u,
                max_u,
                verdict_dmp.violations.len(),
                verdict(pass)
            );
            csv_rows.push(format!("dmp,violations,{},{}", verdict_dmp.violations.len(), pass));
            csv_rows.push(format!("dmp,min_u,{min_u:.6e},{pass}"));
        }
        "linearity" => {
            let mesh = build_grid(&spec.grid).map_err(|e| e.to_string())?;
            let adj = adjacency(&mesh);
            let data = catalog(spec.example, spec.epsilon).map_err(|e| e.to_string())?;
            let sys = assemble(&mesh, &adj, &data).map_err(|e| e.to_string())?;
            let scale = sys.a.max_offdiag_abs();
            let mut rng = StdRng::seed_from_u64(r.seed);
            let mut worst = 0.0f64;
            for _ in 0..10 {
                let (c0, c1, c2) = (
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                );
                let u: Vec<f64> = mesh
                    .coords
                    .iter()
                    .map(|p| c0 + c1 * p[0] + c2 * p[1])
                    .collect();
                let b = build_stabilization(spec.method, &mesh, &adj, &sys.a, &u)
                    .map_err(|e| e.to_string())?
                    .b;
                worst = worst.max(b.values().iter().fold(0.0f64, |m, v| m.max(v.abs())));
            }
            pass = worst <= 1e-13 * scale;
            println!(
                "linearity: max |b_ij| = {:.3e} on affine fields (threshold {:.3e}) -> {}",
                worst,
                1e-13 * scale,
                verdict(pass)
            );
            csv_rows.push(format!("linearity,max_entry,{worst:.6e},{pass}"));
        }
        "fixtures" => {
            let name = args.fixture.as_deref().unwrap_or("delta-zero");
            let ne = r.ne_list[0];
            let report = match name {
                "residual" => residual_identity_fixture(ne, spec.epsilon),
                "delta-zero" => delta_zero_fixture(ne, spec.epsilon),
                "three-level" => three_level_fixture(ne, spec.epsilon),
                other => return Err(format!("unknown fixture '{other}'")),
            }
            .map_err(|e| e.to_string())?;
            pass = report.pass;
            println!(
                "fixture {name}: max deviation {:.3e} over {} nodes -> {}",
                report.max_deviation,
                report.checked_nodes,
                verdict(pass)
            );
            csv_rows.push(format!("fixtures,{name},{:.6e},{}", report.max_deviation, pass));
        }
        other => return Err(format!("unknown check suite '{other}'")),
    }

    if let Some(path) = &args.common.csv {
        std::fs::write(path, csv_rows.join("\n") + "\n").map_err(|e| e.to_string())?;
    }
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}
