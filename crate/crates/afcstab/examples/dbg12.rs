use afcstab::assembly::assemble;
use afcstab::mesh::{adjacency, build_grid, GridSpec};
use afcstab::problems::catalog;
use afcstab::solver::{solve, SolverConfig};
use afcstab::stabilizers::StabilizerKind;
use std::time::Instant;

fn main() {
    let ne: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(128);
    let cap: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(50);
    let mesh = build_grid(&GridSpec::grid4(ne).unwrap()).unwrap();
    let adj = adjacency(&mesh);
    let data = catalog(1, 1e-8).unwrap();
    let sys = assemble(&mesh, &adj, &data).unwrap();
    let cfg = SolverConfig { max_iter: cap, ..SolverConfig::default() };
    let t = Instant::now();
    let (_u, report) = solve(&mesh, &adj, &sys, StabilizerKind::kuzmin(), &cfg).unwrap();
    let dt = t.elapsed();
    println!("ne={ne} cap={cap}: converged={} iters={} res={:.2e} time={:.1?} per-it={:.1?}",
        report.converged, report.iterations, report.residual, dt, dt / report.iterations.max(1) as u32);
}
