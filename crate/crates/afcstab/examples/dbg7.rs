use afcstab::assembly::assemble;
use afcstab::mesh::{adjacency, build_grid, GridKind, GridSpec};
use afcstab::problems::catalog;
use afcstab::solver::{solve, SolverConfig};
use afcstab::stabilizers::{StabilizerKind, WeightMode};
use std::time::Instant;

fn main() {
    let configs: Vec<(&str, u32, f64, GridKind, f64, usize)> = vec![
        ("smuas/ex1 G4 ne=16", 1, 1e-8, GridKind::Grid4, 0.0, 16),
        ("smuas/ex1 G4 ne=32", 1, 1e-8, GridKind::Grid4, 0.0, 32),
        ("smuas/ex1 G5(.8) eps=10 ne=16", 1, 10.0, GridKind::Grid5, 0.8, 16),
        ("smuas/ex4 G1 ne=10", 4, 1e-8, GridKind::Grid1, 0.0, 10),
    ];
    for (label, ex, eps, kind, shift, ne) in configs {
        let mesh = build_grid(&GridSpec::new(kind, ne, shift).unwrap()).unwrap();
        let adj = adjacency(&mesh);
        let data = catalog(ex, eps).unwrap();
        let sys = assemble(&mesh, &adj, &data).unwrap();
        let cfg = SolverConfig { max_iter: 5000, ..SolverConfig::default() };
        let t = Instant::now();
        let (_u, report) = solve(&mesh, &adj, &sys, StabilizerKind::Smuas { weights: WeightMode::Matrix }, &cfg).unwrap();
        println!("{label}: converged={} iters={} residual={:.3e} floors={} ({:.1?})",
            report.converged, report.iterations, report.residual, report.floor_accepts(), t.elapsed());
    }
}
