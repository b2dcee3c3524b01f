use afcstab::assembly::{assemble, interpolate};
use afcstab::mesh::{adjacency, build_grid, GridSpec};
use afcstab::problems::catalog;
use afcstab::solver::{solve, SolverConfig};
use afcstab::stabilizers::StabilizerKind;

fn main() {
    let mesh = build_grid(&GridSpec::grid1(8).unwrap()).unwrap();
    let adj = adjacency(&mesh);
    let data = catalog(2, 1e-8).unwrap();
    let sys = assemble(&mesh, &adj, &data).unwrap();
    let (u, report) = solve(&mesh, &adj, &sys, StabilizerKind::None, &SolverConfig::default()).unwrap();
    let exact = interpolate(&mesh, |x, _| x);
    let err = u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
    println!("iters={} residual={:.3e} err={:.3e}", report.iterations, report.residual, err);
}
