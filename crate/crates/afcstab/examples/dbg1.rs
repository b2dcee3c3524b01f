use afcstab::assembly::{assemble, interpolate};
use afcstab::mesh::{adjacency, build_grid, GridKind, GridSpec};
use afcstab::problems::catalog;
use afcstab::solver::{solve, SolverConfig};
use afcstab::stabilizers::StabilizerKind;

fn main() {
    for (kind, ne) in [(GridKind::Grid1, 8), (GridKind::Grid4, 6), (GridKind::Grid4, 10), (GridKind::Grid4, 16), (GridKind::Grid4, 32), (GridKind::Grid5, 8)] {
        let shift = if kind == GridKind::Grid5 { 0.8 } else { 0.0 };
        let spec = GridSpec::new(kind, ne, shift).unwrap();
        let mesh = build_grid(&spec).unwrap();
        let adj = adjacency(&mesh);
        let data = catalog(2, 1e-8).unwrap();
        let sys = assemble(&mesh, &adj, &data).unwrap();
        let (u, report) = solve(&mesh, &adj, &sys, StabilizerKind::None, &SolverConfig::default()).unwrap();
        let exact = interpolate(&mesh, |x, _| x);
        let err = u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        println!("{kind:?} ne={ne}: iters={} residual={:.2e} max_err={:.2e}", report.iterations, report.residual, err);
    }
}
