use afcstab::assembly::{assemble, interpolate};
use afcstab::mesh::{adjacency, build_grid, GridSpec};
use afcstab::problems::catalog;
use afcstab::solver::{solve, SolverConfig};
use afcstab::stabilizers::{StabilizerKind, WeightMode};

fn main() {
    for ne in [8, 16, 20] {
        let mesh = build_grid(&GridSpec::grid4(ne).unwrap()).unwrap();
        let adj = adjacency(&mesh);
        let data = catalog(2, 1e-8).unwrap();
        let sys = assemble(&mesh, &adj, &data).unwrap();
        let (u, report) = solve(&mesh, &adj, &sys, StabilizerKind::Smuas { weights: WeightMode::Matrix }, &SolverConfig { max_iter: 300, ..SolverConfig::default() }).unwrap();
        let exact = interpolate(&mesh, |x, _| x);
        let err = u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        println!("ne={ne}: converged={} iters={} residual={:.2e} max_err={:.2e} floor_accepts={}",
            report.converged, report.iterations, report.residual, err, report.floor_accepts());
        let n = report.history.len();
        for rec in report.history.iter().rev().take(5).rev() {
            println!("  omega={:.3e} residual={:.3e} floor={}", rec.omega, rec.residual, rec.floor_accept);
        }
        let _ = n;
    }
}
