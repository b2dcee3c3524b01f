use afcstab::assembly::assemble;
use afcstab::mesh::{adjacency, build_grid, GridSpec};
use afcstab::problems::catalog;
use afcstab::solver::{solve, SolverConfig};
use afcstab::stabilizers::{StabilizerKind, WeightMode};
use std::time::Instant;

fn main() {
    for (label, kind, ne, cap) in [
        ("smuas/ex2 ne=8 cap=20000", StabilizerKind::Smuas { weights: WeightMode::Matrix }, 8usize, 20000usize),
        ("kuzmin/ex2 ne=16 cap=3000", StabilizerKind::kuzmin(), 16, 3000),
    ] {
        let mesh = build_grid(&GridSpec::grid4(ne).unwrap()).unwrap();
        let adj = adjacency(&mesh);
        let data = catalog(2, 1e-8).unwrap();
        let sys = assemble(&mesh, &adj, &data).unwrap();
        let cfg = SolverConfig { max_iter: cap, ..SolverConfig::default() };
        let t = Instant::now();
        let (_u, report) = solve(&mesh, &adj, &sys, kind, &cfg).unwrap();
        println!("{label}: converged={} iters={} residual={:.3e} floors={} ({:.1?})",
            report.converged, report.iterations, report.residual, report.floor_accepts(), t.elapsed());
        // residual percentiles over history
        let hist: Vec<f64> = report.history.iter().map(|r| r.residual).collect();
        if hist.len() > 10 {
            println!("  residual at it {}: {:.2e}, it {}: {:.2e}, last: {:.2e}",
                hist.len()/4, hist[hist.len()/4], hist.len()/2, hist[hist.len()/2], hist.last().unwrap());
        }
    }
}
