use afcstab::assembly::assemble;
use afcstab::mesh::{adjacency, build_grid, GridSpec};
use afcstab::problems::catalog;
use afcstab::solver::{solve, SolverConfig};
use afcstab::stabilizers::{MuMode, StabilizerKind};
use std::time::Instant;

fn main() {
    for cap in [4000usize] {
        let mesh = build_grid(&GridSpec::grid1(10).unwrap()).unwrap();
        let adj = adjacency(&mesh);
        let data = catalog(4, 1e-8).unwrap();
        let sys = assemble(&mesh, &adj, &data).unwrap();
        let g_norm = sys.rhs.iter().map(|v| v*v).sum::<f64>().sqrt();
        println!("tol = {:.3e}", 1e-10*g_norm);
        for (label, kind) in [
            ("bjk(patch)", StabilizerKind::Bjk { mu: MuMode::FromPatch }),
            ("bjk(mu=1)", StabilizerKind::Bjk { mu: MuMode::Constant(1.0) }),
            ("muas", StabilizerKind::Muas),
            ("kuzmin", StabilizerKind::kuzmin()),
        ] {
            let cfg = SolverConfig { max_iter: cap, ..SolverConfig::default() };
            let t = Instant::now();
            let (_u, report) = solve(&mesh, &adj, &sys, kind, &cfg).unwrap();
            let h: Vec<f64> = report.history.iter().map(|r| r.residual).collect();
            let q = |frac: f64| h[((h.len()-1) as f64 * frac) as usize];
            println!("{label}: converged={} iters={} res={:.2e} floors={} trail=[{:.1e},{:.1e},{:.1e}] ({:.1?})",
                report.converged, report.iterations, report.residual, report.floor_accepts(),
                q(0.25), q(0.5), q(0.75), t.elapsed());
        }
    }
}
