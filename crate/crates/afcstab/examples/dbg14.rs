use afcstab::assembly::assemble;
use afcstab::mesh::{adjacency, build_grid, GridKind, GridSpec};
use afcstab::problems::catalog;
use afcstab::solver::{solve, SolverConfig};
use afcstab::stabilizers::{StabilizerKind, WeightMode};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let kind_s = args.get(1).map(|s| s.as_str()).unwrap_or("kuzmin");
    let grid: u8 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(4);
    let ne: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(64);
    let cap: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let ex: u32 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(1);
    let eps: f64 = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(1e-8);
    let kind = match kind_s {
        "kuzmin" => StabilizerKind::kuzmin(),
        "muas" => StabilizerKind::Muas,
        "smuas" => StabilizerKind::Smuas { weights: WeightMode::Matrix },
        _ => panic!(),
    };
    let gk = match grid { 1 => GridKind::Grid1, 4 => GridKind::Grid4, _ => GridKind::Grid5 };
    let shift = if grid == 5 { 0.8 } else { 0.0 };
    let mesh = build_grid(&GridSpec::new(gk, ne, shift).unwrap()).unwrap();
    let adj = adjacency(&mesh);
    let data = catalog(ex, eps).unwrap();
    let sys = assemble(&mesh, &adj, &data).unwrap();
    let cfg = SolverConfig { max_iter: cap, ..SolverConfig::default() };
    let t = Instant::now();
    let (_u, report) = solve(&mesh, &adj, &sys, kind, &cfg).unwrap();
    let h: Vec<f64> = report.history.iter().map(|r| r.residual).collect();
    print!("{kind_s} g{grid} ne={ne} ex={ex}: conv={} it={} res={:.2e} fl={} t={:.1?} trail=[",
        report.converged, report.iterations, report.residual, report.floor_accepts(), t.elapsed());
    for frac in [0.125, 0.25, 0.5, 0.75, 0.9] {
        print!("{:.1e},", h[((h.len()-1) as f64 * frac) as usize]);
    }
    println!("]");
}
