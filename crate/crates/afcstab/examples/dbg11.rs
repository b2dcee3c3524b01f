use afcstab::assembly::assemble;
use afcstab::mesh::{adjacency, build_grid, GridSpec};
use afcstab::problems::catalog;
use afcstab::stabilizers::{Stabilizer, StabilizerKind};
use std::time::Instant;

fn main() {
    let ne = 128;
    let mesh = build_grid(&GridSpec::grid4(ne).unwrap()).unwrap();
    let adj = adjacency(&mesh);
    let data = catalog(1, 1e-8).unwrap();
    let t0 = Instant::now();
    let sys = assemble(&mesh, &adj, &data).unwrap();
    println!("assemble: {:.1?}", t0.elapsed());
    let kind = StabilizerKind::kuzmin();
    let stab = Stabilizer::new(kind, &mesh, &adj, &sys.a).unwrap();
    let u: Vec<f64> = mesh.coords.iter().map(|p| (7.0*p[0]).sin()*(3.0*p[1]).cos()).collect();
    let t0 = Instant::now();
    let mut b = stab.build(&mesh, &adj, &sys.a, &u, false).b;
    println!("B build: {:.1?}", t0.elapsed());
    for _ in 0..4 { b = stab.build(&mesh, &adj, &sys.a, &u, false).b; }
    let t0 = Instant::now();
    for _ in 0..5 { b = stab.build(&mesh, &adj, &sys.a, &u, false).b; }
    println!("B build x5: {:.1?}", t0.elapsed());
    // linear solve timing via the public solve path is awkward; use residual cost instead
    let t0 = Instant::now();
    for _ in 0..5 {
        let r = afcstab::solver::residual_norm(&sys, &b, &u);
        std::hint::black_box(r);
    }
    println!("residual x5: {:.1?}", t0.elapsed());
}
