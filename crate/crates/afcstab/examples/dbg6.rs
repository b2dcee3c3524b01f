use afcstab::assembly::{assemble, interpolate};
use afcstab::mesh::{adjacency, build_grid, GridSpec};
use afcstab::problems::catalog;
use afcstab::stabilizers::{Stabilizer, StabilizerKind, WeightMode};
use faer::linalg::solvers::Solve;

fn main() {
    let ne = 8;
    let mesh = build_grid(&GridSpec::grid4(ne).unwrap()).unwrap();
    let adj = adjacency(&mesh);
    let data = catalog(2, 1e-8).unwrap();
    let sys = assemble(&mesh, &adj, &data).unwrap();
    let m = mesh.n_interior;
    let kind = StabilizerKind::Smuas { weights: WeightMode::Matrix };
    let stab = Stabilizer::new(kind, &mesh, &adj, &sys.a).unwrap();
    let exact = interpolate(&mesh, |x, _| x);

    let solve_lin = |b: &afcstab::sparse::SparseMatrix| -> Vec<f64> {
        let dense = faer::Mat::<f64>::from_fn(m, m, |i, j| sys.a.get(i, j) + b.get(i, j));
        let mut rhs = faer::Mat::<f64>::from_fn(m, 1, |i, _| sys.rhs[i]);
        for i in 0..m {
            let (cols, avals) = sys.a.row(i);
            let (_, bvals) = b.row(i);
            for ((&j, &va), &vb) in cols.iter().zip(avals).zip(bvals) {
                if j >= m {
                    rhs[(i, 0)] -= (va + vb) * sys.dirichlet[j - m];
                }
            }
        }
        let lu = dense.partial_piv_lu();
        let x = lu.solve(&rhs);
        (0..m).map(|i| x[(i, 0)]).collect()
    };

    for e_scale in [1e-2, 1e-3, 1e-6, 1e-9] {
        let mut u = exact.clone();
        for (k, v) in u.iter_mut().enumerate().take(m) {
            *v += e_scale * ((k as f64 * 2.7).sin());
        }
        let b = stab.build(&mesh, &adj, &sys.a, &u, false).b;
        let bmax = b.values().iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let uhat = solve_lin(&b);
        let err_hat = uhat.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        println!("e = {e_scale:.0e}: |B|_max = {bmax:.3e}, err(Uhat) = {err_hat:.3e}, gain = {:.2}",
                 err_hat / e_scale);
    }
}
