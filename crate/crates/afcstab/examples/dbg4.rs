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
    let n = mesh.n_nodes();
    let kind = StabilizerKind::Smuas { weights: WeightMode::Matrix };
    let stab = Stabilizer::new(kind, &mesh, &adj, &sys.a).unwrap();

    let residual = |b: &afcstab::sparse::SparseMatrix, u: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..m {
            let (cols, avals) = sys.a.row(i);
            let (_, bvals) = b.row(i);
            let mut r = -sys.rhs[i];
            for ((&j, &va), &vb) in cols.iter().zip(avals).zip(bvals) {
                r += (va + vb) * u[j];
            }
            acc += r * r;
        }
        acc.sqrt()
    };

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

    let exact = interpolate(&mesh, |x, _| x);

    for (label, omega, start_exact) in [
        ("picard w=1.0 from D-start", 1.0, false),
        ("picard w=0.5 from D-start", 0.5, false),
        ("picard w=0.1 from D-start", 0.1, false),
        ("picard w=0.5 from exact+1e-3 noise", 0.5, true),
    ] {
        let mut u: Vec<f64> = exact.clone();
        if start_exact {
            for (k, v) in u.iter_mut().enumerate().take(m) {
                *v += 1e-3 * ((k as f64 * 2.7).sin());
            }
        } else {
            let d = afcstab::stabilizers::artificial_diffusion(&sys.a);
            let interior = solve_lin(&d);
            u[..m].copy_from_slice(&interior);
            for i in m..n {
                u[i] = sys.dirichlet[i - m];
            }
        }
        println!("== {label}");
        for it in 0..60 {
            let b = stab.build(&mesh, &adj, &sys.a, &u, false).b;
            let r = residual(&b, &u);
            if it % 10 == 0 || it > 55 {
                let err = u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
                println!("  it {it:3}: residual {r:.3e} err {err:.3e}");
            }
            let uhat = solve_lin(&b);
            for i in 0..m {
                u[i] += omega * (uhat[i] - u[i]);
            }
        }
    }
}
