use afcstab::assembly::assemble;
use afcstab::mesh::{adjacency, build_grid, GridSpec};
use afcstab::problems::catalog;
use afcstab::stabilizers::{Stabilizer, StabilizerKind, WeightMode, MuMode};
use faer::linalg::solvers::Solve;

fn main() {
    for ne in [16usize, 20, 32] {
        let mesh = build_grid(&GridSpec::grid4(ne).unwrap()).unwrap();
        let adj = adjacency(&mesh);
        let data = catalog(2, 1e-8).unwrap();
        let sys = assemble(&mesh, &adj, &data).unwrap();
        let m = mesh.n_interior;
        let g_norm = sys.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();

        // plain Galerkin start via dense LU + refinement-ish (use faer dense)
        let dense = faer::Mat::<f64>::from_fn(m, m, |i, j| sys.a.get(i, j));
        let mut rhs = faer::Mat::<f64>::from_fn(m, 1, |i, _| sys.rhs[i]);
        for i in 0..m {
            let (cols, avals) = sys.a.row(i);
            for (&j, &va) in cols.iter().zip(avals) {
                if j >= m { rhs[(i, 0)] -= va * sys.dirichlet[j - m]; }
            }
        }
        let lu = dense.partial_piv_lu();
        let x = lu.solve(&rhs);
        let mut u: Vec<f64> = (0..mesh.n_nodes()).map(|i| if i < m { x[(i, 0)] } else { sys.dirichlet[i - m] }).collect();
        // one refinement pass
        for _ in 0..2 {
            let mut r = faer::Mat::<f64>::zeros(m, 1);
            for i in 0..m {
                let (cols, avals) = sys.a.row(i);
                let mut acc = -sys.rhs[i];
                for (&j, &va) in cols.iter().zip(avals) { acc += va * u[j]; }
                r[(i, 0)] = -acc;
            }
            let dx = lu.solve(&r);
            for i in 0..m { u[i] += dx[(i, 0)]; }
        }
        let exact_err = u.iter().enumerate().map(|(i, v)| (v - mesh.point(i)[0]).abs()).fold(0.0f64, f64::max);

        for (label, kind) in [
            ("smuas-m", StabilizerKind::Smuas { weights: WeightMode::Matrix }),
            ("smuas-u", StabilizerKind::Smuas { weights: WeightMode::Unit }),
            ("bjk", StabilizerKind::Bjk { mu: MuMode::FromPatch }),
            ("kuzmin", StabilizerKind::kuzmin()),
        ] {
            let stab = Stabilizer::new(kind, &mesh, &adj, &sys.a).unwrap();
            let b = stab.build(&mesh, &adj, &sys.a, &u, false).b;
            let mut acc = 0.0;
            for i in 0..m {
                let (cols, avals) = sys.a.row(i);
                let (_, bvals) = b.row(i);
                let mut r = -sys.rhs[i];
                for ((&j, &va), &vb) in cols.iter().zip(avals).zip(bvals) { r += (va + vb) * u[j]; }
                acc += r * r;
            }
            let r = acc.sqrt();
            println!("ne={ne} {label}: r(galerkin-start) = {:.3e}  tol = {:.3e}  nodal_err(start) = {:.2e}",
                r, (1e-10f64 * g_norm).max(1e-13), exact_err);
        }
    }
}
