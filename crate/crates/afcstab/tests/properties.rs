//! Cross-module property tests: continuity of the stabilization term,
//! consistency bounds, and the local-average characterization.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use afcstab::assembly::assemble;
use afcstab::mesh::{adjacency, build_grid, node_at, GridSpec};
use afcstab::problems::catalog;
use afcstab::sparse::SparseMatrix;
use afcstab::stabilizers::{
    build_stabilization, MuMode, StabilizerKind, WeightMode,
};

fn methods() -> Vec<StabilizerKind> {
    vec![
        StabilizerKind::kuzmin(),
        StabilizerKind::Bjk { mu: MuMode::FromPatch },
        StabilizerKind::Muas,
        StabilizerKind::Smuas { weights: WeightMode::Matrix },
        StabilizerKind::Smuas { weights: WeightMode::Unit },
    ]
}

/// The products b_ij(U)(u_j - u_i) must be continuous in U: perturbing one
/// coordinate by eta changes them by at most L * eta with one constant L
/// across eta scales -- a jump would make the eta = 1e-6 quotient explode
/// relative to the eta = 1e-4 one.
#[test]
fn stabilization_term_is_continuous_in_u() {
    let mesh = build_grid(&GridSpec::grid4(4).unwrap()).unwrap();
    let adj = adjacency(&mesh);
    let data = catalog(2, 1e-3).unwrap();
    let sys = assemble(&mesh, &adj, &data).unwrap();
    let n = mesh.n_nodes();
    let scale = sys.a.max_offdiag_abs();
    // a generous but fixed Lipschitz budget for this mesh and data
    let lipschitz = 1e3 * scale;

    let term = |b: &SparseMatrix, u: &[f64]| -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        b.for_each(|i, j, v| {
            if i != j {
                out.push((i, j, v * (u[j] - u[i])));
            }
        });
        out
    };

    let mut rng = StdRng::seed_from_u64(23);
    for method in methods() {
        for trial in 0..25 {
            let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            // plant exact ties on a few edges so the perturbation straddles
            // the branch switches of the limiters
            for _ in 0..3 {
                let i = rng.gen_range(0..mesh.n_interior);
                let j = adj.s(i)[rng.gen_range(0..adj.s(i).len())];
                u[j] = u[i];
            }
            let base = term(&build_stabilization(method, &mesh, &adj, &sys.a, &u).unwrap().b, &u);
            let k = rng.gen_range(0..n);
            let sign = if trial % 2 == 0 { 1.0 } else { -1.0 };
            for eta in [1e-4, 1e-6] {
                let mut up = u.clone();
                up[k] += sign * eta;
                let pert =
                    term(&build_stabilization(method, &mesh, &adj, &sys.a, &up).unwrap().b, &up);
                for (a, b) in base.iter().zip(&pert) {
                    let delta = (a.2 - b.2).abs();
                    assert!(
                        delta <= lipschitz * eta,
                        "{method:?}: |delta b_ij (u_j - u_i)| = {delta:.3e} for eta = {eta:.0e} \
                         at pair ({}, {})",
                        a.0,
                        a.1
                    );
                }
            }
        }
    }
}

/// |b_ij(U)| <= max{|a_ij|, |a_ji|} for all methods; for the BJK scheme the
/// bound holds with the boundary-modified entries (checked in unit tests).
#[test]
fn consistency_bound_on_random_fields() {
    let mesh = build_grid(&GridSpec::grid5(6, 0.8).unwrap()).unwrap();
    let adj = adjacency(&mesh);
    let data = catalog(1, 1e-8).unwrap();
    let sys = assemble(&mesh, &adj, &data).unwrap();
    let mut rng = StdRng::seed_from_u64(31);
    for method in [
        StabilizerKind::kuzmin(),
        StabilizerKind::Muas,
        StabilizerKind::Smuas { weights: WeightMode::Matrix },
        StabilizerKind::Smuas { weights: WeightMode::Unit },
    ] {
        for _ in 0..20 {
            let u: Vec<f64> = (0..mesh.n_nodes()).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let b = build_stabilization(method, &mesh, &adj, &sys.a, &u).unwrap().b;
            b.for_each(|i, j, v| {
                if i != j {
                    let bound = sys.a.get(i, j).abs().max(sys.a.get(j, i).abs());
                    assert!(
                        v.abs() <= bound + 1e-14,
                        "{method:?}: |b({i},{j})| = {} > {bound}",
                        v.abs()
                    );
                }
            });
        }
    }
}

/// For the Kuzmin limiter with P sums over all neighbors, R+ = R- = 1 at a
/// node is equivalent to u_i being the |d|-weighted average of its
/// neighbors.
#[test]
fn unit_ratios_match_local_average() {
    let ne = 8;
    let mesh = build_grid(&GridSpec::grid4(ne).unwrap()).unwrap();
    let adj = adjacency(&mesh);
    let data = catalog(2, 1e-3).unwrap();
    let sys = assemble(&mesh, &adj, &data).unwrap();
    let d = afcstab::stabilizers::artificial_diffusion(&sys.a);
    let h = 1.0 / ne as f64;
    let i = node_at(&mesh, 4.0 * h, 4.0 * h);

    let mut rng = StdRng::seed_from_u64(37);
    let mut u: Vec<f64> = (0..mesh.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    u[i] = afcstab::analysis::local_average(&d, &u, i).unwrap();

    let out = afcstab::stabilizers::kuzmin_limiter(
        &sys.a,
        &d,
        &u,
        mesh.n_interior,
        &afcstab::stabilizers::KuzminOptions {
            pvariant: afcstab::stabilizers::PVariant::BjkP,
            mu: None,
        },
        true,
    );
    let diag = out.diagnostics.unwrap();
    assert!((diag.r_plus[i] - 1.0).abs() <= 1e-12, "R+ = {}", diag.r_plus[i]);
    assert!((diag.r_minus[i] - 1.0).abs() <= 1e-12, "R- = {}", diag.r_minus[i]);

    // moving u_i off the average breaks at least one of the two ratios
    u[i] += 0.1;
    let out = afcstab::stabilizers::kuzmin_limiter(
        &sys.a,
        &d,
        &u,
        mesh.n_interior,
        &afcstab::stabilizers::KuzminOptions {
            pvariant: afcstab::stabilizers::PVariant::BjkP,
            mu: None,
        },
        true,
    );
    let diag = out.diagnostics.unwrap();
    assert!(diag.r_plus[i] < 1.0 - 1e-6 || diag.r_minus[i] < 1.0 - 1e-6);
}
