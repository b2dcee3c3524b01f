use afcstab::assembly::assemble;
use afcstab::mesh::{adjacency, build_grid, GridKind, GridSpec};
use afcstab::problems::catalog;

fn main() {
    for (kind, ne) in [(GridKind::Grid1, 6), (GridKind::Grid4, 6), (GridKind::Grid4, 16)] {
        let spec = GridSpec::new(kind, ne, 0.0).unwrap();
        let mesh = build_grid(&spec).unwrap();
        let adj = adjacency(&mesh);
        let data = catalog(2, 1e-8).unwrap();
        let sys = assemble(&mesh, &adj, &data).unwrap();
        let m = mesh.n_interior;
        let dense = faer::Mat::<f64>::from_fn(m, m, |i, j| sys.a.get(i, j));
        let svd = dense.svd().unwrap();
        let s = svd.S();
        println!("{kind:?} ne={ne}: sigma_max={:.3e} sigma_min={:.3e} cond={:.3e}",
                 s[0], s[m-1], s[0]/s[m-1]);
    }
}
