use afcstab::assembly::assemble;
use afcstab::mesh::{adjacency, build_grid, GridSpec};
use afcstab::problems::catalog;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMat};
use std::time::Instant;

fn main() {
    let ne = 128;
    let mesh = build_grid(&GridSpec::grid4(ne).unwrap()).unwrap();
    let adj = adjacency(&mesh);
    let data = catalog(1, 1e-8).unwrap();
    let sys = assemble(&mesh, &adj, &data).unwrap();
    let m = mesh.n_interior;
    let mut col_ptr = vec![0usize];
    let mut row_idx = Vec::new();
    let mut vals = Vec::new();
    for j in 0..m {
        let (cols, _) = sys.a.row(j);
        for &i in cols {
            if i < m {
                row_idx.push(i);
                vals.push(sys.a.get(i, j));
            }
        }
        col_ptr.push(row_idx.len());
    }
    println!("m={m} nnz={}", row_idx.len());
    let csc = SymbolicSparseColMat::new_checked(m, m, col_ptr, None, row_idx);
    let t = Instant::now();
    let sym = SymbolicLu::<usize>::try_new(csc.as_ref()).unwrap();
    println!("symbolic: {:.1?}", t.elapsed());
    let mat = SparseColMatRef::new(csc.as_ref(), &vals);
    let t = Instant::now();
    let mut lu = Lu::try_new_with_symbolic(sym.clone(), mat).unwrap();
    println!("numeric first: {:.1?}", t.elapsed());
    let t = Instant::now();
    for _ in 0..5 {
        lu = Lu::try_new_with_symbolic(sym.clone(), mat).unwrap();
    }
    println!("numeric x5: {:.1?}", t.elapsed());
    let _ = lu;
}
