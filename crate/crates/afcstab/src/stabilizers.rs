//! Solution-dependent artificial diffusion matrices B(U).
//!
//! Four methods are provided, all fitting the same framework: B(U) is
//! symmetric, has nonpositive off-diagonal entries, zero row sums and the
//! finite element sparsity pattern, so the stabilized system
//! sum_j (a_ij + b_ij(U)) u_j = g_i stays positive semidefinite in the
//! stabilization part.
//!
//! - `kuzmin_limiter`: classical AFC limiter with upwind-restricted P sums
//!   and one-sided symmetrization,
//! - `bjk_limiter`: Zalesak-type limiter with bounds from local extrema and
//!   per-node constants mu_i,
//! - `muas_stabilizer`: monotone upwind-type method, B built directly from
//!   beta-scaled matrix entries,
//! - `smuas_stabilizer`: symmetrized variant of the latter; the P/Q sums are
//!   augmented with values at points placed symmetrically to the neighbors,
//!   obtained by extending the P1 function from the upwind simplex.

use thiserror::Error;

use crate::mesh::{upwind_simplex, Adjacency, Mesh, MeshError};
use crate::sparse::SparseMatrix;

#[derive(Debug, Error)]
pub enum StabilizerError {
    #[error("mu must be positive at every interior node; node {0} has {1}")]
    InvalidMu(usize, f64),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// P-sum variant of the Kuzmin limiter: `Standard` restricts the sums to the
/// upwind neighbors (a_ji <= a_ij), `BjkP` sums over all of S_i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PVariant {
    #[default]
    Standard,
    BjkP,
}

/// Choice of the BJK constants mu_i.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuMode {
    /// Patch-based lower bound that makes the scheme linearity preserving.
    FromPatch,
    Constant(f64),
}

/// Weighting factors of the SMUAS sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// p_ij = max{a_ij, 0, a_ji}, q_ij = max{|a_ij|, a_ji}.
    Matrix,
    /// p_ij = q_ij = 1.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StabilizerKind {
    None,
    Kuzmin { pvariant: PVariant },
    Bjk { mu: MuMode },
    Muas,
    Smuas { weights: WeightMode },
}

impl StabilizerKind {
    pub fn kuzmin() -> Self {
        StabilizerKind::Kuzmin {
            pvariant: PVariant::Standard,
        }
    }
}

/// Per-node limiter quantities, retained on request for fixture tests.
#[derive(Debug, Clone)]
pub struct LimiterDiagnostics {
    pub p_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
    pub q_plus: Vec<f64>,
    pub q_minus: Vec<f64>,
    pub r_plus: Vec<f64>,
    pub r_minus: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StabilizationMatrix {
    pub b: SparseMatrix,
    pub diagnostics: Option<LimiterDiagnostics>,
}

/// Artificial diffusion matrix: d_ij = d_ji = -max{a_ij, 0, a_ji} for i != j
/// and d_ii = -sum_{j != i} d_ij.
pub fn artificial_diffusion(a: &SparseMatrix) -> SparseMatrix {
    let trans = a.transpose_map();
    artificial_diffusion_cached(a, &trans)
}

fn artificial_diffusion_cached(a: &SparseMatrix, trans: &[usize]) -> SparseMatrix {
    let n = a.order();
    let mut d = a.same_pattern_zeroed();
    for i in 0..n {
        let mut diag = 0.0;
        let mut diag_k = usize::MAX;
        for k in a.row_range(i) {
            if a.col_of(k) == i {
                diag_k = k;
                continue;
            }
            let v = -a.value_at(k).max(0.0).max(a.value_at(trans[k]));
            d.set_at(k, v);
            diag -= v;
        }
        d.set_at(diag_k, diag);
    }
    d
}

/// Artificial diffusion entries and anti-diffusive fluxes f_ij = d_ij (u_j - u_i).
pub struct FluxWorkspace {
    pub d: SparseMatrix,
}

impl FluxWorkspace {
    pub fn new(a: &SparseMatrix) -> Self {
        FluxWorkspace {
            d: artificial_diffusion(a),
        }
    }

    pub fn flux(&self, i: usize, j: usize, u: &[f64]) -> f64 {
        self.d.get(i, j) * (u[j] - u[i])
    }
}

fn pos_part(x: f64) -> f64 {
    x.max(0.0)
}

fn neg_part(x: f64) -> f64 {
    x.min(0.0)
}

/// R = min{1, mu Q / P} with the convention R = 1 when P vanishes.
fn limiter_ratio(p: f64, q: f64, mu: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        (mu * q / p).min(1.0)
    }
}

fn alpha_tilde(f: f64, r_plus: f64, r_minus: f64) -> f64 {
    if f > 0.0 {
        r_plus
    } else if f < 0.0 {
        r_minus
    } else {
        1.0
    }
}

pub struct KuzminOptions<'a> {
    pub pvariant: PVariant,
    /// Optional per-node multipliers applied inside R = min{1, mu Q / P};
    /// used by the linearity-restoring modification at selected nodes.
    pub mu: Option<&'a [f64]>,
}

impl Default for KuzminOptions<'_> {
    fn default() -> Self {
        KuzminOptions {
            pvariant: PVariant::Standard,
            mu: None,
        }
    }
}

/// AFC scheme with the Kuzmin limiter: b_ij = (1 - alpha_ij) d_ij.
pub fn kuzmin_limiter(
    a: &SparseMatrix,
    d: &SparseMatrix,
    u: &[f64],
    n_interior: usize,
    opts: &KuzminOptions,
    with_diagnostics: bool,
) -> StabilizationMatrix {
    let trans = a.transpose_map();
    kuzmin_cached(a, d, u, n_interior, opts, with_diagnostics, &trans)
}

fn kuzmin_cached(
    a: &SparseMatrix,
    d: &SparseMatrix,
    u: &[f64],
    n_interior: usize,
    opts: &KuzminOptions,
    with_diagnostics: bool,
    trans: &[usize],
) -> StabilizationMatrix {
    let n = a.order();
    let mut p_plus = vec![0.0; n];
    let mut p_minus = vec![0.0; n];
    let mut q_plus = vec![0.0; n];
    let mut q_minus = vec![0.0; n];
    let mut r_plus = vec![1.0; n];
    let mut r_minus = vec![1.0; n];

    for i in 0..n_interior {
        for k in a.row_range(i) {
            let j = a.col_of(k);
            if j == i {
                continue;
            }
            let f = d.value_at(k) * (u[j] - u[i]);
            let in_p = match opts.pvariant {
                PVariant::Standard => a.value_at(trans[k]) <= a.value_at(k),
                PVariant::BjkP => true,
            };
            if in_p {
                p_plus[i] += pos_part(f);
                p_minus[i] += neg_part(f);
            }
            q_plus[i] -= neg_part(f);
            q_minus[i] -= pos_part(f);
        }
        let mu = opts.mu.map_or(1.0, |m| m[i]);
        r_plus[i] = limiter_ratio(p_plus[i], q_plus[i], mu);
        r_minus[i] = limiter_ratio(p_minus[i], q_minus[i], mu);
    }
    // Dirichlet rows keep R = 1.

    let mut b = a.same_pattern_zeroed();
    let mut bdiag = vec![0.0; n];
    for i in 0..n {
        for k in a.row_range(i) {
            let j = a.col_of(k);
            if j <= i {
                continue;
            }
            let dij = d.value_at(k);
            let aij = a.value_at(k);
            let aji = a.value_at(trans[k]);
            // one-sided symmetrization: the factor computed at the upwind
            // end of the edge wins; exact ties go to the smaller index
            let alpha = if aji <= aij {
                alpha_tilde(dij * (u[j] - u[i]), r_plus[i], r_minus[i])
            } else {
                alpha_tilde(dij * (u[i] - u[j]), r_plus[j], r_minus[j])
            };
            let bij = (1.0 - alpha) * dij;
            b.set_at(k, bij);
            b.set_at(trans[k], bij);
            bdiag[i] -= bij;
            bdiag[j] -= bij;
        }
    }
    for i in 0..n {
        let k = a.entry_index(i, i).unwrap();
        b.set_at(k, bdiag[i]);
    }

    StabilizationMatrix {
        b,
        diagnostics: with_diagnostics.then(|| LimiterDiagnostics {
            p_plus,
            p_minus,
            q_plus,
            q_minus,
            r_plus,
            r_minus,
        }),
    }
}

/// Boundary modification preceding the BJK scheme: a_ji := 0 whenever
/// a_ij < 0 for interior i and boundary j. Only the artificial diffusion
/// matrix is built from the modified entries.
pub fn bjk_modified_matrix(a: &SparseMatrix, n_interior: usize) -> SparseMatrix {
    let mut m = a.clone();
    for i in 0..n_interior {
        let (cols, _) = a.row(i);
        let cols = cols.to_vec();
        for &j in &cols {
            if j >= n_interior && a.get(i, j) < 0.0 {
                m.set(j, i, 0.0);
            }
        }
    }
    m
}

/// AFC scheme with the BJK limiter. `d` must be built from the modified
/// matrix (see [`bjk_modified_matrix`]); `mu` holds the per-node constants
/// for the interior nodes.
pub fn bjk_limiter(
    a: &SparseMatrix,
    d: &SparseMatrix,
    u: &[f64],
    n_interior: usize,
    mu: &[f64],
    with_diagnostics: bool,
) -> Result<StabilizationMatrix, StabilizerError> {
    let trans = a.transpose_map();
    bjk_cached(a, d, u, n_interior, mu, with_diagnostics, &trans)
}

fn bjk_cached(
    a: &SparseMatrix,
    d: &SparseMatrix,
    u: &[f64],
    n_interior: usize,
    mu: &[f64],
    with_diagnostics: bool,
    trans: &[usize],
) -> Result<StabilizationMatrix, StabilizerError> {
    let n = a.order();
    for (i, &m) in mu.iter().take(n_interior).enumerate() {
        if !(m > 0.0) {
            return Err(StabilizerError::InvalidMu(i, m));
        }
    }
    let mut p_plus = vec![0.0; n];
    let mut p_minus = vec![0.0; n];
    let mut q_plus = vec![0.0; n];
    let mut q_minus = vec![0.0; n];
    let mut r_plus = vec![1.0; n];
    let mut r_minus = vec![1.0; n];

    for i in 0..n_interior {
        let mut umax = u[i];
        let mut umin = u[i];
        let mut qi = 0.0;
        for k in d.row_range(i) {
            let j = d.col_of(k);
            if j == i {
                continue;
            }
            let dij = d.value_at(k);
            let f = dij * (u[j] - u[i]);
            p_plus[i] += pos_part(f);
            p_minus[i] += neg_part(f);
            umax = umax.max(u[j]);
            umin = umin.min(u[j]);
            qi += dij;
        }
        q_plus[i] = qi * (u[i] - umax);
        q_minus[i] = qi * (u[i] - umin);
        r_plus[i] = limiter_ratio(p_plus[i], q_plus[i], mu[i]);
        r_minus[i] = limiter_ratio(p_minus[i], q_minus[i], mu[i]);
    }

    let mut b = a.same_pattern_zeroed();
    let mut bdiag = vec![0.0; n];
    for i in 0..n {
        for k in d.row_range(i) {
            let j = d.col_of(k);
            if j <= i {
                continue;
            }
            let dij = d.value_at(k);
            let f = dij * (u[j] - u[i]);
            let alpha = alpha_tilde(f, r_plus[i], r_minus[i])
                .min(alpha_tilde(-f, r_plus[j], r_minus[j]));
            let bij = (1.0 - alpha) * dij;
            b.set_at(k, bij);
            b.set_at(trans[k], bij);
            bdiag[i] -= bij;
            bdiag[j] -= bij;
        }
    }
    for i in 0..n {
        let k = a.entry_index(i, i).unwrap();
        b.set_at(k, bdiag[i]);
    }

    Ok(StabilizationMatrix {
        b,
        diagnostics: with_diagnostics.then(|| LimiterDiagnostics {
            p_plus,
            p_minus,
            q_plus,
            q_minus,
            r_plus,
            r_minus,
        }),
    })
}

/// beta factors shared by the MUAS and SMUAS methods.
fn beta_of(u_i: f64, u_j: f64, r_plus: f64, r_minus: f64) -> f64 {
    if u_i > u_j {
        1.0 - r_plus
    } else if u_i < u_j {
        1.0 - r_minus
    } else {
        0.0
    }
}

/// Assembles B from beta factors: b_ij = -max{beta_ij a_ij, 0, beta_ji a_ji}.
/// At Dirichlet rows R = 1, i.e. beta = 0.
fn beta_matrix(
    a: &SparseMatrix,
    u: &[f64],
    n_interior: usize,
    r_plus: &[f64],
    r_minus: &[f64],
    trans: &[usize],
) -> SparseMatrix {
    let n = a.order();
    let mut b = a.same_pattern_zeroed();
    let mut bdiag = vec![0.0; n];
    for i in 0..n {
        for k in a.row_range(i) {
            let j = a.col_of(k);
            if j <= i {
                continue;
            }
            let beta_ij = if i < n_interior {
                beta_of(u[i], u[j], r_plus[i], r_minus[i])
            } else {
                0.0
            };
            let beta_ji = if j < n_interior {
                beta_of(u[j], u[i], r_plus[j], r_minus[j])
            } else {
                0.0
            };
            let bij = -(beta_ij * a.value_at(k))
                .max(0.0)
                .max(beta_ji * a.value_at(trans[k]));
            b.set_at(k, bij);
            b.set_at(trans[k], bij);
            bdiag[i] -= bij;
            bdiag[j] -= bij;
        }
    }
    for i in 0..n {
        let k = a.entry_index(i, i).unwrap();
        b.set_at(k, bdiag[i]);
    }
    b
}

/// Monotone upwind-type algebraically stabilized method.
pub fn muas_stabilizer(
    a: &SparseMatrix,
    u: &[f64],
    n_interior: usize,
    with_diagnostics: bool,
) -> StabilizationMatrix {
    let trans = a.transpose_map();
    muas_cached(a, u, n_interior, with_diagnostics, &trans)
}

fn muas_cached(
    a: &SparseMatrix,
    u: &[f64],
    n_interior: usize,
    with_diagnostics: bool,
    trans: &[usize],
) -> StabilizationMatrix {
    let n = a.order();
    let mut p_plus = vec![0.0; n];
    let mut p_minus = vec![0.0; n];
    let mut q_plus = vec![0.0; n];
    let mut q_minus = vec![0.0; n];
    let mut r_plus = vec![1.0; n];
    let mut r_minus = vec![1.0; n];

    for i in 0..n_interior {
        for k in a.row_range(i) {
            let j = a.col_of(k);
            if j == i {
                continue;
            }
            let aij = a.value_at(k);
            if aij > 0.0 {
                p_plus[i] += aij * pos_part(u[i] - u[j]);
                p_minus[i] += aij * neg_part(u[i] - u[j]);
            }
            let s = a.value_at(trans[k]).max(aij.abs());
            q_plus[i] += s * pos_part(u[j] - u[i]);
            q_minus[i] += s * neg_part(u[j] - u[i]);
        }
        r_plus[i] = limiter_ratio(p_plus[i], q_plus[i], 1.0);
        r_minus[i] = limiter_ratio(p_minus[i], q_minus[i], 1.0);
    }

    let b = beta_matrix(a, u, n_interior, &r_plus, &r_minus, trans);
    StabilizationMatrix {
        b,
        diagnostics: with_diagnostics.then(|| LimiterDiagnostics {
            p_plus,
            p_minus,
            q_plus,
            q_minus,
            r_plus,
            r_minus,
        }),
    }
}

/// Pattern-aligned table of the upwind simplices T_ij; depends only on the
/// mesh geometry, so it is built once and reused across iterations.
#[derive(Debug, Clone)]
pub struct UpwindTable {
    /// T_ij per stored off-diagonal pair of an interior row, stored as a
    /// pattern-aligned matrix of triangle indices (as f64 bit-cast-free:
    /// kept as usize alongside the pattern).
    table: Vec<Vec<(usize, usize)>>,
}

impl UpwindTable {
    pub fn new(mesh: &Mesh, adj: &Adjacency) -> Result<Self, MeshError> {
        let mut table = Vec::with_capacity(mesh.n_interior);
        for i in 0..mesh.n_interior {
            let mut row = Vec::with_capacity(adj.s(i).len());
            for &j in adj.s(i) {
                row.push((j, upwind_simplex(mesh, adj, i, j)?));
            }
            table.push(row);
        }
        Ok(Self { table })
    }

    pub fn row(&self, i: usize) -> &[(usize, usize)] {
        &self.table[i]
    }
}

/// Values u_ij = u_i + grad(u_h)|_{T_ij} . (x_i - x_j) at the points placed
/// symmetrically to the neighbors x_j with respect to x_i. Returned in a
/// pattern-aligned matrix; entries of boundary rows stay zero.
pub fn smuas_extension_values(
    mesh: &Mesh,
    adj: &Adjacency,
    u: &[f64],
    upwind: &UpwindTable,
) -> SparseMatrix {
    let mut out = SparseMatrix::from_adjacency(adj);
    for i in 0..mesh.n_interior {
        let xi = mesh.point(i);
        // row entries are sorted; neighbors in the table are sorted too, so
        // walk the row once
        let mut k = out.row_range(i).start;
        for &(j, t) in upwind.row(i) {
            let grad = mesh.p1_gradient_on(t, u);
            let xj = mesh.point(j);
            let uij = u[i] + grad[0] * (xi[0] - xj[0]) + grad[1] * (xi[1] - xj[1]);
            while out.col_of(k) != j {
                k += 1;
            }
            out.set_at(k, uij);
        }
    }
    out
}

/// Symmetrized MUAS method.
pub fn smuas_stabilizer(
    mesh: &Mesh,
    adj: &Adjacency,
    a: &SparseMatrix,
    u: &[f64],
    upwind: &UpwindTable,
    weights: WeightMode,
    with_diagnostics: bool,
) -> StabilizationMatrix {
    let trans = a.transpose_map();
    smuas_cached(mesh, adj, a, u, upwind, weights, with_diagnostics, &trans)
}

#[allow(clippy::too_many_arguments)]
fn smuas_cached(
    mesh: &Mesh,
    adj: &Adjacency,
    a: &SparseMatrix,
    u: &[f64],
    upwind: &UpwindTable,
    weights: WeightMode,
    with_diagnostics: bool,
    trans: &[usize],
) -> StabilizationMatrix {
    let n = a.order();
    let n_interior = mesh.n_interior;
    let uext = smuas_extension_values(mesh, adj, u, upwind);

    let mut p_plus = vec![0.0; n];
    let mut p_minus = vec![0.0; n];
    let mut q_plus = vec![0.0; n];
    let mut q_minus = vec![0.0; n];
    let mut r_plus = vec![1.0; n];
    let mut r_minus = vec![1.0; n];

    for i in 0..n_interior {
        for k in a.row_range(i) {
            let j = a.col_of(k);
            if j == i {
                continue;
            }
            let aij = a.value_at(k);
            let aji = a.value_at(trans[k]);
            let uij = uext.value_at(k);
            let (p_w, q_w) = match weights {
                WeightMode::Matrix => (aij.max(0.0).max(aji), aji.max(aij.abs())),
                WeightMode::Unit => (1.0, 1.0),
            };
            if aij > 0.0 || aji > 0.0 {
                p_plus[i] += p_w * (pos_part(u[i] - u[j]) + pos_part(u[i] - uij));
                p_minus[i] += p_w * (neg_part(u[i] - u[j]) + neg_part(u[i] - uij));
            }
            q_plus[i] += q_w * (pos_part(u[j] - u[i]) + pos_part(uij - u[i]));
            q_minus[i] += q_w * (neg_part(u[j] - u[i]) + neg_part(uij - u[i]));
        }
        r_plus[i] = limiter_ratio(p_plus[i], q_plus[i], 1.0);
        r_minus[i] = limiter_ratio(p_minus[i], q_minus[i], 1.0);
    }

    let b = beta_matrix(a, u, n_interior, &r_plus, &r_minus, trans);
    StabilizationMatrix {
        b,
        diagnostics: with_diagnostics.then(|| LimiterDiagnostics {
            p_plus,
            p_minus,
            q_plus,
            q_minus,
            r_plus,
            r_minus,
        }),
    }
}

/// One stabilizer bound to a mesh and matrix pattern. The U-independent
/// pieces (artificial diffusion, BJK constants, upwind simplices) are
/// precomputed here so the nonlinear iteration only pays for the limiter.
pub struct Stabilizer {
    kind: StabilizerKind,
    n_interior: usize,
    trans: Vec<usize>,
    d: Option<SparseMatrix>,
    mu: Option<Vec<f64>>,
    upwind: Option<UpwindTable>,
}

impl Stabilizer {
    pub fn new(
        kind: StabilizerKind,
        mesh: &Mesh,
        adj: &Adjacency,
        a: &SparseMatrix,
    ) -> Result<Self, StabilizerError> {
        let n_interior = mesh.n_interior;
        let trans = a.transpose_map();
        let mut d = None;
        let mut mu = None;
        let mut upwind = None;
        match kind {
            StabilizerKind::None | StabilizerKind::Muas => {}
            StabilizerKind::Kuzmin { .. } => {
                d = Some(artificial_diffusion_cached(a, &trans));
            }
            StabilizerKind::Bjk { mu: mode } => {
                let a_mod = bjk_modified_matrix(a, n_interior);
                d = Some(artificial_diffusion_cached(&a_mod, &trans));
                let values: Vec<f64> = match mode {
                    MuMode::Constant(c) => {
                        if !(c > 0.0) {
                            return Err(StabilizerError::InvalidMu(0, c));
                        }
                        vec![c; n_interior]
                    }
                    MuMode::FromPatch => (0..n_interior)
                        .map(|i| crate::mesh::patch_mu(mesh, adj, i))
                        .collect(),
                };
                mu = Some(values);
            }
            StabilizerKind::Smuas { .. } => {
                upwind = Some(UpwindTable::new(mesh, adj)?);
            }
        }
        Ok(Self {
            kind,
            n_interior,
            trans,
            d,
            mu,
            upwind,
        })
    }

    pub fn kind(&self) -> StabilizerKind {
        self.kind
    }

    pub fn build(
        &self,
        mesh: &Mesh,
        adj: &Adjacency,
        a: &SparseMatrix,
        u: &[f64],
        with_diagnostics: bool,
    ) -> StabilizationMatrix {
        match self.kind {
            StabilizerKind::None => StabilizationMatrix {
                b: a.same_pattern_zeroed(),
                diagnostics: None,
            },
            StabilizerKind::Kuzmin { pvariant } => kuzmin_cached(
                a,
                self.d.as_ref().unwrap(),
                u,
                self.n_interior,
                &KuzminOptions { pvariant, mu: None },
                with_diagnostics,
                &self.trans,
            ),
            StabilizerKind::Bjk { .. } => bjk_cached(
                a,
                self.d.as_ref().unwrap(),
                u,
                self.n_interior,
                self.mu.as_ref().unwrap(),
                with_diagnostics,
                &self.trans,
            )
            .expect("mu validated at construction"),
            StabilizerKind::Muas => {
                muas_cached(a, u, self.n_interior, with_diagnostics, &self.trans)
            }
            StabilizerKind::Smuas { weights } => smuas_cached(
                mesh,
                adj,
                a,
                u,
                self.upwind.as_ref().unwrap(),
                weights,
                with_diagnostics,
                &self.trans,
            ),
        }
    }
}

/// Dispatch over the methods; `None` yields the zero matrix.
pub fn build_stabilization(
    kind: StabilizerKind,
    mesh: &Mesh,
    adj: &Adjacency,
    a: &SparseMatrix,
    u: &[f64],
) -> Result<StabilizationMatrix, StabilizerError> {
    Ok(Stabilizer::new(kind, mesh, adj, a)?.build(mesh, adj, a, u, false))
}
