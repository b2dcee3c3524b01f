//! Error norms, convergence orders, DMP verification and the analytical
//! oscillation fixtures.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::mesh::{Adjacency, Mesh};
use crate::problems::ProblemData;
use crate::quadrature::{bary_to_xy, degree4, degree6};
use crate::sparse::SparseMatrix;
use crate::stabilizers::{build_stabilization, StabilizerError, StabilizerKind};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("problem has no exact solution; error norms unavailable")]
    MissingExact,
    #[error("invalid DMP region: {0}")]
    BadRegion(String),
    #[error("invalid oscillatory field: {0}")]
    BadField(String),
    #[error("local average weights are all zero at node {0}")]
    ZeroWeights(usize),
    #[error("convergence table needs at least two rows")]
    TooFewRows,
    #[error("ne values must double: {0} does not follow {1}")]
    NonDoubling(usize, usize),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
}

/// Errors of a discrete solution against the exact one: L2 norm, H1
/// seminorm and the solution-dependent energy norm
/// (eps |e|_1^2 + sigma0 ||e||_0^2 + b_h(u_h; e, e))^(1/2).
#[derive(Debug, Clone, Copy)]
pub struct ErrorReport {
    pub l2: f64,
    pub h1semi: f64,
    pub norm_h: f64,
    /// The algebraic stabilization part b_h(u_h; e, e) of norm_h^2.
    pub b_form: f64,
}

pub fn error_norms(
    mesh: &Mesh,
    u: &[f64],
    data: &ProblemData,
    b: &SparseMatrix,
) -> Result<ErrorReport, AnalysisError> {
    let exact = data.exact.as_ref().ok_or(AnalysisError::MissingExact)?;
    let rule = degree6();
    let mut l2_sq = 0.0;
    let mut h1_sq = 0.0;
    for t in 0..mesh.n_triangles() {
        let verts = mesh.triangles[t];
        let pts = verts.map(|v| mesh.point(v));
        let area = mesh.area(t);
        let grad_h = mesh.p1_gradient_on(t, u);
        for q in &rule {
            let xy = bary_to_xy(q.bary, pts[0], pts[1], pts[2]);
            let uh = q.bary[0] * u[verts[0]] + q.bary[1] * u[verts[1]] + q.bary[2] * u[verts[2]];
            let du = (exact.u)(xy[0], xy[1]) - uh;
            let g = (exact.grad)(xy[0], xy[1]);
            let dgx = g[0] - grad_h[0];
            let dgy = g[1] - grad_h[1];
            let w = q.weight * area;
            l2_sq += w * du * du;
            h1_sq += w * (dgx * dgx + dgy * dgy);
        }
    }
    // stabilization term evaluated on nodal errors
    let e_nodal: Vec<f64> = mesh
        .coords
        .iter()
        .zip(u)
        .map(|(p, &ui)| (exact.u)(p[0], p[1]) - ui)
        .collect();
    let b_form = b.quadratic_form(&e_nodal);
    debug_assert!(b_form >= -1e-12 * e_nodal.iter().map(|v| v * v).sum::<f64>().max(1e-300));
    let norm_h = (data.epsilon * h1_sq + data.sigma0 * l2_sq + b_form.max(0.0)).sqrt();
    Ok(ErrorReport {
        l2: l2_sq.sqrt(),
        h1semi: h1_sq.sqrt(),
        norm_h,
        b_form,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderCell {
    Blank,
    /// Error vanished; the order is undefined.
    Exact,
    Value(f64),
}

impl OrderCell {
    pub fn to_csv_field(self) -> String {
        match self {
            OrderCell::Blank => String::new(),
            OrderCell::Exact => "exact".into(),
            OrderCell::Value(v) => format_sig(v, 6),
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            OrderCell::Value(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub ne: usize,
    pub l2: f64,
    pub l2_order: OrderCell,
    pub h1: f64,
    pub h1_order: OrderCell,
    pub norm_h: f64,
    pub norm_h_order: OrderCell,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub rows: Vec<TableRow>,
}

fn order_between(coarse: f64, fine: f64) -> OrderCell {
    if fine == 0.0 || coarse == 0.0 {
        OrderCell::Exact
    } else {
        OrderCell::Value((coarse / fine).log2())
    }
}

/// Builds the order columns for successive mesh halvings. The first row's
/// orders come from `coarser` (a run at ne/2) when supplied, else stay blank.
pub fn convergence_table(
    rows: &[(usize, ErrorReport)],
    coarser: Option<&ErrorReport>,
) -> Result<ConvergenceTable, AnalysisError> {
    if rows.len() < 2 && !(rows.len() == 1 && coarser.is_some()) {
        return Err(AnalysisError::TooFewRows);
    }
    for w in rows.windows(2) {
        if w[1].0 != 2 * w[0].0 {
            return Err(AnalysisError::NonDoubling(w[1].0, w[0].0));
        }
    }
    let mut out = Vec::with_capacity(rows.len());
    for (k, (ne, rep)) in rows.iter().enumerate() {
        let prev = if k > 0 { Some(&rows[k - 1].1) } else { coarser };
        let (l2_order, h1_order, norm_h_order) = match prev {
            Some(p) => (
                order_between(p.l2, rep.l2),
                order_between(p.h1semi, rep.h1semi),
                order_between(p.norm_h, rep.norm_h),
            ),
            None => (OrderCell::Blank, OrderCell::Blank, OrderCell::Blank),
        };
        out.push(TableRow {
            ne: *ne,
            l2: rep.l2,
            l2_order,
            h1: rep.h1semi,
            h1_order,
            norm_h: rep.norm_h,
            norm_h_order,
        });
    }
    Ok(ConvergenceTable { rows: out })
}

/// Formats with the given number of significant digits.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-3..6).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.prec$e}", prec = digits - 1)
    }
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("ne,l2,l2_order,h1,h1_order,normh,normh_order\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.ne,
                format_sig(r.l2, 6),
                r.l2_order.to_csv_field(),
                format_sig(r.h1, 6),
                r.h1_order.to_csv_field(),
                format_sig(r.norm_h, 6),
                r.norm_h_order.to_csv_field(),
            ));
        }
        s
    }
}

/// Sign claimed for the source term on a DMP region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceSign {
    Nonpositive,
    Nonnegative,
}

/// A nonempty set of triangles with a verified sign of g on its union.
#[derive(Debug, Clone)]
pub struct DmpRegion {
    pub triangles: Vec<usize>,
    pub sign: SourceSign,
    /// Nodes of the region.
    pub nodes: Vec<usize>,
    /// Nodes on the topological boundary of the region.
    pub boundary_nodes: Vec<usize>,
}

/// Builds a region and verifies the claimed sign of g by sampling at the
/// quadrature points of every region triangle.
pub fn dmp_region(
    mesh: &Mesh,
    data: &ProblemData,
    triangles: Vec<usize>,
    sign: SourceSign,
) -> Result<DmpRegion, AnalysisError> {
    if triangles.is_empty() {
        return Err(AnalysisError::BadRegion("empty triangle set".into()));
    }
    let rule = degree4();
    for &t in &triangles {
        let pts = mesh.triangles[t].map(|v| mesh.point(v));
        for q in &rule {
            let xy = bary_to_xy(q.bary, pts[0], pts[1], pts[2]);
            let g = (data.source)(xy[0], xy[1]);
            let ok = match sign {
                SourceSign::Nonpositive => g <= 1e-14,
                SourceSign::Nonnegative => g >= -1e-14,
            };
            if !ok {
                return Err(AnalysisError::BadRegion(format!(
                    "g({}, {}) = {g} contradicts the claimed sign",
                    xy[0], xy[1]
                )));
            }
        }
    }
    // region edges on exactly one region triangle form the region boundary
    let mut edge_count = std::collections::HashMap::new();
    let mut nodes = Vec::new();
    for &t in &triangles {
        let tri = mesh.triangles[t];
        nodes.extend_from_slice(&tri);
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            *edge_count.entry((a.min(b), a.max(b))).or_insert(0usize) += 1;
        }
    }
    nodes.sort_unstable();
    nodes.dedup();
    let mut boundary_nodes: Vec<usize> = edge_count
        .iter()
        .filter(|(_, &c)| c == 1)
        .flat_map(|(&(a, b), _)| [a, b])
        .collect();
    boundary_nodes.sort_unstable();
    boundary_nodes.dedup();
    Ok(DmpRegion {
        triangles,
        sign,
        nodes,
        boundary_nodes,
    })
}

/// Nodes at which the local discrete maximum principle fails, with the
/// offending excess.
#[derive(Debug, Clone)]
pub struct DmpVerdict {
    pub pass: bool,
    pub violations: Vec<(usize, f64)>,
}

const DMP_SLACK: f64 = 1e-12;

/// Local DMP on a region: for g <= 0 the maximum over the region is
/// attained at its boundary (against the positive part of u there); for
/// g >= 0 the min/negative-part mirror. With `reaction_zero` the cutoffs
/// are dropped and equality of the extrema is asserted.
pub fn check_dmp(mesh: &Mesh, u: &[f64], region: &DmpRegion, reaction_zero: bool) -> DmpVerdict {
    let _ = mesh;
    let mut violations = Vec::new();
    match region.sign {
        SourceSign::Nonpositive => {
            let bound_plus = region
                .boundary_nodes
                .iter()
                .map(|&i| u[i].max(0.0))
                .fold(f64::NEG_INFINITY, f64::max);
            let bound = if reaction_zero {
                region
                    .boundary_nodes
                    .iter()
                    .map(|&i| u[i])
                    .fold(f64::NEG_INFINITY, f64::max)
            } else {
                bound_plus
            };
            for &i in &region.nodes {
                if u[i] > bound + DMP_SLACK {
                    violations.push((i, u[i] - bound));
                }
            }
        }
        SourceSign::Nonnegative => {
            let bound_minus = region
                .boundary_nodes
                .iter()
                .map(|&i| u[i].min(0.0))
                .fold(f64::INFINITY, f64::min);
            let bound = if reaction_zero {
                region
                    .boundary_nodes
                    .iter()
                    .map(|&i| u[i])
                    .fold(f64::INFINITY, f64::min)
            } else {
                bound_minus
            };
            for &i in &region.nodes {
                if u[i] < bound - DMP_SLACK {
                    violations.push((i, bound - u[i]));
                }
            }
        }
    }
    DmpVerdict {
        pass: violations.is_empty(),
        violations,
    }
}

/// Outcome of the planted-extremum test for the monotonicity assumption.
#[derive(Debug, Clone)]
pub enum A2Outcome {
    Pass,
    /// The Kuzmin limiter's sign condition min{a_ij, a_ji} <= 0 fails, so
    /// the DMP claim does not apply.
    NotApplicable,
    Violations(Vec<(usize, usize, f64)>),
}

/// Checks min{a_ij, a_ji} <= 0 for all interior i and j in S_i.
pub fn sign_condition_holds(a: &SparseMatrix, n_interior: usize) -> bool {
    for i in 0..n_interior {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if j != i && v.min(a.get(j, i)) > 0.0 {
                return false;
            }
        }
    }
    true
}

/// Random vectors with a strict local extremum planted at a random interior
/// node must yield a_ij + b_ij(U) <= 0 on the extremal row.
pub fn check_a2(
    mesh: &Mesh,
    adj: &Adjacency,
    a: &SparseMatrix,
    kind: StabilizerKind,
    trials: usize,
    seed: u64,
) -> Result<A2Outcome, StabilizerError> {
    if matches!(kind, StabilizerKind::Kuzmin { .. }) && !sign_condition_holds(a, mesh.n_interior) {
        return Ok(A2Outcome::NotApplicable);
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for trial in 0..trials {
        let i = rng.gen_range(0..mesh.n_interior);
        let mut u: Vec<f64> = (0..mesh.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let maximum = trial % 2 == 0;
        let mut bound = if maximum { f64::NEG_INFINITY } else { f64::INFINITY };
        for &j in adj.s(i) {
            bound = if maximum { bound.max(u[j]) } else { bound.min(u[j]) };
        }
        u[i] = if maximum { bound + 0.3 } else { bound - 0.3 };
        let b = build_stabilization(kind, mesh, adj, a, &u)?.b;
        for &j in adj.s(i) {
            let v = a.get(i, j) + b.get(i, j);
            if v > 1e-12 {
                violations.push((i, j, v));
            }
        }
    }
    Ok(if violations.is_empty() {
        A2Outcome::Pass
    } else {
        A2Outcome::Violations(violations)
    })
}

/// The piecewise-linear oscillation patterns used by the zero-stabilization
/// fixtures, defined on Grid 4 through the parity of the horizontal grid
/// line indices.
#[derive(Debug, Clone, Copy)]
pub enum OscPattern {
    /// u = x + alpha on odd lines, u = x - beta on even lines.
    TwoLevel { alpha: f64, beta: f64 },
    /// Three-parameter pattern with period 3h along each line; requires
    /// alpha = 2 beta + gamma.
    ThreeLevel { alpha: f64, beta: f64, gamma: f64 },
}

impl OscPattern {
    pub fn three_level(beta: f64, gamma: f64) -> Self {
        OscPattern::ThreeLevel {
            alpha: 2.0 * beta + gamma,
            beta,
            gamma,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OscillatoryField {
    pub pattern: OscPattern,
    pub ne: usize,
}

/// Nodal values of the oscillatory field on a Grid-4 mesh of matching ne.
pub fn build_oscillatory_field(mesh: &Mesh, field: &OscillatoryField) -> Result<Vec<f64>, AnalysisError> {
    let ne = field.ne;
    let h = 1.0 / ne as f64;
    if mesh.n_nodes() != (ne + 1) * (ne + 1) {
        return Err(AnalysisError::BadField(format!(
            "mesh has {} nodes, expected ne = {ne}",
            mesh.n_nodes()
        )));
    }
    match field.pattern {
        OscPattern::TwoLevel { alpha, beta } => {
            if alpha < 0.0 || beta < 0.0 || alpha + beta > h {
                return Err(AnalysisError::BadField(format!(
                    "two-level parameters out of range: alpha = {alpha}, beta = {beta}"
                )));
            }
        }
        OscPattern::ThreeLevel { alpha, beta, gamma } => {
            if (alpha - (2.0 * beta + gamma)).abs() > 1e-12 * h {
                return Err(AnalysisError::BadField(
                    "three-level pattern requires alpha = 2 beta + gamma".into(),
                ));
            }
            if beta < 0.0 || gamma < 0.0 || beta + gamma > h / 4.0 {
                return Err(AnalysisError::BadField(format!(
                    "three-level parameters out of range: beta = {beta}, gamma = {gamma}"
                )));
            }
        }
    }
    let mut u = Vec::with_capacity(mesh.n_nodes());
    for p in &mesh.coords {
        let ix = (p[0] / h).round() as i64;
        let iy = (p[1] / h).round() as i64;
        if (p[0] - ix as f64 * h).abs() > 1e-9 || (p[1] - iy as f64 * h).abs() > 1e-9 {
            return Err(AnalysisError::BadField(
                "mesh nodes are not on the Grid-4 lattice".into(),
            ));
        }
        let x = p[0];
        let v = match field.pattern {
            OscPattern::TwoLevel { alpha, beta } => {
                if iy % 2 != 0 {
                    x + alpha
                } else {
                    x - beta
                }
            }
            OscPattern::ThreeLevel { alpha, beta, gamma } => {
                if iy % 2 != 0 {
                    // odd lines: x + alpha on the (3k-1)h verticals
                    if ix.rem_euclid(3) == 2 {
                        x + alpha
                    } else {
                        x + beta
                    }
                } else if ix.rem_euclid(3) == 1 {
                    x + beta
                } else {
                    x - gamma
                }
            }
        };
        u.push(v);
    }
    Ok(u)
}

/// Weighted local average over the neighbors of node i:
/// sum_j |w_ij| u_j / sum_j |w_ij|.
pub fn local_average(
    weights: &SparseMatrix,
    u: &[f64],
    i: usize,
) -> Result<f64, AnalysisError> {
    let (cols, vals) = weights.row(i);
    let mut num = 0.0;
    let mut den = 0.0;
    for (&j, &w) in cols.iter().zip(vals) {
        if j != i {
            num += w.abs() * u[j];
            den += w.abs();
        }
    }
    if den == 0.0 {
        return Err(AnalysisError::ZeroWeights(i));
    }
    Ok(num / den)
}

/// Interior nodes whose graph distance from the boundary is at least 2.
pub fn deep_interior_nodes(mesh: &Mesh, adj: &Adjacency) -> Vec<usize> {
    (0..mesh.n_interior)
        .filter(|&i| adj.s(i).iter().all(|&j| mesh.is_interior(j)))
        .collect()
}

/// Summary of the framework contract on one stabilization matrix: exact
/// symmetry and sign of the off-diagonal entries, row sums relative to the
/// largest entry and the smallest sampled quadratic form x^T B x / |x|^2.
#[derive(Debug, Clone, Copy)]
pub struct ContractReport {
    pub max_asymmetry: f64,
    pub max_positive_offdiag: f64,
    pub max_row_sum: f64,
    pub min_rayleigh: f64,
}

pub fn contract_report(b: &SparseMatrix, samples: &[Vec<f64>]) -> ContractReport {
    let mut max_asymmetry = 0.0f64;
    let mut max_positive_offdiag = 0.0f64;
    let mut max_row_sum = 0.0f64;
    b.for_each(|i, j, v| {
        if i != j {
            max_asymmetry = max_asymmetry.max((v - b.get(j, i)).abs());
            max_positive_offdiag = max_positive_offdiag.max(v);
        }
    });
    for i in 0..b.order() {
        max_row_sum = max_row_sum.max(b.row_sum(i).abs());
    }
    let mut min_rayleigh = f64::INFINITY;
    for x in samples {
        let norm_sq: f64 = x.iter().map(|v| v * v).sum();
        if norm_sq > 0.0 {
            min_rayleigh = min_rayleigh.min(b.quadratic_form(x) / norm_sq);
        }
    }
    ContractReport {
        max_asymmetry,
        max_positive_offdiag,
        max_row_sum,
        min_rayleigh,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, interpolate};
    use crate::mesh::{adjacency, build_grid, GridSpec};
    use crate::problems::catalog;

    #[test]
    fn interpolant_of_linear_solution_has_zero_errors() {
        let mesh = build_grid(&GridSpec::grid4(8).unwrap()).unwrap();
        let adj = adjacency(&mesh);
        let data = catalog(2, 1e-8).unwrap();
        let sys = assemble(&mesh, &adj, &data).unwrap();
        let u = interpolate(&mesh, |x, _| x);
        let b = sys.a.same_pattern_zeroed();
        let rep = error_norms(&mesh, &u, &data, &b).unwrap();
        assert!(rep.l2 <= 1e-12);
        assert!(rep.h1semi <= 1e-12);
        assert!(rep.norm_h <= 1e-12);
    }

    #[test]
    fn error_norms_match_hand_quadrature_on_coarse_mesh() {
        // u = x^2 against u_h = 0 on the unit square: |u|_0^2 = 1/5,
        // |u|_1^2 = 4/3
        let mesh = build_grid(&GridSpec::grid1(4).unwrap()).unwrap();
        let adj = adjacency(&mesh);
        let mut data = catalog(2, 1e-8).unwrap();
        data.exact = Some(crate::problems::ExactSolution {
            u: std::sync::Arc::new(|x, _| x * x),
            grad: std::sync::Arc::new(|x, _| [2.0 * x, 0.0]),
        });
        data.sigma0 = 0.0;
        let sys = assemble(&mesh, &adj, &data).unwrap();
        let u = vec![0.0; mesh.n_nodes()];
        let b = sys.a.same_pattern_zeroed();
        let rep = error_norms(&mesh, &u, &data, &b).unwrap();
        assert!((rep.l2 - (1.0f64 / 5.0).sqrt()).abs() < 1e-14);
        assert!((rep.h1semi - (4.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn order_recovery_is_exact_on_synthetic_data() {
        let p = 1.7345;
        let c = 0.82;
        let reports: Vec<(usize, ErrorReport)> = (0..5)
            .map(|k| {
                let e = c * (2.0f64).powf(-p * k as f64);
                (
                    16 << k,
                    ErrorReport {
                        l2: e,
                        h1semi: e,
                        norm_h: e,
                        b_form: 0.0,
                    },
                )
            })
            .collect();
        let table = convergence_table(&reports, None).unwrap();
        for row in &table.rows[1..] {
            let v = row.l2_order.value().unwrap();
            assert!((v - p).abs() < 1e-12);
        }
        assert_eq!(table.rows[0].l2_order, OrderCell::Blank);
    }

    #[test]
    fn order_simple_example_and_csv_layout() {
        let rows = vec![
            (
                8,
                ErrorReport { l2: 1e-2, h1semi: 1e-1, norm_h: 1e-2, b_form: 0.0 },
            ),
            (
                16,
                ErrorReport { l2: 2.5e-3, h1semi: 5e-2, norm_h: 2.5e-3, b_form: 0.0 },
            ),
        ];
        let table = convergence_table(&rows, None).unwrap();
        assert!((table.rows[1].l2_order.value().unwrap() - 2.0).abs() < 1e-14);
        let csv = table.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "ne,l2,l2_order,h1,h1_order,normh,normh_order"
        );
        assert!(lines.next().unwrap().starts_with("8,0.0100000,,"));
        assert!(convergence_table(&rows[..1], None).is_err());
        let bad = vec![rows[0].clone(), (48, rows[1].1)];
        assert!(convergence_table(&bad, None).is_err());
    }

    #[test]
    fn dmp_checker_constant_and_spike() {
        let mesh = build_grid(&GridSpec::grid1(4).unwrap()).unwrap();
        let adj = adjacency(&mesh);
        let mut data = catalog(2, 1e-8).unwrap();
        data.source = std::sync::Arc::new(|_, _| -1.0);
        let all: Vec<usize> = (0..mesh.n_triangles()).collect();
        let region = dmp_region(&mesh, &data, all, SourceSign::Nonpositive).unwrap();
        // constant field passes
        let u = vec![2.5; mesh.n_nodes()];
        assert!(check_dmp(&mesh, &u, &region, false).pass);
        // planted interior spike above all boundary values fails and is listed
        let mut u = vec![0.0; mesh.n_nodes()];
        u[0] = 1.0;
        let verdict = check_dmp(&mesh, &u, &region, true);
        assert!(!verdict.pass);
        assert_eq!(verdict.violations[0].0, 0);
        let _ = adj;
    }

    #[test]
    fn dmp_checker_matches_brute_force_on_random_fields() {
        let mesh = build_grid(&GridSpec::grid4(6).unwrap()).unwrap();
        let mut data = catalog(2, 1e-8).unwrap();
        data.source = std::sync::Arc::new(|_, _| 0.0);
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..50 {
            let ntri = mesh.n_triangles();
            let start = rng.gen_range(0..ntri);
            let len = rng.gen_range(1..=ntri - start);
            let tris: Vec<usize> = (start..start + len).collect();
            let region = dmp_region(&mesh, &data, tris, SourceSign::Nonpositive).unwrap();
            let u: Vec<f64> = (0..mesh.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let brute_max = region.nodes.iter().map(|&i| u[i]).fold(f64::NEG_INFINITY, f64::max);
            let brute_bound = region
                .boundary_nodes
                .iter()
                .map(|&i| u[i].max(0.0))
                .fold(f64::NEG_INFINITY, f64::max);
            let verdict = check_dmp(&mesh, &u, &region, false);
            assert_eq!(verdict.pass, brute_max <= brute_bound + 1e-12);
        }
    }

    #[test]
    fn region_sign_claim_is_verified() {
        let mesh = build_grid(&GridSpec::grid1(4).unwrap()).unwrap();
        let data = catalog(2, 1e-8).unwrap(); // g = 1
        let all: Vec<usize> = (0..mesh.n_triangles()).collect();
        assert!(dmp_region(&mesh, &data, all.clone(), SourceSign::Nonpositive).is_err());
        assert!(dmp_region(&mesh, &data, all, SourceSign::Nonnegative).is_ok());
    }

    #[test]
    fn oscillatory_field_zero_amplitudes_is_interpolant() {
        let ne = 8;
        let mesh = build_grid(&GridSpec::grid4(ne).unwrap()).unwrap();
        let f = OscillatoryField {
            pattern: OscPattern::TwoLevel { alpha: 0.0, beta: 0.0 },
            ne,
        };
        let u = build_oscillatory_field(&mesh, &f).unwrap();
        let x = interpolate(&mesh, |x, _| x);
        assert_eq!(u, x);
        // rejects a mismatched mesh
        let other = build_grid(&GridSpec::grid4(4).unwrap()).unwrap();
        assert!(build_oscillatory_field(&other, &f).is_err());
    }

    #[test]
    fn local_average_basics() {
        let mesh = build_grid(&GridSpec::grid1(2).unwrap()).unwrap();
        let adj = adjacency(&mesh);
        let mut w = SparseMatrix::from_adjacency(&adj);
        let center = 0; // single interior node
        let nbrs: Vec<usize> = adj.s(center).to_vec();
        for &j in &nbrs {
            w.set(center, j, -1.0);
        }
        let mut u = vec![0.0; mesh.n_nodes()];
        for (k, &j) in nbrs.iter().enumerate() {
            u[j] = k as f64; // 0,1,2,3,4,5
        }
        let avg = local_average(&w, &u, center).unwrap();
        assert!((avg - 2.5).abs() < 1e-15);
        let u_const = vec![7.0; mesh.n_nodes()];
        assert!((local_average(&w, &u_const, center).unwrap() - 7.0).abs() < 1e-15);
        let zero = SparseMatrix::from_adjacency(&adj);
        assert!(local_average(&zero, &u, center).is_err());
    }

    #[test]
    fn local_average_against_brute_force_weights() {
        // weights from the artificial diffusion of the Grid-4 stencil
        let mesh = build_grid(&GridSpec::grid4(8).unwrap()).unwrap();
        let adj = adjacency(&mesh);
        let data = catalog(2, 1e-3).unwrap();
        let sys = assemble(&mesh, &adj, &data).unwrap();
        let d = crate::stabilizers::artificial_diffusion(&sys.a);
        let mut rng = StdRng::seed_from_u64(19);
        let u: Vec<f64> = (0..mesh.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let i = crate::mesh::node_at(&mesh, 0.5, 0.5);
        let mut num = 0.0;
        let mut den = 0.0;
        for &j in adj.s(i) {
            num += d.get(i, j).abs() * u[j];
            den += d.get(i, j).abs();
        }
        let avg = local_average(&d, &u, i).unwrap();
        assert!((avg - num / den).abs() < 1e-15);
    }

    #[test]
    fn deep_interior_excludes_boundary_adjacent_nodes() {
        let mesh = build_grid(&GridSpec::grid4(6).unwrap()).unwrap();
        let adj = adjacency(&mesh);
        let deep = deep_interior_nodes(&mesh, &adj);
        for &i in &deep {
            assert!(adj.s(i).iter().all(|&j| mesh.is_interior(j)));
        }
        // on a 6x6 grid the deep interior is the 3x3 core
        assert_eq!(deep.len(), 9);
    }
}
