//! Structured triangulations of the unit square and the combinatorial /
//! geometric queries the limiters need.
//!
//! Three grid families are supported:
//! - Grid 1: ne x ne squares, each split by the diagonal running from the
//!   top-left to the bottom-right corner of the square (same in every row),
//! - Grid 4: as Grid 1, but with the diagonal direction flipped in even rows
//!   of squares counted from below,
//! - Grid 5: as Grid 4, with every interior node lying on an even horizontal
//!   grid line translated to the right by a fraction of the mesh width.
//!
//! Nodes are ordered interior-first: indices `0..M` are interior, `M..N` lie
//! on the boundary. Within each class the ordering is lexicographic by
//! (y, x) before any Grid-5 shift is applied.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("ne must be at least 2, got {0}")]
    InvalidNe(usize),
    #[error("ne must be even for {0:?}, got {1}")]
    OddNe(GridKind, usize),
    #[error("shift must lie in (0,1), got {0}")]
    InvalidShift(f64),
    #[error("internal geometry error: {0}")]
    Geometry(String),
    #[error("invalid mesh: {0}")]
    Invalid(String),
    #[error("mesh file parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Grid1,
    Grid4,
    Grid5,
}

/// Specification of one of the structured grid families.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub kind: GridKind,
    /// Number of edges along one horizontal mesh line.
    pub ne: usize,
    /// Fraction of h applied to interior nodes on even horizontal lines
    /// (Grid 5 only).
    pub shift: f64,
}

impl GridSpec {
    pub fn grid1(ne: usize) -> Result<Self, MeshError> {
        Self::new(GridKind::Grid1, ne, 0.0)
    }

    pub fn grid4(ne: usize) -> Result<Self, MeshError> {
        Self::new(GridKind::Grid4, ne, 0.0)
    }

    pub fn grid5(ne: usize, shift: f64) -> Result<Self, MeshError> {
        Self::new(GridKind::Grid5, ne, shift)
    }

    pub fn new(kind: GridKind, ne: usize, shift: f64) -> Result<Self, MeshError> {
        if ne < 2 {
            return Err(MeshError::InvalidNe(ne));
        }
        if matches!(kind, GridKind::Grid4 | GridKind::Grid5) && ne % 2 != 0 {
            return Err(MeshError::OddNe(kind, ne));
        }
        if kind == GridKind::Grid5 && !(shift > 0.0 && shift < 1.0) {
            return Err(MeshError::InvalidShift(shift));
        }
        Ok(Self { kind, ne, shift })
    }

    pub fn h(&self) -> f64 {
        1.0 / self.ne as f64
    }
}

/// Conforming P1 triangulation of the unit square, nodes ordered
/// interior-first.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    /// Node coordinates, interior nodes first.
    pub coords: Vec<[f64; 2]>,
    /// Triangles as vertex index triples, counterclockwise.
    pub triangles: Vec<[usize; 3]>,
    /// Number of interior nodes M.
    pub n_interior: usize,
    /// Boundary flag per node; `true` exactly for indices >= M.
    pub boundary: Vec<bool>,
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_interior(&self, node: usize) -> bool {
        node < self.n_interior
    }

    pub fn point(&self, node: usize) -> [f64; 2] {
        self.coords[node]
    }

    /// Twice the signed area of a triangle (positive for ccw orientation).
    pub fn double_area(&self, tri: usize) -> f64 {
        let [a, b, c] = self.triangles[tri];
        let pa = self.coords[a];
        let pb = self.coords[b];
        let pc = self.coords[c];
        (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0])
    }

    pub fn area(&self, tri: usize) -> f64 {
        0.5 * self.double_area(tri)
    }

    /// Constant gradients of the three P1 basis functions on a triangle,
    /// in the order of the triangle's vertex list.
    pub fn p1_gradients(&self, tri: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[tri];
        let pa = self.coords[a];
        let pb = self.coords[b];
        let pc = self.coords[c];
        let d = self.double_area(tri);
        [
            [(pb[1] - pc[1]) / d, (pc[0] - pb[0]) / d],
            [(pc[1] - pa[1]) / d, (pa[0] - pc[0]) / d],
            [(pa[1] - pb[1]) / d, (pb[0] - pa[0]) / d],
        ]
    }

    /// Gradient of the P1 function with nodal values `u` on a triangle.
    pub fn p1_gradient_on(&self, tri: usize, u: &[f64]) -> [f64; 2] {
        let grads = self.p1_gradients(tri);
        let verts = self.triangles[tri];
        let mut g = [0.0; 2];
        for k in 0..3 {
            g[0] += u[verts[k]] * grads[k][0];
            g[1] += u[verts[k]] * grads[k][1];
        }
        g
    }

    /// Consistency checks: orientation, tiling, edge sharing, node ordering.
    pub fn validate(&self) -> Result<(), MeshError> {
        let n = self.n_nodes();
        for (i, &b) in self.boundary.iter().enumerate() {
            if b != (i >= self.n_interior) {
                return Err(MeshError::Invalid(format!(
                    "node {i}: boundary flag inconsistent with interior-first ordering"
                )));
            }
        }
        let mut total = 0.0;
        for t in 0..self.n_triangles() {
            let [a, b, c] = self.triangles[t];
            if a == b || b == c || a == c || a >= n || b >= n || c >= n {
                return Err(MeshError::Invalid(format!("triangle {t}: bad vertex indices")));
            }
            let da = self.double_area(t);
            if da <= 0.0 {
                return Err(MeshError::Invalid(format!(
                    "triangle {t}: non-positive signed area {da}"
                )));
            }
            total += 0.5 * da;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(MeshError::Invalid(format!(
                "triangle areas sum to {total}, expected 1"
            )));
        }
        // Every edge is shared by exactly two triangles or lies on the boundary.
        let mut edge_count = std::collections::HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                *edge_count.entry(key).or_insert(0usize) += 1;
            }
        }
        for (&(a, b), &cnt) in &edge_count {
            match cnt {
                2 => {}
                1 => {
                    if self.is_interior(a) || self.is_interior(b) {
                        return Err(MeshError::Invalid(format!(
                            "edge ({a},{b}) borders one triangle but is not a boundary edge"
                        )));
                    }
                }
                _ => {
                    return Err(MeshError::Invalid(format!(
                        "edge ({a},{b}) shared by {cnt} triangles"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Writes the line-oriented ASCII mesh format. Coordinates are printed
    /// with 17 significant digits so that read-back is bit-exact.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "mesh {} {} {} {}",
            self.dim,
            self.n_nodes(),
            self.n_interior,
            self.n_triangles()
        );
        for (i, p) in self.coords.iter().enumerate() {
            let _ = writeln!(
                s,
                "{:.16e} {:.16e} {}",
                p[0],
                p[1],
                if self.boundary[i] { 1 } else { 0 }
            );
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        s
    }

    pub fn write_file(&self, path: &Path) -> Result<(), MeshError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, MeshError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| MeshError::Parse("empty file".into()))?;
        let mut it = header.split_whitespace();
        if it.next() != Some("mesh") {
            return Err(MeshError::Parse("missing 'mesh' header".into()));
        }
        let parse_usize = |tok: Option<&str>, what: &str| -> Result<usize, MeshError> {
            tok.ok_or_else(|| MeshError::Parse(format!("missing {what}")))?
                .parse()
                .map_err(|e| MeshError::Parse(format!("bad {what}: {e}")))
        };
        let dim = parse_usize(it.next(), "dim")?;
        if dim != 2 {
            return Err(MeshError::Parse(format!("unsupported dimension {dim}")));
        }
        let n = parse_usize(it.next(), "node count")?;
        let m = parse_usize(it.next(), "interior count")?;
        let ntri = parse_usize(it.next(), "triangle count")?;
        let mut coords = Vec::with_capacity(n);
        let mut boundary = Vec::with_capacity(n);
        for k in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| MeshError::Parse(format!("missing node line {k}")))?;
            let mut it = line.split_whitespace();
            let x: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| MeshError::Parse(format!("bad x on node line {k}")))?;
            let y: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| MeshError::Parse(format!("bad y on node line {k}")))?;
            let flag: u8 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| MeshError::Parse(format!("bad flag on node line {k}")))?;
            coords.push([x, y]);
            boundary.push(flag == 1);
        }
        let mut triangles = Vec::with_capacity(ntri);
        for k in 0..ntri {
            let line = lines
                .next()
                .ok_or_else(|| MeshError::Parse(format!("missing triangle line {k}")))?;
            let mut tri = [0usize; 3];
            let mut it = line.split_whitespace();
            for v in &mut tri {
                let one_based: usize = it
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| MeshError::Parse(format!("bad triangle line {k}")))?;
                if one_based == 0 || one_based > n {
                    return Err(MeshError::Parse(format!(
                        "triangle line {k}: vertex index {one_based} out of range"
                    )));
                }
                *v = one_based - 1;
            }
            triangles.push(tri);
        }
        let mesh = Mesh {
            dim,
            coords,
            triangles,
            n_interior: m,
            boundary,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn read_file(path: &Path) -> Result<Self, MeshError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Edge neighborhoods S_i and vertex patches Delta_i.
#[derive(Debug, Clone)]
pub struct Adjacency {
    /// Sorted neighbor set S_i per node.
    pub neighbors: Vec<Vec<usize>>,
    /// Sorted triangle indices of the patch Delta_i per node.
    pub patches: Vec<Vec<usize>>,
}

impl Adjacency {
    pub fn s(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn patch(&self, node: usize) -> &[usize] {
        &self.patches[node]
    }
}

pub fn adjacency(mesh: &Mesh) -> Adjacency {
    let n = mesh.n_nodes();
    let mut neighbors = vec![Vec::new(); n];
    let mut patches = vec![Vec::new(); n];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let v = tri[k];
            patches[v].push(t);
            neighbors[v].push(tri[(k + 1) % 3]);
            neighbors[v].push(tri[(k + 2) % 3]);
        }
    }
    for v in 0..n {
        neighbors[v].sort_unstable();
        neighbors[v].dedup();
        patches[v].sort_unstable();
    }
    Adjacency { neighbors, patches }
}

/// Builds the requested structured triangulation.
pub fn build_grid(spec: &GridSpec) -> Result<Mesh, MeshError> {
    let ne = spec.ne;
    let h = spec.h();
    let np = ne + 1;

    // Lattice nodes, ordered interior-first and lexicographically by (y, x)
    // within each class. Ordering is fixed before the Grid-5 shift.
    let mut id_of = vec![usize::MAX; np * np];
    let mut coords = Vec::with_capacity(np * np);
    let mut boundary = Vec::with_capacity(np * np);
    let is_bnd = |ix: usize, iy: usize| ix == 0 || ix == ne || iy == 0 || iy == ne;
    let mut next = 0usize;
    for pass in 0..2 {
        for iy in 0..=ne {
            for ix in 0..=ne {
                let bnd = is_bnd(ix, iy);
                if (pass == 0) != !bnd {
                    continue;
                }
                id_of[iy * np + ix] = next;
                next += 1;
                let mut x = ix as f64 * h;
                let y = iy as f64 * h;
                if spec.kind == GridKind::Grid5 && !bnd && iy % 2 == 0 {
                    x += spec.shift * h;
                }
                coords.push([x, y]);
                boundary.push(bnd);
            }
        }
    }
    let n_interior = boundary.iter().filter(|&&b| !b).count();

    // Square rows are 1-indexed from below; row r covers y in [(r-1)h, rh].
    // Odd rows carry the top-left -> bottom-right diagonal, Grid 4/5 flip
    // the even rows to bottom-left -> top-right.
    let mut triangles = Vec::with_capacity(2 * ne * ne);
    for cy in 0..ne {
        let flip = spec.kind != GridKind::Grid1 && cy % 2 == 1;
        for cx in 0..ne {
            let bl = id_of[cy * np + cx];
            let br = id_of[cy * np + cx + 1];
            let tl = id_of[(cy + 1) * np + cx];
            let tr = id_of[(cy + 1) * np + cx + 1];
            if flip {
                // diagonal bl -> tr
                triangles.push([bl, br, tr]);
                triangles.push([bl, tr, tl]);
            } else {
                // diagonal tl -> br
                triangles.push([bl, br, tl]);
                triangles.push([br, tr, tl]);
            }
        }
    }

    let mesh = Mesh {
        dim: 2,
        coords,
        triangles,
        n_interior,
        boundary,
    };
    mesh.validate()?;
    Ok(mesh)
}

/// Angular tolerance for deciding whether a ray lies in the cone of a patch
/// triangle; rays running exactly along shared edges hit two triangles and
/// are resolved towards the smaller triangle index.
const CONE_TOL: f64 = 1e-12;

/// The simplex of the patch Delta_i intersected by the half line
/// { x_i + alpha (x_i - x_j) : alpha > 0 }.
pub fn upwind_simplex(
    mesh: &Mesh,
    adj: &Adjacency,
    i: usize,
    j: usize,
) -> Result<usize, MeshError> {
    debug_assert!(mesh.is_interior(i));
    let xi = mesh.coords[i];
    let xj = mesh.coords[j];
    let dir = [xi[0] - xj[0], xi[1] - xj[1]];
    let dn = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    let dir = [dir[0] / dn, dir[1] / dn];
    for &t in adj.patch(i) {
        let mut others = [[0.0f64; 2]; 2];
        let mut k = 0;
        for &v in &mesh.triangles[t] {
            if v != i {
                others[k] = mesh.coords[v];
                k += 1;
            }
        }
        debug_assert_eq!(k, 2);
        let e = others.map(|p| {
            let v = [p[0] - xi[0], p[1] - xi[1]];
            let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
            [v[0] / n, v[1] / n]
        });
        let det = e[0][0] * e[1][1] - e[0][1] * e[1][0];
        if det.abs() < 1e-300 {
            continue;
        }
        let a = (dir[0] * e[1][1] - dir[1] * e[1][0]) / det;
        let b = (e[0][0] * dir[1] - e[0][1] * dir[0]) / det;
        if a >= -CONE_TOL && b >= -CONE_TOL {
            return Ok(t);
        }
    }
    Err(MeshError::Geometry(format!(
        "no patch triangle of node {i} intersects the half line away from node {j}"
    )))
}

/// Right-hand side of the patch-based lower bound for the BJK constants:
/// max_{x_j in boundary of Delta_i} |x_i - x_j| / dist(x_i, hull boundary).
pub fn patch_mu(mesh: &Mesh, adj: &Adjacency, i: usize) -> f64 {
    debug_assert!(mesh.is_interior(i));
    let xi = mesh.coords[i];
    let mut ring: Vec<usize> = Vec::new();
    for &t in adj.patch(i) {
        for &v in &mesh.triangles[t] {
            if v != i {
                ring.push(v);
            }
        }
    }
    ring.sort_unstable();
    ring.dedup();
    let far = ring
        .iter()
        .map(|&v| dist(xi, mesh.coords[v]))
        .fold(0.0f64, f64::max);
    let mut pts: Vec<[f64; 2]> = ring.iter().map(|&v| mesh.coords[v]).collect();
    pts.push(xi);
    let hull = convex_hull(&mut pts);
    let mut near = f64::INFINITY;
    for k in 0..hull.len() {
        let a = hull[k];
        let b = hull[(k + 1) % hull.len()];
        near = near.min(point_segment_distance(xi, a, b));
    }
    far / near
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Monotone-chain convex hull; fine for the <= ~10 points of a patch.
fn convex_hull(pts: &mut Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let n = pts.len();
    if n < 3 {
        return pts.clone();
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * n);
    for &p in pts.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

/// Index of the node closest to (x, y); panics if farther than 1e-9.
/// Intended for tests and fixtures on structured grids.
pub fn node_at(mesh: &Mesh, x: f64, y: f64) -> usize {
    let mut best = (f64::INFINITY, usize::MAX);
    for (k, p) in mesh.coords.iter().enumerate() {
        let d = dist(*p, [x, y]);
        if d < best.0 {
            best = (d, k);
        }
    }
    assert!(best.0 < 1e-9, "no node at ({x}, {y})");
    best.1
}
