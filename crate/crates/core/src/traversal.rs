//! Segment traversal of flat meshes: crossing sequences, edge indicator
//! integrals, the circumcenter telescoping sum and the Cauchy–Schwarz
//! difference-quotient bound.

use std::collections::HashMap;

use robust::{orient2d, Coord};
use serde::Serialize;
use thiserror::Error;

use crate::energy::tol_cospherical;
use crate::mesh::{build_adjacency, EdgeAdjacency, EdgeFaces, IndexedMesh, MeshError, Point3};
use crate::surfaces::Rect;

/// Perturbation of a vertex-hitting segment, relative to `size(T)`.
pub const PERTURBATION: f64 = 1e-12;
const MAX_PERTURBATIONS: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraversalError {
    #[error("point ({0}, {1}) is not inside the mesh")]
    PointOutsideMesh(f64, f64),
    #[error("segment leaves the mesh through boundary edge {0}")]
    SegmentExitsMesh(usize),
    #[error("segment keeps hitting vertices after perturbation")]
    Degenerate,
    #[error("dual edge length of edge {0} vanishes")]
    ZeroDual(usize),
    #[error("triangle {0} is degenerate in the plane")]
    FlatDegenerate(usize),
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// One crossed interior edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    /// Index into the canonical edge order.
    pub edge: usize,
    pub from: usize,
    pub to: usize,
    /// Unit in-plane edge normal pointing from `from` into `to`.
    pub nu: [f64; 2],
    /// `|ν · v| / |v|`.
    pub theta: f64,
    pub length: f64,
    /// Segment parameter of the crossing in `(0, 1)`.
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingSequence {
    /// Base point actually used (after any perturbation).
    pub x: [f64; 2],
    pub v: [f64; 2],
    pub triangles: Vec<usize>,
    pub crossings: Vec<Crossing>,
    pub perturbed: bool,
}

fn c2(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

fn xy(p: &Point3) -> [f64; 2] {
    [p.x, p.y]
}

/// Point location and walking structure for a flat mesh (`z` ignored).
pub struct FlatMesh<'a> {
    mesh: &'a IndexedMesh,
    adjacency: EdgeAdjacency,
    neighbors: Vec<[Option<usize>; 3]>,
    /// Vertex order of each triangle, counterclockwise in the plane.
    ccw: Vec<[usize; 3]>,
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    size: f64,
}

impl<'a> FlatMesh<'a> {
    pub fn new(mesh: &'a IndexedMesh) -> Result<Self, TraversalError> {
        let adjacency = build_adjacency(mesh)?;
        let neighbors = adjacency.triangle_neighbors(mesh);
        let mut ccw = Vec::with_capacity(mesh.triangles.len());
        for (t, &[a, b, c]) in mesh.triangles.iter().enumerate() {
            let o = orient2d(c2(xy(&mesh.vertices[a])), c2(xy(&mesh.vertices[b])), c2(xy(&mesh.vertices[c])));
            if o == 0.0 {
                return Err(TraversalError::FlatDegenerate(t));
            }
            ccw.push(if o > 0.0 { [a, b, c] } else { [a, c, b] });
        }
        let size = mesh.size();
        let cell = size.max(f64::MIN_POSITIVE);
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for t in 0..mesh.triangles.len() {
            let (lo, hi) = bbox(mesh, t);
            for i in key(lo[0], cell)..=key(hi[0], cell) {
                for j in key(lo[1], cell)..=key(hi[1], cell) {
                    buckets.entry((i, j)).or_default().push(t);
                }
            }
        }
        Ok(Self {
            mesh,
            adjacency,
            neighbors,
            ccw,
            cell,
            buckets,
            size,
        })
    }

    pub fn mesh(&self) -> &IndexedMesh {
        self.mesh
    }

    pub fn adjacency(&self) -> &EdgeAdjacency {
        &self.adjacency
    }

    fn p(&self, v: usize) -> [f64; 2] {
        xy(&self.mesh.vertices[v])
    }

    /// Orientation signs of `x` against the three ccw edges of `t`.
    fn signs(&self, t: usize, x: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = self.ccw[t];
        let (pa, pb, pc) = (self.p(a), self.p(b), self.p(c));
        [
            orient2d(c2(pa), c2(pb), c2(x)),
            orient2d(c2(pb), c2(pc), c2(x)),
            orient2d(c2(pc), c2(pa), c2(x)),
        ]
    }

    /// Triangle containing `x` in its closure, preferring strict interiors.
    pub fn locate(&self, x: [f64; 2]) -> Option<usize> {
        let bucket = self.buckets.get(&(key(x[0], self.cell), key(x[1], self.cell)))?;
        let mut closed = None;
        for &t in bucket {
            let s = self.signs(t, x);
            if s.iter().all(|&o| o > 0.0) {
                return Some(t);
            }
            if closed.is_none() && s.iter().all(|&o| o >= 0.0) {
                closed = Some(t);
            }
        }
        closed
    }

    fn strictly_inside(&self, t: usize, x: [f64; 2]) -> bool {
        self.signs(t, x).iter().all(|&o| o > 0.0)
    }

    /// Neighbor of `t` across the edge `{u, w}`.
    fn neighbor(&self, t: usize, u: usize, w: usize) -> Option<usize> {
        let tri = self.mesh.triangles[t];
        (0..3)
            .find(|&i| {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                (a == u && b == w) || (a == w && b == u)
            })
            .and_then(|i| self.neighbors[t][i])
    }

    /// Walk without perturbation; `None` on a degenerate configuration.
    fn walk(&self, x: [f64; 2], v: [f64; 2]) -> Result<Option<(Vec<usize>, Vec<Crossing>)>, TraversalError> {
        let y = [x[0] + v[0], x[1] + v[1]];
        let Some(start) = self.locate(x) else {
            return Err(TraversalError::PointOutsideMesh(x[0], x[1]));
        };
        if !self.strictly_inside(start, x) {
            return Ok(None);
        }
        let vn = v[0].hypot(v[1]);
        let mut tris = vec![start];
        let mut crossings = Vec::new();
        let mut cur = start;
        let mut entry: Option<(usize, usize)> = None;
        loop {
            let s = self.signs(cur, y);
            if s.iter().all(|&o| o > 0.0) {
                return Ok(Some((tris, crossings)));
            }
            if s.iter().all(|&o| o >= 0.0) {
                return Ok(None); // endpoint on an edge or vertex
            }
            let [a, b, c] = self.ccw[cur];
            let mut exit = None;
            for (u, w) in [(a, b), (b, c), (c, a)] {
                if entry.is_some_and(|(p, q)| (p == w && q == u) || (p == u && q == w)) {
                    continue;
                }
                if orient2d(c2(self.p(u)), c2(self.p(w)), c2(y)) >= 0.0 {
                    continue;
                }
                let ou = orient2d(c2(x), c2(y), c2(self.p(u)));
                let ow = orient2d(c2(x), c2(y), c2(self.p(w)));
                if ou == 0.0 || ow == 0.0 {
                    return Ok(None); // passes through a vertex
                }
                if (ou > 0.0) != (ow > 0.0) {
                    exit = Some((u, w));
                    break;
                }
            }
            let Some((u, w)) = exit else { return Ok(None) };
            let edge = self
                .adjacency
                .position(u, w)
                .expect("triangle edges are in the adjacency");
            let Some(next) = self.neighbor(cur, u, w) else {
                return Err(TraversalError::SegmentExitsMesh(edge));
            };
            let (pu, pw) = (self.p(u), self.p(w));
            let e = [pw[0] - pu[0], pw[1] - pu[1]];
            let len = e[0].hypot(e[1]);
            // outward normal of the ccw edge u -> w
            let nu = [e[1] / len, -e[0] / len];
            let denom = v[0] * e[1] - v[1] * e[0];
            let t = ((pu[0] - x[0]) * e[1] - (pu[1] - x[1]) * e[0]) / denom;
            crossings.push(Crossing {
                edge,
                from: cur,
                to: next,
                nu,
                theta: (nu[0] * v[0] + nu[1] * v[1]).abs() / vn,
                length: len,
                t,
            });
            tris.push(next);
            entry = Some((u, w));
            cur = next;
            if tris.len() > 4 * self.mesh.triangles.len() + 4 {
                return Ok(None);
            }
        }
    }
}

fn key(c: f64, cell: f64) -> i64 {
    (c / cell).floor() as i64
}

fn bbox(mesh: &IndexedMesh, t: usize) -> ([f64; 2], [f64; 2]) {
    let tri = mesh.triangle(t);
    let lo = tri.a.inf(&tri.b).inf(&tri.c);
    let hi = tri.a.sup(&tri.b).sup(&tri.c);
    ([lo.x, lo.y], [hi.x, hi.y])
}

/// Ordered triangles and interior edges met by the segment `[x, x + v]`.
///
/// If the segment touches a vertex, or an endpoint lies on an edge, `x` is
/// shifted orthogonally to `v` by multiples of `1e-12 size(T)`.
pub fn cross(flat: &FlatMesh<'_>, x: [f64; 2], v: [f64; 2]) -> Result<CrossingSequence, TraversalError> {
    let vn = v[0].hypot(v[1]);
    let perp = if vn > 0.0 { [-v[1] / vn, v[0] / vn] } else { [1.0, 0.0] };
    for k in 0..MAX_PERTURBATIONS {
        // alternate sides with growing amplitude: 0, +1, -1, +2, -2, ...
        let m = k.div_ceil(2) as f64 * if k % 2 == 1 { 1.0 } else { -1.0 };
        let shift = m * PERTURBATION * flat.size;
        let xs = [x[0] + shift * perp[0], x[1] + shift * perp[1]];
        if let Some((triangles, crossings)) = flat.walk(xs, v)? {
            return Ok(CrossingSequence {
                x: xs,
                v,
                triangles,
                crossings,
                perturbed: k > 0,
            });
        }
    }
    Err(TraversalError::Degenerate)
}

/// Area of `{x : [x, x + v] meets the edge}`: `|v| l θ`.
pub fn indicator_area(edge: ([f64; 2], [f64; 2]), v: [f64; 2]) -> f64 {
    let e = [edge.1[0] - edge.0[0], edge.1[1] - edge.0[1]];
    (e[0] * v[1] - e[1] * v[0]).abs()
}

/// Right-hand side of the lifted indicator identity for the affine lift
/// `x -> (x, x · w)`: `|v̄| / sqrt(1 + |w|²) · θ̄ l̄`.
pub fn lifted_indicator_area(edge: ([f64; 2], [f64; 2]), v: [f64; 2], w: [f64; 2]) -> f64 {
    let lift = |p: [f64; 2]| Point3::new(p[0], p[1], p[0] * w[0] + p[1] * w[1]);
    let (a, b) = (lift(edge.0), lift(edge.1));
    let vbar = Point3::new(v[0], v[1], v[0] * w[0] + v[1] * w[1]);
    let ebar = b - a;
    let plane_normal = Point3::new(-w[0], -w[1], 1.0).normalize();
    // unit normal of the edge inside the lifted plane
    let nu = plane_normal.cross(&ebar).normalize();
    let theta = nu.dot(&vbar).abs() / vbar.norm();
    vbar.norm() / (1.0 + w[0] * w[0] + w[1] * w[1]).sqrt() * theta * ebar.norm()
}

/// `(Σ_i (q(K_{i+1}) - q(K_i)) · v/|v|, (q(K_N) - q(K_0)) · v/|v|, residual)`
/// over the crossing sequence, with planar circumcenters.
pub fn telescoping_check(flat: &FlatMesh<'_>, seq: &CrossingSequence) -> Result<(f64, f64, f64), TraversalError> {
    let vn = seq.v[0].hypot(seq.v[1]);
    let dir = [seq.v[0] / vn, seq.v[1] / vn];
    let q = |t: usize| -> Result<[f64; 2], TraversalError> {
        let tri = flat.mesh.triangle(t);
        let flat_tri = crate::mesh::Triangle::new(
            Point3::new(tri.a.x, tri.a.y, 0.0),
            Point3::new(tri.b.x, tri.b.y, 0.0),
            Point3::new(tri.c.x, tri.c.y, 0.0),
        );
        let c = flat_tri.circumcenter()?;
        Ok([c.q.x, c.q.y])
    };
    let qs: Vec<[f64; 2]> = seq.triangles.iter().map(|&t| q(t)).collect::<Result<_, _>>()?;
    let sum: f64 = qs
        .windows(2)
        .map(|w| (w[1][0] - w[0][0]) * dir[0] + (w[1][1] - w[0][1]) * dir[1])
        .sum();
    let (first, last) = (qs[0], qs[qs.len() - 1]);
    let direct = (last[0] - first[0]) * dir[0] + (last[1] - first[1]) * dir[1];
    Ok((sum, direct, (sum - direct).abs()))
}

/// Both sides of the difference-quotient bound for a per-triangle function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CsBound {
    /// `∫_W |g(x+v) - g(x)|² dx`, integrated exactly.
    pub lhs: f64,
    pub rhs: f64,
    /// `Σ (l*/d*) |g(K) - g(L)|²` over interior edges of the lifted mesh.
    pub dual_sum: f64,
    /// Sampled `max_x Σ 1(x) θ l d*/l*`.
    pub sampled_max: f64,
    pub samples: usize,
}

/// Evaluates the Cauchy–Schwarz bound on window `w` for translation `v`.
///
/// `heights` lifts the flat mesh per vertex; `g` is constant per triangle.
/// The maximum over the window is taken over a `grid x grid` sample of cell
/// centers, so the reported right-hand side can only be too small.
pub fn cs_bound_check(
    flat_mesh: &IndexedMesh,
    heights: &[f64],
    g: &[f64],
    v: [f64; 2],
    w: &Rect,
    grid: usize,
) -> Result<CsBound, TraversalError> {
    if heights.len() != flat_mesh.num_vertices() {
        return Err(TraversalError::Length {
            expected: flat_mesh.num_vertices(),
            got: heights.len(),
        });
    }
    if g.len() != flat_mesh.num_triangles() {
        return Err(TraversalError::Length {
            expected: flat_mesh.num_triangles(),
            got: g.len(),
        });
    }
    let flat = FlatMesh::new(flat_mesh)?;
    let lifted = IndexedMesh {
        vertices: flat_mesh
            .vertices
            .iter()
            .zip(heights)
            .map(|(p, &z)| Point3::new(p.x, p.y, z))
            .collect(),
        triangles: flat_mesh.triangles.clone(),
    };
    let circum = lifted.circumdata()?;
    let tol = tol_cospherical(&lifted);

    // per-edge weight d*/l* and the dual sum
    let edges = flat.adjacency.edges();
    let mut ratio = vec![0.0; edges.len()];
    let mut dual_sum = 0.0;
    for (i, e) in edges.iter().enumerate() {
        let EdgeFaces::Interior { k, l, .. } = e.faces else { continue };
        let d = (circum[k].q - circum[l].q).norm();
        if d < tol {
            return Err(TraversalError::ZeroDual(i));
        }
        let l_star = (lifted.vertices[e.v[0]] - lifted.vertices[e.v[1]]).norm();
        ratio[i] = d / l_star;
        dual_sum += l_star / d * (g[k] - g[l]).powi(2);
    }

    // sampled maximum of Σ 1(x) θ l d*/l*
    let mut sampled_max: f64 = 0.0;
    for i in 0..grid {
        for j in 0..grid {
            let x = [
                w.x0 + (i as f64 + 0.5) / grid as f64 * w.width(),
                w.y0 + (j as f64 + 0.5) / grid as f64 * w.height(),
            ];
            let seq = cross(&flat, x, v)?;
            let s: f64 = seq.crossings.iter().map(|c| c.theta * c.length * ratio[c.edge]).sum();
            sampled_max = sampled_max.max(s);
        }
    }
    let lhs = exact_difference_integral(&flat, g, v, w)?;
    let vn = v[0].hypot(v[1]);
    Ok(CsBound {
        lhs,
        rhs: vn * dual_sum * sampled_max,
        dual_sum,
        sampled_max,
        samples: grid * grid,
    })
}

/// `∫_W |g(x+v) - g(x)|²` as a sum over pairs `(L, K)` of the areas of
/// `W ∩ L ∩ (K - v)`. Fails if `W` or `W + v` is not covered by the mesh.
fn exact_difference_integral(flat: &FlatMesh<'_>, g: &[f64], v: [f64; 2], w: &Rect) -> Result<f64, TraversalError> {
    let mesh = flat.mesh;
    let window = vec![[w.x0, w.y0], [w.x1, w.y0], [w.x1, w.y1], [w.x0, w.y1]];
    let tri_poly = |t: usize, shift: [f64; 2]| -> Vec<[f64; 2]> {
        flat.ccw[t]
            .iter()
            .map(|&i| {
                let p = flat.p(i);
                [p[0] - shift[0], p[1] - shift[1]]
            })
            .collect()
    };
    let mut total = 0.0;
    let mut covered = 0.0;
    for l in 0..mesh.triangles.len() {
        let (lo, hi) = bbox(mesh, l);
        if hi[0] < w.x0 || lo[0] > w.x1 || hi[1] < w.y0 || lo[1] > w.y1 {
            continue;
        }
        let part = clip(&window, &tri_poly(l, [0.0, 0.0]));
        if polygon_area(&part) == 0.0 {
            continue;
        }
        let (plo, phi) = poly_bbox(&part);
        // triangles K whose translate K - v meets the part
        let mut cands = Vec::new();
        for i in key(plo[0] + v[0], flat.cell)..=key(phi[0] + v[0], flat.cell) {
            for j in key(plo[1] + v[1], flat.cell)..=key(phi[1] + v[1], flat.cell) {
                if let Some(b) = flat.buckets.get(&(i, j)) {
                    cands.extend_from_slice(b);
                }
            }
        }
        cands.sort_unstable();
        cands.dedup();
        for k in cands {
            let a = polygon_area(&clip(&part, &tri_poly(k, v)));
            covered += a;
            total += a * (g[k] - g[l]).powi(2);
        }
    }
    let area = w.area();
    if (covered - area).abs() > 1e-9 * area {
        return Err(TraversalError::SegmentExitsMesh(usize::MAX));
    }
    Ok(total)
}

/// Convex polygon `subject ∩ clipper` (clipper counterclockwise).
fn clip(subject: &[[f64; 2]], clipper: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut poly = subject.to_vec();
    for i in 0..clipper.len() {
        if poly.is_empty() {
            break;
        }
        let a = clipper[i];
        let b = clipper[(i + 1) % clipper.len()];
        let side = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let mut out = Vec::with_capacity(poly.len() + 1);
        for j in 0..poly.len() {
            let p = poly[j];
            let q = poly[(j + 1) % poly.len()];
            let (sp, sq) = (side(p), side(q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        poly = out;
    }
    poly
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut a = 0.0;
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        a += p[0] * q[1] - p[1] * q[0];
    }
    (a / 2.0).max(0.0)
}

fn poly_bbox(poly: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    poly.iter().fold(
        ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
        |(lo, hi), p| ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])]),
    )
}
