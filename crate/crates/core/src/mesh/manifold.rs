//! Embedded-manifold certification: combinatorial checks on edges and vertex
//! links plus a geometric check that distinct triangles meet only in their
//! shared vertex or edge.

use std::collections::HashMap;

use rayon::prelude::*;

use super::{IndexedMesh, Point3, Triangle};

/// Relative tolerance (times mesh size) for geometric intersection tests.
pub const INTERSECTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ManifoldViolation {
    DegenerateTriangle { triangle: usize },
    NonManifoldEdge { edge: [usize; 2], count: usize },
    InconsistentOrientation { edge: [usize; 2] },
    VertexLink { vertex: usize },
    SelfIntersection { k: usize, l: usize },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ManifoldReport {
    pub violations: Vec<ManifoldViolation>,
    pub pairs_tested: usize,
    pub boundary_edges: usize,
}

impl ManifoldReport {
    pub fn is_manifold(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Runs all checks and collects every violation found (sorted).
pub fn check_manifold(mesh: &IndexedMesh) -> ManifoldReport {
    let mut report = ManifoldReport::default();
    for (t, tri) in mesh.triangles_iter().enumerate() {
        let idx = mesh.triangles[t];
        if !tri.is_regular() || idx[0] == idx[1] || idx[1] == idx[2] || idx[0] == idx[2] {
            report
                .violations
                .push(ManifoldViolation::DegenerateTriangle { triangle: t });
        }
    }
    combinatorial(mesh, &mut report);
    if report.violations.is_empty() {
        geometric(mesh, &mut report);
    }
    report
}

fn combinatorial(mesh: &IndexedMesh, report: &mut ManifoldReport) {
    let mut edges: HashMap<[usize; 2], (usize, i32)> = HashMap::new();
    for tri in &mesh.triangles {
        for i in 0..3 {
            let (a, b) = (tri[i], tri[(i + 1) % 3]);
            let e = edges.entry([a.min(b), a.max(b)]).or_default();
            e.0 += 1;
            e.1 += if a < b { 1 } else { -1 };
        }
    }
    let mut sorted: Vec<_> = edges.into_iter().collect();
    sorted.sort_unstable_by_key(|(e, _)| *e);
    for (edge, (count, dir)) in sorted {
        match count {
            1 => report.boundary_edges += 1,
            2 if dir != 0 => report
                .violations
                .push(ManifoldViolation::InconsistentOrientation { edge }),
            2 => {}
            _ => report
                .violations
                .push(ManifoldViolation::NonManifoldEdge { edge, count }),
        }
    }

    // link of each vertex must be a single path or a single cycle
    let mut links: Vec<Vec<[usize; 2]>> = vec![Vec::new(); mesh.vertices.len()];
    for tri in &mesh.triangles {
        for i in 0..3 {
            links[tri[i]].push([tri[(i + 1) % 3], tri[(i + 2) % 3]]);
        }
    }
    for (v, link) in links.iter().enumerate() {
        if !link.is_empty() && !is_path_or_cycle(link) {
            report.violations.push(ManifoldViolation::VertexLink { vertex: v });
        }
    }
}

fn is_path_or_cycle(link: &[[usize; 2]]) -> bool {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &[a, b] in link {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    if adj.values().any(|n| n.len() > 2) {
        return false;
    }
    // connectivity
    let start = *adj.keys().min().unwrap();
    let mut seen = vec![start];
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for &y in &adj[&x] {
            if !seen.contains(&y) {
                seen.push(y);
                stack.push(y);
            }
        }
    }
    seen.len() == adj.len()
}

fn geometric(mesh: &IndexedMesh, report: &mut ManifoldReport) {
    let n = mesh.triangles.len();
    if n < 2 {
        return;
    }
    let size = mesh.size();
    let tol = INTERSECTION_TOL * size;
    let cell = size.max(f64::MIN_POSITIVE);
    let boxes: Vec<(Point3, Point3)> = mesh
        .triangles_iter()
        .map(|t| {
            let lo = t.a.inf(&t.b).inf(&t.c) - Point3::repeat(tol);
            let hi = t.a.sup(&t.b).sup(&t.c) + Point3::repeat(tol);
            (lo, hi)
        })
        .collect();
    let key = |p: &Point3| {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (t, (lo, hi)) in boxes.iter().enumerate() {
        let (a, b) = (key(lo), key(hi));
        for x in a.0..=b.0 {
            for y in a.1..=b.1 {
                for z in a.2..=b.2 {
                    grid.entry((x, y, z)).or_default().push(t);
                }
            }
        }
    }

    let results: Vec<(usize, Vec<usize>)> = (0..n)
        .into_par_iter()
        .map(|t| {
            let (lo, hi) = boxes[t];
            let (a, b) = (key(&lo), key(&hi));
            let mut cands = Vec::new();
            for x in a.0..=b.0 {
                for y in a.1..=b.1 {
                    for z in a.2..=b.2 {
                        if let Some(bucket) = grid.get(&(x, y, z)) {
                            cands.extend(bucket.iter().copied().filter(|&o| o > t));
                        }
                    }
                }
            }
            cands.sort_unstable();
            cands.dedup();
            let mut tested = 0;
            let mut bad = Vec::new();
            for o in cands {
                let (olo, ohi) = boxes[o];
                if (0..3).any(|i| olo[i] > hi[i] || lo[i] > ohi[i]) {
                    continue;
                }
                tested += 1;
                if pair_intersects_improperly(mesh, t, o, tol) {
                    bad.push(o);
                }
            }
            (tested, bad)
        })
        .collect();
    for (t, (tested, bad)) in results.into_iter().enumerate() {
        report.pairs_tested += tested;
        for l in bad {
            report
                .violations
                .push(ManifoldViolation::SelfIntersection { k: t, l });
        }
    }
}

/// True when triangles `k` and `l` share more than their common vertices.
pub(crate) fn pair_intersects_improperly(mesh: &IndexedMesh, k: usize, l: usize, tol: f64) -> bool {
    let ik = mesh.triangles[k];
    let il = mesh.triangles[l];
    let shared: Vec<Point3> = ik
        .iter()
        .filter(|v| il.contains(v))
        .map(|&v| mesh.vertices[v])
        .collect();
    let tk = mesh.triangle(k);
    let tl = mesh.triangle(l);
    let allowed = |x: &Point3| match shared.as_slice() {
        [] => false,
        [p] => (x - p).norm() <= tol,
        [p, q] => dist_to_segment(x, p, q) <= tol,
        _ => false,
    };

    let nk = tk.area_vector().normalize();
    let nl = tl.area_vector().normalize();
    let coplanar = tl.vertices().iter().all(|p| nk.dot(&(p - tk.a)).abs() <= tol)
        && tk.vertices().iter().all(|p| nl.dot(&(p - tl.a)).abs() <= tol);
    if coplanar {
        let poly = clip_coplanar(&tk, &tl, &nk);
        return poly.iter().any(|x| !allowed(x));
    }
    let mut points = Vec::new();
    for (src, dst, n) in [(&tk, &tl, &nl), (&tl, &tk, &nk)] {
        let v = src.vertices();
        for i in 0..3 {
            if let Some(x) = segment_triangle(&v[i], &v[(i + 1) % 3], dst, n, tol) {
                points.push(x);
            }
        }
    }
    points.iter().any(|x| !allowed(x))
}

fn dist_to_segment(x: &Point3, p: &Point3, q: &Point3) -> f64 {
    let d = q - p;
    let t = ((x - p).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
    (x - (p + t * d)).norm()
}

/// Intersection of a segment with a triangle (unit normal `n`) when the
/// segment is not contained in the plane.
fn segment_triangle(p0: &Point3, p1: &Point3, tri: &Triangle, n: &Point3, tol: f64) -> Option<Point3> {
    let d0 = n.dot(&(p0 - tri.a));
    let d1 = n.dot(&(p1 - tri.a));
    if d0.abs() <= tol && d1.abs() <= tol {
        return None;
    }
    if (d0 > tol && d1 > tol) || (d0 < -tol && d1 < -tol) {
        return None;
    }
    let x = if d0.abs() <= tol {
        *p0
    } else if d1.abs() <= tol {
        *p1
    } else {
        p0 + (d0 / (d0 - d1)) * (p1 - p0)
    };
    inside_triangle(&x, tri, n, tol).then_some(x)
}

fn inside_triangle(x: &Point3, tri: &Triangle, n: &Point3, tol: f64) -> bool {
    let v = tri.vertices();
    (0..3).all(|i| {
        let a = v[i];
        let b = v[(i + 1) % 3];
        let e = b - a;
        let inward = n.cross(&e);
        inward.dot(&(x - a)) >= -tol * e.norm()
    })
}

/// Polygon `K ∩ L` of two coplanar triangles (Sutherland–Hodgman in the
/// common plane). Triangles sharing an edge clip down to that edge.
fn clip_coplanar(k: &Triangle, l: &Triangle, n: &Point3) -> Vec<Point3> {
    let mut poly: Vec<Point3> = k.vertices().to_vec();
    // orient L counterclockwise w.r.t. n
    let mut lv = l.vertices();
    if l.area_vector().dot(n) < 0.0 {
        lv.swap(1, 2);
    }
    for i in 0..3 {
        let a = lv[i];
        let e = lv[(i + 1) % 3] - a;
        let inward = n.cross(&e).normalize();
        let side = |p: &Point3| inward.dot(&(p - a));
        let mut out = Vec::new();
        for j in 0..poly.len() {
            let p = poly[j];
            let q = poly[(j + 1) % poly.len()];
            let (sp, sq) = (side(&p), side(&q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                out.push(p + (sp / (sp - sq)) * (q - p));
            }
        }
        poly = out;
        if poly.is_empty() {
            break;
        }
    }
    poly
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(fold_z: f64) -> IndexedMesh {
        IndexedMesh::new(
            vec![
                Point3::new(0., 0., 0.),
                Point3::new(1., 0., 0.),
                Point3::new(1., 1., 0.),
                Point3::new(0., 1., fold_z),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn tetrahedron_is_manifold() {
        let r = check_manifold(&super::super::tests::tetrahedron());
        assert!(r.is_manifold(), "{:?}", r.violations);
        assert_eq!(r.boundary_edges, 0);
        assert_eq!(r.pairs_tested, 6);
    }

    #[test]
    fn flat_and_folded_squares_are_manifold() {
        assert!(check_manifold(&square(0.0)).is_manifold());
        assert!(check_manifold(&square(0.5)).is_manifold());
    }

    #[test]
    fn folded_onto_itself_overlaps() {
        // second triangle reflected onto the first across the diagonal
        let m = IndexedMesh::new(
            vec![
                Point3::new(0., 0., 0.),
                Point3::new(1., 0., 0.),
                Point3::new(1., 1., 0.),
                Point3::new(0.9, 0.2, 0.),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let r = check_manifold(&m);
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, ManifoldViolation::InconsistentOrientation { .. })
                || matches!(v, ManifoldViolation::SelfIntersection { .. })));
    }

    #[test]
    fn piercing_triangles_detected() {
        let m = IndexedMesh::new(
            vec![
                Point3::new(0., 0., 0.),
                Point3::new(1., 0., 0.),
                Point3::new(0., 1., 0.),
                Point3::new(0.2, 0.2, -1.),
                Point3::new(0.3, 0.2, 1.),
                Point3::new(0.2, 0.3, 1.),
            ],
            vec![[0, 1, 2], [3, 4, 5]],
        )
        .unwrap();
        let r = check_manifold(&m);
        assert_eq!(
            r.violations,
            vec![ManifoldViolation::SelfIntersection { k: 0, l: 1 }]
        );
    }

    #[test]
    fn bowtie_vertex_link_detected() {
        // two triangles sharing only a vertex: link is two disjoint edges
        let m = IndexedMesh::new(
            vec![
                Point3::new(0., 0., 0.),
                Point3::new(1., 0., 0.),
                Point3::new(1., 1., 0.),
                Point3::new(-1., 0., 0.),
                Point3::new(-1., -1., 0.),
            ],
            vec![[0, 1, 2], [0, 3, 4]],
        )
        .unwrap();
        let r = check_manifold(&m);
        assert!(r
            .violations
            .contains(&ManifoldViolation::VertexLink { vertex: 0 }));
    }

    #[test]
    fn shared_vertex_crossing_detected() {
        // share vertex 0, but triangle 1 passes through the interior of 0
        let m = IndexedMesh::new(
            vec![
                Point3::new(0., 0., 0.),
                Point3::new(2., 0., 0.),
                Point3::new(0., 2., 0.),
                Point3::new(1., 0.5, -1.),
                Point3::new(1., 0.5, 1.),
            ],
            vec![[0, 1, 2], [0, 3, 4]],
        )
        .unwrap();
        assert!(pair_intersects_improperly(&m, 0, 1, 1e-9));
    }
}
