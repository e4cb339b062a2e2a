//! Incremental 3D convex hull with a conflict graph and exact orientation
//! tests, plus the sphere and paraboloid-lift constructions built on it.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robust::{orient2d, orient3d, Coord, Coord3D};

use super::GeneratorError;
use crate::mesh::spatial::PointGrid;
use crate::mesh::{IndexedMesh, Point3};

/// Relative tolerance for "on the unit sphere" and for coplanar quadruples.
const SPHERE_TOL: f64 = 1e-9;

fn c3(p: &Point3) -> Coord3D<f64> {
    Coord3D { x: p.x, y: p.y, z: p.z }
}

/// Positive when `p` is strictly outside the outward face `[a, b, c]`.
fn sees(pts: &[Point3], f: [usize; 3], p: usize) -> bool {
    orient3d(c3(&pts[f[0]]), c3(&pts[f[1]]), c3(&pts[f[2]]), c3(&pts[p])) < 0.0
}

struct Face {
    v: [usize; 3],
    alive: bool,
    conflicts: Vec<usize>,
}

/// Outward-oriented boundary triangles of the convex hull of `points`.
///
/// The returned mesh keeps all input vertices in order; points strictly
/// inside the hull or on a hull facet without being a corner of it stay
/// unreferenced. Fails for fewer than four affinely independent points.
pub fn convex_hull(points: &[Point3]) -> Result<IndexedMesh, GeneratorError> {
    let n = points.len();
    if let Some(i) = points.iter().position(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite())) {
        return Err(GeneratorError::DegenerateInput(format!("non-finite point {i}")));
    }
    let simplex = initial_simplex(points)?;
    let [a, b, c, d] = simplex;
    let (b, c) = if orient3d(c3(&points[a]), c3(&points[b]), c3(&points[c]), c3(&points[d])) > 0.0 {
        (b, c)
    } else {
        (c, b)
    };

    let mut faces: Vec<Face> = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let mut point_faces: Vec<Vec<usize>> = vec![Vec::new(); n];

    let mut order: Vec<usize> = (0..n).filter(|i| !simplex.contains(i)).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));

    let add_face = |faces: &mut Vec<Face>,
                    edges: &mut HashMap<(usize, usize), usize>,
                    point_faces: &mut Vec<Vec<usize>>,
                    v: [usize; 3],
                    candidates: &mut dyn Iterator<Item = usize>| {
        let id = faces.len();
        let conflicts: Vec<usize> = candidates.filter(|&p| sees(points, v, p)).collect();
        for &p in &conflicts {
            point_faces[p].push(id);
        }
        for k in 0..3 {
            edges.insert((v[k], v[(k + 1) % 3]), id);
        }
        faces.push(Face {
            v,
            alive: true,
            conflicts,
        });
    };
    for v in [[a, b, c], [a, d, b], [b, d, c], [c, d, a]] {
        add_face(&mut faces, &mut edges, &mut point_faces, v, &mut order.iter().copied());
    }

    // per-point stamp for de-duplicating merged conflict lists
    let mut stamp = vec![usize::MAX; n];
    for &p in &order {
        let visible: Vec<usize> = point_faces[p].iter().copied().filter(|&f| faces[f].alive).collect();
        if visible.is_empty() {
            continue;
        }
        for &f in &visible {
            faces[f].alive = false;
        }
        let mut horizon = Vec::new();
        for &f in &visible {
            let v = faces[f].v;
            for k in 0..3 {
                let (u, w) = (v[k], v[(k + 1) % 3]);
                let g = edges[&(w, u)];
                if faces[g].alive {
                    horizon.push((u, w, f, g));
                }
            }
        }
        for &f in &visible {
            let v = faces[f].v;
            for k in 0..3 {
                let e = (v[k], v[(k + 1) % 3]);
                if edges.get(&e) == Some(&f) {
                    edges.remove(&e);
                }
            }
        }
        for (u, w, f, g) in horizon {
            let id = faces.len();
            let mut merged: Vec<usize> = Vec::new();
            for &q in faces[f].conflicts.iter().chain(&faces[g].conflicts) {
                if q != p && stamp[q] != id {
                    stamp[q] = id;
                    merged.push(q);
                }
            }
            add_face(&mut faces, &mut edges, &mut point_faces, [u, w, p], &mut merged.into_iter());
        }
        for &f in &visible {
            faces[f].conflicts = Vec::new();
        }
        point_faces[p] = Vec::new();
    }

    let triangles = faces.iter().filter(|f| f.alive).map(|f| f.v).collect();
    Ok(IndexedMesh::new(points.to_vec(), triangles)?)
}

/// Four affinely independent input indices, chosen by extremal distances.
fn initial_simplex(points: &[Point3]) -> Result<[usize; 4], GeneratorError> {
    let degenerate = || GeneratorError::DegenerateInput("points do not span three dimensions".into());
    if points.len() < 4 {
        return Err(degenerate());
    }
    let a = 0;
    let b = (0..points.len())
        .max_by(|&i, &j| (points[i] - points[a]).norm().total_cmp(&(points[j] - points[a]).norm()))
        .ok_or_else(degenerate)?;
    let ab = points[b] - points[a];
    let c = (0..points.len())
        .max_by(|&i, &j| {
            ab.cross(&(points[i] - points[a]))
                .norm()
                .total_cmp(&ab.cross(&(points[j] - points[a])).norm())
        })
        .ok_or_else(degenerate)?;
    let d = (0..points.len())
        .max_by(|&i, &j| {
            let oi = orient3d(c3(&points[a]), c3(&points[b]), c3(&points[c]), c3(&points[i])).abs();
            let oj = orient3d(c3(&points[a]), c3(&points[b]), c3(&points[c]), c3(&points[j])).abs();
            oi.total_cmp(&oj)
        })
        .ok_or_else(degenerate)?;
    if orient3d(c3(&points[a]), c3(&points[b]), c3(&points[c]), c3(&points[d])) == 0.0 {
        return Err(degenerate());
    }
    Ok([a, b, c, d])
}

/// Hull triangulation of points on the unit sphere.
///
/// Rejects points off the sphere, duplicates, hull faces with a fourth point
/// on their plane (within tolerance), and sets contained in a closed
/// hemisphere (origin not strictly inside every face).
pub fn sphere_hull(points: &[Point3]) -> Result<IndexedMesh, GeneratorError> {
    if let Some(i) = points.iter().position(|p| !((p.norm() - 1.0).abs() <= SPHERE_TOL)) {
        return Err(GeneratorError::NotOnSphere(i));
    }
    let mut sorted: Vec<usize> = (0..points.len()).collect();
    sorted.sort_by(|&i, &j| {
        let (p, q) = (points[i], points[j]);
        p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)).then(p.z.total_cmp(&q.z))
    });
    if let Some(w) = sorted.windows(2).find(|w| points[w[0]] == points[w[1]]) {
        return Err(GeneratorError::DegenerateInput(format!("duplicate points {} and {}", w[0], w[1])));
    }
    let mesh = match convex_hull(points) {
        Ok(m) => m,
        Err(GeneratorError::DegenerateInput(_)) if points.len() >= 3 => {
            return Err(GeneratorError::HemisphereEmpty)
        }
        Err(e) => return Err(e),
    };
    let origin = Coord3D { x: 0.0, y: 0.0, z: 0.0 };
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| c3(&points[i]));
        if orient3d(a, b, c, origin) <= 0.0 {
            return Err(GeneratorError::HemisphereEmpty);
        }
    }
    // points on a hull face's plane make the Delaunay triangulation ambiguous
    let grid = PointGrid::for_spacing(points, mesh.size().max(f64::MIN_POSITIVE));
    for (f, t) in mesh.triangles.iter().enumerate() {
        let tri = mesh.triangle(f);
        let cd = tri.circumcenter()?;
        let normal = tri.normal()?;
        let mut hit = None;
        grid.for_each_within(&cd.q, cd.r * (1.0 + 1e-6) + SPHERE_TOL, |i, _| {
            if hit.is_none() && !t.contains(&i) && normal.dot(&(points[i] - points[t[0]])).abs() <= SPHERE_TOL {
                hit = Some(i);
            }
        });
        if let Some(i) = hit {
            return Err(GeneratorError::CoplanarQuadruple([t[0], t[1], t[2], i]));
        }
    }
    Ok(mesh)
}

/// The twelve unit-sphere vertices of the regular icosahedron and its 20
/// outward faces.
pub fn icosahedron() -> IndexedMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v = Vec::with_capacity(12);
    for (s1, s2) in [(-1.0, 1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
        v.push(Point3::new(s1, s2 * phi, 0.0));
    }
    for (s1, s2) in [(-1.0, 1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
        v.push(Point3::new(0.0, s1, s2 * phi));
    }
    for (s1, s2) in [(-1.0, 1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
        v.push(Point3::new(s2 * phi, 0.0, s1));
    }
    let v: Vec<Point3> = v.into_iter().map(|p| p.normalize()).collect();
    sphere_hull(&v).expect("icosahedron vertices are in convex general position")
}

/// Icosahedron refined `level` times by midpoint subdivision, projected to the
/// unit sphere and re-triangulated as the hull of its vertices.
pub fn icosphere(level: u32) -> IndexedMesh {
    let mut mesh = icosahedron();
    for _ in 0..level {
        let mut verts = mesh.vertices.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Point3>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut tris = Vec::with_capacity(4 * mesh.triangles.len());
        for &[a, b, c] in &mesh.triangles {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            tris.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        mesh = IndexedMesh {
            vertices: verts,
            triangles: tris,
        };
    }
    if level == 0 {
        return mesh;
    }
    sphere_hull(&mesh.vertices).expect("icosphere vertices are in convex general position")
}

/// Delaunay triangulation of planar points through the lower hull of their
/// lift to the paraboloid `z = x² + y²`. Returned as a flat ccw mesh.
pub fn lifted_delaunay(points: &[[f64; 2]]) -> Result<IndexedMesh, GeneratorError> {
    let lifted: Vec<Point3> = points
        .iter()
        .map(|p| Point3::new(p[0], p[1], p[0] * p[0] + p[1] * p[1]))
        .collect();
    let hull = convex_hull(&lifted)?;
    let c2 = |i: usize| Coord {
        x: points[i][0],
        y: points[i][1],
    };
    let triangles = hull
        .triangles
        .iter()
        .filter(|t| orient2d(c2(t[0]), c2(t[1]), c2(t[2])) < 0.0)
        .map(|&[a, b, c]| [a, c, b])
        .collect();
    let vertices = points.iter().map(|p| Point3::new(p[0], p[1], 0.0)).collect();
    Ok(IndexedMesh::new(vertices, triangles)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_adjacency, check_manifold};
    use crate::quality::{delaunay_violations_brute, quality_report};
    use rand::Rng;

    fn random_sphere(n: usize, seed: u64) -> Vec<Point3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| loop {
                let p = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if p.norm() > 0.1 && p.norm() <= 1.0 {
                    break p.normalize();
                }
            })
            .collect()
    }

    #[test]
    fn cube_hull_with_interior_points() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(Point3::new((i & 1) as f64, ((i >> 1) & 1) as f64 + 0.1 * (i & 1) as f64, ((i >> 2) & 1) as f64));
        }
        pts.push(Point3::new(0.5, 0.5, 0.5));
        pts.push(Point3::new(0.3, 0.6, 0.2));
        let m = convex_hull(&pts).unwrap();
        assert_eq!(m.num_triangles(), 12);
        assert_eq!(m.used_vertices(), (0..8).collect::<Vec<_>>());
        assert!(build_adjacency(&m).unwrap().is_closed());
        let centroid = Point3::new(0.5, 0.55, 0.5);
        for t in m.triangles_iter() {
            assert!(t.normal().unwrap().dot(&(t.centroid() - centroid)) > 0.0);
        }
    }

    #[test]
    fn tetrahedron_and_icosahedron() {
        let s = 1.0 / 3f64.sqrt();
        let tet = [
            Point3::new(s, s, s),
            Point3::new(s, -s, -s),
            Point3::new(-s, s, -s),
            Point3::new(-s, -s, s),
        ];
        let m = sphere_hull(&tet).unwrap();
        assert_eq!(m.num_triangles(), 4);
        let ico = icosahedron();
        assert_eq!(ico.num_triangles(), 20);
        assert!(check_manifold(&ico).is_manifold());
        let lens: Vec<f64> = ico.triangles_iter().flat_map(|t| t.edge_lengths()).collect();
        assert!(lens.iter().all(|l| (l - lens[0]).abs() < 1e-12));
    }

    #[test]
    fn icosphere_counts_and_certificates() {
        for level in 0..=3 {
            let m = icosphere(level);
            assert_eq!(m.num_triangles(), 20 * 4usize.pow(level));
            assert_eq!(m.num_vertices(), 10 * 4usize.pow(level) + 2);
            assert!(check_manifold(&m).is_manifold());
            assert!(quality_report(&m).unwrap().is_delaunay());
        }
    }

    #[test]
    fn random_sphere_hull_is_delaunay() {
        let pts = random_sphere(500, 1);
        let m = sphere_hull(&pts).unwrap();
        assert_eq!(m.num_triangles(), 2 * 500 - 4);
        assert!(delaunay_violations_brute(&m).unwrap().is_empty());
        assert!(check_manifold(&m).is_manifold());
    }

    #[test]
    fn sphere_hull_errors() {
        let pts = random_sphere(30, 2);
        let mut off = pts.clone();
        off[3] *= 1.01;
        assert_eq!(sphere_hull(&off), Err(GeneratorError::NotOnSphere(3)));
        let upper: Vec<Point3> = pts.iter().map(|p| Point3::new(p.x, p.y, p.z.abs().max(0.05)).normalize()).collect();
        assert_eq!(sphere_hull(&upper), Err(GeneratorError::HemisphereEmpty));
        // the octahedron has four cocircular points on every great circle
        let octa = [
            Point3::x(),
            -Point3::x(),
            Point3::y(),
            -Point3::y(),
            Point3::z(),
            -Point3::z(),
        ];
        assert!(sphere_hull(&octa).is_ok());
        let cube: Vec<Point3> = (0..8)
            .map(|i| Point3::new(((i & 1) * 2) as f64 - 1.0, (((i >> 1) & 1) * 2) as f64 - 1.0, (((i >> 2) & 1) * 2) as f64 - 1.0).normalize())
            .collect();
        assert!(matches!(sphere_hull(&cube), Err(GeneratorError::CoplanarQuadruple(_))));
    }

    #[test]
    fn lift_matches_planar_delaunay() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let pts: Vec<[f64; 2]> = (0..60).map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
            let lift = lifted_delaunay(&pts).unwrap();
            assert!(delaunay_violations_brute(&lift).unwrap().is_empty());
            let bw = super::super::planar_delaunay(&pts).unwrap().mesh;
            let canon = |m: &IndexedMesh| {
                let mut t: Vec<[usize; 3]> = m
                    .triangles
                    .iter()
                    .map(|t| {
                        let mut s = *t;
                        s.sort();
                        s
                    })
                    .collect();
                t.sort();
                t
            };
            assert_eq!(canon(&lift), canon(&bw));
        }
    }
}
