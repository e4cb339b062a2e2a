//! Incremental Bowyer–Watson triangulation with ghost triangles and exact
//! orientation and incircle predicates.

use std::collections::HashMap;

use robust::{incircle, orient2d, Coord};

use super::GeneratorError;
use crate::mesh::{build_adjacency, EdgeFaces, IndexedMesh, Point3, Triangle};

/// Relative band in which a neighbour vertex counts as cocircular.
const COCIRCULAR_BAND: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarDelaunay {
    /// Flat mesh in the plane `z = 0`, vertices in input order.
    pub mesh: IndexedMesh,
    /// Interior edges whose two opposite vertices are cocircular within the
    /// band, i.e. where the triangulation is not unique.
    pub ambiguous_edges: usize,
}

impl PlanarDelaunay {
    /// Fails if the triangulation is not unique.
    pub fn into_strict(self) -> Result<IndexedMesh, GeneratorError> {
        if self.ambiguous_edges > 0 {
            return Err(GeneratorError::AmbiguousCocircular(self.ambiguous_edges));
        }
        Ok(self.mesh)
    }
}

fn coord(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

struct Triangulation<'a> {
    pts: &'a [[f64; 2]],
    ghost: usize,
    tris: Vec<[usize; 3]>,
    alive: Vec<bool>,
    /// Directed edge `(u, v)` to the live triangle containing it.
    edges: HashMap<(usize, usize), usize>,
}

impl<'a> Triangulation<'a> {
    fn add(&mut self, t: [usize; 3]) -> usize {
        let id = self.tris.len();
        self.tris.push(t);
        self.alive.push(true);
        for k in 0..3 {
            self.edges.insert((t[k], t[(k + 1) % 3]), id);
        }
        id
    }

    fn remove(&mut self, id: usize) {
        self.alive[id] = false;
        let t = self.tris[id];
        for k in 0..3 {
            let e = (t[k], t[(k + 1) % 3]);
            if self.edges.get(&e) == Some(&id) {
                self.edges.remove(&e);
            }
        }
    }

    fn in_conflict(&self, id: usize, p: usize) -> bool {
        let [a, b, c] = self.tris[id];
        let pp = coord(self.pts[p]);
        if c == self.ghost {
            let (pa, pb) = (self.pts[a], self.pts[b]);
            let o = orient2d(coord(pa), coord(pb), pp);
            if o > 0.0 {
                return true;
            }
            // on the hull edge line: conflict only strictly inside the segment
            o == 0.0 && {
                let along = (pp.x - pa[0]) * (pb[0] - pa[0]) + (pp.y - pa[1]) * (pb[1] - pa[1]);
                let len2 = (pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2);
                along > 0.0 && along < len2
            }
        } else {
            incircle(coord(self.pts[a]), coord(self.pts[b]), coord(self.pts[c]), pp) > 0.0
        }
    }

    fn insert(&mut self, p: usize, start: usize) {
        let mut cavity = vec![start];
        let mut stack = vec![start];
        self.alive[start] = false;
        while let Some(t) = stack.pop() {
            let tri = self.tris[t];
            for k in 0..3 {
                let (u, v) = (tri[k], tri[(k + 1) % 3]);
                if let Some(&n) = self.edges.get(&(v, u)) {
                    if self.alive[n] && self.in_conflict(n, p) {
                        self.alive[n] = false;
                        cavity.push(n);
                        stack.push(n);
                    }
                }
            }
        }
        let mut boundary = Vec::new();
        for &t in &cavity {
            let tri = self.tris[t];
            for k in 0..3 {
                let (u, v) = (tri[k], tri[(k + 1) % 3]);
                let outside = self.edges.get(&(v, u)).is_some_and(|&n| self.alive[n]);
                if outside {
                    boundary.push((u, v));
                }
            }
        }
        for &t in &cavity {
            self.alive[t] = true;
            self.remove(t);
        }
        for (u, v) in boundary {
            let t = if u == self.ghost {
                [v, p, u]
            } else if v == self.ghost {
                [p, u, v]
            } else {
                [u, v, p]
            };
            self.add(t);
        }
    }
}

/// Delaunay triangulation of the convex hull of `points`.
///
/// Points are inserted in lexicographic order; the output is ccw-oriented
/// with normal `+z`.
pub fn planar_delaunay(points: &[[f64; 2]]) -> Result<PlanarDelaunay, GeneratorError> {
    let n = points.len();
    if let Some(i) = points.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(GeneratorError::DegenerateInput(format!("non-finite point {i}")));
    }
    if n < 3 {
        return Err(GeneratorError::DegenerateInput("fewer than three points".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(points[a][1].total_cmp(&points[b][1])));
    if let Some(w) = order.windows(2).find(|w| points[w[0]] == points[w[1]]) {
        return Err(GeneratorError::DegenerateInput(format!("duplicate points {} and {}", w[0], w[1])));
    }
    let (a, b) = (order[0], order[1]);
    let Some(pos) = order[2..]
        .iter()
        .position(|&c| orient2d(coord(points[a]), coord(points[b]), coord(points[c])) != 0.0)
    else {
        return Err(GeneratorError::DegenerateInput("all points are collinear".into()));
    };
    let c = order.remove(pos + 2);
    let mut tr = Triangulation {
        pts: points,
        ghost: n,
        tris: Vec::with_capacity(2 * n + 4),
        alive: Vec::with_capacity(2 * n + 4),
        edges: HashMap::with_capacity(6 * n + 12),
    };
    let (b, c) = if orient2d(coord(points[a]), coord(points[b]), coord(points[c])) > 0.0 {
        (b, c)
    } else {
        (c, b)
    };
    tr.add([a, b, c]);
    tr.add([b, a, n]);
    tr.add([c, b, n]);
    tr.add([a, c, n]);

    let mut recent: Vec<usize> = Vec::new();
    for &p in order.iter().filter(|&&p| p != a && p != b && p != c) {
        let first_new = tr.tris.len();
        let start = recent
            .iter()
            .copied()
            .find(|&t| tr.alive[t] && tr.in_conflict(t, p))
            .or_else(|| (0..tr.tris.len()).rev().find(|&t| tr.alive[t] && tr.in_conflict(t, p)))
            .expect("every point outside the current triangulation conflicts with a ghost");
        tr.insert(p, start);
        recent = (first_new..tr.tris.len()).collect();
    }

    let triangles: Vec<[usize; 3]> = tr
        .tris
        .iter()
        .zip(&tr.alive)
        .filter(|&(t, &alive)| alive && !t.contains(&n))
        .map(|(t, _)| *t)
        .collect();
    let vertices = points.iter().map(|p| Point3::new(p[0], p[1], 0.0)).collect();
    let mesh = IndexedMesh::new(vertices, triangles)?;
    let ambiguous_edges = count_cocircular_edges(&mesh)?;
    Ok(PlanarDelaunay { mesh, ambiguous_edges })
}

/// Interior edges whose opposite vertex lies within the relative band of the
/// neighbour's circumcircle.
pub(crate) fn count_cocircular_edges(mesh: &IndexedMesh) -> Result<usize, GeneratorError> {
    let adj = build_adjacency(mesh)?;
    let mut count = 0;
    for (_, e) in adj.interior_edges() {
        let EdgeFaces::Interior { k, l, .. } = e.faces else {
            continue;
        };
        let apex = |t: usize| {
            *mesh.triangles[t]
                .iter()
                .find(|&&v| v != e.v[0] && v != e.v[1])
                .expect("regular triangle")
        };
        let c: Triangle = mesh.triangle(k);
        let Ok(cd) = c.circumcenter() else { continue };
        let q = mesh.vertices[apex(l)];
        if ((q - cd.q).norm() - cd.r).abs() <= COCIRCULAR_BAND * cd.r {
            count += 1;
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::check_manifold;
    use crate::quality::delaunay_violations_brute;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hull_area(points: &[[f64; 2]]) -> f64 {
        // monotone chain
        let mut p: Vec<[f64; 2]> = points.to_vec();
        p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
        let mut hull: Vec<[f64; 2]> = Vec::new();
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
                if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
            for &q in iter {
                while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                    hull.pop();
                }
                hull.push(q);
            }
            hull.pop();
        }
        let mut a = 0.0;
        for i in 0..hull.len() {
            let (u, v) = (hull[i], hull[(i + 1) % hull.len()]);
            a += u[0] * v[1] - u[1] * v[0];
        }
        a / 2.0
    }

    #[test]
    fn three_points() {
        let d = planar_delaunay(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(d.mesh.num_triangles(), 1);
        assert!(d.mesh.triangle(0).normal().unwrap().z > 0.0);
    }

    #[test]
    fn interior_point_gives_three_triangles() {
        let pts = [[0.0, 0.0], [4.0, 0.0], [1.0, 3.0], [1.5, 1.0]];
        let d = planar_delaunay(&pts).unwrap();
        assert_eq!(d.mesh.num_triangles(), 3);
        assert!(d.mesh.triangles.iter().all(|t| t.contains(&3)));
        assert!(delaunay_violations_brute(&d.mesh).unwrap().is_empty());
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            planar_delaunay(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]),
            Err(GeneratorError::DegenerateInput(_))
        ));
        assert!(matches!(
            planar_delaunay(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]),
            Err(GeneratorError::DegenerateInput(_))
        ));
        let square = planar_delaunay(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert_eq!(square.mesh.num_triangles(), 2);
        assert_eq!(square.ambiguous_edges, 1);
        assert_eq!(square.into_strict(), Err(GeneratorError::AmbiguousCocircular(1)));
    }

    #[test]
    fn collinear_hull_points_are_used() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [1.5, 1.0], [1.5, -0.7]];
        let d = planar_delaunay(&pts).unwrap();
        assert_eq!(d.mesh.used_vertices().len(), 6);
        assert!(check_manifold(&d.mesh).is_manifold());
        let pts = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [1.5, 1.0]];
        let d = planar_delaunay(&pts).unwrap();
        assert_eq!(d.mesh.num_triangles(), 3);
        assert!((d.mesh.area() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn random_sets_are_delaunay_and_partition_the_hull() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20 {
            let n = if trial == 0 { 200 } else { rng.gen_range(3..120) };
            let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
            let d = planar_delaunay(&pts).unwrap();
            let m = &d.mesh;
            assert!(delaunay_violations_brute(m).unwrap().is_empty());
            assert!(check_manifold(m).is_manifold());
            let h = hull_area(&pts);
            assert!((m.area() - h).abs() <= 1e-9 * h);
            assert_eq!(m.used_vertices().len(), n);
            assert!(m.triangles_iter().all(|t| t.normal().unwrap().z > 0.0));
        }
    }

    #[test]
    fn lattice_with_ties_stays_valid() {
        let pts: Vec<[f64; 2]> = (0..6).flat_map(|i| (0..5).map(move |j| [i as f64, j as f64])).collect();
        let d = planar_delaunay(&pts).unwrap();
        assert_eq!(d.mesh.num_triangles(), 2 * 5 * 4);
        assert!(delaunay_violations_brute(&d.mesh).unwrap().is_empty());
        assert!(d.ambiguous_edges >= 20);
    }
}
