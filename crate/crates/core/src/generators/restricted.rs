//! Delaunay triangulation restricted to an analytic surface: triangles whose
//! three Voronoi cells meet on the surface.

use std::collections::HashMap;

use rayon::prelude::*;

use super::GeneratorError;
use crate::mesh::spatial::PointGrid;
use crate::mesh::{check_manifold, IndexedMesh, Point3, Triangle};
use crate::quality::{covering_radius, min_spacing, protection_margin};
use crate::surfaces::AnalyticSurface;

/// Candidate generators per sample considered for Voronoi vertices.
const MAX_CANDIDATES: usize = 8;
/// Relative slack for "no other point strictly closer".
const EMPTY_BALL_FACTOR: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RestrictedOptions {
    /// Surface sample spacing used to locate Voronoi vertices. Defaults to a
    /// twentieth of the covering radius.
    pub sample_spacing: Option<f64>,
    /// If set, the protection margin at the covering scale must reach this
    /// value.
    pub required_protection: Option<f64>,
}

/// Restricted Delaunay triangulation of `points` (assumed on `surface`).
///
/// Candidate triples come from surface samples whose nearest points are
/// nearly equidistant. Each candidate is then confirmed exactly: the line of
/// points equidistant to the triple is intersected with the surface, and the
/// intersection must have no other point strictly closer. Triangles are
/// oriented along the surface normal.
pub fn restricted_delaunay(
    points: &[Point3],
    surface: &AnalyticSurface,
    options: &RestrictedOptions,
) -> Result<IndexedMesh, GeneratorError> {
    if points.len() < 3 {
        return Err(GeneratorError::DegenerateInput("fewer than three points".into()));
    }
    let spacing = min_spacing(points);
    if spacing == 0.0 {
        return Err(GeneratorError::DegenerateInput("duplicate points".into()));
    }
    let scale = surface.scale();
    let covering = covering_radius(points, surface, (spacing / 4.0).min(scale / 50.0))?;
    if let Some(required) = options.required_protection {
        let (margin, _, _) = protection_margin(points, covering.upper);
        if margin < required {
            return Err(GeneratorError::InsufficientProtection { margin, required });
        }
    }
    let h = options.sample_spacing.unwrap_or(covering.upper / 20.0);
    let sample = surface.sample(h);
    let grid = PointGrid::for_spacing(points, covering.upper);

    let found: Vec<Vec<[usize; 3]>> = sample
        .points
        .par_iter()
        .map(|s| {
            let near = grid.k_nearest(s, MAX_CANDIDATES);
            let Some(&(_, d1)) = near.first() else { return Vec::new() };
            let cand: Vec<usize> = near
                .iter()
                .take_while(|&&(_, d)| d <= d1 + 2.0 * sample.cover)
                .map(|&(i, _)| i)
                .collect();
            let mut out = Vec::new();
            for a in 0..cand.len() {
                for b in a + 1..cand.len() {
                    for c in b + 1..cand.len() {
                        let mut t = [cand[a], cand[b], cand[c]];
                        t.sort_unstable();
                        out.push(t);
                    }
                }
            }
            out
        })
        .collect();
    // first sample that proposed each triple, for a deterministic start point
    let mut first: HashMap<[usize; 3], usize> = HashMap::new();
    for (s, triples) in found.iter().enumerate() {
        for t in triples {
            first.entry(*t).or_insert(s);
        }
    }
    let mut candidates: Vec<([usize; 3], usize)> = first.into_iter().collect();
    candidates.sort_unstable();

    let triangles: Vec<[usize; 3]> = candidates
        .par_iter()
        .filter_map(|&(t, s)| confirm(points, surface, &grid, t, &sample.points[s], scale))
        .collect();

    let mesh = IndexedMesh::new(points.to_vec(), triangles)?;
    let used = mesh.used_vertices();
    if used.len() != points.len() {
        let missing = (0..points.len()).find(|i| used.binary_search(i).is_err()).unwrap_or(0);
        return Err(GeneratorError::NonManifoldOutput(format!("vertex {missing} is not used")));
    }
    let report = check_manifold(&mesh);
    if let Some(v) = report.violations.first() {
        return Err(GeneratorError::NonManifoldOutput(format!("{v:?}")));
    }
    Ok(mesh)
}

/// Intersects the equidistant line of `t` with the surface starting near
/// `start` and returns the oriented triangle if the ball there is empty.
fn confirm(
    points: &[Point3],
    surface: &AnalyticSurface,
    grid: &PointGrid,
    t: [usize; 3],
    start: &Point3,
    scale: f64,
) -> Option<[usize; 3]> {
    let tri = Triangle::new(points[t[0]], points[t[1]], points[t[2]]);
    let cd = tri.circumcenter().ok()?;
    let n = tri.normal().ok()?;
    let on_line = |x: &Point3| cd.q + n * (x - cd.q).dot(&n);
    // alternating projection between the line and the surface
    let mut x = *start;
    let mut normal = n;
    for _ in 0..200 {
        let (y, ny) = surface.project(&on_line(&x));
        let step = (y - x).norm();
        x = y;
        normal = ny;
        if step <= 1e-14 * scale {
            break;
        }
    }
    if (x - on_line(&x)).norm() > 1e-9 * scale {
        return None;
    }
    let radius = (x - points[t[0]]).norm();
    let mut empty = true;
    grid.for_each_within(&x, radius * EMPTY_BALL_FACTOR, |i, _| {
        if !t.contains(&i) {
            empty = false;
        }
    });
    if !empty {
        return None;
    }
    Some(if n.dot(&normal) >= 0.0 { t } else { [t[0], t[2], t[1]] })
}
