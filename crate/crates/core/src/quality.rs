//! Mesh-quality predicates: size, ζ-regularity, the Delaunay property,
//! covering radius, spacing and protection.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::mesh::spatial::PointGrid;
use crate::mesh::{IndexedMesh, MeshError, Point3, Triangle};
use crate::surfaces::AnalyticSurface;

/// A vertex counts as inside a circumball only if `|p - q| < r (1 - band)`.
pub const DELAUNAY_BAND: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QualityError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("point set is empty")]
    EmptyPointSet,
}

/// A mesh vertex strictly inside the open circumball of a triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaunayViolation {
    pub triangle: usize,
    pub vertex: usize,
    /// `r - |p - q|`.
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub triangles: usize,
    pub vertices: usize,
    pub size: f64,
    pub min_diam: f64,
    pub min_angle: f64,
    pub zeta_regular_for: f64,
    /// Deepest violating vertex of every non-Delaunay triangle, by triangle id.
    pub delaunay_violations: Vec<DelaunayViolation>,
}

impl QualityReport {
    pub fn is_delaunay(&self) -> bool {
        self.delaunay_violations.is_empty()
    }

    pub fn is_zeta_regular(&self, zeta: f64) -> bool {
        self.zeta_regular_for >= zeta
    }

    /// Flat `key = value` block.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "triangles = {}", self.triangles);
        let _ = writeln!(s, "vertices = {}", self.vertices);
        let _ = writeln!(s, "size = {}", self.size);
        let _ = writeln!(s, "min_diam = {}", self.min_diam);
        let _ = writeln!(s, "min_angle = {}", self.min_angle);
        let _ = writeln!(s, "zeta_regular_for = {}", self.zeta_regular_for);
        let _ = writeln!(s, "delaunay = {}", self.is_delaunay());
        let _ = writeln!(s, "delaunay_violations = {}", self.delaunay_violations.len());
        s
    }

    /// One row per violation: `triangle,vertex,depth`.
    pub fn violations_csv(&self) -> String {
        let mut s = String::from("triangle,vertex,depth\n");
        for v in &self.delaunay_violations {
            let _ = writeln!(s, "{},{},{}", v.triangle, v.vertex, v.depth);
        }
        s
    }
}

pub fn quality_report(mesh: &IndexedMesh) -> Result<QualityReport, MeshError> {
    let mut size: f64 = 0.0;
    let mut min_diam = f64::INFINITY;
    let mut min_angle = f64::INFINITY;
    for t in mesh.triangles_iter() {
        if !t.is_regular() {
            return Err(MeshError::DegenerateTriangle);
        }
        let d = t.diameter();
        size = size.max(d);
        min_diam = min_diam.min(d);
        min_angle = t.angles().into_iter().fold(min_angle, f64::min);
    }
    if mesh.triangles.is_empty() {
        min_diam = 0.0;
        min_angle = 0.0;
    }
    let zeta = if size > 0.0 {
        min_angle.min(min_diam / size)
    } else {
        0.0
    };
    Ok(QualityReport {
        triangles: mesh.num_triangles(),
        vertices: mesh.used_vertices().len(),
        size,
        min_diam,
        min_angle,
        zeta_regular_for: zeta,
        delaunay_violations: delaunay_violations(mesh)?,
    })
}

fn strictly_inside(p: &Point3, q: &Point3, r: f64) -> Option<f64> {
    let d = (p - q).norm();
    (d < r * (1.0 - DELAUNAY_BAND)).then_some(r - d)
}

/// Deepest violating vertex per triangle, using a spatial grid over the
/// vertices. Agrees with [`delaunay_violations_brute`] on which triangles
/// are violated.
pub fn delaunay_violations(mesh: &IndexedMesh) -> Result<Vec<DelaunayViolation>, MeshError> {
    let circ = mesh.circumdata()?;
    let used = mesh.used_vertices();
    let pts: Vec<Point3> = used.iter().map(|&i| mesh.vertices[i]).collect();
    let grid = PointGrid::new(&pts, (0.5 * mesh.size()).max(f64::MIN_POSITIVE));
    Ok((0..mesh.triangles.len())
        .into_par_iter()
        .filter_map(|t| {
            let tri = mesh.triangles[t];
            let c = circ[t];
            let mut best: Option<DelaunayViolation> = None;
            grid.for_each_within(&c.q, c.r, |j, _| {
                let v = used[j];
                if tri.contains(&v) {
                    return;
                }
                if let Some(depth) = strictly_inside(&pts[j], &c.q, c.r) {
                    let better = match best {
                        None => true,
                        Some(b) => depth > b.depth || (depth == b.depth && v < b.vertex),
                    };
                    if better {
                        best = Some(DelaunayViolation {
                            triangle: t,
                            vertex: v,
                            depth,
                        });
                    }
                }
            });
            best
        })
        .collect())
}

/// Every (triangle, vertex) violation by exhaustive search.
pub fn delaunay_violations_brute(mesh: &IndexedMesh) -> Result<Vec<DelaunayViolation>, MeshError> {
    let circ = mesh.circumdata()?;
    let used = mesh.used_vertices();
    let mut out = Vec::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for &v in &used {
            if tri.contains(&v) {
                continue;
            }
            if let Some(depth) = strictly_inside(&mesh.vertices[v], &circ[t].q, circ[t].r) {
                out.push(DelaunayViolation {
                    triangle: t,
                    vertex: v,
                    depth,
                });
            }
        }
    }
    Ok(out)
}

/// Bracket `lower <= D(X, N) <= upper` of the covering radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoveringRadius {
    pub lower: f64,
    pub upper: f64,
    pub sample_spacing: f64,
}

impl CoveringRadius {
    pub fn estimate(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Maximum over a surface sample of the distance to the nearest point,
/// bracketed by the sample's covering bound.
pub fn covering_radius(
    points: &[Point3],
    surface: &AnalyticSurface,
    sample_spacing: f64,
) -> Result<CoveringRadius, QualityError> {
    if points.is_empty() {
        return Err(QualityError::EmptyPointSet);
    }
    let sample = surface.sample(sample_spacing);
    let grid = PointGrid::new(points, sample_spacing.max(1e-3 * surface.scale()));
    let lower = sample
        .points
        .par_iter()
        .map(|s| grid.nearest(s).expect("non-empty").1)
        .reduce(|| 0.0, f64::max);
    Ok(CoveringRadius {
        lower,
        upper: lower + sample.cover,
        sample_spacing: sample.cover,
    })
}

/// Smallest pairwise distance (`inf` for fewer than two points).
pub fn min_spacing(points: &[Point3]) -> f64 {
    if points.len() < 2 {
        return f64::INFINITY;
    }
    // nearest-neighbor distance through a grid sized by the bounding box
    let (lo, hi) = points.iter().fold(
        (Point3::repeat(f64::INFINITY), Point3::repeat(f64::NEG_INFINITY)),
        |(lo, hi), p| (lo.inf(p), hi.sup(p)),
    );
    let extent = (hi - lo).norm().max(f64::MIN_POSITIVE);
    let cell = extent / (points.len() as f64).sqrt();
    let grid = PointGrid::new(points, cell);
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            grid.k_nearest(p, 2)
                .into_iter()
                .find(|&(j, _)| j != i)
                .map_or(f64::INFINITY, |(_, d)| d)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtectionReport {
    pub covering: CoveringRadius,
    pub min_spacing: f64,
    /// `min | |p - q| - r |` over triples with `r <= covering.upper` and
    /// points `p` outside the triple, capped at `covering.upper`.
    pub protection_margin: f64,
    /// Largest `δ̄` the set is protected at (equal to the margin).
    pub protected_at: f64,
    pub triples_tested: usize,
    /// Triple and outside point realizing the margin.
    pub witness: Option<([usize; 3], usize)>,
}

impl ProtectionReport {
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "covering_radius_lower = {}", self.covering.lower);
        let _ = writeln!(s, "covering_radius_upper = {}", self.covering.upper);
        let _ = writeln!(s, "min_spacing = {}", self.min_spacing);
        let _ = writeln!(s, "protection_margin = {}", self.protection_margin);
        let _ = writeln!(s, "protected_at = {}", self.protected_at);
        let _ = writeln!(s, "triples_tested = {}", self.triples_tested);
        s
    }
}

/// Protection margin of `points` at the scale of their covering radius.
pub fn protection_report(
    points: &[Point3],
    surface: &AnalyticSurface,
    sample_spacing: f64,
) -> Result<ProtectionReport, QualityError> {
    let covering = covering_radius(points, surface, sample_spacing)?;
    let (margin, triples, witness) = protection_margin(points, covering.upper);
    Ok(ProtectionReport {
        covering,
        min_spacing: min_spacing(points),
        protection_margin: margin,
        protected_at: margin,
        triples_tested: triples,
        witness,
    })
}

/// `min | |p - q| - r |` over triples with circumradius `r <= d_max` and
/// outside points `p`; values above `d_max` are capped.
pub fn protection_margin(points: &[Point3], d_max: f64) -> (f64, usize, Option<([usize; 3], usize)>) {
    if points.len() < 3 || !(d_max > 0.0) {
        return (d_max.max(0.0), 0, None);
    }
    let grid = PointGrid::new(points, d_max);
    let per_point: Vec<(f64, usize, Option<([usize; 3], usize)>)> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let near: Vec<usize> = grid
                .within(&points[i], 2.0 * d_max)
                .into_iter()
                .filter(|&j| j > i)
                .collect();
            let mut best = d_max;
            let mut count = 0;
            let mut witness = None;
            for (a, &j) in near.iter().enumerate() {
                for &k in &near[a + 1..] {
                    if (points[j] - points[k]).norm() > 2.0 * d_max {
                        continue;
                    }
                    let tri = Triangle::new(points[i], points[j], points[k]);
                    let Ok(c) = tri.circumcenter() else { continue };
                    if c.r > d_max {
                        continue;
                    }
                    count += 1;
                    grid.for_each_within(&c.q, c.r + best, |p, dist| {
                        if p == i || p == j || p == k {
                            return;
                        }
                        let m = (dist - c.r).abs();
                        if m < best {
                            best = m;
                            witness = Some(([i, j, k], p));
                        }
                    });
                }
            }
            (best, count, witness)
        })
        .collect();
    let mut best = d_max;
    let mut count = 0;
    let mut witness = None;
    for (m, c, w) in per_point {
        count += c;
        if m < best {
            best = m;
            witness = w;
        }
    }
    (best, count, witness)
}

/// Exhaustive protection margin over all triples and points (test oracle).
pub fn protection_margin_brute(points: &[Point3], d_max: f64) -> f64 {
    let n = points.len();
    let mut best = d_max.max(0.0);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let Ok(c) = Triangle::new(points[i], points[j], points[k]).circumcenter() else {
                    continue;
                };
                if c.r > d_max {
                    continue;
                }
                for (p, x) in points.iter().enumerate() {
                    if p != i && p != j && p != k {
                        best = best.min(((x - c.q).norm() - c.r).abs());
                    }
                }
            }
        }
    }
    best
}
