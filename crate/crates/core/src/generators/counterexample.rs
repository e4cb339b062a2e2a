use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::GeneratorError;
use crate::mesh::{IndexedMesh, Point3};

/// Isosceles strip on `[0, 2π] x [-1, 1]` with angular step `s ε` and
/// vertical bases of length `ε = 2^-j`, where `s = 2π / m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleSpec {
    pub m: u32,
    pub j: u32,
}

impl CounterexampleSpec {
    pub fn new(m: u32, j: u32) -> Result<Self, GeneratorError> {
        let spec = Self { m, j };
        let cols = spec.columns_f64();
        if m < 3 || j == 0 || j > 20 || !spec.columns().is_multiple_of(2) {
            return Err(GeneratorError::NonIntegerColumns(cols));
        }
        Ok(spec)
    }

    /// Recover `(m, j)` from numeric `s` and `ε`.
    pub fn from_values(s: f64, eps: f64) -> Result<Self, GeneratorError> {
        let cols = 2.0 * PI / (s * eps);
        if !cols.is_finite() || cols <= 0.0 {
            return Err(GeneratorError::NonIntegerColumns(cols));
        }
        let m = 2.0 * PI / s;
        let j = -eps.log2();
        let close = |x: f64| (x - x.round()).abs() <= 1e-9 * x.abs().max(1.0);
        if !close(m) || !close(j) || j.round() < 1.0 || m.round() > u32::MAX as f64 {
            return Err(GeneratorError::NonIntegerColumns(cols));
        }
        Self::new(m.round() as u32, j.round() as u32)
    }

    pub fn s(&self) -> f64 {
        2.0 * PI / self.m as f64
    }

    pub fn eps(&self) -> f64 {
        (-(self.j as f64)).exp2()
    }

    fn columns_f64(&self) -> f64 {
        self.m as f64 * (self.j as f64).exp2()
    }

    /// Number of vertex columns around the circle, `2π / (s ε)`.
    pub fn columns(&self) -> usize {
        (self.m as usize) << self.j
    }

    pub fn angular_step(&self) -> f64 {
        2.0 * PI / self.columns() as f64
    }
}

/// Heights of column `c`: even columns start at `-1`, odd ones at `-1 + ε/2`,
/// all within `[-1, 1]`.
fn column_heights(spec: &CounterexampleSpec, c: usize) -> Vec<f64> {
    let eps = spec.eps();
    let rows = 1usize << (spec.j + 1); // 2 / ε
    if c.is_multiple_of(2) {
        (0..=rows).map(|k| -1.0 + k as f64 * eps).collect()
    } else {
        (0..rows).map(|k| -1.0 + (k as f64 + 0.5) * eps).collect()
    }
}

/// Flat strip in `(angle, t)` coordinates. With `wrap`, the last column is
/// joined to the first one.
fn strip(spec: &CounterexampleSpec, wrap: bool) -> (Vec<(usize, f64)>, Vec<[usize; 3]>) {
    let cols = spec.columns();
    let mut verts = Vec::new();
    let mut starts = Vec::with_capacity(cols + 1);
    for c in 0..cols {
        starts.push(verts.len());
        verts.extend(column_heights(spec, c).into_iter().map(|t| (c, t)));
    }
    starts.push(verts.len());
    let strips = if wrap { cols } else { cols - 1 };
    let mut tris = Vec::with_capacity(2 * verts.len());
    for c in 0..strips {
        let d = (c + 1) % cols;
        let left = starts[c]..starts[c + 1];
        let right = starts[d]..starts[d + 1];
        // merge both columns by height; consecutive triples are the
        // isosceles triangles of this strip
        let mut merged: Vec<usize> = left.chain(right).collect();
        merged.sort_by(|&a, &b| verts[a].1.total_cmp(&verts[b].1));
        for w in merged.windows(3) {
            let (a, b, z) = (w[0], w[1], w[2]);
            // a and z share a column; b is the apex. Orient counterclockwise
            // in (angle, t).
            let apex_right = verts[b].0 == d;
            tris.push(if apex_right { [a, b, z] } else { [a, z, b] });
        }
    }
    (verts, tris)
}

/// The strip wrapped onto the unit cylinder by `(φ, t) -> (cos φ, sin φ, t)`,
/// with outward normals.
pub fn counterexample_cylinder(spec: &CounterexampleSpec) -> Result<IndexedMesh, GeneratorError> {
    let (verts, tris) = strip(spec, true);
    let step = spec.angular_step();
    let vertices = verts
        .iter()
        .map(|&(c, t)| {
            let phi = c as f64 * step;
            Point3::new(phi.cos(), phi.sin(), t)
        })
        .collect();
    let mut mesh = IndexedMesh::new(vertices, tris)?;
    // counterclockwise in (φ, t) is outward for the chart (cos φ, sin φ, t)
    let t = mesh.triangle(0);
    let (n, c) = (t.normal()?, t.centroid());
    if n.x * c.x + n.y * c.y < 0.0 {
        mesh.flip_all();
    }
    Ok(mesh)
}

/// The unwrapped strip in the plane `z = 0`, with angular coordinate `x`.
pub fn counterexample_flat(spec: &CounterexampleSpec) -> Result<IndexedMesh, GeneratorError> {
    let (verts, tris) = strip(spec, false);
    let step = spec.angular_step();
    let vertices = verts
        .iter()
        .map(|&(c, t)| Point3::new(c as f64 * step, t, 0.0))
        .collect();
    Ok(IndexedMesh::new(vertices, tris)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::all_energies;
    use crate::mesh::{build_adjacency, check_manifold};
    use crate::quality::quality_report;

    #[test]
    fn spec_validation() {
        let s = CounterexampleSpec::new(8, 3).unwrap();
        assert_eq!(s.columns(), 64);
        assert!((s.s() * s.eps() * 64.0 - 2.0 * PI).abs() < 1e-12);
        assert_eq!(CounterexampleSpec::from_values(2.0 * PI / 16.0, 0.125).unwrap(), CounterexampleSpec { m: 16, j: 3 });
        assert!(matches!(
            CounterexampleSpec::from_values(0.3, 0.125),
            Err(GeneratorError::NonIntegerColumns(_))
        ));
        assert!(matches!(
            CounterexampleSpec::from_values(2.0 * PI / 8.0, 0.1),
            Err(GeneratorError::NonIntegerColumns(_))
        ));
    }

    #[test]
    fn flat_strip_has_zero_energy_and_isosceles_triangles() {
        let spec = CounterexampleSpec::new(8, 3).unwrap();
        let m = counterexample_flat(&spec).unwrap();
        let e = all_energies(&m).unwrap();
        assert_eq!(e.bending, 0.0);
        assert_eq!(e.seung_nelson, 0.0);
        assert!(check_manifold(&m).is_manifold());
        let eps = spec.eps();
        for t in m.triangles_iter() {
            assert!(t.normal().unwrap().z > 0.0);
            let mut l = t.edge_lengths();
            l.sort_by(f64::total_cmp);
            // base ε and two equal legs
            assert!((l[0] - l[1]).abs() < 1e-12 || (l[1] - l[2]).abs() < 1e-12);
            assert!(l.iter().any(|x| (x - eps).abs() < 1e-12));
        }
        // area of the strip minus the two boundary half rows per strip
        let width = (spec.columns() - 1) as f64 * spec.angular_step();
        let lost = (spec.columns() - 1) as f64 * spec.angular_step() * eps / 2.0;
        assert!((m.area() - (2.0 * width - lost)).abs() < 1e-9);
    }

    #[test]
    fn wrapped_strip_is_a_non_delaunay_cylinder() {
        let spec = CounterexampleSpec::new(16, 3).unwrap();
        let m = counterexample_cylinder(&spec).unwrap();
        for p in &m.vertices {
            assert!((p.x.hypot(p.y) - 1.0).abs() < 1e-12);
            assert!(p.z.abs() <= 1.0 + 1e-12);
        }
        let report = check_manifold(&m);
        assert!(report.is_manifold(), "{:?}", report.violations.first());
        let adj = build_adjacency(&m).unwrap();
        assert!(adj.orientation_consistent());
        // two boundary loops
        assert_eq!(adj.num_boundary(), 2 * spec.columns());
        for t in m.triangles_iter() {
            let n = t.normal().unwrap();
            let c = t.centroid();
            assert!(n.x * c.x + n.y * c.y > 0.0);
        }
        assert!(!quality_report(&m).unwrap().is_delaunay());
        assert!(all_energies(&m).unwrap().bending.is_finite());
    }

    #[test]
    fn wide_columns_are_delaunay() {
        // across a column two triangles form a rhombus with diagonals ε and
        // 2 s ε, which is Delaunay once s > 1/2
        let m = counterexample_cylinder(&CounterexampleSpec::new(8, 3).unwrap()).unwrap();
        assert!(quality_report(&m).unwrap().is_delaunay());
        let flat = counterexample_flat(&CounterexampleSpec::new(16, 3).unwrap()).unwrap();
        assert!(!quality_report(&flat).unwrap().is_delaunay());
    }

    #[test]
    fn energy_is_roughly_stable_in_eps() {
        let e: Vec<f64> = [3, 4, 5]
            .iter()
            .map(|&j| {
                let m = counterexample_cylinder(&CounterexampleSpec::new(16, j).unwrap()).unwrap();
                all_energies(&m).unwrap().bending
            })
            .collect();
        for w in e.windows(2) {
            assert!((w[1] / w[0] - 1.0).abs() < 0.2, "{e:?}");
        }
    }
}
