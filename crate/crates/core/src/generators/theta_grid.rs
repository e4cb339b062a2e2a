use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::GeneratorError;
use crate::mesh::{push_forward, IndexedMesh, Point3};
use crate::surfaces::{HeightField, Rect};

/// Constant `C` in the admissibility condition `C δ² < |θ| <= 1/2`.
pub const DEFAULT_ADMISSIBILITY_C: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaGridSpec {
    pub field: HeightField,
    pub domain: Rect,
    pub eps: f64,
    pub theta: f64,
    pub admissibility_c: f64,
}

impl ThetaGridSpec {
    pub fn new(field: HeightField, domain: Rect, eps: f64, theta: f64) -> Self {
        Self {
            field,
            domain,
            eps,
            theta,
            admissibility_c: DEFAULT_ADMISSIBILITY_C,
        }
    }

    /// `C δ²` with `δ = max |∇h|` over the domain.
    pub fn theta_lower_bound(&self) -> f64 {
        let delta = self.field.max_gradient(&self.domain);
        self.admissibility_c * delta * delta
    }

    pub fn check(&self) -> Result<(), GeneratorError> {
        let lower = self.theta_lower_bound();
        let t = self.theta.abs();
        if !(t <= 0.5 && t > lower) || !self.theta.is_finite() {
            return Err(GeneratorError::InadmissibleTheta {
                theta: self.theta,
                lower,
            });
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) || !self.domain.is_valid() {
            return Err(GeneratorError::DegenerateInput(
                "grid scale and domain must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Flat skewed lattice triangulation of the cells `ε[k, k+1] x [l, l+1]`
/// (in lattice coordinates `P(k, l) = ε(k + θ l, l)`) that lie inside the
/// domain. Unused lattice points are dropped.
pub fn theta_grid_flat(spec: &ThetaGridSpec) -> Result<IndexedMesh, GeneratorError> {
    spec.check()?;
    let ThetaGridSpec {
        domain: u,
        eps,
        theta,
        ..
    } = *spec;
    let tol = 1e-12 * u.width().hypot(u.height()).max(eps);
    let point = |k: i64, l: i64| (eps * (k as f64 + theta * l as f64), eps * l as f64);
    let inside = |k: i64, l: i64| {
        let (x, y) = point(k, l);
        u.contains(x, y, tol)
    };

    let l_min = (u.y0 / eps - 1e-9).ceil() as i64;
    let l_max = (u.y1 / eps + 1e-9).floor() as i64;
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut vid = |k: i64, l: i64, vertices: &mut Vec<Point3>| {
        *index.entry((k, l)).or_insert_with(|| {
            let (x, y) = point(k, l);
            vertices.push(Point3::new(x, y, 0.0));
            vertices.len() - 1
        })
    };
    for l in l_min..l_max {
        let shift = theta * l as f64;
        let k_min = (u.x0 / eps - shift - 1e-9).ceil() as i64 - 1;
        let k_max = (u.x1 / eps - shift + 1e-9).floor() as i64 + 1;
        for k in k_min..k_max {
            let cell = [(k, l), (k + 1, l), (k, l + 1), (k + 1, l + 1)];
            if !cell.iter().all(|&(a, b)| inside(a, b)) {
                continue;
            }
            let [p00, p10, p01, p11] = cell.map(|(a, b)| vid(a, b, &mut vertices));
            if theta >= 0.0 {
                triangles.push([p00, p10, p01]);
                triangles.push([p10, p11, p01]);
            } else {
                triangles.push([p00, p10, p11]);
                triangles.push([p00, p11, p01]);
            }
        }
    }
    if triangles.is_empty() {
        return Err(GeneratorError::EmptyDomain);
    }
    Ok(IndexedMesh::new(vertices, triangles)?)
}

/// The flat θ-grid lifted by the height field.
pub fn theta_grid(spec: &ThetaGridSpec) -> Result<IndexedMesh, GeneratorError> {
    let flat = theta_grid_flat(spec)?;
    let field = spec.field;
    Ok(push_forward(&flat, |x, y| field.value(x, y)))
}
