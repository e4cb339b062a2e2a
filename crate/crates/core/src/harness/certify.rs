//! Quality certification of a mesh against an analytic surface.

use std::fmt::Write as _;

use serde::Serialize;

use super::HarnessError;
use crate::mesh::{check_manifold, IndexedMesh};
use crate::quality::{covering_radius, min_spacing, protection_margin, quality_report, CoveringRadius, QualityReport};
use crate::surfaces::AnalyticSurface;

/// Upper bound on the number of surface samples used for the covering radius.
const MAX_COVERING_SAMPLES: f64 = 2e6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CertifyOptions {
    /// Required `ζ`; unchecked when `None`.
    pub zeta: Option<f64>,
    /// Required protection `δ̄`; unchecked (and not computed) when `None`.
    pub protect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyReport {
    #[serde(skip)]
    pub quality: QualityReport,
    pub triangles: usize,
    pub vertices: usize,
    pub size: f64,
    pub min_angle: f64,
    pub zeta_regular_for: f64,
    pub delaunay_violations: usize,
    pub manifold: bool,
    pub manifold_violations: usize,
    pub covering: CoveringRadius,
    pub min_spacing: f64,
    /// Protection margin at the covering scale, if requested.
    pub protection_margin: Option<f64>,
    pub options: CertifyOptions,
    pub zeta_ok: bool,
    pub delaunay_ok: bool,
    pub protected_ok: bool,
    /// `zeta_ok && delaunay_ok && protected_ok`.
    pub passed: bool,
}

impl CertifyReport {
    pub fn to_kv(&self) -> String {
        let mut s = self.quality.to_kv();
        let _ = writeln!(s, "manifold = {}", self.manifold);
        let _ = writeln!(s, "covering_radius_lower = {}", self.covering.lower);
        let _ = writeln!(s, "covering_radius_upper = {}", self.covering.upper);
        let _ = writeln!(s, "min_spacing = {}", self.min_spacing);
        if let Some(m) = self.protection_margin {
            let _ = writeln!(s, "protection_margin = {m}");
        }
        let _ = writeln!(s, "zeta_ok = {}", self.zeta_ok);
        let _ = writeln!(s, "delaunay_ok = {}", self.delaunay_ok);
        let _ = writeln!(s, "protected_ok = {}", self.protected_ok);
        let _ = writeln!(s, "passed = {}", self.passed);
        s
    }
}

/// Runs every quality check on `mesh` and decides pass or fail.
pub fn certify(mesh: &IndexedMesh, surface: &AnalyticSurface, options: &CertifyOptions) -> Result<CertifyReport, HarnessError> {
    surface.validate()?;
    let quality = quality_report(mesh)?;
    let manifold = check_manifold(mesh);
    let spacing = min_spacing(&mesh.vertices);
    let floor = (surface.area()? / MAX_COVERING_SAMPLES).sqrt();
    let h = (spacing / 4.0).min(surface.scale() / 50.0).max(floor);
    let covering = covering_radius(&mesh.vertices, surface, h)?;
    let protection = options
        .protect
        .map(|_| protection_margin(&mesh.vertices, covering.upper).0);

    let zeta_ok = options.zeta.is_none_or(|z| quality.is_zeta_regular(z));
    let delaunay_ok = quality.is_delaunay();
    let protected_ok = match (options.protect, protection) {
        (Some(d), Some(m)) => m >= d,
        _ => true,
    };
    Ok(CertifyReport {
        triangles: quality.triangles,
        vertices: quality.vertices,
        size: quality.size,
        min_angle: quality.min_angle,
        zeta_regular_for: quality.zeta_regular_for,
        delaunay_violations: quality.delaunay_violations.len(),
        manifold: manifold.is_manifold(),
        manifold_violations: manifold.violations.len(),
        covering,
        min_spacing: spacing,
        protection_margin: protection,
        options: *options,
        zeta_ok,
        delaunay_ok,
        protected_ok,
        passed: zeta_ok && delaunay_ok && protected_ok,
        quality,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{counterexample_cylinder, icosphere, theta_grid, CounterexampleSpec, ThetaGridSpec};
    use crate::surfaces::{HeightField, Rect};

    #[test]
    fn icosphere_passes() {
        let r = certify(
            &icosphere(3),
            &AnalyticSurface::unit_sphere(),
            &CertifyOptions {
                zeta: Some(0.3),
                protect: None,
            },
        )
        .unwrap();
        assert!(r.passed && r.manifold, "{}", r.to_kv());
        assert!(r.size <= 2.0 * r.covering.upper);
    }

    #[test]
    fn counterexample_fails_on_delaunay() {
        let m = counterexample_cylinder(&CounterexampleSpec::new(16, 3).unwrap()).unwrap();
        let cyl = AnalyticSurface::Cylinder { r: 1.0, half_height: 1.0 };
        let r = certify(&m, &cyl, &CertifyOptions::default()).unwrap();
        assert!(!r.delaunay_ok && !r.passed);
        assert!(r.delaunay_violations > 0);
    }

    #[test]
    fn protection_threshold() {
        let domain = Rect::unit();
        let h = HeightField::zero();
        let m = theta_grid(&ThetaGridSpec::new(h, domain, 0.125, 0.25)).unwrap();
        let surface = AnalyticSurface::Graph { h, domain };
        let measured = certify(&m, &surface, &CertifyOptions { zeta: None, protect: Some(0.0) }).unwrap();
        assert!(measured.passed);
        let margin = measured.protection_margin.unwrap();
        let strict = certify(&m, &surface, &CertifyOptions { zeta: None, protect: Some(2.0 * margin + 1e-3) }).unwrap();
        assert!(!strict.protected_ok && !strict.passed);
    }
}
