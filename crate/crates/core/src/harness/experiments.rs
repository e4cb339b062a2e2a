//! Convergence sweeps: one certified, measured mesh per refinement level.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentSpec, GeneratorKind};
use super::HarnessError;
use crate::energy::all_energies;
use crate::generators::{
    augment_protected_with_retry, counterexample_cylinder, icosphere, restricted_delaunay, theta_grid, AugmentOptions,
    CounterexampleSpec, RestrictedOptions, ThetaGridSpec,
};
use crate::mesh::IndexedMesh;
use crate::quality::quality_report;
use crate::surfaces::AnalyticSurface;

/// Column order of the sweep CSV.
pub const CSV_HEADER: [&str; 14] = [
    "level",
    "param",
    "eps_or_size",
    "triangles",
    "E",
    "E_SN",
    "E_GHDS",
    "E_B",
    "min_angle",
    "zeta",
    "delaunay_ok",
    "reference",
    "rel_error",
    "status",
];

/// One sweep level. Numeric fields are NaN when `status` is not `ok`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub level: f64,
    /// Mesh parameter of the level: subdivision level, `ε`, or `s`.
    pub param: f64,
    /// Mesh size (largest triangle diameter).
    pub eps_or_size: f64,
    pub triangles: usize,
    pub e: f64,
    pub e_sn: f64,
    pub e_ghds: f64,
    /// `None` for meshes with boundary.
    pub e_b: Option<f64>,
    pub min_angle: f64,
    pub zeta: f64,
    pub delaunay_ok: bool,
    pub reference: f64,
    /// `(E - reference) / reference`, NaN if the reference vanishes.
    pub rel_error: f64,
    pub status: String,
}

impl ConvergenceRow {
    fn failed(level: f64, param: f64, reference: f64, err: &HarnessError) -> Self {
        Self {
            level,
            param,
            eps_or_size: f64::NAN,
            triangles: 0,
            e: f64::NAN,
            e_sn: f64::NAN,
            e_ghds: f64::NAN,
            e_b: None,
            min_angle: f64::NAN,
            zeta: f64::NAN,
            delaunay_ok: false,
            reference,
            rel_error: f64::NAN,
            status: format!("failed: {err}"),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

fn surface_of(spec: &ExperimentSpec, g: GeneratorKind) -> AnalyticSurface {
    spec.surface.unwrap_or(match g {
        GeneratorKind::Counterexample { .. } => AnalyticSurface::Cylinder { r: 1.0, half_height: 1.0 },
        _ => AnalyticSurface::unit_sphere(),
    })
}

/// Mesh of one level and its parameter.
fn build(g: GeneratorKind, surface: &AnalyticSurface, level: f64) -> Result<(IndexedMesh, f64), HarnessError> {
    Ok(match g {
        GeneratorKind::Icosphere => (icosphere(level as u32), level),
        GeneratorKind::ThetaGrid { theta } => {
            let AnalyticSurface::Graph { h, domain } = *surface else {
                return Err(HarnessError::Config("theta_grid needs a graph surface".into()));
            };
            let eps = (-level).exp2();
            (theta_grid(&ThetaGridSpec::new(h, domain, eps, theta))?, eps)
        }
        GeneratorKind::Counterexample { j } => {
            let spec = CounterexampleSpec::new(level as u32, j)?;
            (counterexample_cylinder(&spec)?, spec.s())
        }
        GeneratorKind::Protected { delta } => {
            let points = augment_protected_with_retry(&[], surface, &AugmentOptions::new(level, delta))?.points;
            (restricted_delaunay(&points, surface, &RestrictedOptions::default())?, level)
        }
    })
}

fn measure(mesh: &IndexedMesh, level: f64, param: f64, reference: f64) -> Result<ConvergenceRow, HarnessError> {
    let q = quality_report(mesh)?;
    let e = all_energies(mesh)?;
    Ok(ConvergenceRow {
        level,
        param,
        eps_or_size: q.size,
        triangles: q.triangles,
        e: e.bending,
        e_sn: e.seung_nelson,
        e_ghds: e.ghds,
        e_b: e.bobenko,
        min_angle: q.min_angle,
        zeta: q.zeta_regular_for,
        delaunay_ok: q.is_delaunay(),
        reference,
        rel_error: if reference > 0.0 {
            (e.bending - reference) / reference
        } else {
            f64::NAN
        },
        status: "ok".into(),
    })
}

/// Runs the sweep of `spec`, levels in parallel, rows in level order. A level
/// that fails is reported in its row and does not stop the others.
pub fn run_convergence(spec: &ExperimentSpec) -> Result<Vec<ConvergenceRow>, HarnessError> {
    spec.validate()?;
    let g = spec
        .generator
        .ok_or_else(|| HarnessError::Config("a sweep needs a generator".into()))?;
    let surface = surface_of(spec, g);
    Ok(spec
        .levels
        .par_iter()
        .map(|&level| {
            // recomputed per row so each row stands on its own
            let reference = surface.willmore().unwrap_or(f64::NAN);
            build(g, &surface, level)
                .and_then(|(mesh, param)| {
                    measure(&mesh, level, param, reference).map_err(|e| (param, e)).or_else(|(p, e)| {
                        Ok::<_, HarnessError>(ConvergenceRow::failed(level, p, reference, &e))
                    })
                })
                .unwrap_or_else(|e| ConvergenceRow::failed(level, f64::NAN, reference, &e))
        })
        .collect())
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x}")
    }
}

/// CSV text with [`CSV_HEADER`].
pub fn rows_to_csv(rows: &[ConvergenceRow]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            num(r.level),
            num(r.param),
            num(r.eps_or_size),
            r.triangles.to_string(),
            num(r.e),
            num(r.e_sn),
            num(r.e_ghds),
            r.e_b.map_or("n/a".into(), num),
            num(r.min_angle),
            num(r.zeta),
            r.delaunay_ok.to_string(),
            num(r.reference),
            num(r.rel_error),
            r.status.clone(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
