//! Randomized checks of the segment-traversal identities and of the
//! Cauchy–Schwarz bound, reproducible from a seed.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::HarnessError;
use crate::generators::{planar_delaunay, theta_grid_flat, ThetaGridSpec};
use crate::mesh::IndexedMesh;
use crate::surfaces::{HeightField, Rect};
use crate::traversal::{cross, cs_bound_check, indicator_area, lifted_indicator_area, telescoping_check, FlatMesh};

/// Relative tolerance of the Monte Carlo indicator areas.
pub const INDICATOR_RTOL: f64 = 0.01;
/// Absolute tolerance of the telescoping residual on unit-spacing grids.
pub const TELESCOPING_TOL: f64 = 1e-9;
/// Relative slack of `lhs <= rhs`.
pub const CS_RTOL: f64 = 1e-9;
/// Jittered samples per side for indicator areas.
const MC_SIDE: usize = 160;
const SEGMENTS_PER_TRIAL: usize = 100;
const CS_GRID: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteStats {
    pub passed: usize,
    pub total: usize,
    /// Largest relative error, residual or `lhs / rhs` seen.
    pub worst: f64,
}

impl SuiteStats {
    fn from(values: impl Iterator<Item = f64>, ok: impl Fn(f64) -> bool) -> Self {
        let mut s = SuiteStats {
            passed: 0,
            total: 0,
            worst: 0.0,
        };
        for v in values {
            s.total += 1;
            if ok(v) {
                s.passed += 1;
            }
            // NaN marks a failed trial and wins
            s.worst = if v.is_nan() || s.worst.is_nan() { f64::NAN } else { s.worst.max(v) };
        }
        s
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaReport {
    pub seed: u64,
    pub trials: usize,
    /// Factor applied to the right-hand side of the bound; `1` is the real check.
    pub rhs_scale: f64,
    pub indicator_flat: SuiteStats,
    pub indicator_lifted: SuiteStats,
    pub telescoping: SuiteStats,
    pub cs_bound: SuiteStats,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.indicator_flat.all_passed()
            && self.indicator_lifted.all_passed()
            && self.telescoping.all_passed()
            && self.cs_bound.all_passed()
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "rhs_scale = {}", self.rhs_scale);
        for (name, st) in [
            ("indicator_flat", self.indicator_flat),
            ("indicator_lifted", self.indicator_lifted),
            ("telescoping", self.telescoping),
            ("cs_bound", self.cs_bound),
        ] {
            let _ = writeln!(s, "{name} = {}/{} (worst {:e})", st.passed, st.total, st.worst);
        }
        let _ = writeln!(s, "passed = {}", self.passed());
        s
    }
}

/// Independent generator for trial `t` of suite `suite`.
fn rng_for(seed: u64, suite: u64, t: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite << 32 | t as u64);
    rng
}

fn random_theta(rng: &mut ChaCha8Rng) -> f64 {
    let t = rng.gen_range(0.1..0.5);
    if rng.gen_bool(0.5) {
        t
    } else {
        -t
    }
}

/// Flat θ-grid with unit spacing on `[-3, 3 + n] x [0, n]`.
fn unit_grid(n: usize, theta: f64) -> Result<IndexedMesh, HarnessError> {
    let domain = Rect::new(-3.0, 3.0 + n as f64, 0.0, n as f64);
    Ok(theta_grid_flat(&ThetaGridSpec::new(HeightField::zero(), domain, 1.0, theta))?)
}

/// Monte Carlo indicator area of one interior edge: relative errors against
/// the flat and the lifted formula.
fn indicator_trial(rng: &mut ChaCha8Rng) -> Result<(f64, f64), HarnessError> {
    let mesh = unit_grid(8, random_theta(rng))?;
    let flat = FlatMesh::new(&mesh)?;
    let central: Vec<usize> = flat
        .adjacency()
        .interior_edges()
        .filter(|(_, e)| {
            let m = (mesh.vertices[e.v[0]] + mesh.vertices[e.v[1]]) * 0.5;
            (3.0..5.0).contains(&m.x) && (3.0..5.0).contains(&m.y)
        })
        .map(|(i, _)| i)
        .collect();
    let eid = central[rng.gen_range(0..central.len())];
    let e = flat.adjacency().edges()[eid];
    let (a, b) = (mesh.vertices[e.v[0]], mesh.vertices[e.v[1]]);
    let (a, b) = ([a.x, a.y], [b.x, b.y]);
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    // directions nearly parallel to the edge make the area ill-conditioned
    let v = loop {
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = rng.gen_range(0.3..1.5);
        let v = [r * phi.cos(), r * phi.sin()];
        if indicator_area((a, b), v) >= 0.2 * r * len {
            break v;
        }
    };
    let w = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
    let lo = [a[0].min(b[0]) - v[0].max(0.0), a[1].min(b[1]) - v[1].max(0.0)];
    let hi = [a[0].max(b[0]) - v[0].min(0.0), a[1].max(b[1]) - v[1].min(0.0)];
    let (dx, dy) = ((hi[0] - lo[0]) / MC_SIDE as f64, (hi[1] - lo[1]) / MC_SIDE as f64);
    let mut hits = 0usize;
    for i in 0..MC_SIDE {
        for j in 0..MC_SIDE {
            let x = [
                lo[0] + (i as f64 + rng.gen::<f64>()) * dx,
                lo[1] + (j as f64 + rng.gen::<f64>()) * dy,
            ];
            if cross(&flat, x, v)?.crossings.iter().any(|c| c.edge == eid) {
                hits += 1;
            }
        }
    }
    let est = hits as f64 * dx * dy;
    let flat_err = (est / indicator_area((a, b), v) - 1.0).abs();
    let lifted_err = (est / lifted_indicator_area((a, b), v, w) - 1.0).abs();
    Ok((flat_err, lifted_err))
}

/// Largest telescoping residual over random segments of a 50 x 50 grid.
fn telescoping_trial(rng: &mut ChaCha8Rng) -> Result<f64, HarnessError> {
    let mesh = unit_grid(50, random_theta(rng))?;
    let flat = FlatMesh::new(&mesh)?;
    let mut worst: f64 = 0.0;
    for _ in 0..SEGMENTS_PER_TRIAL {
        let x = [rng.gen_range(15.0..35.0), rng.gen_range(5.0..25.0)];
        let v = [rng.gen_range(-12.0..12.0), rng.gen_range(-5.0..20.0)];
        let seq = cross(&flat, x, v)?;
        worst = worst.max(telescoping_check(&flat, &seq)?.2);
    }
    Ok(worst)
}

/// Random heights and per-triangle values on a small θ-grid.
fn cs_random_trial(rng: &mut ChaCha8Rng, rhs_scale: f64) -> Result<f64, HarnessError> {
    let mesh = unit_grid(10, random_theta(rng))?;
    let h: Vec<f64> = mesh.vertices.iter().map(|_| rng.gen_range(-0.1..0.1)).collect();
    let g: Vec<f64> = (0..mesh.num_triangles()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let v = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
    let b = cs_bound_check(&mesh, &h, &g, v, &Rect::new(5.0, 7.0, 4.0, 6.0), CS_GRID)?;
    Ok(b.lhs / (rhs_scale * b.rhs))
}

const LATTICE_COLS: usize = 8;
const LATTICE_ROWS: usize = 6;
const ROW_HEIGHT: f64 = 1.5;

/// Rectangle `[0, 8] x [0, 9]` triangulated from rows 1.5 apart whose
/// points alternate between integer and half-integer abscissae.
fn offset_lattice() -> Result<IndexedMesh, HarnessError> {
    let mut pts = Vec::new();
    for l in 0..=LATTICE_ROWS {
        let y = l as f64 * ROW_HEIGHT;
        if l % 2 == 0 {
            pts.extend((0..=LATTICE_COLS).map(|k| [k as f64, y]));
        } else {
            pts.push([0.0, y]);
            pts.extend((0..LATTICE_COLS).map(|k| [k as f64 + 0.5, y]));
            pts.push([LATTICE_COLS as f64, y]);
        }
    }
    Ok(planar_delaunay(&pts)?.into_strict()?)
}

/// A unit jump across one full lattice row, translated nearly across it. The
/// bound is close to sharp here, so a halved right-hand side must fail.
fn cs_step_trial(rng: &mut ChaCha8Rng, rhs_scale: f64) -> Result<f64, HarnessError> {
    let mesh = offset_lattice()?;
    // even rows have no half edges at the sides, so every jump edge has the
    // same θ d and a sampled maximum can never undercut the bound
    let row = (2 * rng.gen_range(1..LATTICE_ROWS / 2)) as f64 * ROW_HEIGHT;
    let g: Vec<f64> = mesh
        .triangles_iter()
        .map(|t| if t.centroid().y > row { 1.0 } else { 0.0 })
        .collect();
    let vy = rng.gen_range(0.2..0.7) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let vx: f64 = rng.gen_range(0.05..0.1) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let width = LATTICE_COLS as f64;
    let (y0, y1) = if vy > 0.0 { (row - vy - 0.1, row + 0.1) } else { (row - 0.1, row - vy + 0.1) };
    // both W and W + v inside the rectangle
    let window = Rect::new((-vx).max(0.0) + 1e-9, width - vx.max(0.0) - 1e-9, y0, y1);
    let b = cs_bound_check(&mesh, &vec![0.0; mesh.num_vertices()], &g, [vx, vy], &window, CS_GRID)?;
    Ok(b.lhs / (rhs_scale * b.rhs))
}

/// Runs all four suites with `trials` trials each.
pub fn verify_lemmas(seed: u64, trials: usize) -> Result<LemmaReport, HarnessError> {
    verify_lemmas_with(seed, trials, 1.0)
}

/// [`verify_lemmas`] with the bound's right-hand side multiplied by
/// `rhs_scale`, to check that the suite can fail.
pub fn verify_lemmas_with(seed: u64, trials: usize, rhs_scale: f64) -> Result<LemmaReport, HarnessError> {
    let indicator: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| indicator_trial(&mut rng_for(seed, 1, t)))
        .collect::<Result<_, _>>()?;
    let telescoping: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| telescoping_trial(&mut rng_for(seed, 2, t)))
        .collect::<Result<_, _>>()?;
    let cs: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let rng = &mut rng_for(seed, 3, t);
            if t % 2 == 0 {
                cs_random_trial(rng, rhs_scale)
            } else {
                cs_step_trial(rng, rhs_scale)
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(LemmaReport {
        seed,
        trials,
        rhs_scale,
        indicator_flat: SuiteStats::from(indicator.iter().map(|p| p.0), |e| e < INDICATOR_RTOL),
        indicator_lifted: SuiteStats::from(indicator.iter().map(|p| p.1), |e| e < INDICATOR_RTOL),
        telescoping: SuiteStats::from(telescoping.into_iter(), |r| r < TELESCOPING_TOL),
        cs_bound: SuiteStats::from(cs.into_iter(), |q| q <= 1.0 + CS_RTOL),
    })
}
