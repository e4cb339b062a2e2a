//! Discrete bending energy and the three comparison energies.
//!
//! All energies are sums over unordered pairs of adjacent triangles. Pairs are
//! visited in the canonical edge order of [`EdgeAdjacency`] and reduced with
//! compensated summation, so totals are bit-reproducible.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{
    build_adjacency, dihedral_from_normals, EdgeAdjacency, EdgeFaces, IndexedMesh, MeshError,
    Point3,
};

/// `d_KL` below `COSPHERICAL_RATIO * size(T)` counts as zero.
pub const COSPHERICAL_RATIO: f64 = 1e-10;

/// `|n(K) - n(L)|` at or below this counts as zero when deciding the
/// infinite branch. Coplanar neighbors in a tilted plane differ by rounding.
pub const NORMAL_DIFF_ZERO: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("circumcircle tangents undefined across edge ({0}, {1})")]
    CosphericalPair(usize, usize),
}

/// Neumaier variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        if self.sum.is_finite() {
            self.sum + self.comp
        } else {
            self.sum
        }
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Per-pair record of the bending energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeContribution {
    pub edge_id: usize,
    pub v0: usize,
    pub v1: usize,
    #[serde(rename = "tri_K")]
    pub tri_k: usize,
    #[serde(rename = "tri_L")]
    pub tri_l: usize,
    #[serde(rename = "l_KL")]
    pub l_kl: f64,
    #[serde(rename = "d_KL")]
    pub d_kl: f64,
    pub alpha: f64,
    pub normal_diff: f64,
    #[serde(rename = "contribution")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBreakdown {
    pub contributions: Vec<EdgeContribution>,
    /// Extended real: `+inf` iff some contribution is infinite.
    pub total: f64,
    pub finite: bool,
}

/// The four energies of a mesh. `bobenko` is `None` for meshes with boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySummary {
    pub bending: f64,
    pub seung_nelson: f64,
    pub ghds: f64,
    pub bobenko: Option<f64>,
}

struct PairGeometry {
    edge_id: usize,
    v: [usize; 2],
    k: usize,
    l: usize,
    nk: Point3,
    nl: Point3,
    qk: Point3,
    ql: Point3,
    l_kl: f64,
    d_kl: f64,
    alpha: f64,
    normal_diff: f64,
}

fn pair_geometry(mesh: &IndexedMesh, adj: &EdgeAdjacency) -> Result<Vec<PairGeometry>, MeshError> {
    if !adj.orientation_consistent() {
        let e = adj
            .edges()
            .iter()
            .find(|e| matches!(e.faces, EdgeFaces::Interior { consistent: false, .. }))
            .expect("inconsistent adjacency has an inconsistent edge");
        return Err(MeshError::InconsistentOrientation(e.v[0], e.v[1]));
    }
    let normals = mesh.normals()?;
    let circ = mesh.circumdata()?;
    Ok(adj
        .interior_edges()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(edge_id, e)| {
            let EdgeFaces::Interior { k, l, .. } = e.faces else {
                unreachable!()
            };
            let d = dihedral_from_normals(&normals[k], &normals[l]);
            PairGeometry {
                edge_id,
                v: e.v,
                k,
                l,
                nk: normals[k],
                nl: normals[l],
                qk: circ[k].q,
                ql: circ[l].q,
                l_kl: (mesh.vertices[e.v[0]] - mesh.vertices[e.v[1]]).norm(),
                d_kl: (circ[k].q - circ[l].q).norm(),
                alpha: d.alpha,
                normal_diff: d.normal_diff,
            }
        })
        .collect())
}

/// `(l / d) * w` with the zero and infinite branches: zero when the normals
/// agree or the edge is empty, infinite when the circumcenters coincide
/// across a genuine fold.
fn weighted(l: f64, d: f64, normal_diff: f64, w: f64, tol: f64) -> f64 {
    if l == 0.0 || normal_diff == 0.0 {
        0.0
    } else if d >= tol {
        l / d * w
    } else if normal_diff <= NORMAL_DIFF_ZERO {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn tol_cospherical(mesh: &IndexedMesh) -> f64 {
    COSPHERICAL_RATIO * mesh.size()
}

/// `E(T) = sum (l_KL / d_KL) |n(K) - n(L)|^2`.
pub fn bending_energy(mesh: &IndexedMesh, adj: &EdgeAdjacency) -> Result<EnergyBreakdown, MeshError> {
    let tol = tol_cospherical(mesh);
    let contributions: Vec<EdgeContribution> = pair_geometry(mesh, adj)?
        .into_iter()
        .map(|p| EdgeContribution {
            edge_id: p.edge_id,
            v0: p.v[0],
            v1: p.v[1],
            tri_k: p.k,
            tri_l: p.l,
            l_kl: p.l_kl,
            d_kl: p.d_kl,
            alpha: p.alpha,
            normal_diff: p.normal_diff,
            value: weighted(p.l_kl, p.d_kl, p.normal_diff, p.normal_diff * p.normal_diff, tol),
        })
        .collect();
    let total = contributions.iter().map(|c| c.value).collect::<KahanSum>().total();
    Ok(EnergyBreakdown {
        contributions,
        total,
        finite: total.is_finite(),
    })
}

/// `E^SN = sum |n(K) - n(L)|^2`.
pub fn seung_nelson_energy(mesh: &IndexedMesh, adj: &EdgeAdjacency) -> Result<f64, MeshError> {
    Ok(pair_geometry(mesh, adj)?
        .iter()
        .map(|p| p.normal_diff * p.normal_diff)
        .collect::<KahanSum>()
        .total())
}

/// `E^GHDS = sum (l_KL / d_KL) alpha_KL^2`, same branches as `E`.
pub fn ghds_energy(mesh: &IndexedMesh, adj: &EdgeAdjacency) -> Result<f64, MeshError> {
    let tol = tol_cospherical(mesh);
    Ok(pair_geometry(mesh, adj)?
        .iter()
        .map(|p| weighted(p.l_kl, p.d_kl, p.normal_diff, p.alpha * p.alpha, tol))
        .collect::<KahanSum>()
        .total())
}

/// `E^B = sum beta_KL - pi * #vertices` for closed meshes, `None` otherwise.
///
/// `beta_KL` is the exterior intersection angle of the two circumcircles,
/// measured at the edge endpoint `u = v0`. `K` runs `u -> v` and `L` runs
/// `v -> u`; with `t_K = n_K x (u - q_K)` and `t_L = -n_L x (u - q_L)` the
/// angle is `pi - angle(t_K, t_L)`. In a flat configuration this is
/// `|pi - a - d|` for the angles `a`, `d` opposite the edge, so a flat
/// Delaunay fan around an interior vertex sums to `2 pi`.
pub fn bobenko_energy(mesh: &IndexedMesh, adj: &EdgeAdjacency) -> Result<Option<f64>, EnergyError> {
    if !adj.is_closed() {
        return Ok(None);
    }
    let pairs = pair_geometry(mesh, adj)?;
    let mut sum = KahanSum::new();
    for p in &pairs {
        let u = mesh.vertices[p.v[0]];
        let tk = p.nk.cross(&(u - p.qk));
        let tl = -p.nl.cross(&(u - p.ql));
        let scale = (u - p.qk).norm().max((u - p.ql).norm());
        if tk.norm() <= 1e-12 * scale || tl.norm() <= 1e-12 * scale {
            return Err(EnergyError::CosphericalPair(p.v[0], p.v[1]));
        }
        sum.add(PI - tk.cross(&tl).norm().atan2(tk.dot(&tl)));
    }
    let n = mesh.used_vertices().len() as f64;
    Ok(Some(sum.total() - PI * n))
}

/// All four energies of `mesh`.
pub fn all_energies(mesh: &IndexedMesh) -> Result<EnergySummary, EnergyError> {
    let adj = build_adjacency(mesh)?;
    Ok(EnergySummary {
        bending: bending_energy(mesh, &adj)?.total,
        seung_nelson: seung_nelson_energy(mesh, &adj)?,
        ghds: ghds_energy(mesh, &adj)?,
        bobenko: bobenko_energy(mesh, &adj)?,
    })
}

/// CSV with header `edge_id,v0,v1,tri_K,tri_L,l_KL,d_KL,alpha,normal_diff,contribution`.
pub fn energy_csv(breakdown: &EnergyBreakdown) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if breakdown.contributions.is_empty() {
        w.write_record(CSV_HEADER).expect("in-memory write");
    }
    for c in &breakdown.contributions {
        w.serialize(c).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

pub const CSV_HEADER: [&str; 10] = [
    "edge_id",
    "v0",
    "v1",
    "tri_K",
    "tri_L",
    "l_KL",
    "d_KL",
    "alpha",
    "normal_diff",
    "contribution",
];

pub fn parse_energy_csv(text: &str) -> Result<Vec<EdgeContribution>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect()
}
