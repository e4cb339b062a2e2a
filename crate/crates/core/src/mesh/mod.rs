//! Geometry kernel: indexed triangle meshes, edge adjacency, orientation,
//! circumballs, dihedral angles and push-forward of flat meshes.
//!
//! All operations are pure functions of immutable inputs.

mod adjacency;
mod geometry;
mod manifold;
pub mod spatial;

pub use adjacency::{build_adjacency, orient_consistently, Edge, EdgeAdjacency, EdgeFaces};
pub use geometry::{Circumdata, Point3, Triangle, DEGENERATE_AREA_RATIO};
pub use manifold::{check_manifold, ManifoldReport, ManifoldViolation};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("degenerate triangle (area below tolerance)")]
    DegenerateTriangle,
    #[error("triangle {triangle} references vertex {index}, mesh has {count} vertices")]
    InvalidIndex {
        triangle: usize,
        index: usize,
        count: usize,
    },
    #[error("edge ({0}, {1}) has {2} incident triangles")]
    NonManifoldEdge(usize, usize, usize),
    #[error("mesh is not orientable")]
    NonOrientable,
    #[error("edge ({0}, {1}) is a boundary edge")]
    BoundaryEdge(usize, usize),
    #[error("edge ({0}, {1}) not found in mesh")]
    UnknownEdge(usize, usize),
    #[error("adjacent triangles are not like-oriented across edge ({0}, {1})")]
    InconsistentOrientation(usize, usize),
    #[error("non-finite vertex coordinate at vertex {0}")]
    NonFiniteVertex(usize),
}

/// Vertex coordinates plus oriented triangle index triples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IndexedMesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[usize; 3]>,
}

impl IndexedMesh {
    /// Builds a mesh, validating indices and coordinates.
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let mesh = Self {
            vertices,
            triangles,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        if let Some(i) = self
            .vertices
            .iter()
            .position(|v| !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()))
        {
            return Err(MeshError::NonFiniteVertex(i));
        }
        let n = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i >= n) {
                return Err(MeshError::InvalidIndex {
                    triangle: t,
                    index,
                    count: n,
                });
            }
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, t: usize) -> Triangle {
        let [a, b, c] = self.triangles[t];
        Triangle::new(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn triangles_iter(&self) -> impl Iterator<Item = Triangle> + '_ {
        (0..self.triangles.len()).map(move |t| self.triangle(t))
    }

    /// Maximum triangle diameter, `size(T)`.
    pub fn size(&self) -> f64 {
        self.triangles_iter().map(|t| t.diameter()).fold(0.0, f64::max)
    }

    /// Per-triangle unit normals.
    pub fn normals(&self) -> Result<Vec<Point3>, MeshError> {
        self.triangles_iter().map(|t| t.normal()).collect()
    }

    /// Per-triangle circumballs.
    pub fn circumdata(&self) -> Result<Vec<Circumdata>, MeshError> {
        self.triangles_iter().map(|t| t.circumcenter()).collect()
    }

    /// Indices of vertices referenced by at least one triangle, ascending.
    pub fn used_vertices(&self) -> Vec<usize> {
        let mut used = vec![false; self.vertices.len()];
        for tri in &self.triangles {
            for &v in tri {
                used[v] = true;
            }
        }
        (0..used.len()).filter(|&i| used[i]).collect()
    }

    /// Reverses the winding of every triangle.
    pub fn flip_all(&mut self) {
        for tri in &mut self.triangles {
            tri.swap(1, 2);
        }
    }

    /// Applies `f` to every vertex.
    pub fn map_vertices(&self, f: impl Fn(&Point3) -> Point3) -> IndexedMesh {
        IndexedMesh {
            vertices: self.vertices.iter().map(f).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Sum of triangle areas.
    pub fn area(&self) -> f64 {
        self.triangles_iter().map(|t| t.area()).sum()
    }

    /// Drops unreferenced vertices and renumbers the rest, preserving order.
    pub fn compact(&self) -> IndexedMesh {
        let used = self.used_vertices();
        let mut remap = vec![usize::MAX; self.vertices.len()];
        for (new, &old) in used.iter().enumerate() {
            remap[old] = new;
        }
        IndexedMesh {
            vertices: used.iter().map(|&i| self.vertices[i]).collect(),
            triangles: self
                .triangles
                .iter()
                .map(|t| [remap[t[0]], remap[t[1]], remap[t[2]]])
                .collect(),
        }
    }
}

/// Dihedral data of an interior edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dihedral {
    /// Angle between the like-oriented normals, in `[0, pi]`.
    pub alpha: f64,
    /// `|n(K) - n(L)|`, equal to `2 sin(alpha / 2)`.
    pub normal_diff: f64,
}

/// Dihedral angle and normal difference across the edge `(u, v)`.
pub fn dihedral(
    mesh: &IndexedMesh,
    adjacency: &EdgeAdjacency,
    u: usize,
    v: usize,
) -> Result<Dihedral, MeshError> {
    let edge = adjacency
        .find(u, v)
        .ok_or(MeshError::UnknownEdge(u.min(v), u.max(v)))?;
    let (k, l) = match edge.faces {
        EdgeFaces::Boundary(_) => return Err(MeshError::BoundaryEdge(edge.v[0], edge.v[1])),
        EdgeFaces::Interior { k, l, consistent } => {
            if !consistent {
                return Err(MeshError::InconsistentOrientation(edge.v[0], edge.v[1]));
            }
            (k, l)
        }
    };
    let nk = mesh.triangle(k).normal()?;
    let nl = mesh.triangle(l).normal()?;
    Ok(dihedral_from_normals(&nk, &nl))
}

pub fn dihedral_from_normals(nk: &Point3, nl: &Point3) -> Dihedral {
    Dihedral {
        alpha: nk.cross(nl).norm().atan2(nk.dot(nl)),
        normal_diff: (nk - nl).norm(),
    }
}

/// Lifts a flat mesh (in the `z = 0` plane) by a height function:
/// `(x, y, 0) -> (x, y, h(x, y))`, keeping the combinatorics.
pub fn push_forward(flat: &IndexedMesh, h: impl Fn(f64, f64) -> f64) -> IndexedMesh {
    flat.map_vertices(|p| Point3::new(p.x, p.y, h(p.x, p.y)))
}
