//! Constructive triangulations: θ-skewed grids, planar Delaunay, convex and
//! sphere hulls, restricted surface Delaunay, protected point augmentation and
//! the non-Delaunay cylinder strip.

mod counterexample;
mod hull;
mod planar;
mod protected;
mod restricted;
mod theta_grid;

pub use counterexample::{counterexample_cylinder, counterexample_flat, CounterexampleSpec};
pub use hull::{convex_hull, icosahedron, icosphere, lifted_delaunay, sphere_hull};
pub use planar::{planar_delaunay, PlanarDelaunay};
pub use protected::{augment_protected, augment_protected_with_retry, AugmentOptions, Augmented};
pub use restricted::{restricted_delaunay, RestrictedOptions};
pub use theta_grid::{theta_grid, theta_grid_flat, ThetaGridSpec, DEFAULT_ADMISSIBILITY_C};

use thiserror::Error;

use crate::mesh::MeshError;
use crate::quality::QualityError;
use crate::surfaces::SurfaceError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("theta = {theta} not admissible: need {lower} < |theta| <= 1/2")]
    InadmissibleTheta { theta: f64, lower: f64 },
    #[error("no lattice cell fits inside the domain")]
    EmptyDomain,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("{0} edges have cocircular neighbours")]
    AmbiguousCocircular(usize),
    #[error("points {0:?} are coplanar within tolerance")]
    CoplanarQuadruple([usize; 4]),
    #[error("some open hemisphere contains no point")]
    HemisphereEmpty,
    #[error("points are not on a common sphere about the origin (point {0})")]
    NotOnSphere(usize),
    #[error("protection margin {margin} below required {required}")]
    InsufficientProtection { margin: f64, required: f64 },
    #[error("restricted Delaunay output is not a manifold: {0}")]
    NonManifoldOutput(String),
    #[error("no admissible insertion candidate (c = {c})")]
    EmptyCandidateSet { c: f64 },
    #[error("column count {0} is not an even integer")]
    NonIntegerColumns(f64),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Quality(#[from] QualityError),
}
