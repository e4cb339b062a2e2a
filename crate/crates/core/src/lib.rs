//! Discrete Willmore energy of triangulated surfaces: mesh kernel, energies,
//! quality certificates, analytic surfaces, mesh generators, segment
//! traversal and a reproducible experiment harness.

pub mod mesh;
pub mod energy;
pub mod surfaces;
pub mod quality;
pub mod generators;
pub mod traversal;
pub mod harness;
