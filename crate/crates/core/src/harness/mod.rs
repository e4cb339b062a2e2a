//! Experiment plumbing: mesh files, key=value configs, convergence sweeps,
//! certification and the traversal lemma suite.

mod certify;
mod config;
mod experiments;
mod io;
mod lemmas;

pub use certify::{certify, CertifyOptions, CertifyReport};
pub use config::{parse_surface, ExperimentKind, ExperimentSpec, GeneratorKind};
pub use experiments::{run_convergence, rows_to_csv, ConvergenceRow, CSV_HEADER};
pub use io::{load_mesh, parse_obj, parse_off, save_mesh, write_off};
pub use lemmas::{verify_lemmas, verify_lemmas_with, LemmaReport, SuiteStats};

use std::path::PathBuf;

use thiserror::Error;

use crate::energy::EnergyError;
use crate::generators::GeneratorError;
use crate::mesh::MeshError;
use crate::quality::QualityError;
use crate::surfaces::SurfaceError;
use crate::traversal::TraversalError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: face with {count} vertices, only triangles are supported")]
    NonTriangleFace { line: usize, count: usize },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Quality(#[from] QualityError),
    #[error(transparent)]
    Traversal(#[from] TraversalError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}
