use std::path::PathBuf;

use thiserror::Error;

use crate::closed_form::DomainError;
use crate::policy::PolicyId;
use crate::shs::ShsError;
use crate::sim::SimError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("policy {0} has no closed form in scope; use simulate")]
    UnsupportedPolicy(PolicyId),
    #[error(transparent)]
    Shs(#[from] ShsError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("empty sweep")]
    EmptySweep,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
