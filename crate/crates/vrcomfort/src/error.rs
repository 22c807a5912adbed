use std::io;
use std::path::{Path, PathBuf};

use vrcomfort_core::dataset::DatasetError;
use vrcomfort_core::forest::ForestError;
use vrcomfort_core::simulator::SimError;

use crate::model_file::ModelFileError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: line {line}: {message}", path.display())]
    Csv { path: PathBuf, line: u64, message: String },
    #[error("{}: line {line}: {message}", path.display())]
    Config { path: PathBuf, line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Model { path: PathBuf, source: ModelFileError },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn io(path: &Path, source: io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn csv(path: &Path, line: u64, message: impl Into<String>) -> Self {
        Error::Csv { path: path.to_path_buf(), line, message: message.into() }
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
