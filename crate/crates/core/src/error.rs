use std::io;

use thiserror::Error;

/// Errors produced anywhere in the fusion, training and I/O stack.
#[derive(Debug, Error)]
pub enum Error {
    /// Frames, planes or weight maps disagree on count or dimensions.
    #[error("stack shape error: {0}")]
    StackShape(String),
    /// Tensor or kernel shapes do not line up.
    #[error("shape error: {0}")]
    Shape(String),
    #[error("metadata error: {0}")]
    Metadata(String),
    #[error("config error: {0}")]
    Config(String),
    /// A LUT or checkpoint file is malformed.
    #[error("format error: {0}")]
    Format(String),
    /// Weights are negative or not normalized where they must be.
    #[error("weight domain error: {0}")]
    WeightDomain(String),
    #[error("numerics error: {0}")]
    Numerics(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl From<image::ImageError> for Error {
    fn from(err: image::ImageError) -> Self {
        match err {
            image::ImageError::IoError(e) => Error::Io(e),
            other => Error::Io(io::Error::new(io::ErrorKind::InvalidData, other.to_string())),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
