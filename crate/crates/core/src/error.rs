use thiserror::Error;

/// Errors raised by the gapfuse library.
#[derive(Debug, Error)]
pub enum Error {
    /// Two rasters (or subimages) that must agree in dimensions do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A decomposition was asked for more levels than the raster supports.
    #[error("depth {requested} exceeds maximum {max} for a {width}x{height} raster")]
    Depth {
        requested: usize,
        max: usize,
        width: usize,
        height: usize,
    },

    /// Input data violates a value invariant (negative or non-finite intensity, etc.).
    #[error("invalid input: {0}")]
    Input(String),

    /// A configuration or generator parameter is out of range.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// A statistic was requested over an empty sample.
    #[error("empty sample: {0}")]
    EmptySample(String),

    /// A synthetic pair failed the minimum valid-pixel selection rule.
    #[error("pair rejected: image {image} has {valid} valid pixels, {required} required")]
    Rejected {
        image: &'static str,
        valid: usize,
        required: usize,
    },

    /// Grid file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
