use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("raster dimensions must be positive, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("raster buffer length mismatch: need {needed}, got {got}")]
    LengthMismatch { needed: usize, got: usize },
    #[error("non-finite intensity at index {index}")]
    NonFinite { index: usize },
    #[error("cost {value} at index {index} outside [-1, 1]")]
    CostOutOfRange { index: usize, value: f64 },
}

/// Failures while decoding or encoding PGM/PPM, PFM and calib files.
#[derive(Debug, Error)]
pub enum CodecError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("maxval {0} outside [1, 65535]")]
    BadMaxval(u64),
    #[error("bad magic number {0:?}")]
    BadMagic(String),
    #[error("PFM scale factor must be nonzero")]
    ZeroScale,
    #[error("sample value {value} exceeds maxval {maxval}")]
    SampleOutOfRange { value: u64, maxval: u64 },
    #[error("negative ground-truth disparity {value} at index {index}")]
    NegativeDisparity { index: usize, value: f32 },
    #[error("missing key {0:?}")]
    MissingKey(&'static str),
    #[error("invalid value for key {key:?}: {value:?}")]
    InvalidValue { key: String, value: String },
    #[error(transparent)]
    Raster(#[from] RasterError),
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("maximum disparity must be at least 1")]
    ZeroDisparity,
    #[error("block size {0} must be odd and at least 3")]
    BadBlock(u32),
    #[error("alpha {0} must lie strictly between 0 and 1")]
    BadAlpha(f64),
    #[error("beta {0} must lie strictly between 0 and 1")]
    BadBeta(f64),
    #[error("degeneracy epsilon {0} must be positive and finite")]
    BadEpsilon(f64),
}

#[derive(Debug, Error)]
pub enum PyramidError {
    #[error("image of {width}x{height} is too small to downsample")]
    TooSmall { width: usize, height: usize },
    #[error("left image is {left:?} but right image is {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{levels} levels too many: {reason}")]
    TooManyLevels { levels: u32, reason: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("pixel ({row}, {col}) outside {width}x{height} image")]
    OutOfBounds {
        row: usize,
        col: usize,
        width: usize,
        height: usize,
    },
    #[error("disparity {z} outside [0, {d_max}]")]
    DisparityOutOfRange { z: usize, d_max: usize },
}

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("expected {expected:?} maps, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error(transparent)]
    Pyramid(#[from] PyramidError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("disparity map is {disparity:?} but ground truth is {ground_truth:?}")]
    DimensionMismatch {
        disparity: (usize, usize),
        ground_truth: (usize, usize),
    },
    #[error("disparity scale {0} must be positive and finite")]
    BadScale(f64),
}
