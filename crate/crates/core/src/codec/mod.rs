//! Readers and writers for the image, ground-truth and calibration files
//! the pipeline consumes and emits.

mod calib;
mod pfm;
mod pnm;

pub use calib::{parse_calib, read_calib, CalibInfo};
pub use pfm::{
    decode_pfm, decode_pfm_samples, encode_disparity_pfm, encode_pfm_samples, read_pfm,
    read_pfm_disparity, write_cost_pfm, write_pfm, Endian, GroundTruthDisparity,
};
pub use pnm::{
    decode_pnm, encode_disparity_pgm, encode_pgm, read_pgm_pnm, write_disparity_pgm, write_pgm,
};
