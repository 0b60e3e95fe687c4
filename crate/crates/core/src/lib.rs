//! Stereo disparity estimation by multi-scale hierarchical block matching.
//!
//! Both images are reduced into a binomial pyramid. The coarsest level is
//! matched exhaustively with zero-mean normalized cross-correlation; every
//! finer level reuses the upsampled result so that confident pixels search
//! only three candidates. Low-confidence pixels are re-voted over their 3x3
//! neighborhood and then median filtered against confident neighbors.
//!
//! ```
//! use msibm::{run_pipeline, synthetic::shifted_pair, Levels, MatchConfig};
//!
//! let (left, right) = shifted_pair(96, 64, 6, 7, 1);
//! let cfg = MatchConfig::default()
//!     .with_d_max(16)
//!     .with_block(7)
//!     .with_levels(Levels::Fixed(1));
//! let out = run_pipeline(&left, &right, &cfg).unwrap();
//! assert_eq!(out.disparity.get(32, 48), 6.0);
//! ```

pub mod baseline;
pub mod codec;
pub mod config;
pub mod cost;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod matcher;
pub mod pyramid;
pub mod raster;
pub mod synthetic;

pub use baseline::{baseline_bm, BaselineOutput};
pub use config::{Levels, MatchConfig, SignConvention};
pub use cost::{zncc, LevelCost};
pub use error::{CodecError, ConfigError, CostError, EvalError, MatchError, PyramidError, RasterError};
pub use eval::{compare, evaluate, ComparisonSummary, EvalReport, TraceSummary};
pub use matcher::{
    match_coarsest, match_level_with_prior, refine_level, run_pipeline, select_with_prior,
    PipelineOutput, PipelineTrace,
};
pub use pyramid::{build_pyramid, StereoPyramid};
pub use raster::{CostMap, DisparityMap, GrayImage, INVALID_DISPARITY};

/// Library name and version, recorded in run manifests.
pub const VERSION: &str = concat!("msibm ", env!("CARGO_PKG_VERSION"));
