//! Multi-scale hierarchical block matching.
//!
//! The coarsest pyramid level is matched by exhaustive search, refined by
//! neighborhood cost voting and median filtered. Each finer level then takes
//! the upsampled coarse result as a prior: pixels whose upsampled cost
//! exceeds `beta` are searched only at `prior - 1 ..= prior + 1`, the rest
//! fall back to exhaustive search. Refinement and selective median follow
//! at every level.

mod engine;
mod median;
mod upsample;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::MatchConfig;
use crate::cost::LevelCost;
use crate::error::MatchError;
use crate::pyramid::build_pyramid;
use crate::raster::{CostMap, DisparityMap, GrayImage};

pub use engine::LevelCounts;
pub use median::{selective_median, MedianStats};
pub use upsample::upsample_prior;

use engine::{run_level, Selection};

fn check_dims(cost: &LevelCost, dims: (usize, usize)) -> Result<(), MatchError> {
    if cost.dims() != dims {
        return Err(MatchError::DimensionMismatch {
            expected: cost.dims(),
            got: dims,
        });
    }
    Ok(())
}

/// Exhaustive search over `[0, d_max]`: best disparity and its cost per
/// pixel, ties going to the smallest disparity.
pub fn match_coarsest(cost: &LevelCost) -> (DisparityMap, CostMap) {
    let out = run_level(cost, &Selection::Full, None);
    (out.d, out.c)
}

/// Re-selects every pixel with cost at or below `alpha` from the summed
/// disparity-space vectors of its 3x3 neighborhood. The stored cost is the
/// neighborhood mean, so it stays comparable to later thresholds.
pub fn refine_level(
    cost: &LevelCost,
    d: &DisparityMap,
    c: &CostMap,
    alpha: f64,
) -> Result<(DisparityMap, CostMap), MatchError> {
    check_dims(cost, d.dims())?;
    check_dims(cost, c.dims())?;
    let out = run_level(cost, &Selection::Given { d, c }, Some(alpha));
    Ok((out.d, out.c))
}

/// Prior-guided selection only, without refinement or median.
pub fn select_with_prior(
    cost: &LevelCost,
    d_hat: &DisparityMap,
    c_hat: &CostMap,
    beta: f64,
) -> Result<(DisparityMap, CostMap), MatchError> {
    check_dims(cost, d_hat.dims())?;
    check_dims(cost, c_hat.dims())?;
    let out = run_level(cost, &Selection::Prior { d_hat, c_hat, beta }, None);
    Ok((out.d, out.c))
}

/// Prior-guided selection followed by refinement and selective median.
pub fn match_level_with_prior(
    cost: &LevelCost,
    d_hat: &DisparityMap,
    c_hat: &CostMap,
    beta: f64,
    alpha: f64,
) -> Result<(DisparityMap, CostMap), MatchError> {
    check_dims(cost, d_hat.dims())?;
    check_dims(cost, c_hat.dims())?;
    let out = run_level(cost, &Selection::Prior { d_hat, c_hat, beta }, Some(alpha));
    let (d, _) = selective_median(&out.d, &out.c, alpha)?;
    Ok((d, out.c))
}

/// Exact counters for one pyramid level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelTrace {
    pub level: u32,
    pub width: usize,
    pub height: usize,
    pub d_max: u32,
    pub block: u32,
    pub pixels: u64,
    #[serde(flatten)]
    pub counts: LevelCounts,
    pub median_candidates: u64,
    pub median_changed: u64,
}

impl LevelTrace {
    pub fn total_evals(&self) -> u64 {
        self.counts.total_evals()
    }

    pub fn trust_fraction(&self) -> f64 {
        self.counts.trusted_pixels as f64 / self.pixels as f64
    }

    /// `window + full + refine` evaluations, checked against the bound
    /// `3 T + (d_max + 1)(P - T) + R`.
    pub fn within_eval_bound(&self) -> bool {
        let t = self.counts.trusted_pixels;
        let bound = 3 * t
            + (u64::from(self.d_max) + 1) * (self.pixels - t)
            + self.counts.refine_evals;
        self.counts.full_search_pixels + t == self.pixels
            && self.counts.full_search_evals
                == (u64::from(self.d_max) + 1) * self.counts.full_search_pixels
            && self.counts.window_evals <= 3 * t
            && self.counts.max_window_evals <= 3
            && self.total_evals() <= bound
    }
}

/// Wall-clock seconds spent per stage of one level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelTiming {
    pub level: u32,
    pub prepare_s: f64,
    pub upsample_s: f64,
    pub match_s: f64,
    pub median_s: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineTrace {
    /// Coarsest level first.
    pub levels: Vec<LevelTrace>,
    pub pyramid_s: f64,
    pub timings: Vec<LevelTiming>,
}

impl PipelineTrace {
    pub fn total_evals(&self) -> u64 {
        self.levels.iter().map(LevelTrace::total_evals).sum()
    }

    pub fn total_seconds(&self) -> f64 {
        self.pyramid_s
            + self
                .timings
                .iter()
                .map(|t| t.prepare_s + t.upsample_s + t.match_s + t.median_s)
                .sum::<f64>()
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub disparity: DisparityMap,
    pub cost: CostMap,
    pub trace: PipelineTrace,
}

/// Full coarse-to-fine run, returning level-0 maps and a complete trace.
pub fn run_pipeline(
    left: &GrayImage,
    right: &GrayImage,
    cfg: &MatchConfig,
) -> Result<PipelineOutput, MatchError> {
    cfg.validate()?;
    let start = Instant::now();
    let pyramid = build_pyramid(left, right, cfg)?;
    let mut trace = PipelineTrace {
        pyramid_s: start.elapsed().as_secs_f64(),
        ..PipelineTrace::default()
    };

    let mut current: Option<(DisparityMap, CostMap)> = None;
    for k in (0..=pyramid.coarsest()).rev() {
        let level = pyramid.level(k);
        let mut timing = LevelTiming {
            level: k as u32,
            ..LevelTiming::default()
        };

        let t = Instant::now();
        let cost = LevelCost::from_level(level, cfg);
        timing.prepare_s = t.elapsed().as_secs_f64();

        let out = match current.take() {
            None => {
                let t = Instant::now();
                let out = run_level(&cost, &Selection::Full, Some(cfg.alpha));
                timing.match_s = t.elapsed().as_secs_f64();
                out
            }
            Some((d_coarse, c_coarse)) => {
                let t = Instant::now();
                let (d_hat, c_hat) = upsample_prior(&d_coarse, &c_coarse, level.dims())?;
                timing.upsample_s = t.elapsed().as_secs_f64();
                let t = Instant::now();
                let selection = Selection::Prior {
                    d_hat: &d_hat,
                    c_hat: &c_hat,
                    beta: cfg.beta,
                };
                let out = run_level(&cost, &selection, Some(cfg.alpha));
                timing.match_s = t.elapsed().as_secs_f64();
                out
            }
        };

        let t = Instant::now();
        let (d, median) = selective_median(&out.d, &out.c, cfg.alpha)?;
        timing.median_s = t.elapsed().as_secs_f64();

        let (w, h) = level.dims();
        trace.levels.push(LevelTrace {
            level: k as u32,
            width: w,
            height: h,
            d_max: level.d_max,
            block: level.block,
            pixels: (w * h) as u64,
            counts: out.counts,
            median_candidates: median.candidates,
            median_changed: median.changed,
        });
        trace.timings.push(timing);
        current = Some((d, out.c));
    }

    let (disparity, cost) = current.expect("pyramid has at least one level");
    Ok(PipelineOutput {
        disparity,
        cost,
        trace,
    })
}
