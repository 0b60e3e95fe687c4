//! Per-level selection and refinement.
//!
//! A level is processed in fixed-height row bands, in parallel. Within a
//! band rows are visited top to bottom; each row's disparity-space entries
//! live in a three-row ring so refinement of row `r` can reuse whatever the
//! selection of rows `r - 1 ..= r + 1` already evaluated. Band height is a
//! constant, so evaluation counts do not depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{LevelCost, Request, RowScratch};
use crate::raster::{is_valid_disparity, CostMap, DisparityMap};

pub(crate) const BAND_ROWS: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    /// Pixels searched only in the window around their prior.
    pub trusted_pixels: u64,
    pub window_evals: u64,
    /// Most entries evaluated for any single trusted pixel.
    pub max_window_evals: u64,
    pub full_search_pixels: u64,
    pub full_search_evals: u64,
    /// Pixels whose cost was at or below alpha and were re-selected.
    pub refined_pixels: u64,
    pub refine_evals: u64,
}

impl LevelCounts {
    pub fn total_evals(&self) -> u64 {
        self.window_evals + self.full_search_evals + self.refine_evals
    }

    fn merge(&mut self, other: &LevelCounts) {
        self.trusted_pixels += other.trusted_pixels;
        self.window_evals += other.window_evals;
        self.max_window_evals = self.max_window_evals.max(other.max_window_evals);
        self.full_search_pixels += other.full_search_pixels;
        self.full_search_evals += other.full_search_evals;
        self.refined_pixels += other.refined_pixels;
        self.refine_evals += other.refine_evals;
    }
}

pub(crate) enum Selection<'a> {
    /// Search `[0, d_max]` at every pixel.
    Full,
    /// Search `d_hat - 1 ..= d_hat + 1` where `c_hat > beta`, else full.
    Prior {
        d_hat: &'a DisparityMap,
        c_hat: &'a CostMap,
        beta: f64,
    },
    /// Take disparities and costs as given; no entries evaluated.
    Given {
        d: &'a DisparityMap,
        c: &'a CostMap,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Known {
    Nothing,
    Window { lo: usize, hi: usize },
    All,
}

struct RowSlot {
    row: Option<usize>,
    known: Vec<Known>,
    values: Vec<f64>,
}

impl RowSlot {
    fn new(width: usize, stride: usize) -> Self {
        Self {
            row: None,
            known: vec![Known::Nothing; width],
            values: vec![0.0; width * stride],
        }
    }

    fn reset(&mut self, row: usize) {
        self.row = Some(row);
        self.known.fill(Known::Nothing);
    }
}

#[inline]
fn argmax_range(values: &[f64], lo: usize, hi: usize) -> (usize, f64) {
    let mut best = (lo, values[lo]);
    for (z, &v) in values.iter().enumerate().take(hi + 1).skip(lo + 1) {
        if v > best.1 {
            best = (z, v);
        }
    }
    best
}

pub(crate) struct LevelOutput {
    pub d: DisparityMap,
    pub c: CostMap,
    pub counts: LevelCounts,
}

struct BandOutput {
    d: Vec<f32>,
    c: Vec<f64>,
    counts: LevelCounts,
}

struct Band<'a> {
    cost: &'a LevelCost,
    selection: &'a Selection<'a>,
    alpha: Option<f64>,
    width: usize,
    height: usize,
    stride: usize,
    r0: usize,
    r1: usize,
    ring: [RowSlot; 3],
    scratch: RowScratch,
    requests: Vec<Request>,
    windowed: Vec<bool>,
    d: Vec<f32>,
    c: Vec<f64>,
    counts: LevelCounts,
}

impl<'a> Band<'a> {
    fn slot_mut(&mut self, row: usize) -> &mut RowSlot {
        &mut self.ring[row % 3]
    }

    /// Makes sure the ring slot for `row` holds that row, discarding
    /// whatever it held before.
    fn claim(&mut self, row: usize) {
        let slot = self.slot_mut(row);
        if slot.row != Some(row) {
            slot.reset(row);
        }
    }

    fn select_row(&mut self, row: usize) {
        self.claim(row);
        let w = self.width;
        let d_max = self.cost.d_max();
        let out = (row - self.r0) * w;
        let selection = self.selection;
        self.requests.clear();
        self.windowed.clear();
        match selection {
            Selection::Given { d, c } => {
                for col in 0..w {
                    self.d[out + col] = d.get(row, col);
                    self.c[out + col] = c.get(row, col);
                }
                return;
            }
            Selection::Full => {
                for col in 0..w {
                    self.requests.push(Request { col, lo: 0, hi: d_max });
                    self.windowed.push(false);
                }
            }
            Selection::Prior { d_hat, c_hat, beta } => {
                for col in 0..w {
                    let prior = d_hat.get(row, col);
                    let mut req = Request { col, lo: 0, hi: d_max };
                    let mut windowed = false;
                    if c_hat.get(row, col) > *beta && is_valid_disparity(prior) {
                        let center = prior as i64;
                        let lo = (center - 1).max(0);
                        let hi = (center + 1).min(d_max as i64);
                        if lo <= hi {
                            req.lo = lo as usize;
                            req.hi = hi as usize;
                            windowed = true;
                        }
                    }
                    self.requests.push(req);
                    self.windowed.push(windowed);
                }
            }
        }

        let slot = &mut self.ring[row % 3];
        self.cost
            .fill_row(row, &self.requests, &mut slot.values, &mut self.scratch);
        for (req, &windowed) in self.requests.iter().zip(&self.windowed) {
            let n = (req.hi - req.lo + 1) as u64;
            if windowed {
                self.counts.trusted_pixels += 1;
                self.counts.window_evals += n;
                self.counts.max_window_evals = self.counts.max_window_evals.max(n);
                slot.known[req.col] = Known::Window {
                    lo: req.lo,
                    hi: req.hi,
                };
            } else {
                self.counts.full_search_pixels += 1;
                self.counts.full_search_evals += n;
                slot.known[req.col] = Known::All;
            }
            let values = &slot.values[req.col * self.stride..][..self.stride];
            let (z, best) = argmax_range(values, req.lo, req.hi);
            self.d[out + req.col] = z as f32;
            self.c[out + req.col] = best;
        }
    }

    fn refine_row(&mut self, row: usize, alpha: f64) {
        let w = self.width;
        let d_max = self.cost.d_max();
        let out = (row - self.r0) * w;
        let bad: Vec<usize> = (0..w).filter(|&col| self.c[out + col] <= alpha).collect();
        if bad.is_empty() {
            return;
        }
        self.counts.refined_pixels += bad.len() as u64;

        let rows = row.saturating_sub(1)..=(row + 1).min(self.height - 1);
        for nr in rows.clone() {
            self.claim(nr);
            let slot = &mut self.ring[nr % 3];
            self.requests.clear();
            let mut last_col = None;
            for &bc in &bad {
                for col in bc.saturating_sub(1)..=(bc + 1).min(w - 1) {
                    if last_col.is_some_and(|l| col <= l) {
                        continue;
                    }
                    last_col = Some(col);
                    match slot.known[col] {
                        Known::All => {}
                        Known::Nothing => self.requests.push(Request { col, lo: 0, hi: d_max }),
                        Known::Window { lo, hi } => {
                            if lo > 0 {
                                self.requests.push(Request { col, lo: 0, hi: lo - 1 });
                            }
                            if hi < d_max {
                                self.requests.push(Request { col, lo: hi + 1, hi: d_max });
                            }
                        }
                    }
                    slot.known[col] = Known::All;
                }
            }
            if !self.requests.is_empty() {
                self.counts.refine_evals +=
                    self.cost
                        .fill_row(nr, &self.requests, &mut slot.values, &mut self.scratch);
            }
        }

        let mut summed = vec![0.0; self.stride];
        for &bc in &bad {
            summed.fill(0.0);
            let mut members = 0usize;
            for nr in rows.clone() {
                let slot = &self.ring[nr % 3];
                for col in bc.saturating_sub(1)..=(bc + 1).min(w - 1) {
                    members += 1;
                    let v = &slot.values[col * self.stride..][..self.stride];
                    for (acc, x) in summed.iter_mut().zip(v) {
                        *acc += x;
                    }
                }
            }
            let (z, best) = argmax_range(&summed, 0, d_max);
            self.d[out + bc] = z as f32;
            self.c[out + bc] = (best / members as f64).clamp(-1.0, 1.0);
        }
    }

    fn run(mut self) -> BandOutput {
        for row in self.r0..self.r1 {
            if row == self.r0 {
                self.select_row(row);
            }
            if row + 1 < self.r1 {
                self.select_row(row + 1);
            }
            if let Some(alpha) = self.alpha {
                self.refine_row(row, alpha);
            }
        }
        BandOutput {
            d: self.d,
            c: self.c,
            counts: self.counts,
        }
    }
}

/// Selection followed by optional alpha-gated refinement over a whole level.
pub(crate) fn run_level(cost: &LevelCost, selection: &Selection<'_>, alpha: Option<f64>) -> LevelOutput {
    let (w, h) = cost.dims();
    let stride = cost.d_max() + 1;
    let bands: Vec<BandOutput> = (0..h.div_ceil(BAND_ROWS))
        .into_par_iter()
        .map(|b| {
            let r0 = b * BAND_ROWS;
            let r1 = (r0 + BAND_ROWS).min(h);
            let rows = r1 - r0;
            Band {
                cost,
                selection,
                alpha,
                width: w,
                height: h,
                stride,
                r0,
                r1,
                ring: [
                    RowSlot::new(w, stride),
                    RowSlot::new(w, stride),
                    RowSlot::new(w, stride),
                ],
                scratch: RowScratch::new(cost),
                requests: Vec::with_capacity(w),
                windowed: Vec::with_capacity(w),
                d: vec![0.0; rows * w],
                c: vec![0.0; rows * w],
                counts: LevelCounts::default(),
            }
            .run()
        })
        .collect();

    let mut d = Vec::with_capacity(w * h);
    let mut c = Vec::with_capacity(w * h);
    let mut counts = LevelCounts::default();
    for band in bands {
        d.extend_from_slice(&band.d);
        c.extend_from_slice(&band.c);
        counts.merge(&band.counts);
    }
    cost.add_evaluations(counts.total_evals());
    LevelOutput {
        d: DisparityMap::new(w, h, d).expect("level dims are positive"),
        c: CostMap::new(w, h, c).expect("costs are clamped"),
        counts,
    }
}
