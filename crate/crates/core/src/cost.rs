//! Zero-mean normalized cross-correlation and disparity-space evaluation.
//!
//! [`zncc`] is the direct two-pass reference. [`LevelCost`] is the kernel the
//! matcher uses: it pads both images once, precomputes per-pixel patch
//! statistics, and evaluates the cross term from column products that are
//! shared between horizontally adjacent pixels at the same disparity. Every
//! path through `LevelCost` sums the column products in the same order, so
//! an entry has the same bits no matter which stage computed it.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::config::{MatchConfig, SignConvention};
use crate::error::CostError;
use crate::pyramid::PyramidLevel;
use crate::raster::GrayImage;

/// Cost reported for degenerate patches and out-of-image candidates.
pub const WORST_COST: f64 = -1.0;

pub const DEFAULT_SIGMA_EPS: f64 = 1e-6;

/// 3x3 eight-connected neighborhood including the center, row-major.
pub const NEIGHBORHOOD_3X3: [(isize, isize); 9] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 0),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PatchStats {
    pub mean: f64,
    /// Root of the mean squared deviation over the patch.
    pub sigma: f64,
}

/// Mean and deviation of the `(2n+1)^2` patch at `center`, replicate padded.
pub fn patch_stats(img: &GrayImage, center: (usize, usize), half: usize) -> PatchStats {
    let (ci, cj) = (center.0 as isize, center.1 as isize);
    let n = half as isize;
    let area = ((2 * half + 1) * (2 * half + 1)) as f64;
    let mut sum = 0.0;
    for a in -n..=n {
        for b in -n..=n {
            sum += img.get_clamped(ci + a, cj + b);
        }
    }
    let mean = sum / area;
    let mut sq = 0.0;
    for a in -n..=n {
        for b in -n..=n {
            let d = img.get_clamped(ci + a, cj + b) - mean;
            sq += d * d;
        }
    }
    PatchStats {
        mean,
        sigma: (sq / area).sqrt(),
    }
}

fn check_center(img: &GrayImage, (row, col): (usize, usize)) -> Result<(), CostError> {
    if row >= img.height() || col >= img.width() {
        return Err(CostError::OutOfBounds {
            row,
            col,
            width: img.width(),
            height: img.height(),
        });
    }
    Ok(())
}

/// ZNCC between the `(2n+1)^2` patches at `center_l` in `left` and
/// `center_r` in `right`, with replicate padding at the borders.
///
/// Returns [`WORST_COST`] if either patch deviation is below `sigma_eps`.
pub fn zncc(
    left: &GrayImage,
    right: &GrayImage,
    center_l: (usize, usize),
    center_r: (usize, usize),
    half: usize,
    sigma_eps: f64,
) -> Result<f64, CostError> {
    check_center(left, center_l)?;
    check_center(right, center_r)?;
    let sl = patch_stats(left, center_l, half);
    let sr = patch_stats(right, center_r, half);
    if sl.sigma < sigma_eps || sr.sigma < sigma_eps {
        return Ok(WORST_COST);
    }
    let n = half as isize;
    let (li, lj) = (center_l.0 as isize, center_l.1 as isize);
    let (ri, rj) = (center_r.0 as isize, center_r.1 as isize);
    let mut cross = 0.0;
    for a in -n..=n {
        for b in -n..=n {
            let l = left.get_clamped(li + a, lj + b) - sl.mean;
            let r = right.get_clamped(ri + a, rj + b) - sr.mean;
            cross += l * r;
        }
    }
    let area = ((2 * half + 1) * (2 * half + 1)) as f64;
    Ok((cross / (area * sl.sigma * sr.sigma)).clamp(-1.0, 1.0))
}

/// Costs of every candidate disparity at one pixel, or their sum over a
/// neighborhood when `members > 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DsiSlice {
    pub pixel: (usize, usize),
    pub costs: Vec<f64>,
    pub evaluated: Vec<bool>,
    /// Number of pixels whose costs were summed into `costs`.
    pub members: usize,
}

impl DsiSlice {
    /// Best candidate, ties broken toward the smallest disparity.
    pub fn argmax(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (z, (&c, &e)) in self.costs.iter().zip(&self.evaluated).enumerate() {
            if e && best.is_none_or(|(_, b)| c > b) {
                best = Some((z, c));
            }
        }
        best
    }
}

/// A range of candidate disparities to evaluate at one column of a row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Request {
    pub col: usize,
    pub lo: usize,
    pub hi: usize,
}

/// Reusable buffers for [`LevelCost::fill_row`].
pub(crate) struct RowScratch {
    colbuf: Vec<f64>,
    stamps: Vec<u32>,
    stamp: u32,
    by_z: Vec<Vec<u32>>,
}

impl RowScratch {
    pub(crate) fn new(cost: &LevelCost) -> Self {
        Self {
            colbuf: vec![0.0; cost.padded_width],
            stamps: vec![0; cost.padded_width],
            stamp: 0,
            by_z: vec![Vec::new(); cost.d_max + 1],
        }
    }
}

/// Disparity-space evaluator for one pyramid level.
///
/// Counts every entry it produces; the count is the basis of the
/// complexity checks and is exact under concurrent use.
pub struct LevelCost {
    width: usize,
    height: usize,
    half: usize,
    area: f64,
    d_max: usize,
    sign: SignConvention,
    sigma_eps: f64,
    padded_width: usize,
    padded_height: usize,
    // column-major, replicate padded by `half`, shifted by the image mean
    left_cols: Vec<f64>,
    right_cols: Vec<f64>,
    left_stats: Vec<PatchStats>,
    right_stats: Vec<PatchStats>,
    evaluations: AtomicU64,
}

impl LevelCost {
    pub fn new(
        left: &GrayImage,
        right: &GrayImage,
        half: usize,
        d_max: usize,
        sign: SignConvention,
        sigma_eps: f64,
    ) -> Self {
        assert_eq!(left.dims(), right.dims(), "stereo pair dimensions differ");
        let (width, height) = left.dims();
        let padded_width = width + 2 * half;
        let padded_height = height + 2 * half;
        let side = 2 * half + 1;

        let pad = |img: &GrayImage| {
            let offset = img.as_slice().iter().sum::<f64>() / img.as_slice().len() as f64;
            let mut cols = vec![0.0; padded_width * padded_height];
            for c in 0..padded_width {
                let src_c = (c as isize - half as isize).clamp(0, width as isize - 1) as usize;
                for r in 0..padded_height {
                    let src_r =
                        (r as isize - half as isize).clamp(0, height as isize - 1) as usize;
                    cols[c * padded_height + r] = img.get(src_r, src_c) - offset;
                }
            }
            cols
        };
        let left_cols = pad(left);
        let right_cols = pad(right);

        let stats = |cols: &[f64]| {
            let area = (side * side) as f64;
            let mut out = Vec::with_capacity(width * height);
            for i in 0..height {
                for j in 0..width {
                    let mut sum = 0.0;
                    for b in 0..side {
                        let col = &cols[(j + b) * padded_height + i..][..side];
                        sum += col.iter().sum::<f64>();
                    }
                    let mean = sum / area;
                    let mut sq = 0.0;
                    for b in 0..side {
                        let col = &cols[(j + b) * padded_height + i..][..side];
                        sq += col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
                    }
                    out.push(PatchStats {
                        mean,
                        sigma: (sq / area).sqrt(),
                    });
                }
            }
            out
        };
        let (left_stats, right_stats) = rayon::join(|| stats(&left_cols), || stats(&right_cols));

        Self {
            width,
            height,
            half,
            area: (side * side) as f64,
            d_max,
            sign,
            sigma_eps,
            padded_width,
            padded_height,
            left_cols,
            right_cols,
            left_stats,
            right_stats,
            evaluations: AtomicU64::new(0),
        }
    }

    pub fn from_level(level: &PyramidLevel, cfg: &MatchConfig) -> Self {
        Self::new(
            &level.left,
            &level.right,
            level.half_block(),
            level.d_max as usize,
            cfg.sign,
            cfg.sigma_eps,
        )
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn d_max(&self) -> usize {
        self.d_max
    }

    #[inline]
    pub fn half_block(&self) -> usize {
        self.half
    }

    pub fn sign(&self) -> SignConvention {
        self.sign
    }

    /// Total entries evaluated so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub(crate) fn add_evaluations(&self, n: u64) {
        self.evaluations.fetch_add(n, Ordering::Relaxed);
    }

    pub fn left_stats(&self, row: usize, col: usize) -> PatchStats {
        self.left_stats[row * self.width + col]
    }

    /// Left patch too flat to match.
    pub fn is_degenerate(&self, row: usize, col: usize) -> bool {
        self.left_stats[row * self.width + col].sigma < self.sigma_eps
    }

    #[inline]
    fn column_product(&self, row: usize, left_col: usize, right_col: usize) -> f64 {
        let side = 2 * self.half + 1;
        let l = &self.left_cols[left_col * self.padded_height + row..][..side];
        let r = &self.right_cols[right_col * self.padded_height + row..][..side];
        l.iter().zip(r).map(|(a, b)| a * b).sum()
    }

    #[inline]
    fn finish(&self, cross: f64, ls: PatchStats, rs: PatchStats) -> f64 {
        let num = cross - self.area * ls.mean * rs.mean;
        (num / (self.area * ls.sigma * rs.sigma)).clamp(-1.0, 1.0)
    }

    /// Statistics for the candidate, or `None` when the cost is fixed at
    /// [`WORST_COST`].
    #[inline]
    fn candidate(&self, row: usize, col: usize, z: usize) -> Option<(usize, PatchStats, PatchStats)> {
        let rc = self.sign.right_column(col, z, self.width)?;
        let ls = self.left_stats[row * self.width + col];
        let rs = self.right_stats[row * self.width + rc];
        if ls.sigma < self.sigma_eps || rs.sigma < self.sigma_eps {
            return None;
        }
        Some((rc, ls, rs))
    }

    fn compute(&self, row: usize, col: usize, z: usize) -> f64 {
        let Some((rc, ls, rs)) = self.candidate(row, col, z) else {
            return WORST_COST;
        };
        let mut cross = 0.0;
        for b in 0..=2 * self.half {
            cross += self.column_product(row, col + b, rc + b);
        }
        self.finish(cross, ls, rs)
    }

    /// One disparity-space entry: ZNCC of the left patch at `(row, col)`
    /// against the right patch displaced by `z` along the row.
    pub fn dsi_entry(&self, row: usize, col: usize, z: usize) -> Result<f64, CostError> {
        if row >= self.height || col >= self.width {
            return Err(CostError::OutOfBounds {
                row,
                col,
                width: self.width,
                height: self.height,
            });
        }
        if z > self.d_max {
            return Err(CostError::DisparityOutOfRange { z, d_max: self.d_max });
        }
        self.add_evaluations(1);
        Ok(self.compute(row, col, z))
    }

    /// Every candidate at one pixel.
    pub fn dsi_slice(&self, row: usize, col: usize) -> Result<DsiSlice, CostError> {
        let costs = (0..=self.d_max)
            .map(|z| self.dsi_entry(row, col, z))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DsiSlice {
            pixel: (row, col),
            evaluated: vec![true; costs.len()],
            costs,
            members: 1,
        })
    }

    /// Evaluates all requested entries of `row`, writing entry `(col, z)` to
    /// `values[col * (d_max + 1) + z]`. Column products are computed once per
    /// `(column, z)` and reused by neighboring requests. Returns the number
    /// of entries produced; the caller accounts for them.
    pub(crate) fn fill_row(
        &self,
        row: usize,
        requests: &[Request],
        values: &mut [f64],
        scratch: &mut RowScratch,
    ) -> u64 {
        let stride = self.d_max + 1;
        let RowScratch {
            colbuf,
            stamps,
            stamp,
            by_z,
        } = scratch;
        for list in by_z.iter_mut() {
            list.clear();
        }
        let mut produced = 0u64;
        for req in requests {
            debug_assert!(req.lo <= req.hi && req.hi <= self.d_max);
            for list in &mut by_z[req.lo..=req.hi] {
                list.push(req.col as u32);
            }
            produced += (req.hi - req.lo + 1) as u64;
        }
        for (z, cols) in by_z.iter().enumerate() {
            if cols.is_empty() {
                continue;
            }
            *stamp = stamp.wrapping_add(1);
            if *stamp == 0 {
                stamps.fill(0);
                *stamp = 1;
            }
            for &col in cols {
                let col = col as usize;
                let value = match self.candidate(row, col, z) {
                    None => WORST_COST,
                    Some((rc, ls, rs)) => {
                        let shift = rc as isize - col as isize;
                        let mut cross = 0.0;
                        for c in col..=col + 2 * self.half {
                            if stamps[c] != *stamp {
                                colbuf[c] =
                                    self.column_product(row, c, (c as isize + shift) as usize);
                                stamps[c] = *stamp;
                            }
                            cross += colbuf[c];
                        }
                        self.finish(cross, ls, rs)
                    }
                };
                values[col * stride + z] = value;
            }
        }
        produced
    }
}

/// Sum of the neighbors' disparity-space vectors around `(row, col)`.
///
/// Neighbors falling outside the image are dropped; if none remain the
/// pixel's own vector is returned.
pub fn averaged_dsi(
    cost: &LevelCost,
    row: usize,
    col: usize,
    neighborhood: &[(isize, isize)],
) -> Result<DsiSlice, CostError> {
    if row >= cost.height || col >= cost.width {
        return Err(CostError::OutOfBounds {
            row,
            col,
            width: cost.width,
            height: cost.height,
        });
    }
    let mut costs = vec![0.0; cost.d_max + 1];
    let mut members = 0;
    for &(di, dj) in neighborhood {
        let (r, c) = (row as isize + di, col as isize + dj);
        if r < 0 || c < 0 || r >= cost.height as isize || c >= cost.width as isize {
            continue;
        }
        members += 1;
        for (z, acc) in costs.iter_mut().enumerate() {
            *acc += cost.dsi_entry(r as usize, c as usize, z)?;
        }
    }
    if members == 0 {
        return cost.dsi_slice(row, col);
    }
    Ok(DsiSlice {
        pixel: (row, col),
        evaluated: vec![true; costs.len()],
        costs,
        members,
    })
}
