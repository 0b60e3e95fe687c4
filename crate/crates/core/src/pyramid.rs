//! Gaussian stereo pyramid and the per-level disparity/block schedule.
//!
//! Level 0 is the input resolution, level `K` the coarsest. Each level is
//! the previous one smoothed with the separable binomial kernel
//! `(1, 4, 6, 4, 1) / 16` (replicate borders) and sampled at even
//! coordinates, so level `k + 1` is `ceil(dim / 2)` of level `k`.

use crate::config::{Levels, MatchConfig};
use crate::error::PyramidError;
use crate::raster::GrayImage;

const BINOMIAL: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];

/// Smooths with the 5-tap binomial kernel and keeps even rows and columns.
pub fn gaussian_downsample(img: &GrayImage) -> Result<GrayImage, PyramidError> {
    let (w, h) = img.dims();
    if w < 2 || h < 2 {
        return Err(PyramidError::TooSmall {
            width: w,
            height: h,
        });
    }
    let ow = w.div_ceil(2);
    let oh = h.div_ceil(2);

    // horizontal pass, only at the columns that survive decimation
    let mut horiz = vec![0.0; h * ow];
    for r in 0..h {
        let row = img.row(r);
        for oj in 0..ow {
            let c = (2 * oj) as isize;
            let mut acc = 0.0;
            for (t, k) in BINOMIAL.iter().enumerate() {
                let src = (c + t as isize - 2).clamp(0, w as isize - 1) as usize;
                acc += k * row[src];
            }
            horiz[r * ow + oj] = acc / 16.0;
        }
    }

    let mut out = vec![0.0; oh * ow];
    for oi in 0..oh {
        let r = (2 * oi) as isize;
        for oj in 0..ow {
            let mut acc = 0.0;
            for (t, k) in BINOMIAL.iter().enumerate() {
                let src = (r + t as isize - 2).clamp(0, h as isize - 1) as usize;
                acc += k * horiz[src * ow + oj];
            }
            out[oi * ow + oj] = acc / 16.0;
        }
    }
    Ok(GrayImage::new(ow, oh, out)?)
}

/// `max(1, floor(d_max / 2^k))`.
pub fn level_d_max(d_max: u32, k: u32) -> u32 {
    d_max.checked_shr(k).unwrap_or(0).max(1)
}

/// Base block halved `k` times, rounded down to odd, never below 3.
pub fn level_block(base_block: u32, k: u32) -> u32 {
    let v = base_block.checked_shr(k).unwrap_or(0);
    let v = if v.is_multiple_of(2) { v.saturating_sub(1) } else { v };
    v.max(3)
}

/// Largest `K` with `min(width, height) / 2^K >= 4 * base_block` and
/// `floor(d_max / 2^K) >= 2`, or 0 when even `K = 1` fails.
pub fn auto_levels(width: usize, height: usize, d_max: u32, base_block: u32) -> u32 {
    let min_dim = width.min(height) as u64;
    let fits = |k: u32| {
        k < 63
            && min_dim >= 4 * u64::from(base_block) * (1u64 << k)
            && d_max.checked_shr(k).unwrap_or(0) >= 2
    };
    let mut k = 0;
    while fits(k + 1) {
        k += 1;
    }
    k
}

#[derive(Clone, Debug, PartialEq)]
pub struct PyramidLevel {
    pub left: GrayImage,
    pub right: GrayImage,
    pub d_max: u32,
    pub block: u32,
}

impl PyramidLevel {
    pub fn dims(&self) -> (usize, usize) {
        self.left.dims()
    }

    pub fn half_block(&self) -> usize {
        (self.block / 2) as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StereoPyramid {
    levels: Vec<PyramidLevel>,
}

impl StereoPyramid {
    pub fn levels(&self) -> &[PyramidLevel] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &PyramidLevel {
        &self.levels[k]
    }

    /// Index of the coarsest level, `K`.
    pub fn coarsest(&self) -> usize {
        self.levels.len() - 1
    }
}

/// Resolves `cfg.levels` against the image size.
pub fn resolve_levels(width: usize, height: usize, cfg: &MatchConfig) -> u32 {
    match cfg.levels {
        Levels::Auto => auto_levels(width, height, cfg.d_max, cfg.base_block),
        Levels::Fixed(k) => k,
    }
}

pub fn build_pyramid(
    left: &GrayImage,
    right: &GrayImage,
    cfg: &MatchConfig,
) -> Result<StereoPyramid, PyramidError> {
    cfg.validate()?;
    if left.dims() != right.dims() {
        return Err(PyramidError::DimensionMismatch {
            left: left.dims(),
            right: right.dims(),
        });
    }
    let (w, h) = left.dims();
    let k_max = resolve_levels(w, h, cfg);

    if k_max > 0 {
        let d_coarse = cfg.d_max.checked_shr(k_max).unwrap_or(0);
        if d_coarse < 2 {
            return Err(PyramidError::TooManyLevels {
                levels: k_max,
                reason: format!("coarsest disparity range {d_coarse} is below 2"),
            });
        }
        let (mut cw, mut ch) = (w, h);
        for _ in 0..k_max {
            if cw < 2 || ch < 2 {
                return Err(PyramidError::TooManyLevels {
                    levels: k_max,
                    reason: format!("image shrinks below 2 pixels ({cw}x{ch})"),
                });
            }
            cw = cw.div_ceil(2);
            ch = ch.div_ceil(2);
        }
        let block = level_block(cfg.base_block, k_max) as usize;
        if cw.min(ch) < 2 * block {
            return Err(PyramidError::TooManyLevels {
                levels: k_max,
                reason: format!("coarsest image {cw}x{ch} smaller than twice block {block}"),
            });
        }
    }

    let mut levels = Vec::with_capacity(k_max as usize + 1);
    levels.push(PyramidLevel {
        left: left.clone(),
        right: right.clone(),
        d_max: level_d_max(cfg.d_max, 0),
        block: level_block(cfg.base_block, 0),
    });
    for k in 1..=k_max {
        let prev = levels.last().expect("level 0 present");
        let (l, r) = rayon::join(
            || gaussian_downsample(&prev.left),
            || gaussian_downsample(&prev.right),
        );
        levels.push(PyramidLevel {
            left: l?,
            right: r?,
            d_max: level_d_max(cfg.d_max, k),
            block: level_block(cfg.base_block, k),
        });
    }
    Ok(StereoPyramid { levels })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_downsample(img: &GrayImage) -> Vec<f64> {
        let (w, h) = img.dims();
        let mut out = Vec::new();
        for oi in 0..h.div_ceil(2) {
            for oj in 0..w.div_ceil(2) {
                let mut acc = 0.0;
                for a in 0..5 {
                    for b in 0..5 {
                        let v = img.get_clamped(
                            (2 * oi + a) as isize - 2,
                            (2 * oj + b) as isize - 2,
                        );
                        acc += BINOMIAL[a] * BINOMIAL[b] / 256.0 * v;
                    }
                }
                out.push(acc);
            }
        }
        out
    }

    #[test]
    fn constant_stays_constant() {
        for &(w, h) in &[(4, 4), (7, 5), (2, 9)] {
            let img = GrayImage::constant(w, h, 0.37).unwrap();
            let out = gaussian_downsample(&img).unwrap();
            assert_eq!(out.dims(), (w.div_ceil(2), h.div_ceil(2)));
            for v in out.as_slice() {
                assert!((v - 0.37).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn ramp_matches_dense_convolution() {
        let ramp = GrayImage::from_fn(8, 8, |i, j| (i * 8 + j) as f64 / 63.0).unwrap();
        let got = gaussian_downsample(&ramp).unwrap();
        assert_eq!(got.dims(), (4, 4));
        for (a, b) in got.as_slice().iter().zip(naive_downsample(&ramp)) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        // odd sizes keep the last row and column
        let odd = GrayImage::from_fn(9, 7, |i, j| ((i * 31 + j * 17) % 11) as f64 / 10.0).unwrap();
        let got = gaussian_downsample(&odd).unwrap();
        assert_eq!(got.dims(), (5, 4));
        for (a, b) in got.as_slice().iter().zip(naive_downsample(&odd)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_input() {
        let img = GrayImage::constant(1, 5, 0.0).unwrap();
        assert!(matches!(
            gaussian_downsample(&img),
            Err(PyramidError::TooSmall { .. })
        ));
    }

    #[test]
    fn schedules() {
        let d: Vec<u32> = (0..3).map(|k| level_d_max(64, k)).collect();
        assert_eq!(d, vec![64, 32, 16]);
        let b: Vec<u32> = (0..3).map(|k| level_block(11, k)).collect();
        assert_eq!(b, vec![11, 5, 3]);
        assert_eq!(level_d_max(5, 3), 1);
        assert_eq!(level_block(13, 1), 5);
        assert_eq!(level_block(15, 1), 7);
    }

    #[test]
    fn block_schedule_matches_round_down_to_odd() {
        for b in (3..60).step_by(2) {
            for k in 0..6 {
                let mut v = (b as f64 / 2f64.powi(k as i32)).floor() as u32;
                while v % 2 == 0 && v > 0 {
                    v -= 1;
                }
                assert_eq!(level_block(b, k), v.max(3), "b={b} k={k}");
            }
        }
    }

    #[test]
    fn auto_levels_examples() {
        assert_eq!(auto_levels(32, 32, 8, 11), 0);
        assert_eq!(auto_levels(2960, 2016, 256, 11), 5);
        assert_eq!(auto_levels(1000, 1000, 1, 11), 0);
    }

    fn enumerate_levels(w: usize, h: usize, d: u32, b: u32) -> u32 {
        let ok = |k: u32| {
            (w.min(h) as f64) / 2f64.powi(k as i32) >= 4.0 * b as f64
                && (d as f64 / 2f64.powi(k as i32)).floor() >= 2.0
        };
        let mut k = 0;
        while ok(k + 1) {
            k += 1;
        }
        k
    }

    #[test]
    fn auto_levels_agrees_with_enumeration() {
        for &(w, h, d, b) in &[
            (2960, 2016, 256, 11),
            (450, 375, 64, 11),
            (741, 497, 70, 9),
            (64, 64, 16, 3),
            (5000, 40, 256, 5),
        ] {
            assert_eq!(auto_levels(w, h, d, b), enumerate_levels(w, h, d, b));
        }
    }

    #[test]
    fn pyramid_levels_and_errors() {
        let img = GrayImage::from_fn(64, 48, |i, j| ((i ^ j) % 7) as f64 / 7.0).unwrap();
        let cfg = MatchConfig::default()
            .with_d_max(16)
            .with_block(5)
            .with_levels(Levels::Fixed(2));
        let p = build_pyramid(&img, &img, &cfg).unwrap();
        assert_eq!(p.coarsest(), 2);
        assert_eq!(p.level(0).left, img);
        assert_eq!(p.level(1).dims(), (32, 24));
        assert_eq!(p.level(2).dims(), (16, 12));
        let d: Vec<u32> = p.levels().iter().map(|l| l.d_max).collect();
        assert_eq!(d, vec![16, 8, 4]);

        let k0 = build_pyramid(&img, &img, &cfg.with_levels(Levels::Fixed(0))).unwrap();
        assert_eq!(k0.levels().len(), 1);
        assert_eq!((k0.level(0).d_max, k0.level(0).block), (16, 5));

        let too_deep = cfg.with_levels(Levels::Fixed(4));
        assert!(matches!(
            build_pyramid(&img, &img, &too_deep),
            Err(PyramidError::TooManyLevels { .. })
        ));
        let other = GrayImage::constant(63, 48, 0.0).unwrap();
        assert!(matches!(
            build_pyramid(&img, &other, &cfg),
            Err(PyramidError::DimensionMismatch { .. })
        ));
    }
}
